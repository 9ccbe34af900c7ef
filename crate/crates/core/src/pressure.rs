//! The conformal pressure equation `(m-1) Laplacian p + s0 p = source`.

use serde::{Deserialize, Serialize};

use crate::band::{smallest_singular_value, BandMatrix};
use crate::error::{ensure_finite, Error, Result};
use crate::geometry::radial::{scalar_radial, ScalarLinearization};
use crate::geometry::tensor::{CurvatureData, Metric};
use crate::geometry::RadialMetric;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PressureStatus {
    Ok,
    NearResonant,
    Failed,
}

/// Conformal pressure on the metric's grid, or a single constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureField {
    pub values: Vec<f64>,
    pub residual_norm: f64,
    pub status: PressureStatus,
}

impl PressureField {
    pub fn zeros(n: usize) -> Self {
        PressureField { values: vec![0.0; n], residual_norm: 0.0, status: PressureStatus::Ok }
    }

    pub fn usable(&self) -> bool {
        self.status != PressureStatus::Failed
    }
}

fn residual_tolerance(source: &[f64]) -> f64 {
    1e-10 * (1.0 + source.iter().fold(0.0f64, |m, x| m.max(x.abs())))
}

fn robin_row(g: &RadialMetric) -> Vec<(usize, f64)> {
    let n = g.grid.n_nodes;
    let ops = g.grid.ops();
    let mut row = ops.row(n - 1, 1, g.grid.rules().scalar);
    let decay = g.dimension() as f64 - 2.0;
    match row.iter_mut().find(|(j, _)| *j == n - 1) {
        Some(e) => e.1 += decay,
        None => row.push((n - 1, decay)),
    }
    row
}

/// Rows of `p -> -J(p g)`, which equals `(m-1) Laplacian p + s p` for the discrete `s`,
/// with the outer row replaced by the decay condition.
fn conformal_rows(g: &RadialMetric) -> Vec<Vec<(usize, f64)>> {
    let lin = ScalarLinearization::new(g);
    let mut rows = lin.conformal_rows(g);
    let n = rows.len();
    rows[n - 1] = robin_row(g);
    rows
}

/// Rows of `(m-1) Laplacian + s0` consistent with the discrete scalar curvature.
pub fn pressure_rows(g: &RadialMetric, s0: f64) -> Vec<Vec<(usize, f64)>> {
    let s = scalar_radial(g);
    let mut rows = conformal_rows(g);
    let n = rows.len();
    for (i, row) in rows.iter_mut().enumerate().take(n - 1) {
        let shift = s0 - s[i];
        match row.iter_mut().find(|(j, _)| *j == i) {
            Some(e) => e.1 += shift,
            None => row.push((i, shift)),
        }
    }
    rows
}

/// Interior rows weighted by `rho^2`, which removes the `rho^-2` scale of the operator.
fn weighted(g: &RadialMetric, rows: &[Vec<(usize, f64)>]) -> BandMatrix {
    let n = rows.len();
    let mut m = BandMatrix::from_rows(rows);
    for i in 0..n - 1 {
        let r = g.grid.nodes[i];
        m.scale_row(i, r * r);
    }
    m
}

fn solve_rows(g: &RadialMetric, rows: &[Vec<(usize, f64)>], rhs: &[f64]) -> Result<PressureField> {
    ensure_finite(rhs, "pressure source")?;
    let n = rows.len();
    let a = weighted(g, rows);
    let w: Vec<f64> = (0..n)
        .map(|i| if i + 1 < n { g.grid.nodes[i] * g.grid.nodes[i] } else { 1.0 })
        .collect();
    let lu = a.factor()?;
    let b: Vec<f64> = rhs.iter().zip(&w).map(|(f, w)| f * w).collect();
    let mut p = lu.solve(&b);
    let tol = residual_tolerance(rhs);
    let residual = |p: &[f64]| -> Vec<f64> { a.mul_vec(p).iter().zip(&b).map(|(l, f)| f - l).collect() };
    let mut r = residual(&p);
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for _ in 0..3 {
        if norm(&r) <= tol {
            break;
        }
        let d = lu.solve(&r);
        p.iter_mut().zip(&d).for_each(|(x, y)| *x += y);
        r = residual(&p);
    }
    ensure_finite(&p, "pressure")?;
    let residual_norm = norm(&r);
    let status = if residual_norm <= tol { PressureStatus::Ok } else { PressureStatus::Failed };
    Ok(PressureField { values: p, residual_norm, status })
}

/// Solve `(m-1) Laplacian p + s0 p = source` on a radial grid. The inner end
/// uses the grid closure, the outer end the decay condition `rho p' + (m-2) p = 0`.
pub fn solve_pressure_radial(g: &RadialMetric, s0: f64, source: &[f64]) -> Result<PressureField> {
    if source.len() != g.grid.n_nodes {
        return Err(Error::InvalidConfig("source length differs from the grid".into()));
    }
    let rows = pressure_rows(g, s0);
    let mut rhs = source.to_vec();
    let n = rhs.len();
    rhs[n - 1] = 0.0;
    solve_rows(g, &rows, &rhs)
}

/// Pressure used by the flow: the solution of `-J(p g) = J(E)`, where `J` is
/// the linearized discrete scalar curvature. This keeps the discrete scalar
/// curvature stationary; its source equals `-|E|^2` up to discretization error.
pub fn solve_flow_pressure(g: &RadialMetric, curv: &CurvatureData) -> Result<PressureField> {
    let rows = conformal_rows(g);
    let lin = ScalarLinearization::new(g);
    let mut rhs = lin.apply_tensor(g, &curv.deviation.components);
    let n = rhs.len();
    rhs[n - 1] = 0.0;
    solve_rows(g, &rows, &rhs)
}

/// Constant pressure `-|E|^2 / s0` of a homogeneous metric.
pub fn pressure_homogeneous(deviation_norm_sq: f64, s0: f64) -> Result<PressureField> {
    if s0 == 0.0 {
        return Err(Error::NonInvertibleOperator(
            "constants lie in the kernel of the Laplacian when s0 = 0".into(),
        ));
    }
    if !deviation_norm_sq.is_finite() {
        return Err(Error::NumericalBreakdown("non-finite |E|^2".into()));
    }
    Ok(PressureField { values: vec![-deviation_norm_sq / s0], residual_norm: 0.0, status: PressureStatus::Ok })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertibilityReport {
    pub smallest_singular_value: f64,
    pub scale: f64,
    pub status: PressureStatus,
}

/// Highest spin block examined in the homogeneous class.
const MAX_SPIN2: usize = 16;

/// Smallest singular value of the discrete operator `(m-1) Laplacian + s0`.
///
/// Radial rows are weighted by `rho^2` so the estimate is scale free; the
/// homogeneous class uses the exact spectrum on low spin blocks.
pub fn invertibility_estimate(g: &Metric, s0: f64) -> Result<InvertibilityReport> {
    let (sigma, scale) = match g {
        Metric::Radial(r) => {
            let a = weighted(r, &pressure_rows(r, s0));
            let n = a.size();
            let scale = (0..n)
                .map(|i| (0..n).map(|j| a.get(i, j).abs()).sum::<f64>())
                .fold(0.0, f64::max);
            (smallest_singular_value(&a)?, scale)
        }
        Metric::Homogeneous(h) => {
            let m1 = (g.dimension() - 1) as f64;
            let l = h.milnor_constants().map(f64::abs);
            let kappa2 = [l[1] * l[2], l[0] * l[2], l[0] * l[1]];
            let top = (0..3).map(|i| kappa2[i] / h.coeffs[i]).fold(0.0, f64::max);
            let scale = s0.abs() + m1 * top;
            let mut sigma = s0.abs();
            for j2 in 1..=MAX_SPIN2 {
                let block = h.laplacian_block(j2)?;
                for e in block.symmetric_eigen().eigenvalues.iter() {
                    sigma = sigma.min((m1 * e + s0).abs());
                }
            }
            (sigma, scale)
        }
    };
    let status = if sigma < 1e-6 * scale { PressureStatus::NearResonant } else { PressureStatus::Ok };
    Ok(InvertibilityReport { smallest_singular_value: sigma, scale, status })
}

/// Conformally rescale `g` until its discrete scalar curvature equals `s0`.
pub fn project_scalar_curvature(g: &RadialMetric, s0: f64) -> Result<RadialMetric> {
    let mut g = g.clone();
    let weight: Vec<f64> = g.grid.nodes.iter().map(|r| r * r).collect();
    let mut last = f64::INFINITY;
    for _ in 0..40 {
        let s = scalar_radial(&g);
        let r: Vec<f64> = s.iter().map(|x| x - s0).collect();
        // the outer row carries the decay condition instead of the target
        let n = r.len();
        let err = r[..n - 1].iter().zip(&weight).fold(0.0f64, |m, (x, w)| m.max((x * w).abs()));
        if err < 1e-14 || err >= 0.5 * last {
            if err < 1e-9 {
                return Ok(g);
            }
            break;
        }
        last = err;
        let rows = conformal_rows(&g);
        let mut rhs = r;
        rhs[n - 1] = 0.0;
        let v = solve_rows(&g, &rows, &rhs)?.values;
        let a = g.a.iter().zip(&v).map(|(a, v)| a * (0.5 * v).exp()).collect();
        let b = g.b.iter().zip(&v).map(|(b, v)| b * (0.5 * v).exp()).collect();
        g = g.with_profiles(a, b);
    }
    Err(Error::NumericalBreakdown(format!(
        "scalar curvature projection stalled at weighted error {last:e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_radial_grid, InnerClosure};

    #[test]
    fn zero_source_zero_pressure() {
        let g = RadialMetric::euclidean(build_radial_grid(1.0, 100.0, 64, 3).unwrap());
        let p = solve_pressure_radial(&g, 0.0, &[0.0; 64]).unwrap();
        assert!(p.values.iter().all(|v| *v == 0.0));
        assert_eq!(p.status, PressureStatus::Ok);
    }

    #[test]
    fn homogeneous_constants() {
        assert_eq!(pressure_homogeneous(0.0, 6.0).unwrap().values[0], 0.0);
        assert_eq!(pressure_homogeneous(3.0, -6.0).unwrap().values[0], 0.5);
        assert_eq!(pressure_homogeneous(3.0, 6.0).unwrap().values[0], -0.5);
        assert!(matches!(pressure_homogeneous(1.0, 0.0), Err(Error::NonInvertibleOperator(_))));
    }

    #[test]
    fn projection_reaches_target() {
        let grid = build_radial_grid(0.05, 1000.0, 200, 3).unwrap().with_closure(InnerClosure::Inversion);
        let g = RadialMetric::schwarzschild_conformal(grid, 0.1).unwrap();
        let p = project_scalar_curvature(&g, 0.0).unwrap();
        let s = scalar_radial(&p);
        let w = s[..199].iter().zip(&p.grid.nodes).fold(0.0f64, |m, (s, r)| m.max((s * r * r).abs()));
        assert!(w < 1e-9, "{w}");
        // the projection is a small correction
        let d = p.a.iter().zip(&g.a).fold(0.0f64, |m, (x, y)| m.max((x / y - 1.0).abs()));
        assert!(d < 1e-4, "{d}");
    }
}
