use serde::{Deserialize, Serialize};

use super::three_point_derivative;
use crate::error::{Error, Result};
use crate::flow::FlowTrajectory;
use crate::geometry::radial::sphere_area;
use crate::geometry::stencil::{interpolate, LeftRule};
use crate::geometry::tensor::Metric;
use crate::geometry::RadialMetric;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub mass: f64,
    pub error: f64,
    /// `(R, m(R))` ladder used for the extrapolation.
    pub ladder: Vec<(f64, f64)>,
}

/// `rho_max / {100, 30, 10}`, keeping radii inside the grid.
pub fn default_mass_radii(g: &RadialMetric) -> Vec<f64> {
    let rmax = g.grid.rho_max;
    [100.0, 30.0, 10.0]
        .iter()
        .map(|d| rmax / d)
        .filter(|r| *r > g.grid.rho_min)
        .collect()
}

/// Flux integral over the coordinate sphere of radius `r`, normalized by the
/// unit-sphere area. For the radial class the angular integral is exact:
/// `(m-1) r^(m-2) (A^2 - B^2 - r d(B^2)/dr)`.
pub fn quasi_local_mass(g: &RadialMetric, r: f64) -> f64 {
    let grid = &g.grid;
    let m = grid.dimension;
    let ops = grid.ops();
    let b2: Vec<f64> = g.b.iter().map(|b| b * b).collect();
    let db2 = ops.d1(&b2, LeftRule::OneSided);
    let q: Vec<f64> = (0..grid.n_nodes)
        .map(|i| {
            let rho = grid.nodes[i];
            (m - 1) as f64 * rho.powi(m as i32 - 2) * (g.a[i] * g.a[i] - b2[i] - db2[i])
        })
        .collect();
    interpolate(&q, grid.u0(), grid.log_step, LeftRule::OneSided, 6, r.ln())
}

/// ADM mass by Richardson extrapolation of the quasi-local mass in `R^-tau`.
///
/// The error bar is the largest deviation of a leave-one-out extrapolant from
/// the full one.
pub fn adm_mass(g: &RadialMetric, radii: &[f64]) -> Result<MassEstimate> {
    let mut rs = radii.to_vec();
    rs.sort_by(f64::total_cmp);
    if rs.len() < 3 {
        return Err(Error::InvalidConfig(format!("need at least 3 radii, got {}", rs.len())));
    }
    let (lo, hi) = (rs[0], rs[rs.len() - 1]);
    if lo < g.grid.rho_min || hi > g.grid.rho_max {
        return Err(Error::InvalidConfig(format!(
            "radii [{lo}, {hi}] leave the grid [{}, {}]",
            g.grid.rho_min, g.grid.rho_max
        )));
    }
    if hi / lo < 10.0 * (1.0 - 1e-9) {
        return Err(Error::InvalidConfig("radii must span at least one decade".into()));
    }
    let ladder: Vec<(f64, f64)> = rs.iter().map(|&r| (r, quasi_local_mass(g, r))).collect();
    let x: Vec<f64> = rs.iter().map(|r| r.powf(-g.tau)).collect();
    let y: Vec<f64> = ladder.iter().map(|l| l.1).collect();
    let mass = neville_at_zero(&x, &y);
    let error = (0..x.len())
        .map(|skip| {
            let (xs, ys): (Vec<f64>, Vec<f64>) =
                x.iter().zip(&y).enumerate().filter(|(i, _)| *i != skip).map(|(_, (a, b))| (*a, *b)).unzip();
            (mass - neville_at_zero(&xs, &ys)).abs()
        })
        .fold(0.0, f64::max);
    if !mass.is_finite() {
        return Err(Error::NumericalBreakdown("non-finite mass".into()));
    }
    if error > 0.1 * mass.abs() && error > 1e-12 {
        return Err(Error::InsufficientDecay(format!(
            "extrapolants around {mass} spread by {error}, more than 10%"
        )));
    }
    Ok(MassEstimate { mass, error, ladder })
}

fn neville_at_zero(x: &[f64], y: &[f64]) -> f64 {
    let mut p = y.to_vec();
    let n = x.len();
    for level in 1..n {
        for i in 0..n - level {
            let j = i + level;
            p[i] = (x[j] * p[i] - x[i] * p[i + 1]) / (x[j] - x[i]);
        }
    }
    p[0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassDerivativeReport {
    pub times: Vec<f64>,
    pub mass: Vec<f64>,
    /// `omega dm/dt` at interior frames, `omega` the unit-sphere area.
    pub lhs: Vec<f64>,
    /// `-2 int |Ric|^2 dvol` at interior frames.
    pub rhs: Vec<f64>,
    /// `|lhs - rhs| / |lhs|`.
    pub relative_residual: Vec<f64>,
    /// `|lhs| / |rhs|`, the relative rate of mass change.
    pub change_ratio: Vec<f64>,
    /// Mean of `(dm/dt) / (-2 int |Ric|^2 dvol)` without the sphere area.
    pub unnormalized_ratio: f64,
    pub max_relative_residual: f64,
    pub max_change_ratio: f64,
    pub monotone_decreasing: bool,
}

/// Compare the mass rate with the curvature integral along a radial trajectory.
///
/// The mass is normalized by the unit-sphere area, so the identity reads
/// `omega dm/dt = -2 int |Ric|^2 dvol`.
pub fn mass_derivative_check(traj: &FlowTrajectory) -> Result<MassDerivativeReport> {
    let Some(Metric::Radial(g0)) = traj.states.first().map(|s| &s.metric) else {
        return Err(Error::UnsupportedGeometry("mass needs an asymptotically flat trajectory".into()));
    };
    let m = g0.grid.dimension as f64;
    if !(g0.tau > (m - 2.0) / 2.0 && g0.tau <= m - 2.0) {
        return Err(Error::InvalidConfig(format!(
            "decay order {} outside ((m-2)/2, m-2]",
            g0.tau
        )));
    }
    let omega = sphere_area(g0.grid.dimension - 1);
    let mut mass = Vec::new();
    let mut ric = Vec::new();
    for (k, st) in traj.states.iter().enumerate() {
        let g = st.metric.as_radial().expect("radial trajectory");
        let rec = traj.diagnostics.get(k);
        let mk = match rec.and_then(|r| r.mass) {
            Some(v) => v,
            None => {
                let radii = traj.config.mass_radii.clone().unwrap_or_else(|| default_mass_radii(g));
                adm_mass(g, &radii)?.mass
            }
        };
        mass.push(mk);
        ric.push(match rec {
            Some(r) => r.ric_l2,
            None => super::radial_integral(g, &st.curvature.ric_norm_sq).total(),
        });
    }
    let times = traj.times();
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    let mut rel = Vec::new();
    let mut change = Vec::new();
    let mut ratio_sum = 0.0;
    for k in 1..times.len().saturating_sub(1) {
        let dm = three_point_derivative([times[k - 1], times[k], times[k + 1]], [mass[k - 1], mass[k], mass[k + 1]]);
        let l = omega * dm;
        let r = -2.0 * ric[k];
        lhs.push(l);
        rhs.push(r);
        rel.push(if l == 0.0 && r == 0.0 { 0.0 } else { (l - r).abs() / l.abs() });
        change.push(if r == 0.0 { if l == 0.0 { 0.0 } else { f64::INFINITY } } else { (l / r).abs() });
        if r != 0.0 {
            ratio_sum += dm / r;
        }
    }
    let monotone_decreasing = mass.windows(2).all(|w| w[1] < w[0]);
    let count = lhs.len().max(1) as f64;
    Ok(MassDerivativeReport {
        times,
        max_relative_residual: rel.iter().cloned().fold(0.0, f64::max),
        max_change_ratio: change.iter().cloned().fold(0.0, f64::max),
        unnormalized_ratio: ratio_sum / count,
        mass,
        lhs,
        rhs,
        relative_residual: rel,
        change_ratio: change,
        monotone_decreasing,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticFlatnessReport {
    /// Fitted log-log slopes of `|g - g_e|`, `|dg|`, `|d^2 g|` on the outer decade;
    /// `None` when the quantity vanishes identically.
    pub slopes: [Option<f64>; 3],
    pub passes: [bool; 3],
    pub pass: bool,
}

fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(_, v)| **v > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Decay slopes of the metric and its first two derivatives against `tau`.
pub fn asymptotic_flatness_check(g: &RadialMetric, tau: f64) -> AsymptoticFlatnessReport {
    let grid = &g.grid;
    let ops = grid.ops();
    let start = grid.outer_decade_start();
    let fields: [Vec<f64>; 2] = [
        g.a.iter().map(|a| a * a - 1.0).collect(),
        g.b.iter().map(|b| b * b - 1.0).collect(),
    ];
    let d1: Vec<Vec<f64>> = fields.iter().map(|f| ops.d1(f, LeftRule::OneSided)).collect();
    let d2: Vec<Vec<f64>> = fields.iter().map(|f| ops.d2(f, LeftRule::OneSided)).collect();
    let rho = &grid.nodes[start..];
    let mut mags = [vec![], vec![], vec![]];
    for (k, i) in (start..grid.n_nodes).enumerate() {
        let r = rho[k];
        mags[0].push(fields[0][i].abs().max(fields[1][i].abs()));
        mags[1].push(d1[0][i].abs().max(d1[1][i].abs()) / r);
        mags[2].push(((d2[0][i] - d1[0][i]).abs()).max((d2[1][i] - d1[1][i]).abs()) / (r * r));
    }
    let slopes = [0, 1, 2].map(|k| fit_slope(rho, &mags[k]));
    let passes = [0, 1, 2].map(|k| match slopes[k] {
        None => true,
        Some(s) => s <= -tau - k as f64 + 0.2,
    });
    AsymptoticFlatnessReport { slopes, passes, pass: passes.iter().all(|p| *p) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::build_radial_grid;

    #[test]
    fn neville_is_exact_for_lines() {
        let x = [0.1, 0.01, 0.001];
        let y: Vec<f64> = x.iter().map(|v| 2.0 + 3.0 * v).collect();
        assert!((neville_at_zero(&x, &y) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_short_ladders() {
        let g = RadialMetric::euclidean(build_radial_grid(1.0, 1e3, 64, 3).unwrap());
        assert!(adm_mass(&g, &[10.0, 20.0]).is_err());
        assert!(adm_mass(&g, &[10.0, 20.0, 30.0]).is_err());
        assert!(adm_mass(&g, &[10.0, 100.0, 1e4]).is_err());
    }
}
