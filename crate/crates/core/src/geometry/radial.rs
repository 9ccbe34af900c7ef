use serde::{Deserialize, Serialize};

use super::grid::RadialGrid;
use super::stencil::DiffOps;
use super::tensor::{Components, CurvatureData, Metric, SymmetricTwoTensor, TensorRole};
use crate::error::{Error, Result};

/// Rotationally symmetric metric `A(rho)^2 d rho^2 + B(rho)^2 rho^2 dOmega^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialMetric {
    pub grid: RadialGrid,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    /// Asymptotic decay order.
    pub tau: f64,
    /// `max(|A-1|, |B-1|) * rho^tau` over the outer decade at construction.
    pub decay_constant: f64,
}

/// Area of the unit `k`-sphere.
pub fn sphere_area(k: usize) -> f64 {
    match k {
        0 => 2.0,
        1 => 2.0 * std::f64::consts::PI,
        _ => 2.0 * std::f64::consts::PI / (k - 1) as f64 * sphere_area(k - 2),
    }
}

impl RadialMetric {
    pub fn new(grid: RadialGrid, a: Vec<f64>, b: Vec<f64>, tau: f64) -> Result<Self> {
        let n = grid.n_nodes;
        if a.len() != n || b.len() != n {
            return Err(Error::InvalidMetric(format!(
                "profiles have lengths {} and {}, grid has {n} nodes",
                a.len(),
                b.len()
            )));
        }
        if let Some(i) = a.iter().chain(&b).position(|v| !(*v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidMetric(format!("profile value at index {i} is not positive")));
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidMetric(format!("decay order must be positive, got {tau}")));
        }
        let mut g = RadialMetric { grid, a, b, tau, decay_constant: 0.0 };
        g.decay_constant = g.measure_decay_constant();
        Ok(g)
    }

    pub fn euclidean(grid: RadialGrid) -> Self {
        let n = grid.n_nodes;
        let tau = (grid.dimension - 2) as f64;
        RadialMetric { grid, a: vec![1.0; n], b: vec![1.0; n], tau, decay_constant: 0.0 }
    }

    pub fn from_fn(grid: RadialGrid, tau: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (a, b) = grid.nodes.iter().map(|&r| f(r)).unzip();
        RadialMetric::new(grid, a, b, tau)
    }

    /// `w^(4/(m-2)) g_e` for a conformal factor `w(rho)`.
    pub fn conformally_flat(grid: RadialGrid, tau: f64, w: impl Fn(f64) -> f64) -> Result<Self> {
        let k = 2.0 / (grid.dimension as f64 - 2.0);
        RadialMetric::from_fn(grid, tau, |r| {
            let v = w(r).powf(k);
            (v, v)
        })
    }

    /// Spatial Schwarzschild slice `w^(4/(m-2)) g_e` with `w = 1 + a0 / (2 rho^(m-2))`.
    pub fn schwarzschild_conformal(grid: RadialGrid, a0: f64) -> Result<Self> {
        let p = grid.dimension as f64 - 2.0;
        RadialMetric::conformally_flat(grid, p, |r| 1.0 + a0 / (2.0 * r.powf(p)))
    }

    /// Radius of the minimal sphere of the Schwarzschild slice with coefficient `a0`.
    pub fn schwarzschild_neck(a0: f64, m: usize) -> f64 {
        (a0 / 2.0).powf(1.0 / (m as f64 - 2.0))
    }

    /// Same grid and decay order with new profiles (positivity unchecked).
    pub fn with_profiles(&self, a: Vec<f64>, b: Vec<f64>) -> Self {
        let mut g = RadialMetric { grid: self.grid.clone(), a, b, tau: self.tau, decay_constant: 0.0 };
        g.decay_constant = g.measure_decay_constant();
        g
    }

    fn measure_decay_constant(&self) -> f64 {
        let start = self.grid.outer_decade_start();
        (start..self.grid.n_nodes)
            .map(|i| {
                let d = (self.a[i] - 1.0).abs().max((self.b[i] - 1.0).abs());
                d * self.grid.nodes[i].powf(self.tau)
            })
            .fold(0.0, f64::max)
    }

    pub fn dimension(&self) -> usize {
        self.grid.dimension
    }

    pub(crate) fn profile(&self) -> Profile {
        let ops = self.grid.ops();
        let rule = self.grid.rules().profile;
        Profile {
            a1: ops.d1(&self.a, rule),
            b1: ops.d1(&self.b, rule),
            b2: ops.d2(&self.b, rule),
            ops,
        }
    }
}

/// Log-derivatives of the profiles.
pub(crate) struct Profile {
    pub ops: DiffOps,
    pub a1: Vec<f64>,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
}

/// `rho^2 s` as a function of the local jet, with its partial derivatives
/// `[dA, dA', dB, dB', dB'']`.
fn scaled_scalar_jet(n: f64, a: f64, a1: f64, b: f64, b1: f64, b2: f64) -> (f64, [f64; 5]) {
    let x = b + b1;
    let y = b1 + b2;
    let a2 = a * a;
    let a3 = a2 * a;
    let a4 = a3 * a;
    let bb = b * b;
    let b3 = bb * b;
    let s = -2.0 * n * (y / (a2 * b) - x * a1 / (a3 * b)) + n * (n - 1.0) * (1.0 / bb - x * x / (a2 * bb));
    let d_b2 = -2.0 * n / (a2 * b);
    let d_b1 = -2.0 * n * (1.0 / (a2 * b) - a1 / (a3 * b)) - 2.0 * n * (n - 1.0) * x / (a2 * bb);
    let d_b = -2.0 * n * (-y / (a2 * bb) - a1 / (a3 * b) + x * a1 / (a3 * bb))
        + n * (n - 1.0) * (-2.0 / b3 - 2.0 * x / (a2 * bb) + 2.0 * x * x / (a2 * b3));
    let d_a1 = 2.0 * n * x / (a3 * b);
    let d_a = -2.0 * n * (-2.0 * y / (a3 * b) + 3.0 * x * a1 / (a4 * b)) + 2.0 * n * (n - 1.0) * x * x / (a3 * bb);
    (s, [d_a, d_a1, d_b, d_b1, d_b2])
}

/// Ricci curvature of a radial metric and its deviation for `s0`.
pub fn ricci_radial(g: &RadialMetric, s0: f64) -> Result<CurvatureData> {
    let pr = g.profile();
    let n = (g.dimension() - 1) as f64;
    let len = g.grid.n_nodes;
    let mut rr = Vec::with_capacity(len);
    let mut tt = Vec::with_capacity(len);
    for i in 0..len {
        let (a, b, a1, b1, b2) = (g.a[i], g.b[i], pr.a1[i], pr.b1[i], pr.b2[i]);
        let x = b + b1;
        let y = b1 + b2;
        let beta = (y / (a * a) - x * a1 / (a * a * a)) / b;
        let gam = (1.0 - x * x / (a * a)) / (b * b);
        let r2 = g.grid.nodes[i] * g.grid.nodes[i];
        rr.push(a * a * (-n * beta) / r2);
        tt.push(b * b * (-beta + (n - 1.0) * gam) / r2);
    }
    crate::error::ensure_finite(&rr, "Ricci component")?;
    crate::error::ensure_finite(&tt, "Ricci component")?;
    CurvatureData::from_ricci(Components::Radial { rr, tt }, &Metric::Radial(g.clone()), s0)
}

/// Scalar curvature only.
pub fn scalar_radial(g: &RadialMetric) -> Vec<f64> {
    let pr = g.profile();
    let n = (g.dimension() - 1) as f64;
    (0..g.grid.n_nodes)
        .map(|i| {
            let (s, _) = scaled_scalar_jet(n, g.a[i], pr.a1[i], g.b[i], pr.b1[i], pr.b2[i]);
            s / (g.grid.nodes[i] * g.grid.nodes[i])
        })
        .collect()
}

/// Exact linearization of the discrete scalar curvature with respect to the
/// profiles, stored as sparse rows.
#[derive(Debug, Clone)]
pub struct ScalarLinearization {
    pub wrt_a: Vec<Vec<(usize, f64)>>,
    pub wrt_b: Vec<Vec<(usize, f64)>>,
}

fn push_merge(row: &mut Vec<(usize, f64)>, j: usize, v: f64) {
    match row.iter_mut().find(|(k, _)| *k == j) {
        Some(e) => e.1 += v,
        None => row.push((j, v)),
    }
}

impl ScalarLinearization {
    pub fn new(g: &RadialMetric) -> Self {
        let pr = g.profile();
        let rule = g.grid.rules().profile;
        let n = (g.dimension() - 1) as f64;
        let len = g.grid.n_nodes;
        let mut wrt_a = Vec::with_capacity(len);
        let mut wrt_b = Vec::with_capacity(len);
        for i in 0..len {
            let (_, d) = scaled_scalar_jet(n, g.a[i], pr.a1[i], g.b[i], pr.b1[i], pr.b2[i]);
            let r2 = g.grid.nodes[i] * g.grid.nodes[i];
            let mut ra = vec![(i, d[0] / r2)];
            for (j, w) in pr.ops.row(i, 1, rule) {
                push_merge(&mut ra, j, d[1] * w / r2);
            }
            let mut rb = vec![(i, d[2] / r2)];
            for (j, w) in pr.ops.row(i, 1, rule) {
                push_merge(&mut rb, j, d[3] * w / r2);
            }
            for (j, w) in pr.ops.row(i, 2, rule) {
                push_merge(&mut rb, j, d[4] * w / r2);
            }
            wrt_a.push(ra);
            wrt_b.push(rb);
        }
        ScalarLinearization { wrt_a, wrt_b }
    }

    pub fn apply(&self, da: &[f64], db: &[f64]) -> Vec<f64> {
        self.wrt_a
            .iter()
            .zip(&self.wrt_b)
            .map(|(ra, rb)| {
                ra.iter().map(|&(j, w)| w * da[j]).sum::<f64>() + rb.iter().map(|&(j, w)| w * db[j]).sum::<f64>()
            })
            .collect()
    }

    /// Change of the scalar curvature under a metric perturbation `h`.
    pub fn apply_tensor(&self, g: &RadialMetric, h: &Components) -> Vec<f64> {
        let Components::Radial { rr, tt } = h else {
            panic!("radial tensor expected");
        };
        let da: Vec<f64> = rr.iter().zip(&g.a).map(|(h, a)| h / (2.0 * a)).collect();
        let db: Vec<f64> = tt.iter().zip(&g.b).map(|(h, b)| h / (2.0 * b)).collect();
        self.apply(&da, &db)
    }

    /// Rows of `p -> -J(p g)`, the conformal part of the linearization.
    pub fn conformal_rows(&self, g: &RadialMetric) -> Vec<Vec<(usize, f64)>> {
        self.wrt_a
            .iter()
            .zip(&self.wrt_b)
            .map(|(ra, rb)| {
                let mut row = Vec::with_capacity(ra.len() + rb.len());
                for &(j, w) in ra {
                    push_merge(&mut row, j, -0.5 * w * g.a[j]);
                }
                for &(j, w) in rb {
                    push_merge(&mut row, j, -0.5 * w * g.b[j]);
                }
                row
            })
            .collect()
    }
}

/// Scalar Laplacian `g^ij nabla_i nabla_j f` of a radial function.
pub fn laplacian(g: &RadialMetric, f: &[f64]) -> Vec<f64> {
    let pr = g.profile();
    let rule = g.grid.rules().scalar;
    let f1 = pr.ops.d1(f, rule);
    let f2 = pr.ops.d2(f, rule);
    let n = (g.dimension() - 1) as f64;
    (0..g.grid.n_nodes)
        .map(|i| {
            let (a, b, r) = (g.a[i], g.b[i], g.grid.nodes[i]);
            let c1 = n * (1.0 + pr.b1[i] / b) - 1.0 - pr.a1[i] / a;
            (f2[i] + c1 * f1[i]) / (r * r * a * a)
        })
        .collect()
}

fn radial_parts(t: &SymmetricTwoTensor) -> (&[f64], &[f64]) {
    match &t.components {
        Components::Radial { rr, tt } => (rr, tt),
        _ => panic!("radial tensor expected"),
    }
}

/// `G(T) = T - tr_g(T) g / 2`.
pub fn operator_g(t: &SymmetricTwoTensor, g: &RadialMetric) -> SymmetricTwoTensor {
    let gm = Metric::Radial(g.clone()).components();
    let tr = t.components.trace(&gm, g.dimension());
    let half: Vec<f64> = tr.iter().map(|x| 0.5 * x).collect();
    let shift = gm.scale_pointwise(&half);
    SymmetricTwoTensor::new(t.role, t.components.zip_with(&shift, |a, b| a - b))
}

/// Divergence `(delta T)_i = nabla^j T_ij`, returned as the `d rho` component.
pub fn divergence(t: &SymmetricTwoTensor, g: &RadialMetric) -> Vec<f64> {
    let (rr, tt) = radial_parts(t);
    let pr = g.profile();
    let rules = g.grid.rules();
    let rr1 = pr.ops.d1(rr, rules.tensor);
    let n = (g.dimension() - 1) as f64;
    (0..g.grid.n_nodes)
        .map(|i| {
            let (a, b) = (g.a[i], g.b[i]);
            let a2 = a * a;
            let du = (rr1[i] - 2.0 * pr.a1[i] / a * rr[i]) / a2 + n * (1.0 + pr.b1[i] / b) * (rr[i] / a2 - tt[i] / (b * b));
            du / g.grid.nodes[i]
        })
        .collect()
}

/// `(delta* w)_ij = -(nabla_i w_j + nabla_j w_i) / 2` for a radial one-form
/// given by its `d rho` component.
pub fn adjoint_divergence(omega: &[f64], g: &RadialMetric) -> SymmetricTwoTensor {
    let pr = g.profile();
    let rules = g.grid.rules();
    let rho = &g.grid.nodes;
    let wu: Vec<f64> = omega.iter().zip(rho).map(|(w, r)| w * r).collect();
    let wu1 = pr.ops.d1(&wu, rules.vector);
    let mut rr = Vec::with_capacity(wu.len());
    let mut tt = Vec::with_capacity(wu.len());
    for i in 0..wu.len() {
        let (a, b, r2) = (g.a[i], g.b[i], rho[i] * rho[i]);
        let uu = -(wu1[i] - (1.0 + pr.a1[i] / a) * wu[i]);
        let t = -(b * (b + pr.b1[i]) / (a * a)) * wu[i];
        rr.push(uu / r2);
        tt.push(t / r2);
    }
    SymmetricTwoTensor::new(TensorRole::MetricPerturbation, Components::Radial { rr, tt })
}

/// `L_W g` for a radial vector field given by its `d/d rho` component.
pub fn lie_derivative(w_rho: &[f64], g: &RadialMetric) -> SymmetricTwoTensor {
    let pr = g.profile();
    let rules = g.grid.rules();
    let wu: Vec<f64> = w_rho.iter().zip(&g.grid.nodes).map(|(w, r)| w / r).collect();
    lie_derivative_u(&wu, g, &pr, rules.vector)
}

fn lie_derivative_u(
    wu: &[f64],
    g: &RadialMetric,
    pr: &Profile,
    rule: super::stencil::LeftRule,
) -> SymmetricTwoTensor {
    let wu1 = pr.ops.d1(wu, rule);
    let mut rr = Vec::with_capacity(wu.len());
    let mut tt = Vec::with_capacity(wu.len());
    for i in 0..wu.len() {
        let (a, b) = (g.a[i], g.b[i]);
        rr.push(2.0 * a * (a + pr.a1[i]) * wu[i] + 2.0 * a * a * wu1[i]);
        tt.push(2.0 * b * (b + pr.b1[i]) * wu[i]);
    }
    SymmetricTwoTensor::new(TensorRole::GaugeTerm, Components::Radial { rr, tt })
}

/// DeTurck vector field `W^k = g^ij (Gamma^k_ij[g] - Gamma^k_ij[g_ref])` as its
/// `d/d rho` component, and the gauge term `L_W g`.
pub fn deturck_gauge_term(g: &RadialMetric, g_ref: &RadialMetric) -> Result<(Vec<f64>, SymmetricTwoTensor)> {
    if !g.grid.compatible(&g_ref.grid) {
        return Err(Error::IncompatibleReference(
            "reference metric lives on a different grid".into(),
        ));
    }
    let pr = g.profile();
    let rule = g.grid.rules().profile;
    let ra1 = pr.ops.d1(&g_ref.a, rule);
    let rb1 = pr.ops.d1(&g_ref.b, rule);
    let n = (g.dimension() - 1) as f64;
    let wu: Vec<f64> = (0..g.grid.n_nodes)
        .map(|i| {
            let (a, b, ra, rb) = (g.a[i], g.b[i], g_ref.a[i], g_ref.b[i]);
            let a2 = a * a;
            let r = g.grid.nodes[i];
            ((pr.a1[i] / a - ra1[i] / ra) / a2 - n * (1.0 + pr.b1[i] / b) / a2
                + n * rb * (rb + rb1[i]) / (ra * ra * b * b))
                / (r * r)
        })
        .collect();
    crate::error::ensure_finite(&wu, "gauge vector field")?;
    let lie = lie_derivative_u(&wu, g, &pr, g.grid.rules().vector);
    let w_rho = wu.iter().zip(&g.grid.nodes).map(|(w, r)| w * r).collect();
    Ok((w_rho, lie))
}
