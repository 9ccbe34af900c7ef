//! Functionals and identity checks along flow trajectories.

mod identities;
mod mass;
mod probe;

pub use identities::{
    curvature_evolution_check, volume_identity_check, yamabe_monotonicity_check, yamabe_quotient,
    CurvatureEvolutionReport, VolumeReport, YamabeReport,
};
pub use mass::{
    adm_mass, asymptotic_flatness_check, default_mass_radii, mass_derivative_check, quasi_local_mass,
    AsymptoticFlatnessReport, MassDerivativeReport, MassEstimate,
};
pub use probe::{fd_jacobian_matrix, fd_jacobian_probe, SpectrumReport};

use serde::{Deserialize, Serialize};

use crate::flow::{FlowKind, FlowTrajectory};
use crate::geometry::radial::sphere_area;
use crate::geometry::tensor::Metric;
use crate::geometry::{InnerClosure, RadialMetric};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub s_min: f64,
    pub s_max: f64,
    pub constraint_drift: f64,
    pub vol: Option<f64>,
    #[serde(rename = "Q")]
    pub q: Option<f64>,
    pub mass: Option<f64>,
    pub mass_err: Option<f64>,
    pub ric_l2: f64,
    pub dev_l2: f64,
    pub theta_check: Option<f64>,
}

/// Integral over the radial domain with an estimate of the part beyond `rho_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialIntegral {
    pub value: f64,
    /// Tail beyond `rho_max` from the fitted decay, `None` if the integrand does not decay.
    pub tail: Option<f64>,
}

impl RadialIntegral {
    pub fn total(&self) -> f64 {
        self.value + self.tail.unwrap_or(0.0)
    }
}

/// Quadrature weights in `ln rho`: fourth-order end corrections, or the plain
/// trapezoid end at a symmetric inner sphere.
fn quadrature_weights(n: usize, h: f64, closure: InnerClosure) -> Vec<f64> {
    let mut w = vec![1.0; n];
    let ends = [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0];
    for (k, c) in ends.iter().enumerate() {
        w[n - 1 - k] = *c;
    }
    match closure {
        InnerClosure::Inversion => w[0] = 0.5,
        InnerClosure::Even => {
            for (k, c) in ends.iter().enumerate() {
                w[k] = *c;
            }
        }
    }
    w.iter().map(|x| x * h).collect()
}

/// `int f dvol` over `rho >= rho_min`.
pub fn radial_integral(g: &RadialMetric, f: &[f64]) -> RadialIntegral {
    let grid = &g.grid;
    let n = grid.n_nodes;
    let m = grid.dimension as i32;
    let omega = sphere_area(grid.dimension - 1);
    let w = quadrature_weights(n, grid.log_step, grid.closure);
    let dens: Vec<f64> = (0..n)
        .map(|i| f[i] * omega * grid.nodes[i].powi(m) * g.a[i] * g.b[i].powi(m - 1))
        .collect();
    let value = dens.iter().zip(&w).map(|(d, w)| d * w).sum();
    let start = grid.outer_decade_start().min(n - 2);
    let (fl, fs) = (dens[n - 1], dens[start]);
    let tail = if fl == 0.0 {
        Some(0.0)
    } else if fs.signum() == fl.signum() && fs.abs() > fl.abs() {
        let kappa = (fs.abs() / fl.abs()).ln() / (grid.u(n - 1) - grid.u(start));
        Some(fl / kappa)
    } else {
        None
    };
    RadialIntegral { value, tail }
}

/// Second-order derivative at `k` from three possibly unevenly spaced samples.
pub(crate) fn three_point_derivative(t: [f64; 3], f: [f64; 3]) -> f64 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    -h2 / (h1 * (h1 + h2)) * f[0] + (h2 - h1) / (h1 * h2) * f[1] + h1 / (h2 * (h1 + h2)) * f[2]
}

/// `max |d/dt ln sqrt(det g) + m p + (s - s0)|` at interior frame `k`.
pub(crate) fn volume_residual(traj: &FlowTrajectory, k: usize) -> f64 {
    let st = &traj.states;
    let t = [st[k - 1].t, st[k].t, st[k + 1].t];
    let l: Vec<Vec<f64>> = (k - 1..=k + 1).map(|j| st[j].metric.log_volume_density()).collect();
    let m = st[k].metric.dimension() as f64;
    let s0 = st[k].curvature.s0;
    (0..l[1].len())
        .map(|i| {
            let d = three_point_derivative(t, [l[0][i], l[1][i], l[2][i]]);
            let expected = -m * st[k].pressure.values[i] - (st[k].curvature.scalar[i] - s0);
            (d - expected).abs()
        })
        .fold(0.0, f64::max)
}

/// One diagnostics record per stored frame.
pub fn trajectory_records(traj: &FlowTrajectory) -> Vec<DiagnosticsRecord> {
    let radii = traj.config.mass_radii.clone();
    let k_last = traj.states.len().saturating_sub(1);
    traj.states
        .iter()
        .enumerate()
        .map(|(k, st)| {
            let c = &st.curvature;
            let s_min = c.scalar.iter().cloned().fold(f64::INFINITY, f64::min);
            let s_max = c.scalar.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let theta_check = if k > 0 && k < k_last && traj.config.flow_kind != FlowKind::Dtcrf {
                Some(volume_residual(traj, k))
            } else {
                None
            };
            let mut rec = DiagnosticsRecord {
                t: st.t,
                s_min,
                s_max,
                constraint_drift: c.max_drift(),
                vol: None,
                q: None,
                mass: None,
                mass_err: None,
                ric_l2: 0.0,
                dev_l2: 0.0,
                theta_check,
            };
            match &st.metric {
                Metric::Radial(g) => {
                    let radii = radii.clone().unwrap_or_else(|| default_mass_radii(g));
                    if let Ok(est) = adm_mass(g, &radii) {
                        rec.mass = Some(est.mass);
                        rec.mass_err = Some(est.error);
                    }
                    rec.ric_l2 = radial_integral(g, &c.ric_norm_sq).total();
                    rec.dev_l2 = radial_integral(g, &c.deviation_norm_sq).total();
                }
                Metric::Homogeneous(h) => {
                    if let Ok(vol) = h.volume() {
                        rec.vol = Some(vol);
                        rec.q = Some(c.scalar[0] * vol.powf(2.0 / 3.0));
                        rec.ric_l2 = c.ric_norm_sq[0] * vol;
                        rec.dev_l2 = c.deviation_norm_sq[0] * vol;
                    }
                }
            }
            rec
        })
        .collect()
}
