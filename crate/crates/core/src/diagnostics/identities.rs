use serde::{Deserialize, Serialize};

use super::{three_point_derivative, volume_residual};
use crate::error::{Error, Result};
use crate::flow::{FlowKind, FlowTrajectory};
use crate::geometry::homogeneous::Mat3;
use crate::geometry::radial::laplacian;
use crate::geometry::tensor::{Components, Metric};

/// `Q = int s dvol / vol^((m-2)/m) = s vol^(2/3)` for a homogeneous metric.
pub fn yamabe_quotient(g: &Metric) -> Result<f64> {
    match g {
        Metric::Radial(_) => Err(Error::UnsupportedGeometry(
            "the Yamabe quotient needs a compact manifold".into(),
        )),
        Metric::Homogeneous(h) => {
            let s = g.curvature(0.0)?.scalar[0];
            Ok(s * h.volume()?.powf(2.0 / 3.0))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    /// Interior-frame maxima of `|d/dt ln sqrt(det g) + m p + (s - s0)|`.
    pub pointwise: Vec<f64>,
    pub pointwise_max: f64,
    /// `|d vol/dt - (m/s0) int |E|^2 dvol|` for homogeneous runs with `s0 != 0`.
    pub global: Option<Vec<f64>>,
    pub global_max: Option<f64>,
}

/// Check `d/dt dvol = -m p dvol` along a conformal Ricci flow trajectory.
///
/// The pointwise form keeps the drift term `-(s - s0)`, so it is exact for the
/// semi-discrete system and the residual measures the time differencing only.
pub fn volume_identity_check(traj: &FlowTrajectory) -> Result<VolumeReport> {
    if traj.config.flow_kind != FlowKind::Crf {
        return Err(Error::InvalidConfig("volume identity applies to conformal Ricci flow".into()));
    }
    let k_end = traj.states.len().saturating_sub(1);
    let pointwise: Vec<f64> = (1..k_end).map(|k| volume_residual(traj, k)).collect();
    let s0 = traj.config.s0;
    let global = match traj.states.first().map(|s| &s.metric) {
        Some(Metric::Homogeneous(_)) if s0 != 0.0 => {
            let m = 3.0;
            let vols: Vec<f64> = traj
                .states
                .iter()
                .map(|s| s.metric.as_homogeneous().expect("homogeneous").volume())
                .collect::<Result<_>>()?;
            Some(
                (1..k_end)
                    .map(|k| {
                        let st = &traj.states;
                        let d = three_point_derivative([st[k - 1].t, st[k].t, st[k + 1].t], [vols[k - 1], vols[k], vols[k + 1]]);
                        (d - m / s0 * st[k].curvature.deviation_norm_sq[0] * vols[k]).abs()
                    })
                    .collect::<Vec<f64>>(),
            )
        }
        _ => None,
    };
    Ok(VolumeReport {
        pointwise_max: pointwise.iter().cloned().fold(0.0, f64::max),
        pointwise,
        global_max: global.as_ref().map(|g| g.iter().cloned().fold(0.0, f64::max)),
        global,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YamabeReport {
    pub q: Vec<f64>,
    pub strictly_increasing: bool,
    /// `|dQ/dt - 2 vol^(2/m-1) int |E|^2 dvol|` at interior frames.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
}

/// Monotonicity of the Yamabe quotient along a homogeneous trajectory.
pub fn yamabe_monotonicity_check(traj: &FlowTrajectory) -> Result<YamabeReport> {
    let mut q = Vec::new();
    let mut rate = Vec::new();
    for st in &traj.states {
        let Metric::Homogeneous(h) = &st.metric else {
            return Err(Error::UnsupportedGeometry("the Yamabe quotient needs a compact manifold".into()));
        };
        let vol = h.volume()?;
        q.push(st.curvature.scalar[0] * vol.powf(2.0 / 3.0));
        rate.push(2.0 * vol.powf(2.0 / 3.0 - 1.0) * st.curvature.deviation_norm_sq[0] * vol);
    }
    let ts = traj.times();
    let residuals: Vec<f64> = (1..ts.len().saturating_sub(1))
        .map(|k| {
            let d = three_point_derivative([ts[k - 1], ts[k], ts[k + 1]], [q[k - 1], q[k], q[k + 1]]);
            (d - rate[k]).abs()
        })
        .collect();
    Ok(YamabeReport {
        strictly_increasing: q.windows(2).all(|w| w[1] > w[0]),
        max_residual: residuals.iter().cloned().fold(0.0, f64::max),
        q,
        residuals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureEvolutionReport {
    /// Interior-frame maxima of the scalar-curvature evolution residual.
    pub scalar: Vec<f64>,
    pub scalar_max: f64,
    /// Ricci evolution residuals, homogeneous class only.
    pub ricci: Option<Vec<f64>>,
    pub ricci_max: Option<f64>,
}

fn ricci_evolution_rhs(h: &crate::geometry::HomogeneousMetric) -> [f64; 3] {
    let ric = h.ricci_orthonormal();
    let riem = h.riemann();
    let lap: Mat3 = h.rough_laplacian(&ric);
    [0, 1, 2].map(|i| {
        let mut v = lap[i][i];
        for k in 0..3 {
            for l in 0..3 {
                v += 2.0 * riem[k][i][i][l] * ric[k][l];
            }
            v -= 2.0 * ric[i][k] * ric[k][i];
        }
        v * h.coeffs[i]
    })
}

/// Compare finite-difference time derivatives of the stored curvature with
/// the evolution equations of conformal Ricci flow.
pub fn curvature_evolution_check(traj: &FlowTrajectory) -> Result<CurvatureEvolutionReport> {
    if traj.config.flow_kind != FlowKind::Crf {
        return Err(Error::InvalidConfig("curvature identities apply to conformal Ricci flow".into()));
    }
    let st = &traj.states;
    let s0 = traj.config.s0;
    let k_end = st.len().saturating_sub(1);
    let mut scalar = Vec::new();
    let mut ricci = Vec::new();
    for k in 1..k_end {
        let t = [st[k - 1].t, st[k].t, st[k + 1].t];
        let c = &st[k].curvature;
        let m = st[k].metric.dimension() as f64;
        let p = &st[k].pressure.values;
        let (lap_s, lap_p) = match &st[k].metric {
            Metric::Radial(g) => (laplacian(g, &c.scalar), laplacian(g, p)),
            Metric::Homogeneous(_) => (vec![0.0], vec![0.0]),
        };
        let mut worst: f64 = 0.0;
        for i in 0..c.scalar.len() {
            let ds = three_point_derivative(t, [st[k - 1].curvature.scalar[i], c.scalar[i], st[k + 1].curvature.scalar[i]]);
            let s = c.scalar[i];
            let rhs = lap_s[i] + 2.0 * (s0 / m) * (s - s0) + 2.0 * p[i] * (s - s0)
                + 2.0 * (m - 1.0) * lap_p[i]
                + 2.0 * s0 * p[i]
                + 2.0 * c.deviation_norm_sq[i];
            worst = worst.max((ds - rhs).abs());
        }
        scalar.push(worst);
        if let Metric::Homogeneous(h) = &st[k].metric {
            let comp = |j: usize| match &st[j].curvature.ric.components {
                Components::Frame(r) => *r,
                _ => unreachable!(),
            };
            let (a, b, cc) = (comp(k - 1), comp(k), comp(k + 1));
            let rhs = ricci_evolution_rhs(h);
            let r = (0..3)
                .map(|i| (three_point_derivative(t, [a[i], b[i], cc[i]]) - rhs[i]).abs())
                .fold(0.0, f64::max);
            ricci.push(r);
        }
    }
    let homogeneous = matches!(st.first().map(|s| &s.metric), Some(Metric::Homogeneous(_)));
    Ok(CurvatureEvolutionReport {
        scalar_max: scalar.iter().cloned().fold(0.0, f64::max),
        scalar,
        ricci_max: homogeneous.then(|| ricci.iter().cloned().fold(0.0, f64::max)),
        ricci: homogeneous.then_some(ricci),
    })
}
