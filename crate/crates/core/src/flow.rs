//! Right-hand sides and time integration of conformal Ricci flow, its DeTurck
//! form and plain Ricci flow.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{trajectory_records, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::geometry::stencil::interpolate;
use crate::geometry::tensor::{Components, CurvatureData, Metric, SymmetricTwoTensor, TensorRole};
use crate::geometry::{deturck_gauge_term, RadialMetric};
use crate::pressure::{
    invertibility_estimate, pressure_homogeneous, solve_flow_pressure, PressureField, PressureStatus,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowKind {
    Crf,
    Dtcrf,
    Ricci,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryKind {
    RadialAf,
    Homogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceMetric {
    #[default]
    Euclidean,
    Initial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub flow_kind: FlowKind,
    pub geometry_kind: GeometryKind,
    pub s0: f64,
    pub dt_safety: f64,
    pub t_end: f64,
    pub output_stride: usize,
    pub reference_metric: ReferenceMetric,
    /// Radii for the ADM mass ladder; defaults to `rho_max / {100, 30, 10}`.
    pub mass_radii: Option<Vec<f64>>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        FlowConfig {
            flow_kind: FlowKind::Crf,
            geometry_kind: GeometryKind::RadialAf,
            s0: 0.0,
            dt_safety: 0.2,
            t_end: 0.1,
            output_stride: 10,
            reference_metric: ReferenceMetric::Euclidean,
            mass_radii: None,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            return Err(Error::InvalidConfig(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidConfig(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.output_stride == 0 {
            return Err(Error::InvalidConfig("output_stride must be at least 1".into()));
        }
        if !self.s0.is_finite() {
            return Err(Error::InvalidConfig("s0 must be finite".into()));
        }
        if self.geometry_kind == GeometryKind::RadialAf && self.s0 != 0.0 {
            return Err(Error::InvalidConfig(format!(
                "asymptotically flat runs require scalar-flat data, s0 = 0 (got {})",
                self.s0
            )));
        }
        Ok(())
    }
}

/// A consistent `(g, p)` pair with its curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub t: f64,
    pub metric: Metric,
    pub pressure: PressureField,
    pub curvature: CurvatureData,
    /// DeTurck vector field (`d/d rho` component) for gauged radial runs.
    pub gauge_field: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    PressureFailure,
    NumericalBreakdown,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowTrajectory {
    pub config: FlowConfig,
    pub dt: f64,
    pub steps: usize,
    pub states: Vec<FlowState>,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub termination: Termination,
    pub message: Option<String>,
    pub warnings: Vec<String>,
    pub reference: Option<RadialMetric>,
}

impl FlowTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn dimension(&self) -> usize {
        self.states.first().map(|s| s.metric.dimension()).unwrap_or(3)
    }
}

fn conformal_terms(g: &Metric, curv: &CurvatureData, p: &PressureField) -> Components {
    let gc = g.components();
    let pg = gc.scale_pointwise(&p.values);
    curv.deviation.components.zip_with(&pg, |e, q| -2.0 * e - 2.0 * q)
}

/// `-2 (Ric - (s0/m) g) - 2 p g`.
pub fn crf_rhs(g: &Metric, p: &PressureField, s0: f64) -> Result<SymmetricTwoTensor> {
    let curv = g.curvature(s0)?;
    Ok(SymmetricTwoTensor::new(TensorRole::MetricPerturbation, conformal_terms(g, &curv, p)))
}

/// `crf_rhs + L_W g` with `W` built against `g_ref`; the gauge term vanishes
/// in the homogeneous class.
pub fn dtcrf_rhs(g: &Metric, p: &PressureField, s0: f64, g_ref: &Metric) -> Result<SymmetricTwoTensor> {
    let mut rhs = crf_rhs(g, p, s0)?;
    if let (Metric::Radial(gr), Metric::Radial(rr)) = (g, g_ref) {
        let (_, lie) = deturck_gauge_term(gr, rr)?;
        rhs.components = rhs.components.zip_with(&lie.components, |a, b| a + b);
    }
    Ok(rhs)
}

/// `-2 Ric`.
pub fn ricci_rhs(g: &Metric) -> Result<SymmetricTwoTensor> {
    let curv = g.curvature(0.0)?;
    Ok(SymmetricTwoTensor::new(TensorRole::MetricPerturbation, curv.ric.components.map(|r| -2.0 * r)))
}

/// Time step `dt_safety * dx^2 / (2m)`, with `dx` the smallest proper grid
/// spacing, or the smallest orbit radius `sqrt(g_i) / kappa_i` for homogeneous
/// metrics.
pub fn cfl_time_step(g: &Metric, dt_safety: f64) -> f64 {
    let m = g.dimension() as f64;
    let dx2 = match g {
        Metric::Radial(r) => r
            .a
            .iter()
            .zip(&r.grid.nodes)
            .map(|(a, rho)| (a * rho * r.grid.log_step).powi(2))
            .fold(f64::INFINITY, f64::min),
        Metric::Homogeneous(h) => h.min_length_sq(),
    };
    dt_safety * dx2 / (2.0 * m)
}

enum StageError {
    Pressure(String),
    Breakdown(String),
}

impl From<Error> for StageError {
    fn from(e: Error) -> Self {
        match e {
            Error::NonInvertibleOperator(s) => StageError::Pressure(s),
            other => StageError::Breakdown(other.to_string()),
        }
    }
}

struct Stage {
    curvature: CurvatureData,
    pressure: PressureField,
    gauge: Option<Vec<f64>>,
    rhs: Components,
}

fn evaluate(g: &Metric, cfg: &FlowConfig, reference: Option<&RadialMetric>) -> std::result::Result<Stage, StageError> {
    let curvature = g.curvature(cfg.s0)?;
    let pressure = match (cfg.flow_kind, g) {
        (FlowKind::Ricci, _) => PressureField::zeros(curvature.scalar.len()),
        (_, Metric::Radial(r)) => solve_flow_pressure(r, &curvature)?,
        (_, Metric::Homogeneous(_)) => pressure_homogeneous(curvature.deviation_norm_sq[0], cfg.s0)?,
    };
    if pressure.status == PressureStatus::Failed {
        return Err(StageError::Pressure(format!(
            "pressure residual {:e} above tolerance",
            pressure.residual_norm
        )));
    }
    let mut rhs = match cfg.flow_kind {
        FlowKind::Ricci => curvature.ric.components.map(|r| -2.0 * r),
        _ => conformal_terms(g, &curvature, &pressure),
    };
    let mut gauge = None;
    if let (FlowKind::Dtcrf, Metric::Radial(r), Some(rf)) = (cfg.flow_kind, g, reference) {
        let (w, lie) = deturck_gauge_term(r, rf)?;
        rhs = rhs.zip_with(&lie.components, |a, b| a + b);
        gauge = Some(w);
    }
    if rhs.to_vec().iter().any(|v| !v.is_finite()) {
        return Err(StageError::Breakdown("non-finite right-hand side".into()));
    }
    Ok(Stage { curvature, pressure, gauge, rhs })
}

/// Right-hand side of the chosen flow at `g`, with the pressure solved for `g`.
pub fn flow_rhs(g: &Metric, kind: FlowKind, s0: f64, reference: Option<&RadialMetric>) -> Result<Components> {
    let cfg = FlowConfig {
        flow_kind: kind,
        geometry_kind: match g {
            Metric::Radial(_) => GeometryKind::RadialAf,
            Metric::Homogeneous(_) => GeometryKind::Homogeneous,
        },
        s0,
        ..FlowConfig::default()
    };
    evaluate(g, &cfg, reference).map(|s| s.rhs).map_err(|e| match e {
        StageError::Pressure(m) => Error::NonInvertibleOperator(m),
        StageError::Breakdown(m) => Error::NumericalBreakdown(m),
    })
}

fn state_of(t: f64, metric: Metric, st: &Stage) -> FlowState {
    FlowState {
        t,
        metric,
        pressure: st.pressure.clone(),
        curvature: st.curvature.clone(),
        gauge_field: st.gauge.clone(),
    }
}

/// Integrate the configured flow from `g0` with classical RK4, re-solving the
/// pressure at every stage.
pub fn run_flow(config: &FlowConfig, g0: &Metric) -> Result<FlowTrajectory> {
    config.validate()?;
    match (config.geometry_kind, g0) {
        (GeometryKind::RadialAf, Metric::Radial(_)) | (GeometryKind::Homogeneous, Metric::Homogeneous(_)) => {}
        _ => return Err(Error::InvalidConfig("initial metric does not match geometry_kind".into())),
    }
    let mut warnings = Vec::new();
    if config.flow_kind != FlowKind::Ricci {
        let c0 = g0.curvature(config.s0)?;
        let drift = c0.max_drift();
        if drift > 1e-6 {
            return Err(Error::InvalidConfig(format!(
                "initial scalar curvature differs from s0 by {drift:e}"
            )));
        }
        match invertibility_estimate(g0, config.s0) {
            Ok(rep) if rep.status == PressureStatus::NearResonant => warnings.push(format!(
                "pressure operator near resonance: smallest singular value {:e} at scale {:e}",
                rep.smallest_singular_value, rep.scale
            )),
            _ => {}
        }
    }
    let reference = match (config.flow_kind, g0) {
        (FlowKind::Dtcrf, Metric::Radial(r)) => Some(match config.reference_metric {
            ReferenceMetric::Euclidean => RadialMetric::euclidean(r.grid.clone()),
            ReferenceMetric::Initial => r.clone(),
        }),
        _ => None,
    };
    let dt_cfl = cfl_time_step(g0, config.dt_safety);
    let steps = ((config.t_end / dt_cfl) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = config.t_end / steps as f64;

    let mut traj = FlowTrajectory {
        config: config.clone(),
        dt,
        steps,
        states: Vec::new(),
        diagnostics: Vec::new(),
        termination: Termination::Completed,
        message: None,
        warnings,
        reference: reference.clone(),
    };
    let fail = |traj: &mut FlowTrajectory, e: StageError, t: f64| {
        let (kind, msg) = match e {
            StageError::Pressure(m) => (Termination::PressureFailure, m),
            StageError::Breakdown(m) => (Termination::NumericalBreakdown, m),
        };
        traj.termination = kind;
        traj.message = Some(format!("t = {t}: {msg}"));
    };

    let mut g = g0.clone();
    let mut y = g.components().to_vec();
    let shape = g.components();
    let rf = reference.as_ref();
    let mut k1 = match evaluate(&g, config, rf) {
        Ok(s) => s,
        Err(e) => {
            fail(&mut traj, e, 0.0);
            return Ok(traj);
        }
    };
    traj.states.push(state_of(0.0, g.clone(), &k1));

    let build = |v: &[f64]| -> std::result::Result<Metric, StageError> {
        g0.with_components(&shape.from_flat(v)).map_err(StageError::from)
    };
    let axpy = |y: &[f64], c: f64, k: &[f64]| -> Vec<f64> { y.iter().zip(k).map(|(a, b)| a + c * b).collect() };

    for step in 1..=steps {
        let t = dt * step as f64;
        let result = (|| -> std::result::Result<(Vec<f64>, Metric, Stage), StageError> {
            let r1 = k1.rhs.to_vec();
            let s2 = evaluate(&build(&axpy(&y, 0.5 * dt, &r1))?, config, rf)?;
            let r2 = s2.rhs.to_vec();
            let s3 = evaluate(&build(&axpy(&y, 0.5 * dt, &r2))?, config, rf)?;
            let r3 = s3.rhs.to_vec();
            let s4 = evaluate(&build(&axpy(&y, dt, &r3))?, config, rf)?;
            let r4 = s4.rhs.to_vec();
            let next: Vec<f64> = (0..y.len())
                .map(|i| y[i] + dt / 6.0 * (r1[i] + 2.0 * r2[i] + 2.0 * r3[i] + r4[i]))
                .collect();
            let gn = build(&next)?;
            let st = evaluate(&gn, config, rf)?;
            Ok((next, gn, st))
        })();
        match result {
            Ok((next, gn, st)) => {
                y = next;
                g = gn;
                k1 = st;
                if step % config.output_stride == 0 || step == steps {
                    traj.states.push(state_of(t, g.clone(), &k1));
                }
            }
            Err(e) => {
                fail(&mut traj, e, t);
                break;
            }
        }
    }
    traj.diagnostics = trajectory_records(&traj);
    Ok(traj)
}

/// Lagrange weights for interpolating at `t` from nodes `ts`.
fn lagrange_weights(ts: &[f64], t: f64) -> Vec<f64> {
    (0..ts.len())
        .map(|j| {
            (0..ts.len())
                .filter(|&k| k != j)
                .map(|k| (t - ts[k]) / (ts[j] - ts[k]))
                .product()
        })
        .collect()
}

/// Undo the DeTurck gauge: integrate `d phi/dt = -W(phi, t)` from the identity
/// and pull every frame of a gauged radial trajectory back by `phi_t`.
pub fn gauge_pullback(traj: &FlowTrajectory) -> Result<FlowTrajectory> {
    if traj.config.flow_kind != FlowKind::Dtcrf {
        return Err(Error::InvalidConfig("gauge pullback needs a DeTurck trajectory".into()));
    }
    let Some(Metric::Radial(g0)) = traj.states.first().map(|s| &s.metric) else {
        let mut out = traj.clone();
        out.config.flow_kind = FlowKind::Crf;
        return Ok(out);
    };
    let grid = g0.grid.clone();
    let rules = grid.rules();
    let (u0, h, n) = (grid.u0(), grid.log_step, grid.n_nodes);
    let u_last = grid.u(n - 1);
    let ops = grid.ops();
    let ts = traj.times();
    let fields: Vec<Vec<f64>> = traj
        .states
        .iter()
        .map(|s| {
            let w = s.gauge_field.as_ref().ok_or_else(|| Error::InvalidConfig("frame without gauge field".into()))?;
            Ok(w.iter().zip(&grid.nodes).map(|(w, r)| w / r).collect())
        })
        .collect::<Result<_>>()?;
    let order = fields.len().min(4);
    let velocity = |u: f64, t: f64| -> f64 {
        let k = ts.partition_point(|&x| x <= t).saturating_sub(1);
        let start = (k as isize - (order as isize / 2 - 1)).clamp(0, (ts.len() - order) as isize) as usize;
        let w = lagrange_weights(&ts[start..start + order], t);
        (0..order)
            .map(|j| w[j] * interpolate(&fields[start + j], u0, h, rules.vector, 4, u))
            .sum::<f64>()
    };
    let tol = 1e-6 * h;
    let mut uu: Vec<f64> = (0..n).map(|i| grid.u(i)).collect();
    let mut out = traj.clone();
    out.config.flow_kind = FlowKind::Crf;
    out.reference = None;
    out.states.clear();
    const SUBSTEPS: usize = 4;
    for (k, state) in traj.states.iter().enumerate() {
        if k > 0 {
            let (ta, tb) = (ts[k - 1], ts[k]);
            let dt = (tb - ta) / SUBSTEPS as f64;
            for sstep in 0..SUBSTEPS {
                let t = ta + dt * sstep as f64;
                for x in uu.iter_mut() {
                    let k1 = -velocity(*x, t);
                    let k2 = -velocity(*x + 0.5 * dt * k1, t + 0.5 * dt);
                    let k3 = -velocity(*x + 0.5 * dt * k2, t + 0.5 * dt);
                    let k4 = -velocity(*x + dt * k3, t + dt);
                    *x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
            }
            if let Some(i) = uu.iter().position(|&x| x < u0 - tol || x > u_last + tol || !x.is_finite()) {
                return Err(Error::OutOfDomain {
                    t: tb,
                    detail: format!("characteristic from node {i} reached ln rho = {}", uu[i]),
                });
            }
        }
        let Metric::Radial(gh) = &state.metric else { unreachable!() };
        let disp: Vec<f64> = (0..n).map(|i| uu[i] - grid.u(i)).collect();
        let dd = ops.d1(&disp, rules.vector);
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut p = Vec::with_capacity(n);
        for i in 0..n {
            let x = uu[i];
            let e = disp[i].exp();
            a.push(e * interpolate(&gh.a, u0, h, rules.profile, 6, x) * (1.0 + dd[i]));
            b.push(e * interpolate(&gh.b, u0, h, rules.profile, 6, x));
            p.push(interpolate(&state.pressure.values, u0, h, rules.scalar, 6, x));
        }
        let metric = Metric::Radial(RadialMetric::new(grid.clone(), a, b, gh.tau)?);
        let curvature = metric.curvature(traj.config.s0)?;
        out.states.push(FlowState {
            t: state.t,
            metric,
            pressure: PressureField { values: p, ..state.pressure.clone() },
            curvature,
            gauge_field: None,
        });
    }
    out.diagnostics = trajectory_records(&out);
    Ok(out)
}
