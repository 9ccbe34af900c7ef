use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crflow_core::diagnostics::{
    curvature_evolution_check, mass_derivative_check, volume_identity_check, yamabe_monotonicity_check,
    DiagnosticsRecord,
};
use crflow_core::{gauge_pullback, run_flow, FlowKind, FlowTrajectory, GeometryKind, Termination};

use crate::error::Result;
use crate::scenario::Scenario;

pub const FIXED_POINT_TOL: f64 = 1e-10;
pub const MASS_IDENTITY_TOL: f64 = 0.05;

pub const COLUMNS: [(&str, &str); 11] = [
    ("t", "flow time"),
    ("s_min", "minimum of the scalar curvature"),
    ("s_max", "maximum of the scalar curvature"),
    ("constraint_drift", "max |s - s0|"),
    ("vol", "total volume (homogeneous data only)"),
    ("Q", "Yamabe quotient s vol^(2/3) (homogeneous data only)"),
    ("mass", "ADM mass by extrapolation over the mass radii (radial data only)"),
    ("mass_err", "spread of leave-one-out mass extrapolants (radial data only)"),
    ("ric_l2", "integral of |Ric|^2 over the manifold, with tail estimate on radial grids"),
    ("dev_l2", "integral of |Ric - (s0/m) g|^2"),
    ("theta_check_residual", "max residual of d/dt log dvol = -m p at interior frames (conformal Ricci flow only)"),
];

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub name: String,
    pub out_dir: PathBuf,
    pub termination: Termination,
    pub exit_code: i32,
    pub summary: Value,
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

fn cell(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

fn write_timeseries(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
    w.write_record(COLUMNS.iter().map(|c| c.0))?;
    for r in records {
        w.write_record([
            num(r.t),
            num(r.s_min),
            num(r.s_max),
            num(r.constraint_drift),
            cell(r.vol),
            cell(r.q),
            cell(r.mass),
            cell(r.mass_err),
            num(r.ric_l2),
            num(r.dev_l2),
            cell(r.theta_check),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

fn check<T>(r: crflow_core::Result<T>, f: impl FnOnce(T) -> Value) -> Value {
    match r {
        Ok(v) => f(v),
        Err(e) => json!({ "skipped": e.to_string() }),
    }
}

fn identities(traj: &FlowTrajectory) -> Value {
    let crf = match traj.config.flow_kind {
        FlowKind::Crf => Some(traj.clone()),
        FlowKind::Dtcrf => gauge_pullback(traj).ok(),
        FlowKind::Ricci => None,
    };
    let mut out = serde_json::Map::new();
    if let Some(c) = &crf {
        out.insert(
            "volume_identity".into(),
            check(volume_identity_check(c), |r| json!({ "pointwise_max": r.pointwise_max, "global_max": r.global_max })),
        );
        out.insert(
            "curvature_evolution".into(),
            check(curvature_evolution_check(c), |r| json!({ "scalar_max": r.scalar_max, "ricci_max": r.ricci_max })),
        );
    }
    match traj.config.geometry_kind {
        GeometryKind::Homogeneous => {
            out.insert(
                "yamabe".into(),
                check(yamabe_monotonicity_check(traj), |r| {
                    json!({ "strictly_increasing": r.strictly_increasing, "max_residual": r.max_residual })
                }),
            );
        }
        GeometryKind::RadialAf => {
            out.insert(
                "mass_derivative".into(),
                check(mass_derivative_check(traj), |r| {
                    json!({
                        "max_relative_residual": r.max_relative_residual,
                        "max_change_ratio": r.max_change_ratio,
                        "monotone_decreasing": r.monotone_decreasing,
                    })
                }),
            );
        }
    }
    Value::Object(out)
}

fn verdicts(traj: &FlowTrajectory) -> Value {
    let mut v = serde_json::Map::new();
    let g0 = traj.states.first().map(|s| s.metric.components());
    let fixed = g0.map(|g0| {
        traj.states.iter().all(|s| s.metric.components().zip_with(&g0, |a, b| a - b).max_abs() <= FIXED_POINT_TOL)
    });
    v.insert("fixed_point".into(), json!(fixed));
    let d = &traj.diagnostics;
    v.insert("max_constraint_drift".into(), json!(d.iter().map(|r| r.constraint_drift).fold(0.0, f64::max)));
    let mass: Option<Vec<f64>> = d.iter().map(|r| r.mass).collect();
    if let Some(mass) = mass.filter(|m| !m.is_empty()) {
        v.insert("mass_monotone_decreasing".into(), json!(mass.windows(2).all(|w| w[1] < w[0])));
        if traj.config.flow_kind == FlowKind::Ricci {
            let ok = mass_derivative_check(traj).map(|r| r.max_change_ratio <= MASS_IDENTITY_TOL).ok();
            v.insert("mass_constant_within_tol".into(), json!(ok));
        } else {
            let ok = mass_derivative_check(traj).map(|r| r.max_relative_residual <= MASS_IDENTITY_TOL).ok();
            v.insert("mass_identity_within_tol".into(), json!(ok));
        }
    }
    let q: Option<Vec<f64>> = d.iter().map(|r| r.q).collect();
    if let Some(q) = q.filter(|q| !q.is_empty()) {
        v.insert("q_strictly_increasing".into(), json!(q.windows(2).all(|w| w[1] > w[0])));
    }
    Value::Object(v)
}

fn frames(traj: &FlowTrajectory) -> Value {
    let list: Vec<Value> = traj
        .states
        .iter()
        .map(|s| {
            json!({
                "t": s.t,
                "metric": s.metric.components(),
                "pressure": s.pressure.values,
                "scalar_curvature": s.curvature.scalar,
                "gauge_field": s.gauge_field,
            })
        })
        .collect();
    let nodes = traj.states.first().and_then(|s| s.metric.as_radial()).map(|g| g.grid.nodes.clone());
    json!({ "rho": nodes, "frames": list })
}

/// Run one resolved scenario and write its artifacts into `out_dir`.
pub fn run_scenario(scenario: &Scenario, out_dir: &Path) -> Result<RunOutcome> {
    fs::create_dir_all(out_dir)?;
    let g0 = scenario.initial_metric()?;
    let traj = run_flow(&scenario.flow_config(), &g0)?;
    write_timeseries(&out_dir.join("timeseries.csv"), &traj.diagnostics)?;
    if scenario.diagnostics.frames {
        write_json(&out_dir.join("frames.json"), &frames(&traj))?;
    }
    let exit_code = match traj.termination {
        Termination::Completed => 0,
        Termination::PressureFailure => 3,
        Termination::NumericalBreakdown => 4,
    };
    let columns: serde_json::Map<String, Value> = COLUMNS.iter().map(|(k, d)| (k.to_string(), json!(d))).collect();
    let summary = json!({
        "name": scenario.name,
        "termination": traj.termination,
        "message": traj.message,
        "warnings": traj.warnings,
        "steps": traj.steps,
        "dt": traj.dt,
        "frames": traj.states.len(),
        "final_time": traj.states.last().map(|s| s.t),
        "verdicts": verdicts(&traj),
        "residuals": if scenario.diagnostics.identities { identities(&traj) } else { Value::Null },
        "config": scenario,
        "columns": columns,
    });
    write_json(&out_dir.join("summary.json"), &summary)?;
    Ok(RunOutcome {
        name: scenario.name.clone(),
        out_dir: out_dir.to_path_buf(),
        termination: traj.termination,
        exit_code,
        summary,
    })
}
