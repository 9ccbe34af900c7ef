mod common;

use common::*;
use crflow_core::*;
use rand::Rng;

fn frame(c: &Components) -> [f64; 3] {
    match c {
        Components::Frame(v) => *v,
        _ => panic!("expected frame components"),
    }
}

fn homogeneous(coeffs: [f64; 3]) -> (Metric, f64) {
    let h = HomogeneousMetric::su2(coeffs).unwrap();
    let s = curvature_homogeneous(&h, 0.0).unwrap().scalar[0];
    (Metric::Homogeneous(h), s)
}

fn schwarzschild(n: usize, a0: f64) -> Metric {
    let spec = GridSpec { n_nodes: n, ..GridSpec::default() };
    InitialData::SchwarzschildConformal { a0 }.build(&spec).unwrap()
}

fn homogeneous_config(s0: f64, dt_safety: f64, t_end: f64) -> FlowConfig {
    FlowConfig {
        geometry_kind: GeometryKind::Homogeneous,
        s0,
        dt_safety,
        t_end,
        output_stride: 1,
        ..FlowConfig::default()
    }
}

#[test]
fn fixed_points_have_zero_rhs() {
    let round = Metric::Homogeneous(HomogeneousMetric::round());
    let p = pressure_homogeneous(0.0, 6.0).unwrap();
    assert!(crf_rhs(&round, &p, 6.0).unwrap().max_abs() < 1e-12);
    assert!(dtcrf_rhs(&round, &p, 6.0, &round).unwrap().max_abs() < 1e-12);

    let flat = Metric::Radial(RadialMetric::euclidean(build_radial_grid(0.1, 100.0, 64, 3).unwrap()));
    let pf = solve_pressure_radial(flat.as_radial().unwrap(), 0.0, &[0.0; 64]).unwrap();
    assert!(crf_rhs(&flat, &pf, 0.0).unwrap().max_abs() < 1e-12);
    assert!(dtcrf_rhs(&flat, &pf, 0.0, &flat).unwrap().max_abs() < 1e-12);
    assert!(ricci_rhs(&flat).unwrap().max_abs() < 1e-12);
}

#[test]
fn squashed_rhs_matches_hand_assembly() {
    let x = [1.1, 0.3, 0.7];
    for coeffs in [[1.0, 1.1, 0.9], [0.8, 1.3, 1.7]] {
        let (g, s0) = homogeneous(coeffs);
        let field = su2_metric(coeffs);
        let engine = ChartEngine { metric: &*field, dim: 3, step: 2e-3 };
        let ric = su2_frame_ricci(&engine.ricci(&x), &x);
        let s: f64 = (0..3).map(|i| ric[(i, i)] / coeffs[i]).sum();
        let e: Vec<f64> = (0..3).map(|i| ric[(i, i)] - s / 3.0 * coeffs[i]).collect();
        let e2: f64 = (0..3).map(|i| (e[i] / coeffs[i]).powi(2)).sum();
        let p = -e2 / s;
        let expect: Vec<f64> = (0..3).map(|i| -2.0 * e[i] - 2.0 * p * coeffs[i]).collect();

        let pf = pressure_homogeneous(g.curvature(s0).unwrap().deviation_norm_sq[0], s0).unwrap();
        assert!((pf.values[0] - p).abs() <= 1e-6 * p.abs().max(1e-3));
        let rhs = frame(&crf_rhs(&g, &pf, s0).unwrap().components);
        for i in 0..3 {
            assert!((rhs[i] - expect[i]).abs() <= 1e-6, "{coeffs:?} {i}: {} vs {}", rhs[i], expect[i]);
        }
        let dt = frame(&dtcrf_rhs(&g, &pf, s0, &g).unwrap().components);
        assert_eq!(dt, rhs);
    }
}

#[test]
fn deturck_rhs_differs_by_lie_derivative() {
    let g = schwarzschild(200, 0.1);
    let r = g.as_radial().unwrap();
    let flat = RadialMetric::euclidean(r.grid.clone());
    let p = solve_pressure_radial(r, 0.0, &vec![0.0; r.grid.n_nodes]).unwrap();
    let crf = crf_rhs(&g, &p, 0.0).unwrap();
    let dt = dtcrf_rhs(&g, &p, 0.0, &Metric::Radial(flat.clone())).unwrap();
    let (_, lie) = deturck_gauge_term(r, &flat).unwrap();
    let diff = dt.components.zip_with(&crf.components, |a, b| a - b);
    let err = diff.zip_with(&lie.components, |a, b| a - b).max_abs();
    assert!(err <= 1e-12 * lie.max_abs().max(1.0), "{err:e}");
    assert!(lie.max_abs() > 1e-6);
}

#[test]
fn ricci_rhs_is_minus_twice_ricci() {
    let round = HomogeneousMetric::round();
    let r = frame(&ricci_rhs(&Metric::Homogeneous(round.clone())).unwrap().components);
    for (ri, gi) in r.iter().zip(round.coeffs) {
        assert!((ri + 4.0 * gi).abs() < 1e-12);
    }
    let mut rng = rng(3);
    let grid = build_radial_grid(0.5, 60.0, 200, 3).unwrap();
    for _ in 0..5 {
        let (ca, cb, w) = (rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), rng.random_range(1.0..5.0));
        let g = RadialMetric::from_fn(grid.clone(), 1.0, |x| {
            (1.0 + ca * (-(x / w).powi(2)).exp(), 1.0 + cb * (-(x / w).powi(2)).exp())
        })
        .unwrap();
        let direct = ricci_radial(&g, 0.0).unwrap().ric.components.map(|v| -2.0 * v);
        let got = ricci_rhs(&Metric::Radial(g)).unwrap().components;
        assert_eq!(got, direct);
    }
}

#[test]
fn flat_and_round_runs_are_stationary() {
    let flat = Metric::Radial(RadialMetric::euclidean(build_radial_grid(0.1, 100.0, 64, 3).unwrap()));
    let dt = cfl_time_step(&flat, 0.2);
    let cfg = FlowConfig { t_end: 100.0 * dt, output_stride: 10, ..FlowConfig::default() };
    let traj = run_flow(&cfg, &flat).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    assert_eq!(traj.steps, 100);
    let g0 = flat.components();
    for st in &traj.states {
        assert!(st.metric.components().zip_with(&g0, |a, b| a - b).max_abs() <= 1e-10);
    }

    let round = Metric::Homogeneous(HomogeneousMetric::round());
    let traj = run_flow(&homogeneous_config(6.0, 0.2, 0.5), &round).unwrap();
    assert_eq!(traj.termination, Termination::Completed);
    let last = traj.states.last().unwrap();
    assert!(last.metric.components().zip_with(&round.components(), |a, b| a - b).max_abs() <= 1e-10 * 0.5);
}

#[test]
fn squashed_run_preserves_constraint_and_converges() {
    let (g0, s0) = homogeneous([1.0, 1.1, 0.9]);
    let a = run_flow(&homogeneous_config(s0, 0.1, 0.1), &g0).unwrap();
    let b = run_flow(&homogeneous_config(s0, 0.05, 0.1), &g0).unwrap();
    assert_eq!(a.termination, Termination::Completed);
    let drift = a.diagnostics.iter().fold(0.0f64, |m, d| m.max(d.constraint_drift));
    assert!(drift <= 1e-8, "{drift:e}");
    let ga = frame(&a.states.last().unwrap().metric.components());
    let gb = frame(&b.states.last().unwrap().metric.components());
    for i in 0..3 {
        assert!((ga[i] - gb[i]).abs() <= 1e-8, "{i}: {} vs {}", ga[i], gb[i]);
    }
    assert!(a.times().windows(2).all(|w| w[1] > w[0]));
    assert!((a.states.last().unwrap().t - 0.1).abs() < 1e-14);
}

#[test]
fn scaling_equivariance() {
    let coeffs = [1.0, 1.1, 0.9];
    let (g0, s0) = homogeneous(coeffs);
    let lambda: f64 = 2.0;
    let c = lambda.powi(-2);
    let (gl, sl) = homogeneous(coeffs.map(|v| v * c));
    assert!((sl - s0 / c).abs() <= 1e-12 * sl);
    let a = run_flow(&homogeneous_config(s0, 0.1, 0.1), &g0).unwrap();
    let b = run_flow(&homogeneous_config(sl, 0.1, 0.1 * c), &gl).unwrap();
    assert_eq!(a.steps, b.steps);
    for (sa, sb) in a.states.iter().zip(&b.states) {
        let (fa, fb) = (frame(&sa.metric.components()), frame(&sb.metric.components()));
        for i in 0..3 {
            assert!((fb[i] - c * fa[i]).abs() <= 1e-8 * c * fa[i]);
        }
        assert!((sb.pressure.values[0] - sa.pressure.values[0] / c).abs() <= 1e-8 * sb.pressure.values[0].abs().max(1e-12));
    }
}

#[test]
fn homogeneous_deturck_matches_crf() {
    let (g0, s0) = homogeneous([1.0, 1.1, 0.9]);
    let a = run_flow(&homogeneous_config(s0, 0.1, 0.05), &g0).unwrap();
    let cfg = FlowConfig { flow_kind: FlowKind::Dtcrf, ..homogeneous_config(s0, 0.1, 0.05) };
    let b = gauge_pullback(&run_flow(&cfg, &g0).unwrap()).unwrap();
    for (x, y) in a.states.iter().zip(&b.states) {
        assert_eq!(x.metric, y.metric);
    }
}

#[test]
fn pullback_of_stationary_run_is_identity() {
    let flat = Metric::Radial(RadialMetric::euclidean(build_radial_grid(0.1, 100.0, 64, 3).unwrap()));
    let cfg = FlowConfig { flow_kind: FlowKind::Dtcrf, t_end: 20.0 * cfl_time_step(&flat, 0.2), output_stride: 5, ..FlowConfig::default() };
    let traj = run_flow(&cfg, &flat).unwrap();
    assert!(traj.states.iter().all(|s| s.gauge_field.as_ref().unwrap().iter().all(|w| *w == 0.0)));
    let back = gauge_pullback(&traj).unwrap();
    for (x, y) in traj.states.iter().zip(&back.states) {
        assert!(x.metric.components().zip_with(&y.metric.components(), |a, b| a - b).max_abs() <= 1e-14);
    }
}

#[test]
fn pullback_matches_direct_run_on_schwarzschild() {
    let g0 = schwarzschild(200, 0.1);
    let dt = cfl_time_step(&g0, 0.2);
    let base = FlowConfig { t_end: 100.0 * dt, output_stride: 20, ..FlowConfig::default() };
    let direct = run_flow(&base, &g0).unwrap();
    let cfg = FlowConfig { flow_kind: FlowKind::Dtcrf, reference_metric: ReferenceMetric::Initial, ..base };
    let gauged = run_flow(&cfg, &g0).unwrap();
    assert!(gauged.states[0].gauge_field.as_ref().unwrap().iter().all(|w| w.abs() < 1e-12));
    let back = gauge_pullback(&gauged).unwrap();
    assert_eq!(back.states.len(), direct.states.len());
    for (x, y) in direct.diagnostics.iter().zip(&back.diagnostics) {
        let (mx, my) = (x.mass.unwrap(), y.mass.unwrap());
        assert!((mx - my).abs() <= 1e-4 * mx.abs());
        assert!((x.ric_l2 - y.ric_l2).abs() <= 1e-4 * x.ric_l2);
    }
}

#[test]
fn ricci_flow_leaves_constraint_free() {
    let g0 = schwarzschild(200, 0.1);
    let dt = cfl_time_step(&g0, 0.2);
    let cfg = FlowConfig { flow_kind: FlowKind::Ricci, t_end: 100.0 * dt, output_stride: 50, ..FlowConfig::default() };
    let ricci = run_flow(&cfg, &g0).unwrap();
    let crf = run_flow(&FlowConfig { flow_kind: FlowKind::Crf, ..cfg }, &g0).unwrap();
    let dr = ricci.diagnostics.last().unwrap().constraint_drift;
    let dc = crf.diagnostics.last().unwrap().constraint_drift;
    assert!(dr > 1e3 * dc.max(1e-14), "ricci drift {dr:e}, crf drift {dc:e}");
}

#[test]
fn config_validation() {
    let bad = [
        FlowConfig { s0: 1.0, ..FlowConfig::default() },
        FlowConfig { dt_safety: 0.0, ..FlowConfig::default() },
        FlowConfig { dt_safety: 1.5, ..FlowConfig::default() },
        FlowConfig { t_end: 0.0, ..FlowConfig::default() },
        FlowConfig { t_end: -1.0, ..FlowConfig::default() },
        FlowConfig { output_stride: 0, ..FlowConfig::default() },
        FlowConfig { s0: f64::NAN, geometry_kind: GeometryKind::Homogeneous, ..FlowConfig::default() },
    ];
    for cfg in &bad {
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))), "{cfg:?}");
    }
    assert!(FlowConfig::default().validate().is_ok());

    let round = Metric::Homogeneous(HomogeneousMetric::round());
    assert!(matches!(run_flow(&FlowConfig::default(), &round), Err(Error::InvalidConfig(_))));
    assert!(matches!(run_flow(&homogeneous_config(5.0, 0.2, 0.1), &round), Err(Error::InvalidConfig(_))));
    assert!(run_flow(&FlowConfig { flow_kind: FlowKind::Ricci, ..homogeneous_config(5.0, 0.2, 0.01) }, &round).is_ok());
}

#[test]
fn resonance_warns_and_singular_pressure_terminates() {
    let round = Metric::Homogeneous(HomogeneousMetric::round());
    let traj = run_flow(&homogeneous_config(6.0, 0.2, 0.01), &round).unwrap();
    assert!(!traj.warnings.is_empty());

    let (g, s0) = homogeneous([1.0, 1.0, 4.0]);
    assert!(s0.abs() < 1e-12);
    let traj = run_flow(&homogeneous_config(0.0, 0.2, 0.01), &g).unwrap();
    assert_eq!(traj.termination, Termination::PressureFailure);
    assert!(traj.message.is_some());
}

#[test]
fn cfl_step_rules() {
    let grid = build_radial_grid(0.1, 100.0, 64, 3).unwrap();
    let h = grid.log_step;
    let flat = Metric::Radial(RadialMetric::euclidean(grid));
    let expect = 0.2 * (0.1 * h).powi(2) / 6.0;
    assert!((cfl_time_step(&flat, 0.2) - expect).abs() <= 1e-12 * expect);
    let (g, _) = homogeneous([1.0, 2.0, 3.0]);
    assert!((cfl_time_step(&g, 0.5) - 0.5 * 0.25 / 6.0).abs() < 1e-15);
}
