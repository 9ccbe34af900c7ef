use crflow_cli::scenario::{parse_documents, registry};
use crflow_cli::schema::schema;
use crflow_cli::{parse_config, CliError};
use crflow_core::{FlowKind, GeometryKind, InitialData, InnerClosure};

#[test]
fn minimal_document_gets_defaults() {
    let s = parse_config(r#"{"name": "f", "initial_data": {"kind": "flat"}}"#).unwrap();
    let grid = s.grid.as_ref().unwrap();
    assert_eq!(grid.n_nodes, 256);
    assert_eq!(grid.rho_min, Some(0.1));
    assert_eq!(grid.closure, Some(InnerClosure::Even));
    assert_eq!(s.flow.dt_safety, 0.2);
    assert_eq!(s.flow.t_end, Some(0.1));
    assert_eq!(s.flow.s0, Some(0.0));
    assert_eq!(s.flow.flow_kind, FlowKind::Crf);
    assert_eq!(s.geometry_kind, Some(GeometryKind::RadialAf));
}

#[test]
fn nonzero_s0_on_radial_data_is_rejected() {
    let err = parse_config(r#"{"name": "f", "initial_data": {"kind": "flat"}, "flow": {"s0": 1.0}}"#).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let msg = err.to_string();
    assert!(msg.contains("flow.s0") && msg.contains("scalar-flat"), "{msg}");
}

#[test]
fn unknown_keys_are_rejected_with_position() {
    let doc = "{\n  \"name\": \"f\",\n  \"initial_data\": {\"kind\": \"flat\"},\n  \"flow\": {\"dt\": 0.1}\n}";
    let err = parse_config(doc).unwrap_err();
    let msg = err.to_string();
    assert!(matches!(err, CliError::Config(_)));
    assert!(msg.contains("unknown field `dt`") && msg.contains("line 4"), "{msg}");
    let err = parse_config(r#"{"name": "f", "initial_data": {"kind": "flat", "a0": 1}}"#).unwrap_err();
    assert!(err.to_string().contains("a0"));
}

#[test]
fn invalid_values_are_rejected() {
    let cases = [
        r#"{"name": "f", "initial_data": {"kind": "flat"}, "flow": {"dt_safety": 1.5}}"#,
        r#"{"name": "f", "initial_data": {"kind": "flat"}, "flow": {"t_end": -1}}"#,
        r#"{"name": "f", "initial_data": {"kind": "flat"}, "flow": {"steps": 0}}"#,
        r#"{"name": "f", "initial_data": {"kind": "flat"}, "grid": {"n_nodes": 8}}"#,
        r#"{"name": "f", "initial_data": {"kind": "flat"}, "geometry_kind": "homogeneous"}"#,
        r#"{"name": "f", "initial_data": {"kind": "schwarzschild_conformal", "a0": -1}}"#,
        r#"{"name": "f", "initial_data": {"kind": "homogeneous", "coeffs": [1, 1, 1]}, "grid": {}}"#,
        r#"{"name": "f", "initial_data": {"kind": "homogeneous", "coeffs": [1, 0, 1]}}"#,
        r#"{"name": "../x", "initial_data": {"kind": "flat"}}"#,
        r#"{"name": "f", "initial_data": {"kind": "flat"}"#,
    ];
    for doc in cases {
        let err = parse_config(doc).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{doc}: {err}");
    }
}

#[test]
fn defaults_round_trip() {
    for s in registry() {
        let resolved = s.clone().resolve().unwrap();
        let text = serde_json::to_string_pretty(&resolved).unwrap();
        assert_eq!(parse_config(&text).unwrap(), resolved, "{}", s.name);
    }
}

#[test]
fn homogeneous_s0_defaults_to_initial_curvature() {
    let s = parse_config(r#"{"name": "r", "initial_data": {"kind": "homogeneous", "coeffs": [1, 1, 1]}}"#).unwrap();
    assert!((s.flow.s0.unwrap() - 6.0).abs() < 1e-12);
    assert!(s.grid.is_none());
}

#[test]
fn steps_fix_the_end_time() {
    let s = parse_config(r#"{"name": "f", "initial_data": {"kind": "flat"}, "grid": {"n_nodes": 64}, "flow": {"steps": 7}}"#).unwrap();
    let dt = crflow_core::cfl_time_step(&s.initial_metric().unwrap(), 0.2);
    assert!((s.flow.t_end.unwrap() - 7.0 * dt).abs() <= 1e-15 * s.flow.t_end.unwrap());
}

#[test]
fn registry_is_complete_and_consistent() {
    let reg = registry();
    assert!(reg.len() >= 6);
    let names: Vec<&str> = reg.iter().map(|s| s.name.as_str()).collect();
    for n in ["flat", "schwarzschild_conformal", "perturbed_af", "squashed_homogeneous", "round_homogeneous", "ricci_comparison"] {
        assert!(names.contains(&n), "{n}");
    }
    for s in &reg {
        let text = serde_json::to_string(s).unwrap();
        parse_config(&text).unwrap();
    }
    let sch = reg.iter().find(|s| s.name == "schwarzschild_conformal").unwrap();
    assert_eq!(sch.initial_data, InitialData::SchwarzschildConformal { a0: 0.1 });
    assert_eq!(sch.grid.as_ref().unwrap().n_nodes, 400);
}

#[test]
fn arrays_hold_several_scenarios() {
    let doc = r#"[{"name": "a", "initial_data": {"kind": "flat"}}, {"name": "b", "initial_data": {"kind": "homogeneous", "coeffs": [1, 2, 3]}}]"#;
    let list = parse_documents(doc).unwrap();
    assert_eq!(list.len(), 2);
    assert_eq!(list[1].geometry_kind, Some(GeometryKind::Homogeneous));
}

#[test]
fn schema_covers_every_emitted_key() {
    let schema = schema();
    let text = serde_json::to_string(&schema).unwrap();
    let reparsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(reparsed, schema);
    let props = &schema["properties"];
    for s in registry() {
        let v = serde_json::to_value(s.resolve().unwrap()).unwrap();
        for (k, sub) in v.as_object().unwrap() {
            assert!(props.get(k).is_some(), "{k}");
            if let (Some(obj), Some(p)) = (sub.as_object(), props[k].get("properties")) {
                for key in obj.keys() {
                    assert!(p.get(key).is_some(), "{k}.{key}");
                }
            }
        }
    }
}
