use serde_json::{json, Value};

/// JSON Schema of a scenario document.
pub fn schema() -> Value {
    let number = json!({ "type": "number" });
    let positive = json!({ "type": "number", "exclusiveMinimum": 0 });
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "crflow scenario",
        "type": "object",
        "additionalProperties": false,
        "required": ["name", "initial_data"],
        "properties": {
            "name": { "type": "string", "description": "also the output subdirectory" },
            "description": { "type": ["string", "null"] },
            "geometry_kind": { "enum": ["radial_af", "homogeneous", null], "description": "implied by initial_data when omitted" },
            "initial_data": {
                "oneOf": [
                    { "type": "object", "additionalProperties": false, "required": ["kind"],
                      "properties": { "kind": { "const": "flat" } } },
                    { "type": "object", "additionalProperties": false, "required": ["kind", "a0"],
                      "properties": { "kind": { "const": "schwarzschild_conformal" }, "a0": positive } },
                    { "type": "object", "additionalProperties": false,
                      "required": ["kind", "a0", "amplitude", "center", "width"],
                      "properties": {
                          "kind": { "const": "perturbed_af" }, "a0": positive,
                          "amplitude": { "type": "number", "exclusiveMinimum": -1, "exclusiveMaximum": 1 },
                          "center": positive, "width": positive } },
                    { "type": "object", "additionalProperties": false, "required": ["kind", "coeffs"],
                      "properties": { "kind": { "const": "homogeneous" },
                          "coeffs": { "type": "array", "items": positive, "minItems": 3, "maxItems": 3 } } }
                ]
            },
            "grid": {
                "type": ["object", "null"],
                "description": "radial data only",
                "additionalProperties": false,
                "properties": {
                    "rho_min": { "type": ["number", "null"], "description": "defaults to the neck for Schwarzschild-type data, else 0.1" },
                    "rho_max": { "type": "number", "default": 1000.0 },
                    "n_nodes": { "type": "integer", "minimum": 16, "default": 256 },
                    "dimension": { "type": "integer", "minimum": 3, "default": 3 },
                    "closure": { "enum": ["even", "inversion", null], "description": "inversion for Schwarzschild-type data, else even" }
                }
            },
            "flow": {
                "type": "object",
                "additionalProperties": false,
                "properties": {
                    "flow_kind": { "enum": ["crf", "dtcrf", "ricci"], "default": "crf" },
                    "s0": { "type": ["number", "null"], "description": "must be 0 for radial data; defaults to the initial scalar curvature for homogeneous data" },
                    "dt_safety": { "type": "number", "exclusiveMinimum": 0, "maximum": 1, "default": 0.2 },
                    "t_end": { "type": ["number", "null"], "exclusiveMinimum": 0, "default": 0.1 },
                    "steps": { "type": ["integer", "null"], "minimum": 1, "description": "overrides t_end with this many CFL steps" },
                    "output_stride": { "type": "integer", "minimum": 1, "default": 10 },
                    "reference_metric": { "enum": ["euclidean", "initial"], "default": "euclidean" },
                    "mass_radii": { "type": ["array", "null"], "items": number, "minItems": 3 }
                }
            },
            "diagnostics": {
                "type": "object",
                "additionalProperties": false,
                "properties": {
                    "frames": { "type": "boolean", "default": false },
                    "identities": { "type": "boolean", "default": true }
                }
            }
        }
    })
}
