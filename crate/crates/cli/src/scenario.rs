use serde::{Deserialize, Serialize};

use crflow_core::{
    cfl_time_step, curvature_homogeneous, FlowConfig, FlowKind, GeometryKind, GridSpec, HomogeneousMetric,
    InitialData, Metric, ReferenceMetric,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowSection {
    #[serde(default = "FlowSection::default_kind")]
    pub flow_kind: FlowKind,
    /// Filled with the initial scalar curvature for homogeneous data, 0 otherwise.
    #[serde(default)]
    pub s0: Option<f64>,
    #[serde(default = "FlowSection::default_dt_safety")]
    pub dt_safety: f64,
    #[serde(default)]
    pub t_end: Option<f64>,
    /// When set, `t_end` is recomputed as `steps` CFL steps of the initial metric.
    #[serde(default)]
    pub steps: Option<usize>,
    #[serde(default = "FlowSection::default_stride")]
    pub output_stride: usize,
    #[serde(default)]
    pub reference_metric: ReferenceMetric,
    #[serde(default)]
    pub mass_radii: Option<Vec<f64>>,
}

impl FlowSection {
    fn default_kind() -> FlowKind {
        FlowKind::Crf
    }
    fn default_dt_safety() -> f64 {
        0.2
    }
    fn default_stride() -> usize {
        10
    }
}

impl Default for FlowSection {
    fn default() -> Self {
        FlowSection {
            flow_kind: FlowSection::default_kind(),
            s0: None,
            dt_safety: FlowSection::default_dt_safety(),
            t_end: None,
            steps: None,
            output_stride: FlowSection::default_stride(),
            reference_metric: ReferenceMetric::default(),
            mass_radii: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsToggles {
    /// Write `frames.json` with the full metric at every recorded frame.
    #[serde(default)]
    pub frames: bool,
    /// Run the identity checks and record their residuals in the summary.
    #[serde(default = "yes")]
    pub identities: bool,
}

fn yes() -> bool {
    true
}

impl Default for DiagnosticsToggles {
    fn default() -> Self {
        DiagnosticsToggles { frames: false, identities: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub geometry_kind: Option<GeometryKind>,
    pub initial_data: InitialData,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub flow: FlowSection,
    #[serde(default)]
    pub diagnostics: DiagnosticsToggles,
}

fn config_err(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl Scenario {
    pub fn geometry(&self) -> GeometryKind {
        self.geometry_kind.unwrap_or(if self.initial_data.is_radial() {
            GeometryKind::RadialAf
        } else {
            GeometryKind::Homogeneous
        })
    }

    /// Initial metric described by the scenario.
    pub fn initial_metric(&self) -> Result<Metric> {
        let spec = self.grid.clone().unwrap_or_default();
        self.initial_data.build(&spec).map_err(|e| config_err("initial_data", e))
    }

    pub fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            flow_kind: self.flow.flow_kind,
            geometry_kind: self.geometry(),
            s0: self.flow.s0.unwrap_or(0.0),
            dt_safety: self.flow.dt_safety,
            t_end: self.flow.t_end.unwrap_or(0.1),
            output_stride: self.flow.output_stride,
            reference_metric: self.flow.reference_metric,
            mass_radii: self.flow.mass_radii.clone(),
        }
    }

    /// Fill every default and validate against the geometry class.
    pub fn resolve(mut self) -> Result<Scenario> {
        if self.name.is_empty() || self.name.contains(['/', '\\']) || self.name.starts_with('.') {
            return Err(config_err("name", format!("{:?} is not usable as a directory name", self.name)));
        }
        let radial = self.initial_data.is_radial();
        let implied = if radial { GeometryKind::RadialAf } else { GeometryKind::Homogeneous };
        if let Some(kind) = self.geometry_kind {
            if kind != implied {
                return Err(config_err("geometry_kind", format!("{kind:?} does not match the initial data")));
            }
        }
        self.geometry_kind = Some(implied);
        if radial {
            let mut spec = self.grid.take().unwrap_or_default();
            let grid = self.initial_data.grid(&spec).map_err(|e| config_err("grid", e))?;
            spec.rho_min = Some(grid.rho_min);
            spec.closure = Some(grid.closure);
            self.grid = Some(spec);
            match self.flow.s0 {
                Some(s0) if s0 != 0.0 => {
                    return Err(config_err(
                        "flow.s0",
                        format!("{s0} rejected: asymptotically flat runs require scalar-flat data, s0 = 0"),
                    ))
                }
                _ => self.flow.s0 = Some(0.0),
            }
        } else {
            if self.grid.is_some() {
                return Err(config_err("grid", "homogeneous data takes no radial grid"));
            }
            if self.flow.mass_radii.is_some() {
                return Err(config_err("flow.mass_radii", "the ADM mass is defined only for radial data"));
            }
            if self.flow.s0.is_none() {
                let InitialData::Homogeneous { coeffs } = &self.initial_data else { unreachable!() };
                let h = HomogeneousMetric::su2(*coeffs).map_err(|e| config_err("initial_data.coeffs", e))?;
                let s = curvature_homogeneous(&h, 0.0).map_err(|e| config_err("initial_data.coeffs", e))?.scalar[0];
                self.flow.s0 = Some(s);
            }
        }
        if let Some(steps) = self.flow.steps {
            if steps == 0 {
                return Err(config_err("flow.steps", "must be at least 1"));
            }
            let g0 = self.initial_metric()?;
            self.flow.t_end = Some(steps as f64 * cfl_time_step(&g0, self.flow.dt_safety));
        } else if self.flow.t_end.is_none() {
            self.flow.t_end = Some(0.1);
        }
        self.flow_config().validate().map_err(|e| config_err("flow", e))?;
        Ok(self)
    }
}

/// Parse and validate a JSON scenario document.
pub fn parse_config(text: &str) -> Result<Scenario> {
    let raw: Scenario = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    raw.resolve()
}

/// Parse a document holding one scenario or an array of scenarios.
pub fn parse_documents(text: &str) -> Result<Vec<Scenario>> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .enumerate()
            .map(|(i, v)| {
                let raw: Scenario = serde_json::from_value(v).map_err(|e| CliError::Config(format!("[{i}]: {e}")))?;
                raw.resolve()
            })
            .collect(),
        _ => Ok(vec![parse_config(text)?]),
    }
}

fn radial(name: &str, description: &str, data: InitialData, n: usize, kind: FlowKind, steps: usize, stride: usize) -> Scenario {
    Scenario {
        name: name.into(),
        description: Some(description.into()),
        geometry_kind: None,
        initial_data: data,
        grid: Some(GridSpec { n_nodes: n, ..GridSpec::default() }),
        flow: FlowSection { flow_kind: kind, steps: Some(steps), output_stride: stride, ..FlowSection::default() },
        diagnostics: DiagnosticsToggles::default(),
    }
}

fn homogeneous(name: &str, description: &str, coeffs: [f64; 3], dt_safety: f64) -> Scenario {
    Scenario {
        name: name.into(),
        description: Some(description.into()),
        geometry_kind: None,
        initial_data: InitialData::Homogeneous { coeffs },
        grid: None,
        flow: FlowSection { dt_safety, t_end: Some(0.1), output_stride: 10, ..FlowSection::default() },
        diagnostics: DiagnosticsToggles::default(),
    }
}

/// Built-in scenarios, unresolved as a user would write them.
pub fn registry() -> Vec<Scenario> {
    vec![
        radial("flat", "Euclidean space, a fixed point of the flow", InitialData::Flat {}, 256, FlowKind::Crf, 100, 10),
        radial(
            "schwarzschild_conformal",
            "Conformally flat Schwarzschild data with A0 = 0.1; the ADM mass decreases",
            InitialData::SchwarzschildConformal { a0: 0.1 },
            400,
            FlowKind::Crf,
            500,
            50,
        ),
        radial(
            "perturbed_af",
            "Schwarzschild data with a Gaussian bump in the radial profile, projected to scalar-flat",
            InitialData::PerturbedAf { a0: 0.1, amplitude: 0.05, center: 5.0, width: 0.5 },
            256,
            FlowKind::Crf,
            300,
            30,
        ),
        homogeneous("squashed_homogeneous", "Squashed left-invariant metric on SU(2); Q increases", [1.0, 1.1, 0.9], 0.1),
        homogeneous("round_homogeneous", "Round 3-sphere, an Einstein fixed point", [1.0, 1.0, 1.0], 0.2),
        radial(
            "ricci_comparison",
            "Plain Ricci flow from the Schwarzschild data; the ADM mass stays constant",
            InitialData::SchwarzschildConformal { a0: 0.1 },
            400,
            FlowKind::Ricci,
            500,
            50,
        ),
    ]
}

pub fn find_scenario(name: &str) -> Option<Scenario> {
    registry().into_iter().find(|s| s.name == name)
}
