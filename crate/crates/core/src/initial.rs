//! Initial data used by the built-in scenarios.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{build_radial_grid, HomogeneousMetric, InnerClosure, Metric, RadialGrid, RadialMetric};
use crate::pressure::project_scalar_curvature;

/// Radial grid parameters. A missing `rho_min` means the Schwarzschild neck
/// for Schwarzschild-type data and `0.1` otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default)]
    pub rho_min: Option<f64>,
    #[serde(default = "GridSpec::default_rho_max")]
    pub rho_max: f64,
    #[serde(default = "GridSpec::default_n_nodes")]
    pub n_nodes: usize,
    #[serde(default = "GridSpec::default_dimension")]
    pub dimension: usize,
    #[serde(default)]
    pub closure: Option<InnerClosure>,
}

impl GridSpec {
    fn default_rho_max() -> f64 {
        1000.0
    }
    fn default_n_nodes() -> usize {
        256
    }
    fn default_dimension() -> usize {
        3
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            rho_min: None,
            rho_max: GridSpec::default_rho_max(),
            n_nodes: GridSpec::default_n_nodes(),
            dimension: GridSpec::default_dimension(),
            closure: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialData {
    /// Euclidean metric.
    Flat {},
    /// `w^(4/(m-2)) g_e`, `w = 1 + a0 / (2 rho^(m-2))`, projected onto the
    /// discrete scalar-flat constraint.
    SchwarzschildConformal { a0: f64 },
    /// Schwarzschild data with the radial profile multiplied by
    /// `1 + amplitude * exp(-(ln(rho / center) / width)^2)`, then projected.
    PerturbedAf { a0: f64, amplitude: f64, center: f64, width: f64 },
    /// Left-invariant metric on the compact group.
    Homogeneous { coeffs: [f64; 3] },
}

impl InitialData {
    pub fn is_radial(&self) -> bool {
        !matches!(self, InitialData::Homogeneous { .. })
    }

    fn neck_type(&self) -> Option<f64> {
        match self {
            InitialData::SchwarzschildConformal { a0 } | InitialData::PerturbedAf { a0, .. } => Some(*a0),
            _ => None,
        }
    }

    /// Grid implied by `spec` for this data.
    pub fn grid(&self, spec: &GridSpec) -> Result<RadialGrid> {
        let neck = self.neck_type().map(|a0| RadialMetric::schwarzschild_neck(a0, spec.dimension));
        let rho_min = spec.rho_min.or(neck).unwrap_or(0.1);
        let closure = spec.closure.unwrap_or(if neck.is_some() { InnerClosure::Inversion } else { InnerClosure::Even });
        if closure == InnerClosure::Inversion {
            match neck {
                Some(r) if (r - rho_min).abs() <= 1e-12 * r => {}
                _ => {
                    return Err(Error::InvalidConfig(
                        "inversion closure needs Schwarzschild-type data with rho_min at the neck".into(),
                    ))
                }
            }
        }
        Ok(build_radial_grid(rho_min, spec.rho_max, spec.n_nodes, spec.dimension)?.with_closure(closure))
    }

    /// Build the initial metric; radial data is made discretely scalar-flat.
    pub fn build(&self, spec: &GridSpec) -> Result<Metric> {
        match self {
            InitialData::Homogeneous { coeffs } => Ok(Metric::Homogeneous(HomogeneousMetric::su2(*coeffs)?)),
            InitialData::Flat {} => Ok(Metric::Radial(RadialMetric::euclidean(self.grid(spec)?))),
            InitialData::SchwarzschildConformal { a0 } => {
                check_a0(*a0)?;
                let g = RadialMetric::schwarzschild_conformal(self.grid(spec)?, *a0)?;
                Ok(Metric::Radial(project_scalar_curvature(&g, 0.0)?))
            }
            InitialData::PerturbedAf { a0, amplitude, center, width } => {
                check_a0(*a0)?;
                if !(*center > 0.0 && *width > 0.0 && amplitude.abs() < 1.0) {
                    return Err(Error::InvalidConfig(
                        "perturbation needs center > 0, width > 0 and |amplitude| < 1".into(),
                    ));
                }
                let g = RadialMetric::schwarzschild_conformal(self.grid(spec)?, *a0)?;
                let a = g
                    .a
                    .iter()
                    .zip(&g.grid.nodes)
                    .map(|(a, r)| a * (1.0 + amplitude * (-((r / center).ln() / width).powi(2)).exp()))
                    .collect();
                let g = RadialMetric::new(g.grid.clone(), a, g.b.clone(), g.tau)?;
                Ok(Metric::Radial(project_scalar_curvature(&g, 0.0)?))
            }
        }
    }
}

fn check_a0(a0: f64) -> Result<()> {
    if a0 > 0.0 && a0.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("Schwarzschild coefficient must be positive, got {a0}")))
    }
}
