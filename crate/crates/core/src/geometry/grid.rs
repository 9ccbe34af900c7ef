use serde::{Deserialize, Serialize};

use super::stencil::{DiffOps, LeftRule};
use crate::error::{Error, Result};

/// Treatment of the inner sphere `rho = rho_min`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InnerClosure {
    /// Reflective closure: metric profiles and scalars are even in `ln rho`.
    #[default]
    Even,
    /// Minimal-sphere closure: the metric is symmetric under the inversion
    /// `rho -> rho_min^2 / rho`, so `rho*A` and `rho*B` are even in `ln rho`.
    Inversion,
}

/// Ghost-node rules for each kind of radial field under a closure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureRules {
    /// `A` and `B`.
    pub profile: LeftRule,
    /// Scalars such as `p` and `s`.
    pub scalar: LeftRule,
    /// Radial vector component `W^u = d(ln rho)/dt`.
    pub vector: LeftRule,
    /// Covariant tensor components stored per `d rho^2` or `rho^2 dOmega^2`.
    pub tensor: LeftRule,
}

impl InnerClosure {
    pub fn rules(self) -> ClosureRules {
        match self {
            InnerClosure::Even => ClosureRules {
                profile: LeftRule::EVEN,
                scalar: LeftRule::EVEN,
                vector: LeftRule::OneSided,
                tensor: LeftRule::OneSided,
            },
            InnerClosure::Inversion => ClosureRules {
                profile: LeftRule::Ghost { parity: 1.0, weight: 1.0 },
                scalar: LeftRule::EVEN,
                vector: LeftRule::ODD,
                tensor: LeftRule::Ghost { parity: 1.0, weight: 1.0 },
            },
        }
    }
}

/// Logarithmically spaced radial grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub rho_min: f64,
    pub rho_max: f64,
    pub n_nodes: usize,
    pub nodes: Vec<f64>,
    pub dimension: usize,
    pub log_step: f64,
    #[serde(default)]
    pub closure: InnerClosure,
}

/// Log-spaced radii from `rho_min` to `rho_max` inclusive.
pub fn log_nodes(rho_min: f64, rho_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(rho_min.is_finite() && rho_max.is_finite()) || rho_min <= 0.0 || rho_max <= rho_min {
        return Err(Error::InvalidGrid(format!(
            "need 0 < rho_min < rho_max, got {rho_min}, {rho_max}"
        )));
    }
    if n < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
    }
    let h = (rho_max / rho_min).ln() / (n - 1) as f64;
    let mut nodes: Vec<f64> = (0..n).map(|i| rho_min * (i as f64 * h).exp()).collect();
    nodes[0] = rho_min;
    nodes[n - 1] = rho_max;
    Ok(nodes)
}

/// Build a log-spaced grid with the default [`InnerClosure::Even`] closure.
pub fn build_radial_grid(rho_min: f64, rho_max: f64, n_nodes: usize, m: usize) -> Result<RadialGrid> {
    if n_nodes < 16 {
        return Err(Error::InvalidGrid(format!("need at least 16 nodes, got {n_nodes}")));
    }
    if m < 3 {
        return Err(Error::InvalidGrid(format!("dimension must be at least 3, got {m}")));
    }
    let nodes = log_nodes(rho_min, rho_max, n_nodes)?;
    Ok(RadialGrid {
        rho_min,
        rho_max,
        n_nodes,
        log_step: (rho_max / rho_min).ln() / (n_nodes - 1) as f64,
        nodes,
        dimension: m,
        closure: InnerClosure::Even,
    })
}

impl RadialGrid {
    pub fn with_closure(mut self, closure: InnerClosure) -> Self {
        self.closure = closure;
        self
    }

    pub fn len(&self) -> usize {
        self.n_nodes
    }

    pub fn is_empty(&self) -> bool {
        self.n_nodes == 0
    }

    /// `ln rho` at node `i`.
    pub fn u(&self, i: usize) -> f64 {
        self.rho_min.ln() + i as f64 * self.log_step
    }

    pub fn u0(&self) -> f64 {
        self.rho_min.ln()
    }

    pub fn ops(&self) -> DiffOps {
        DiffOps::new(self.n_nodes, self.log_step)
    }

    pub fn rules(&self) -> ClosureRules {
        self.closure.rules()
    }

    /// Same nodes, dimension and closure.
    pub fn compatible(&self, other: &RadialGrid) -> bool {
        self.n_nodes == other.n_nodes
            && self.dimension == other.dimension
            && self.closure == other.closure
            && (self.rho_min - other.rho_min).abs() <= 1e-14 * self.rho_min
            && (self.rho_max - other.rho_max).abs() <= 1e-14 * self.rho_max
    }

    /// First node index of the outermost decade.
    pub fn outer_decade_start(&self) -> usize {
        let cut = (self.rho_max / 10.0).max(self.rho_min);
        self.nodes.iter().position(|&r| r >= cut).unwrap_or(0)
    }
}
