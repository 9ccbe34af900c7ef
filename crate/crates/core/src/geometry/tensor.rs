use serde::{Deserialize, Serialize};

use super::homogeneous::{curvature_homogeneous, HomogeneousMetric};
use super::radial::{ricci_radial, RadialMetric};
use crate::error::{Error, Result};

/// What a symmetric two-tensor represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TensorRole {
    Metric,
    MetricPerturbation,
    Curvature,
    GaugeTerm,
}

/// Independent components of a symmetric two-tensor in a reduction class.
///
/// Radial tensors store `T = rr d rho^2 + tt rho^2 dOmega^2`; frame tensors
/// store the diagonal entries `T(e_i, e_i)` in the invariant frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Components {
    Radial { rr: Vec<f64>, tt: Vec<f64> },
    Frame([f64; 3]),
}

impl Components {
    pub fn zeros_like(&self) -> Components {
        match self {
            Components::Radial { rr, .. } => Components::Radial {
                rr: vec![0.0; rr.len()],
                tt: vec![0.0; rr.len()],
            },
            Components::Frame(_) => Components::Frame([0.0; 3]),
        }
    }

    /// Flattened values: `rr` followed by `tt`, or the three frame entries.
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            Components::Radial { rr, tt } => rr.iter().chain(tt).copied().collect(),
            Components::Frame(c) => c.to_vec(),
        }
    }

    /// Inverse of [`Components::to_vec`] with the shape of `self`.
    pub fn from_flat(&self, v: &[f64]) -> Components {
        match self {
            Components::Radial { rr, .. } => {
                let n = rr.len();
                Components::Radial { rr: v[..n].to_vec(), tt: v[n..2 * n].to_vec() }
            }
            Components::Frame(_) => Components::Frame([v[0], v[1], v[2]]),
        }
    }

    pub fn same_shape(&self, other: &Components) -> bool {
        match (self, other) {
            (Components::Radial { rr: a, .. }, Components::Radial { rr: b, .. }) => a.len() == b.len(),
            (Components::Frame(_), Components::Frame(_)) => true,
            _ => false,
        }
    }

    pub fn zip_with(&self, other: &Components, f: impl Fn(f64, f64) -> f64) -> Components {
        assert!(self.same_shape(other), "tensor shapes differ");
        match (self, other) {
            (Components::Radial { rr: a, tt: b }, Components::Radial { rr: c, tt: d }) => Components::Radial {
                rr: a.iter().zip(c).map(|(&x, &y)| f(x, y)).collect(),
                tt: b.iter().zip(d).map(|(&x, &y)| f(x, y)).collect(),
            },
            (Components::Frame(a), Components::Frame(b)) => {
                Components::Frame([f(a[0], b[0]), f(a[1], b[1]), f(a[2], b[2])])
            }
            _ => unreachable!(),
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Components {
        match self {
            Components::Radial { rr, tt } => Components::Radial {
                rr: rr.iter().map(|&x| f(x)).collect(),
                tt: tt.iter().map(|&x| f(x)).collect(),
            },
            Components::Frame(a) => Components::Frame([f(a[0]), f(a[1]), f(a[2])]),
        }
    }

    /// Multiply every component at a point by the scalar field value there.
    pub fn scale_pointwise(&self, field: &[f64]) -> Components {
        match self {
            Components::Radial { rr, tt } => Components::Radial {
                rr: rr.iter().zip(field).map(|(x, p)| x * p).collect(),
                tt: tt.iter().zip(field).map(|(x, p)| x * p).collect(),
            },
            Components::Frame(a) => Components::Frame(a.map(|x| x * field[0])),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.to_vec().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Number of points (grid nodes, or 1 for the frame class).
    pub fn points(&self) -> usize {
        match self {
            Components::Radial { rr, .. } => rr.len(),
            Components::Frame(_) => 1,
        }
    }

    /// Pointwise `tr_g T` with `g` given as components of the same shape.
    pub fn trace(&self, g: &Components, m: usize) -> Vec<f64> {
        match (self, g) {
            (Components::Radial { rr, tt }, Components::Radial { rr: grr, tt: gtt }) => {
                let n = (m - 1) as f64;
                (0..rr.len()).map(|i| rr[i] / grr[i] + n * tt[i] / gtt[i]).collect()
            }
            (Components::Frame(t), Components::Frame(gg)) => {
                vec![(0..3).map(|i| t[i] / gg[i]).sum()]
            }
            _ => panic!("tensor shapes differ"),
        }
    }

    /// Pointwise `|T|_g^2`.
    pub fn norm_sq(&self, g: &Components, m: usize) -> Vec<f64> {
        match (self, g) {
            (Components::Radial { rr, tt }, Components::Radial { rr: grr, tt: gtt }) => {
                let n = (m - 1) as f64;
                (0..rr.len())
                    .map(|i| {
                        let x = rr[i] / grr[i];
                        let y = tt[i] / gtt[i];
                        x * x + n * y * y
                    })
                    .collect()
            }
            (Components::Frame(t), Components::Frame(gg)) => {
                vec![(0..3).map(|i| (t[i] / gg[i]).powi(2)).sum()]
            }
            _ => panic!("tensor shapes differ"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricTwoTensor {
    pub role: TensorRole,
    pub components: Components,
}

impl SymmetricTwoTensor {
    pub fn new(role: TensorRole, components: Components) -> Self {
        SymmetricTwoTensor { role, components }
    }

    pub fn with_role(mut self, role: TensorRole) -> Self {
        self.role = role;
        self
    }

    pub fn max_abs(&self) -> f64 {
        self.components.max_abs()
    }
}

/// Curvature of a metric together with its deviation from the Einstein
/// condition at a target scalar curvature `s0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureData {
    pub ric: SymmetricTwoTensor,
    pub scalar: Vec<f64>,
    pub s0: f64,
    pub deviation: SymmetricTwoTensor,
    pub deviation_norm_sq: Vec<f64>,
    pub ric_norm_sq: Vec<f64>,
}

impl CurvatureData {
    /// Assemble from Ricci components; derives `s`, `E` and the norms.
    pub fn from_ricci(ric: Components, g: &Metric, s0: f64) -> Result<CurvatureData> {
        let m = g.dimension();
        let gc = g.components();
        let scalar = ric.trace(&gc, m);
        let ric_norm_sq = ric.norm_sq(&gc, m);
        let ric = SymmetricTwoTensor::new(TensorRole::Curvature, ric);
        crate::error::ensure_finite(&scalar, "scalar curvature")?;
        let (deviation, deviation_norm_sq) = deviation_parts(&ric, &gc, m, s0);
        Ok(CurvatureData { ric, scalar, s0, deviation, deviation_norm_sq, ric_norm_sq })
    }

    pub fn max_drift(&self) -> f64 {
        self.scalar.iter().fold(0.0, |m, s| m.max((s - self.s0).abs()))
    }
}

fn deviation_parts(ric: &SymmetricTwoTensor, gc: &Components, m: usize, s0: f64) -> (SymmetricTwoTensor, Vec<f64>) {
    let c = s0 / m as f64;
    let e = ric.components.zip_with(gc, |r, g| r - c * g);
    let nsq = e.norm_sq(gc, m);
    (SymmetricTwoTensor::new(TensorRole::Curvature, e), nsq)
}

/// `E = Ric - (s0/m) g` and `|E|^2`.
pub fn einstein_deviation(curv: &CurvatureData, g: &Metric, s0: f64) -> (SymmetricTwoTensor, Vec<f64>) {
    deviation_parts(&curv.ric, &g.components(), g.dimension(), s0)
}

/// A metric in one of the supported reduction classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Metric {
    Radial(RadialMetric),
    Homogeneous(HomogeneousMetric),
}

impl From<RadialMetric> for Metric {
    fn from(g: RadialMetric) -> Self {
        Metric::Radial(g)
    }
}

impl From<HomogeneousMetric> for Metric {
    fn from(g: HomogeneousMetric) -> Self {
        Metric::Homogeneous(g)
    }
}

impl Metric {
    pub fn dimension(&self) -> usize {
        match self {
            Metric::Radial(g) => g.grid.dimension,
            Metric::Homogeneous(_) => 3,
        }
    }

    /// The metric itself as tensor components: `(A^2, B^2)` or `(g1, g2, g3)`.
    pub fn components(&self) -> Components {
        match self {
            Metric::Radial(g) => Components::Radial {
                rr: g.a.iter().map(|a| a * a).collect(),
                tt: g.b.iter().map(|b| b * b).collect(),
            },
            Metric::Homogeneous(g) => Components::Frame(g.coeffs),
        }
    }

    pub fn tensor(&self) -> SymmetricTwoTensor {
        SymmetricTwoTensor::new(TensorRole::Metric, self.components())
    }

    /// New metric of the same class from tensor components.
    pub fn with_components(&self, c: &Components) -> Result<Metric> {
        match (self, c) {
            (Metric::Radial(g), Components::Radial { rr, tt }) => {
                if let Some(i) = rr.iter().chain(tt).position(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(Error::NumericalBreakdown(format!(
                        "metric component lost positivity at index {i}"
                    )));
                }
                let a = rr.iter().map(|v| v.sqrt()).collect();
                let b = tt.iter().map(|v| v.sqrt()).collect();
                Ok(Metric::Radial(g.with_profiles(a, b)))
            }
            (Metric::Homogeneous(g), Components::Frame(c)) => {
                if c.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                    return Err(Error::NumericalBreakdown(format!("metric coefficients {c:?} lost positivity")));
                }
                Ok(Metric::Homogeneous(HomogeneousMetric { coeffs: *c, ..g.clone() }))
            }
            _ => Err(Error::InvalidMetric("component shape does not match the metric class".into())),
        }
    }

    pub fn curvature(&self, s0: f64) -> Result<CurvatureData> {
        match self {
            Metric::Radial(g) => ricci_radial(g, s0),
            Metric::Homogeneous(g) => curvature_homogeneous(g, s0),
        }
    }

    pub fn as_radial(&self) -> Option<&RadialMetric> {
        match self {
            Metric::Radial(g) => Some(g),
            _ => None,
        }
    }

    pub fn as_homogeneous(&self) -> Option<&HomogeneousMetric> {
        match self {
            Metric::Homogeneous(g) => Some(g),
            _ => None,
        }
    }

    /// `ln sqrt(det g)` per point, up to a metric-independent additive term.
    pub fn log_volume_density(&self) -> Vec<f64> {
        match self {
            Metric::Radial(g) => {
                let n = (g.grid.dimension - 1) as f64;
                g.a.iter().zip(&g.b).map(|(a, b)| a.ln() + n * b.ln()).collect()
            }
            Metric::Homogeneous(g) => vec![0.5 * g.coeffs.iter().map(|c| c.ln()).sum::<f64>()],
        }
    }
}
