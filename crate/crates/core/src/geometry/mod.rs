pub mod grid;
pub mod homogeneous;
pub mod radial;
pub mod stencil;
pub mod tensor;

pub use grid::{build_radial_grid, log_nodes, InnerClosure, RadialGrid};
pub use homogeneous::{curvature_homogeneous, HomogeneousMetric};
pub use radial::{
    adjoint_divergence, deturck_gauge_term, divergence, lie_derivative, operator_g, ricci_radial,
    RadialMetric,
};
pub use tensor::{einstein_deviation, Components, CurvatureData, Metric, SymmetricTwoTensor, TensorRole};
