//! Norm-preserving Nyström discretizations of the second-kind integral
//! equations for `(eps u')' = f` on an interval, with adaptive panel
//! meshes, closed-form oracles and conditioning experiments.

pub mod analytic;
pub mod coefficient;
pub mod error;
pub mod experiments;
pub mod formulation;
pub mod linalg;
pub mod mesh;
pub mod norm;
pub mod operators;
pub mod probes;
pub mod quadrature;
pub mod registry;
pub mod solver;

pub use coefficient::{eval_profile, lp_norm_ratio, make_profile, Coefficient, CoefficientProfile, Layer, ProfileSpec};
pub use error::{Error, Result};
pub use mesh::{refine_adaptive, refine_with, CompositeQuadrature, RefineCriterion, RefineOptions};
pub use norm::Exponent;
pub use quadrature::{gauss_legendre_rule, scale_rule, Interval, QuadratureRule};
