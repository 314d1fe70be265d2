//! Dense linear algebra for the assembled Nyström systems.

mod cond;
mod dense;
mod gmres;
mod lu;
mod solvers;
mod svd;

pub use cond::{cond_p, condition_numbers, matrix_norm, ConditionNumbers};
pub use dense::DenseMatrix;
pub use gmres::{gmres, GmresTrace, DEFAULT_GMRES_CAP};
pub use lu::{lu_factor, LuFactors};
pub use solvers::{default_solvers, DirectSolver, GmresSolver, LinearSolution, LinearSolver};
pub use svd::singular_values;
