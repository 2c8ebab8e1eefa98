//! Affine matrix expressions, LMI problems and the conic solver interface.

mod backend;
mod expr;
mod problem;
pub mod svec;

pub use backend::{
    backend_by_name, backend_from_env, BackendOutput, BackendStatus, ClarabelBackend, ConicBackend, Solution,
    SolverOptions, Status, SOLVER_ENV,
};
pub use expr::AffineMatrix;
pub use problem::{Cone, Constraint, ConstraintKind, Objective, Problem, Sense, StandardForm, Var, VarShape};
pub use svec::{smat, svec};
