//! Multiplier cones for prior knowledge and data, and their combinations.

mod class;
mod constructors;
mod membership;

pub use class::{sum_classes, Component, ComponentKind, MultiplierClass, MultiplierValue, MultiplierVar, ParamLmi};
pub use constructors::{
    combine, difference_toeplitz, disturbance_convex_hull, disturbance_diagonal, disturbance_energy,
    disturbance_kernel, disturbance_quadratic, hypercube_vertices, learn_from_data, norm_bound, prior_full_block,
    prior_from_bounds, prior_repeated_scalar, transform_prior, ExtraClass, PriorBound,
};
pub use membership::{assumption_definiteness_check, certify_membership, Membership};
