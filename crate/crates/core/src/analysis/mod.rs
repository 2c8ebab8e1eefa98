//! Model-based checks that do not go through the synthesis programs.

mod closed_loop;
mod ls;
mod norms;
mod verify;

pub use closed_loop::ClosedLoop;
pub use ls::{ls_identify, structure_basis, LsEstimate};
pub use norms::{frequency_response, gain_at, h2_norm, hinf_bounds, hinf_estimate, hinf_norm, HinfBounds, GRID_POINTS};
pub use verify::{
    verify_robust, CandidateSource, CandidateCheck, DisturbanceSampler, Metric, RobustReport, VerifyInputs, VerifyOptions,
};

pub use crate::linalg::spectral_radius;
