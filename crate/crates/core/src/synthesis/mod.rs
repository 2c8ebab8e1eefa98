//! Controller synthesis by semidefinite programming.

mod h2;
mod output;
mod qp;
mod result;

pub use h2::{synthesize_h2, synthesize_stabilizing};
pub use output::{extended_trajectory, synthesize_output_feedback, Objective, OutputFeedbackConfig, OutputFeedbackResult};
pub use qp::{check_inertia, synthesize_hinf, synthesize_quadratic_performance};
pub use result::{SynthesisOptions, SynthesisResult};

use crate::error::Result;
use crate::lft::LftPlant;
use crate::multiplier::MultiplierClass;

/// Runs the design selected by `objective`.
pub fn synthesize(plant: &LftPlant, class: &MultiplierClass, objective: Objective, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    match objective {
        Objective::H2 => synthesize_h2(plant, class, opts),
        Objective::Stabilize => synthesize_stabilizing(plant, class, opts),
        Objective::Hinf => synthesize_hinf(plant, class, None, opts),
    }
}
