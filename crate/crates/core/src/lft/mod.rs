//! Plants in LFT form, uncertainty structures, trajectories and derived plants.

mod data;
mod derived;
mod performance;
mod plant;
mod structure;

pub use data::{assemble_data_matrices, DataMatrices, Trajectory};
pub use derived::{
    arx_uncertainty, build_extended_state_plant, discretize_zoh, partition_gain, zoh_factors, LftMatrices,
    OutputFeedbackGains,
};
pub use performance::{hinf_dual_parts, PerformanceIndex};
pub use plant::{validate_plant, LftPlant, NonlinearChannel, ValidatedPlant, RANK_TOL};
pub use structure::{BlockKind, BlockSpec, UncertaintyStructure};
