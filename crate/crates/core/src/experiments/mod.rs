//! Reproducible studies on the two benchmark plants.

pub mod example_a;
pub mod problem_file;
pub mod satellite;
pub mod studies;
mod trajectory;

pub use example_a::{ExampleA, NoiseModel, Scenario};
pub use problem_file::{run_problem, ProblemFile, ProblemOutcome};
pub use satellite::Satellite;
pub use studies::{run_length_sweep, run_multiplier_study, run_noise_sweep, run_satellite_study, run_scenario_study, ExperimentConfig, MultiplierChoice, SatelliteStudy, StudyOutput, Table};
pub use trajectory::{generate_trajectory, InputLaw};
