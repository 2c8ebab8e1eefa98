//! The four knowledge settings over a short noise grid, written as CSV
//! together with the verification of every reported level.
//!
//! `cargo run --release --example scenario_study -- out`

use datarobust::experiments::{run_scenario_study, ExperimentConfig};

fn main() -> datarobust::Result<()> {
    env_logger::init();
    let cfg = ExperimentConfig {
        noise_levels: vec![0.0, 0.01, 0.05],
        ..ExperimentConfig::default()
    };
    let out = run_scenario_study(&cfg)?;
    print!("{}", out.table("fig3").expect("table").to_csv());
    println!("{} verified levels, {} violations", out.reports.len(), out.violations());
    if let Some(dir) = std::env::args().nth(1) {
        out.write(dir.as_ref(), "fig3")?;
    }
    Ok(())
}
