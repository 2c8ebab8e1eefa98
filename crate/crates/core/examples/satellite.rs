//! Loop-shaping H∞ design for the flexible satellite from one noisy
//! experiment, with the Bode data of the resulting loop.

use datarobust::experiments::{run_satellite_study, ExperimentConfig};

fn main() -> datarobust::Result<()> {
    env_logger::init();
    let study = run_satellite_study(&ExperimentConfig::default())?;
    for note in &study.output.notes {
        println!("{note}");
    }
    if let Some(t) = study.output.table("satellite_bode") {
        // a few rows of the frequency response
        for row in t.rows.iter().step_by(64) {
            let cells: Vec<String> = row.iter().map(|v| v.map_or("-".into(), |x| format!("{x:.4}"))).collect();
            println!("{}", cells.join("  "));
        }
    }
    if let Some(c) = study.output.reports.first() {
        println!("verification: {} violations", c.report.violations());
    }
    Ok(())
}
