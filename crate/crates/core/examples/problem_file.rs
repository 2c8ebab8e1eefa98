//! Run the design described by a JSON problem file, as `datarobust synth`
//! does, and print the gain with its verification summary.
//!
//! `cargo run --example problem_file -- examples/data/two_state.json`

use std::path::PathBuf;

use datarobust::analysis::VerifyOptions;
use datarobust::experiments::{run_problem, ProblemFile};
use datarobust::synthesis::SynthesisOptions;

fn main() -> datarobust::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/data/two_state.json"));
    let (file, base) = ProblemFile::load(&path)?;
    let out = run_problem(&file, &base, None, &SynthesisOptions::default(), &VerifyOptions::default())?;
    println!("{}", serde_json::to_string_pretty(&out.to_json())?);
    print!("{}", out.report.to_text());
    Ok(())
}
