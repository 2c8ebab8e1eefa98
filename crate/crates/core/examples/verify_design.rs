//! Sample uncertainties consistent with the prior bounds and the data and
//! check a combined-knowledge design on each of them.

use datarobust::analysis::{verify_robust, DisturbanceSampler, Metric, VerifyInputs, VerifyOptions};
use datarobust::experiments::{ExampleA, NoiseModel, Scenario};
use datarobust::synthesis::{synthesize_h2, SynthesisOptions};

fn main() -> datarobust::Result<()> {
    let ex = ExampleA::new();
    let d_bar = 0.05;
    let traj = ex.trajectory(200, d_bar, 3)?;
    let (plant, class, delta) = ex.scenario(Scenario::Combined, &traj, NoiseModel::Quadratic, d_bar)?;
    let r = synthesize_h2(&plant, &class, &SynthesisOptions::default())?;

    let data = ex.data(&traj)?;
    let inputs = VerifyInputs {
        structure: &ex.structure,
        delta_true: Some(&delta),
        prior: Some(&ex.bounds),
        data: Some((&data, DisturbanceSampler::Box(d_bar))),
        // data-consistent samples are kept only if the learnt class admits them
        gate: Some(&class),
        consistency: None,
    };
    let opts = VerifyOptions { samples: 100, ..VerifyOptions::default() };
    let report = verify_robust(&plant, &r.k, inputs, Metric::H2, r.gamma, &opts)?;
    print!("{}", report.to_text());
    Ok(())
}
