//! Certainty-equivalent design on a least-squares estimate, compared with
//! what it achieves on the true plant and across the prior bounds.

use datarobust::analysis::{h2_norm, ls_identify, verify_robust, ClosedLoop, Metric, VerifyInputs, VerifyOptions};
use datarobust::experiments::ExampleA;
use datarobust::lmi::SolverOptions;
use datarobust::multiplier::MultiplierClass;
use datarobust::synthesis::{synthesize_h2, SynthesisOptions};

fn main() -> datarobust::Result<()> {
    let ex = ExampleA::new();
    let traj = ex.trajectory(200, 0.1, 1)?;
    let data = ex.data(&traj)?;
    let est = ls_identify(&data, &ex.structure, &ex.plant.b_w, &ex.bounds, &SolverOptions::default())?;
    println!("estimate error ‖Δ̂ − Δ‖ = {:.4}", (&est.delta - &ex.delta_true).norm());

    // treat the estimate as exact
    let nominal = ex.plant.closed_at(&est.delta);
    let r = synthesize_h2(&nominal, &MultiplierClass::zero(ex.plant.n(), 0), &SynthesisOptions::default())?;
    let claimed = r.gamma.unwrap();
    let actual = h2_norm(&ClosedLoop::new(&ex.plant, &r.k, &ex.delta_true)?)?;
    println!("claimed H2 level {claimed:.4}, true closed loop {actual:.4}");

    let inputs = VerifyInputs {
        structure: &ex.structure,
        delta_true: Some(&ex.delta_true),
        prior: Some(&ex.bounds),
        data: None,
        gate: None,
        consistency: None,
    };
    let report = verify_robust(&ex.plant, &r.k, inputs, Metric::Stability, None, &VerifyOptions::default())?;
    println!("over prior samples: {} unstable of {}", report.stability_violations, report.retained);
    Ok(())
}
