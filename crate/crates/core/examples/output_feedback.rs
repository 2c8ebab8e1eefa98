//! Dynamic output feedback from input-output data of an ARX system, using
//! past inputs and outputs as the controller state.

use datarobust::linalg::{from_rows, vstack, Mat};
use datarobust::multiplier::disturbance_energy;
use datarobust::synthesis::{synthesize_output_feedback, Objective, OutputFeedbackConfig, SynthesisOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> datarobust::Result<()> {
    // y_k = 1.2 y_{k−1} + u_{k−1} + 0.3 u_k + d_k, open-loop unstable. Keep the
    // experiment short: the output grows like 1.2ᵏ and long records make the
    // data terms dwarf the rest of the inequality.
    let (t, d_bar) = (20, 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let u = Mat::from_fn(1, t, |_, _| rng.gen_range(-1.0..1.0));
    let mut y = Mat::zeros(1, t);
    for k in 0..t {
        let past = if k > 0 { 1.2 * y[(0, k - 1)] + u[(0, k - 1)] } else { 0.0 };
        y[(0, k)] = past + 0.3 * u[(0, k)] + rng.gen_range(-d_bar..d_bar);
    }

    let order = 1;
    let dim = 2 * order;
    let samples = t - order;
    let cfg = OutputFeedbackConfig {
        order,
        m: 1,
        p: 1,
        b_d0: from_rows(&[&[1.0]]),
        c_e: vstack(&[&Mat::identity(dim, dim), &Mat::zeros(1, dim)]),
        d_eu: vstack(&[&Mat::zeros(dim, 1), &from_rows(&[&[0.5]])]),
        // ‖D‖² ≤ N d̄² covers every sequence with |d_k| ≤ d̄
        disturbance: disturbance_energy(samples, 1, samples as f64 * d_bar * d_bar)?,
        prior: None,
        objective: Objective::H2,
    };
    let r = synthesize_output_feedback(&u, &y, &cfg, &SynthesisOptions::default())?;
    println!("gamma = {:.4}", r.synthesis.gamma.unwrap());
    println!("u_k = {:.4} u_(k-1) + {:.4} y_(k-1)", r.gains.k_u[0][(0, 0)], r.gains.k_y[0][(0, 0)]);
    Ok(())
}
