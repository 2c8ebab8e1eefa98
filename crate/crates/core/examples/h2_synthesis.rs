//! Guaranteed H2 designs for the academic example under the four knowledge
//! settings: prior bounds only, data only, both, and the exact model.

use datarobust::experiments::{ExampleA, NoiseModel, Scenario};
use datarobust::synthesis::{synthesize_h2, SynthesisOptions};

fn main() -> datarobust::Result<()> {
    let ex = ExampleA::new();
    let d_bar = 0.01;
    let traj = ex.trajectory(200, d_bar, 1)?;
    let opts = SynthesisOptions::default();
    for s in Scenario::ALL {
        let (plant, class, _) = ex.scenario(s, &traj, NoiseModel::Quadratic, d_bar)?;
        match synthesize_h2(&plant, &class, &opts) {
            Ok(r) => println!("scenario {}: gamma = {:.4}, K = {:.4}", s as u8, r.gamma.unwrap(), r.k),
            Err(e) => println!("scenario {}: {e}", s as u8),
        }
    }
    Ok(())
}
