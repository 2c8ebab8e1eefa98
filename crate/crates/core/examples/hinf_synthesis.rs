//! Robust H∞ design with a sector-bounded nonlinearity next to the learnt
//! uncertainty, and the achieved closed-loop peak gain.

use datarobust::analysis::{hinf_estimate, ClosedLoop};
use datarobust::lft::{LftPlant, NonlinearChannel, UncertaintyStructure};
use datarobust::linalg::{col, from_rows, Mat};
use datarobust::multiplier::{norm_bound, transform_prior};
use datarobust::synthesis::{synthesize_hinf, SynthesisOptions};

fn main() -> datarobust::Result<()> {
    // x₊ = (0.9 + δ) x + u + d + w′, w′ = δ′ x with |δ| ≤ 0.2 and |δ′| ≤ 0.3
    let mut plant = LftPlant::nominal(from_rows(&[&[0.9]]), from_rows(&[&[1.0]]))
        .with_disturbance(from_rows(&[&[1.0]]))
        .with_performance(col(&[1.0, 0.0]), col(&[0.0, 0.2]))
        .with_uncertainty(from_rows(&[&[1.0]]), from_rows(&[&[1.0]]), from_rows(&[&[0.0]]));
    plant.nonlinear = Some(NonlinearChannel {
        b_w: from_rows(&[&[1.0]]),
        d_zw: Mat::zeros(1, 1),
        c_z: from_rows(&[&[1.0]]),
        d_z: from_rows(&[&[0.0]]),
    });
    let structure = UncertaintyStructure::single_full(1, 1);
    let class = transform_prior(&structure, &plant.b_w, &[norm_bound(1, 1, 0.04)?])?;
    let nonlinear = norm_bound(1, 1, 0.09)?;

    let r = synthesize_hinf(&plant, &class, Some(&nonlinear), &SynthesisOptions::default())?;
    let gamma = r.gamma.unwrap();
    println!("gamma = {gamma:.4}, K = {:.4}", r.k[(0, 0)]);

    // corners of both uncertainties, closed by hand
    for delta in [-0.2, 0.2] {
        for nl in [-0.3, 0.3] {
            let a = &plant.a + &plant.b * &r.k + from_rows(&[&[delta + nl]]);
            let c = &plant.c_e + &plant.d_eu * &r.k;
            let cl = ClosedLoop::from_matrices(a, plant.b_d.clone(), c, plant.d_ed.clone())?;
            println!("δ = {delta:+.1}, δ′ = {nl:+.1}: peak gain {:.4}", hinf_estimate(&cl).0);
        }
    }
    Ok(())
}
