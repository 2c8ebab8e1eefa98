//! Build an uncertain plant in LFT form, check it and close the loop
//! around a known uncertainty.

use datarobust::lft::{validate_plant, BlockSpec, LftPlant, UncertaintyStructure, RANK_TOL};
use datarobust::linalg::{col, eye, from_rows, spectral_radius};

fn main() -> datarobust::Result<()> {
    // x₊ = (A + B_w Δ C_z) x + B u + d, with one uncertain scalar entering A[1][0]
    let a = from_rows(&[&[0.9, 0.2], &[0.0, 0.7]]);
    let b = col(&[0.0, 1.0]);
    let plant = LftPlant::nominal(a, b)
        .with_disturbance(eye(2))
        .with_performance(from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]), col(&[0.0, 0.5]))
        .with_uncertainty(col(&[0.0, 1.0]), from_rows(&[&[1.0, 0.0]]), col(&[0.0]));
    let structure = UncertaintyStructure::new(vec![BlockSpec::full(1, 1)]);
    let checked = validate_plant(plant.clone(), structure, RANK_TOL)?;
    println!("n = {}, m = {}, n_w = {}, n_z = {}", plant.n(), plant.m(), plant.n_w(), plant.n_z());
    println!("per-block input matrices: {}", checked.b_blocks.len());

    for delta in [-0.5, 0.0, 0.5] {
        let (a_cl, _) = plant.close_uncertainty(&from_rows(&[&[delta]]));
        println!("Δ = {delta:+.1}: spectral radius {:.4}", spectral_radius(&a_cl));
    }
    Ok(())
}
