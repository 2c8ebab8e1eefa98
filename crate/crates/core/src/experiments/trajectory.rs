use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::DisturbanceSampler;
use crate::error::{Error, Result};
use crate::lft::{LftPlant, Trajectory};
use crate::linalg::Mat;

/// Input sequence law for open-loop experiments.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum InputLaw {
    /// Every entry uniform in `[lo, hi]`.
    Uniform(f64, f64),
}

impl InputLaw {
    fn sample<R: Rng>(&self, m: usize, n: usize, rng: &mut R) -> Mat {
        match *self {
            InputLaw::Uniform(lo, hi) => Mat::from_fn(m, n, |_, _| if hi > lo { rng.gen_range(lo..=hi) } else { lo }),
        }
    }
}

/// Simulates `x₊ = A x + B u + B_w Δ (C_z x + D_z u) + B_d d` from `x0`
/// (zero by default). Inputs are drawn before disturbances, so runs with
/// equal seeds and different noise bounds share the input sequence.
pub fn generate_trajectory(
    plant: &LftPlant,
    delta_true: &Mat,
    input: InputLaw,
    disturbance: DisturbanceSampler,
    n: usize,
    x0: Option<&Mat>,
    seed: u64,
) -> Result<Trajectory> {
    if delta_true.shape() != (plant.n_w(), plant.n_z()) {
        return Err(Error::dims("Δ does not match the plant"));
    }
    let (a, b) = plant.close_uncertainty(delta_true);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = input.sample(plant.m(), n, &mut rng);
    let d = disturbance.sample(plant.n_d(), n, &mut rng);
    let mut x = Mat::zeros(plant.n(), n + 1);
    if let Some(x0) = x0 {
        if x0.shape() != (plant.n(), 1) {
            return Err(Error::dims("x0 must be n x 1"));
        }
        x.set_column(0, &x0.column(0));
    }
    for k in 0..n {
        let next = &a * x.column(k) + &b * u.column(k) + &plant.b_d * d.column(k);
        x.set_column(k + 1, &next);
    }
    let mut t = Trajectory::new(x, u)?;
    t.d = Some(d);
    t.seed = Some(seed);
    t.description = format!("simulated, N = {n}, seed {seed}, {disturbance:?}");
    Ok(t)
}
