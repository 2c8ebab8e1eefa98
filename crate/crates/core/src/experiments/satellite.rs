//! Flexible satellite with an instrument package, sampled at 20 Hz, with a
//! low-pass weight on the package angle and a static weight on the torque.

use crate::analysis::{ClosedLoop, DisturbanceSampler};
use crate::error::Result;
use crate::experiments::trajectory::{generate_trajectory, InputLaw};
use crate::lft::{assemble_data_matrices, discretize_zoh, LftMatrices, LftPlant, Trajectory};
use crate::linalg::{block_diag, from_rows, hstack, vstack, Mat};
use crate::multiplier::{disturbance_energy, learn_from_data, MultiplierClass};

pub const SAMPLING_TIME: f64 = 0.05;
const J1: f64 = 1.0;
const J2: f64 = 0.1;
const SPRING: f64 = 0.91;
const DAMPING: f64 = 0.0036;
/// `w̃₁(s) = FILTER_GAIN / (s + FILTER_POLE)`.
const FILTER_GAIN: f64 = 0.5;
const FILTER_POLE: f64 = 0.005;
pub const INPUT_WEIGHT: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct Satellite {
    /// Discretized plant with the filter state appended (5 states).
    pub plant: LftPlant,
    /// Discretized plant without the filter (4 states).
    pub bare: LftMatrices,
    /// `2 × 5` true uncertainty.
    pub delta_true: Mat,
    /// Discrete filter `x^f₊ = a x^f + b θ₂`.
    pub filter: (f64, f64),
}

impl Default for Satellite {
    fn default() -> Self {
        Self::new()
    }
}

impl Satellite {
    pub fn new() -> Self {
        let cont = continuous();
        let bare = discretize_zoh(&cont, SAMPLING_TIME).expect("positive sampling time");
        let a_f = (-FILTER_POLE * SAMPLING_TIME).exp();
        let b_f = FILTER_GAIN * (1.0 - a_f) / FILTER_POLE;
        let mut a = block_diag(&[&bare.a, &from_rows(&[&[a_f]])]);
        a[(4, 0)] = b_f;
        let pad = |m: &Mat| vstack(&[m, &Mat::zeros(1, m.ncols())]);
        let plant = LftPlant::nominal(a, pad(&bare.b))
            .with_disturbance(pad(&bare.b_d))
            .with_performance(
                from_rows(&[&[0.0, 0.0, 0.0, 0.0, 1.0], &[0.0; 5]]),
                from_rows(&[&[0.0], &[INPUT_WEIGHT]]),
            )
            .with_uncertainty(pad(&bare.b_w), hstack(&[&bare.c_z, &Mat::zeros(5, 1)]), bare.d_z.clone());
        Self {
            plant,
            bare,
            delta_true: true_delta(),
            filter: (a_f, b_f),
        }
    }

    /// `N` samples with `u` uniform in `[−1, 1]` and `‖d̃‖₂ ≤ d̄` over the sequence.
    pub fn trajectory(&self, n: usize, d_bar: f64, seed: u64) -> Result<Trajectory> {
        generate_trajectory(
            &self.plant,
            &self.delta_true,
            InputLaw::Uniform(-1.0, 1.0),
            DisturbanceSampler::Ball(d_bar),
            n,
            None,
            seed,
        )
    }

    /// Learnt class for `D Dᵀ ⪯ d̄² I`; no prior knowledge on `Δ`.
    pub fn learnt_class(&self, traj: &Trajectory, d_bar: f64) -> Result<MultiplierClass> {
        let data = assemble_data_matrices(&self.plant, traj)?;
        learn_from_data(&data, &self.plant.b_d, &disturbance_energy(data.len(), 1, d_bar * d_bar)?)
    }

    /// `d ↦ θ₂` of the bare plant without feedback.
    pub fn open_loop_to_angle(&self) -> ClosedLoop {
        let a = &self.bare.a + &self.bare.b_w * &self.delta_true * &self.bare.c_z;
        ClosedLoop::from_matrices(a, self.bare.b_d.clone(), from_rows(&[&[1.0, 0.0, 0.0, 0.0]]), Mat::zeros(1, 1))
            .expect("consistent dimensions")
    }

    /// `d ↦ θ₂` and `d ↦ u` under `u = K x` on the weighted plant.
    pub fn closed_loops(&self, k: &Mat) -> Result<(ClosedLoop, ClosedLoop)> {
        let cl = ClosedLoop::new(&self.plant, k, &self.delta_true)?;
        let angle = ClosedLoop::from_matrices(cl.a.clone(), cl.b.clone(), from_rows(&[&[1.0, 0.0, 0.0, 0.0, 0.0]]), Mat::zeros(1, 1))?;
        let input = ClosedLoop::from_matrices(cl.a.clone(), cl.b.clone(), k.clone(), Mat::zeros(1, 1))?;
        Ok((angle, input))
    }

    /// `|w₁(e^{iωh})|` of the discretized filter.
    pub fn filter_gain(&self, omega: f64) -> f64 {
        let (a_f, b_f) = self.filter;
        let z = nalgebra::Complex::new((omega * SAMPLING_TIME).cos(), (omega * SAMPLING_TIME).sin());
        b_f / (z - a_f).norm()
    }
}

/// Continuous LFT: double integrators for both bodies, coupling via `Δ`.
fn continuous() -> LftMatrices {
    let a = from_rows(&[&[0.0, 1.0, 0.0, 0.0], &[0.0; 4], &[0.0, 0.0, 0.0, 1.0], &[0.0; 4]]);
    LftMatrices {
        a,
        b: Mat::zeros(4, 1),
        b_w: from_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0]]),
        b_d: from_rows(&[&[0.0], &[1.0], &[0.0], &[0.0]]),
        c_z: vstack(&[&Mat::identity(4, 4), &Mat::zeros(1, 4)]),
        d_z: from_rows(&[&[0.0], &[0.0], &[0.0], &[0.0], &[1.0]]),
    }
}

fn true_delta() -> Mat {
    let (k, b) = (SPRING, DAMPING);
    from_rows(&[
        &[-k / J2, -b / J2, k / J2, b / J2, 0.0],
        &[k / J1, b / J1, -k / J1, -b / J1, 1.0 / J1],
    ])
}
