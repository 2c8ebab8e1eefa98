//! The three-state academic plant with a repeated scalar and a full 2×2 block.

use super::trajectory::{generate_trajectory, InputLaw};
use crate::analysis::DisturbanceSampler;
use crate::error::Result;
use crate::lft::{assemble_data_matrices, BlockSpec, DataMatrices, LftPlant, Trajectory, UncertaintyStructure};
use crate::linalg::{from_rows, hstack, vstack, Mat};
use crate::multiplier::{
    combine, disturbance_convex_hull, disturbance_diagonal, disturbance_energy, hypercube_vertices, learn_from_data,
    prior_from_bounds, MultiplierClass, PriorBound,
};

/// Which knowledge enters the design.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub enum Scenario {
    /// Structure and bounds, no data.
    Prior = 1,
    /// Data only; every matrix is unknown.
    Data = 2,
    /// Structure, bounds and data.
    Combined = 3,
    /// The true plant.
    Exact = 4,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Prior, Scenario::Data, Scenario::Combined, Scenario::Exact];

    pub fn uses_data(self) -> bool {
        matches!(self, Scenario::Data | Scenario::Combined)
    }
}

/// Disturbance descriptions for `‖d_k‖_∞ ≤ d̄`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// `D Dᵀ ⪯ d̄² n_d N I`.
    Quadratic,
    /// `‖d_k‖₂ ≤ √n_d d̄` per sample.
    Diagonal,
    /// Convex hull of the hypercube vertices.
    ConvexHull,
}

impl NoiseModel {
    pub fn class(self, d_bar: f64, n: usize, n_d: usize) -> Result<MultiplierClass> {
        match self {
            NoiseModel::Quadratic => disturbance_energy(n, n_d, d_bar * d_bar * (n_d * n) as f64),
            NoiseModel::Diagonal => disturbance_diagonal((n_d as f64).sqrt() * d_bar, n, n_d),
            NoiseModel::ConvexHull => disturbance_convex_hull(&hypercube_vertices(n_d, n, d_bar)?),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExampleA {
    /// Known matrices with the structured channel `z = (u, x₁, x₂, x₃)`.
    pub plant: LftPlant,
    pub structure: UncertaintyStructure,
    /// `diag(δ₁ I₂, Δ₂)` at the true values.
    pub delta_true: Mat,
    pub bounds: [PriorBound; 2],
}

impl Default for ExampleA {
    fn default() -> Self {
        Self::new()
    }
}

impl ExampleA {
    pub fn new() -> Self {
        let a = from_rows(&[&[0.0, 0.5, -0.3], &[0.0, 0.0, 0.0], &[0.1, 0.0, 0.0]]);
        let b = from_rows(&[&[0.0], &[1.0], &[0.5]]);
        let b_w = from_rows(&[&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
        let c_z = from_rows(&[&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        let d_z = from_rows(&[&[1.0], &[0.0], &[0.0], &[0.0]]);
        let plant = LftPlant::nominal(a, b)
            .with_disturbance(Mat::identity(3, 3))
            .with_performance(vstack(&[&Mat::identity(3, 3), &Mat::zeros(1, 3)]), from_rows(&[&[0.0], &[0.0], &[0.0], &[0.2]]))
            .with_uncertainty(b_w, c_z, d_z);
        let structure = UncertaintyStructure::new(vec![BlockSpec::repeated(2), BlockSpec::full(2, 2)]);
        let delta_true = structure.assemble(&[Mat::identity(2, 2) * 0.2, from_rows(&[&[0.5, -0.2], &[-0.1, 0.3]])]);
        Self {
            plant,
            structure,
            delta_true,
            bounds: [PriorBound::RepeatedScalar(0.1), PriorBound::Norm(0.5)],
        }
    }

    /// The true system matrices `(A, B)`.
    pub fn true_system(&self) -> (Mat, Mat) {
        self.plant.close_uncertainty(&self.delta_true)
    }

    /// The true plant with the uncertainty channel removed.
    pub fn exact_plant(&self) -> LftPlant {
        self.plant.closed_at(&self.delta_true)
    }

    /// Everything unknown: `A = B = 0`, `B_w = I`, `z = (x, u)`, full block `[A B]`.
    pub fn unknown_plant(&self) -> (LftPlant, Mat) {
        let (n, m) = (self.plant.n(), self.plant.m());
        let plant = LftPlant::nominal(Mat::zeros(n, n), Mat::zeros(n, m))
            .with_disturbance(self.plant.b_d.clone())
            .with_performance(self.plant.c_e.clone(), self.plant.d_eu.clone())
            .with_uncertainty(
                Mat::identity(n, n),
                vstack(&[&Mat::identity(n, n), &Mat::zeros(m, n)]),
                vstack(&[&Mat::zeros(n, m), &Mat::identity(m, m)]),
            );
        let (a, b) = self.true_system();
        (plant, hstack(&[&a, &b]))
    }

    pub fn prior_class(&self) -> Result<MultiplierClass> {
        prior_from_bounds(&self.structure, &self.plant.b_w, &self.bounds)
    }

    /// Plant, multiplier class and the matching true `Δ` for one scenario.
    pub fn scenario(
        &self,
        scenario: Scenario,
        traj: &Trajectory,
        noise: NoiseModel,
        d_bar: f64,
    ) -> Result<(LftPlant, MultiplierClass, Mat)> {
        let n_d = self.plant.n_d();
        match scenario {
            Scenario::Prior => Ok((self.plant.clone(), self.prior_class()?, self.delta_true.clone())),
            Scenario::Exact => {
                let p = self.exact_plant();
                let c = MultiplierClass::zero(p.n(), 0);
                Ok((p, c, Mat::zeros(0, 0)))
            }
            Scenario::Data => {
                let (p, d) = self.unknown_plant();
                let data = assemble_data_matrices(&p, traj)?;
                let learnt = learn_from_data(&data, &p.b_d, &noise.class(d_bar, data.len(), n_d)?)?;
                Ok((p, learnt, d))
            }
            Scenario::Combined => {
                let data = self.data(traj)?;
                let learnt = learn_from_data(&data, &self.plant.b_d, &noise.class(d_bar, data.len(), n_d)?)?;
                let c = combine(&self.prior_class()?, &learnt, &self.plant.b_w, &[])?;
                Ok((self.plant.clone(), c, self.delta_true.clone()))
            }
        }
    }

    /// `N` samples with `u_k ∈ [-1, 1]` and `‖d_k‖_∞ ≤ d̄`, uniformly drawn.
    pub fn trajectory(&self, n: usize, d_bar: f64, seed: u64) -> Result<Trajectory> {
        generate_trajectory(
            &self.plant,
            &self.delta_true,
            InputLaw::Uniform(-1.0, 1.0),
            DisturbanceSampler::Box(d_bar),
            n,
            None,
            seed,
        )
    }

    pub fn data(&self, traj: &Trajectory) -> Result<DataMatrices> {
        assemble_data_matrices(&self.plant, traj)
    }
}
