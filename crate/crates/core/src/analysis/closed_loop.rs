use crate::error::{Error, Result};
use crate::lft::LftPlant;
use crate::linalg::Mat;

/// `x₊ = A x + B d`, `e = C x + D d` for one fixed uncertainty.
#[derive(Clone, Debug)]
pub struct ClosedLoop {
    pub a: Mat,
    pub b: Mat,
    pub c: Mat,
    pub d: Mat,
}

impl ClosedLoop {
    pub fn from_matrices(a: Mat, b: Mat, c: Mat, d: Mat) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n || b.nrows() != n || c.ncols() != n || d.shape() != (c.nrows(), b.ncols()) {
            return Err(Error::dims("inconsistent closed-loop matrices"));
        }
        Ok(Self { a, b, c, d })
    }

    /// Closes `u = K x` and `w = Δ z` with `Δ` of size `n_w × n_z`.
    pub fn new(plant: &LftPlant, k: &Mat, delta: &Mat) -> Result<Self> {
        if delta.shape() != (plant.n_w(), plant.n_z()) {
            return Err(Error::dims(format!(
                "Δ is {}x{}, expected {}x{}",
                delta.nrows(),
                delta.ncols(),
                plant.n_w(),
                plant.n_z()
            )));
        }
        Self::with_transformed(plant, k, &(&plant.b_w * delta))
    }

    /// Same as [`ClosedLoop::new`] with `Δ̃ = B_w Δ` of size `n × n_z` given directly.
    pub fn with_transformed(plant: &LftPlant, k: &Mat, delta_tilde: &Mat) -> Result<Self> {
        let (n, m, nz) = (plant.n(), plant.m(), plant.n_z());
        if k.shape() != (m, n) {
            return Err(Error::dims(format!("K is {}x{}, expected {m}x{n}", k.nrows(), k.ncols())));
        }
        if delta_tilde.shape() != (n, nz) {
            return Err(Error::dims("Δ̃ must be n x n_z"));
        }
        let a = &plant.a + &plant.b * k + delta_tilde * (&plant.c_z + &plant.d_z * k);
        let c = &plant.c_e + &plant.d_eu * k;
        Self::from_matrices(a, plant.b_d.clone(), c, plant.d_ed.clone())
    }

    pub fn spectral_radius(&self) -> f64 {
        crate::linalg::spectral_radius(&self.a)
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }
}
