//! Symmetric vectorization with the `√2` off-diagonal convention.
//!
//! Entries are taken from the upper triangle, column by column, so that
//! `⟨S₁, S₂⟩_F = svec(S₁)ᵀ svec(S₂)`.

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, Mat};

pub const SYMMETRY_TOL: f64 = 1e-12;

pub fn svec_len(s: usize) -> usize {
    s * (s + 1) / 2
}

/// Upper-triangle `(row, col)` pairs in svec order.
pub fn svec_indices(s: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..s).flat_map(|j| (0..=j).map(move |i| (i, j)))
}

pub fn svec(m: &Mat) -> Result<Vec<f64>> {
    if !is_symmetric(m, SYMMETRY_TOL) {
        return Err(Error::NotSymmetric("svec argument".into()));
    }
    Ok(svec_unchecked(m))
}

/// svec without the symmetry check; the upper triangle is used.
pub(crate) fn svec_unchecked(m: &Mat) -> Vec<f64> {
    let r2 = std::f64::consts::SQRT_2;
    svec_indices(m.nrows())
        .map(|(i, j)| if i == j { m[(i, j)] } else { r2 * m[(i, j)] })
        .collect()
}

pub fn smat(v: &[f64]) -> Result<Mat> {
    // invert s(s+1)/2 = len
    let s = ((((8 * v.len() + 1) as f64).sqrt() - 1.0) / 2.0).round() as usize;
    if svec_len(s) != v.len() {
        return Err(Error::dims(format!("{} is not a triangular number", v.len())));
    }
    let r2 = std::f64::consts::SQRT_2;
    let mut m = Mat::zeros(s, s);
    for ((i, j), &x) in svec_indices(s).zip(v) {
        if i == j {
            m[(i, j)] = x;
        } else {
            m[(i, j)] = x / r2;
            m[(j, i)] = x / r2;
        }
    }
    Ok(m)
}
