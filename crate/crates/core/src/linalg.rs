//! Small dense helpers on top of `nalgebra` used throughout the crate.

use nalgebra::{DMatrix, SymmetricEigen};

pub type Mat = DMatrix<f64>;

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

/// Builds a matrix from row slices. Convenient for tests and fixed examples.
pub fn from_rows(rows: &[&[f64]]) -> Mat {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    Mat::from_fn(r, c, |i, j| rows[i][j])
}

pub fn col(values: &[f64]) -> Mat {
    Mat::from_column_slice(values.len(), 1, values)
}

pub fn row(values: &[f64]) -> Mat {
    Mat::from_row_slice(1, values.len(), values)
}

pub fn max_abs(m: &Mat) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn is_symmetric(m: &Mat, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    (0..m.nrows()).all(|i| (0..i).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol * scale))
}

pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &Mat) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_eig(m: &Mat) -> f64 {
    sym_eigenvalues(m).first().copied().unwrap_or(f64::INFINITY)
}

pub fn max_eig(m: &Mat) -> f64 {
    sym_eigenvalues(m).last().copied().unwrap_or(f64::NEG_INFINITY)
}

/// Eigenvector of the smallest eigenvalue of a symmetric matrix.
pub fn min_eigvec(m: &Mat) -> (f64, Mat) {
    let eig = SymmetricEigen::new(symmetrize(m));
    let (idx, val) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .expect("non-empty matrix");
    let v = eig.eigenvectors.column(idx);
    (val, Mat::from_column_slice(v.nrows(), 1, v.as_slice()))
}

/// Numerical rank with a tolerance relative to the largest singular value.
pub fn rank(m: &Mat, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0_f64, |a, &b| a.max(b));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

pub fn hstack(parts: &[&Mat]) -> Mat {
    let r = parts.first().map_or(0, |p| p.nrows());
    let c: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Mat::zeros(r, c);
    let mut off = 0;
    for p in parts {
        assert_eq!(p.nrows(), r, "hstack row mismatch");
        out.view_mut((0, off), (r, p.ncols())).copy_from(*p);
        off += p.ncols();
    }
    out
}

pub fn vstack(parts: &[&Mat]) -> Mat {
    let c = parts.first().map_or(0, |p| p.ncols());
    let r: usize = parts.iter().map(|p| p.nrows()).sum();
    let mut out = Mat::zeros(r, c);
    let mut off = 0;
    for p in parts {
        assert_eq!(p.ncols(), c, "vstack column mismatch");
        out.view_mut((off, 0), (p.nrows(), c)).copy_from(*p);
        off += p.nrows();
    }
    out
}

pub fn block_diag(parts: &[&Mat]) -> Mat {
    let r: usize = parts.iter().map(|p| p.nrows()).sum();
    let c: usize = parts.iter().map(|p| p.ncols()).sum();
    let mut out = Mat::zeros(r, c);
    let (mut ro, mut co) = (0, 0);
    for p in parts {
        out.view_mut((ro, co), (p.nrows(), p.ncols())).copy_from(*p);
        ro += p.nrows();
        co += p.ncols();
    }
    out
}

/// `count` consecutive columns of the `n`-identity starting at `start`.
pub fn identity_columns(n: usize, start: usize, count: usize) -> Mat {
    let mut out = Mat::zeros(n, count);
    for k in 0..count {
        out[(start + k, k)] = 1.0;
    }
    out
}

pub fn frobenius(m: &Mat) -> f64 {
    m.norm()
}

/// Spectral radius via the real Schur form.
pub fn spectral_radius(a: &Mat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    a.clone()
        .complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max)
}

/// Solves `X = A X Aᵀ + Q` by a direct solve on the vectorized equation.
pub fn discrete_lyapunov(a: &Mat, q: &Mat) -> Option<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Some(Mat::zeros(0, 0));
    }
    // vec(A X Aᵀ) = (A ⊗ A) vec(X)
    let lhs = Mat::identity(n * n, n * n) - a.kronecker(a);
    let rhs = nalgebra::DVector::from_column_slice(q.as_slice());
    let sol = lhs.lu().solve(&rhs)?;
    Some(symmetrize(&Mat::from_column_slice(n, n, sol.as_slice())))
}

/// Moore-Penrose pseudoinverse with a relative singular value cutoff.
pub fn pinv(m: &Mat) -> Mat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Mat::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let eps = 1e-12 * smax.max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(eps).expect("svd computed with u and v")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_detects_zero_column() {
        let m = from_rows(&[&[1.0, 0.0], &[0.0, 0.0]]);
        assert_eq!(rank(&m, 1e-9), 1);
        assert_eq!(rank(&eye(3), 1e-9), 3);
    }

    #[test]
    fn lyapunov_scalar() {
        let a = from_rows(&[&[0.5]]);
        let x = discrete_lyapunov(&a, &eye(1)).unwrap();
        assert!((x[(0, 0)] - 1.0 / 0.75).abs() < 1e-14);
    }

    #[test]
    fn radius_of_rotation_is_one() {
        let t: f64 = 0.3;
        let r = from_rows(&[&[t.cos(), -t.sin()], &[t.sin(), t.cos()]]);
        assert!((spectral_radius(&r) - 1.0).abs() < 1e-12);
    }
}
