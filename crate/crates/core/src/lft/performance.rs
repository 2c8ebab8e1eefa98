use crate::error::{Error, Result};
use crate::linalg::{block_diag, eye, hstack, is_symmetric, max_eig, vstack, Mat};

/// Quadratic performance index `P_p = [Q_p, S_p; S_pᵀ, R_p]` on `(d, e)`,
/// together with the dual matrix used in synthesis.
#[derive(Clone, Debug)]
pub struct PerformanceIndex {
    pub q_p: Mat,
    pub s_p: Mat,
    pub r_p: Mat,
    pub q_tilde: Mat,
    pub s_tilde: Mat,
    pub r_tilde: Mat,
}

impl PerformanceIndex {
    pub fn new(q_p: Mat, s_p: Mat, r_p: Mat) -> Result<Self> {
        let (nd, ne) = (q_p.nrows(), r_p.nrows());
        if q_p.shape() != (nd, nd) || r_p.shape() != (ne, ne) || s_p.shape() != (nd, ne) {
            return Err(Error::dims("performance index blocks do not fit together"));
        }
        if !is_symmetric(&q_p, 1e-12) || !is_symmetric(&r_p, 1e-12) {
            return Err(Error::NotSymmetric("P_p".into()));
        }
        let p = vstack(&[&hstack(&[&q_p, &s_p]), &hstack(&[&s_p.transpose(), &r_p])]);
        let inv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidArgument("performance index is singular".into()))?;
        let q_tilde = inv.view((0, 0), (nd, nd)).into_owned();
        let s_tilde = inv.view((0, nd), (nd, ne)).into_owned();
        let r_tilde = inv.view((nd, nd), (ne, ne)).into_owned();
        if max_eig(&q_tilde) > 1e-10 * (1.0 + crate::linalg::max_abs(&q_tilde)) {
            return Err(Error::InvalidArgument("the (1,1) block of the inverse index must be negative semidefinite".into()));
        }
        Ok(Self {
            q_p,
            s_p,
            r_p,
            q_tilde,
            s_tilde,
            r_tilde,
        })
    }

    /// `Q_p = −γ² I`, `S_p = 0`, `R_p = I`.
    pub fn hinf(gamma: f64, n_d: usize, n_e: usize) -> Result<Self> {
        Self::new(eye(n_d) * -(gamma * gamma), Mat::zeros(n_d, n_e), eye(n_e))
    }

    /// `Q_p = 0`, `S_p = −I`, `R_p = 0`.
    pub fn passivity(n: usize) -> Result<Self> {
        Self::new(Mat::zeros(n, n), -eye(n), Mat::zeros(n, n))
    }

    pub fn n_d(&self) -> usize {
        self.q_p.nrows()
    }

    pub fn n_e(&self) -> usize {
        self.r_p.nrows()
    }

    /// `[−R̃_p, S̃_pᵀ; S̃_p, −Q̃_p]`, ordered `(e, d)`.
    pub fn dual(&self) -> Mat {
        vstack(&[
            &hstack(&[&(-&self.r_tilde), &self.s_tilde.transpose()]),
            &hstack(&[&self.s_tilde, &(-&self.q_tilde)]),
        ])
    }
}

/// Dual H∞ index `diag(−I_{n_e}, μ I_{n_d})` split into its constant part
/// and the coefficient of `μ = γ⁻²`.
pub fn hinf_dual_parts(n_d: usize, n_e: usize) -> (Mat, Mat) {
    (
        block_diag(&[&(-eye(n_e)), &Mat::zeros(n_d, n_d)]),
        block_diag(&[&Mat::zeros(n_e, n_e), &eye(n_d)]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hinf_dual_is_diagonal() {
        let p = PerformanceIndex::hinf(2.0, 1, 2).unwrap();
        let d = p.dual();
        let expect = block_diag(&[&(-eye(2)), &(eye(1) * 0.25)]);
        assert!((d - expect).norm() < 1e-14);
    }

    #[test]
    fn passivity_dual() {
        let d = PerformanceIndex::passivity(1).unwrap().dual();
        let expect = crate::linalg::from_rows(&[&[0.0, -1.0], &[-1.0, 0.0]]);
        assert!((d - expect).norm() < 1e-14);
    }

    #[test]
    fn singular_index_rejected() {
        assert!(PerformanceIndex::new(Mat::zeros(1, 1), Mat::zeros(1, 1), Mat::zeros(1, 1)).is_err());
    }
}
