use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity_columns, max_abs, Mat};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Full,
    RepeatedScalar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockSpec {
    pub kind: BlockKind,
    pub nw: usize,
    pub nz: usize,
}

impl BlockSpec {
    pub fn full(nw: usize, nz: usize) -> Self {
        Self {
            kind: BlockKind::Full,
            nw,
            nz,
        }
    }

    pub fn repeated(n: usize) -> Self {
        Self {
            kind: BlockKind::RepeatedScalar,
            nw: n,
            nz: n,
        }
    }
}

/// `Δ = Σ_j R_j Δ_j L_jᵀ` with selector matrices taken as block columns of
/// the identity.
#[derive(Clone, Debug)]
pub struct UncertaintyStructure {
    pub blocks: Vec<BlockSpec>,
    l: Vec<Mat>,
    r: Vec<Mat>,
}

impl UncertaintyStructure {
    /// Blocks placed consecutively along the diagonal.
    pub fn new(blocks: Vec<BlockSpec>) -> Self {
        let nw: usize = blocks.iter().map(|b| b.nw).sum();
        let nz: usize = blocks.iter().map(|b| b.nz).sum();
        let (mut ow, mut oz) = (0, 0);
        let mut l = Vec::new();
        let mut r = Vec::new();
        for b in &blocks {
            l.push(identity_columns(nz, oz, b.nz));
            r.push(identity_columns(nw, ow, b.nw));
            ow += b.nw;
            oz += b.nz;
        }
        Self { blocks, l, r }
    }

    /// A single full block of the given size.
    pub fn single_full(nw: usize, nz: usize) -> Self {
        Self::new(vec![BlockSpec::full(nw, nz)])
    }

    /// Explicit selectors; checked by [`UncertaintyStructure::check`].
    pub fn with_selectors(blocks: Vec<BlockSpec>, l: Vec<Mat>, r: Vec<Mat>) -> Self {
        Self { blocks, l, r }
    }

    pub fn n_w(&self) -> usize {
        self.blocks.iter().map(|b| b.nw).sum()
    }

    pub fn n_z(&self) -> usize {
        self.blocks.iter().map(|b| b.nz).sum()
    }

    pub fn l(&self, j: usize) -> &Mat {
        &self.l[j]
    }

    pub fn r(&self, j: usize) -> &Mat {
        &self.r[j]
    }

    /// Assembles `Δ` from its blocks.
    pub fn assemble(&self, parts: &[Mat]) -> Mat {
        let mut d = Mat::zeros(self.n_w(), self.n_z());
        for (j, p) in parts.iter().enumerate() {
            d += &self.r[j] * p * self.l[j].transpose();
        }
        d
    }

    /// Extracts the blocks `R_jᵀ Δ L_j`.
    pub fn split(&self, delta: &Mat) -> Vec<Mat> {
        (0..self.blocks.len())
            .map(|j| self.r[j].transpose() * delta * &self.l[j])
            .collect()
    }

    pub fn check(&self) -> Result<()> {
        let k = self.blocks.len();
        if self.l.len() != k || self.r.len() != k {
            return Err(Error::dims("one selector pair per block is required"));
        }
        let (nw, nz) = (self.n_w(), self.n_z());
        for (j, b) in self.blocks.iter().enumerate() {
            if b.kind == BlockKind::RepeatedScalar && b.nw != b.nz {
                return Err(Error::dims(format!("repeated block {} is not square", j + 1)));
            }
            if self.l[j].shape() != (nz, b.nz) || self.r[j].shape() != (nw, b.nw) {
                return Err(Error::dims(format!("selectors of block {} have wrong shape", j + 1)));
            }
        }
        let tol = 1e-12;
        for j in 0..k {
            for i in 0..k {
                let ll = self.l[i].transpose() * &self.l[j];
                let rr = self.r[i].transpose() * &self.r[j];
                let (le, re) = if i == j {
                    (ll - Mat::identity(self.blocks[j].nz, self.blocks[j].nz), rr - Mat::identity(self.blocks[j].nw, self.blocks[j].nw))
                } else {
                    (ll, rr)
                };
                if max_abs(&le) > tol || max_abs(&re) > tol {
                    return Err(Error::dims(format!("selectors of blocks {} and {} are not orthonormal", i + 1, j + 1)));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assemble_split_roundtrip() {
        let s = UncertaintyStructure::new(vec![BlockSpec::repeated(2), BlockSpec::full(2, 2)]);
        let d1 = Mat::identity(2, 2) * 0.2;
        let d2 = crate::linalg::from_rows(&[&[0.5, -0.2], &[-0.1, 0.3]]);
        let d = s.assemble(&[d1.clone(), d2.clone()]);
        assert_eq!(d[(0, 0)], 0.2);
        assert_eq!(d[(3, 2)], -0.1);
        let parts = s.split(&d);
        assert_eq!(parts[0], d1);
        assert_eq!(parts[1], d2);
    }

    #[test]
    fn overlapping_selectors_rejected() {
        let sel = identity_columns(2, 0, 1);
        let s = UncertaintyStructure::with_selectors(
            vec![BlockSpec::full(1, 1), BlockSpec::full(1, 1)],
            vec![sel.clone(), sel.clone()],
            vec![identity_columns(2, 0, 1), identity_columns(2, 1, 1)],
        );
        assert!(matches!(s.check(), Err(Error::DimensionMismatch(_))));
    }
}
