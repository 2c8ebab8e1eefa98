//! Affine matrix-valued expressions in the scalar decision coordinates.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use crate::linalg::{is_symmetric, Mat};

/// `F(y) = F₀ + Σᵢ yᵢ Fᵢ` over the flattened decision vector `y`.
///
/// Expressions need not be square or symmetric; only the ones handed to a
/// semidefinite constraint must be.
#[derive(Clone, Debug)]
pub struct AffineMatrix {
    rows: usize,
    cols: usize,
    constant: Mat,
    terms: BTreeMap<usize, Mat>,
}

impl AffineMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            constant: Mat::zeros(rows, cols),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(m: Mat) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            constant: m,
            terms: BTreeMap::new(),
        }
    }

    pub fn scalar_constant(v: f64) -> Self {
        Self::constant(Mat::from_element(1, 1, v))
    }

    pub fn identity(n: usize) -> Self {
        Self::constant(Mat::identity(n, n))
    }

    /// A single coordinate `y_index` multiplying `coefficient`.
    pub fn term(index: usize, coefficient: Mat) -> Self {
        let mut e = Self::zeros(coefficient.nrows(), coefficient.ncols());
        e.add_term(index, &coefficient);
        e
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn constant_part(&self) -> &Mat {
        &self.constant
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, &Mat)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.terms.keys().next_back().copied()
    }

    pub(crate) fn add_term(&mut self, index: usize, coefficient: &Mat) {
        assert_eq!(coefficient.shape(), (self.rows, self.cols), "term shape mismatch");
        match self.terms.get_mut(&index) {
            Some(c) => *c += coefficient,
            None => {
                self.terms.insert(index, coefficient.clone());
            }
        }
    }

    pub fn add_constant(&mut self, m: &Mat) {
        assert_eq!(m.shape(), (self.rows, self.cols), "constant shape mismatch");
        self.constant += m;
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|m| m * s)
    }

    fn map(&self, f: impl Fn(&Mat) -> Mat) -> Self {
        let constant = f(&self.constant);
        let (rows, cols) = constant.shape();
        Self {
            rows,
            cols,
            constant,
            terms: self.terms.iter().map(|(k, v)| (*k, f(v))).collect(),
        }
    }

    /// `L · F(y)`.
    pub fn lmul(&self, l: &Mat) -> Self {
        assert_eq!(l.ncols(), self.rows, "lmul dimension mismatch");
        self.map(|m| l * m)
    }

    /// `F(y) · R`.
    pub fn rmul(&self, r: &Mat) -> Self {
        assert_eq!(r.nrows(), self.cols, "rmul dimension mismatch");
        self.map(|m| m * r)
    }

    /// `Tᵀ F(y) T`.
    pub fn congruence(&self, t: &Mat) -> Self {
        let tt = t.transpose();
        self.map(|m| &tt * m * t)
    }

    pub fn transpose(&self) -> Self {
        self.map(|m| m.transpose())
    }

    /// `(F + Fᵀ)/2`.
    pub fn sym(&self) -> Self {
        self.map(|m| (m + m.transpose()) * 0.5)
    }

    pub fn trace(&self) -> Self {
        assert_eq!(self.rows, self.cols, "trace of a non-square expression");
        self.map(|m| Mat::from_element(1, 1, m.trace()))
    }

    /// Sub-block `[r0..r0+nr, c0..c0+nc]`.
    pub fn view(&self, r0: usize, c0: usize, nr: usize, nc: usize) -> Self {
        self.map(|m| m.view((r0, c0), (nr, nc)).into_owned())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && is_symmetric(&self.constant, tol)
            && self.terms.values().all(|m| is_symmetric(m, tol))
    }

    pub fn eval(&self, y: &[f64]) -> Mat {
        let mut out = self.constant.clone();
        for (k, m) in &self.terms {
            let v = y[*k];
            if v != 0.0 {
                out += m * v;
            }
        }
        out
    }

    /// Assembles a block matrix. All blocks in one block row share a row
    /// count and all blocks in one block column share a column count.
    pub fn blocks(grid: Vec<Vec<AffineMatrix>>) -> Self {
        let heights: Vec<usize> = grid.iter().map(|r| r[0].rows).collect();
        let widths: Vec<usize> = grid[0].iter().map(|b| b.cols).collect();
        let rows: usize = heights.iter().sum();
        let cols: usize = widths.iter().sum();
        let mut out = Self::zeros(rows, cols);
        let mut ro = 0;
        for (bi, brow) in grid.iter().enumerate() {
            assert_eq!(brow.len(), widths.len(), "ragged block grid");
            let mut co = 0;
            for (bj, b) in brow.iter().enumerate() {
                assert_eq!(b.shape(), (heights[bi], widths[bj]), "block ({bi},{bj}) has wrong shape");
                out.place(b, ro, co);
                co += widths[bj];
            }
            ro += heights[bi];
        }
        out
    }

    fn place(&mut self, b: &AffineMatrix, ro: usize, co: usize) {
        let (nr, nc) = b.shape();
        if nr == 0 || nc == 0 {
            return;
        }
        self.constant.view_mut((ro, co), (nr, nc)).copy_from(&b.constant);
        for (k, m) in &b.terms {
            let (rows, cols) = (self.rows, self.cols);
            let entry = self.terms.entry(*k).or_insert_with(|| Mat::zeros(rows, cols));
            entry.view_mut((ro, co), (nr, nc)).copy_from(m);
        }
    }

    pub fn hstack(parts: Vec<AffineMatrix>) -> Self {
        Self::blocks(vec![parts])
    }

    pub fn vstack(parts: Vec<AffineMatrix>) -> Self {
        Self::blocks(parts.into_iter().map(|p| vec![p]).collect())
    }

    pub fn block_diag(parts: Vec<AffineMatrix>) -> Self {
        let n = parts.len();
        let heights: Vec<usize> = parts.iter().map(|p| p.rows).collect();
        let widths: Vec<usize> = parts.iter().map(|p| p.cols).collect();
        let mut grid = Vec::with_capacity(n);
        for (i, p) in parts.into_iter().enumerate() {
            let mut row = Vec::with_capacity(n);
            for (j, &w) in widths.iter().enumerate() {
                if i == j {
                    row.push(p.clone());
                } else {
                    row.push(Self::zeros(heights[i], w));
                }
            }
            grid.push(row);
        }
        Self::blocks(grid)
    }

    /// Coefficients of a 1×1 expression as `(constant, [(index, coefficient)])`.
    pub fn scalar_coefficients(&self) -> (f64, Vec<(usize, f64)>) {
        assert_eq!(self.shape(), (1, 1), "not a scalar expression");
        (
            self.constant[(0, 0)],
            self.terms.iter().map(|(k, m)| (*k, m[(0, 0)])).collect(),
        )
    }

    /// Largest absolute entry among the constant and all coefficients.
    pub fn magnitude(&self) -> (f64, f64) {
        let c = crate::linalg::max_abs(&self.constant);
        let t = self.terms.values().map(crate::linalg::max_abs).fold(0.0, f64::max);
        (c, t)
    }
}

impl From<Mat> for AffineMatrix {
    fn from(m: Mat) -> Self {
        AffineMatrix::constant(m)
    }
}

impl Add<&AffineMatrix> for &AffineMatrix {
    type Output = AffineMatrix;
    fn add(self, rhs: &AffineMatrix) -> AffineMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for AffineMatrix {
    type Output = AffineMatrix;
    fn add(mut self, rhs: AffineMatrix) -> AffineMatrix {
        self += &rhs;
        self
    }
}

impl Add<&AffineMatrix> for AffineMatrix {
    type Output = AffineMatrix;
    fn add(mut self, rhs: &AffineMatrix) -> AffineMatrix {
        self += rhs;
        self
    }
}

impl std::ops::AddAssign<&AffineMatrix> for AffineMatrix {
    fn add_assign(&mut self, rhs: &AffineMatrix) {
        assert_eq!(self.shape(), rhs.shape(), "adding expressions of different shapes");
        self.constant += &rhs.constant;
        for (k, m) in &rhs.terms {
            self.add_term(*k, m);
        }
    }
}

impl Sub<&AffineMatrix> for &AffineMatrix {
    type Output = AffineMatrix;
    fn sub(self, rhs: &AffineMatrix) -> AffineMatrix {
        self + &rhs.scale(-1.0)
    }
}

impl Sub for AffineMatrix {
    type Output = AffineMatrix;
    fn sub(self, rhs: AffineMatrix) -> AffineMatrix {
        self + rhs.scale(-1.0)
    }
}

impl Neg for AffineMatrix {
    type Output = AffineMatrix;
    fn neg(self) -> AffineMatrix {
        self.scale(-1.0)
    }
}

impl Mul<&AffineMatrix> for &Mat {
    type Output = AffineMatrix;
    fn mul(self, rhs: &AffineMatrix) -> AffineMatrix {
        rhs.lmul(self)
    }
}

impl Mul<&Mat> for &AffineMatrix {
    type Output = AffineMatrix;
    fn mul(self, rhs: &Mat) -> AffineMatrix {
        self.rmul(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_rows;

    #[test]
    fn blocks_and_eval() {
        let x = AffineMatrix::term(0, Mat::identity(1, 1));
        let c = AffineMatrix::constant(from_rows(&[&[2.0]]));
        let e = AffineMatrix::blocks(vec![vec![x.clone(), c.clone()], vec![c, x]]);
        let v = e.eval(&[3.0]);
        assert_eq!(v, from_rows(&[&[3.0, 2.0], &[2.0, 3.0]]));
        assert!(e.is_symmetric(1e-12));
    }

    #[test]
    fn congruence_matches_dense() {
        let t = from_rows(&[&[1.0, 2.0], &[0.0, 1.0], &[3.0, -1.0]]);
        let coef = from_rows(&[&[1.0, 0.5, 0.0], &[0.5, 2.0, 1.0], &[0.0, 1.0, -1.0]]);
        let e = AffineMatrix::term(2, coef.clone()).congruence(&t);
        let y = [0.0, 0.0, 1.5];
        let expect = t.transpose() * coef * t * 1.5;
        assert!((e.eval(&y) - expect).norm() < 1e-12);
    }
}
