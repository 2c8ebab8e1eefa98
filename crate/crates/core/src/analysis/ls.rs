use crate::error::{Error, Result};
use crate::lft::{BlockKind, DataMatrices, UncertaintyStructure};
use crate::linalg::{pinv, Mat};
use crate::lmi::{AffineMatrix, Problem, SolverOptions};
use crate::multiplier::PriorBound;

/// Basis of the structured uncertainties: one matrix per free parameter.
pub fn structure_basis(structure: &UncertaintyStructure) -> Vec<Mat> {
    let zero: Vec<Mat> = structure.blocks.iter().map(|b| Mat::zeros(b.nw, b.nz)).collect();
    let mut out = Vec::new();
    for (j, b) in structure.blocks.iter().enumerate() {
        let mut parts = zero.clone();
        match b.kind {
            BlockKind::RepeatedScalar => {
                parts[j] = Mat::identity(b.nw, b.nz);
                out.push(structure.assemble(&parts));
            }
            BlockKind::Full => {
                for c in 0..b.nz {
                    for r in 0..b.nw {
                        parts[j] = Mat::zeros(b.nw, b.nz);
                        parts[j][(r, c)] = 1.0;
                        out.push(structure.assemble(&parts));
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug)]
pub struct LsEstimate {
    /// Structured estimate of size `n_w × n_z`.
    pub delta: Mat,
    /// `‖M − B_w Δ Z‖_F` at the estimate.
    pub residual: f64,
}

/// Structured least squares `min ‖M − B_w Δ Z‖_F` subject to per-block bounds.
pub fn ls_identify(
    data: &DataMatrices,
    structure: &UncertaintyStructure,
    b_w: &Mat,
    bounds: &[PriorBound],
    opts: &SolverOptions,
) -> Result<LsEstimate> {
    if bounds.len() != structure.blocks.len() {
        return Err(Error::dims("one bound per block is required"));
    }
    if b_w.ncols() != structure.n_w() || data.z.nrows() != structure.n_z() || data.m.nrows() != b_w.nrows() {
        return Err(Error::dims("data, B_w and structure disagree"));
    }
    let basis = structure_basis(structure);
    let cols: Vec<Mat> = basis.iter().map(|e| b_w * e * &data.z).collect();
    let phi = Mat::from_fn(data.m.len(), cols.len(), |i, j| cols[j].as_slice()[i]);
    let target = Mat::from_column_slice(data.m.len(), 1, data.m.as_slice());

    let params = if bounds.iter().all(|b| *b == PriorBound::None) {
        pinv(&phi) * &target
    } else {
        constrained(&phi, &target, structure, &basis, bounds, opts)?
    };
    let mut delta = Mat::zeros(structure.n_w(), structure.n_z());
    for (e, v) in basis.iter().zip(params.iter()) {
        delta += e * *v;
    }
    let residual = (&data.m - b_w * &delta * &data.z).norm();
    Ok(LsEstimate { delta, residual })
}

fn constrained(
    phi: &Mat,
    target: &Mat,
    structure: &UncertaintyStructure,
    basis: &[Mat],
    bounds: &[PriorBound],
    opts: &SolverOptions,
) -> Result<Mat> {
    let np = basis.len();
    // ‖Φφ − m‖² = ‖Sφ − S⁺Φᵀm‖² + const with S = (ΦᵀΦ)^{1/2}
    let h = phi.transpose() * phi;
    let eig = nalgebra::SymmetricEigen::new(h);
    let sqrt_ev = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    let s = &eig.eigenvectors * Mat::from_diagonal(&sqrt_ev) * eig.eigenvectors.transpose();
    let c = pinv(&s) * phi.transpose() * target;

    let mut prob = Problem::new();
    let x = prob.matrix("phi", np, 1);
    let t = prob.scalar("t");
    let r = x.expr().lmul(&s) - AffineMatrix::constant(c);
    prob.psd(
        "residual epigraph",
        AffineMatrix::blocks(vec![vec![AffineMatrix::identity(np), r.clone()], vec![r.transpose(), t.expr()]]),
    );
    // the parameters of each block are contiguous in the basis order
    let mut offset = 0;
    for (j, (spec, bound)) in structure.blocks.iter().zip(bounds).enumerate() {
        let count = match spec.kind {
            BlockKind::RepeatedScalar => 1,
            BlockKind::Full => spec.nw * spec.nz,
        };
        let mut block = AffineMatrix::zeros(spec.nw, spec.nz);
        for k in 0..count {
            let local = structure.r(j).transpose() * &basis[offset + k] * structure.l(j);
            block = block + AffineMatrix::term(x.offset() + offset + k, local);
        }
        match *bound {
            PriorBound::None => {}
            PriorBound::RepeatedScalar(b) | PriorBound::Norm(b) if b < 0.0 => {
                return Err(Error::Infeasible(format!("block {j} has a negative bound")));
            }
            PriorBound::RepeatedScalar(b) | PriorBound::Norm(b) if b == 0.0 => {
                prob.equal(format!("block {j} = 0"), block);
            }
            PriorBound::RepeatedScalar(b) => {
                let d = block.view(0, 0, 1, 1);
                prob.psd(
                    format!("block {j} bound"),
                    AffineMatrix::blocks(vec![
                        vec![AffineMatrix::scalar_constant(1.0), d.clone()],
                        vec![d, AffineMatrix::scalar_constant(b)],
                    ]),
                );
            }
            PriorBound::Norm(b) => {
                prob.psd(
                    format!("block {j} bound"),
                    AffineMatrix::blocks(vec![
                        vec![AffineMatrix::constant(Mat::identity(spec.nw, spec.nw) * b), block.clone()],
                        vec![block.transpose(), AffineMatrix::identity(spec.nz)],
                    ]),
                );
            }
        }
        offset += count;
    }
    prob.minimize(t.expr());
    let sol = prob.solve(opts)?.into_result("constrained least squares")?;
    Ok(sol.value(&x))
}
