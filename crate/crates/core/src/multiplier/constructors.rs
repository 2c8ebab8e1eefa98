use crate::error::{Error, Result};
use crate::lft::{DataMatrices, UncertaintyStructure};
use crate::linalg::{block_diag, eye, hstack, is_symmetric, vstack, Mat};
use crate::lmi::svec::{svec_indices, svec_len};
use crate::multiplier::class::{sum_classes, Component, ComponentKind, MultiplierClass, ParamLmi};

fn require_symmetric(m: &Mat, what: &str) -> Result<()> {
    if is_symmetric(m, 1e-12) {
        Ok(())
    } else {
        Err(Error::NotSymmetric(what.into()))
    }
}

/// Basis `E_ii` / `E_ij + E_ji` of symmetric `s × s` matrices in svec order.
fn symmetric_basis(s: usize) -> Vec<Mat> {
    svec_indices(s)
        .map(|(i, j)| {
            let mut e = Mat::zeros(s, s);
            e[(i, j)] = 1.0;
            e[(j, i)] = 1.0;
            e
        })
        .collect()
}

/// `{λ H : λ ≥ 0}` for a block with `nz` columns.
pub fn prior_full_block(h: &Mat, nz: usize) -> Result<MultiplierClass> {
    require_symmetric(h, "H")?;
    if nz > h.nrows() {
        return Err(Error::dims("upper-left block larger than H"));
    }
    MultiplierClass::from_generators("full block", nz, vec![h.clone()])
}

/// Norm bound `Δ Δᵀ ⪯ δ̄ I` on an `nw × nz` block.
pub fn norm_bound(nw: usize, nz: usize, bound: f64) -> Result<MultiplierClass> {
    prior_full_block(&block_diag(&[&(-eye(nz)), &(eye(nw) * bound)]), nz)
}

/// `{h ⊗ Λ : Λ ⪰ 0}` for a repeated scalar block of size `n`.
pub fn prior_repeated_scalar(h: &Mat, n: usize) -> Result<MultiplierClass> {
    if h.shape() != (2, 2) {
        return Err(Error::dims("h must be 2x2"));
    }
    require_symmetric(h, "h")?;
    if n == 0 {
        return Err(Error::InvalidArgument("block size must be positive".into()));
    }
    let basis = symmetric_basis(n);
    let generators = basis.iter().map(|e| h.kronecker(e)).collect();
    Ok(MultiplierClass {
        dim: 2 * n,
        split: n,
        generators,
        constraints: vec![ParamLmi {
            size: n,
            terms: basis.into_iter().enumerate().collect(),
        }],
        equalities: Vec::new(),
        components: vec![Component {
            label: "repeated scalar".into(),
            coords: 0..svec_len(n),
            kind: ComponentKind::Psd(n),
        }],
    })
}

/// `{τ [Q_d, S_d; S_dᵀ, R_d] : τ ≥ 0}`.
pub fn disturbance_quadratic(q_d: &Mat, s_d: &Mat, r_d: &Mat) -> Result<MultiplierClass> {
    let (n, nd) = (q_d.nrows(), r_d.nrows());
    if q_d.ncols() != n || r_d.ncols() != nd || s_d.shape() != (n, nd) {
        return Err(Error::dims("Q_d, S_d and R_d do not fit together"));
    }
    require_symmetric(q_d, "Q_d")?;
    require_symmetric(r_d, "R_d")?;
    let g = vstack(&[&hstack(&[q_d, s_d]), &hstack(&[&s_d.transpose(), r_d])]);
    MultiplierClass::from_generators("quadratic", n, vec![g])
}

/// Energy-type bound `D Dᵀ ⪯ r I` on an `n_d × N` disturbance.
pub fn disturbance_energy(n: usize, n_d: usize, r: f64) -> Result<MultiplierClass> {
    disturbance_quadratic(&(-eye(n)), &Mat::zeros(n, n_d), &(eye(n_d) * r))
}

/// One weight `p_i ≥ 0` per sample for `‖d_k‖₂ ≤ d̄₂`.
pub fn disturbance_diagonal(d2: f64, n: usize, n_d: usize) -> Result<MultiplierClass> {
    if d2 < 0.0 || n == 0 {
        return Err(Error::InvalidArgument("need d2 >= 0 and at least one sample".into()));
    }
    let generators = (0..n)
        .map(|i| {
            let mut g = Mat::zeros(n + n_d, n + n_d);
            g[(i, i)] = -1.0;
            for j in 0..n_d {
                g[(n + j, n + j)] = d2 * d2;
            }
            g
        })
        .collect();
    let mut c = MultiplierClass::from_generators("diagonal", n, generators)?;
    c.dim = n + n_d;
    Ok(c)
}

/// Free symmetric `P_d` with `[I;0]ᵀP_d[I;0] ⪯ 0` and a vertex condition
/// per given matrix `D̄_i`.
pub fn disturbance_convex_hull(vertices: &[Mat]) -> Result<MultiplierClass> {
    let first = vertices
        .first()
        .ok_or_else(|| Error::InvalidArgument("convex hull needs at least one vertex".into()))?;
    let (nd, n) = first.shape();
    if vertices.iter().any(|v| v.shape() != (nd, n)) {
        return Err(Error::dims("vertices differ in shape"));
    }
    let dim = n + nd;
    let basis = symmetric_basis(dim);
    let mut constraints = Vec::with_capacity(vertices.len() + 1);
    // −[I 0] P [I 0]ᵀ ⪰ 0
    constraints.push(ParamLmi {
        size: n,
        terms: basis
            .iter()
            .enumerate()
            .map(|(k, e)| (k, -e.view((0, 0), (n, n)).into_owned()))
            .filter(|(_, f)| f.iter().any(|v| *v != 0.0))
            .collect(),
    });
    for v in vertices {
        let w = vstack(&[&v.transpose(), &eye(nd)]);
        let wt = w.transpose();
        constraints.push(ParamLmi {
            size: nd,
            terms: basis
                .iter()
                .enumerate()
                .map(|(k, e)| (k, &wt * e * &w))
                .filter(|(_, f)| f.iter().any(|v| *v != 0.0))
                .collect(),
        });
    }
    Ok(MultiplierClass {
        dim,
        split: n,
        generators: basis,
        constraints,
        equalities: Vec::new(),
        components: vec![Component {
            label: "convex hull".into(),
            coords: 0..svec_len(dim),
            kind: ComponentKind::General,
        }],
    })
}

/// All `2^{n_d N}` sign patterns `±d̄` of an `n_d × N` matrix; a single
/// zero vertex when `d̄ = 0`.
pub fn hypercube_vertices(n_d: usize, n: usize, bound: f64) -> Result<Vec<Mat>> {
    let k = n_d * n;
    if k > 16 {
        return Err(Error::InvalidArgument(format!(
            "vertex enumeration limited to n_d*N <= 16, got {k}"
        )));
    }
    if bound == 0.0 {
        return Ok(vec![Mat::zeros(n_d, n)]);
    }
    Ok((0..1usize << k)
        .map(|mask| Mat::from_fn(n_d, n, |i, j| if mask >> (j * n_d + i) & 1 == 1 { bound } else { -bound }))
        .collect())
}

/// `N × (N−1)` first-difference matrix; `D T = 0` iff `D` has constant columns.
pub fn difference_toeplitz(n: usize) -> Mat {
    let mut t = Mat::zeros(n, n.saturating_sub(1));
    for j in 0..n.saturating_sub(1) {
        t[(j, j)] = -1.0;
        t[(j + 1, j)] = 1.0;
    }
    t
}

/// `D T Tᵀ Dᵀ ⪯ ε I`: disturbances (nearly) in the kernel of `T`.
pub fn disturbance_kernel(t: &Mat, n_d: usize, eps: f64) -> Result<MultiplierClass> {
    let n = t.nrows();
    let mut c = disturbance_quadratic(&-(t * t.transpose()), &Mat::zeros(n, n_d), &(eye(n_d) * eps))?;
    c.components[0].label = "kernel".into();
    Ok(c)
}

/// `Σ_j diag(L_j, B_j) P_j diag(L_j, B_j)ᵀ`: prior classes per block mapped
/// to multipliers for `Δ̃ = B_w Δ`, of dimension `n_z + n`.
pub fn transform_prior(structure: &UncertaintyStructure, b_w: &Mat, classes: &[MultiplierClass]) -> Result<MultiplierClass> {
    if classes.len() != structure.blocks.len() {
        return Err(Error::dims(format!(
            "{} classes for {} blocks",
            classes.len(),
            structure.blocks.len()
        )));
    }
    if b_w.ncols() != structure.n_w() {
        return Err(Error::dims("B_w does not match the structure"));
    }
    let (nz, n) = (structure.n_z(), b_w.nrows());
    let mut parts = Vec::with_capacity(classes.len());
    for (j, c) in classes.iter().enumerate() {
        let spec = structure.blocks[j];
        if c.dim != spec.nz + spec.nw || c.split != spec.nz {
            return Err(Error::dims(format!(
                "class for block {} has dimension {} (split {}), expected {} (split {})",
                j + 1,
                c.dim,
                c.split,
                spec.nz + spec.nw,
                spec.nz
            )));
        }
        let bj = b_w * structure.r(j);
        // [L_jᵀ 0; 0 B_jᵀ]
        let t = block_diag(&[&structure.l(j).transpose(), &bj.transpose()]);
        parts.push(c.congruence(&t, nz)?);
    }
    if parts.is_empty() {
        return Ok(MultiplierClass::zero(nz + n, nz));
    }
    sum_classes(&parts.iter().collect::<Vec<_>>())
}

/// `[−Zᵀ, Mᵀ; 0, B_dᵀ]ᵀ P_d [−Zᵀ, Mᵀ; 0, B_dᵀ]` over the disturbance class.
pub fn learn_from_data(data: &DataMatrices, b_d: &Mat, disturbance: &MultiplierClass) -> Result<MultiplierClass> {
    let (n, big_n) = data.m.shape();
    let nz = data.z.nrows();
    if data.z.ncols() != big_n || b_d.nrows() != n {
        return Err(Error::dims("M, Z and B_d disagree"));
    }
    let nd = b_d.ncols();
    if disturbance.dim != big_n + nd || disturbance.split != big_n {
        return Err(Error::dims(format!(
            "disturbance class has dimension {} (split {}), expected {} (split {big_n})",
            disturbance.dim,
            disturbance.split,
            big_n + nd
        )));
    }
    let t = vstack(&[
        &hstack(&[&(-data.z.transpose()), &data.m.transpose()]),
        &hstack(&[&Mat::zeros(nd, nz), &b_d.transpose()]),
    ]);
    let mut c = disturbance.congruence(&t, nz)?;
    for comp in &mut c.components {
        comp.label = format!("learnt {}", comp.label);
    }
    Ok(c)
}

/// Extra multipliers added on top of the prior and learnt ones.
#[derive(Clone, Debug)]
pub enum ExtraClass {
    /// A class for `Δ` itself, of dimension `n_z + n_w`.
    OnDelta(MultiplierClass),
    /// A class for `Δ̃ = B_w Δ`, of dimension `n_z + n`.
    OnTransformed(MultiplierClass),
}

/// Sum of the transformed prior class, the learnt class and any extras.
pub fn combine(prior: &MultiplierClass, learnt: &MultiplierClass, b_w: &Mat, extras: &[ExtraClass]) -> Result<MultiplierClass> {
    let mut parts = vec![prior.clone(), learnt.clone()];
    let nz = prior.split;
    for e in extras {
        parts.push(match e {
            ExtraClass::OnDelta(c) => c.congruence(&block_diag(&[&eye(nz), &b_w.transpose()]), nz)?,
            ExtraClass::OnTransformed(c) => c.clone(),
        });
    }
    sum_classes(&parts.iter().collect::<Vec<_>>())
}

/// A bound on one uncertainty block.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PriorBound {
    /// `Δ_j = δ I` with `δ² ≤ b`.
    RepeatedScalar(f64),
    /// `Δ_j Δ_jᵀ ⪯ b I`.
    Norm(f64),
    /// No prior information on the block.
    None,
}

impl PriorBound {
    /// Multiplier class for this bound on a block of the given shape.
    pub fn class(&self, spec: &crate::lft::BlockSpec) -> Result<MultiplierClass> {
        match *self {
            PriorBound::RepeatedScalar(b) => {
                if spec.nw != spec.nz {
                    return Err(Error::dims("repeated scalar bound on a non-square block"));
                }
                prior_repeated_scalar(&crate::linalg::from_rows(&[&[-1.0, 0.0], &[0.0, b]]), spec.nz)
            }
            PriorBound::Norm(b) => norm_bound(spec.nw, spec.nz, b),
            PriorBound::None => Ok(MultiplierClass::zero(spec.nz + spec.nw, spec.nz)),
        }
    }
}

/// Transformed prior class for per-block bounds.
pub fn prior_from_bounds(structure: &UncertaintyStructure, b_w: &Mat, bounds: &[PriorBound]) -> Result<MultiplierClass> {
    if bounds.len() != structure.blocks.len() {
        return Err(Error::dims("one bound per block is required"));
    }
    let classes = bounds
        .iter()
        .zip(&structure.blocks)
        .map(|(b, s)| b.class(s))
        .collect::<Result<Vec<_>>>()?;
    transform_prior(structure, b_w, &classes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lft::BlockSpec;
    use crate::linalg::{col, from_rows};

    #[test]
    fn diagonal_generator_values() {
        let c = disturbance_diagonal(1.0, 2, 1).unwrap();
        let p = c.eval(&[1.0, 0.0]);
        assert_eq!(p, Mat::from_diagonal(&col(&[-1.0, 0.0, 1.0]).column(0).into_owned()));
    }

    #[test]
    fn uniform_diagonal_equals_quadratic() {
        let (n, nd, d2) = (4, 2, 0.3);
        let diag = disturbance_diagonal(d2, n, nd).unwrap();
        let quad = disturbance_energy(n, nd, d2 * d2 * n as f64).unwrap();
        assert!((diag.eval(&vec![1.0; n]) - quad.eval(&[1.0])).norm() < 1e-14);
    }

    #[test]
    fn repeated_scalar_kron() {
        let h = from_rows(&[&[-1.0, 0.0], &[0.0, 0.1]]);
        let c = prior_repeated_scalar(&h, 2).unwrap();
        assert_eq!(c.num_params(), 3);
        // Λ = I  ->  coordinates (1, 0, 1)
        let p = c.eval(&[1.0, 0.0, 1.0]);
        assert!((p - h.kronecker(&eye(2))).norm() < 1e-15);
        assert!(c.is_feasible(&[1.0, 0.0, 1.0], 0.0));
        assert!(!c.is_feasible(&[1.0, 2.0, 1.0], 0.0));
    }

    #[test]
    fn repeated_scalar_size_one_is_full_block() {
        let h = from_rows(&[&[-1.0, 0.2], &[0.2, 0.1]]);
        let r = prior_repeated_scalar(&h, 1).unwrap();
        let f = prior_full_block(&h, 1).unwrap();
        assert_eq!(r.generators, f.generators);
    }

    #[test]
    fn asymmetric_h_rejected() {
        assert!(prior_full_block(&from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]), 1).is_err());
    }

    #[test]
    fn hull_vertex_count() {
        let v = hypercube_vertices(1, 2, 1.0).unwrap();
        assert_eq!(v.len(), 4);
        let c = disturbance_convex_hull(&v).unwrap();
        assert_eq!(c.constraints.len(), 5);
    }

    #[test]
    fn toeplitz_kills_constants() {
        let t = difference_toeplitz(5);
        let d = Mat::from_element(2, 5, 0.7);
        assert!((d * t).norm() < 1e-15);
    }

    #[test]
    fn learnt_quadratic_generator() {
        let m = from_rows(&[&[0.3, -0.1, 0.2], &[0.0, 0.5, 0.1]]);
        let z = from_rows(&[&[1.0, 0.5, -1.0]]);
        let data = DataMatrices { m: m.clone(), z: z.clone(), provenance: String::new() };
        let b_d = eye(2);
        let r = 0.4;
        let c = learn_from_data(&data, &b_d, &disturbance_energy(3, 2, r).unwrap()).unwrap();
        let g = &c.generators[0];
        let expect = vstack(&[
            &hstack(&[&(-&z * z.transpose()), &(&z * m.transpose())]),
            &hstack(&[&(&m * z.transpose()), &(&b_d * b_d.transpose() * r - &m * m.transpose())]),
        ]);
        assert!((g - expect).norm() < 1e-14);
    }

    #[test]
    fn transform_identity_structure() {
        let s = UncertaintyStructure::new(vec![BlockSpec::full(2, 2)]);
        let c = norm_bound(2, 2, 0.5).unwrap();
        let t = transform_prior(&s, &eye(2), std::slice::from_ref(&c)).unwrap();
        assert_eq!(t.generators, c.generators);
        assert!(t.eval(&[0.0]).norm() == 0.0);
    }
}
