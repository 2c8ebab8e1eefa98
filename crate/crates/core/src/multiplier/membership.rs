use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{min_eigvec, Mat};
use crate::lmi::svec::{svec_indices, svec_len};
use crate::lmi::{AffineMatrix, Problem, SolverOptions, Status};
use crate::multiplier::class::{ComponentKind, MultiplierClass, MultiplierValue};

/// Outcome of a membership query.
#[derive(Clone, Debug)]
pub enum Membership {
    /// No violating multiplier was found; `worst` is the smallest normalized
    /// eigenvalue encountered.
    Member { worst: f64 },
    /// `θ` is feasible for the class and `[Δᵀ; I]ᵀ P(θ) [Δᵀ; I]` has the
    /// negative eigenvalue `value` (relative to `‖P(θ)‖_F`).
    NotMember { theta: Vec<f64>, value: f64 },
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member { .. })
    }
}

const MAX_ROUNDS: usize = 40;

/// Searches the class for a multiplier that certifies `Δ` is *not* covered.
///
/// The cone is a sum of independent components, so each one is searched on
/// its own. Components made of nonnegative weights are decided exactly by
/// their generators. Otherwise the search alternates between the direction
/// `x` and the parameter `θ` minimizing `xᵀ F(θ) x`; a reported violation is
/// always genuine, while a `Member` answer from these components is only as
/// good as the search.
pub fn certify_membership(delta: &Mat, class: &MultiplierClass, tol: f64, opts: &SolverOptions) -> Result<Membership> {
    let forms = class.quadratic_forms(delta)?;
    let mut worst = f64::INFINITY;
    for (ci, comp) in class.components.iter().enumerate() {
        let r = comp.coords.clone();
        let local_forms = &forms[r.clone()];
        let sub = class.component_class(ci);
        let found = match comp.kind {
            ComponentKind::Scalars => scalar_search(&sub, local_forms),
            ComponentKind::Psd(s) => psd_search(&sub, local_forms, s),
            ComponentKind::General => general_search(&sub, local_forms, opts)?,
        };
        if let Some((theta_local, value)) = found {
            if value < -tol {
                let mut theta = vec![0.0; class.num_params()];
                theta[r].copy_from_slice(&theta_local);
                return Ok(Membership::NotMember { theta, value });
            }
            worst = worst.min(value);
        }
    }
    Ok(Membership::Member { worst })
}

fn form(forms: &[Mat], theta: &[f64]) -> Mat {
    let n = forms.first().map_or(0, |f| f.nrows());
    let mut out = Mat::zeros(n, n);
    for (f, t) in forms.iter().zip(theta) {
        if *t != 0.0 {
            out += f * *t;
        }
    }
    out
}

/// `λ_min(F(θ)) / ‖P(θ)‖_F`, or `None` for `P(θ) = 0`.
fn normalized(class: &MultiplierClass, forms: &[Mat], theta: &[f64]) -> Option<f64> {
    let scale = class.eval(theta).norm();
    if scale <= 0.0 {
        return None;
    }
    let f = form(forms, theta);
    if f.nrows() == 0 {
        return Some(0.0);
    }
    Some(min_eigvec(&f).0 / scale)
}

fn scalar_search(class: &MultiplierClass, forms: &[Mat]) -> Option<(Vec<f64>, f64)> {
    let k = forms.len();
    (0..k)
        .filter_map(|i| {
            let mut theta = vec![0.0; k];
            theta[i] = 1.0;
            normalized(class, forms, &theta).map(|v| (theta, v))
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
}

fn starts(n: usize) -> Vec<Mat> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut out: Vec<Mat> = (0..n)
        .map(|i| {
            let mut e = Mat::zeros(n, 1);
            e[(i, 0)] = 1.0;
            e
        })
        .collect();
    for _ in 0..n.max(4) {
        let v = Mat::from_fn(n, 1, |_, _| StandardNormal.sample(&mut rng));
        let nv = v.norm();
        out.push(v / nv);
    }
    out
}

/// Single PSD parameter `Λ`: for fixed `x` the best `Λ` is `vvᵀ` with `v`
/// the bottom eigenvector of `S(x)`, `⟨Λ, S(x)⟩ = xᵀ F(Λ) x`.
fn psd_search(class: &MultiplierClass, forms: &[Mat], s: usize) -> Option<(Vec<f64>, f64)> {
    let n = forms.first().map_or(0, |f| f.nrows());
    if n == 0 {
        return None;
    }
    let idx: Vec<(usize, usize)> = svec_indices(s).collect();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x0 in starts(n) {
        let mut x = x0;
        let mut last = f64::INFINITY;
        for _ in 0..MAX_ROUNDS {
            let mut sm = Mat::zeros(s, s);
            for (k, &(i, j)) in idx.iter().enumerate() {
                let c = (x.transpose() * &forms[k] * &x)[(0, 0)];
                if i == j {
                    sm[(i, i)] = c;
                } else {
                    sm[(i, j)] = c / 2.0;
                    sm[(j, i)] = c / 2.0;
                }
            }
            let (_, v) = min_eigvec(&sm);
            let theta: Vec<f64> = idx.iter().map(|&(i, j)| v[(i, 0)] * v[(j, 0)]).collect();
            let Some(val) = normalized(class, forms, &theta) else { break };
            if best.as_ref().is_none_or(|b| val < b.1) {
                best = Some((theta.clone(), val));
            }
            let (_, xn) = min_eigvec(&form(forms, &theta));
            x = xn;
            if (last - val).abs() < 1e-13 {
                break;
            }
            last = val;
        }
    }
    best
}

/// General constraints: the `θ` step is a small SDP with `‖P(θ)‖_F ≤ 1`.
fn general_search(class: &MultiplierClass, forms: &[Mat], opts: &SolverOptions) -> Result<Option<(Vec<f64>, f64)>> {
    let n = forms.first().map_or(0, |f| f.nrows());
    if n == 0 {
        return Ok(None);
    }
    let mut best: Option<(Vec<f64>, f64)> = None;
    for x0 in starts(n).into_iter().take(n + 2) {
        let mut x = x0;
        let mut last = f64::INFINITY;
        for _ in 0..MAX_ROUNDS / 4 {
            let Some(theta) = theta_step(class, forms, &x, opts)? else { break };
            let Some(val) = normalized(class, forms, &theta) else { break };
            if best.as_ref().is_none_or(|b| val < b.1) {
                best = Some((theta.clone(), val));
            }
            let (_, xn) = min_eigvec(&form(forms, &theta));
            x = xn;
            if (last - val).abs() < 1e-10 {
                break;
            }
            last = val;
        }
    }
    Ok(best)
}

fn theta_step(class: &MultiplierClass, forms: &[Mat], x: &Mat, opts: &SolverOptions) -> Result<Option<Vec<f64>>> {
    let mut prob = Problem::new();
    let mv = class.instantiate(&mut prob, "theta");
    let Some(theta) = mv.theta.clone() else { return Ok(None) };
    // ‖svec P‖₂ ≤ 1 as [[I, v], [vᵀ, 1]] ⪰ 0
    let d = class.dim;
    let len = svec_len(d);
    let r2 = std::f64::consts::SQRT_2;
    let mut v = AffineMatrix::zeros(len, 1);
    for (k, g) in class.generators.iter().enumerate() {
        let sv: Vec<f64> = svec_indices(d)
            .map(|(i, j)| if i == j { g[(i, j)] } else { r2 * g[(i, j)] })
            .collect();
        v.add_term(theta.offset() + k, &Mat::from_column_slice(len, 1, &sv));
    }
    prob.psd(
        "normalization",
        AffineMatrix::blocks(vec![
            vec![AffineMatrix::identity(len), v.clone()],
            vec![v.transpose(), AffineMatrix::identity(1)],
        ]),
    );
    let mut obj = AffineMatrix::zeros(1, 1);
    for (k, f) in forms.iter().enumerate() {
        obj.add_term(theta.offset() + k, &(x.transpose() * f * x));
    }
    prob.minimize(obj);
    let sol = prob.solve(opts)?;
    match sol.status {
        Status::Optimal => Ok(Some(sol.value(&theta).as_slice().to_vec())),
        Status::Infeasible | Status::Unbounded => Ok(None),
        Status::NumericalFailure => Err(Error::NumericalFailure(format!("membership search: {}", sol.message))),
    }
}

/// Looks for `θ` with upper-left block of `P(θ)` at most `−I`, minimizing
/// `−trace` of that block so that the natural witness is returned.
pub fn assumption_definiteness_check(class: &MultiplierClass, opts: &SolverOptions) -> Result<Option<MultiplierValue>> {
    if class.split == 0 {
        return Ok(Some(MultiplierValue {
            theta: vec![0.0; class.num_params()],
            p: Mat::zeros(class.dim, class.dim),
        }));
    }
    let mut prob = Problem::new();
    let mv = class.instantiate(&mut prob, "theta");
    let ul = mv.p.view(0, 0, class.split, class.split);
    prob.nsd("upper-left <= -I", ul.clone() + AffineMatrix::identity(class.split));
    prob.minimize(-ul.trace());
    let sol = prob.solve(opts)?;
    match sol.status {
        Status::Optimal => Ok(Some(mv.value(&sol.values, class))),
        Status::Infeasible => Ok(None),
        Status::Unbounded => Err(Error::Unbounded("definiteness check".into())),
        Status::NumericalFailure => Err(Error::NumericalFailure(format!("definiteness check: {}", sol.message))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eye, from_rows};
    use crate::multiplier::constructors::*;
    use crate::multiplier::class::sum_classes;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn quadratic_witness_is_unit() {
        let c = disturbance_energy(3, 2, 1.0).unwrap();
        let w = assumption_definiteness_check(&c, &opts()).unwrap().unwrap();
        assert!((w.theta[0] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn diagonal_witness_is_all_ones() {
        let c = disturbance_diagonal(0.5, 4, 1).unwrap();
        let w = assumption_definiteness_check(&c, &opts()).unwrap().unwrap();
        assert!(w.theta.iter().all(|p| (p - 1.0).abs() < 1e-6));
    }

    #[test]
    fn kernel_alone_fails_but_helps_in_a_sum() {
        let k = disturbance_kernel(&difference_toeplitz(4), 1, 0.0).unwrap();
        assert!(assumption_definiteness_check(&k, &opts()).unwrap().is_none());
        let q = disturbance_energy(4, 1, 1.0).unwrap();
        let s = sum_classes(&[&k, &q]).unwrap();
        assert!(assumption_definiteness_check(&s, &opts()).unwrap().is_some());
    }

    #[test]
    fn norm_bound_membership() {
        let c = norm_bound(2, 2, 0.5).unwrap();
        let inside = from_rows(&[&[0.5, -0.2], &[-0.1, 0.3]]);
        assert!(certify_membership(&inside, &c, 1e-9, &opts()).unwrap().is_member());
        let outside = &inside * 2.0;
        match certify_membership(&outside, &c, 1e-9, &opts()).unwrap() {
            Membership::NotMember { theta, value } => {
                assert_eq!(theta, vec![1.0]);
                assert!(value < 0.0);
            }
            m => panic!("expected a witness, got {m:?}"),
        }
    }

    #[test]
    fn repeated_scalar_forces_scalar_structure() {
        let h = from_rows(&[&[-1.0, 0.0], &[0.0, 0.1]]);
        let c = prior_repeated_scalar(&h, 2).unwrap();
        assert!(certify_membership(&(eye(2) * 0.2), &c, 1e-9, &opts()).unwrap().is_member());
        let off = from_rows(&[&[0.2, 0.05], &[0.0, 0.2]]);
        assert!(!certify_membership(&off, &c, 1e-9, &opts()).unwrap().is_member());
        let spread = from_rows(&[&[0.2, 0.0], &[0.0, 0.1]]);
        assert!(!certify_membership(&spread, &c, 1e-9, &opts()).unwrap().is_member());
    }

    #[test]
    fn hull_contains_convex_combinations() {
        let v = hypercube_vertices(1, 2, 1.0).unwrap();
        let c = disturbance_convex_hull(&v).unwrap();
        let d = &v[0] * 0.3 + &v[3] * 0.7;
        assert!(certify_membership(&d, &c, 1e-7, &opts()).unwrap().is_member());
        let far = from_rows(&[&[1.5, 0.0]]);
        assert!(!certify_membership(&far, &c, 1e-7, &opts()).unwrap().is_member());
    }
}
