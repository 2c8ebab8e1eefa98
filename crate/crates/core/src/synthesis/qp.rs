use log::warn;

use crate::error::{Error, Result};
use crate::lft::{hinf_dual_parts, LftPlant, PerformanceIndex};
use crate::linalg::{sym_eigenvalues, Mat};
use crate::lmi::{AffineMatrix, Problem, Status, Var};
use crate::multiplier::{MultiplierClass, MultiplierVar};
use crate::synthesis::h2::{map_status, solve_right};
use crate::synthesis::result::{SynthesisOptions, SynthesisResult};

/// Dual performance matrix, either fixed or affine in `μ`.
enum DualIndex {
    Fixed(Mat),
    /// `P₀ + μ P₁`
    Affine(Mat, Mat),
}

struct Built {
    prob: Problem,
    y: Var,
    l: Var,
    mu: Option<Var>,
    mult: MultiplierVar,
    nl: Option<MultiplierVar>,
}

/// Column blocks of the outer inequality: `x`, `z′`, `z`, `e`.
struct Layout {
    n: usize,
    nzp: usize,
    nz: usize,
    ne: usize,
}

impl Layout {
    fn total(&self) -> usize {
        self.n + self.nzp + self.nz + self.ne
    }

    /// Row block that places `mat` (rows × the width of block `b`).
    fn place(&self, rows: usize, parts: &[(usize, &Mat)]) -> Mat {
        let offsets = [0, self.n, self.n + self.nzp, self.n + self.nzp + self.nz];
        let mut out = Mat::zeros(rows, self.total());
        for (b, m) in parts {
            if m.ncols() > 0 && rows > 0 {
                out.view_mut((0, offsets[*b]), (rows, m.ncols())).copy_from(m);
            }
        }
        out
    }
}

fn build(
    plant: &LftPlant,
    class: &MultiplierClass,
    nonlinear: Option<&MultiplierClass>,
    index: &DualIndex,
) -> Result<Built> {
    plant.check_dimensions()?;
    let (n, m, nz, ne, nd) = (plant.n(), plant.m(), plant.n_z(), plant.n_e(), plant.n_d());
    if class.dim != nz + n || class.split != nz {
        return Err(Error::dims("multiplier class does not match the uncertainty channel"));
    }
    let (nzp, nwp) = match (&plant.nonlinear, nonlinear) {
        (Some(ch), Some(c)) => {
            if c.dim != ch.c_z.nrows() + ch.b_w.ncols() || c.split != ch.c_z.nrows() {
                return Err(Error::dims("nonlinear multiplier does not match the nonlinear channel"));
            }
            (ch.c_z.nrows(), ch.b_w.ncols())
        }
        (None, None) => (0, 0),
        (Some(_), None) => return Err(Error::InvalidArgument("nonlinear channel needs a multiplier class".into())),
        (None, Some(_)) => return Err(Error::InvalidArgument("multiplier given for an absent nonlinear channel".into())),
    };
    let lay = Layout { n, nzp, nz, ne };
    let eye = |k: usize| Mat::identity(k, k);

    let mut prob = Problem::new();
    let y = prob.symmetric("Y", n);
    let l = prob.matrix("L", m, n);
    let mult = class.instantiate(&mut prob, "theta");
    let ye = y.expr();
    let le = l.expr();

    // −E₁ᵀ Y E₁
    let e1 = lay.place(n, &[(0, &eye(n))]);
    let mut inner = -ye.congruence(&e1);

    let nl = match (&plant.nonlinear, nonlinear) {
        (Some(ch), Some(c)) => {
            let mv = c.instantiate(&mut prob, "theta_nl");
            let t2 = crate::linalg::vstack(&[
                &lay.place(nzp, &[(1, &eye(nzp))]),
                &lay.place(nwp, &[(0, &ch.b_w.transpose()), (2, &ch.d_zw.transpose())]),
            ]);
            inner = inner + mv.p.congruence(&t2);
            Some(mv)
        }
        _ => None,
    };

    let t3 = crate::linalg::vstack(&[&lay.place(nz, &[(2, &eye(nz))]), &lay.place(n, &[(0, &eye(n))])]);
    inner = inner + mult.p.congruence(&t3);

    let t4 = crate::linalg::vstack(&[
        &lay.place(ne, &[(3, &eye(ne))]),
        &lay.place(nd, &[(0, &plant.b_d.transpose()), (3, &plant.d_ed.transpose())]),
    ]);
    let mu = match index {
        DualIndex::Fixed(p) => {
            inner.add_constant(&(t4.transpose() * p * &t4));
            None
        }
        DualIndex::Affine(p0, p1) => {
            inner.add_constant(&(t4.transpose() * p0 * &t4));
            let mu = prob.nonneg("mu");
            inner = inner + AffineMatrix::term(mu.offset(), t4.transpose() * p1 * &t4);
            Some(mu)
        }
    };

    let mut g_rows = vec![ye.lmul(&plant.a) + le.lmul(&plant.b)];
    if let Some(ch) = &plant.nonlinear {
        g_rows.push(ye.lmul(&ch.c_z) + le.lmul(&ch.d_z));
    }
    g_rows.push(ye.lmul(&plant.c_z) + le.lmul(&plant.d_z));
    g_rows.push(ye.lmul(&plant.c_e) + le.lmul(&plant.d_eu));
    let g = AffineMatrix::vstack(g_rows.into_iter().filter(|r| r.nrows() > 0).collect());
    let big = AffineMatrix::blocks(vec![vec![inner, g.clone()], vec![g.transpose(), -ye.clone()]]);
    prob.strictly_nsd("quadratic performance", big.sym());
    prob.strictly_psd("Y > 0", ye);
    Ok(Built { prob, y, l, mu, mult, nl })
}

fn result(b: &Built, sol: &crate::lmi::Solution, class: &MultiplierClass, nonlinear: Option<&MultiplierClass>, gamma: Option<f64>, plant: &LftPlant) -> Result<SynthesisResult> {
    let y = sol.value(&b.y);
    let l = sol.value(&b.l);
    let k = solve_right(&l, &y)?;
    let nl_value = match (&b.nl, nonlinear) {
        (Some(v), Some(c)) => Some(v.value(&sol.values, c)),
        _ => None,
    };
    if let (Some(v), Some(ch)) = (&nl_value, &plant.nonlinear) {
        check_inertia(&v.p, ch.c_z.nrows(), ch.b_w.ncols())?;
    }
    let res = SynthesisResult {
        k,
        l,
        certificate: y,
        gamma,
        gamma_slack: None,
        multiplier: b.mult.value(&sol.values, class),
        nonlinear_multiplier: nl_value,
        status: sol.status,
        residual: sol.residual,
        iterations: sol.iterations,
    };
    if !res.certificate_is_positive() {
        return Err(Error::NumericalFailure("certificate is not positive definite".into()));
    }
    Ok(res)
}

/// `P′` must have `n_z′` negative and `n_w′` positive eigenvalues.
pub fn check_inertia(p: &Mat, nzp: usize, nwp: usize) -> Result<()> {
    let ev = sym_eigenvalues(p);
    let scale = ev.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);
    let neg = ev.iter().filter(|v| **v < -1e-9 * scale).count();
    let pos = ev.iter().filter(|v| **v > 1e-9 * scale).count();
    if neg == nzp && pos == nwp {
        Ok(())
    } else {
        Err(Error::InertiaViolation(format!(
            "nonlinear multiplier has {neg} negative and {pos} positive eigenvalues, expected {nzp} and {nwp}"
        )))
    }
}

/// Robust quadratic performance for a fixed index.
pub fn synthesize_quadratic_performance(
    plant: &LftPlant,
    class: &MultiplierClass,
    nonlinear: Option<&MultiplierClass>,
    index: &PerformanceIndex,
    opts: &SynthesisOptions,
) -> Result<SynthesisResult> {
    if index.n_d() != plant.n_d() || index.n_e() != plant.n_e() {
        return Err(Error::dims("performance index does not match the plant channels"));
    }
    let b = build(plant, class, nonlinear, &DualIndex::Fixed(index.dual()))?;
    let sol = map_status(b.prob.solve(&opts.solver)?, "quadratic performance synthesis")?;
    result(&b, &sol, class, nonlinear, None, plant)
}

/// Robust H∞ design: maximizes `μ = γ⁻²`, or bisects on `γ` when the direct
/// form is disabled.
pub fn synthesize_hinf(plant: &LftPlant, class: &MultiplierClass, nonlinear: Option<&MultiplierClass>, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    if !opts.hinf_direct {
        return hinf_bisection(plant, class, nonlinear, opts);
    }
    let (p0, p1) = hinf_dual_parts(plant.n_d(), plant.n_e());
    let mut b = build(plant, class, nonlinear, &DualIndex::Affine(p0, p1))?;
    let mu = b.mu.clone().expect("affine index declares mu");
    b.prob.maximize(mu.expr());
    let sol = b.prob.solve(&opts.solver)?;
    if sol.status == Status::NumericalFailure {
        warn!("direct H-infinity solve failed ({}); bisecting instead", sol.message);
        return hinf_bisection(plant, class, nonlinear, opts);
    }
    let sol = map_status(sol, "robust H-infinity synthesis")?;
    let mu_val = sol.scalar(&mu);
    if mu_val <= 0.0 {
        return Err(Error::Infeasible("no positive performance level".into()));
    }
    result(&b, &sol, class, nonlinear, Some(1.0 / mu_val.sqrt()), plant)
}

fn hinf_at(plant: &LftPlant, class: &MultiplierClass, nonlinear: Option<&MultiplierClass>, gamma: f64, opts: &SynthesisOptions) -> Result<Option<SynthesisResult>> {
    let index = PerformanceIndex::hinf(gamma, plant.n_d(), plant.n_e())?;
    match synthesize_quadratic_performance(plant, class, nonlinear, &index, opts) {
        Ok(mut r) => {
            r.gamma = Some(gamma);
            Ok(Some(r))
        }
        Err(Error::Infeasible(_)) => Ok(None),
        Err(Error::NumericalFailure(msg)) => {
            warn!("treating gamma = {gamma} as infeasible: {msg}");
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn hinf_bisection(plant: &LftPlant, class: &MultiplierClass, nonlinear: Option<&MultiplierClass>, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    let mut hi = 1.0;
    let mut best = None;
    for _ in 0..40 {
        if let Some(r) = hinf_at(plant, class, nonlinear, hi, opts)? {
            best = Some(r);
            break;
        }
        hi *= 4.0;
    }
    let mut best = best.ok_or_else(|| Error::Infeasible("no finite H-infinity level found".into()))?;
    let mut lo = 0.0;
    while hi - lo > opts.bisection_tol * hi {
        let mid = 0.5 * (lo + hi);
        match hinf_at(plant, class, nonlinear, mid, opts)? {
            Some(r) => {
                hi = mid;
                best = r;
            }
            None => lo = mid,
        }
    }
    Ok(best)
}
