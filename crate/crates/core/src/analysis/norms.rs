use std::f64::consts::PI;

use log::debug;
use nalgebra::{Complex, DMatrix};

use crate::analysis::ClosedLoop;
use crate::error::{Error, Result};
use crate::linalg::{discrete_lyapunov, max_abs, Mat};
use crate::lmi::{AffineMatrix, Problem, SolverOptions, Status};

/// Number of frequencies in `[0, π]` used for the grid lower bound.
pub const GRID_POINTS: usize = 512;

const GRAMIAN_TOL: f64 = 1e-10;

fn require_stable(cl: &ClosedLoop) -> Result<()> {
    let rho = cl.spectral_radius();
    if rho >= 1.0 {
        return Err(Error::UnstableSystem(rho));
    }
    Ok(())
}

/// H2 norm from the controllability Gramian `P = A P Aᵀ + B Bᵀ`.
pub fn h2_norm(cl: &ClosedLoop) -> Result<f64> {
    require_stable(cl)?;
    if max_abs(&cl.d) > 0.0 {
        return Err(Error::InvalidArgument("H2 norm requires a zero feedthrough".into()));
    }
    let q = &cl.b * cl.b.transpose();
    let mut p = discrete_lyapunov(&cl.a, &q).ok_or_else(|| Error::NumericalFailure("singular Lyapunov operator".into()))?;
    let residual = |p: &Mat| &cl.a * p * cl.a.transpose() + &q - p;
    // one step of iterative refinement absorbs most of the solve error
    if let Some(corr) = discrete_lyapunov(&cl.a, &residual(&p)) {
        p += corr;
    }
    let r = max_abs(&residual(&p));
    if r >= GRAMIAN_TOL * (1.0 + max_abs(&p)) {
        return Err(Error::NumericalFailure(format!("Gramian residual {r:.2e}")));
    }
    Ok((&cl.c * p * cl.c.transpose()).trace().max(0.0).sqrt())
}

/// `C (e^{iω} I − A)⁻¹ B + D`.
pub fn frequency_response(cl: &ClosedLoop, omega: f64) -> DMatrix<Complex<f64>> {
    let n = cl.a.nrows();
    let z = Complex::new(omega.cos(), omega.sin());
    let cplx = |m: &Mat| m.map(|v| Complex::new(v, 0.0));
    let d = cplx(&cl.d);
    if n == 0 {
        return d;
    }
    let zi_a = DMatrix::<Complex<f64>>::identity(n, n) * z - cplx(&cl.a);
    let x = zi_a.lu().solve(&cplx(&cl.b)).unwrap_or_else(|| DMatrix::zeros(n, cl.b.ncols()));
    cplx(&cl.c) * x + d
}

/// Largest singular value of the frequency response at `omega`.
pub fn gain_at(cl: &ClosedLoop, omega: f64) -> f64 {
    let g = frequency_response(cl, omega);
    if g.nrows() == 0 || g.ncols() == 0 {
        return 0.0;
    }
    g.svd(false, false).singular_values.iter().fold(0.0, |a: f64, &b| a.max(b))
}

/// Grid maximum refined by golden-section search around the best point.
/// A lower bound on the H∞ norm.
pub fn hinf_estimate(cl: &ClosedLoop) -> (f64, f64) {
    let step = PI / (GRID_POINTS - 1) as f64;
    let (mut best_k, mut best) = (0, f64::NEG_INFINITY);
    for k in 0..GRID_POINTS {
        let g = gain_at(cl, k as f64 * step);
        if g > best {
            best = g;
            best_k = k;
        }
    }
    let (mut lo, mut hi) = ((best_k as f64 - 1.0).max(0.0) * step, ((best_k + 1) as f64 * step).min(PI));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut best_w = best_k as f64 * step;
    for _ in 0..60 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        let (ga, gb) = (gain_at(cl, a), gain_at(cl, b));
        if ga > best {
            best = ga;
            best_w = a;
        }
        if gb > best {
            best = gb;
            best_w = b;
        }
        if ga > gb {
            hi = b;
        } else {
            lo = a;
        }
    }
    (best, best_w)
}

#[derive(Clone, Copy, Debug)]
pub struct HinfBounds {
    /// Frequency-grid lower bound.
    pub lower: f64,
    /// Smallest level certified by the bounded-real inequality.
    pub upper: f64,
    /// Frequency of the grid maximum.
    pub peak_frequency: f64,
}

/// Bounded-real feasibility: `P ≻ 0` with
/// `[[AᵀPA − P + CᵀC, AᵀPB + CᵀD], [∗, BᵀPB + DᵀD − γ²I]] ≺ 0`.
fn bounded_real(cl: &ClosedLoop, gamma: f64, opts: &SolverOptions) -> Result<bool> {
    let (n, nd) = (cl.a.nrows(), cl.b.ncols());
    let mut prob = Problem::new();
    let p = prob.symmetric("P", n);
    let ab = crate::linalg::hstack(&[&cl.a, &cl.b]);
    let cd = crate::linalg::hstack(&[&cl.c, &cl.d]);
    let left = crate::linalg::identity_columns(n + nd, 0, n).transpose();
    let mut lmi = p.expr().congruence(&ab) - p.expr().congruence(&left);
    let mut constant = cd.transpose() * &cd;
    let gg = gamma * gamma;
    for i in n..n + nd {
        constant[(i, i)] -= gg;
    }
    lmi = lmi + AffineMatrix::constant(constant);
    prob.strictly_nsd("bounded real", lmi);
    prob.strictly_psd("P > 0", p.expr());
    Ok(prob.solve(opts)?.status == Status::Optimal)
}

/// H∞ norm bracketed by the frequency grid and bisection on the
/// bounded-real inequality until `(upper − lower)/upper ≤ tol`.
pub fn hinf_bounds(cl: &ClosedLoop, tol: f64, opts: &SolverOptions) -> Result<HinfBounds> {
    require_stable(cl)?;
    let (grid, peak_frequency) = hinf_estimate(cl);
    if grid <= 0.0 || cl.a.nrows() == 0 {
        // static or identically zero: the grid value is exact
        return Ok(HinfBounds { lower: grid, upper: grid, peak_frequency });
    }
    let mut hi = 10.0 * grid;
    let mut expansions = 0;
    while !bounded_real(cl, hi, opts)? {
        hi *= 10.0;
        expansions += 1;
        if expansions > 8 {
            return Err(Error::NumericalFailure("bounded-real bracket did not close".into()));
        }
    }
    let mut lo = grid;
    while hi - lo > tol * hi {
        let mid = 0.5 * (lo + hi);
        if bounded_real(cl, mid, opts)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    debug!("hinf: grid {grid:.6e}, certified {hi:.6e}");
    Ok(HinfBounds {
        lower: grid,
        upper: hi,
        peak_frequency,
    })
}

/// Certified H∞ norm to relative accuracy `tol`.
pub fn hinf_norm(cl: &ClosedLoop, tol: f64) -> Result<f64> {
    Ok(hinf_bounds(cl, tol, &SolverOptions::default())?.upper)
}
