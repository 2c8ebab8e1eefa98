use crate::error::{Error, Result};
use crate::lft::LftPlant;
use crate::linalg::{identity_columns, max_abs, Mat};
use crate::lmi::{AffineMatrix, Problem, Status};
use crate::multiplier::MultiplierClass;
use crate::synthesis::result::{SynthesisOptions, SynthesisResult};

fn check_class(plant: &LftPlant, class: &MultiplierClass) -> Result<()> {
    let (n, nz) = (plant.n(), plant.n_z());
    if class.dim != nz + n || class.split != nz {
        return Err(Error::dims(format!(
            "multiplier class has dimension {} (split {}), expected {} (split {nz})",
            class.dim,
            class.split,
            nz + n
        )));
    }
    plant.check_dimensions()
}

/// `[0, I_{n_z}; I_n, 0]`: reorders `(z, x)` multipliers to `(x, z)`.
pub(crate) fn swap(n: usize, nz: usize) -> Mat {
    let mut t = Mat::zeros(nz + n, n + nz);
    t.view_mut((nz, 0), (n, n)).copy_from(&Mat::identity(n, n));
    t.view_mut((0, n), (nz, nz)).copy_from(&Mat::identity(nz, nz));
    t
}

struct Common {
    prob: Problem,
    x: crate::lmi::Var,
    l: crate::lmi::Var,
    mult: crate::multiplier::MultiplierVar,
}

/// Builds `[[B_dB_dᵀ − X + W, G], [Gᵀ, −X]] ≺ 0` with `W` the swapped
/// multiplier and `G = [AX + BL; C_zX + D_zL]`.
fn robust_lmi(plant: &LftPlant, class: &MultiplierClass, with_disturbance: bool) -> Common {
    let (n, m, nz) = (plant.n(), plant.m(), plant.n_z());
    let mut prob = Problem::new();
    let x = prob.symmetric("X", n);
    let l = prob.matrix("L", m, n);
    let mult = class.instantiate(&mut prob, "theta");
    let xe = x.expr();
    let le = l.expr();

    let mut top = AffineMatrix::zeros(n + nz, n + nz);
    if with_disturbance && plant.n_d() > 0 {
        let bd = &plant.b_d * plant.b_d.transpose();
        top.add_constant(&(identity_columns(n + nz, 0, n) * bd * identity_columns(n + nz, 0, n).transpose()));
    }
    top = top - xe.congruence(&identity_columns(n + nz, 0, n).transpose());
    top = top + mult.p.congruence(&swap(n, nz));

    let g = AffineMatrix::vstack(vec![
        xe.lmul(&plant.a) + le.lmul(&plant.b),
        xe.lmul(&plant.c_z) + le.lmul(&plant.d_z),
    ]);
    let big = AffineMatrix::blocks(vec![vec![top, g.clone()], vec![g.transpose(), -xe.clone()]]);
    prob.strictly_nsd("robust performance", big.sym());
    prob.strictly_psd("X > 0", xe);
    Common { prob, x, l, mult }
}

fn finish(common: &Common, sol: &crate::lmi::Solution, class: &MultiplierClass, gamma: Option<f64>, slack: Option<Mat>) -> Result<SynthesisResult> {
    let x = sol.value(&common.x);
    let l = sol.value(&common.l);
    let k = solve_right(&l, &x)?;
    let res = SynthesisResult {
        k,
        l,
        certificate: x,
        gamma,
        gamma_slack: slack,
        multiplier: common.mult.value(&sol.values, class),
        nonlinear_multiplier: None,
        status: sol.status,
        residual: sol.residual,
        iterations: sol.iterations,
    };
    if !res.certificate_is_positive() {
        return Err(Error::NumericalFailure("certificate is not positive definite".into()));
    }
    Ok(res)
}

/// `L X⁻¹` via a Cholesky solve on the symmetric certificate.
pub(crate) fn solve_right(l: &Mat, x: &Mat) -> Result<Mat> {
    if x.nrows() == 0 {
        return Ok(l.clone());
    }
    let chol = x
        .clone()
        .cholesky()
        .ok_or_else(|| Error::NumericalFailure("certificate is not positive definite".into()))?;
    Ok(chol.solve(&l.transpose()).transpose())
}

/// Robust H2 state feedback: minimizes `trace Γ` subject to the trace bound
/// and the robust Lyapunov inequality.
pub fn synthesize_h2(plant: &LftPlant, class: &MultiplierClass, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    check_class(plant, class)?;
    if max_abs(&plant.d_ed) > 0.0 {
        return Err(Error::InvalidArgument("H2 design requires D_ed = 0".into()));
    }
    let ne = plant.n_e();
    let mut c = robust_lmi(plant, class, true);
    let gam = c.prob.symmetric("Gamma", ne);
    let xe = c.x.expr();
    let ce = xe.lmul(&plant.c_e) + c.l.expr().lmul(&plant.d_eu);
    c.prob.strictly_psd(
        "trace bound",
        AffineMatrix::blocks(vec![vec![gam.expr(), ce.clone()], vec![ce.transpose(), xe]]).sym(),
    );
    c.prob.minimize(gam.expr().trace());
    let sol = c.prob.solve(&opts.solver)?;
    let sol = map_status(sol, "robust H2 synthesis")?;
    let slack = sol.value(&gam);
    let gamma = slack.trace().max(0.0).sqrt();
    finish(&c, &sol, class, Some(gamma), Some(slack))
}

/// Robust stabilization: the H2 inequality with `B_d = 0` and no trace bound.
pub fn synthesize_stabilizing(plant: &LftPlant, class: &MultiplierClass, opts: &SynthesisOptions) -> Result<SynthesisResult> {
    check_class(plant, class)?;
    let n = plant.n();
    let mut c = robust_lmi(plant, class, false);
    // the inequality is homogeneous; fix the scale from below
    c.prob.psd("X >= I", c.x.expr() - AffineMatrix::identity(n));
    let sol = c.prob.solve(&opts.solver)?;
    let sol = map_status(sol, "robust stabilization")?;
    finish(&c, &sol, class, None, None)
}

pub(crate) fn map_status(sol: crate::lmi::Solution, what: &str) -> Result<crate::lmi::Solution> {
    match sol.status {
        Status::Optimal => Ok(sol),
        _ => sol.into_result(what),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{h2_norm, ClosedLoop};
    use crate::linalg::{from_rows, spectral_radius};
    use crate::multiplier::norm_bound;

    fn scalar(a: f64, b: f64, d_eu: f64) -> LftPlant {
        let ce = if d_eu == 0.0 { from_rows(&[&[1.0]]) } else { from_rows(&[&[1.0], &[0.0]]) };
        let de = if d_eu == 0.0 { from_rows(&[&[0.0]]) } else { from_rows(&[&[0.0], &[d_eu]]) };
        LftPlant::nominal(from_rows(&[&[a]]), from_rows(&[&[b]]))
            .with_disturbance(from_rows(&[&[1.0]]))
            .with_performance(ce, de)
    }

    /// Fixed point of the scalar Riccati recursion; the optimal H2 norm is √p.
    fn riccati(a: f64, b: f64, r: f64) -> f64 {
        let mut p = 1.0;
        for _ in 0..10_000 {
            p = a * a * p - (a * p * b).powi(2) / (r + b * b * p) + 1.0;
        }
        p.sqrt()
    }

    #[test]
    fn unstabilizable_scalar_is_infeasible() {
        let p = scalar(2.0, 0.0, 0.0);
        let r = synthesize_h2(&p, &MultiplierClass::zero(1, 0), &SynthesisOptions::default());
        assert!(matches!(r, Err(Error::Infeasible(_))), "{r:?}");
    }

    #[test]
    fn scalar_matches_riccati() {
        let opts = SynthesisOptions::default();
        // deadbeat is optimal without input weight
        let r = synthesize_h2(&scalar(0.5, 1.0, 0.0), &MultiplierClass::zero(1, 0), &opts).unwrap();
        assert!((r.gamma.unwrap() - riccati(0.5, 1.0, 0.0)).abs() < 1e-4);
        assert!((r.k[(0, 0)] + 0.5).abs() < 1e-3);

        let r = synthesize_h2(&scalar(1.2, 1.0, 0.3), &MultiplierClass::zero(1, 0), &opts).unwrap();
        assert!((r.gamma.unwrap() - riccati(1.2, 1.0, 0.09)).abs() < 1e-4);
    }

    #[test]
    fn gain_reconstruction_and_certificate() {
        let a = from_rows(&[&[1.1, 1.0], &[0.0, 0.9]]);
        let p = LftPlant::nominal(a, from_rows(&[&[0.0], &[1.0]]))
            .with_disturbance(Mat::identity(2, 2))
            .with_performance(from_rows(&[&[1.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]), from_rows(&[&[0.0], &[0.0], &[0.5]]));
        let r = synthesize_h2(&p, &MultiplierClass::zero(2, 0), &SynthesisOptions::default()).unwrap();
        assert!((&r.k * &r.certificate - &r.l).amax() < 1e-8);
        assert!(r.certificate_range().0 > 0.0);
        let cl = ClosedLoop::new(&p, &r.k, &Mat::zeros(0, 0)).unwrap();
        let achieved = h2_norm(&cl).unwrap();
        assert!(achieved <= r.gamma.unwrap() * (1.0 + 1e-6));
        assert!(achieved >= r.gamma.unwrap() * (1.0 - 1e-4));
    }

    #[test]
    fn robust_scalar_holds_at_the_extremes() {
        // x₊ = (0.8 + δ) x + u + d with |δ| ≤ 0.4, input weighted by 0.5
        let p = scalar(0.8, 1.0, 0.5).with_uncertainty(from_rows(&[&[1.0]]), from_rows(&[&[1.0]]), from_rows(&[&[0.0]]));
        let prior = norm_bound(1, 1, 0.16).unwrap();
        let class = crate::multiplier::transform_prior(
            &crate::lft::UncertaintyStructure::single_full(1, 1),
            &p.b_w,
            &[prior],
        )
        .unwrap();
        let r = synthesize_h2(&p, &class, &SynthesisOptions::default()).unwrap();
        let gamma = r.gamma.unwrap();
        for d in [-0.4, -0.2, 0.0, 0.2, 0.4] {
            let cl = ClosedLoop::new(&p, &r.k, &from_rows(&[&[d]])).unwrap();
            assert!(spectral_radius(&cl.a) < 1.0);
            assert!(h2_norm(&cl).unwrap() <= gamma * (1.0 + 1e-6));
        }
        let nominal = synthesize_h2(&scalar(0.8, 1.0, 0.5), &MultiplierClass::zero(1, 0), &SynthesisOptions::default()).unwrap();
        assert!(nominal.gamma.unwrap() < gamma);
    }

    #[test]
    fn stabilizing_nominal_pair() {
        let p = LftPlant::nominal(from_rows(&[&[1.5, 1.0], &[0.0, 1.2]]), from_rows(&[&[0.0], &[1.0]]));
        let r = synthesize_stabilizing(&p, &MultiplierClass::zero(2, 0), &SynthesisOptions::default()).unwrap();
        assert!(r.gamma.is_none());
        assert!(spectral_radius(&(&p.a + &p.b * &r.k)) < 1.0);
    }

    #[test]
    fn nonzero_feedthrough_rejected() {
        let mut p = scalar(0.5, 1.0, 0.0);
        p.d_ed = from_rows(&[&[1.0]]);
        let r = synthesize_h2(&p, &MultiplierClass::zero(1, 0), &SynthesisOptions::default());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}
