//! Nominal designs against answers computed another way.

use super::{dare, gaussian, lemmas::Check, scaled_a};
use datarobust::analysis::{h2_norm, hinf_norm, ClosedLoop};
use datarobust::lft::LftPlant;
use datarobust::linalg::{eye, from_rows, vstack, Mat};
use datarobust::lmi::{AffineMatrix, Problem, SolverOptions, Status};
use datarobust::multiplier::MultiplierClass;
use datarobust::synthesis::{synthesize_h2, synthesize_hinf, SynthesisOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `e = (Q^½ x, R^½ u)` with random positive definite weights.
pub fn random_nominal(rng: &mut ChaCha8Rng) -> (LftPlant, Mat, Mat) {
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(1..=2);
    let a = scaled_a(n, rng.gen_range(0.5..1.4), rng);
    let b = gaussian(n, m, rng);
    let b_d = gaussian(n, rng.gen_range(1..=2), rng);
    let cq = gaussian(n, n, rng) * 0.5 + eye(n);
    let rr = eye(m) * rng.gen_range(0.1..1.0);
    let c_e = vstack(&[&cq, &Mat::zeros(m, n)]);
    let d_eu = vstack(&[&Mat::zeros(n, m), &rr]);
    let q = cq.transpose() * &cq;
    let r = rr.transpose() * &rr;
    let plant = LftPlant::nominal(a, b).with_disturbance(b_d).with_performance(c_e, d_eu);
    (plant, q, r)
}

pub fn no_uncertainty(plant: &LftPlant) -> MultiplierClass {
    MultiplierClass::zero(plant.n(), 0)
}

/// H2 designs within `1e-3` relative of `√tr(B_dᵀ P B_d)`, `P` from the DARE.
pub fn h2_against_riccati(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let (plant, q, r) = random_nominal(&mut rng);
        let p = dare(&plant.a, &plant.b, &q, &r).ok_or(format!("case {case}: riccati iteration diverged"))?;
        let oracle = (plant.b_d.transpose() * &p * &plant.b_d).trace().sqrt();
        let res = synthesize_h2(&plant, &no_uncertainty(&plant), &SynthesisOptions::default())
            .map_err(|e| format!("case {case}: {e}"))?;
        let err = (res.gamma.unwrap() - oracle).abs() / oracle;
        worst = worst.max(err);
        if err > 1e-3 {
            return Err(format!("case {case}: relative error {err:.2e}"));
        }
    }
    Ok(format!("{cases} plants, worst relative error {worst:.2e}"))
}

/// Smallest `γ` with `X ≻ 0` and
/// `[[X, AX+BL, B_d, 0], [∗, X, 0, (CX+DL)ᵀ], [∗, ∗, γI, 0], [∗, ∗, ∗, γI]] ≻ 0`.
pub fn primal_hinf(plant: &LftPlant) -> f64 {
    let (n, m, nd, ne) = (plant.n(), plant.m(), plant.n_d(), plant.n_e());
    let mut prob = Problem::new();
    let x = prob.symmetric("X", n);
    let l = prob.matrix("L", m, n);
    let g = prob.scalar("gamma");
    let ax = x.expr().lmul(&plant.a) + l.expr().lmul(&plant.b);
    let cx = x.expr().lmul(&plant.c_e) + l.expr().lmul(&plant.d_eu);
    let gi = |k| AffineMatrix::term(g.offset(), eye(k));
    let z = |r, c| AffineMatrix::zeros(r, c);
    let bd = AffineMatrix::constant(plant.b_d.clone());
    let lmi = AffineMatrix::blocks(vec![
        vec![x.expr(), ax.clone(), bd.clone(), z(n, ne)],
        vec![ax.transpose(), x.expr(), z(n, nd), cx.transpose()],
        vec![bd.transpose(), z(nd, n), gi(nd), z(nd, ne)],
        vec![z(ne, n), cx, z(ne, nd), gi(ne)],
    ]);
    prob.strictly_psd("bounded real", lmi);
    prob.strictly_psd("X", x.expr());
    prob.minimize(g.expr());
    let sol = prob.solve(&SolverOptions::default()).unwrap();
    assert_eq!(sol.status, Status::Optimal, "{}", sol.message);
    sol.value(&g)[(0, 0)]
}

/// H∞ designs within 1% of the primal LMI, and achieved by the gain.
pub fn hinf_against_primal(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let mut worst: f64 = 0.0;
    for case in 0..cases {
        let (plant, _, _) = random_nominal(&mut rng);
        let oracle = primal_hinf(&plant);
        let res = synthesize_hinf(&plant, &no_uncertainty(&plant), None, &SynthesisOptions::default())
            .map_err(|e| format!("case {case}: {e}"))?;
        let g = res.gamma.unwrap();
        let err = (g - oracle).abs() / oracle;
        worst = worst.max(err);
        if err > 0.01 {
            return Err(format!("case {case}: {g} vs {oracle}"));
        }
        let cl = ClosedLoop::new(&plant, &res.k, &Mat::zeros(0, 0)).unwrap();
        let achieved = hinf_norm(&cl, 1e-4).map_err(|e| format!("case {case}: {e}"))?;
        if achieved > g * (1.0 + 1e-4) {
            return Err(format!("case {case}: closed loop {achieved} above {g}"));
        }
    }
    Ok(format!("{cases} plants, worst relative error {worst:.2e}"))
}

/// `x₊ = 0.5x + d, e = x`: squared H2 norm 4/3, peak gain 2.
pub fn scalar_closed_forms() -> Check {
    let cl = ClosedLoop::from_matrices(from_rows(&[&[0.5]]), eye(1), eye(1), Mat::zeros(1, 1)).unwrap();
    let h2 = h2_norm(&cl).unwrap();
    let tol = 1e-6;
    let hinf = hinf_norm(&cl, tol).unwrap();
    let h2_err = (h2 * h2 - 4.0 / 3.0).abs();
    let hinf_err = (hinf - 2.0).abs();
    if h2_err < 1e-6 && hinf_err <= tol * 2.0 {
        Ok(format!("H2² error {h2_err:.1e}, H∞ error {hinf_err:.1e}"))
    } else {
        Err(format!("H2² = {}, H∞ = {hinf}", h2 * h2))
    }
}
