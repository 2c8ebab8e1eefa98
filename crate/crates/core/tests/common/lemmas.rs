//! Multiplier-class properties as checks returning a one-line verdict.

use super::{gaussian, random_lft, random_structure, sample_inside};
use datarobust::analysis::{structure_basis, DisturbanceSampler};
use datarobust::experiments::{generate_trajectory, ExampleA, InputLaw, NoiseModel, Scenario};
use datarobust::lft::{assemble_data_matrices, BlockSpec, LftPlant, UncertaintyStructure};
use datarobust::linalg::{eye, max_eig, pinv, Mat};
use datarobust::lmi::SolverOptions;
use datarobust::multiplier::{
    certify_membership, combine, disturbance_convex_hull, disturbance_diagonal, disturbance_energy, hypercube_vertices,
    learn_from_data, prior_from_bounds, MultiplierClass, PriorBound,
};
use datarobust::synthesis::{synthesize_h2, SynthesisOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Check = Result<String, String>;

const TOL: f64 = 1e-6;

/// Relative slack when comparing two separately solved programs.
pub const ORDER_TOL: f64 = 1e-6;

pub fn member(dt: &Mat, class: &MultiplierClass) -> bool {
    certify_membership(dt, class, TOL, &SolverOptions::default()).unwrap().is_member()
}

/// Least-squares structured `Δ` with `Δ̃ ≈ B_w Δ`, and the residual.
pub fn decompose(dt: &Mat, b_w: &Mat, structure: &UncertaintyStructure) -> (Mat, f64) {
    let basis = structure_basis(structure);
    let cols: Vec<Mat> = basis.iter().map(|e| b_w * e).collect();
    let phi = Mat::from_fn(dt.len(), cols.len(), |i, j| cols[j].as_slice()[i]);
    let target = Mat::from_column_slice(dt.len(), 1, dt.as_slice());
    let theta = pinv(&phi) * &target;
    let mut delta = Mat::zeros(structure.n_w(), structure.n_z());
    for (e, t) in basis.iter().zip(theta.iter()) {
        delta += e * *t;
    }
    let residual = (dt - b_w * &delta).norm();
    (delta, residual)
}

fn within_bounds(delta: &Mat, structure: &UncertaintyStructure, bounds: &[PriorBound], tol: f64) -> bool {
    structure.split(delta).iter().zip(bounds).all(|(d, b)| match *b {
        PriorBound::RepeatedScalar(b) => d[(0, 0)] * d[(0, 0)] <= b + tol,
        PriorBound::Norm(b) => max_eig(&(d * d.transpose())) <= b + tol,
        PriorBound::None => true,
    })
}

fn tall_b_w(n: usize, nw: usize, rng: &mut ChaCha8Rng) -> Mat {
    loop {
        let b = gaussian(n, nw, rng);
        if b.clone().svd(false, false).singular_values.min() > 0.2 {
            return b;
        }
    }
}

/// Every `B_w Δ` with `Δ` inside the bounds is covered by the prior class.
pub fn prior_forward(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..cases {
        let (structure, bounds) = random_structure(&mut rng);
        let nw = structure.n_w();
        let b_w = tall_b_w(nw + rng.gen_range(0..=1), nw, &mut rng);
        let class = prior_from_bounds(&structure, &b_w, &bounds).unwrap();
        let delta = sample_inside(&structure, &bounds, 1.0, &mut rng);
        if !member(&(&b_w * &delta), &class) {
            return Err(format!("case {case}: admissible {delta} rejected"));
        }
    }
    Ok(format!("{cases} admissible uncertainties accepted"))
}

/// Members of a norm-bound prior class factor as `B_w Δ` with `Δ` in bounds.
pub fn prior_reverse(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut accepted, mut rejected) = (0, 0);
    for case in 0..cases {
        let blocks: Vec<BlockSpec> = (0..rng.gen_range(1..=2))
            .map(|_| BlockSpec::full(rng.gen_range(1..=2), rng.gen_range(1..=2)))
            .collect();
        let bounds: Vec<PriorBound> = blocks.iter().map(|_| PriorBound::Norm(rng.gen_range(0.05..0.5))).collect();
        let structure = UncertaintyStructure::new(blocks);
        let nw = structure.n_w();
        let b_w = tall_b_w(nw + rng.gen_range(0..=1), nw, &mut rng);
        let class = prior_from_bounds(&structure, &b_w, &bounds).unwrap();
        let dt = match case % 3 {
            0 => &b_w * sample_inside(&structure, &bounds, 1.0, &mut rng),
            1 => &b_w * sample_inside(&structure, &bounds, 3.0, &mut rng),
            _ => gaussian(b_w.nrows(), structure.n_z(), &mut rng) * 0.2,
        };
        if member(&dt, &class) {
            accepted += 1;
            let (delta, residual) = decompose(&dt, &b_w, &structure);
            if residual >= 1e-6 {
                return Err(format!("case {case}: member with factorization residual {residual:.2e}"));
            }
            if !within_bounds(&delta, &structure, &bounds, 1e-6) {
                return Err(format!("case {case}: member factors outside the bounds: {delta}"));
            }
        } else {
            rejected += 1;
        }
    }
    if accepted < cases / 4 || rejected < cases / 6 {
        return Err(format!("uninformative sample: {accepted} accepted, {rejected} rejected"));
    }
    Ok(format!("{accepted} members factor inside the bounds, {rejected} rejected"))
}

/// A repeated-scalar class with `h₁₁ < 0` admits only `δ I`.
pub fn repeated_scalar_structure(cases: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let structure = UncertaintyStructure::new(vec![BlockSpec::repeated(2)]);
    let class = prior_from_bounds(&structure, &eye(2), &[PriorBound::RepeatedScalar(0.1)]).unwrap();
    let mut full_members = 0;
    for _ in 0..cases {
        let d: f64 = rng.gen_range(-0.3..0.3);
        if !member(&(eye(2) * d), &class) {
            return Err(format!("{d} I rejected"));
        }
        let mut off = eye(2) * d;
        off[(0, 1)] += rng.gen_range(0.01..0.1) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        if member(&off, &class) {
            return Err(format!("off-diagonal candidate accepted: {off}"));
        }
        let mut spread = eye(2) * d;
        spread[(1, 1)] += rng.gen_range(0.01..0.1);
        if member(&spread, &class) {
            return Err(format!("diagonal spread accepted: {spread}"));
        }
        let full = gaussian(2, 2, &mut rng) * 0.15;
        if member(&full, &class) {
            full_members += 1;
            let mean = 0.5 * (full[(0, 0)] + full[(1, 1)]);
            if (&full - eye(2) * mean).amax() >= 1e-6 {
                return Err(format!("non-scalar candidate accepted: {full}"));
            }
        }
    }
    Ok(format!("{cases} scalar, off-diagonal and spread candidates classified, {full_members} random members"))
}

fn noisy_data(case: u64, samples: usize, b: f64, rng: &mut ChaCha8Rng) -> (LftPlant, UncertaintyStructure, Vec<PriorBound>, Mat, datarobust::lft::DataMatrices) {
    let (structure, bounds) = random_structure(rng);
    let plant = random_lft(2, 1, &structure, rng);
    let delta = sample_inside(&structure, &bounds, 0.9, rng);
    let traj = generate_trajectory(
        &plant,
        &delta,
        InputLaw::Uniform(-1.0, 1.0),
        DisturbanceSampler::Box(b),
        samples,
        None,
        case,
    )
    .unwrap();
    let data = assemble_data_matrices(&plant, &traj).unwrap();
    (plant, structure, bounds, delta, data)
}

/// The uncertainty behind the data is in every learnt class.
pub fn truth_in_learnt(cases: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let b = 0.05;
    for case in 0..cases {
        let samples = if case % 3 == 2 { 3 } else { 20 };
        let (plant, _, _, delta, data) = noisy_data(case, samples, b, &mut rng);
        let n_d = plant.n_d();
        let disturbance = match case % 3 {
            0 => disturbance_energy(samples, n_d, b * b * (n_d * samples) as f64),
            1 => disturbance_diagonal((n_d as f64).sqrt() * b, samples, n_d),
            _ => disturbance_convex_hull(&hypercube_vertices(n_d, samples, b).unwrap()),
        }
        .unwrap();
        let learnt = learn_from_data(&data, &plant.b_d, &disturbance).unwrap();
        let res = certify_membership(&(&plant.b_w * &delta), &learnt, 1e-8, &SolverOptions::default()).unwrap();
        if !res.is_member() {
            return Err(format!("case {case}: truth refuted: {res:?}"));
        }
    }
    Ok(format!("truth covered in {cases} quadratic, diagonal and hull classes"))
}

/// Combined members are prior members and learnt members; the truth is one.
pub fn combined_ordering(cases: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let (mut members, mut excluded) = (0, 0);
    let b = 0.05;
    let samples = 15;
    for case in 0..cases {
        let (plant, structure, bounds, delta, data) = noisy_data(case, samples, b, &mut rng);
        let n_d = plant.n_d();
        let prior = prior_from_bounds(&structure, &plant.b_w, &bounds).unwrap();
        let energy = disturbance_energy(samples, n_d, b * b * (n_d * samples) as f64).unwrap();
        let learnt = learn_from_data(&data, &plant.b_d, &energy).unwrap();
        let combined = combine(&prior, &learnt, &plant.b_w, &[]).unwrap();
        if !member(&(&plant.b_w * &delta), &combined) {
            return Err(format!("case {case}: truth outside the combined class"));
        }
        let basis = structure_basis(&structure);
        for k in 0..10 {
            let scale = 10f64.powf(-3.0 + 0.3 * k as f64);
            let mut d = delta.clone();
            for e in &basis {
                d += e * (scale * rng.gen_range(-1.0..1.0));
            }
            let dt = &plant.b_w * &d;
            if member(&dt, &combined) {
                members += 1;
                if !member(&dt, &prior) || !member(&dt, &learnt) {
                    return Err(format!("case {case}: combined member outside a summand class"));
                }
            } else {
                excluded += 1;
            }
        }
    }
    if members == 0 || excluded == 0 {
        return Err(format!("uninformative sample: {members} members, {excluded} excluded"));
    }
    Ok(format!("{members} combined members lie in both summands, {excluded} excluded"))
}

fn h2(plant: &LftPlant, class: &MultiplierClass, opts: &SynthesisOptions) -> Option<f64> {
    synthesize_h2(plant, class, opts).ok().and_then(|r| r.gamma)
}

/// `γ(c₁ ⊕ c₂) ≤ min(γ(c₁), γ(c₂))`.
pub fn sum_monotone() -> Check {
    let opts = SynthesisOptions::default();
    let ex = ExampleA::new();
    let mut compared = 0;
    for (seed, d_bar) in [(1, 0.0), (2, 0.005), (3, 0.01), (4, 0.05), (5, 0.1)] {
        let traj = ex.trajectory(100, d_bar, seed).unwrap();
        let data = ex.data(&traj).unwrap();
        let noise = NoiseModel::Quadratic.class(d_bar, 100, ex.plant.n_d()).unwrap();
        let learnt = learn_from_data(&data, &ex.plant.b_d, &noise).unwrap();
        let prior = ex.prior_class().unwrap();
        let sum = combine(&prior, &learnt, &ex.plant.b_w, &[]).unwrap();
        let g_sum = h2(&ex.plant, &sum, &opts).ok_or(format!("d_bar {d_bar}: combined design failed"))?;
        for g in [h2(&ex.plant, &prior, &opts), h2(&ex.plant, &learnt, &opts)].into_iter().flatten() {
            compared += 1;
            if g_sum > g * (1.0 + ORDER_TOL) {
                return Err(format!("d_bar {d_bar}: sum {g_sum} above summand {g}"));
            }
        }
    }
    Ok(format!("{compared} sum/summand pairs ordered"))
}

/// Longer data with diagonal multipliers never raises `γ`.
pub fn diag_length_monotone() -> Check {
    let opts = SynthesisOptions::default();
    let ex = ExampleA::new();
    let d_bar = 0.15;
    let traj = ex.trajectory(40, d_bar, 7).unwrap();
    let mut last = f64::INFINITY;
    for n in [5, 10, 20, 40] {
        let (plant, class, _) = ex.scenario(Scenario::Combined, &traj.truncate(n), NoiseModel::Diagonal, d_bar).unwrap();
        let g = h2(&plant, &class, &opts).ok_or(format!("N = {n}: design failed"))?;
        if g > last * (1.0 + ORDER_TOL) {
            return Err(format!("N = {n}: {g} above {last}"));
        }
        last = g;
    }
    Ok("gamma non-increasing over N = 5..40".into())
}

/// Looser noise bounds on the same data never lower `γ`.
pub fn noise_monotone() -> Check {
    let opts = SynthesisOptions::default();
    let ex = ExampleA::new();
    let traj = ex.trajectory(100, 0.05, 8).unwrap();
    let mut last = 0.0;
    for d_bar in [0.05, 0.1, 0.2] {
        let (plant, class, _) = ex.scenario(Scenario::Combined, &traj, NoiseModel::Quadratic, d_bar).unwrap();
        let g = h2(&plant, &class, &opts).ok_or(format!("d_bar {d_bar}: design failed"))?;
        if g < last * (1.0 - ORDER_TOL) {
            return Err(format!("d_bar {d_bar}: {g} below {last}"));
        }
        last = g;
    }
    Ok("gamma non-decreasing in the assumed noise level".into())
}

/// A larger strict margin never lowers `γ`.
pub fn margin_monotone() -> Check {
    let ex = ExampleA::new();
    let class = ex.prior_class().unwrap();
    let mut last = 0.0;
    for eps in [1e-7, 1e-5, 1e-3] {
        let mut opts = SynthesisOptions::default();
        opts.solver.strict_eps = eps;
        let g = h2(&ex.plant, &class, &opts).ok_or(format!("eps {eps}: design failed"))?;
        if g < last * (1.0 - ORDER_TOL) {
            return Err(format!("eps {eps}: {g} below {last}"));
        }
        last = g;
    }
    Ok("gamma non-decreasing in the strict margin".into())
}
