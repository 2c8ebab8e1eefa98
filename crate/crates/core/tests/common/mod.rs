//! Random plants and the checks shared by the property suites and the
//! acceptance run.

#![allow(dead_code)]

pub mod lemmas;
pub mod oracles;

use datarobust::analysis::{verify_robust, DisturbanceSampler, Metric, VerifyInputs, VerifyOptions};
use datarobust::experiments::{generate_trajectory, InputLaw};
use datarobust::lft::{assemble_data_matrices, BlockKind, BlockSpec, LftPlant, UncertaintyStructure};
use datarobust::linalg::{eye, spectral_radius, vstack, Mat};
use datarobust::multiplier::{combine, disturbance_energy, learn_from_data, prior_from_bounds, PriorBound};
use datarobust::synthesis::{synthesize_h2, synthesize_hinf, SynthesisOptions};
use datarobust::Error;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn gaussian(r: usize, c: usize, rng: &mut ChaCha8Rng) -> Mat {
    Mat::from_fn(r, c, |_, _| StandardNormal.sample(rng))
}

/// Random `A` with spectral radius `rho`.
pub fn scaled_a(n: usize, rho: f64, rng: &mut ChaCha8Rng) -> Mat {
    let a = gaussian(n, n, rng);
    let r = spectral_radius(&a).max(1e-3);
    a * (rho / r)
}

/// Structured uncertainty inside its bounds.
pub fn sample_inside(structure: &UncertaintyStructure, bounds: &[PriorBound], fill: f64, rng: &mut ChaCha8Rng) -> Mat {
    let parts: Vec<Mat> = structure
        .blocks
        .iter()
        .zip(bounds)
        .map(|(spec, b)| match (spec.kind, *b) {
            (BlockKind::RepeatedScalar, PriorBound::RepeatedScalar(b)) => {
                eye(spec.nz) * (b.sqrt() * fill * rng.gen_range(-1.0..=1.0))
            }
            (BlockKind::Full, PriorBound::Norm(b)) => {
                let g = gaussian(spec.nw, spec.nz, rng);
                let s = g.clone().svd(false, false).singular_values.max();
                g * (b.sqrt() * fill * rng.gen_range(0.0..=1.0) / s.max(1e-12))
            }
            _ => panic!("unsupported block/bound pair"),
        })
        .collect();
    structure.assemble(&parts)
}

/// Random block structure with matching bounds.
pub fn random_structure(rng: &mut ChaCha8Rng) -> (UncertaintyStructure, Vec<PriorBound>) {
    let count = rng.gen_range(1..=2);
    let mut blocks = Vec::new();
    let mut bounds = Vec::new();
    for _ in 0..count {
        if rng.gen_bool(0.5) {
            let k = rng.gen_range(1..=2);
            blocks.push(BlockSpec::repeated(k));
            bounds.push(PriorBound::RepeatedScalar(rng.gen_range(0.01..0.2)));
        } else {
            blocks.push(BlockSpec::full(rng.gen_range(1..=2), rng.gen_range(1..=2)));
            bounds.push(PriorBound::Norm(rng.gen_range(0.01..0.2)));
        }
    }
    (UncertaintyStructure::new(blocks), bounds)
}

/// A plant with `e = (x, ρu)`, `B_d = I` and the given uncertainty channel.
pub fn random_lft(n: usize, m: usize, structure: &UncertaintyStructure, rng: &mut ChaCha8Rng) -> LftPlant {
    let (nw, nz) = (structure.n_w(), structure.n_z());
    LftPlant::nominal(scaled_a(n, rng.gen_range(0.6..1.1), rng), gaussian(n, m, rng))
        .with_disturbance(eye(n))
        .with_performance(vstack(&[&eye(n), &Mat::zeros(m, n)]), vstack(&[&Mat::zeros(n, m), &(eye(m) * 0.5)]))
        .with_uncertainty(gaussian(n, nw, rng) * 0.5, gaussian(nz, n, rng) * 0.5, gaussian(nz, m, rng) * 0.2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Knowledge {
    Prior,
    Data,
    Combined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Index {
    H2,
    Hinf,
}

#[derive(Clone, Debug, Default)]
pub struct SoundnessSummary {
    pub cases: usize,
    pub optimal: usize,
    pub not_optimal: usize,
    pub candidates: usize,
    pub violations: usize,
    pub failures: Vec<String>,
}

/// Random plant, prior bounds, noisy data, knowledge setting and index per
/// case; every design that succeeds is verified on sampled uncertainties.
pub fn soundness_harness(cases: usize, seed: u64) -> SoundnessSummary {
    use rand::SeedableRng;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = SoundnessSummary::default();
    let opts = SynthesisOptions::default();
    for case in 0..cases {
        let n = rng.gen_range(2..=3);
        let (structure, bounds) = random_structure(&mut rng);
        let plant = random_lft(n, 1, &structure, &mut rng);
        let delta = sample_inside(&structure, &bounds, 1.0, &mut rng);
        let knowledge = [Knowledge::Prior, Knowledge::Data, Knowledge::Combined][case % 3];
        let index = if case % 2 == 0 { Index::H2 } else { Index::Hinf };
        let d_bar = [0.0, 0.01, 0.05][(case / 3) % 3];
        let samples = 40;
        out.cases += 1;

        let traj = match generate_trajectory(
            &plant,
            &delta,
            InputLaw::Uniform(-1.0, 1.0),
            DisturbanceSampler::Box(d_bar),
            samples,
            None,
            case as u64,
        ) {
            Ok(t) => t,
            Err(e) => {
                out.failures.push(format!("case {case}: data generation: {e}"));
                continue;
            }
        };
        let built = (|| -> datarobust::Result<_> {
            let prior = prior_from_bounds(&structure, &plant.b_w, &bounds)?;
            let data = assemble_data_matrices(&plant, &traj)?;
            let energy = DisturbanceSampler::Box(d_bar).energy_bound(plant.n_d(), samples);
            let learnt = learn_from_data(&data, &plant.b_d, &disturbance_energy(samples, plant.n_d(), energy)?)?;
            let class = match knowledge {
                Knowledge::Prior => prior,
                Knowledge::Data => learnt,
                Knowledge::Combined => combine(&prior, &learnt, &plant.b_w, &[])?,
            };
            Ok((class, data))
        })();
        let (class, data) = match built {
            Ok(v) => v,
            Err(e) => {
                out.failures.push(format!("case {case}: class construction: {e}"));
                continue;
            }
        };
        let designed = match index {
            Index::H2 => synthesize_h2(&plant, &class, &opts),
            Index::Hinf => synthesize_hinf(&plant, &class, None, &opts),
        };
        let r = match designed {
            Ok(r) => r,
            Err(Error::Infeasible(_)) | Err(Error::NumericalFailure(_)) | Err(Error::Unbounded(_)) => {
                out.not_optimal += 1;
                continue;
            }
            Err(e) => {
                out.failures.push(format!("case {case}: synthesis: {e}"));
                continue;
            }
        };
        out.optimal += 1;
        let sampler = DisturbanceSampler::Box(d_bar);
        let inputs = VerifyInputs {
            structure: &structure,
            delta_true: Some(&delta),
            prior: (knowledge != Knowledge::Data).then_some(bounds.as_slice()),
            data: (knowledge != Knowledge::Prior).then_some((&data, sampler)),
            gate: (knowledge != Knowledge::Prior).then_some(&class),
            consistency: None,
        };
        let metric = match index {
            Index::H2 => Metric::H2,
            Index::Hinf => Metric::Hinf,
        };
        let vopts = VerifyOptions {
            samples: 60,
            seed: case as u64,
            ..VerifyOptions::default()
        };
        match verify_robust(&plant, &r.k, inputs, metric, r.gamma, &vopts) {
            Ok(report) => {
                out.candidates += report.retained;
                if report.violations() > 0 {
                    out.violations += report.violations();
                    out.failures.push(format!(
                        "case {case} ({knowledge:?}, {index:?}, d_bar {d_bar}): {} violations, worst radius {:.6}, worst norm {:?} vs {:?}",
                        report.violations(),
                        report.worst_spectral_radius,
                        report.worst_norm,
                        r.gamma
                    ));
                }
            }
            Err(e) => out.failures.push(format!("case {case}: verification: {e}")),
        }
    }
    out
}

/// `P = AᵀPA − AᵀPB(R + BᵀPB)⁻¹BᵀPA + Q` by fixed-point iteration.
pub fn dare(a: &Mat, b: &Mat, q: &Mat, r: &Mat) -> Option<Mat> {
    let mut p = q.clone();
    for _ in 0..100_000 {
        let btp = b.transpose() * &p;
        let gain = (r + &btp * b).lu().solve(&(&btp * a))?;
        let next = a.transpose() * &p * a - a.transpose() * &p * b * &gain + q;
        let delta = (&next - &p).amax();
        p = (&next + next.transpose()) * 0.5;
        if delta <= 1e-13 * p.amax().max(1.0) {
            return Some(p);
        }
    }
    None
}
