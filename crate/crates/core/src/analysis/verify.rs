use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::ls::structure_basis;
use crate::analysis::norms::{h2_norm, hinf_estimate};
use crate::analysis::ClosedLoop;
use crate::lft::{BlockKind, DataMatrices, LftPlant, UncertaintyStructure};
use crate::linalg::{pinv, Mat};
use crate::lmi::SolverOptions;
use crate::multiplier::{certify_membership, MultiplierClass, PriorBound};

/// How disturbance sequences `D = [d_0 … d_{N−1}]` are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "bound")]
pub enum DisturbanceSampler {
    /// Every entry uniform in `[−b, b]`.
    Box(f64),
    /// Uniform in the ball `‖vec D‖₂ ≤ r`.
    Ball(f64),
    /// Each column uniform in the ball `‖d_k‖₂ ≤ r`.
    PointwiseBall(f64),
}

fn uniform_ball<R: Rng>(dim: usize, r: f64, rng: &mut R) -> Vec<f64> {
    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let radius = r * rng.gen::<f64>().powf(1.0 / dim as f64);
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x *= radius / norm);
    }
    v
}

impl DisturbanceSampler {
    pub fn sample<R: Rng>(&self, n_d: usize, n: usize, rng: &mut R) -> Mat {
        match *self {
            DisturbanceSampler::Box(b) => {
                Mat::from_fn(n_d, n, |_, _| if b > 0.0 { rng.gen_range(-b..=b) } else { 0.0 })
            }
            DisturbanceSampler::Ball(r) => Mat::from_vec(n_d, n, uniform_ball(n_d * n, r, rng)),
            DisturbanceSampler::PointwiseBall(r) => {
                let mut d = Mat::zeros(n_d, n);
                for k in 0..n {
                    let v = uniform_ball(n_d, r, rng);
                    d.column_mut(k).copy_from_slice(&v);
                }
                d
            }
        }
    }

    /// Whether `d` lies in the sampled set, with relative slack `tol`.
    pub fn contains(&self, d: &Mat, tol: f64) -> bool {
        match *self {
            DisturbanceSampler::Box(b) => d.amax() <= b * (1.0 + tol) + tol,
            DisturbanceSampler::Ball(r) => d.norm() <= r * (1.0 + tol) + tol,
            DisturbanceSampler::PointwiseBall(r) => d.column_iter().all(|c| c.norm() <= r * (1.0 + tol) + tol),
        }
    }

    /// The largest admissible `‖vec D‖₂²` for `N` samples.
    pub fn energy_bound(&self, n_d: usize, n: usize) -> f64 {
        match *self {
            DisturbanceSampler::Box(b) => b * b * (n_d * n) as f64,
            DisturbanceSampler::Ball(r) => r * r,
            DisturbanceSampler::PointwiseBall(r) => r * r * n as f64,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Stability,
    H2,
    Hinf,
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub samples: usize,
    pub seed: u64,
    /// Relative slack on the claimed norm bound.
    pub tol: f64,
    pub membership_tol: f64,
    pub solver: SolverOptions,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            samples: 200,
            seed: 0,
            tol: 1e-6,
            membership_tol: 1e-7,
            solver: SolverOptions::default(),
        }
    }
}

/// Where candidate uncertainties come from. Sampled candidates are kept only
/// if `gate` (when given) does not exclude them.
#[derive(Clone, Copy)]
pub struct VerifyInputs<'a> {
    pub structure: &'a UncertaintyStructure,
    pub delta_true: Option<&'a Mat>,
    pub prior: Option<&'a [PriorBound]>,
    pub data: Option<(&'a DataMatrices, DisturbanceSampler)>,
    pub gate: Option<&'a MultiplierClass>,
    /// Also require `D = B_d⁺(M − Δ̃Z)` to reproduce the data and lie in the
    /// sampler's set. Any learnt class contains every such `Δ̃`, so this is a
    /// cheap stand-in when the learnt class is too large to query.
    pub consistency: Option<(&'a DataMatrices, DisturbanceSampler)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CandidateSource {
    True,
    Prior,
    Data,
}

#[derive(Clone, Debug, Serialize)]
pub struct CandidateCheck {
    pub source: CandidateSource,
    /// Admitted by the membership gate.
    pub member: bool,
    pub retained: bool,
    pub spectral_radius: f64,
    pub norm: Option<f64>,
    pub stable: bool,
    pub within_bound: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RobustReport {
    pub metric: Metric,
    pub gamma_claim: Option<f64>,
    pub candidates: usize,
    pub retained: usize,
    pub stability_violations: usize,
    pub norm_violations: usize,
    pub worst_spectral_radius: f64,
    pub worst_norm: Option<f64>,
    /// Whether the true uncertainty passed the membership gate.
    pub true_member: Option<bool>,
    pub checks: Vec<CandidateCheck>,
}

impl RobustReport {
    pub fn violations(&self) -> usize {
        self.stability_violations + self.norm_violations
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    /// `key: value` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s += &format!("metric: {:?}\n", self.metric);
        s += &format!("gamma_claim: {}\n", fmt_opt(self.gamma_claim));
        s += &format!("candidates: {}\n", self.candidates);
        s += &format!("retained: {}\n", self.retained);
        s += &format!("stability_violations: {}\n", self.stability_violations);
        s += &format!("norm_violations: {}\n", self.norm_violations);
        s += &format!("worst_spectral_radius: {:.9}\n", self.worst_spectral_radius);
        s += &format!("worst_norm: {}\n", fmt_opt(self.worst_norm));
        s += &format!(
            "true_member: {}\n",
            self.true_member.map_or("n/a".to_string(), |b| b.to_string())
        );
        s += &format!("passed: {}\n", self.passed());
        s
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("n/a".to_string(), |x| format!("{x:.9}"))
}

fn sample_prior<R: Rng>(structure: &UncertaintyStructure, bounds: &[PriorBound], rng: &mut R) -> Mat {
    let parts: Vec<Mat> = structure
        .blocks
        .iter()
        .zip(bounds)
        .map(|(spec, bound)| match (*bound, spec.kind) {
            (PriorBound::RepeatedScalar(b), _) => {
                let r = b.max(0.0).sqrt();
                Mat::identity(spec.nw, spec.nz) * if r > 0.0 { rng.gen_range(-r..=r) } else { 0.0 }
            }
            (PriorBound::Norm(b), _) => {
                let g = Mat::from_fn(spec.nw, spec.nz, |_, _| StandardNormal.sample(rng));
                let smax = g.clone().svd(false, false).singular_values.max();
                // favour the boundary, where violations are most likely
                let radius = b.max(0.0).sqrt() * rng.gen::<f64>().powf(0.25);
                if smax > 0.0 {
                    g * (radius / smax)
                } else {
                    g
                }
            }
            (PriorBound::None, BlockKind::RepeatedScalar) => {
                let v: f64 = StandardNormal.sample(rng);
                Mat::identity(spec.nw, spec.nz) * v
            }
            (PriorBound::None, BlockKind::Full) => Mat::from_fn(spec.nw, spec.nz, |_, _| StandardNormal.sample(rng)),
        })
        .collect();
    structure.assemble(&parts)
}

/// Samples uncertainties, keeps those admitted by the gate and checks the
/// closed loop under `u = K x` for stability and the claimed norm bound.
pub fn verify_robust(
    plant: &LftPlant,
    k: &Mat,
    inputs: VerifyInputs<'_>,
    metric: Metric,
    gamma_claim: Option<f64>,
    opts: &VerifyOptions,
) -> crate::Result<RobustReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut cands: Vec<(CandidateSource, Mat)> = Vec::new();
    if let Some(d) = inputs.delta_true {
        cands.push((CandidateSource::True, &plant.b_w * d));
    }
    let sources = inputs.prior.is_some() as usize + inputs.data.is_some() as usize;
    let per_source = opts.samples.checked_div(sources).unwrap_or(0);
    if let Some(bounds) = inputs.prior {
        for _ in 0..per_source {
            let d = sample_prior(inputs.structure, bounds, &mut rng);
            cands.push((CandidateSource::Prior, &plant.b_w * d));
        }
    }
    if let Some((data, sampler)) = inputs.data {
        let basis = structure_basis(inputs.structure);
        let cols: Vec<Mat> = basis.iter().map(|e| &plant.b_w * e * &data.z).collect();
        let phi = Mat::from_fn(data.m.len(), cols.len(), |i, j| cols[j].as_slice()[i]);
        let phi_pinv = pinv(&phi);
        for _ in 0..per_source {
            let dist = sampler.sample(plant.n_d(), data.len(), &mut rng);
            let target = &data.m - &plant.b_d * dist;
            let params = &phi_pinv * Mat::from_column_slice(target.len(), 1, target.as_slice());
            let mut delta = Mat::zeros(plant.n_w(), plant.n_z());
            for (e, v) in basis.iter().zip(params.iter()) {
                delta += e * *v;
            }
            cands.push((CandidateSource::Data, &plant.b_w * delta));
        }
    }

    let checks: Vec<CandidateCheck> = cands
        .par_iter()
        .map(|(source, dt)| check(plant, k, *source, dt, &inputs, metric, gamma_claim, opts))
        .collect::<crate::Result<Vec<_>>>()?;

    let retained: Vec<&CandidateCheck> = checks.iter().filter(|c| c.retained).collect();
    let gated = inputs.gate.is_some() || inputs.consistency.is_some();
    let true_member = inputs.delta_true.filter(|_| gated).map(|_| checks[0].member);
    Ok(RobustReport {
        metric,
        gamma_claim,
        candidates: checks.len(),
        retained: retained.len(),
        stability_violations: retained.iter().filter(|c| !c.stable).count(),
        norm_violations: retained.iter().filter(|c| c.stable && !c.within_bound).count(),
        worst_spectral_radius: retained.iter().map(|c| c.spectral_radius).fold(0.0, f64::max),
        worst_norm: retained.iter().filter_map(|c| c.norm).fold(None, |a, b| Some(a.map_or(b, |a: f64| a.max(b)))),
        true_member,
        checks,
    })
}

fn data_consistent(plant: &LftPlant, data: &DataMatrices, sampler: DisturbanceSampler, delta_tilde: &Mat, tol: f64) -> bool {
    let rest = &data.m - delta_tilde * &data.z;
    let d = pinv(&plant.b_d) * &rest;
    let misfit = (&plant.b_d * &d - &rest).norm();
    misfit <= 1e-9 * rest.norm().max(1.0) && sampler.contains(&d, tol)
}

#[allow(clippy::too_many_arguments)]
fn check(
    plant: &LftPlant,
    k: &Mat,
    source: CandidateSource,
    delta_tilde: &Mat,
    inputs: &VerifyInputs<'_>,
    metric: Metric,
    gamma_claim: Option<f64>,
    opts: &VerifyOptions,
) -> crate::Result<CandidateCheck> {
    let consistent = inputs
        .consistency
        .is_none_or(|(data, sampler)| data_consistent(plant, data, sampler, delta_tilde, opts.membership_tol));
    let member = consistent
        && match inputs.gate {
            None => true,
            Some(class) => match certify_membership(delta_tilde, class, opts.membership_tol, &opts.solver) {
                Ok(m) => m.is_member(),
                Err(e) => {
                    warn!("membership query failed, keeping candidate: {e}");
                    true
                }
            },
        };
    // the true system is always simulated; its gate outcome is reported separately
    let retained = member || source == CandidateSource::True;
    let cl = ClosedLoop::with_transformed(plant, k, delta_tilde)?;
    let rho = cl.spectral_radius();
    let stable = rho < 1.0;
    let norm = if !retained || !stable {
        None
    } else {
        match metric {
            Metric::Stability => None,
            Metric::H2 => Some(h2_norm(&cl)?),
            Metric::Hinf => Some(hinf_estimate(&cl).0),
        }
    };
    let within_bound = match (norm, gamma_claim) {
        (Some(v), Some(g)) => v <= g * (1.0 + opts.tol),
        _ => true,
    };
    Ok(CandidateCheck {
        source,
        member,
        retained,
        spectral_radius: rho,
        norm,
        stable,
        within_bound,
    })
}
