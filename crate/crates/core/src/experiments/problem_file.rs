//! JSON problem description and the design pipeline behind `synth`.
//!
//! ```json
//! {
//!   "plant": { "A": [[...]], "B": [[...]], "B_d": [[...]], "B_w": [[...]],
//!              "C_e": [[...]], "D_eu": [[...]], "C_z": [[...]], "D_z": [[...]] },
//!   "uncertainty_blocks": [ { "kind": "full", "nw": 1, "nz": 2 } ],
//!   "prior_multipliers": [ { "type": "full", "bound": 0.16 } ],
//!   "disturbance_model": { "type": "quad", "energy": 0.04 },
//!   "performance": { "objective": "h2" },
//!   "data": { "csv": "traj.csv" },
//!   "verification": { "samples": 200, "sampler": { "kind": "box", "bound": 0.01 } }
//! }
//! ```
//!
//! Matrices are arrays of rows. Missing optional matrices are zero with the
//! dimensions implied by the others. A CSV trajectory has one sample per
//! row, `k, x_0 … x_{n−1}, u_0 … u_{m−1}`; the last row carries the final
//! state and leaves the input fields empty.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::analysis::{verify_robust, DisturbanceSampler, Metric, RobustReport, VerifyInputs, VerifyOptions};
use crate::error::{Error, Result};
use crate::lft::{assemble_data_matrices, validate_plant, BlockSpec, DataMatrices, LftPlant, Trajectory, UncertaintyStructure, RANK_TOL};
use crate::linalg::Mat;
use crate::multiplier::{
    combine, disturbance_convex_hull, disturbance_diagonal, disturbance_energy, disturbance_quadratic,
    hypercube_vertices, learn_from_data, prior_from_bounds, sum_classes, MultiplierClass, PriorBound,
};
use crate::synthesis::{synthesize, Objective, SynthesisOptions, SynthesisResult};

type Rows = Vec<Vec<f64>>;

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub plant: PlantSpec,
    #[serde(default)]
    pub uncertainty_blocks: Vec<BlockSpec>,
    /// One entry per uncertainty block; unbounded blocks when omitted.
    #[serde(default)]
    pub prior_multipliers: Vec<PriorSpec>,
    pub disturbance_model: Option<DisturbanceSpec>,
    pub performance: Option<PerformanceSpec>,
    pub data: Option<DataSpec>,
    pub verification: Option<VerificationSpec>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSpec {
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "B_d")]
    pub b_d: Option<Rows>,
    #[serde(rename = "B_w")]
    pub b_w: Option<Rows>,
    #[serde(rename = "C_e")]
    pub c_e: Option<Rows>,
    #[serde(rename = "D_eu")]
    pub d_eu: Option<Rows>,
    #[serde(rename = "D_ed")]
    pub d_ed: Option<Rows>,
    #[serde(rename = "C_z")]
    pub c_z: Option<Rows>,
    #[serde(rename = "D_z")]
    pub d_z: Option<Rows>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PriorSpec {
    /// `Δ_j Δ_jᵀ ⪯ bound · I`.
    Full { bound: f64 },
    /// `Δ_j = δ I` with `δ² ≤ bound`.
    Repeated { bound: f64 },
    None,
}

impl PriorSpec {
    fn bound(&self) -> PriorBound {
        match *self {
            PriorSpec::Full { bound } => PriorBound::Norm(bound),
            PriorSpec::Repeated { bound } => PriorBound::RepeatedScalar(bound),
            PriorSpec::None => PriorBound::None,
        }
    }
}

/// Disturbance description over the whole recorded sequence.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DisturbanceSpec {
    /// Either explicit `Q`, `S`, `R` or the energy bound `D Dᵀ ⪯ energy · I`.
    Quad {
        #[serde(rename = "Q")]
        q: Option<Rows>,
        #[serde(rename = "S")]
        s: Option<Rows>,
        #[serde(rename = "R")]
        r: Option<Rows>,
        energy: Option<f64>,
    },
    /// `‖d_k‖₂ ≤ bound` for every sample.
    Diag { bound: f64 },
    /// Explicit vertices, or all sign patterns `±hypercube` (small N only).
    ConvexHull {
        vertices: Option<Vec<Rows>>,
        hypercube: Option<f64>,
    },
    Sum { parts: Vec<DisturbanceSpec> },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerformanceSpec {
    pub objective: Option<String>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DataSpec {
    Inline {
        #[serde(rename = "X")]
        x: Rows,
        #[serde(rename = "U")]
        u: Rows,
    },
    Csv {
        csv: PathBuf,
    },
    /// Several experiments, stacked.
    Many(Vec<DataSpec>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationSpec {
    pub samples: Option<usize>,
    /// How data-consistent candidates are drawn; without it only prior and
    /// true candidates are checked.
    pub sampler: Option<DisturbanceSampler>,
    pub true_delta: Option<Rows>,
}

fn parse_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.into(),
        message: message.into(),
    }
}

fn matrix(rows: &Rows, path: &str) -> Result<Mat> {
    let c = rows.first().map_or(0, |r| r.len());
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != c) {
        return Err(parse_err(format!("{path}[{i}]"), format!("row has {} entries, expected {c}", r.len())));
    }
    Ok(Mat::from_fn(rows.len(), c, |i, j| rows[i][j]))
}

/// Optional matrix with some dimensions fixed; absent or empty means zero.
fn sized(rows: &Option<Rows>, path: &str, r: Option<usize>, c: Option<usize>) -> Result<Mat> {
    let m = match rows {
        Some(rows) if !rows.is_empty() => matrix(rows, path)?,
        _ => return Ok(Mat::zeros(r.unwrap_or(0), c.unwrap_or(0))),
    };
    let want = |d: Option<usize>, got: usize| d.is_none_or(|d| d == got);
    if !want(r, m.nrows()) || !want(c, m.ncols()) {
        let show = |d: Option<usize>| d.map_or("*".to_string(), |d| d.to_string());
        return Err(parse_err(
            path,
            format!("expected {}x{}, got {}x{}", show(r), show(c), m.nrows(), m.ncols()),
        ));
    }
    Ok(m)
}

impl ProblemFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            parse_err(if path == "." { String::new() } else { path }, e.into_inner().to_string())
        })
    }

    /// Reads the file; CSV paths in `data` are resolved against its directory.
    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((Self::from_json(&text)?, base))
    }

    pub fn build_plant(&self) -> Result<LftPlant> {
        let p = &self.plant;
        let a = matrix(&p.a, "plant.A")?;
        let n = a.nrows();
        if a.ncols() != n {
            return Err(parse_err("plant.A", format!("must be square, got {}x{}", n, a.ncols())));
        }
        let b = matrix(&p.b, "plant.B")?;
        if b.nrows() != n {
            return Err(parse_err("plant.B", format!("needs {n} rows, got {}", b.nrows())));
        }
        let m = b.ncols();
        let b_d = sized(&p.b_d, "plant.B_d", Some(n), None)?;
        let b_w = sized(&p.b_w, "plant.B_w", Some(n), None)?;
        let c_e = sized(&p.c_e, "plant.C_e", None, Some(n))?;
        let ne = c_e.nrows();
        if b_w.ncols() > 0 && p.c_z.is_none() {
            return Err(parse_err("plant.C_z", "missing field; required when B_w is given"));
        }
        let c_z = sized(&p.c_z, "plant.C_z", None, Some(n))?;
        let nz = c_z.nrows();
        let plant = LftPlant {
            d_eu: sized(&p.d_eu, "plant.D_eu", Some(ne), Some(m))?,
            d_ed: sized(&p.d_ed, "plant.D_ed", Some(ne), Some(b_d.ncols()))?,
            d_z: sized(&p.d_z, "plant.D_z", Some(nz), Some(m))?,
            a,
            b,
            b_d,
            b_w,
            c_e,
            c_z,
            nonlinear: None,
        };
        plant.check_dimensions()?;
        Ok(plant)
    }

    pub fn structure(&self, plant: &LftPlant) -> UncertaintyStructure {
        if self.uncertainty_blocks.is_empty() && plant.n_w() + plant.n_z() > 0 {
            UncertaintyStructure::single_full(plant.n_w(), plant.n_z())
        } else {
            UncertaintyStructure::new(self.uncertainty_blocks.clone())
        }
    }

    pub fn prior_bounds(&self, structure: &UncertaintyStructure) -> Result<Vec<PriorBound>> {
        if self.prior_multipliers.is_empty() {
            return Ok(vec![PriorBound::None; structure.blocks.len()]);
        }
        if self.prior_multipliers.len() != structure.blocks.len() {
            return Err(parse_err(
                "prior_multipliers",
                format!("{} entries for {} uncertainty blocks", self.prior_multipliers.len(), structure.blocks.len()),
            ));
        }
        Ok(self.prior_multipliers.iter().map(PriorSpec::bound).collect())
    }

    pub fn trajectory(&self, base: &Path, plant: &LftPlant) -> Result<Option<Vec<Trajectory>>> {
        let Some(spec) = &self.data else { return Ok(None) };
        let mut out = Vec::new();
        collect_data(spec, base, plant, "data", &mut out)?;
        Ok(Some(out))
    }

    pub fn objective(&self) -> Result<Option<Objective>> {
        match self.performance.as_ref().and_then(|p| p.objective.as_deref()) {
            Some(s) => s.parse().map(Some).map_err(|e: Error| parse_err("performance.objective", e.to_string())),
            None => Ok(None),
        }
    }
}

fn rows_from(m: &Mat) -> Rows {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn collect_data(spec: &DataSpec, base: &Path, plant: &LftPlant, path: &str, out: &mut Vec<Trajectory>) -> Result<()> {
    match spec {
        DataSpec::Inline { x, u } => {
            let x = matrix(x, &format!("{path}.X"))?;
            let u = matrix(u, &format!("{path}.U"))?;
            if x.nrows() != plant.n() || u.nrows() != plant.m() {
                return Err(parse_err(path, format!("X needs {} rows and U {} rows", plant.n(), plant.m())));
            }
            out.push(Trajectory::new(x, u).map_err(|e| parse_err(path, e.to_string()))?);
        }
        DataSpec::Csv { csv } => out.push(read_csv(&base.join(csv), plant.n(), plant.m())?),
        DataSpec::Many(parts) => {
            for (i, p) in parts.iter().enumerate() {
                collect_data(p, base, plant, &format!("{path}[{i}]"), out)?;
            }
        }
    }
    Ok(())
}

/// Reads `k, x…, u…` rows; the header row is optional.
pub fn read_csv(path: &Path, n: usize, m: usize) -> Result<Trajectory> {
    let shown = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| parse_err(&shown, e.to_string()))?;
    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut us: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| parse_err(&shown, e.to_string()))?;
        let fields: Vec<&str> = record.iter().collect();
        if line == 0 && fields.first().is_some_and(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let num = |j: usize| -> Result<Option<f64>> {
            match fields.get(j).copied().unwrap_or("") {
                "" => Ok(None),
                s => s
                    .parse()
                    .map(Some)
                    .map_err(|_| parse_err(format!("{shown}:{}", line + 1), format!("field {} is not a number: `{s}`", j + 1))),
            }
        };
        let x: Vec<f64> = (1..=n)
            .map(|j| num(j)?.ok_or_else(|| parse_err(format!("{shown}:{}", line + 1), format!("missing state field {}", j - 1))))
            .collect::<Result<_>>()?;
        let u: Vec<Option<f64>> = (n + 1..=n + m).map(num).collect::<Result<_>>()?;
        xs.push(x);
        if u.iter().all(Option::is_some) {
            us.push(u.into_iter().flatten().collect());
        } else if u.iter().any(Option::is_some) {
            return Err(parse_err(format!("{shown}:{}", line + 1), "incomplete input fields"));
        }
    }
    if xs.len() != us.len() + 1 {
        return Err(parse_err(
            &shown,
            format!("{} states and {} inputs; the final row must carry only the state", xs.len(), us.len()),
        ));
    }
    let x = Mat::from_fn(n, xs.len(), |i, k| xs[k][i]);
    let u = Mat::from_fn(m, us.len(), |i, k| us[k][i]);
    Trajectory::new(x, u)
}

fn disturbance_class(spec: &DisturbanceSpec, n: usize, n_d: usize, path: &str) -> Result<MultiplierClass> {
    let wrap = |r: Result<MultiplierClass>| r.map_err(|e| parse_err(path, e.to_string()));
    match spec {
        DisturbanceSpec::Quad { q, s, r, energy } => match (q, s, r, energy) {
            (None, None, None, Some(e)) => wrap(disturbance_energy(n, n_d, *e)),
            (Some(q), s, Some(r), None) => {
                let q = matrix(q, &format!("{path}.Q"))?;
                let r = matrix(r, &format!("{path}.R"))?;
                let s = match s {
                    Some(s) => matrix(s, &format!("{path}.S"))?,
                    None => Mat::zeros(q.nrows(), r.nrows()),
                };
                if q.nrows() != n {
                    return Err(parse_err(format!("{path}.Q"), format!("must be {n}x{n} for {n} samples")));
                }
                wrap(disturbance_quadratic(&q, &s, &r))
            }
            _ => Err(parse_err(path, "give either `energy` or `Q` and `R` (with optional `S`)")),
        },
        DisturbanceSpec::Diag { bound } => wrap(disturbance_diagonal(*bound, n, n_d)),
        DisturbanceSpec::ConvexHull { vertices, hypercube } => match (vertices, hypercube) {
            (Some(v), None) => {
                let v = v
                    .iter()
                    .enumerate()
                    .map(|(i, rows)| matrix(rows, &format!("{path}.vertices[{i}]")))
                    .collect::<Result<Vec<_>>>()?;
                if v.iter().any(|m| m.shape() != (n_d, n)) {
                    return Err(parse_err(format!("{path}.vertices"), format!("every vertex must be {n_d}x{n}")));
                }
                wrap(disturbance_convex_hull(&v))
            }
            (None, Some(b)) => wrap(hypercube_vertices(n_d, n, *b).and_then(|v| disturbance_convex_hull(&v))),
            _ => Err(parse_err(path, "give either `vertices` or `hypercube`")),
        },
        DisturbanceSpec::Sum { parts } => {
            let classes = parts
                .iter()
                .enumerate()
                .map(|(i, p)| disturbance_class(p, n, n_d, &format!("{path}.parts[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            wrap(sum_classes(&classes.iter().collect::<Vec<_>>()))
        }
    }
}

/// Everything `synth` produces.
#[derive(Clone, Debug)]
pub struct ProblemOutcome {
    pub objective: Objective,
    pub result: SynthesisResult,
    pub report: RobustReport,
    pub samples: usize,
}

impl ProblemOutcome {
    pub fn to_json(&self) -> serde_json::Value {
        let k = rows_from(&self.result.k);
        let (lo, hi) = self.result.certificate_range();
        serde_json::json!({
            "objective": format!("{:?}", self.objective).to_lowercase(),
            "K": k,
            "gamma": self.result.gamma,
            "status": format!("{:?}", self.result.status),
            "certificate_eigenvalue_range": [lo, hi],
            "samples": self.samples,
            "verification_passed": self.report.passed(),
        })
    }
}

/// Builds the multiplier class, runs the design and verifies the gain.
/// `objective` overrides the one in the file; H2 when neither is given.
pub fn run_problem(
    file: &ProblemFile,
    base: &Path,
    objective: Option<Objective>,
    synthesis: &SynthesisOptions,
    verify: &VerifyOptions,
) -> Result<ProblemOutcome> {
    let plant = file.build_plant()?;
    let structure = file.structure(&plant);
    validate_plant(plant.clone(), structure.clone(), RANK_TOL)?;
    let bounds = file.prior_bounds(&structure)?;
    let prior = prior_from_bounds(&structure, &plant.b_w, &bounds)?;
    let data: Option<DataMatrices> = match file.trajectory(base, &plant)? {
        Some(trajs) => {
            let parts = trajs.iter().map(|t| assemble_data_matrices(&plant, t)).collect::<Result<Vec<_>>>()?;
            Some(DataMatrices::stack(&parts)?)
        }
        None => None,
    };
    let class = match &data {
        Some(d) => {
            let spec = file
                .disturbance_model
                .as_ref()
                .ok_or_else(|| parse_err("disturbance_model", "missing field; required when data is given"))?;
            let dist = disturbance_class(spec, d.len(), plant.n_d(), "disturbance_model")?;
            let learnt = learn_from_data(d, &plant.b_d, &dist)?;
            combine(&prior, &learnt, &plant.b_w, &[])?
        }
        None => prior,
    };
    let objective = objective.or(file.objective()?).unwrap_or(Objective::H2);
    let result = synthesize(&plant, &class, objective, synthesis)?;

    let vspec = file.verification.as_ref();
    let delta_true = vspec
        .and_then(|v| v.true_delta.as_ref())
        .map(|r| matrix(r, "verification.true_delta"))
        .transpose()?;
    let has_prior = bounds.iter().any(|b| *b != PriorBound::None);
    let sampler = vspec.and_then(|v| v.sampler);
    let inputs = VerifyInputs {
        structure: &structure,
        delta_true: delta_true.as_ref(),
        prior: has_prior.then_some(bounds.as_slice()),
        data: data.as_ref().zip(sampler),
        gate: data.is_some().then_some(&class),
        consistency: None,
    };
    let metric = match objective {
        Objective::H2 => Metric::H2,
        Objective::Hinf => Metric::Hinf,
        Objective::Stabilize => Metric::Stability,
    };
    let opts = VerifyOptions {
        samples: vspec.and_then(|v| v.samples).unwrap_or(verify.samples),
        ..verify.clone()
    };
    let report = verify_robust(&plant, &result.k, inputs, metric, result.gamma, &opts)?;
    Ok(ProblemOutcome {
        objective,
        result,
        report,
        samples: data.as_ref().map_or(0, DataMatrices::len),
    })
}
