//! Solver backends and the post-solve feasibility check.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, PSDTriangleConeT, SolverStatus,
    SupportedConeT, ZeroConeT,
};
use log::debug;

use crate::error::{Error, Result};
use crate::lmi::expr::AffineMatrix;
use crate::lmi::problem::{Cone, Problem, Sense, StandardForm, Var};
use crate::linalg::Mat;

/// Relative objective relaxations tried after an inaccurate optimum.
const BACKOFF: [f64; 4] = [1e-6, 1e-4, 1e-3, 1e-2];

/// Environment variable naming the backend; only `clarabel` is built in.
pub const SOLVER_ENV: &str = "DATAROBUST_SOLVER";

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub feas_tol: f64,
    pub gap_tol: f64,
    /// Margin for strict inequalities, applied after block scaling.
    pub strict_eps: f64,
    pub max_iter: u32,
    /// Let the backend rescale rows and columns. Off by default: blocks are
    /// already scaled at compile time, and extra equilibration made the
    /// degenerate data-driven programs stall.
    pub equilibrate: bool,
    pub verbose: bool,
    /// Write each compiled program to this file in triplet text form before
    /// solving. Later solves overwrite earlier ones.
    pub dump: Option<std::path::PathBuf>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-8,
            gap_tol: 1e-8,
            strict_eps: 1e-7,
            max_iter: 200,
            equilibrate: false,
            verbose: false,
            dump: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    NumericalFailure,
    Unbounded,
}

/// What a backend reports for a standard-form problem.
#[derive(Clone, Debug)]
pub struct BackendOutput {
    pub status: BackendStatus,
    pub x: Vec<f64>,
    pub iterations: u32,
    pub message: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendStatus {
    Solved,
    /// Solved to reduced accuracy; still subject to the residual check.
    AlmostSolved,
    /// Stopped early; the last iterate is still subject to the residual check.
    Stalled,
    PrimalInfeasible,
    DualInfeasible,
    Failed,
}

/// Narrow contract: standard conic form in, status and primal point out.
pub trait ConicBackend: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, sf: &StandardForm, opts: &SolverOptions) -> BackendOutput;
}

pub struct ClarabelBackend;

impl ConicBackend for ClarabelBackend {
    fn name(&self) -> &'static str {
        "clarabel"
    }

    fn solve(&self, sf: &StandardForm, opts: &SolverOptions) -> BackendOutput {
        let (mut ri, mut ci, mut vi) = (Vec::new(), Vec::new(), Vec::new());
        for &(i, j, v) in &sf.a {
            ri.push(i);
            ci.push(j);
            vi.push(v);
        }
        let a = CscMatrix::new_from_triplets(sf.m, sf.n, ri, ci, vi);
        let p = CscMatrix::zeros((sf.n, sf.n));
        let cones: Vec<SupportedConeT<f64>> = sf
            .cones
            .iter()
            .map(|c| match *c {
                Cone::Zero(k) => ZeroConeT(k),
                Cone::Nonnegative(k) => NonnegativeConeT(k),
                Cone::Psd(s) => PSDTriangleConeT(s),
            })
            .collect();
        let settings = DefaultSettingsBuilder::default()
            .verbose(opts.verbose)
            .max_iter(opts.max_iter)
            .tol_feas(opts.feas_tol)
            .tol_gap_abs(opts.gap_tol)
            .tol_gap_rel(opts.gap_tol)
            .equilibrate_enable(opts.equilibrate)
            .build()
            .expect("valid solver settings");
        let mut solver = match DefaultSolver::new(&p, &sf.q, &a, &sf.b, &cones, settings) {
            Ok(s) => s,
            Err(e) => {
                return BackendOutput {
                    status: BackendStatus::Failed,
                    x: vec![0.0; sf.n],
                    iterations: 0,
                    message: format!("setup failed: {e:?}"),
                }
            }
        };
        solver.solve();
        let sol = &solver.solution;
        let status = match sol.status {
            SolverStatus::Solved => BackendStatus::Solved,
            SolverStatus::AlmostSolved => BackendStatus::AlmostSolved,
            SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => BackendStatus::PrimalInfeasible,
            SolverStatus::DualInfeasible | SolverStatus::AlmostDualInfeasible => BackendStatus::DualInfeasible,
            // a stalled run may still have produced a usable point
            SolverStatus::MaxIterations | SolverStatus::InsufficientProgress => BackendStatus::Stalled,
            _ => BackendStatus::Failed,
        };
        BackendOutput {
            status,
            x: sol.x.clone(),
            iterations: sol.iterations,
            message: format!("{:?}", sol.status),
        }
    }
}

pub fn backend_by_name(name: &str) -> Result<Box<dyn ConicBackend>> {
    if name.is_empty() || name.eq_ignore_ascii_case("clarabel") {
        Ok(Box::new(ClarabelBackend))
    } else {
        Err(Error::InvalidArgument(format!("unknown solver backend `{name}`")))
    }
}

/// Backend selected by [`SOLVER_ENV`], defaulting to Clarabel.
pub fn backend_from_env() -> Result<Box<dyn ConicBackend>> {
    backend_by_name(&std::env::var(SOLVER_ENV).unwrap_or_default())
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub status: Status,
    /// Original decision coordinates.
    pub values: Vec<f64>,
    pub objective: Option<f64>,
    /// Worst relative violation of the unshifted constraints.
    pub residual: f64,
    pub iterations: u32,
    pub message: String,
}

impl Solution {
    pub fn value(&self, v: &Var) -> Mat {
        v.value(&self.values)
    }

    pub fn scalar(&self, v: &Var) -> f64 {
        v.value(&self.values)[(0, 0)]
    }

    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    /// Turns a non-optimal status into the matching error.
    pub fn into_result(self, what: &str) -> Result<Solution> {
        match self.status {
            Status::Optimal => Ok(self),
            Status::Infeasible => Err(Error::Infeasible(what.to_string())),
            Status::Unbounded => Err(Error::Unbounded(what.to_string())),
            Status::NumericalFailure => Err(Error::NumericalFailure(format!(
                "{what}: {} (residual {:.3e})",
                self.message, self.residual
            ))),
        }
    }
}

impl Problem {
    /// Solves with the backend chosen from the environment.
    pub fn solve(&self, opts: &SolverOptions) -> Result<Solution> {
        let backend = backend_from_env()?;
        self.solve_with(backend.as_ref(), opts)
    }

    /// Solves once; if the point misses the feasibility tolerance but the
    /// backend reports convergence, the optimum is probably not attained.
    /// The objective is then turned into a constraint a little worse than
    /// the value reached and the feasibility problem is solved instead.
    /// If the backend did not converge at all, one retry is made with the
    /// equilibration setting flipped.
    pub fn solve_with(&self, backend: &dyn ConicBackend, opts: &SolverOptions) -> Result<Solution> {
        let (mut first, mut raw) = self.solve_once(backend, opts)?;
        if first.status == Status::NumericalFailure && matches!(raw, BackendStatus::Stalled | BackendStatus::Failed) {
            let flipped = SolverOptions {
                equilibrate: !opts.equilibrate,
                ..opts.clone()
            };
            let (second, raw2) = self.solve_once(backend, &flipped)?;
            if second.status != Status::NumericalFailure || matches!(raw2, BackendStatus::Solved | BackendStatus::AlmostSolved) {
                debug!("retry with equilibration {} gave {:?}", flipped.equilibrate, second.status);
                (first, raw) = (second, raw2);
            }
        }
        let converged = matches!(raw, BackendStatus::Solved | BackendStatus::AlmostSolved);
        let (Some(obj), Status::NumericalFailure, true) = (self.objective(), first.status, converged) else {
            return Ok(first);
        };
        let reached = obj.expr.eval(&first.values)[(0, 0)];
        for &delta in &BACKOFF {
            let slack = delta * reached.abs() + 1e-9;
            let mut relaxed = self.clone();
            relaxed.clear_objective();
            let bound = AffineMatrix::scalar_constant(match obj.sense {
                Sense::Minimize => reached + slack,
                Sense::Maximize => reached - slack,
            });
            match obj.sense {
                Sense::Minimize => relaxed.psd("objective back-off", bound - obj.expr.clone()),
                Sense::Maximize => relaxed.psd("objective back-off", obj.expr.clone() - bound),
            }
            let (mut sol, _) = relaxed.solve_once(backend, opts)?;
            if sol.status == Status::Optimal {
                debug!("objective backed off by {delta:e} relative");
                sol.objective = self.objective_value(&sol.values);
                sol.message = format!("{} after back-off {delta:e}", sol.message);
                return Ok(sol);
            }
        }
        Ok(first)
    }

    fn solve_once(&self, backend: &dyn ConicBackend, opts: &SolverOptions) -> Result<(Solution, BackendStatus)> {
        let sf = self.compile(opts.strict_eps)?;
        if let Some(path) = &opts.dump {
            std::fs::write(path, sf.to_triplet_text())?;
        }
        let out = backend.solve(&sf, opts);
        let values = sf.extract(&out.x);
        let residual = self.max_residual(&values);
        // a strict block must hold at the returned point itself, measured
        // against the terms in play rather than the compile-time scale
        let margin = self.min_strict_margin(&values);
        let strict_ok = margin.is_none_or(|m| m > 0.0);
        debug!(
            "{}: {} after {} iterations, residual {:.2e}, strict margin {:?}",
            backend.name(),
            out.message,
            out.iterations,
            residual,
            margin
        );
        let status = match out.status {
            BackendStatus::Solved | BackendStatus::AlmostSolved | BackendStatus::Stalled
                if residual <= opts.feas_tol && strict_ok =>
            {
                Status::Optimal
            }
            BackendStatus::Solved | BackendStatus::AlmostSolved | BackendStatus::Stalled | BackendStatus::Failed => {
                Status::NumericalFailure
            }
            BackendStatus::PrimalInfeasible => Status::Infeasible,
            BackendStatus::DualInfeasible => Status::Unbounded,
        };
        let objective = if status == Status::Optimal {
            self.objective_value(&values)
        } else {
            None
        };
        Ok((
            Solution {
                status,
                values,
                objective,
                residual,
                iterations: out.iterations,
                message: out.message,
            },
            out.status,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lmi::expr::AffineMatrix;
    use crate::linalg::{col, eye, from_rows};

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn scaled_identity_bound() {
        let mut p = Problem::new();
        let x = p.scalar("x");
        p.psd("xI >= I", AffineMatrix::term(x.offset(), eye(2)) - AffineMatrix::identity(2));
        p.minimize(x.expr());
        let s = p.solve(&opts()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.scalar(&x) - 1.0).abs() < 1e-6);
    }

    fn lyapunov(a: f64) -> Status {
        let mut p = Problem::new();
        let pv = p.symmetric("P", 1);
        let a = from_rows(&[&[a]]);
        p.strictly_psd("P > 0", pv.expr());
        p.strictly_nsd("A'PA - P < 0", pv.expr().congruence(&a) - pv.expr());
        // normalize so the cone does not collapse to zero
        p.equal("P = 1", pv.expr() - AffineMatrix::identity(1));
        p.solve(&opts()).unwrap().status
    }

    #[test]
    fn lyapunov_scalar_stable_and_unstable() {
        assert_eq!(lyapunov(0.5), Status::Optimal);
        assert_eq!(lyapunov(1.1), Status::Infeasible);
    }

    #[test]
    fn trace_over_rank_one_bound() {
        let mut p = Problem::new();
        let g = p.symmetric("G", 2);
        let v = col(&[1.0, 1.0]);
        p.psd("G >= vv'", g.expr() - AffineMatrix::constant(&v * v.transpose()));
        p.minimize(g.expr().trace());
        let s = p.solve(&opts()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!((s.objective.unwrap() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut p = Problem::new();
        let x = p.scalar("x");
        p.psd("x >= 1", x.expr() - AffineMatrix::scalar_constant(1.0));
        p.nsd("x <= 0", x.expr());
        assert_eq!(p.solve(&opts()).unwrap().status, Status::Infeasible);
    }

    #[test]
    fn feasibility_reports_residual() {
        let mut p = Problem::new();
        let x = p.symmetric("X", 2);
        p.strictly_psd("X > 0", x.expr());
        p.psd("X <= I", AffineMatrix::identity(2) - x.expr());
        let s = p.solve(&opts()).unwrap();
        assert_eq!(s.status, Status::Optimal);
        assert!(s.objective.is_none());
        assert!(s.residual <= opts().feas_tol);
        assert!(crate::linalg::min_eig(&s.value(&x)) > 0.0);
    }

    #[test]
    fn unknown_backend_is_rejected() {
        assert!(backend_by_name("clarabel").is_ok());
        assert!(matches!(backend_by_name("nope"), Err(Error::InvalidArgument(_))));
    }
}
