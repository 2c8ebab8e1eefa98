use crate::linalg::{min_eig, Mat};
use crate::lmi::{SolverOptions, Status};
use crate::multiplier::MultiplierValue;

#[derive(Clone, Debug)]
pub struct SynthesisOptions {
    pub solver: SolverOptions,
    /// Maximize `μ = γ⁻²` in one solve; otherwise bisect on `γ`.
    pub hinf_direct: bool,
    /// Relative gap at which bisection on `γ` stops.
    pub bisection_tol: f64,
}

impl Default for SynthesisOptions {
    fn default() -> Self {
        Self {
            solver: SolverOptions::default(),
            hinf_direct: true,
            bisection_tol: 1e-4,
        }
    }
}

/// A state-feedback gain `u = K x` together with its certificate.
#[derive(Clone, Debug)]
pub struct SynthesisResult {
    pub k: Mat,
    /// `L = K · certificate`, as returned by the solver.
    pub l: Mat,
    /// Lyapunov-type matrix of the dual inequality.
    pub certificate: Mat,
    /// Guaranteed performance level, absent for stabilization only.
    pub gamma: Option<f64>,
    /// Trace bound slack of the H2 design.
    pub gamma_slack: Option<Mat>,
    pub multiplier: MultiplierValue,
    pub nonlinear_multiplier: Option<MultiplierValue>,
    pub status: Status,
    pub residual: f64,
    pub iterations: u32,
}

impl SynthesisResult {
    /// Smallest and largest eigenvalue of the certificate.
    pub fn certificate_range(&self) -> (f64, f64) {
        let ev = crate::linalg::sym_eigenvalues(&self.certificate);
        (ev.first().copied().unwrap_or(0.0), ev.last().copied().unwrap_or(0.0))
    }

    pub(crate) fn certificate_is_positive(&self) -> bool {
        self.certificate.nrows() == 0 || min_eig(&self.certificate) > 0.0
    }
}
