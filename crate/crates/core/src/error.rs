//! Error type shared by every module of the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// The matrix handed to the closed-form 2x2 exponential is not of the
    /// form i*(Hermitian) within tolerance, or is not 2x2.
    #[error("matrix does not decompose as i*(a0*I + a.sigma): defect {defect:.3e} > tol {tol:.3e}")]
    NonDecomposable { defect: f64, tol: f64 },

    /// Cumulative quadrature needs at least three samples (two steps).
    #[error("cumulative quadrature needs >= 3 samples, got {got}")]
    GridTooCoarse { got: usize },

    /// Instantaneous spectrum has a gap below tolerance; the adiabatic
    /// machinery refuses rather than perturbing eigenvalues.
    #[error("degenerate spectrum at t = {t}: min gap {gap:.3e} < tol {tol:.3e}")]
    DegenerateSpectrum { t: f64, gap: f64, tol: f64 },

    /// Consecutive eigenvector overlap dropped below 0.5 even after branch
    /// matching; the grid is too coarse or levels genuinely cross faster
    /// than it can resolve.
    #[error("branch swap between t = {t_prev} and t = {t}: best overlap {overlap:.3}")]
    BranchSwapDetected { t_prev: f64, t: f64, overlap: f64 },

    /// Doubling the step count changed the highest series order by more than
    /// the admissible fraction; the grid does not resolve the integrands.
    #[error("order-{order} term under-resolved: grid refinement changed it by {rel_change:.3e}")]
    QuadratureUnderResolved { order: usize, rel_change: f64 },

    #[error("requested order {requested} exceeds the expansion's max order {max}")]
    OrderOutOfRange { requested: usize, max: usize },

    #[error("oracle expects a {expected} model, got {got}")]
    WrongModelKind {
        expected: &'static str,
        got: &'static str,
    },

    /// The exponential-midpoint stepper refuses steps with |E|_max * dt / hbar
    /// above 0.1.
    #[error("time step {dt:.3e} too large: |E|_max * dt / hbar = {resolved:.3} > 0.1")]
    StepTooLarge { dt: f64, resolved: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },

    /// The detuning shift Delta + R^2/(2*Delta) is undefined at Delta = 0.
    #[error("detuning is zero; the second-order detuning shift is undefined")]
    ZeroDetuning,

    /// The secular-slope fit needs enough envelope windows to be meaningful.
    #[error("secular-slope fit needs >= {need} full windows, got {got}")]
    WindowTooShort { need: usize, got: usize },

    #[error("time {t} is not a grid point (span [{t0}, {t1}], {steps} steps)")]
    NotOnGrid { t: f64, t0: f64, t1: f64, steps: usize },
}

impl Error {
    pub fn invalid_param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
