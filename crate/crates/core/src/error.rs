use std::fmt;

/// Errors shared across the solver stack.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Surface graph leaves the admissible collar (|η| or |η'| too large).
    CollarViolation { max_eta: f64, max_eta_prime: f64, collar_delta: f64 },
    /// 1 + η(θ) ≤ 0 somewhere, or a transported curve cannot be re-graphed.
    NotStarShaped { detail: String },
    /// Iterative solver failed to meet its residual target.
    SolverDiverged { residual: f64, target: f64, iterations: usize },
    /// Neumann-type solve asked for data with non-vanishing surface mean.
    NonZeroMean { mean: f64, tol: f64 },
    /// Taylor coefficient dropped below the configured floor.
    TaylorSignViolation { a_min: f64, c0_min: f64 },
    /// B·n residual exceeds 10x tolerance after projection.
    TangencyViolation { residual: f64, tol: f64 },
    /// Divergence residual exceeds 10x tolerance after projection.
    DivergenceViolation { residual: f64, tol: f64 },
    /// Field transfer asked to extrapolate more than one source cell.
    ExtrapolationTooFar { overshoot: f64, max_allowed: f64 },
    /// Mollification scale too coarse for the collar margin.
    ScaleTooCoarse { scale: f64, margin: f64 },
    /// Fixed-point iteration for the field-line regularization diverged.
    FixedPointDiverged { iterations: usize, last_delta: f64 },
    /// Manufactured-solution catalog lookup failed.
    UnknownExpr { id: String },
    /// Error from a named pipeline stage.
    Stage { stage: &'static str, inner: Box<Error> },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::CollarViolation { max_eta, max_eta_prime, collar_delta } => write!(
                f,
                "collar violation: max|eta|={max_eta:.3e}, max|eta'|={max_eta_prime:.3e}, collar_delta={collar_delta:.3e}"
            ),
            Error::NotStarShaped { detail } => write!(f, "not star-shaped: {detail}"),
            Error::SolverDiverged { residual, target, iterations } => write!(
                f,
                "solver diverged: residual {residual:.3e} > target {target:.3e} after {iterations} iterations"
            ),
            Error::NonZeroMean { mean, tol } => {
                write!(f, "non-zero surface mean {mean:.3e} (tol {tol:.3e})")
            }
            Error::TaylorSignViolation { a_min, c0_min } => {
                write!(f, "Taylor sign violation: min a = {a_min:.3e} < {c0_min:.3e}")
            }
            Error::TangencyViolation { residual, tol } => {
                write!(f, "tangency violation: |B.n| residual {residual:.3e} > {tol:.3e}")
            }
            Error::DivergenceViolation { residual, tol } => {
                write!(f, "divergence violation: residual {residual:.3e} > {tol:.3e}")
            }
            Error::ExtrapolationTooFar { overshoot, max_allowed } => write!(
                f,
                "extrapolation too far: {overshoot:.3e} outside source domain (max {max_allowed:.3e})"
            ),
            Error::ScaleTooCoarse { scale, margin } => {
                write!(f, "mollification scale {scale:.3e} too coarse for margin {margin:.3e}")
            }
            Error::FixedPointDiverged { iterations, last_delta } => write!(
                f,
                "fixed point diverged after {iterations} iterations (last delta {last_delta:.3e})"
            ),
            Error::UnknownExpr { id } => write!(f, "unknown manufactured expression '{id}'"),
            Error::Stage { stage, inner } => write!(f, "{stage}: {inner}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable tag used by the CLI and run logs to name halt reasons.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::CollarViolation { .. } => "collar_violation",
            Error::NotStarShaped { .. } => "not_star_shaped",
            Error::SolverDiverged { .. } => "solver_diverged",
            Error::NonZeroMean { .. } => "non_zero_mean",
            Error::TaylorSignViolation { .. } => "taylor_sign",
            Error::TangencyViolation { .. } => "tangency",
            Error::DivergenceViolation { .. } => "divergence",
            Error::ExtrapolationTooFar { .. } => "extrapolation_too_far",
            Error::ScaleTooCoarse { .. } => "scale_too_coarse",
            Error::FixedPointDiverged { .. } => "fixed_point_diverged",
            Error::UnknownExpr { .. } => "unknown_expr",
            Error::Stage { inner, .. } => inner.tag(),
        }
    }

    pub fn staged(stage: &'static str, inner: Error) -> Error {
        Error::Stage { stage, inner: Box::new(inner) }
    }
}
