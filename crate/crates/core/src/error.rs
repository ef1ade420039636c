use thiserror::Error;

/// Unified error type for the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid potential spec: {0}")]
    InvalidSpec(String),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("domain error: {0}")]
    Domain(String),

    /// The boundary series only converges for pressure values strictly above
    /// t * max(a, c).
    #[error("series diverges: pressure {value} is not above the convergence bound {bound}")]
    DivergentSeries { value: f64, bound: f64 },

    /// No sign change found when bracketing the pressure root; the potential
    /// spec is numerically unusable (for valid inputs this cannot happen).
    #[error("failed to bracket the pressure root")]
    BracketFailure,

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: u64, residual: f64 },

    /// Zero-temperature analysis requires the two sequence limits to agree.
    #[error("limit hypothesis fails: a = {a} differs from c = {c}")]
    HypothesisViolation { a: f64, c: f64 },

    /// A periodic orbit attains the maximal ergodic average, so the
    /// boundary-concentration hypothesis behind the limit formulas fails.
    #[error("periodic orbit (0^{} 1^{})^inf attains the maximum", j0 + 1, j1 + 1)]
    PeriodicAttainer { j0: u64, j1: u64 },

    #[error("potential is not in the non-positive class: {0}")]
    NotNonPositive(String),

    #[error("no candidate satisfies the limit-rate equation")]
    NoCandidate,

    #[error("multiple distinct candidates satisfy the limit-rate equation: {0:?}")]
    MultipleCandidates(Vec<f64>),

    #[error("cannot reduce cylinder word {word:?} within refinement depth {depth}")]
    ReductionFailure { word: String, depth: u32 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code: 2 for input/validation problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidSpec(_)
            | Error::InvalidWord(_)
            | Error::Domain(_)
            | Error::HypothesisViolation { .. }
            | Error::PeriodicAttainer { .. }
            | Error::NotNonPositive(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::DivergentSeries { .. }
            | Error::BracketFailure
            | Error::NonConvergence { .. }
            | Error::NoCandidate
            | Error::MultipleCandidates(_)
            | Error::ReductionFailure { .. }
            | Error::DegenerateFit(_) => 3,
        }
    }
}
