use thiserror::Error;

/// Errors raised by the verification routines.
///
/// Variants split into two families: violated preconditions of the
/// mathematical statements being checked (`is_hypothesis`), and numerical or
/// internal failures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("radius {radius} outside profile domain [0, {max}]")]
    Domain { radius: f64, max: f64 },

    #[error("contract violated: {0}")]
    Contract(String),

    #[error("hypothesis `{clause}` failed: {detail}")]
    Hypothesis { clause: String, detail: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("stereographic projection undefined at the pole (x3 = {x3})")]
    Pole { x3: f64 },

    #[error("Kelvin transform undefined at the origin")]
    Singularity,

    #[error("rearrangement infeasible: mass {mass} exceeds bubble total 8*pi")]
    Infeasible { mass: f64 },

    #[error("degenerate bubble pair: lambda1 = sqrt(8)/R = {lambda} gives a double root")]
    DegeneratePair { lambda: f64 },

    #[error("boundary weight squared {beta} exceeds 8*pi^2; mass roots are complex")]
    ComplexRoots { beta: f64 },

    #[error("radial solve diverged at r = {radius}: {reason}")]
    Divergence { radius: f64, reason: String },

    #[error("grid of {nodes} nodes is too coarse (need at least {required})")]
    Resolution { nodes: usize, required: usize },

    #[error("transform contract unverifiable: residual {residual:e} above tolerance {tolerance:e} ({diagnostics})")]
    Inconsistency {
        residual: f64,
        tolerance: f64,
        diagnostics: String,
    },

    #[error("identity not applicable: beta = {beta} <= 2l + 2 = {threshold}")]
    IdentityNotApplicable { beta: f64, threshold: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn hypothesis(clause: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::Hypothesis {
            clause: clause.into(),
            detail: detail.into(),
        }
    }

    /// True for failures of the caller's inputs (preconditions, contracts,
    /// parameter ranges) as opposed to numerical breakdowns.
    pub fn is_hypothesis(&self) -> bool {
        !matches!(self, Error::Divergence { .. } | Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
