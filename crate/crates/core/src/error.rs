use thiserror::Error;

use crate::expr::ParseError;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("order-0 jet cannot represent the identity map's derivative")]
    OrderZeroVariable,

    #[error("pole at evaluation point{}", fmt_ctx(.context))]
    PoleAtEvaluationPoint { context: String },

    #[error("derivative of {function} undefined at zero{}", fmt_ctx(.context))]
    DerivativeUndefined {
        function: &'static str,
        context: String,
    },

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("evaluating `{expr}`: {source}")]
    Eval { expr: String, source: Box<Error> },

    #[error("frame degenerate at t={t}: rank deficiency at stage {stage} ({detail})")]
    FrameDegenerate { t: f64, stage: u8, detail: String },

    #[error("initial frame not orthonormal (residual {residual:.3e})")]
    NonOrthonormalFrame { residual: f64 },

    #[error("gauge violated at t={t}: {what} residual {residual:.3e}")]
    GaugeViolated {
        t: f64,
        what: &'static str,
        residual: f64,
    },

    #[error("|X'| vanishes at t={t} (speed {speed:.3e}); unit-speed reparametrization refused")]
    SpeedVanishes { t: f64, speed: f64 },

    #[error("integration step size underflow near t={t}")]
    StepUnderflow { t: f64 },

    #[error("t={t} outside domain [{lo}, {hi}]")]
    OutOfDomain { t: f64, lo: f64, hi: f64 },

    #[error("operation requires gauge state {required}, surface is {actual}")]
    WrongGaugeState {
        required: &'static str,
        actual: &'static str,
    },

    #[error("surface is not a frontal (max |b4| = {max_b4:.3e} on grid)")]
    NotFrontal { max_b4: f64 },

    #[error("point is not singular (lambda = {lambda:.3e})")]
    NotSingular { lambda: f64 },

    #[error("not a front at t={t} (delta = {delta:.3e}); use the cross-cap test")]
    NotAFront { t: f64, delta: f64 },

    #[error("criterion inapplicable: {reason}")]
    CriterionInapplicable { reason: String },

    #[error("{surface} branch condition {condition} violated at t={t} (margin {margin:.3e})")]
    BranchConditionViolated {
        surface: &'static str,
        condition: &'static str,
        t: f64,
        margin: f64,
    },

    #[error("{surface} not applicable: {kappa} vanishes at t={t}")]
    ApplicabilityViolated {
        surface: &'static str,
        kappa: &'static str,
        t: f64,
    },

    #[error("jet order insufficient: need {needed}, have {available}")]
    JetOrderInsufficient { needed: usize, available: usize },

    #[error("cylindrical locus: {0}")]
    Cylindrical(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

fn fmt_ctx(context: &str) -> String {
    if context.is_empty() {
        String::new()
    } else {
        format!(" ({context})")
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Wrap an evaluation error with the offending (sub)expression.
    pub fn in_expr(self, expr: impl Into<String>) -> Error {
        Error::Eval {
            expr: expr.into(),
            source: Box::new(self),
        }
    }
}
