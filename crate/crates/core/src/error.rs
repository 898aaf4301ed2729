use thiserror::Error;

/// Every failure a flowlab computation can report.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("pole hit: |denominator| = {modulus:e} below 1e-14")]
    PoleHit { modulus: f64 },
    #[error("no closed-form antiderivative for {node} node")]
    NotClosedForm { node: &'static str },
    #[error("zero denominator: |F'| below 1e-14")]
    ZeroDenominator,
    #[error("degenerate dilatation: 1 - |q|^2 = {gap:e} below 1e-12")]
    DegenerateDilatation { gap: f64 },
    #[error("adaptive quadrature exceeded depth {depth} on [{t0}, {t1}]")]
    DepthExceeded { depth: u32, t0: f64, t1: f64 },
    #[error("non-finite value encountered ({context})")]
    NonFinite { context: String },
    #[error("time {t} is outside the validity interval: requires {predicate}")]
    OutsideValidity { predicate: String, t: f64 },
    #[error(
        "initial pair is not proportional: |g0 - lambda f0| = {residual:e} at z = {z_re}{z_im:+}i"
    )]
    MismatchedInitialPair { residual: f64, z_re: f64, z_im: f64 },
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("map is not sense-preserving at label a = {a}, b = {b}")]
    SensePreservationViolated { a: f64, b: f64 },
    #[error("basis Gram matrix is singular even for the reduced basis")]
    DegenerateBasis,
    #[error("invalid {field}: {reason}")]
    Invalid { field: String, reason: String },
}

impl FlowError {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        FlowError::Invalid {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn non_finite(context: impl Into<String>) -> Self {
        FlowError::NonFinite {
            context: context.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, FlowError>;
