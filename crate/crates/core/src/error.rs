use thiserror::Error;

/// Errors raised by the numerical kernel and the geometry layers built on it.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("adaptive step shrank below machine threshold at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },

    #[error("singular Jacobian after {iterations} Newton iterations (residual {residual:e})")]
    SingularJacobian { iterations: usize, residual: f64 },

    #[error("Newton did not converge in {iterations} iterations (residual {residual:e})")]
    MaxIterations { iterations: usize, residual: f64 },

    #[error("point is off the model manifold (defect {defect:e})")]
    OffManifold { defect: f64 },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("pullback of the contact form is not closed (residual {residual:e})")]
    NotClosed { residual: f64 },

    #[error("slice is not exact: period {period} around factor {factor} of component {component}")]
    NonExact {
        component: usize,
        factor: usize,
        period: f64,
    },

    #[error("operation requires a StandardR model, got {0}")]
    WrongModel(String),

    #[error("{failed} of {total} Newton seeds failed")]
    NewtonFailuresExceeded { failed: usize, total: usize },

    #[error("chord endpoints lie on different components")]
    MixedChord,

    #[error("no primitive available for component {0}")]
    MissingPrimitive(usize),

    #[error("1 + dh(R) = {value} <= 0 along a chord; the rescaled Reeb field is undefined")]
    ReparamDegenerate { value: f64 },

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),

    #[error("unknown contact model `{0}`")]
    UnknownModel(String),

    #[error("mesh: {0}")]
    Mesh(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
