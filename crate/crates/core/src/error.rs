use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("validation: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("domain: {0}")]
    Domain(String),

    #[error("precondition: {0}")]
    Precondition(String),

    #[error("singular mass matrix at t={t} (condition {cond:.3e}), state {state:?}")]
    Singular { t: f64, cond: f64, state: Vec<f64> },

    #[error("non-finite value at t={t}")]
    Divergence { t: f64 },

    #[error("step size {h:.3e} below minimum at t={t}")]
    StepUnderflow { t: f64, h: f64, state: Vec<f64> },

    #[error("implicit step failed to converge at t={t}")]
    ImplicitStep { t: f64 },

    #[error("step budget of {max_steps} exhausted at t={t}")]
    Budget { t: f64, max_steps: usize },

    #[error("io: {0}")]
    Io(String),
}

impl SimError {
    /// Process exit code used by the command line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            SimError::Validation(_) | SimError::Parse(_) | SimError::Domain(_) | SimError::Precondition(_) => 2,
            SimError::Singular { .. }
            | SimError::Divergence { .. }
            | SimError::StepUnderflow { .. }
            | SimError::ImplicitStep { .. } => 3,
            SimError::Budget { .. } => 4,
            SimError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SimError::Validation(_) => "validation",
            SimError::Parse(_) => "parse",
            SimError::Domain(_) => "domain",
            SimError::Precondition(_) => "precondition",
            SimError::Singular { .. } => "singular",
            SimError::Divergence { .. } => "divergence",
            SimError::StepUnderflow { .. } => "step_underflow",
            SimError::ImplicitStep { .. } => "implicit_step",
            SimError::Budget { .. } => "budget",
            SimError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for SimError {
    fn from(e: std::io::Error) -> Self {
        SimError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, SimError>;
