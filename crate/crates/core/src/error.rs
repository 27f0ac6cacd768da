use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeomError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("channel `{0}` is disabled")]
    DisabledChannel(&'static str),

    #[error("no decoherence channel is enabled")]
    NoChannels,

    #[error("hierarchy has {requested} indices, above the configured maximum of {max}")]
    TooManyIndices { requested: u128, max: usize },

    #[error(
        "integration became unstable at t = {t} (stack norm {norm:.3e}); \
         try a smaller dt or a larger hierarchy depth"
    )]
    Unstable { t: f64, norm: f64 },

    #[error("steady state not reached by t = {t_max} (relative residual {residual:.3e})")]
    NotConverged { t_max: f64, residual: f64 },

    #[error("steady-state null space is degenerate: {0}")]
    DegenerateNullSpace(String),

    #[error("correlation function is identically zero; cannot normalize spectrum")]
    ZeroCorrelation,

    #[error("at least 100 trajectories are required, got {0}")]
    TooFewTrajectories(usize),
}

impl HeomError {
    /// True for failures caused by the integration horizon rather than the inputs.
    pub fn is_non_convergence(&self) -> bool {
        matches!(self, HeomError::NotConverged { .. })
    }

    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            HeomError::InvalidParameter(_)
                | HeomError::DisabledChannel(_)
                | HeomError::NoChannels
                | HeomError::TooFewTrajectories(_)
                | HeomError::TooManyIndices { .. }
        )
    }
}

pub type Result<T, E = HeomError> = std::result::Result<T, E>;
