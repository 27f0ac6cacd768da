use heom_core::HeomError;

/// Failure of a CLI run, grouped by exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] HeomError),
}

impl CliError {
    /// Process exit status: 2 configuration, 3 numerical failure, 4 non-convergence.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 2,
            "convergence" => 4,
            _ => 3,
        }
    }

    /// Machine-readable category printed with the message.
    pub fn category(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Output { .. } => "io",
            CliError::Core(e) if e.is_config_error() => "config",
            CliError::Core(e) if e.is_non_convergence() => "convergence",
            CliError::Core(_) => "numerical",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 2);
        assert_eq!(CliError::from(HeomError::NoChannels).exit_code(), 2);
        let nc = HeomError::NotConverged { t_max: 1.0, residual: 1.0 };
        assert_eq!(CliError::from(nc).exit_code(), 4);
        let un = HeomError::Unstable { t: 1.0, norm: 1e9 };
        assert_eq!(CliError::from(un).category(), "numerical");
        assert_eq!(CliError::from(HeomError::ZeroCorrelation).exit_code(), 3);
    }
}
