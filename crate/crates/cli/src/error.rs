use hashlotto::economics::EconError;
use hashlotto::numerics::NumericsError;
use hashlotto::scenario::ConfigError;
use hashlotto::RiskError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    FlagConflict(String),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Econ(#[from] EconError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Risk(RiskError),
    #[error("no feasible pooled allocation for at least one row")]
    Infeasible,
    #[error("{failed} of {total} checks failed")]
    VerifyFailed { failed: usize, total: usize },
}

impl From<RiskError> for CliError {
    fn from(e: RiskError) -> Self {
        match e {
            RiskError::InfeasibleAllocation => CliError::Infeasible,
            RiskError::InvalidParameter { .. } | RiskError::AlphaNotBelowOne(_) => CliError::Usage(e.to_string()),
            RiskError::Numerics(NumericsError::TrialsTooSmall(n)) => {
                CliError::Usage(format!("--trials must be at least {}, got {n}", hashlotto::numerics::MC_MIN_TRIALS))
            }
            other => CliError::Risk(other),
        }
    }
}

impl From<NumericsError> for CliError {
    fn from(e: NumericsError) -> Self {
        RiskError::from(e).into()
    }
}

impl CliError {
    /// 0 success, 1 infeasible or failed verification, 2 bad input.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_)
            | CliError::FlagConflict(_)
            | CliError::Usage(_)
            | CliError::Econ(_)
            | CliError::Io(_)
            | CliError::Csv(_) => 2,
            CliError::Risk(_) | CliError::Infeasible | CliError::VerifyFailed { .. } => 1,
        }
    }
}
