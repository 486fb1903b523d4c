//! Library side of the `sturm` command: verification suites, the phantom
//! computation and the JSON report format.

pub mod phantom;
pub mod report;
pub mod suites;

use thiserror::Error;

pub use phantom::{parse_expansion, run_phantom, PhantomOptions, PhantomReport};
pub use report::{Check, Tolerance, VerificationReport};
pub use suites::{run_suite, Suite, SuiteConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("unsupported regime: {0}")]
    Unsupported(String),
}

impl CliError {
    /// 2 for bad input, 3 for an unsupported regime.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Unsupported(_) => 3,
        }
    }
}

impl From<sturm_core::Error> for CliError {
    fn from(e: sturm_core::Error) -> Self {
        match e {
            sturm_core::Error::UnsupportedRegime(msg) => CliError::Unsupported(msg),
            other => CliError::Usage(other.to_string()),
        }
    }
}
