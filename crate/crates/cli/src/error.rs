use anh_spectra::hmetric::{SpecError, SymbolClassError};
use anh_spectra::liegrp::GroupError;
use anh_spectra::oscspec::OscError;
use anh_spectra::polycore::PolyError;
use anh_spectra::quantize::QuantizeError;
use anh_spectra::specfn::SpecFnError;

/// Failure of a command, classified by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad input: arguments, polynomial text, out-of-class specs.
    #[error("{0}")]
    Validation(String),
    /// The computation ran but could not produce a trustworthy result.
    #[error("{0}")]
    Numeric(String),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 1,
        }
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<PolyError> for CliError {
    fn from(e: PolyError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SpecError> for CliError {
    fn from(e: SpecError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<OscError> for CliError {
    fn from(e: OscError) -> Self {
        match e {
            OscError::Eigen(_) | OscError::Unconverged { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SpecFnError> for CliError {
    fn from(e: SpecFnError) -> Self {
        match e {
            SpecFnError::InsufficientData { .. }
            | SpecFnError::NonPositiveSpectrum
            | SpecFnError::NotIntegrable { .. } => CliError::Numeric(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<QuantizeError> for CliError {
    fn from(e: QuantizeError) -> Self {
        match e {
            QuantizeError::Io(msg) => CliError::Io(msg),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

impl From<SymbolClassError> for CliError {
    fn from(e: SymbolClassError) -> Self {
        match e {
            SymbolClassError::DegenerateFit { .. } => CliError::Numeric(e.to_string()),
            SymbolClassError::Poly(p) => p.into(),
        }
    }
}
