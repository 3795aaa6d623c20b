use qosc_core::qcore::QError;
use qosc_core::regime::RegimeError;
use qosc_core::tsa::TsaError;
use thiserror::Error;

/// Failure of a subcommand, carrying its process exit code.
#[derive(Debug, Error)]
pub enum AppError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("inadmissible parameters: {0}")]
    Inadmissible(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("sampling error: {0}")]
    Sampling(String),
    #[error("oracle check failed: {0}")]
    Oracle(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl AppError {
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) | AppError::Io { .. } => 1,
            AppError::Inadmissible(_) => 2,
            AppError::Parse { .. } => 3,
            AppError::Sampling(_) => 4,
            AppError::Oracle(_) => 5,
        }
    }

    /// A copy of this error; the I/O source keeps only its kind and message.
    pub fn duplicate(&self) -> Self {
        match self {
            AppError::Usage(m) => AppError::Usage(m.clone()),
            AppError::Inadmissible(m) => AppError::Inadmissible(m.clone()),
            AppError::Parse { line, msg } => AppError::Parse { line: *line, msg: msg.clone() },
            AppError::Sampling(m) => AppError::Sampling(m.clone()),
            AppError::Oracle(m) => AppError::Oracle(m.clone()),
            AppError::Io { path, source } => {
                AppError::Io { path: path.clone(), source: std::io::Error::new(source.kind(), source.to_string()) }
            }
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        AppError::Io { path: path.display().to_string(), source }
    }
}

impl From<QError> for AppError {
    fn from(e: QError) -> Self {
        match e {
            QError::Inadmissible { .. } => {
                AppError::Inadmissible(format!("{e}; the coherent state requires |alpha|^2 <= 1/(1-q)"))
            }
            QError::OutsideRadius { .. } => AppError::Inadmissible(e.to_string()),
            QError::Sampling { .. } => AppError::Sampling(e.to_string()),
            _ => AppError::Usage(e.to_string()),
        }
    }
}

impl From<TsaError> for AppError {
    fn from(e: TsaError) -> Self {
        match e {
            TsaError::Parameter(_) => AppError::Usage(e.to_string()),
            _ => AppError::Sampling(e.to_string()),
        }
    }
}

impl From<RegimeError> for AppError {
    fn from(e: RegimeError) -> Self {
        match e {
            RegimeError::Oscillator(e) => e.into(),
            RegimeError::Analysis(e) => e.into(),
            RegimeError::Parameter(m) => AppError::Usage(m),
        }
    }
}
