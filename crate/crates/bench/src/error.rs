use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("unknown preset `{name}`; available presets:\n{available}")]
    UnknownPreset { name: String, available: String },
    #[error(transparent)]
    Core(#[from] pinn_core::Error),
    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error at {path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{0} run(s) diverged")]
    Diverged(usize),
    #[error("{0} invariant suite(s) failed")]
    Verify(usize),
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> BenchError {
        BenchError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path, source: csv::Error) -> BenchError {
        BenchError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit code: 2 configuration, 3 divergence, 4 i/o.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) | BenchError::UnknownPreset { .. } => 2,
            BenchError::Core(e) => match e {
                pinn_core::Error::Config(_) | pinn_core::Error::Contract(_) => 2,
                _ => 1,
            },
            BenchError::Io { .. } | BenchError::Csv { .. } => 4,
            BenchError::Diverged(_) => 3,
            BenchError::Verify(_) => 1,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
