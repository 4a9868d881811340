use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by the transforms, the inversions and the file formats.
///
/// The variant names double as the error tags the command-line front end
/// prints, so renaming one is a user-visible change.
#[derive(Debug, Error)]
pub enum Error {
    #[error("ZeroVector: direction has norm {0:e}")]
    ZeroVector(f64),

    #[error("InvalidElement: {0}")]
    InvalidElement(String),

    #[error("InvalidGrid: {0}")]
    InvalidGrid(String),

    #[error("SupportOverflow: {0}")]
    SupportOverflow(String),

    #[error("GeometryMismatch: {0}")]
    GeometryMismatch(String),

    #[error("NotAdmissible: {0}")]
    NotAdmissible(String),

    #[error("InsufficientCoverage: {uncovered} of {in_band} in-band voxels received no data")]
    InsufficientCoverage { uncovered: usize, in_band: usize },

    #[error("FileNotFound: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("Format: {0}")]
    Format(String),

    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short tag identifying the variant, e.g. `GeometryMismatch`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ZeroVector(_) => "ZeroVector",
            Error::InvalidElement(_) => "InvalidElement",
            Error::InvalidGrid(_) => "InvalidGrid",
            Error::SupportOverflow(_) => "SupportOverflow",
            Error::GeometryMismatch(_) => "GeometryMismatch",
            Error::NotAdmissible(_) => "NotAdmissible",
            Error::InsufficientCoverage { .. } => "InsufficientCoverage",
            Error::FileNotFound(_) => "FileNotFound",
            Error::Format(_) => "Format",
            Error::Io(_) => "Io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
