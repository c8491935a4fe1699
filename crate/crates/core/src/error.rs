use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// 1-based position inside a configuration text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    /// Converts a byte offset into `text` to a line/column pair.
    pub fn from_offset(text: &str, offset: usize) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
        Self { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

fn at(location: &Option<Location>) -> String {
    location.map(|l| format!("{l}: ")).unwrap_or_default()
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{}unknown key `{key}`", at(.location))]
    UnknownKey { key: String, location: Option<Location> },
    #[error("{}{message}", at(.location))]
    Syntax { message: String, location: Option<Location> },
    #[error("{}invalid value for `{key}`: {message}", at(.location))]
    Invalid {
        key: String,
        message: String,
        location: Option<Location>,
    },
}

impl ConfigError {
    pub fn invalid(key: impl Into<String>, message: impl Into<String>) -> Self {
        Self::Invalid {
            key: key.into(),
            message: message.into(),
            location: None,
        }
    }

    pub fn location(&self) -> Option<Location> {
        match self {
            Self::UnknownKey { location, .. } | Self::Syntax { location, .. } | Self::Invalid { location, .. } => {
                *location
            }
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("link from {origin:?} along {direction:?} does not enter the sphere")]
    NoIntersection { origin: [f64; 3], direction: [i32; 3] },
    #[error("surface normal undefined at the sphere center")]
    DegenerateNormal,
}

#[derive(Debug, Error)]
pub enum SimError {
    #[error("numerical instability at step {step}: non-finite population in cell {cell:?}")]
    Instability { step: u64, cell: [usize; 3] },
    #[error("{what} did not converge within {steps} steps")]
    NonConvergence { what: String, steps: u64 },
    #[error("body left the resolvable interior of the domain at step {step} (center {center:?})")]
    BodyOutOfDomain { step: u64, center: [f64; 3] },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Diagnostics(String),
}

impl SimError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status: 2 for configuration errors, 3 for numerical
    /// failures, 4 for non-convergence and 1 for anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 2,
            Self::Instability { .. } | Self::BodyOutOfDomain { .. } | Self::Geometry(_) => 3,
            Self::NonConvergence { .. } => 4,
            Self::Io { .. } | Self::Diagnostics(_) => 1,
        }
    }
}
