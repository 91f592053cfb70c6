use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed raster: {0}")]
    Format(String),
    #[error("unsupported bit depth: maxval {0} (only 255 is accepted)")]
    UnsupportedDepth(u32),
    #[error("probability {value} at index {index} lies outside [0, 1]")]
    Range { index: usize, value: f32 },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("raster {width}x{height} is below the 16x16 minimum")]
    TooSmall { width: usize, height: usize },
    #[error("orientation is ambiguous: corner means {0:?} are within one intensity level")]
    AmbiguousOrientation([f64; 4]),
    #[error("histogram has fewer than two occupied bins")]
    DegenerateHistogram,
    #[error("mask has no foreground pixels")]
    EmptyMask,
    #[error("skeleton has {0} endpoints, expected exactly 2")]
    AmbiguousSkeleton(usize),
    #[error("extrapolated line leaves the raster before reaching the {0} border")]
    ExtrapolationDiverged(&'static str),
    #[error("no path from {from:?} to {to:?} inside the mask")]
    NoPath {
        from: (usize, usize),
        to: (usize, usize),
    },
    #[error("boundary does not touch both column 0 and the last row")]
    OpenBoundary,
    #[error("undefined metric(s): {0}")]
    UndefinedMetric(String),
    #[error("need at least 2 reports, got {0}")]
    InsufficientData(usize),
    #[error("invalid phantom spec: {0}")]
    BadSpec(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
