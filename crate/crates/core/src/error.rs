use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed Y4M header: {0}")]
    MalformedHeader(String),
    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),
    #[error("truncated frame: expected {expected} bytes, got {got}")]
    TruncatedFrame { expected: usize, got: usize },
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("invalid block dimensions {w}x{h}")]
    InvalidDims { w: usize, h: usize },
    #[error("block {w}x{h} at ({x},{y}) lies outside a {frame_w}x{frame_h} frame")]
    OutOfBounds {
        x: usize,
        y: usize,
        w: usize,
        h: usize,
        frame_w: usize,
        frame_h: usize,
    },
    #[error("block {w}x{h} is too large for exhaustive enumeration (max 16x16)")]
    TooLarge { w: usize, h: usize },
    #[error("invalid quality level {0} (must be 0..=63)")]
    InvalidQuality(i32),
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("degenerate fit: all calibration samples share q-index {0}")]
    DegenerateFit(u32),
    #[error("encode mode requires reference frames")]
    MissingReference,
    #[error("bayes mode requires a prior model")]
    MissingPrior,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("reference Q {reference} must be strictly below every local Q (got {local})")]
    InvalidQOrdering { reference: u8, local: u8 },
    #[error("bd-rate needs at least 4 points per curve, got {0}")]
    InsufficientPoints(usize),
    #[error("rd curves do not overlap in quality")]
    NoOverlap,
    #[error("rd points must have strictly increasing quality and positive rate")]
    InvalidCurve,
    #[error("plane dimensions differ: {0}")]
    DimMismatch(String),
    #[error("results are not comparable: {0}")]
    Mismatch(String),
    #[error("no samples")]
    Empty,
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Input,
    Internal,
}

impl ErrorCategory {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Input => 3,
            ErrorCategory::Internal => 4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Input => "input",
            ErrorCategory::Internal => "internal",
        }
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        use Error::*;
        match self {
            MalformedHeader(_) | UnsupportedFormat(_) | TruncatedFrame { .. } | Io(_) | Csv(_)
            | Json(_) => ErrorCategory::Input,
            InvalidSpec(_)
            | InvalidQuality(_)
            | InvalidParam(_)
            | InsufficientData(_)
            | DegenerateFit(_)
            | MissingReference
            | MissingPrior
            | InvalidQOrdering { .. }
            | InsufficientPoints(_)
            | NoOverlap
            | InvalidCurve
            | Empty => ErrorCategory::Config,
            InvalidDims { .. }
            | OutOfBounds { .. }
            | TooLarge { .. }
            | LengthMismatch { .. }
            | DimMismatch(_)
            | Mismatch(_)
            | Invariant(_) => ErrorCategory::Internal,
        }
    }
}
