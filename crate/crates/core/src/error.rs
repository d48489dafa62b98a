use thiserror::Error;

pub type Result<T> = std::result::Result<T, BresseError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BresseError {
    // --- configuration (exit codes 10-19) ---
    #[error("parameter `{0}` must be strictly positive and finite")]
    NonPositiveParameter(String),

    #[error("damping interval must satisfy 0 < alpha < beta < L (got alpha={alpha}, beta={beta}, L={length})")]
    BadInterval { alpha: f64, beta: f64, length: f64 },

    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config schema error at `{path}`: expected {expected}")]
    Schema { path: String, expected: String },

    #[error("mesh too coarse: {0}")]
    TooCoarse(String),

    #[error("initial field `{field}` does not vanish at x={x} (value {value:e})")]
    IncompatibleBoundary { field: String, x: f64, value: f64 },

    // --- numerics (exit codes 20-29) ---
    #[error("position x={x} is outside [0, {length}]")]
    OutOfDomain { x: f64, length: f64 },

    #[error("lambda={lambda} exceeds the resolved range lambda_max={lambda_max}")]
    GridBeyondResolution { lambda: f64, lambda_max: f64 },

    #[error("frequency grid is empty")]
    EmptyGrid,

    #[error("i*lambda hits the discrete spectrum at lambda={0}")]
    SingularAtLambda(f64),

    #[error("shift {re}{im:+}i is (numerically) an eigenvalue; retry with a perturbed shift")]
    ShiftSingular { re: f64, im: f64 },

    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    #[error("factorization failed: {0}")]
    FactorizationFailed(String),

    #[error("fit window holds {found} samples, need at least {needed}")]
    WindowTooSmall { found: usize, needed: usize },

    #[error("energy reaches the roundoff floor inside the fit window (t={0}); shrink the window")]
    NonpositiveEnergy(f64),

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{0}")]
    InvalidArgument(String),

    #[error("errors at {} frequencies, first at lambda={}: {}", .0.len(), .0[0].0, .0[0].1)]
    Profile(Vec<(f64, Box<BresseError>)>),

    // --- I/O (exit codes 30-39) ---
    #[error("I/O error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("malformed input {path}: {message}")]
    MalformedInput { path: String, message: String },
}

impl BresseError {
    /// Process exit code for the error class: 10-19 configuration,
    /// 20-29 numerics, 30-39 I/O.
    pub fn exit_code(&self) -> i32 {
        use BresseError::*;
        match self {
            NonPositiveParameter(_) | BadInterval { .. } => 10,
            Parse { .. } => 11,
            Schema { .. } => 12,
            TooCoarse(_) => 13,
            IncompatibleBoundary { .. } => 14,
            InvalidArgument(_) => 15,
            OutOfDomain { .. } | DimensionMismatch { .. } => 20,
            GridBeyondResolution { .. } => 21,
            EmptyGrid => 22,
            SingularAtLambda(_) => 23,
            ShiftSingular { .. } => 24,
            NoConvergence(_) => 25,
            FactorizationFailed(_) => 26,
            WindowTooSmall { .. } => 27,
            NonpositiveEnergy(_) => 28,
            Profile(errs) => errs[0].1.exit_code(),
            Io { .. } => 30,
            MalformedInput { .. } => 31,
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        BresseError::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
