use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the spectral
/// calculus, the convex-analysis routines, and the experiment builders.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("matrix is not symmetric: |a[{i}][{j}] - a[{j}][{i}]| = {delta:e} exceeds tolerance")]
    NotSymmetric { i: usize, j: usize, delta: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    ConvergenceFailure { sweeps: usize },

    #[error("eigenvalue {eigenvalue} lies outside the function domain [{lo}, {hi}]")]
    SpectrumOutOfDomain { eigenvalue: f64, lo: f64, hi: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("basis columns are not orthonormal (max deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:e})")]
    NotPsd { min_eig: f64 },

    #[error("point {x} lies outside the interval [{lo}, {hi}]")]
    OutsideInterval { x: f64, lo: f64, hi: f64 },

    #[error("bad range: {msg}")]
    BadRange { msg: String },

    #[error("no strict convexity detected on [{a}, {x}] (chord gap {gamma:e})")]
    NotConvexDetected { a: f64, x: f64, gamma: f64 },

    #[error("partition would exceed {max} points")]
    TooManyPoints { max: usize },

    #[error("x0 = {x0} is not in the spectrum (closest eigenvalue {closest})")]
    X0NotInSpectrum { x0: f64, closest: f64 },

    #[error("shift truncation too short: steps {steps} + block size {block} exceeds total dimension {total}")]
    TruncationTooShort {
        steps: usize,
        block: usize,
        total: usize,
    },

    #[error("no affine chord found on the mesh; function appears strictly convex there")]
    StrictlyConvexOnMesh,

    #[error("invalid function spec '{spec}': {msg}")]
    BadFunctionSpec { spec: String, msg: String },

    #[error("test vector has norm {norm} (unit norm required)")]
    NotUnitVector { norm: f64 },

    #[error("invalid matrix JSON: {msg}")]
    BadMatrixJson { msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// CLI exit code class: validation problems exit 2, property failures 3.
    /// Every library error is a validation-class failure; property failures
    /// are produced by the verify harness, not by this type.
    pub fn exit_code(&self) -> i32 {
        2
    }
}
