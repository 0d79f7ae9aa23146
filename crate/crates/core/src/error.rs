use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("subsystem `{name}` has dimension {dim}; at least 2 is required")]
    InvalidDimension { name: String, dim: usize },

    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),

    #[error("subsystem `{name}` must be a qubit (dimension 2), found dimension {dim}")]
    NotQubit { name: String, dim: usize },

    #[error("amplitude vector has length {got}, labels require {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state norm {0} deviates from 1 by more than the renormalization tolerance")]
    NotNormalized(f64),

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (got {0})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("purity {purity} outside the physical range [{min}, 1]")]
    PurityOutOfRange { purity: f64, min: f64 },

    #[error("negative discriminant {0:e}: purity and lambda are inconsistent")]
    NegativeDiscriminant(f64),

    #[error("reservoir `{label}` is not in its ground state (excited weight {weight:e})")]
    ReservoirNotGround { label: String, weight: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state needs {required} amplitudes, above the configured cap of {cap}")]
    DimensionCap { required: usize, cap: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
