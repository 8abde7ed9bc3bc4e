use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension {dim} exceeds the configured cap of {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("vector has zero norm{}", if *.after_projection { " after projection" } else { "" })]
    ZeroVector { after_projection: bool },

    #[error("vector contains non-finite entries")]
    NonFinite,

    #[error("matrix with determinant {det} mod {modulus} is not symplectic")]
    NotSymplectic { det: i64, modulus: usize },

    #[error("no unitary intertwiner found: {0}")]
    Intertwiner(String),

    #[error("imaginary residue {0:e} in F exceeds tolerance; G is corrupted")]
    ImaginaryResidue(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("not a SIC fiducial: max overlap deviation {0:e}")]
    NotSic(f64),

    #[error("refinement stalled at residual 1e{residual_log10:.1}; the input is not in a solution basin")]
    Divergence { residual_log10: f64, last_good: Box<crate::refine::BigFiducial> },

    #[error(transparent)]
    Format(#[from] crate::store::FormatError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
