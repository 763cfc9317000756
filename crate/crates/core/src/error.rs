use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian: ‖M − M*‖_F = {defect:.3e}")]
    NotHermitian { defect: f64 },

    #[error("eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has eigenvalue {eigenvalue:.3e} below the PSD tolerance")]
    NotPositive { eigenvalue: f64 },

    #[error("effect {index} has eigenvalue {eigenvalue:.6} < 0")]
    SpectrumBelowZero { index: usize, eigenvalue: f64 },

    #[error("effect {index} has eigenvalue {eigenvalue:.6} > 1")]
    SpectrumAboveOne { index: usize, eigenvalue: f64 },

    #[error("sum of squared effects has eigenvalue {eigenvalue:.6} > 1")]
    NotSubnormalized { eigenvalue: f64 },

    #[error("invalid interval ({a}, {b}]")]
    InvalidInterval { a: f64, b: f64 },

    #[error("effects do not commute: max ‖[Ei,Ej]‖ = {max_commutator:.3e}")]
    NotCommuting { max_commutator: f64 },

    #[error("effect set is not a resolution of identity")]
    NotResolution,

    #[error("effect set is a resolution of identity; use the resolution verifier")]
    IsResolution,

    #[error("linear system is singular: eigenvalue {eigenvalue:.3e} of superop + I")]
    SingularSystem { eigenvalue: f64 },

    #[error("not a density matrix: {reason}")]
    NotDensityMatrix { reason: String },

    #[error("bin index {index} out of range for resolution m = {m}")]
    IndexOutOfRange { index: i64, m: u64 },

    #[error("operator commutes with the effect; no witness exists")]
    CommutesNoWitness,

    #[error("dyadic search exceeded m = {m_max} without a witness")]
    ResolutionExhausted { m_max: u64 },

    #[error("all refined blocks vanished at resolution {pm}")]
    RefinementVanished { pm: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Variant name, used in CLI reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotPositive { .. } => "NotPositive",
            Error::SpectrumBelowZero { .. } => "SpectrumBelowZero",
            Error::SpectrumAboveOne { .. } => "SpectrumAboveOne",
            Error::NotSubnormalized { .. } => "NotSubnormalized",
            Error::InvalidInterval { .. } => "InvalidInterval",
            Error::NotCommuting { .. } => "NotCommuting",
            Error::NotResolution => "NotResolution",
            Error::IsResolution => "IsResolution",
            Error::SingularSystem { .. } => "SingularSystem",
            Error::NotDensityMatrix { .. } => "NotDensityMatrix",
            Error::IndexOutOfRange { .. } => "IndexOutOfRange",
            Error::CommutesNoWitness => "CommutesNoWitness",
            Error::ResolutionExhausted { .. } => "ResolutionExhausted",
            Error::RefinementVanished { .. } => "RefinementVanished",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Parse(_) => "ParseError",
        }
    }
}
