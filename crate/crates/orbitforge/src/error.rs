use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is singular")]
    Singular,
    #[error("operator is not nilpotent")]
    NotNilpotent,
    #[error("spectrum does not split over Q(i)")]
    IrrationalSpectrum,
    #[error("eigenvalue search exceeded its size budget")]
    SpectrumSearchLimit,
    #[error("subspace is not invariant under the operator")]
    NotInvariant,
    #[error("operator is not uniform on the subspace")]
    NotUniform,
    #[error("anti-linear map of the second kind needs an even dimension")]
    BadParity,
    #[error("signature parameter out of range: {0}")]
    BadSignatureParam(String),
    #[error("operation needs a different family: {0}")]
    WrongFamily(String),
    #[error("inconsistent structure: {0}")]
    Malformed(String),
    #[error("vector is zero")]
    ZeroVector,
    #[error("vector is not special: {0}")]
    NotSpecial(String),
    #[error("no index is tabulated for this type")]
    NoIndexDefined,
    #[error("invalid label: {0}")]
    InvalidLabel(String),
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("no distinguished height: {0}")]
    NoDistinguishedHeight(String),
    #[error("no core row matches: {0}")]
    NoCoreRow(String),
    #[error("not in the isotropy group: {0}")]
    NotInIsotropyGroup(String),
    #[error("not in the group: {0}")]
    NotInGroup(String),
    #[error("families differ: {0}")]
    FamilyMismatch(String),
    #[error("unclassified residual present")]
    UnclassifiedResidual,
    #[error("random generation failed: {0}")]
    GenerationFailed(String),
}
