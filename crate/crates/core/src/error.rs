use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Every failure the library can report.
///
/// Variants are grouped loosely by the module that raises them; the CLI maps
/// each one to a stable `kind` string through [`Error::kind`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // numkit
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical backend failed: {0}")]
    BackendFailure(String),
    #[error("matrix exponential overflowed")]
    Overflow,
    #[error("basis matrix is singular or not full rank")]
    SingularBasis,
    #[error("ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    // model
    #[error("Newton iteration did not converge in {max_iter} iterations (residual {residual:e})")]
    NoConvergence { max_iter: usize, residual: f64 },
    #[error("Jacobian is singular at the current iterate")]
    SingularJacobian,
    #[error("finite-difference step too small: {0}")]
    StepTooSmall(String),
    #[error("nominal trajectory residual {residual:e} exceeds tolerance {tol:e}")]
    TrajectoryResidualTooLarge { residual: f64, tol: f64 },
    #[error("similarity transform is singular")]
    SingularTransform,

    // realization
    #[error("transfer function is improper (numerator degree {num} > denominator degree {den})")]
    ImproperTransferFunction { num: usize, den: usize },
    #[error("transfer function has repeated poles")]
    RepeatedPoles,
    #[error("repeated poles are not supported by the residue realization")]
    RepeatedPoleUnsupported,
    #[error("residue rank is ambiguous (singular value ratio {ratio:e})")]
    RankAmbiguous { ratio: f64 },

    // response
    #[error("matrix has repeated eigenvalues")]
    RepeatedEigenvalues,
    #[error("Vandermonde system is ill-conditioned (condition {cond:e})")]
    IllConditionedVandermonde { cond: f64 },
    #[error("matrix is not diagonalizable")]
    NotDiagonalizable,
    #[error("fundamental matrix lost invertibility at t = {t} (condition {cond:e})")]
    SingularFundamental { t: f64, cond: f64 },

    // stability
    #[error("Lyapunov operator is singular (some eigenvalue pair sums to zero)")]
    SingularLyapunovOperator,
    #[error("internal consistency check failed: {0}")]
    InternalInconsistency(String),

    // structural
    #[error("plant must be square (p = m), got p = {p}, m = {m}")]
    NonSquarePlant { p: usize, m: usize },
    #[error("system pencil is singular for every s")]
    DegeneratePencil,
    #[error("grammian is singular on the requested horizon")]
    SingularGrammian,

    // synthesis
    #[error("pair (A, B) is not controllable")]
    Uncontrollable,
    #[error("pair (A, C) is not observable")]
    Unobservable,
    #[error("requested poles are not closed under complex conjugation")]
    ConjugacyViolation,
    #[error("no single-input projection in the fixed sequence yields a controllable pair")]
    ProjectionFailed,
    #[error("placed poles deviate from the request by {deviation:e}")]
    PlacementMismatch { deviation: f64 },
    #[error("output matrix C is not full row rank")]
    RankDeficientC,
    #[error("reduced-order pair (A22, A12) is not observable")]
    SubpairUnobservable,
    #[error("plant has a transmission zero at the origin")]
    ZeroAtOrigin,
    #[error("plant numerator and denominator share a common factor")]
    CommonFactor,
    #[error("Sylvester system is singular")]
    SingularSylvester,

    // lqr
    #[error("Riccati solution escaped to infinity at t = {t}")]
    FiniteEscape { t: f64 },
    #[error("Hamiltonian matrix has repeated eigenvalues")]
    RepeatedHamiltonianEigenvalues,
    #[error("Hamiltonian matrix has an eigenvalue on the imaginary axis")]
    AxisEigenvalue,
    #[error("pair (A, B) is not stabilizable")]
    NotStabilizable,
    #[error("pair (A, C) is not detectable")]
    NotDetectable,
    #[error("could not select a well-conditioned stable invariant subspace: {0}")]
    StableSpaceDefect(String),

    // minprin
    #[error("endpoint map psi_12 is singular; the target is not reachable this way")]
    SingularPsi12,
    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),

    // schema
    #[error("schema error at {pointer}: {message}")]
    Schema { pointer: String, message: String },
}

impl Error {
    /// Stable identifier used in serialized error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonSquare { .. } => "NonSquare",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::BackendFailure(_) => "BackendFailure",
            Error::Overflow => "Overflow",
            Error::SingularBasis => "SingularBasis",
            Error::IllConditioned(_) => "IllConditioned",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularJacobian => "SingularJacobian",
            Error::StepTooSmall(_) => "StepTooSmall",
            Error::TrajectoryResidualTooLarge { .. } => "TrajectoryResidualTooLarge",
            Error::SingularTransform => "SingularTransform",
            Error::ImproperTransferFunction { .. } => "ImproperTransferFunction",
            Error::RepeatedPoles => "RepeatedPoles",
            Error::RepeatedPoleUnsupported => "RepeatedPoleUnsupported",
            Error::RankAmbiguous { .. } => "RankAmbiguous",
            Error::RepeatedEigenvalues => "RepeatedEigenvalues",
            Error::IllConditionedVandermonde { .. } => "IllConditionedVandermonde",
            Error::NotDiagonalizable => "NotDiagonalizable",
            Error::SingularFundamental { .. } => "SingularFundamental",
            Error::SingularLyapunovOperator => "SingularLyapunovOperator",
            Error::InternalInconsistency(_) => "InternalInconsistency",
            Error::NonSquarePlant { .. } => "NonSquarePlant",
            Error::DegeneratePencil => "DegeneratePencil",
            Error::SingularGrammian => "SingularGrammian",
            Error::Uncontrollable => "Uncontrollable",
            Error::Unobservable => "Unobservable",
            Error::ConjugacyViolation => "ConjugacyViolation",
            Error::ProjectionFailed => "ProjectionFailed",
            Error::PlacementMismatch { .. } => "PlacementMismatch",
            Error::RankDeficientC => "RankDeficientC",
            Error::SubpairUnobservable => "SubpairUnobservable",
            Error::ZeroAtOrigin => "ZeroAtOrigin",
            Error::CommonFactor => "CommonFactor",
            Error::SingularSylvester => "SingularSylvester",
            Error::FiniteEscape { .. } => "FiniteEscape",
            Error::RepeatedHamiltonianEigenvalues => "RepeatedHamiltonianEigenvalues",
            Error::AxisEigenvalue => "AxisEigenvalue",
            Error::NotStabilizable => "NotStabilizable",
            Error::NotDetectable => "NotDetectable",
            Error::StableSpaceDefect(_) => "StableSpaceDefect",
            Error::SingularPsi12 => "SingularPsi12",
            Error::InvalidHorizon(_) => "InvalidHorizon",
            Error::Schema { .. } => "SchemaError",
        }
    }
}
