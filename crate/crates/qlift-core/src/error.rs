use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors reported by the solvers and builders.
///
/// Hypothesis failures carry the measured quantity so callers can print a
/// diagnostic citing the violated bound.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix entries must be finite")]
    NonFiniteEntries,

    #[error("matrix is not Hermitian: ||P - P*|| = {defect:.3e} exceeds {tol:.3e}")]
    NotHermitian { defect: f64, tol: f64 },

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eig:.3e}")]
    NotPsd { min_eig: f64 },

    #[error("operator is not a contraction: norm {norm} exceeds 1")]
    NotContraction { norm: f64 },

    #[error("operator is not a strict contraction: norm {norm} (requires norm <= 1 - {margin:.1e})")]
    NotStrictContraction { norm: f64, margin: f64 },

    #[error("range order violated: AA* <= BB* fails, min eigenvalue of BB* - AA* is {min_eig:.3e}")]
    OrderViolated { min_eig: f64 },

    #[error("extension data incompatible: pairing identity residual {residual:.3e}")]
    Incompatible { residual: f64 },

    #[error("block matrix is not completable: assembled norm {norm} exceeds 1")]
    NotCompletable { norm: f64 },

    #[error("operator is not supported on the defect ranges: residual {residual:.3e}")]
    RangeViolation { residual: f64 },

    #[error("q = {q} out of range: requires {requirement}")]
    QOutOfRange { q: String, requirement: String },

    #[error("q = {q} is not unimodular (|q| = {modulus}): requires |q| = 1")]
    QNotUnimodular { q: String, modulus: f64 },

    #[error("pair is not q-commuting: ||T1 T2 - q T2 T1|| residual {residual:.3e}")]
    NotQCommuting { residual: f64 },

    #[error("hypothesis violated: {identity} has residual {residual:.3e}")]
    HypothesisViolated { identity: String, residual: f64 },

    #[error("chain level {level} out of range: bundle has {max} levels")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("defect operator is ill-conditioned: condition number {cond:.3e}")]
    IllConditionedDefect { cond: f64 },

    #[error("direct summand is not co-isometric: interior defect {defect:.3e}")]
    NotCoisometric { defect: f64 },

    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{algorithm} did not converge")]
    ConvergenceFailure { algorithm: &'static str },
}
