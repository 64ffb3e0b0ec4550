use crate::linalg::CVector;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Why `S ÷ T` has no solution.
#[derive(Debug, Clone)]
pub enum Unsolvable {
    /// `T − S` has a negative eigenvalue; the supremum diverges along `direction`.
    Indefinite { min_eigenvalue: f64, direction: CVector },
    /// `ran S` is not contained in `ran(T − S)`; `direction` is the escaping part.
    RangeExcess { gap: f64, direction: CVector },
}

impl std::fmt::Display for Unsolvable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Unsolvable::Indefinite { min_eigenvalue, .. } => {
                write!(f, "T - S is indefinite (min eigenvalue {min_eigenvalue:.3e})")
            }
            Unsolvable::RangeExcess { gap, .. } => {
                write!(f, "ran S is not inside ran(T - S) (gap {gap:.3e})")
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e})")]
    NonHermitianInput { asymmetry: f64 },
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("matrix data is not square: {len} entries for dim {dim}")]
    NotSquare { dim: usize, len: usize },
    #[error("equation X:T = S is not solvable: {0}")]
    NotSolvable(Unsolvable),
    #[error("cross-check failed: {what} (gap {gap:.3e}, tolerance {tolerance:.3e})")]
    CrossCheckFailure { what: String, gap: f64, tolerance: f64 },
    #[error("iteration did not converge (last gap {last_gap:.3e})")]
    NoConvergence { last_gap: f64 },
    #[error("operand is not in the required interval: {0}")]
    NotInInterval(String),
    #[error("matrix is not an orthogonal projection (defect {defect:.3e})")]
    NotAProjection { defect: f64 },
    #[error("operand is not a quasi-unit of the reference operator")]
    NotQuasiUnit,
    #[error("half-lemma precondition T:W = T/2 fails (gap {gap:.3e})")]
    HalfLemmaViolated { gap: f64 },
    #[error("identity (λT):W = λ/(1+λ)·T drifted at step {step} (gap {gap:.3e})")]
    IdentityDrift { step: usize, gap: f64 },
    #[error("form w is not dominated by t")]
    NotDominated,
    #[error("form is not in the image of the parallel sum with the reference form: {0}")]
    NotInImage(Unsolvable),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("rank {rank} is out of range for dimension {dim}")]
    BadRank { rank: usize, dim: usize },
    #[error("invalid tolerances: {0}")]
    InvalidTolerances(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
