//! Positive semidefinite matrices under the parallel sum.
//!
//! The crate works on finite-dimensional complex Hilbert spaces and covers
//! parallel addition and subtraction, the generalized short `[A]B` (three
//! independent routes, cross-checked), Lebesgue decompositions, quasi-units and
//! their lattice, nonnegative forms with degenerate kernels together with the
//! order isomorphism onto an operator interval, and the antitone Galois
//! connection induced by the parallel sum.
//!
//! Every approximate predicate is governed by a single [`Tolerances`] value that
//! callers pass explicitly. All values are immutable after construction.

pub mod error;
pub mod forms;
pub mod galois;
pub mod io;
pub mod linalg;
pub mod parallel;
pub mod psd;
pub mod quasi;
pub mod random;
pub mod short;
pub mod suites;
pub mod tol;

pub use error::{Error, Result, Unsolvable};
pub use forms::{Form, QuotientSpace};
pub use galois::PolarityPair;
pub use linalg::{CMatrix, CVector};
pub use psd::{HermitianMatrix, PsdMatrix, Subspace};
pub use quasi::{InfimumResult, QuasiUnitCertificate};
pub use short::{AuxSpace, LebesgueDecomposition};
pub use suites::{run_suites, RunConfig, SuiteReport};
pub use tol::Tolerances;
