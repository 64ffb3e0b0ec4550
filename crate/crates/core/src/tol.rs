use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Numerical policy shared by every approximate predicate.
///
/// All tolerances are relative. Spectral truncation (`tol_rank`) is the
/// tightest; checks that compose several spectral operations (`tol_conv`) are
/// the loosest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub tol_sym: f64,
    pub tol_psd: f64,
    pub tol_rank: f64,
    pub tol_order: f64,
    pub tol_conv: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { tol_sym: 1e-12, tol_psd: 1e-10, tol_rank: 1e-9, tol_order: 1e-8, tol_conv: 1e-7 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [self.tol_sym, self.tol_psd, self.tol_rank, self.tol_order, self.tol_conv];
        if all.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::InvalidTolerances("tolerances must be finite and nonnegative".into()));
        }
        if self.tol_conv <= self.tol_rank {
            return Err(Error::InvalidTolerances("tol_conv must exceed tol_rank".into()));
        }
        Ok(())
    }

    /// Eigenvalues above this value count towards the rank.
    pub fn rank_threshold(&self, lambda_max: f64) -> f64 {
        self.tol_rank * lambda_max.max(1.0)
    }
}
