//! Seeded random instances: PSD matrices of prescribed rank, projections on
//! `H_B`, and quasi-units of a given `B`.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::psd::PsdMatrix;
use crate::short::build_aux_space;
use crate::tol::Tolerances;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type TrialRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> TrialRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Complex Gaussian entries with independent standard normal parts.
pub fn gaussian_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re, im)
    })
}

/// `G·G*` for a Gaussian `dim × rank` factor `G`.
pub fn random_psd<R: Rng>(rng: &mut R, dim: usize, rank: usize, tol: &Tolerances) -> Result<PsdMatrix> {
    if rank > dim {
        return Err(Error::BadRank { rank, dim });
    }
    let g = gaussian_matrix(rng, dim, rank);
    PsdMatrix::from_computed(&g * g.adjoint(), tol)
}

pub fn gen_random_psd(seed: u64, dim: usize, rank: usize, tol: &Tolerances) -> Result<PsdMatrix> {
    random_psd(&mut rng_from_seed(seed), dim, rank, tol)
}

/// Orthonormal basis of a random `k`-dimensional subspace of `Cⁿ`.
pub fn random_orthonormal<R: Rng>(rng: &mut R, n: usize, k: usize) -> CMatrix {
    assert!(k <= n, "subspace dimension exceeds ambient dimension");
    loop {
        let q = linalg::orthonormalize(&gaussian_matrix(rng, n, k));
        if q.ncols() == k {
            return q;
        }
    }
}

/// Orthogonal projection of rank `k` onto a random subspace of `Cʳ`.
pub fn random_projection<R: Rng>(rng: &mut R, r: usize, k: usize) -> CMatrix {
    let q = random_orthonormal(rng, r, k);
    &q * q.adjoint()
}

/// `Ψ_B(P) = J_B·P·J_B*` for a random projection `P` on `H_B` of uniformly
/// drawn rank; returns the quasi-unit together with `P`.
pub fn random_quasiunit<R: Rng>(rng: &mut R, b: &PsdMatrix, tol: &Tolerances) -> Result<(PsdMatrix, CMatrix)> {
    let aux = build_aux_space(b);
    let r = aux.rank();
    let k = rng.random_range(0..=r);
    let p = random_projection(rng, r, k);
    let a = PsdMatrix::from_computed(aux.push_forward(&p), tol)?;
    Ok((a, p))
}

pub fn gen_random_quasiunit(seed: u64, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    random_quasiunit(&mut rng_from_seed(seed), b, tol).map(|(a, _)| a)
}

/// Random `X` with `0 ≤ X ≤ I` on `Cʳ` and spectrum in `[lo, hi]`.
pub fn random_contraction<R: Rng>(rng: &mut R, r: usize, lo: f64, hi: f64) -> CMatrix {
    let u = random_orthonormal(rng, r, r);
    let values: Vec<f64> = (0..r).map(|_| rng.random_range(lo..=hi)).collect();
    &u * linalg::diag_matrix(&values) * u.adjoint()
}

/// `J_B·((1−ε)P + εX)·J_B*` with `X` spectrally inside `[¼, ¾]`: an element
/// of `[0, B]` whose `H_B` image has spectrum bounded away from `{0, 1}`, so
/// it is not a quasi-unit as soon as `B ≠ 0`.
pub fn random_non_quasiunit<R: Rng>(rng: &mut R, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    let aux = build_aux_space(b);
    let r = aux.rank();
    let k = rng.random_range(0..=r);
    let p = random_projection(rng, r, k);
    let eps = rng.random_range(0.1..=0.5);
    let x = random_contraction(rng, r, 0.25, 0.75);
    let q = p.scale(1.0 - eps) + x.scale(eps);
    PsdMatrix::from_computed(aux.push_forward(&q), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quasi::is_quasi_unit;

    #[test]
    fn psd_rank_and_determinism() {
        let t = Tolerances::default();
        assert_eq!(gen_random_psd(7, 4, 0, &t).unwrap().norm(), 0.0);
        let full = gen_random_psd(7, 4, 4, &t).unwrap();
        assert_eq!(full.rank(), 4);
        assert!(full.eigenvalues()[0] > 0.0);
        let again = gen_random_psd(7, 4, 4, &t).unwrap();
        assert_eq!(full.matrix(), again.matrix());
        assert!(matches!(gen_random_psd(1, 2, 3, &t), Err(Error::BadRank { rank: 3, dim: 2 })));
        assert_eq!(gen_random_psd(3, 5, 2, &t).unwrap().rank(), 2);
    }

    #[test]
    fn quasiunit_of_identity_line() {
        let t = Tolerances::default();
        let b = PsdMatrix::identity(2);
        let mut rng = rng_from_seed(11);
        let p = random_projection(&mut rng, 2, 1);
        let a = PsdMatrix::from_computed(p, &t).unwrap();
        assert_eq!(a.rank(), 1);
        assert!(is_quasi_unit(&a, &b, &t).unwrap().verdict);
    }

    #[test]
    fn quasiunit_extremes() {
        let t = Tolerances::default();
        let b = gen_random_psd(5, 3, 2, &t).unwrap();
        let aux = build_aux_space(&b);
        assert!(aux.push_forward(&CMatrix::zeros(2, 2)).norm() == 0.0);
        let full = aux.push_forward(&linalg::identity(2));
        assert!((full - b.matrix()).norm() < 1e-13);
        let a = gen_random_quasiunit(9, &b, &t).unwrap();
        assert!(is_quasi_unit(&a, &b, &t).unwrap().verdict);
    }

    #[test]
    fn non_quasiunit_fails_every_test() {
        let t = Tolerances::default();
        let mut rng = rng_from_seed(3);
        let b = random_psd(&mut rng, 4, 3, &t).unwrap();
        let a = random_non_quasiunit(&mut rng, &b, &t).unwrap();
        let cert = is_quasi_unit(&a, &b, &t).unwrap();
        assert!(!cert.verdict);
    }
}
