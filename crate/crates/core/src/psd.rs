//! Hermitian and positive semidefinite matrices, subspaces, and the spectral
//! operations everything else is built from.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, CVector, Eigen};
use crate::tol::Tolerances;

/// A validated Hermitian matrix, stored symmetrized.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    mat: CMatrix,
}

impl HermitianMatrix {
    pub fn new(mat: CMatrix, tol: &Tolerances) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare { dim: mat.nrows(), len: mat.len() });
        }
        let scale = linalg::max_abs_entry(&mat);
        let asymmetry = linalg::max_abs_entry(&(&mat - mat.adjoint()));
        if asymmetry > tol.tol_sym * scale {
            return Err(Error::NonHermitianInput { asymmetry });
        }
        Ok(Self { mat: linalg::symmetrize(&mat) })
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }
}

/// Eigen-decomposition of a Hermitian matrix; ascending eigenvalues and
/// orthonormal eigenvector columns.
pub fn hermitian_eigen(m: &HermitianMatrix) -> Eigen {
    linalg::jacobi_eigen(m.matrix())
}

/// A positive semidefinite matrix with its spectral decomposition and
/// effective rank fixed at construction.
#[derive(Debug, Clone)]
pub struct PsdMatrix {
    mat: CMatrix,
    eigen: Eigen,
    rank: usize,
}

impl PsdMatrix {
    /// Validates raw input. Eigenvalues in `[−tol_psd·(1+λmax), 0)` are
    /// clipped to zero; anything more negative is rejected.
    pub fn new(h: HermitianMatrix, tol: &Tolerances) -> Result<Self> {
        Self::validated(h.mat, tol.tol_psd, tol)
    }

    /// Convenience: Hermitian check followed by [`PsdMatrix::new`].
    pub fn from_matrix(mat: CMatrix, tol: &Tolerances) -> Result<Self> {
        Self::new(HermitianMatrix::new(mat, tol)?, tol)
    }

    pub fn from_real_rows(rows: &[&[f64]], tol: &Tolerances) -> Result<Self> {
        Self::from_matrix(linalg::real_matrix(rows), tol)
    }

    /// Results of internal computations carry accumulated rounding, so the
    /// clipping band is `tol_conv` instead of `tol_psd`.
    pub(crate) fn from_computed(mat: CMatrix, tol: &Tolerances) -> Result<Self> {
        Self::validated(linalg::symmetrize(&mat), tol.tol_conv, tol)
    }

    fn validated(mat: CMatrix, band: f64, tol: &Tolerances) -> Result<Self> {
        let eigen = linalg::jacobi_eigen(&mat);
        let lmax = eigen.values.last().copied().unwrap_or(0.0).max(0.0);
        let lmin = eigen.values.first().copied().unwrap_or(0.0);
        if lmin < -band * (1.0 + lmax) {
            return Err(Error::NotPositive { min_eigenvalue: lmin });
        }
        if lmin < 0.0 {
            let values = eigen.values.iter().map(|v| v.max(0.0)).collect();
            return Ok(Self::from_spectrum(values, eigen.vectors, tol));
        }
        let rank = count_rank(&eigen.values, tol);
        Ok(Self { mat, eigen, rank })
    }

    /// Builds `V·diag(values)·V*` from nonnegative values and orthonormal columns.
    pub(crate) fn from_spectrum(values: Vec<f64>, vectors: CMatrix, tol: &Tolerances) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
        let values: Vec<f64> = order.iter().map(|&i| values[i].max(0.0)).collect();
        let vectors = CMatrix::from_fn(vectors.nrows(), order.len(), |r, k| vectors[(r, order[k])]);
        let scaled = CMatrix::from_fn(vectors.nrows(), values.len(), |r, k| vectors[(r, k)] * values[k]);
        let mat = linalg::symmetrize(&(scaled * vectors.adjoint()));
        let rank = count_rank(&values, tol);
        Self { mat, eigen: Eigen { values, vectors }, rank }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_spectrum(vec![0.0; n], linalg::identity(n), &Tolerances::default())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_spectrum(vec![1.0; n], linalg::identity(n), &Tolerances::default())
    }

    /// Diagonal matrix; negative entries are rejected.
    pub fn diag(values: &[f64], tol: &Tolerances) -> Result<Self> {
        Self::from_matrix(linalg::diag_matrix(values), tol)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigen.vectors
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Spectral norm, i.e. the largest eigenvalue.
    pub fn norm(&self) -> f64 {
        self.eigen.values.last().copied().unwrap_or(0.0)
    }

    /// Orthonormal basis of the range (eigenvectors above the rank threshold).
    pub fn range_basis(&self) -> CMatrix {
        let n = self.dim();
        self.eigen.vectors.columns(n - self.rank, self.rank).into_owned()
    }

    pub fn kernel_basis(&self) -> CMatrix {
        self.eigen.vectors.columns(0, self.dim() - self.rank).into_owned()
    }

    /// Significant eigenvalues, matching the columns of [`Self::range_basis`].
    pub fn range_eigenvalues(&self) -> &[f64] {
        &self.eigen.values[self.dim() - self.rank..]
    }

    pub fn scale(&self, factor: f64, tol: &Tolerances) -> Self {
        assert!(factor >= 0.0, "PSD matrices only scale by nonnegative factors");
        let values = self.eigen.values.iter().map(|v| v * factor).collect();
        Self::from_spectrum(values, self.eigen.vectors.clone(), tol)
    }

    pub fn add(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        check_dims(self, other)?;
        Self::from_computed(&self.mat + &other.mat, tol)
    }

    /// `self − other`, validated as raw data (clipping band `tol_psd`).
    pub fn sub(&self, other: &Self, tol: &Tolerances) -> Result<Self> {
        check_dims(self, other)?;
        Self::validated(linalg::symmetrize(&(&self.mat - &other.mat)), tol.tol_psd, tol)
    }

    /// `⟨Mx, x⟩`.
    pub fn quadratic_form(&self, x: &CVector) -> f64 {
        x.dotc(&(&self.mat * x)).re
    }

    /// Spectral-norm distance to another matrix of the same size.
    pub fn distance(&self, other: &Self) -> f64 {
        linalg::hermitian_norm(&(&self.mat - &other.mat))
    }
}

fn count_rank(values: &[f64], tol: &Tolerances) -> usize {
    let lmax = values.last().copied().unwrap_or(0.0);
    let thr = tol.rank_threshold(lmax);
    values.iter().filter(|&&v| v > thr).count()
}

pub(crate) fn check_dims(a: &PsdMatrix, b: &PsdMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(())
}

/// `A⁺` over the eigenvalues above the rank threshold.
pub fn pseudo_inverse(a: &PsdMatrix, tol: &Tolerances) -> PsdMatrix {
    let skip = a.dim() - a.rank();
    let values = a.eigen.values.iter().enumerate().map(|(i, &v)| if i < skip { 0.0 } else { 1.0 / v }).collect();
    PsdMatrix::from_spectrum(values, a.eigen.vectors.clone(), tol)
}

/// `A^{1/2}` over the eigenvalues above the rank threshold; rounding-level
/// eigenvalues are not lifted into the range.
pub fn sqrt_psd(a: &PsdMatrix, tol: &Tolerances) -> PsdMatrix {
    let skip = a.dim() - a.rank();
    let values = a.eigen.values.iter().enumerate().map(|(i, &v)| if i < skip { 0.0 } else { v.sqrt() }).collect();
    PsdMatrix::from_spectrum(values, a.eigen.vectors.clone(), tol)
}

/// Orthogonal projection onto `ran A`.
pub fn range_projection(a: &PsdMatrix, tol: &Tolerances) -> PsdMatrix {
    let skip = a.dim() - a.rank();
    let values = (0..a.dim()).map(|i| if i < skip { 0.0 } else { 1.0 }).collect();
    PsdMatrix::from_spectrum(values, a.eigen.vectors.clone(), tol)
}

/// Loewner order `A ≤ B`: `λmin(B − A) ≥ −tol_order·(1 + ‖A‖ + ‖B‖)`.
pub fn loewner_leq(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<bool> {
    Ok(loewner_margin(a, b)? >= -tol.tol_order * (1.0 + a.norm() + b.norm()))
}

/// `λmin(B − A)`; nonnegative exactly when `A ≤ B`.
pub fn loewner_margin(a: &PsdMatrix, b: &PsdMatrix) -> Result<f64> {
    check_dims(a, b)?;
    if a.dim() == 0 {
        return Ok(0.0);
    }
    let diff = &b.mat - &a.mat;
    Ok(linalg::jacobi_eigen(&diff).values[0])
}

/// A subspace of `Cⁿ` held by an orthonormal basis.
#[derive(Debug, Clone)]
pub struct Subspace {
    ambient_dim: usize,
    basis: CMatrix,
}

impl Subspace {
    pub fn new(basis: CMatrix, tol: &Tolerances) -> Result<Self> {
        let k = basis.ncols();
        let defect = linalg::max_abs_entry(&(basis.adjoint() * &basis - linalg::identity(k)));
        if defect > tol.tol_sym.max(64.0 * f64::EPSILON) * (k.max(1) as f64) {
            return Err(Error::InvalidArgument(format!("basis is not orthonormal (defect {defect:.3e})")));
        }
        Ok(Self { ambient_dim: basis.nrows(), basis })
    }

    pub(crate) fn from_orthonormal(basis: CMatrix) -> Self {
        Self { ambient_dim: basis.nrows(), basis }
    }

    pub fn zero(ambient_dim: usize) -> Self {
        Self { ambient_dim, basis: CMatrix::zeros(ambient_dim, 0) }
    }

    pub fn range_of(a: &PsdMatrix) -> Self {
        Self::from_orthonormal(a.range_basis())
    }

    pub fn kernel_of(a: &PsdMatrix) -> Self {
        Self::from_orthonormal(a.kernel_basis())
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &CMatrix {
        &self.basis
    }

    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

/// `S ∩ T` from principal angles: directions whose cosine is at least
/// `1 − tol_rank`.
pub fn subspace_intersection(s: &Subspace, t: &Subspace, tol: &Tolerances) -> Result<Subspace> {
    if s.ambient_dim != t.ambient_dim {
        return Err(Error::DimensionMismatch { left: s.ambient_dim, right: t.ambient_dim });
    }
    if s.dim() == 0 || t.dim() == 0 {
        return Ok(Subspace::zero(s.ambient_dim));
    }
    let cross = s.basis.adjoint() * &t.basis;
    // eigenvalues of C·C* are the squared cosines of the principal angles
    let e = linalg::jacobi_eigen(&(&cross * cross.adjoint()));
    let cutoff = (1.0 - tol.tol_rank).powi(2);
    let keep: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] >= cutoff).collect();
    let dirs = CMatrix::from_fn(s.dim(), keep.len(), |r, k| e.vectors[(r, keep[k])]);
    Ok(Subspace::from_orthonormal(&s.basis * dirs))
}

/// Sine of the largest angle by which `ran B` leaves `ran A`: `‖(I − P_A)·P_B‖`.
pub fn range_excess(b: &PsdMatrix, a: &PsdMatrix, tol: &Tolerances) -> Result<f64> {
    check_dims(a, b)?;
    let pa = range_projection(a, tol);
    let pb = range_projection(b, tol);
    let escape = (linalg::identity(a.dim()) - pa.matrix()) * pb.matrix();
    Ok(linalg::spectral_norm(&escape))
}

/// `ran B ⊆ ran A`, decided with `tol_conv` on the escaping sine.
pub fn range_included(b: &PsdMatrix, a: &PsdMatrix, tol: &Tolerances) -> Result<bool> {
    Ok(range_excess(b, a, tol)? <= tol.tol_conv)
}

#[cfg(test)]
pub(crate) fn unit(n: usize, i: usize) -> CVector {
    CVector::from_fn(n, |k, _| if k == i { linalg::c(1.0) } else { linalg::c(0.0) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn ones2() -> PsdMatrix {
        PsdMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]], &tol()).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        linalg::max_abs_entry(&(a - b)) <= eps
    }

    #[test]
    fn rejects_non_hermitian_and_non_square() {
        let m = linalg::real_matrix(&[&[1.0, 2.0], &[0.0, 1.0]]);
        assert!(matches!(HermitianMatrix::new(m, &tol()), Err(Error::NonHermitianInput { .. })));
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(HermitianMatrix::new(m, &tol()), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn clips_tiny_negative_eigenvalues_but_rejects_indefinite() {
        let a = PsdMatrix::diag(&[1.0, -1e-12], &tol()).unwrap();
        assert_eq!(a.eigenvalues()[0], 0.0);
        assert_eq!(a.rank(), 1);
        let err = PsdMatrix::diag(&[1.0, -1e-3], &tol()).unwrap_err();
        assert!(matches!(err, Error::NotPositive { .. }));
    }

    #[test]
    fn effective_rank_is_relative() {
        let a = PsdMatrix::diag(&[1e6, 1e-4, 1e-10], &tol()).unwrap();
        // threshold 1e-9·1e6 = 1e-3
        assert_eq!(a.rank(), 1);
        let b = PsdMatrix::diag(&[0.5, 1e-8, 1e-10], &tol()).unwrap();
        assert_eq!(b.rank(), 2);
    }

    #[test]
    fn pseudo_inverse_examples() {
        let t = tol();
        let a = PsdMatrix::diag(&[4.0, 0.0], &t).unwrap();
        assert!(close(pseudo_inverse(&a, &t).matrix(), &linalg::diag_matrix(&[0.25, 0.0]), 1e-15));
        let z = PsdMatrix::zeros(2);
        assert!(close(pseudo_inverse(&z, &t).matrix(), &CMatrix::zeros(2, 2), 0.0));
        let p = pseudo_inverse(&ones2(), &t);
        assert!(close(p.matrix(), &ones2().matrix().scale(0.25), 1e-15));
    }

    #[test]
    fn sqrt_examples() {
        let t = tol();
        let a = PsdMatrix::diag(&[4.0, 9.0], &t).unwrap();
        assert!(close(sqrt_psd(&a, &t).matrix(), &linalg::diag_matrix(&[2.0, 3.0]), 1e-15));
        assert!(close(sqrt_psd(&PsdMatrix::zeros(3), &t).matrix(), &CMatrix::zeros(3, 3), 0.0));
        let r = sqrt_psd(&ones2(), &t);
        assert!(close(r.matrix(), &ones2().matrix().scale(0.5f64.sqrt()), 1e-15));
    }

    #[test]
    fn loewner_examples() {
        let t = tol();
        let p = PsdMatrix::diag(&[1.0, 0.0], &t).unwrap();
        assert!(loewner_leq(&p, &PsdMatrix::identity(2), &t).unwrap());
        let a = PsdMatrix::diag(&[2.0, 1.0], &t).unwrap();
        let b = PsdMatrix::diag(&[1.0, 2.0], &t).unwrap();
        assert!(!loewner_leq(&a, &b, &t).unwrap());
        assert!(!loewner_leq(&b, &a, &t).unwrap());
        assert!(loewner_leq(&a, &a, &t).unwrap());
        assert!(matches!(loewner_leq(&a, &PsdMatrix::identity(3), &t), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn range_projection_examples() {
        let t = tol();
        let a = PsdMatrix::diag(&[5.0, 0.0], &t).unwrap();
        assert!(close(range_projection(&a, &t).matrix(), &linalg::diag_matrix(&[1.0, 0.0]), 1e-15));
        assert!(close(range_projection(&ones2(), &t).matrix(), &ones2().matrix().scale(0.5), 1e-15));
        assert!(close(range_projection(&PsdMatrix::zeros(2), &t).matrix(), &CMatrix::zeros(2, 2), 0.0));
    }

    #[test]
    fn intersection_examples() {
        let t = tol();
        let e1 = Subspace::new(linalg::real_matrix(&[&[1.0], &[0.0]]), &t).unwrap();
        let e2 = Subspace::new(linalg::real_matrix(&[&[0.0], &[1.0]]), &t).unwrap();
        let h = 0.5f64.sqrt();
        let diag = Subspace::new(linalg::real_matrix(&[&[h], &[h]]), &t).unwrap();
        assert_eq!(subspace_intersection(&e1, &e2, &t).unwrap().dim(), 0);
        assert_eq!(subspace_intersection(&e1, &diag, &t).unwrap().dim(), 0);
        let same = subspace_intersection(&diag, &diag, &t).unwrap();
        assert_eq!(same.dim(), 1);
        assert!(close(&same.projector(), &diag.projector(), 1e-15));
        let e3 = Subspace::zero(3);
        assert!(matches!(subspace_intersection(&e1, &e3, &t), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn subspace_rejects_non_orthonormal_basis() {
        let m = linalg::real_matrix(&[&[1.0, 1.0], &[0.0, 1.0]]);
        assert!(Subspace::new(m, &tol()).is_err());
    }

    #[test]
    fn range_inclusion() {
        let t = tol();
        let a = PsdMatrix::diag(&[1.0, 0.0], &t).unwrap();
        let b = PsdMatrix::diag(&[2.0, 0.0], &t).unwrap();
        assert!(range_included(&b, &a, &t).unwrap());
        assert!(!range_included(&ones2(), &a, &t).unwrap());
        assert!(range_included(&a, &PsdMatrix::identity(2), &t).unwrap());
    }
}
