//! Quasi-units of `B`: elements `A ∈ [0, B]` with `A = [A]B`, their
//! certificates, the bijection `Ψ_B` with projections on `H_B`, Ando's infimum
//! criterion and the quasi-unit lattice.

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};
use crate::parallel::{parallel_sum, parallel_sum_closed_form};
use crate::psd::{self, check_dims, loewner_leq, PsdMatrix, Subspace};
use crate::random::{self, rng_from_seed};
use crate::short::{build_aux_space, generalized_short, is_singular, singularity_gap};
use crate::tol::Tolerances;
use rand::Rng;
use serde::Serialize;

/// Number of common lower bounds sampled by [`ando_infimum`].
pub const INFIMUM_SAMPLES: usize = 50;
const INFIMUM_SEED: u64 = 0x1f2e_3d4c_5b6a_7988;
const JOIN_SAMPLES: usize = 5;
const JOIN_SEED: u64 = 0x0dd5_ee1f_6b7a_2c3d;
const LAMBDA_CAP: f64 = 1e15;

/// Evidence for the four equivalent characterizations of a quasi-unit.
#[derive(Debug, Clone, Serialize)]
pub struct QuasiUnitCertificate {
    pub verdict: bool,
    /// `‖A − [A]B‖`
    pub fixed_point_gap: f64,
    /// `Q = J⁺A(J*)⁺` on `H_B`.
    #[serde(skip)]
    pub recovered_projection: Option<CMatrix>,
    /// `‖Q − Q²‖`
    pub projection_defect: f64,
    /// `‖A:(B − A)‖`
    pub singularity_gap: f64,
    /// `‖A:B − ½A‖`
    pub half_lemma_gap: f64,
    /// Individual verdicts: fixed point, projection, singular, half lemma.
    pub tests: [bool; 4],
}

impl QuasiUnitCertificate {
    pub fn unanimous(&self) -> bool {
        self.tests.iter().all(|&t| t == self.tests[0])
    }

    pub fn report(&self) -> String {
        format!(
            "verdict: {}\nfixed point gap ‖A-[A]B‖: {:.3e}\nprojection defect ‖Q-Q²‖: {:.3e}\nsingularity gap ‖A:(B-A)‖: {:.3e}\nhalf-lemma gap ‖A:B-A/2‖: {:.3e}",
            self.verdict, self.fixed_point_gap, self.projection_defect, self.singularity_gap, self.half_lemma_gap
        )
    }
}

/// Evaluates all four tests without insisting on agreement.
pub fn quasi_unit_certificate(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<QuasiUnitCertificate> {
    check_dims(a, b)?;
    if !loewner_leq(a, b, tol)? {
        return Err(Error::NotInInterval("A ≤ B fails".into()));
    }
    let scale = 1.0 + b.norm();

    let fixed_point_gap = generalized_short(a, b, tol)?.distance(a);

    let aux = build_aux_space(b);
    let q = linalg::symmetrize(&aux.pull_back(a.matrix()));
    let projection_defect = if q.nrows() == 0 { 0.0 } else { linalg::hermitian_norm(&(&q - &q * &q)) };

    let rest = PsdMatrix::from_computed(b.matrix() - a.matrix(), tol)?;
    let singular = is_singular(a, &rest, tol)?;
    let singularity_gap = parallel_sum_closed_form(a, &rest, tol)?.norm();

    let half = parallel_sum(a, b, tol)?.matrix() - a.matrix().scale(0.5);
    let half_lemma_gap = linalg::hermitian_norm(&half);

    let tests = [
        fixed_point_gap <= tol.tol_conv * scale,
        projection_defect <= tol.tol_conv,
        singular,
        half_lemma_gap <= tol.tol_conv * scale,
    ];
    Ok(QuasiUnitCertificate {
        verdict: tests.iter().all(|&t| t),
        fixed_point_gap,
        recovered_projection: Some(q),
        projection_defect,
        singularity_gap,
        half_lemma_gap,
        tests,
    })
}

/// Certificate whose four tests must agree; a split is a [`Error::CrossCheckFailure`].
pub fn is_quasi_unit(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<QuasiUnitCertificate> {
    let cert = quasi_unit_certificate(a, b, tol)?;
    if !cert.unanimous() {
        return Err(Error::CrossCheckFailure {
            what: format!("quasi-unit tests split {:?}\n{}", cert.tests, cert.report()),
            gap: cert.fixed_point_gap.max(cert.half_lemma_gap),
            tolerance: tol.tol_conv * (1.0 + b.norm()),
        });
    }
    Ok(cert)
}

fn projection_defect(p: &CMatrix) -> f64 {
    if p.nrows() == 0 {
        return 0.0;
    }
    let skew = linalg::spectral_norm(&(p - p.adjoint()));
    let idem = linalg::spectral_norm(&(p - p * p));
    skew.max(idem)
}

/// `Ψ_B(P) = J_B·P·J_B*`.
pub fn projection_to_quasiunit(p: &CMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    let aux = build_aux_space(b);
    let r = aux.rank();
    if p.nrows() != r || p.ncols() != r {
        return Err(Error::DimensionMismatch { left: p.nrows(), right: r });
    }
    let defect = projection_defect(p);
    if defect > tol.tol_conv {
        return Err(Error::NotAProjection { defect });
    }
    let a = PsdMatrix::from_computed(aux.push_forward(&linalg::symmetrize(p)), tol)?;
    if !loewner_leq(&a, b, tol)? || !loewner_leq(&PsdMatrix::zeros(b.dim()), &a, tol)? {
        return Err(Error::CrossCheckFailure {
            what: "Ψ_B(P) left [0, B]".into(),
            gap: psd::loewner_margin(&a, b)?.abs(),
            tolerance: tol.tol_order,
        });
    }
    Ok(a)
}

/// Inverse of [`projection_to_quasiunit`].
pub fn quasiunit_to_projection(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let cert = is_quasi_unit(a, b, tol)?;
    if !cert.verdict {
        return Err(Error::NotQuasiUnit);
    }
    Ok(cert.recovered_projection.expect("certificate carries Q"))
}

/// Which short came out smaller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InfimumWitness {
    /// `[A]B ≤ [B]A`
    LeftBelow,
    /// `[B]A ≤ [A]B`
    RightBelow,
    /// Both directions hold within tolerance.
    Both,
    Incomparable,
}

#[derive(Debug, Clone)]
pub struct InfimumResult {
    pub exists: bool,
    pub value: Option<PsdMatrix>,
    pub witness: InfimumWitness,
    /// Common lower bounds checked against `value`.
    pub samples_checked: usize,
}

/// Random common lower bounds of `A` and `B`: scaled PSD matrices living on
/// `ran A ∩ ran B`, mixed with multiples of `A:B`.
pub fn sample_common_lower_bounds<R: Rng>(
    rng: &mut R,
    a: &PsdMatrix,
    b: &PsdMatrix,
    count: usize,
    tol: &Tolerances,
) -> Result<Vec<PsdMatrix>> {
    check_dims(a, b)?;
    let common = psd::subspace_intersection(&Subspace::range_of(a), &Subspace::range_of(b), tol)?;
    let u = common.basis();
    let k = u.ncols();
    let ab = parallel_sum(a, b, tol)?;
    let roots = [
        psd::sqrt_psd(&psd::pseudo_inverse(a, tol), tol),
        psd::sqrt_psd(&psd::pseudo_inverse(b, tol), tol),
    ];
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let t: f64 = rng.random_range(0.0..=1.0);
        if k == 0 || i % 5 == 0 {
            out.push(PsdMatrix::from_computed(ab.matrix().scale(t), tol)?);
            continue;
        }
        let rank = rng.random_range(1..=k);
        let g = u * random::gaussian_matrix(rng, k, rank);
        let kmat = &g * g.adjoint();
        let worst = roots
            .iter()
            .map(|w| linalg::hermitian_norm(&(w.matrix() * &kmat * w.matrix())))
            .fold(0.0, f64::max);
        if worst == 0.0 {
            out.push(PsdMatrix::zeros(a.dim()));
            continue;
        }
        let factor = if i % 2 == 0 { 1.0 } else { 0.5 + 0.5 * t };
        out.push(PsdMatrix::from_computed(kmat.scale(factor / worst), tol)?);
    }
    Ok(out)
}

/// The infimum `A ∧ B` exists iff `[A]B` and `[B]A` are comparable, in which
/// case it is the smaller of the two.
pub fn ando_infimum(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<InfimumResult> {
    check_dims(a, b)?;
    let left = generalized_short(a, b, tol)?;
    let right = generalized_short(b, a, tol)?;
    let le = loewner_leq(&left, &right, tol)?;
    let ge = loewner_leq(&right, &left, tol)?;
    let (witness, value) = match (le, ge) {
        (true, true) => (InfimumWitness::Both, left),
        (true, false) => (InfimumWitness::LeftBelow, left),
        (false, true) => (InfimumWitness::RightBelow, right),
        (false, false) => {
            return Ok(InfimumResult { exists: false, value: None, witness: InfimumWitness::Incomparable, samples_checked: 0 })
        }
    };
    for (name, bound) in [("A", a), ("B", b)] {
        if !loewner_leq(&value, bound, tol)? {
            return Err(Error::CrossCheckFailure {
                what: format!("infimum is not below {name}"),
                gap: -psd::loewner_margin(&value, bound)?,
                tolerance: tol.tol_order,
            });
        }
    }
    let mut rng = rng_from_seed(INFIMUM_SEED);
    let samples = sample_common_lower_bounds(&mut rng, a, b, INFIMUM_SAMPLES, tol)?;
    for s in &samples {
        if !loewner_leq(s, &value, tol)? {
            return Err(Error::CrossCheckFailure {
                what: "infimum fails to dominate a common lower bound".into(),
                gap: -psd::loewner_margin(s, &value)?,
                tolerance: tol.tol_order,
            });
        }
    }
    Ok(InfimumResult { exists: true, value: Some(value), witness, samples_checked: samples.len() })
}

fn require_quasi_unit(s: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let cert = is_quasi_unit(s, b, tol)?;
    if !cert.verdict {
        return Err(Error::NotQuasiUnit);
    }
    Ok(cert.recovered_projection.expect("certificate carries Q"))
}

fn agree(what: &str, x: &PsdMatrix, y: &PsdMatrix, tolerance: f64) -> Result<()> {
    let gap = x.distance(y);
    if gap > tolerance {
        return Err(Error::CrossCheckFailure { what: what.into(), gap, tolerance });
    }
    Ok(())
}

/// Greatest lower bound of two quasi-units: `2(S:T)`.
pub fn quasi_meet(s: &PsdMatrix, t: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    require_quasi_unit(s, b, tol)?;
    require_quasi_unit(t, b, tol)?;
    let meet = parallel_sum(s, t, tol)?.scale(2.0, tol);
    require_quasi_unit(&meet, b, tol).map_err(|e| match e {
        Error::NotQuasiUnit => Error::CrossCheckFailure { what: "meet is not a quasi-unit".into(), gap: f64::NAN, tolerance: tol.tol_conv },
        other => other,
    })?;
    let allowed = tol.tol_conv * (1.0 + b.norm());
    agree("meet vs [S]T", &meet, &generalized_short(s, t, tol)?, allowed)?;
    agree("meet vs [T]S", &meet, &generalized_short(t, s, tol)?, allowed)?;
    Ok(meet)
}

/// Least upper bound of two quasi-units: `[S + T]B`.
pub fn quasi_join(s: &PsdMatrix, t: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    let ps = require_quasi_unit(s, b, tol)?;
    let pt = require_quasi_unit(t, b, tol)?;
    let join = generalized_short(&s.add(t, tol)?, b, tol)?;
    require_quasi_unit(&join, b, tol).map_err(|e| match e {
        Error::NotQuasiUnit => Error::CrossCheckFailure { what: "join is not a quasi-unit".into(), gap: f64::NAN, tolerance: tol.tol_conv },
        other => other,
    })?;
    for (name, x) in [("S", s), ("T", t)] {
        if !loewner_leq(x, &join, tol)? {
            return Err(Error::CrossCheckFailure {
                what: format!("join does not dominate {name}"),
                gap: -psd::loewner_margin(x, &join)?,
                tolerance: tol.tol_order,
            });
        }
    }
    // quasi-unit upper bounds: Ψ_B of projections onto ran Q_S + ran Q_T + random extra directions
    let aux = build_aux_space(b);
    let r = aux.rank();
    let span = linalg::orthonormalize(&matrix_hstack(&ps, &pt));
    let mut rng = rng_from_seed(JOIN_SEED);
    for _ in 0..JOIN_SAMPLES {
        let extra = rng.random_range(0..=r - span.ncols().min(r));
        let fresh = random::gaussian_matrix(&mut rng, r, extra);
        let basis = linalg::orthonormalize(&matrix_hstack(&span, &fresh));
        let upper = PsdMatrix::from_computed(aux.push_forward(&(&basis * basis.adjoint())), tol)?;
        if !loewner_leq(&join, &upper, tol)? {
            return Err(Error::CrossCheckFailure {
                what: "a quasi-unit upper bound fails to dominate the join".into(),
                gap: -psd::loewner_margin(&join, &upper)?,
                tolerance: tol.tol_order,
            });
        }
    }
    Ok(join)
}

fn matrix_hstack(x: &CMatrix, y: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(x.nrows(), x.ncols() + y.ncols());
    out.columns_mut(0, x.ncols()).copy_from(x);
    out.columns_mut(x.ncols(), y.ncols()).copy_from(y);
    out
}

/// One step of the recursion: `λ` and `‖(λT):W − λ/(1+λ)·T‖`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaStep {
    pub lambda: f64,
    pub gap: f64,
}

/// Checks `(λ_k T):W = λ_k/(1+λ_k)·T` along `λ₁ = 1`, `λ_{k+1} = λ_k(λ_k + 2)`
/// for up to `k_max` steps, stopping before `λ` exceeds `10¹⁵`.
pub fn lambda_iteration_check(t: &PsdMatrix, w: &PsdMatrix, k_max: usize, tol: &Tolerances) -> Result<Vec<LambdaStep>> {
    check_dims(t, w)?;
    let half = linalg::hermitian_norm(&(parallel_sum(t, w, tol)?.matrix() - t.matrix().scale(0.5)));
    if half > tol.tol_conv * (1.0 + w.norm()) {
        return Err(Error::HalfLemmaViolated { gap: half });
    }
    let allowed = tol.tol_conv * (1.0 + t.norm());
    let mut steps = Vec::new();
    let mut lambda: f64 = 1.0;
    for step in 1..=k_max {
        if lambda > LAMBDA_CAP {
            break;
        }
        let lhs = parallel_sum(&t.scale(lambda, tol), w, tol)?;
        let rhs = t.matrix().scale(lambda / (1.0 + lambda));
        let gap = linalg::hermitian_norm(&(lhs.matrix() - rhs));
        if gap > allowed {
            return Err(Error::IdentityDrift { step, gap });
        }
        steps.push(LambdaStep { lambda, gap });
        lambda *= lambda + 2.0;
    }
    Ok(steps)
}

/// `‖[W]T : (T − [W]T)‖`, which vanishes for every pair.
pub fn disjoint_short_gap(w: &PsdMatrix, t: &PsdMatrix, tol: &Tolerances) -> Result<f64> {
    let d = generalized_short(w, t, tol)?;
    let rest = PsdMatrix::from_computed(t.matrix() - d.matrix(), tol)?;
    Ok(singularity_gap(&d, &rest, tol)? * (1.0 + d.norm() + rest.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag(v: &[f64]) -> PsdMatrix {
        PsdMatrix::diag(v, &tol()).unwrap()
    }

    fn rows(r: &[&[f64]]) -> PsdMatrix {
        PsdMatrix::from_real_rows(r, &tol()).unwrap()
    }

    #[test]
    fn certificate_examples() {
        let t = tol();
        let b = rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let cert = is_quasi_unit(&b, &b, &t).unwrap();
        assert!(cert.verdict);
        let q = cert.recovered_projection.unwrap();
        assert!((q - linalg::identity(2)).norm() < 1e-12);

        let i2 = PsdMatrix::identity(2);
        let cert = is_quasi_unit(&diag(&[0.5, 0.5]), &i2, &t).unwrap();
        assert!(!cert.verdict);
        assert!((cert.half_lemma_gap - (1.0 / 3.0 - 0.25)).abs() < 1e-12);

        assert!(is_quasi_unit(&diag(&[1.0, 0.0]), &i2, &t).unwrap().verdict);
        assert!(matches!(is_quasi_unit(&diag(&[2.0, 0.0]), &i2, &t), Err(Error::NotInInterval(_))));
    }

    #[test]
    fn psi_examples() {
        let t = tol();
        let b = rows(&[&[2.0, 1.0], &[1.0, 3.0]]);
        let full = projection_to_quasiunit(&linalg::identity(2), &b, &t).unwrap();
        assert!(full.distance(&b) < 1e-13);
        assert!(projection_to_quasiunit(&CMatrix::zeros(2, 2), &b, &t).unwrap().norm() == 0.0);
        let b = diag(&[4.0, 9.0]);
        let a = projection_to_quasiunit(&linalg::diag_matrix(&[1.0, 0.0]), &b, &t).unwrap();
        assert!(a.distance(&diag(&[4.0, 0.0])) < 1e-14);
        let bad = linalg::diag_matrix(&[0.5, 0.0]);
        assert!(matches!(projection_to_quasiunit(&bad, &b, &t), Err(Error::NotAProjection { .. })));
    }

    #[test]
    fn psi_inverse_examples() {
        let t = tol();
        let b = diag(&[4.0, 9.0]);
        let q = quasiunit_to_projection(&b, &b, &t).unwrap();
        assert!((q - linalg::identity(2)).norm() < 1e-13);
        let q = quasiunit_to_projection(&PsdMatrix::zeros(2), &b, &t).unwrap();
        assert!(q.norm() < 1e-15);
        let q = quasiunit_to_projection(&diag(&[4.0, 0.0]), &b, &t).unwrap();
        assert!((q - linalg::diag_matrix(&[1.0, 0.0])).norm() < 1e-13);
        assert!(matches!(quasiunit_to_projection(&diag(&[2.0, 0.0]), &b, &t), Err(Error::NotQuasiUnit)));
    }

    #[test]
    fn infimum_examples() {
        let t = tol();
        let r = ando_infimum(&diag(&[2.0, 0.0]), &diag(&[1.0, 1.0]), &t).unwrap();
        assert!(r.exists);
        assert_eq!(r.witness, InfimumWitness::LeftBelow);
        assert!(r.value.unwrap().distance(&diag(&[1.0, 0.0])) < 1e-9);
        assert_eq!(r.samples_checked, INFIMUM_SAMPLES);

        let r = ando_infimum(&diag(&[2.0, 1.0]), &diag(&[1.0, 2.0]), &t).unwrap();
        assert!(!r.exists);
        assert!(r.value.is_none());

        let r = ando_infimum(&diag(&[1.0, 0.0]), &diag(&[0.0, 3.0]), &t).unwrap();
        assert!(r.exists);
        assert!(r.value.unwrap().norm() < 1e-12);
    }

    #[test]
    fn meet_examples() {
        let t = tol();
        let i2 = PsdMatrix::identity(2);
        let s = diag(&[1.0, 0.0]);
        let u = rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(quasi_meet(&s, &s, &i2, &t).unwrap().distance(&s) < 1e-12);
        assert!(quasi_meet(&s, &u, &i2, &t).unwrap().norm() < 1e-12);
        assert!(quasi_meet(&i2, &u, &i2, &t).unwrap().distance(&u) < 1e-12);
        let half = diag(&[0.5, 0.5]);
        assert!(matches!(quasi_meet(&half, &s, &i2, &t), Err(Error::NotQuasiUnit)));
    }

    #[test]
    fn join_examples() {
        let t = tol();
        let i2 = PsdMatrix::identity(2);
        let s = diag(&[1.0, 0.0]);
        let u = rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert!(quasi_join(&s, &s, &i2, &t).unwrap().distance(&s) < 1e-9);
        assert!(quasi_join(&s, &u, &i2, &t).unwrap().distance(&i2) < 1e-9);
        assert!(quasi_join(&PsdMatrix::zeros(2), &u, &i2, &t).unwrap().distance(&u) < 1e-9);
    }

    #[test]
    fn lambda_examples() {
        let t = tol();
        let i2 = PsdMatrix::identity(2);
        let steps = lambda_iteration_check(&diag(&[1.0, 0.0]), &i2, 4, &t).unwrap();
        let lambdas: Vec<f64> = steps.iter().map(|s| s.lambda).collect();
        assert_eq!(lambdas, vec![1.0, 3.0, 15.0, 255.0]);
        assert!(steps.iter().all(|s| s.gap < 1e-12));

        let steps = lambda_iteration_check(&PsdMatrix::zeros(2), &i2, 10, &t).unwrap();
        assert_eq!(steps.len(), 6);
        assert_eq!(steps.last().unwrap().lambda, 4294967295.0);
        assert!(steps.iter().all(|s| s.gap == 0.0));

        assert!(matches!(
            lambda_iteration_check(&diag(&[0.5, 0.5]), &i2, 4, &t),
            Err(Error::HalfLemmaViolated { .. })
        ));
    }

    #[test]
    fn disjoint_short_vanishes() {
        let t = tol();
        let w = diag(&[1.0, 0.0]);
        let b = rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
        assert!(disjoint_short_gap(&w, &b, &t).unwrap() < 1e-12);
    }
}
