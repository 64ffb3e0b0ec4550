//! Parallel addition and parallel subtraction.
//!
//! `⟨(A:B)x, x⟩ = inf_y ⟨A(x−y), x−y⟩ + ⟨By, y⟩`. With factorizations
//! `A = J_A·J_A*` and `B = J_B·J_B*` the infimum is a least-squares residual:
//! writing `M = [J_A*; J_B*]` and `Q₁` for the `J_A` rows of an orthonormal
//! basis of `ran M`,
//!
//! ```text
//! A:B = J_A·(I − Q₁Q₁*)·J_A*
//! ```
//!
//! The basis comes from one-sided Jacobi on `[J_A | J_B]`, which keeps full
//! relative accuracy when the two operands differ in scale by many orders of
//! magnitude (`B:(2⁴⁰A)`, `(λT):W` with `λ ≈ 4·10⁹`). The textbook closed form
//! `A(A+B)⁺B` is kept as [`parallel_sum_closed_form`] for cross-checks.
//!
//! Parallel subtraction is only defined for forms; the operator version here
//! is transported through the form/operator correspondence and uses the
//! finite-dimensional solvability conditions derived from
//! `(S ÷ T)[x] = sup_y S[x+y] − T[y]`:
//! the supremum is finite for all `x` iff `T − S ≥ 0` and `ran S ⊆ ran(T − S)`,
//! and then equals `⟨(S + S(T−S)⁺S)x, x⟩`.

use crate::error::{Error, Result, Unsolvable};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::psd::{self, check_dims, PsdMatrix, Subspace};
use crate::tol::Tolerances;

/// `J = V_r·diag(√λ)` over the significant spectrum, so that `J·J* ≈ A`.
pub(crate) fn factor(a: &PsdMatrix) -> CMatrix {
    let basis = a.range_basis();
    let values = a.range_eigenvalues();
    CMatrix::from_fn(basis.nrows(), basis.ncols(), |i, k| basis[(i, k)] * values[k].sqrt())
}

/// `dim(ran A + ran B)`, from the shared principal-angle rank oracle.
pub(crate) fn joint_rank(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<usize> {
    let common = psd::subspace_intersection(&Subspace::range_of(a), &Subspace::range_of(b), tol)?;
    Ok(a.rank() + b.rank() - common.dim())
}

/// Parallel sum from factors `J_A`, `J_B` and `ρ = dim(ran A + ran B)`.
///
/// The smaller operand is used as the outer factor: with the larger one the
/// middle factor `I − Q₁Q₁*` would be a cancellation of size `‖small‖/‖large‖`
/// that then gets multiplied back up.
pub(crate) fn parallel_sum_from_factors(ja: &CMatrix, jb: &CMatrix, joint: usize, tol: &Tolerances) -> Result<PsdMatrix> {
    parallel_sum_warm(ja, jb, joint, tol, &mut None)
}

/// Right singular vectors of the last stacked factor, kept between calls
/// whose factors change only slowly. `outer_first_a` records which factor
/// occupied the leading columns.
pub(crate) struct WarmStart {
    outer_first_a: bool,
    vectors: CMatrix,
}

/// [`parallel_sum_from_factors`] reusing and updating a [`WarmStart`].
pub(crate) fn parallel_sum_warm(
    ja: &CMatrix,
    jb: &CMatrix,
    joint: usize,
    tol: &Tolerances,
    warm: &mut Option<WarmStart>,
) -> Result<PsdMatrix> {
    let a_outer = ja.norm() <= jb.norm();
    let (outer, inner) = if a_outer { (ja, jb) } else { (jb, ja) };
    let n = outer.nrows();
    let (ro, ri) = (outer.ncols(), inner.ncols());
    if ro == 0 || ri == 0 {
        return Ok(PsdMatrix::zeros(n));
    }
    let mut stacked = CMatrix::zeros(n, ro + ri);
    stacked.columns_mut(0, ro).copy_from(outer);
    stacked.columns_mut(ro, ri).copy_from(inner);
    let start = match warm.take() {
        Some(w) if w.vectors.nrows() == ro + ri => {
            if w.outer_first_a == a_outer {
                w.vectors
            } else {
                // the previous leading block had `ri` columns
                let mut v = CMatrix::zeros(ro + ri, ro + ri);
                v.rows_mut(0, ro).copy_from(&w.vectors.rows(ri, ro));
                v.rows_mut(ro, ri).copy_from(&w.vectors.rows(0, ri));
                v
            }
        }
        _ => linalg::identity(ro + ri),
    };
    let (_, v) = linalg::right_singular_vectors_from(&stacked, start);
    let q1 = v.view((0, 0), (ro, joint));
    let keep = linalg::identity(ro) - q1 * q1.adjoint();
    let result = PsdMatrix::from_computed(outer * keep * outer.adjoint(), tol);
    *warm = Some(WarmStart { outer_first_a: a_outer, vectors: v });
    result
}

/// `A:B`.
pub fn parallel_sum(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    check_dims(a, b)?;
    let joint = joint_rank(a, b, tol)?;
    parallel_sum_from_factors(&factor(a), &factor(b), joint, tol)
}

/// `A(A+B)⁺B`, symmetrized.
pub fn parallel_sum_closed_form(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    check_dims(a, b)?;
    let sum = a.add(b, tol)?;
    let pinv = psd::pseudo_inverse(&sum, tol);
    PsdMatrix::from_computed(a.matrix() * pinv.matrix() * b.matrix(), tol)
}

/// The variational definition evaluated directly: minimizes
/// `f(y) = ⟨A(x−y), x−y⟩ + ⟨By, y⟩` by conjugate gradients from `y = 0`.
///
/// Independent of every closed form in this module.
pub fn variational_parallel_sum_value(a: &PsdMatrix, b: &PsdMatrix, x: &CVector, tol: &Tolerances) -> Result<f64> {
    check_dims(a, b)?;
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: x.len() });
    }
    let n = a.dim();
    let objective = |y: &CVector| {
        let d = x - y;
        a.quadratic_form(&d) + b.quadratic_form(y)
    };
    let hessian = a.matrix() + b.matrix();
    let rhs = a.matrix() * x;

    let f0 = objective(&CVector::zeros(n));
    let cap = (10 * n * n).max(10);
    let stop = tol.tol_conv / 10.0 * (1.0 + f0);
    let tiny = (f64::EPSILON * (1.0 + rhs.norm())).powi(2);

    let mut y = CVector::zeros(n);
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut rr = r.norm_squared();
    let mut f = f0;
    for it in 1..=cap {
        if rr <= tiny {
            break;
        }
        let hp = &hessian * &p;
        let curvature = p.dotc(&hp).re;
        if curvature <= 0.0 {
            break;
        }
        let step = rr / curvature;
        y += &p * c(step);
        r -= hp * c(step);
        let rr_next = r.norm_squared();
        p = &r + &p * c(rr_next / rr);
        rr = rr_next;
        let f_next = objective(&y);
        let change = (f - f_next).abs();
        f = f_next;
        // a Krylov space of full dimension is reached after n steps
        if it >= n && change <= stop {
            break;
        }
    }
    Ok(f.min(f0))
}

/// `S ÷ T` together with a first-order bound on its forward error.
#[derive(Debug, Clone)]
pub struct Difference {
    pub value: PsdMatrix,
    /// `‖S·D⁺‖²·‖δD‖` with `D = T − S` and `δD` the rounding in forming `D`.
    /// Grows like the square of the conditioning of `D` on its range.
    pub error_bound: f64,
}

/// Relative noise floor of a computed difference `T − S`, per dimension.
const DIFF_NOISE: f64 = 64.0 * f64::EPSILON;

/// `S ÷ T`: the minimal solution `X` of `X:T = S`.
pub fn parallel_diff(s: &PsdMatrix, t: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    parallel_diff_bounded(s, t, tol).map(|d| d.value)
}

/// [`parallel_diff`] with its error bound. `D = T − S` keeps every eigenvalue
/// above the rounding noise of the subtraction: the solution depends on the
/// small eigenvalues of `D`, so the usual relative rank cutoff would discard
/// genuine directions.
pub fn parallel_diff_bounded(s: &PsdMatrix, t: &PsdMatrix, tol: &Tolerances) -> Result<Difference> {
    check_dims(s, t)?;
    let n = s.dim();
    let gap_matrix = t.matrix() - s.matrix();
    let e = linalg::jacobi_eigen(&gap_matrix);
    if n == 0 {
        return Ok(Difference { value: PsdMatrix::zeros(0), error_bound: 0.0 });
    }
    let lmax = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if e.values[0] < -tol.tol_psd * (1.0 + lmax) {
        return Err(Error::NotSolvable(Unsolvable::Indefinite {
            min_eigenvalue: e.values[0],
            direction: e.vectors.column(0).into_owned(),
        }));
    }
    let noise = DIFF_NOISE * n as f64 * (s.norm() + t.norm());
    let kept: Vec<usize> = (0..n).filter(|&i| e.values[i] > noise).collect();
    let basis = CMatrix::from_fn(n, kept.len(), |r, k| e.vectors[(r, kept[k])]);
    let escape = (linalg::identity(n) - &basis * basis.adjoint()) * s.matrix();
    let gap = linalg::spectral_norm(&escape);
    if gap > tol.tol_conv * (1.0 + s.norm()) {
        let dir = linalg::jacobi_eigen(&(&escape * escape.adjoint()));
        return Err(Error::NotSolvable(Unsolvable::RangeExcess {
            gap,
            direction: dir.vectors.column(n - 1).into_owned(),
        }));
    }
    // S·D⁺ = (S·V)·diag(1/d)·V*
    let sv = s.matrix() * &basis;
    let sv_scaled = CMatrix::from_fn(n, kept.len(), |r, k| sv[(r, k)] / e.values[kept[k]]);
    let s_dplus = &sv_scaled * basis.adjoint();
    let value = PsdMatrix::from_computed(s.matrix() + &s_dplus * s.matrix(), tol)?;
    let error_bound = linalg::spectral_norm(&s_dplus).powi(2) * noise;

    let back = parallel_sum(&value, t, tol)?;
    let residual = back.distance(s);
    let allowed = tol.tol_conv * (1.0 + s.norm() + t.norm());
    if residual > allowed {
        return Err(Error::CrossCheckFailure { what: "(S ÷ T):T = S".into(), gap: residual, tolerance: allowed });
    }
    Ok(Difference { value, error_bound })
}

/// Distance `‖λT:μT − (λμ/(λ+μ))T‖`, relative to `1 + (λ+μ)‖T‖`.
pub fn scalar_parallel_gap(t: &PsdMatrix, lambda: f64, mu: f64, tol: &Tolerances) -> Result<f64> {
    if !(lambda > 0.0 && mu > 0.0 && lambda.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidArgument("λ and μ must be positive".into()));
    }
    let lhs = parallel_sum(&t.scale(lambda, tol), &t.scale(mu, tol), tol)?;
    let rhs = t.scale(lambda * mu / (lambda + mu), tol);
    Ok(lhs.distance(&rhs) / (1.0 + (lambda + mu) * t.norm()))
}

/// `λT:μT = (λμ/(λ+μ))T` within `tol_conv`.
pub fn scalar_parallel_check(t: &PsdMatrix, lambda: f64, mu: f64, tol: &Tolerances) -> Result<bool> {
    Ok(scalar_parallel_gap(t, lambda, mu, tol)? <= tol.tol_conv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::psd::loewner_leq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn diag(v: &[f64]) -> PsdMatrix {
        PsdMatrix::diag(v, &tol()).unwrap()
    }

    fn ones2() -> PsdMatrix {
        PsdMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]], &tol()).unwrap()
    }

    fn vec2(a: f64, b: f64) -> CVector {
        CVector::from_vec(vec![c(a), c(b)])
    }

    /// Brute-force infimum over a grid of real y (the minimizer is real for
    /// real inputs).
    fn grid_infimum(a: &PsdMatrix, b: &PsdMatrix, x: &CVector) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..=400 {
            for j in 0..=400 {
                let y = vec2(-2.0 + i as f64 * 0.01, -2.0 + j as f64 * 0.01);
                let d = x - &y;
                best = best.min(a.quadratic_form(&d) + b.quadratic_form(&y));
            }
        }
        best
    }

    #[test]
    fn parallel_sum_examples() {
        let t = tol();
        let half = parallel_sum(&PsdMatrix::identity(2), &PsdMatrix::identity(2), &t).unwrap();
        assert!(half.distance(&diag(&[0.5, 0.5])) < 1e-15);
        let a = PsdMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]], &t).unwrap();
        assert!(parallel_sum(&a, &PsdMatrix::zeros(2), &t).unwrap().norm() == 0.0);
        let orth = parallel_sum(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), &t).unwrap();
        assert!(orth.norm() < 1e-15);
        let mixed = parallel_sum(&diag(&[1.0, 0.0]), &PsdMatrix::identity(2), &t).unwrap();
        assert!(mixed.distance(&diag(&[0.5, 0.0])) < 1e-15);
    }

    #[test]
    fn grid_oracle_confirms_orthogonal_example() {
        let x = vec2(1.0, 1.0);
        let v = grid_infimum(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), &x);
        assert!(v.abs() < 1e-12);
        let v = grid_infimum(&PsdMatrix::identity(2), &PsdMatrix::identity(2), &vec2(1.0, 0.0));
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn variational_examples() {
        let t = tol();
        let i2 = PsdMatrix::identity(2);
        let v = variational_parallel_sum_value(&i2, &i2, &vec2(1.0, 0.0), &t).unwrap();
        assert!((v - 0.5).abs() < 1e-12);
        let a = PsdMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]], &t).unwrap();
        let v = variational_parallel_sum_value(&a, &PsdMatrix::zeros(2), &vec2(0.3, -1.0), &t).unwrap();
        assert!(v.abs() < 1e-12);
        let v = variational_parallel_sum_value(&diag(&[1.0, 0.0]), &diag(&[0.0, 1.0]), &vec2(1.0, 1.0), &t).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn closed_form_agrees_on_examples() {
        let t = tol();
        let a = PsdMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]], &t).unwrap();
        let b = ones2();
        let f = parallel_sum(&a, &b, &t).unwrap();
        let g = parallel_sum_closed_form(&a, &b, &t).unwrap();
        assert!(f.distance(&g) < 1e-13);
    }

    #[test]
    fn extreme_scale_ratio_stays_exact() {
        // diag(2,3) : n·diag(1,0) = diag(2n/(2+n), 0) even at n = 2^50
        let t = tol();
        let n = 2f64.powi(50);
        let r = parallel_sum(&diag(&[2.0, 3.0]), &diag(&[n, 0.0]), &t).unwrap();
        assert!(r.distance(&diag(&[2.0 * n / (2.0 + n), 0.0])) < 1e-12);
    }

    #[test]
    fn parallel_diff_examples() {
        let t = tol();
        let i2 = PsdMatrix::identity(2);
        let r = parallel_diff(&diag(&[0.5, 0.5]), &i2, &t).unwrap();
        assert!(r.distance(&i2) < 1e-12);
        let r = parallel_diff(&PsdMatrix::zeros(2), &i2, &t).unwrap();
        assert!(r.norm() < 1e-15);
        match parallel_diff(&i2, &i2, &t) {
            Err(Error::NotSolvable(Unsolvable::RangeExcess { .. })) => {}
            other => panic!("expected range failure, got {other:?}"),
        }
        match parallel_diff(&diag(&[2.0, 0.0]), &i2, &t) {
            Err(Error::NotSolvable(Unsolvable::Indefinite { direction, .. })) => {
                assert!((direction[0].norm() - 1.0).abs() < 1e-12);
            }
            other => panic!("expected definiteness failure, got {other:?}"),
        }
    }

    #[test]
    fn sup_formula_diverges_when_unsolvable() {
        // (I ÷ I)[x] ≥ I[x + s·x] − I[s·x] = (1 + 2s)‖x‖² → ∞
        let i2 = PsdMatrix::identity(2);
        let x = vec2(1.0, 0.0);
        let at = |s: f64| {
            let y = &x * c(s);
            i2.quadratic_form(&(&x + &y)) - i2.quadratic_form(&y)
        };
        assert!((at(10.0) - 21.0).abs() < 1e-12);
        assert!(at(1e6) > 1e6);
    }

    #[test]
    fn parallel_diff_cross_check_with_short() {
        // (I:I) ÷ I = I
        let t = tol();
        let i2 = PsdMatrix::identity(2);
        let s = parallel_sum(&i2, &i2, &t).unwrap();
        assert!(parallel_diff(&s, &i2, &t).unwrap().distance(&i2) < 1e-12);
    }

    #[test]
    fn scalar_examples() {
        let t = tol();
        assert!(scalar_parallel_check(&PsdMatrix::identity(2), 1.0, 1.0, &t).unwrap());
        assert!(scalar_parallel_check(&PsdMatrix::zeros(2), 2.0, 5.0, &t).unwrap());
        assert!(scalar_parallel_check(&ones2(), 1.0, 3.0, &t).unwrap());
        let r = parallel_sum(&ones2(), &ones2().scale(3.0, &t), &t).unwrap();
        assert!(r.distance(&ones2().scale(0.75, &t)) < 1e-14);
        assert!(scalar_parallel_check(&ones2(), 0.0, 1.0, &t).is_err());
    }

    #[test]
    fn bounded_by_operands() {
        let t = tol();
        let a = PsdMatrix::from_real_rows(&[&[2.0, 1.0], &[1.0, 3.0]], &t).unwrap();
        let b = ones2();
        let r = parallel_sum(&a, &b, &t).unwrap();
        assert!(loewner_leq(&r, &a, &t).unwrap());
        assert!(loewner_leq(&r, &b, &t).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let t = tol();
        assert!(matches!(
            parallel_sum(&PsdMatrix::identity(2), &PsdMatrix::identity(3), &t),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
