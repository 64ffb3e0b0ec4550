//! Dense complex kernels: cyclic Jacobi for Hermitian eigenproblems and
//! one-sided Jacobi for singular vectors.
//!
//! Both sweep pairs in a fixed row-cyclic order, so results are bitwise
//! reproducible for a given input.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

const MAX_SWEEPS: usize = 100;

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Builds a complex matrix from real rows.
pub fn real_matrix(rows: &[&[f64]]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMatrix::from_fn(n, m, |i, j| c(rows[i][j]))
}

pub fn diag_matrix(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i]) } else { Complex64::default() })
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// `½(M + M*)`.
pub fn symmetrize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn max_abs_entry(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Spectral decomposition `M = V·diag(values)·V*` with ascending values.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Unitary 2×2 rotation `[[j00, j01], [j10, j11]]` that diagonalizes the
/// Hermitian block `[[app, apq], [conj(apq), aqq]]` under `J*·H·J`.
fn rotation(app: f64, aqq: f64, apq: Complex64) -> [Complex64; 4] {
    let b = apq.norm();
    let theta = (aqq - app) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let cs = 1.0 / (t * t + 1.0).sqrt();
    let sn = t * cs;
    // phase that makes the off-diagonal entry real and positive; rescaled
    // first so a subnormal `apq` still gives a unit-modulus phase
    let scaled = apq / apq.re.abs().max(apq.im.abs());
    let u = scaled.conj() / scaled.norm();
    [c(cs), c(sn), -u * sn, u * cs]
}

fn rotate_columns(m: &mut CMatrix, p: usize, q: usize, j: &[Complex64; 4]) {
    for k in 0..m.nrows() {
        let mp = m[(k, p)];
        let mq = m[(k, q)];
        m[(k, p)] = mp * j[0] + mq * j[2];
        m[(k, q)] = mp * j[1] + mq * j[3];
    }
}

fn rotate_rows_adjoint(m: &mut CMatrix, p: usize, q: usize, j: &[Complex64; 4]) {
    for k in 0..m.ncols() {
        let mp = m[(p, k)];
        let mq = m[(q, k)];
        m[(p, k)] = j[0].conj() * mp + j[2].conj() * mq;
        m[(q, k)] = j[1].conj() * mp + j[3].conj() * mq;
    }
}

/// Cyclic Jacobi eigensolver for a Hermitian matrix.
///
/// The input is symmetrized first; callers validate Hermitian-ness.
pub fn jacobi_eigen(m: &CMatrix) -> Eigen {
    assert!(m.is_square(), "jacobi_eigen needs a square matrix");
    let n = m.nrows();
    let mut a = symmetrize(m);
    for i in 0..n {
        a[(i, i)] = c(a[(i, i)].re);
    }
    let mut v = identity(n);
    let frob = a.norm();
    let floor = f64::EPSILON * f64::EPSILON * frob;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let b = apq.norm();
                if b <= floor || b <= f64::EPSILON * (app * aqq).abs().sqrt() {
                    continue;
                }
                let j = rotation(app, aqq, apq);
                rotate_columns(&mut a, p, q, &j);
                rotate_rows_adjoint(&mut a, p, q, &j);
                a[(p, q)] = Complex64::default();
                a[(q, p)] = Complex64::default();
                a[(p, p)] = c(a[(p, p)].re);
                a[(q, q)] = c(a[(q, q)].re);
                rotate_columns(&mut v, p, q, &j);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Eigen { values, vectors }
}

/// Right singular vectors of `x`, ordered by descending singular value.
///
/// One-sided Jacobi: columns of `x` are rotated until mutually orthogonal, so
/// `x·V = U·Σ`. Column scaling of `x` does not degrade the relative accuracy,
/// which is what lets parallel sums of wildly different magnitudes stay exact.
pub fn right_singular_vectors(x: &CMatrix) -> (Vec<f64>, CMatrix) {
    right_singular_vectors_from(x, identity(x.ncols()))
}

/// [`right_singular_vectors`] started from the unitary `v0` instead of the
/// identity. A `v0` close to the answer needs only one or two sweeps.
pub fn right_singular_vectors_from(x: &CMatrix, v0: CMatrix) -> (Vec<f64>, CMatrix) {
    let m = x.ncols();
    let mut w = x * &v0;
    let mut v = v0;
    // inner products below this are rounding noise of `x` itself
    let floor = (f64::EPSILON * x.norm()).powi(2);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let cp = w.column(p);
                let cq = w.column(q);
                let alpha = cp.norm_squared();
                let beta = cq.norm_squared();
                let gamma = cp.dotc(&cq);
                let g = gamma.norm();
                if g <= floor || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                let j = rotation(alpha, beta, gamma);
                rotate_columns(&mut w, p, q, &j);
                rotate_columns(&mut v, p, q, &j);
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma: Vec<f64> = (0..m).map(|k| w.column(k).norm()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let values = order.iter().map(|&i| sigma[i]).collect();
    let vectors = CMatrix::from_fn(m, m, |r, k| v[(r, order[k])]);
    (values, vectors)
}

/// Largest absolute eigenvalue of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let e = jacobi_eigen(m);
    e.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Spectral norm of an arbitrary matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    let gram = if m.nrows() <= m.ncols() { m * m.adjoint() } else { m.adjoint() * m };
    jacobi_eigen(&gram).values.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Modified Gram–Schmidt, applied twice. Columns that vanish are dropped.
pub fn orthonormalize(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let scale = m.column_iter().map(|col| col.norm()).fold(0.0, f64::max);
    let mut basis: Vec<CVector> = Vec::new();
    for col in m.column_iter() {
        let mut v: CVector = col.into_owned();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&v);
                v -= b * proj;
            }
        }
        let norm = v.norm();
        if norm > 1e-10 * scale.max(f64::MIN_POSITIVE) {
            basis.push(v / c(norm));
        }
    }
    CMatrix::from_fn(n, basis.len(), |i, j| basis[j][i])
}
