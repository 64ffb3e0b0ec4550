//! Nonnegative sesquilinear forms on `Cⁿ`, given by Gram matrices with
//! possibly nontrivial kernels, and the order isomorphism `Φ_t` between
//! `[0, t]` and the operator interval `[0, I]` on `H_t`.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector};
use crate::parallel::parallel_sum;
use crate::psd::{check_dims, loewner_leq, PsdMatrix, Subspace};
use crate::quasi::{ando_infimum, InfimumResult};
use crate::short::generalized_short;
use crate::tol::Tolerances;

/// `t(x, y) = ⟨Gx, y⟩`.
#[derive(Debug, Clone)]
pub struct Form {
    gram: PsdMatrix,
    label: Option<String>,
}

impl Form {
    pub fn new(gram: PsdMatrix) -> Self {
        Form { gram, label: None }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn from_real_rows(rows: &[&[f64]], tol: &Tolerances) -> Result<Self> {
        PsdMatrix::from_real_rows(rows, tol).map(Form::new)
    }

    pub fn zero(n: usize) -> Self {
        Form::new(PsdMatrix::zeros(n))
    }

    pub fn space_dim(&self) -> usize {
        self.gram.dim()
    }

    pub fn gram(&self) -> &PsdMatrix {
        &self.gram
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// `t(x, y)`, linear in `x` and antilinear in `y`.
    pub fn eval(&self, x: &CVector, y: &CVector) -> num_complex::Complex64 {
        y.dotc(&(self.gram.matrix() * x))
    }

    /// `t[x] = t(x, x)`.
    pub fn quadratic(&self, x: &CVector) -> f64 {
        self.gram.quadratic_form(x)
    }

    pub fn add(&self, other: &Form, tol: &Tolerances) -> Result<Form> {
        self.gram.add(&other.gram, tol).map(Form::new)
    }

    pub fn sub(&self, other: &Form, tol: &Tolerances) -> Result<Form> {
        PsdMatrix::from_computed(self.gram.matrix() - other.gram.matrix(), tol).map(Form::new)
    }

    pub fn scale(&self, factor: f64, tol: &Tolerances) -> Form {
        Form::new(self.gram.scale(factor, tol))
    }

    pub fn leq(&self, other: &Form, tol: &Tolerances) -> Result<bool> {
        loewner_leq(&self.gram, &other.gram, tol)
    }

    pub fn distance(&self, other: &Form) -> f64 {
        self.gram.distance(&other.gram)
    }
}

/// `X / ker t` in coordinates where `⟨x + ker t, y + ker t⟩_t` is the standard
/// inner product of `Cʳ`.
#[derive(Debug, Clone)]
pub struct QuotientSpace {
    parent: Form,
    /// `r × n`, `x ↦ diag(√λ)·V_r*·x`
    coord_map: CMatrix,
    /// `n × r` right inverse of `coord_map` on `ran G`
    coord_pinv: CMatrix,
}

impl QuotientSpace {
    pub fn parent(&self) -> &Form {
        &self.parent
    }

    pub fn rank(&self) -> usize {
        self.coord_map.nrows()
    }

    pub fn coord_map(&self) -> &CMatrix {
        &self.coord_map
    }

    pub fn coords(&self, x: &CVector) -> CVector {
        &self.coord_map * x
    }
}

pub fn form_kernel(t: &Form) -> Subspace {
    Subspace::kernel_of(&t.gram)
}

pub fn quotient_space(t: &Form) -> QuotientSpace {
    let v = t.gram.range_basis();
    let values = t.gram.range_eigenvalues();
    let r = values.len();
    let coord_map = CMatrix::from_fn(r, v.nrows(), |k, i| v[(i, k)].conj() * c(values[k].sqrt()));
    let coord_pinv = CMatrix::from_fn(v.nrows(), r, |i, k| v[(i, k)] / values[k].sqrt());
    QuotientSpace { parent: t.clone(), coord_map, coord_pinv }
}

/// `j_{t,w}: x + ker t ↦ x + ker w` as an `r_w × r_t` matrix; requires `w ≤ t`.
pub fn embedding_j(t: &Form, w: &Form, tol: &Tolerances) -> Result<CMatrix> {
    check_dims(&t.gram, &w.gram)?;
    if !w.leq(t, tol)? {
        return Err(Error::NotDominated);
    }
    let qt = quotient_space(t);
    let qw = quotient_space(w);
    let j = &qw.coord_map * &qt.coord_pinv;
    let norm = linalg::spectral_norm(&j);
    if norm > 1.0 + tol.tol_conv {
        return Err(Error::CrossCheckFailure { what: "embedding is not a contraction".into(), gap: norm - 1.0, tolerance: tol.tol_conv });
    }
    Ok(j)
}

fn in_interval(w: &Form, t: &Form, tol: &Tolerances) -> Result<()> {
    check_dims(&t.gram, &w.gram)?;
    if !w.leq(t, tol)? {
        return Err(Error::NotInInterval("w ≤ t fails".into()));
    }
    Ok(())
}

/// `Φ_t(w) = j*j`, the operator on `H_t` representing `w`.
pub fn phi(t: &Form, w: &Form, tol: &Tolerances) -> Result<PsdMatrix> {
    in_interval(w, t, tol)?;
    let qt = quotient_space(t);
    PsdMatrix::from_computed(qt.coord_pinv.adjoint() * w.gram.matrix() * &qt.coord_pinv, tol)
}

/// The form `w(x, y) = ⟨A(x + ker t), y + ker t⟩_t` for `0 ≤ A ≤ I` on `H_t`.
pub fn phi_inverse(t: &Form, a: &PsdMatrix, tol: &Tolerances) -> Result<Form> {
    let qt = quotient_space(t);
    if a.dim() != qt.rank() {
        return Err(Error::DimensionMismatch { left: a.dim(), right: qt.rank() });
    }
    if !loewner_leq(a, &PsdMatrix::identity(a.dim()), tol)? {
        return Err(Error::NotInInterval("A ≤ I fails".into()));
    }
    let gram = qt.coord_map.adjoint() * a.matrix() * &qt.coord_map;
    PsdMatrix::from_computed(gram, tol).map(Form::new)
}

pub fn form_parallel_sum(t: &Form, w: &Form, tol: &Tolerances) -> Result<Form> {
    parallel_sum(&t.gram, &w.gram, tol).map(Form::new)
}

/// `D_w t = sup_n t:nw`.
pub fn form_short(w: &Form, t: &Form, tol: &Tolerances) -> Result<Form> {
    generalized_short(&w.gram, &t.gram, tol).map(Form::new)
}

pub fn form_inf_exists(u: &Form, v: &Form, tol: &Tolerances) -> Result<InfimumResult> {
    ando_infimum(&u.gram, &v.gram, tol)
}

/// `w` is a `t`-quasi-unit: `D_w t = w`, confirmed by `Φ_t(w)` being a projection.
pub fn is_form_quasi_unit(w: &Form, t: &Form, tol: &Tolerances) -> Result<bool> {
    let scale = 1.0 + t.gram.norm();
    let fixed = form_short(w, t, tol)?.distance(w) <= tol.tol_conv * scale;
    let p = phi(t, w, tol)?;
    let defect = if p.dim() == 0 { 0.0 } else { linalg::hermitian_norm(&(p.matrix() - p.matrix() * p.matrix())) };
    let projection = defect <= tol.tol_conv;
    if fixed != projection {
        return Err(Error::CrossCheckFailure {
            what: format!("form quasi-unit tests split: fixed point {fixed}, projection {projection}"),
            gap: defect,
            tolerance: tol.tol_conv,
        });
    }
    Ok(fixed)
}
