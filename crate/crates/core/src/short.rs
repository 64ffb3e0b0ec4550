//! The generalized short `[A]B` and the Lebesgue decomposition of `B` with
//! respect to `A`.
//!
//! `[A]B` is computed three ways and the public entry point
//! [`generalized_short`] refuses to answer unless they agree:
//!
//! * [`short_aux`]: the projection formula `[A]B = J_B(I − P_M)J_B*` on the
//!   auxiliary space `H_B`, where `M = J_B*(ker A)` is the multivalued part of
//!   the relation `{(Ax, Bx)}` (closed in finite dimension);
//! * [`short_schur`]: the Schur complement of `B` onto `ran A`, which equals
//!   `[A]B` in finite dimension since absolute continuity there is range
//!   inclusion;
//! * [`short_iterative`]: the monotone limit of `B:(nA)` along `n = 2^k`.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix};
use crate::parallel::{self, factor, joint_rank, parallel_sum_warm};
use crate::psd::{self, check_dims, PsdMatrix, Subspace};
use crate::tol::Tolerances;
use serde::Serialize;

const MAX_DOUBLINGS: u32 = 60;

/// Coordinates for `H_B`: `J = V_r·diag(√λ)` maps `Cʳ` isometrically onto
/// `(ran B, ⟨B·,·⟩)` so that `J·J* = B`.
#[derive(Debug, Clone)]
pub struct AuxSpace {
    source: PsdMatrix,
    j: CMatrix,
    jstar: CMatrix,
    /// left inverse of `J`: `diag(λ^{-1/2})·V_r*`
    jplus: CMatrix,
}

impl AuxSpace {
    pub fn source(&self) -> &PsdMatrix {
        &self.source
    }

    pub fn rank(&self) -> usize {
        self.j.ncols()
    }

    pub fn j(&self) -> &CMatrix {
        &self.j
    }

    pub fn jstar(&self) -> &CMatrix {
        &self.jstar
    }

    /// `J·Q·J*`.
    pub fn push_forward(&self, q: &CMatrix) -> CMatrix {
        &self.j * q * &self.jstar
    }

    /// `J⁺·X·(J*)⁺`; inverse of [`Self::push_forward`] on operators living on `ran B`.
    pub fn pull_back(&self, x: &CMatrix) -> CMatrix {
        &self.jplus * x * self.jplus.adjoint()
    }
}

pub fn build_aux_space(b: &PsdMatrix) -> AuxSpace {
    let j = factor(b);
    let basis = b.range_basis();
    let values = b.range_eigenvalues();
    let jplus = CMatrix::from_fn(basis.ncols(), basis.nrows(), |k, i| basis[(i, k)].conj() / values[k].sqrt());
    AuxSpace { source: b.clone(), jstar: j.adjoint(), j, jplus }
}

/// `M = {J_B*x : Ax = 0}` as an orthonormal basis of a subspace of `H_B`.
pub fn multivalued_part(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<Subspace> {
    check_dims(a, b)?;
    let aux = build_aux_space(b);
    Ok(multivalued_part_in(&aux, a, tol))
}

fn multivalued_part_in(aux: &AuxSpace, a: &PsdMatrix, tol: &Tolerances) -> Subspace {
    let r = aux.rank();
    let kernel = a.kernel_basis();
    if r == 0 || kernel.ncols() == 0 {
        return Subspace::zero(r);
    }
    let image = &aux.jstar * kernel;
    let e = linalg::jacobi_eigen(&(&image * image.adjoint()));
    let thr = tol.rank_threshold(e.values[r - 1]);
    let keep: Vec<usize> = (0..r).filter(|&i| e.values[i] > thr).collect();
    let basis = CMatrix::from_fn(r, keep.len(), |i, k| e.vectors[(i, keep[k])]);
    Subspace::from_orthonormal(basis)
}

/// `[A]B = J_B(I − P_M)J_B*`.
pub fn short_aux(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    check_dims(a, b)?;
    let aux = build_aux_space(b);
    let m = multivalued_part_in(&aux, a, tol);
    let keep = linalg::identity(aux.rank()) - m.projector();
    PsdMatrix::from_computed(aux.push_forward(&keep), tol)
}

/// Schur-complement short of `B` onto `ran A`.
pub fn short_schur(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    check_dims(a, b)?;
    let u1 = a.range_basis();
    let u2 = a.kernel_basis();
    if u1.ncols() == 0 {
        return Ok(PsdMatrix::zeros(a.dim()));
    }
    if u2.ncols() == 0 {
        return Ok(b.clone());
    }
    let bm = b.matrix();
    let b11 = u1.adjoint() * bm * &u1;
    let b12 = u1.adjoint() * bm * &u2;
    let b22 = PsdMatrix::from_computed(u2.adjoint() * bm * &u2, tol)?;
    let b22_pinv = psd::pseudo_inverse(&b22, tol);
    let complement = b11 - &b12 * b22_pinv.matrix() * b12.adjoint();
    PsdMatrix::from_computed(&u1 * complement * u1.adjoint(), tol)
}

/// Iterates `B:(2^k A)` recorded by [`short_iterative_trace`].
#[derive(Debug, Clone)]
pub struct ShortTrace {
    pub iterates: Vec<PsdMatrix>,
    pub last_gap: f64,
}

/// `B:(nA)` along `n = 1, 2, 4, …` until successive iterates differ by less
/// than `tol_conv·(1 + ‖B‖)`.
pub fn short_iterative_trace(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<ShortTrace> {
    check_dims(a, b)?;
    let jb = factor(b);
    let ja = factor(a);
    let joint = joint_rank(a, b, tol)?;
    let stop = tol.tol_conv * (1.0 + b.norm());

    let mut iterates: Vec<PsdMatrix> = Vec::new();
    let mut last_gap = f64::INFINITY;
    let mut warm = None;
    for k in 0..=MAX_DOUBLINGS {
        let scaled = &ja * c(2f64.powi(k as i32).sqrt());
        let next = parallel_sum_warm(&jb, &scaled, joint, tol, &mut warm)?;
        if let Some(prev) = iterates.last() {
            last_gap = next.distance(prev);
        }
        iterates.push(next);
        if last_gap < stop {
            return Ok(ShortTrace { iterates, last_gap });
        }
    }
    Err(Error::NoConvergence { last_gap })
}

pub fn short_iterative(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    let mut trace = short_iterative_trace(a, b, tol)?;
    Ok(trace.iterates.pop().expect("trace holds at least two iterates"))
}

/// Pairwise spectral-norm gaps between the three routes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShortAgreement {
    pub aux_schur: f64,
    pub aux_iterative: f64,
    pub schur_iterative: f64,
}

/// Runs all three routes and reports their disagreement.
pub fn short_all(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<(PsdMatrix, PsdMatrix, PsdMatrix, ShortAgreement)> {
    let aux = short_aux(a, b, tol)?;
    let schur = short_schur(a, b, tol)?;
    let iter = short_iterative(a, b, tol)?;
    let agreement = ShortAgreement {
        aux_schur: aux.distance(&schur),
        aux_iterative: aux.distance(&iter),
        schur_iterative: schur.distance(&iter),
    };
    Ok((aux, schur, iter, agreement))
}

/// Deterministic elements of `{C ≤ B : ran C ⊆ ran A}`: `B:A`, `B:4A`, and the
/// largest multiple of `vv*` below `B` for each basis vector `v` of
/// `ran A ∩ ran B`.
pub fn maximality_candidates(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<Vec<PsdMatrix>> {
    let mut out = vec![parallel::parallel_sum(b, a, tol)?, parallel::parallel_sum(b, &a.scale(4.0, tol), tol)?];
    let common = psd::subspace_intersection(&Subspace::range_of(a), &Subspace::range_of(b), tol)?;
    let b_pinv = psd::pseudo_inverse(b, tol);
    for v in common.basis().column_iter() {
        let weight = v.dotc(&(b_pinv.matrix() * v)).re;
        if weight > 0.0 {
            let rank_one = (v * v.adjoint()).scale(1.0 / weight);
            out.push(PsdMatrix::from_computed(rank_one, tol)?);
        }
    }
    Ok(out)
}

/// `[A]B` with mandatory agreement of all three routes and a maximality spot
/// check against [`maximality_candidates`].
pub fn generalized_short(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    check_dims(a, b)?;
    let (aux, _, _, gaps) = short_all(a, b, tol)?;
    let scale = 1.0 + b.norm();
    let checks = [
        ("short_aux vs short_schur", gaps.aux_schur, tol.tol_conv * scale),
        ("short_aux vs short_iterative", gaps.aux_iterative, 10.0 * tol.tol_conv * scale),
        ("short_schur vs short_iterative", gaps.schur_iterative, 10.0 * tol.tol_conv * scale),
    ];
    for (what, gap, tolerance) in checks {
        if gap > tolerance {
            return Err(Error::CrossCheckFailure { what: what.into(), gap, tolerance });
        }
    }
    for candidate in maximality_candidates(a, b, tol)? {
        let margin = psd::loewner_margin(&candidate, &aux)?;
        let allowed = tol.tol_order * (1.0 + candidate.norm() + aux.norm());
        if margin < -allowed {
            return Err(Error::CrossCheckFailure {
                what: "maximality of [A]B".into(),
                gap: -margin,
                tolerance: allowed,
            });
        }
    }
    Ok(aux)
}

/// `B ≪ A`: `[A]B = B`, confirmed by range inclusion `ran B ⊆ ran A`.
pub fn is_absolutely_continuous(b: &PsdMatrix, a: &PsdMatrix, tol: &Tolerances) -> Result<bool> {
    let short = generalized_short(a, b, tol)?;
    let gap = short.distance(b);
    let allowed = tol.tol_conv * (1.0 + b.norm());
    let by_short = gap <= allowed;
    let excess = psd::range_excess(b, a, tol)?;
    let by_range = excess <= tol.tol_conv;
    if by_short != by_range {
        return Err(Error::CrossCheckFailure {
            what: format!("absolute continuity: short test {by_short}, range test {by_range} (range excess {excess:.3e})"),
            gap,
            tolerance: allowed,
        });
    }
    Ok(by_short)
}

/// `‖A:B‖` relative to `1 + ‖A‖ + ‖B‖`, via the closed form so that it stays
/// independent of the principal-angle test.
pub fn singularity_gap(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<f64> {
    let ps = parallel::parallel_sum_closed_form(a, b, tol)?;
    Ok(ps.norm() / (1.0 + a.norm() + b.norm()))
}

/// `A ⊥ B`: `A:B = 0`, confirmed by `ran A ∩ ran B = {0}`.
pub fn is_singular(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<bool> {
    check_dims(a, b)?;
    let gap = singularity_gap(a, b, tol)?;
    let by_sum = gap <= tol.tol_conv;
    let common = psd::subspace_intersection(&Subspace::range_of(a), &Subspace::range_of(b), tol)?;
    let by_ranges = common.dim() == 0;
    if by_sum != by_ranges {
        return Err(Error::CrossCheckFailure {
            what: format!("singularity: parallel-sum test {by_sum}, range test {by_ranges}"),
            gap,
            tolerance: tol.tol_conv,
        });
    }
    Ok(by_sum)
}

/// `B = [A]B + (B − [A]B)`.
#[derive(Debug, Clone)]
pub struct LebesgueDecomposition {
    pub regular: PsdMatrix,
    pub singular_part: PsdMatrix,
    /// Always true in finite dimension: `[A]B ≤ αA` for `α = alpha_min`.
    pub unique: bool,
    pub alpha_min: Option<f64>,
}

pub fn lebesgue_decompose(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<LebesgueDecomposition> {
    let regular = generalized_short(a, b, tol)?;
    let singular_part = PsdMatrix::from_computed(b.matrix() - regular.matrix(), tol)?;
    if !is_absolutely_continuous(&regular, a, tol)? {
        return Err(Error::CrossCheckFailure {
            what: "regular part is not A-absolutely continuous".into(),
            gap: regular.distance(&generalized_short(a, &regular, tol)?),
            tolerance: tol.tol_conv,
        });
    }
    if !is_singular(a, &singular_part, tol)? {
        return Err(Error::CrossCheckFailure {
            what: "singular part is not A-singular".into(),
            gap: singularity_gap(a, &singular_part, tol)?,
            tolerance: tol.tol_conv,
        });
    }
    let unique = psd::range_included(&regular, a, tol)?;
    let alpha_min = unique.then(|| smallest_domination_constant(&regular, a, tol));
    Ok(LebesgueDecomposition { regular, singular_part, unique, alpha_min })
}

/// Smallest `α` with `C ≤ αA`, assuming `ran C ⊆ ran A`: the largest
/// generalized eigenvalue of `(C, A)` on `ran A`.
fn smallest_domination_constant(cm: &PsdMatrix, a: &PsdMatrix, tol: &Tolerances) -> f64 {
    if a.rank() == 0 {
        return 0.0;
    }
    let w = psd::sqrt_psd(&psd::pseudo_inverse(a, tol), tol);
    let g = w.matrix() * cm.matrix() * w.matrix();
    linalg::jacobi_eigen(&g).values.last().copied().unwrap_or(0.0).max(0.0)
}
