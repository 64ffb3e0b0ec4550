//! Seeded property suites: every invariant of the library as an executable
//! check over random instances.
//!
//! Each trial draws its own seed from `(run seed, suite name, trial index)`,
//! so a failing trial can be replayed in isolation with [`run_trial`] and the
//! outcome does not depend on scheduling.

use crate::error::{Error, Result};
use crate::forms::{self, Form};
use crate::galois::PolarityPair;
use crate::io::matrix_to_json;
use crate::linalg::{self, CMatrix};
use crate::parallel::{parallel_diff, parallel_diff_bounded, parallel_sum, scalar_parallel_gap, variational_parallel_sum_value};
use crate::psd::{self, loewner_leq, loewner_margin, PsdMatrix, Subspace};
use crate::quasi::{self, ando_infimum, is_quasi_unit, lambda_iteration_check, quasi_join, quasi_meet};
use crate::random::{self, rng_from_seed, TrialRng};
use crate::short::{self, generalized_short, lebesgue_decompose, short_all, short_iterative_trace};
use crate::tol::Tolerances;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;
use std::time::Instant;

/// Scalar identities that are exact up to rounding.
const EXACT: f64 = 1e-10;
const LAMBDAS: [f64; 6] = [1.0, 3.0, 15.0, 255.0, 65535.0, 4294967295.0];
const MAX_DIM: usize = 12;

type SuiteFn = fn(&mut Ctx) -> Result<()>;

const TABLE: &[(&str, SuiteFn)] = &[
    ("psd.moore_penrose", psd_moore_penrose),
    ("psd.sqrt_range", psd_sqrt_range),
    ("psd.loewner_order", psd_loewner_order),
    ("psd.subspace_intersection", psd_subspace_intersection),
    ("parsum.commutative", parsum_commutative),
    ("parsum.associative", parsum_associative),
    ("parsum.monotone", parsum_monotone),
    ("parsum.upper_bound", parsum_upper_bound),
    ("parsum.oracle", parsum_oracle),
    ("parsum.scalar", parsum_scalar),
    ("pardiff.minimal_solution", pardiff_minimal_solution),
    ("pardiff.always_solvable", pardiff_always_solvable),
    ("short.triple_agreement", short_triple_agreement),
    ("short.idempotent", short_idempotent),
    ("short.quasi_unit", short_quasi_unit),
    ("short.extreme_sum", short_extreme_sum),
    ("short.decomposition", short_decomposition),
    ("short.monotone_convergence", short_monotone_convergence),
    ("short.maximality", short_maximality),
    ("quasi.equivalence", quasi_equivalence),
    ("quasi.psi_order", quasi_psi_order),
    ("quasi.lattice", quasi_lattice),
    ("quasi.meet_coincidence", quasi_meet_coincidence),
    ("quasi.infimum", quasi_infimum),
    ("quasi.quasi_unit_infimum", quasi_quasi_unit_infimum),
    ("quasi.disjoint_short", quasi_disjoint_short),
    ("quasi.lambda_recursion", quasi_lambda_recursion),
    ("forms.phi_order", forms_phi_order),
    ("forms.phi_convex", forms_phi_convex),
    ("forms.phi_roundtrip", forms_phi_roundtrip),
    ("forms.phi_parallel_sum", forms_phi_parallel_sum),
    ("forms.quasi_unit_transport", forms_quasi_unit_transport),
    ("forms.disjoint_short", forms_disjoint_short),
    ("galois.antitone", galois_antitone),
    ("galois.closure_contractive", galois_closure_contractive),
    ("galois.closure_idempotent", galois_closure_idempotent),
    ("galois.non_injective", galois_non_injective),
    ("galois.bijection_closed", galois_bijection_closed),
    ("galois.identity_chain", galois_identity_chain),
    ("galois.order_transfer", galois_order_transfer),
    ("galois.adjunction", galois_adjunction),
    ("galois.closed_elements", galois_closed_elements),
];

pub fn suite_names() -> Vec<&'static str> {
    TABLE.iter().map(|(name, _)| *name).collect()
}

fn lookup(name: &str) -> Result<SuiteFn> {
    TABLE
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, f)| *f)
        .ok_or_else(|| Error::UnknownSuite(name.to_string()))
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub dim_range: (usize, usize),
    pub tolerances: Tolerances,
    pub suites: Vec<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            trials: 100,
            dim_range: (2, 6),
            tolerances: Tolerances::default(),
            suites: suite_names().into_iter().map(String::from).collect(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        let (lo, hi) = self.dim_range;
        if lo < 1 || lo > hi || hi > MAX_DIM {
            return Err(Error::InvalidArgument(format!("dimension range {lo}..{hi} must satisfy 1 ≤ min ≤ max ≤ {MAX_DIM}")));
        }
        self.tolerances.validate()?;
        for name in &self.suites {
            lookup(name)?;
        }
        Ok(())
    }
}

/// A matrix attached to a failure, in the file format.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedMatrix {
    pub name: String,
    pub matrix: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureRecord {
    pub trial: usize,
    pub seed: u64,
    pub dim: usize,
    pub message: String,
    pub matrices: Vec<NamedMatrix>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub passed: usize,
    pub failed: usize,
    /// Largest relative gap measured, over all trials and checks.
    pub worst_gap: f64,
    pub failing_seeds: Vec<u64>,
    pub failures: Vec<FailureRecord>,
    pub wall_time: f64,
}

impl SuiteReport {
    pub fn trials(&self) -> usize {
        self.passed + self.failed
    }

    /// The report with `wall_time` zeroed, for comparing runs.
    pub fn without_timing(&self) -> SuiteReport {
        SuiteReport { wall_time: 0.0, ..self.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub dim: usize,
    pub worst_gap: f64,
    pub failure: Option<String>,
    pub matrices: Vec<NamedMatrix>,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

pub fn trial_seed(run_seed: u64, suite: &str, trial: usize) -> u64 {
    splitmix(splitmix(run_seed ^ fnv1a(suite)) ^ trial as u64)
}

/// Runs trial number `trial` from its own seed; the dimension is drawn from
/// `dim_range`.
pub fn run_trial(suite: &str, trial: usize, seed: u64, dim_range: (usize, usize), tol: &Tolerances) -> Result<TrialOutcome> {
    let f = lookup(suite)?;
    let mut rng = rng_from_seed(seed);
    let dim = rng.random_range(dim_range.0..=dim_range.1);
    let mut ctx = Ctx { rng, trial, n: dim, tol: *tol, worst: 0.0, failure: None, matrices: Vec::new() };
    if let Err(e) = f(&mut ctx) {
        ctx.fail(format!("error: {e}"));
    }
    let matrices = if ctx.failure.is_some() {
        ctx.matrices.iter().map(|(name, m)| NamedMatrix { name: name.clone(), matrix: matrix_to_json(m) }).collect()
    } else {
        Vec::new()
    };
    Ok(TrialOutcome { dim, worst_gap: ctx.worst, failure: ctx.failure, matrices })
}

/// Runs the configured suites. Trials execute in parallel; reports come back
/// in the order the suites were named.
pub fn run_suites(cfg: &RunConfig) -> Result<Vec<SuiteReport>> {
    cfg.validate()?;
    cfg.suites
        .par_iter()
        .map(|suite| {
            let start = Instant::now();
            let outcomes: Vec<(usize, u64, TrialOutcome)> = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let seed = trial_seed(cfg.seed, suite, trial);
                    run_trial(suite, trial, seed, cfg.dim_range, &cfg.tolerances).map(|o| (trial, seed, o))
                })
                .collect::<Result<_>>()?;
            let mut report = SuiteReport {
                suite: suite.clone(),
                passed: 0,
                failed: 0,
                worst_gap: 0.0,
                failing_seeds: Vec::new(),
                failures: Vec::new(),
                wall_time: 0.0,
            };
            for (trial, seed, o) in outcomes {
                report.worst_gap = report.worst_gap.max(o.worst_gap);
                match o.failure {
                    None => report.passed += 1,
                    Some(message) => {
                        report.failed += 1;
                        report.failing_seeds.push(seed);
                        report.failures.push(FailureRecord { trial, seed, dim: o.dim, message, matrices: o.matrices });
                    }
                }
            }
            report.wall_time = start.elapsed().as_secs_f64();
            Ok(report)
        })
        .collect()
}

struct Ctx {
    rng: TrialRng,
    /// Suites that alternate between two constructions use its parity.
    trial: usize,
    n: usize,
    tol: Tolerances,
    worst: f64,
    failure: Option<String>,
    matrices: Vec<(String, CMatrix)>,
}

impl Ctx {
    fn fail(&mut self, msg: String) {
        if self.failure.is_none() {
            self.failure = Some(msg);
        }
    }

    fn keep(&mut self, name: &str, m: &PsdMatrix) {
        self.matrices.push((name.to_string(), m.matrix().clone()));
    }

    fn psd_rank(&mut self, name: &str, rank: usize) -> Result<PsdMatrix> {
        let m = random::random_psd(&mut self.rng, self.n, rank, &self.tol)?;
        self.keep(name, &m);
        Ok(m)
    }

    /// Random PSD matrix of uniformly drawn rank in `0..=n`.
    fn psd(&mut self, name: &str) -> Result<PsdMatrix> {
        let rank = self.rng.random_range(0..=self.n);
        self.psd_rank(name, rank)
    }

    /// Random PSD matrix of rank at least one.
    fn nonzero_psd(&mut self, name: &str) -> Result<PsdMatrix> {
        let rank = self.rng.random_range(1..=self.n);
        self.psd_rank(name, rank)
    }

    fn form(&mut self, name: &str) -> Result<Form> {
        self.psd(name).map(|g| Form::new(g).with_label(name))
    }

    fn quasiunit(&mut self, name: &str, b: &PsdMatrix) -> Result<PsdMatrix> {
        let (a, _) = random::random_quasiunit(&mut self.rng, b, &self.tol)?;
        self.keep(name, &a);
        Ok(a)
    }

    /// `J_t·X·J_t*` for a random `0 ≤ X ≤ I`: an element of `[0, t]`.
    fn below(&mut self, name: &str, t: &PsdMatrix) -> Result<PsdMatrix> {
        let aux = short::build_aux_space(t);
        let x = random::random_contraction(&mut self.rng, aux.rank(), 0.0, 1.0);
        let m = PsdMatrix::from_computed(aux.push_forward(&x), &self.tol)?;
        self.keep(name, &m);
        Ok(m)
    }

    fn contraction(&mut self, r: usize) -> Result<PsdMatrix> {
        let x = random::random_contraction(&mut self.rng, r, 0.0, 1.0);
        PsdMatrix::from_computed(x, &self.tol)
    }

    /// Records `gap / scale` and fails when it exceeds `limit`.
    fn gap(&mut self, what: &str, gap: f64, scale: f64, limit: f64) {
        let rel = gap / scale;
        if rel.is_nan() {
            self.fail(format!("{what}: gap is NaN"));
            return;
        }
        self.worst = self.worst.max(rel);
        if rel > limit {
            self.fail(format!("{what}: relative gap {rel:.3e} exceeds {limit:.1e}"));
        }
    }

    fn close(&mut self, what: &str, x: &PsdMatrix, y: &PsdMatrix, scale: f64, limit: f64) {
        self.gap(what, x.distance(y), scale, limit);
    }

    fn expect(&mut self, what: &str, ok: bool) {
        if !ok {
            self.fail(format!("{what} does not hold"));
        }
    }

    fn leq(&mut self, what: &str, a: &PsdMatrix, b: &PsdMatrix) -> Result<()> {
        let ok = loewner_leq(a, b, &self.tol)?;
        self.expect(what, ok);
        Ok(())
    }
}

fn sum(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    a.add(b, tol)
}

fn diff(a: &PsdMatrix, b: &PsdMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    PsdMatrix::from_computed(a.matrix() - b.matrix(), tol)
}

fn hermitian_gap(m: &CMatrix) -> f64 {
    if m.nrows() == 0 {
        0.0
    } else {
        linalg::hermitian_norm(m)
    }
}

// psd

fn psd_moore_penrose(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let p = psd::pseudo_inverse(&a, &t);
    let (am, pm) = (a.matrix(), p.matrix());
    ctx.gap("A·A⁺·A = A", hermitian_gap(&(am * pm * am - am)), 1.0 + a.norm(), t.tol_conv);
    ctx.gap("A⁺·A·A⁺ = A⁺", hermitian_gap(&(pm * am * pm - pm)), 1.0 + p.norm(), t.tol_conv);
    ctx.expect("rank A⁺ = rank A", p.rank() == a.rank());
    Ok(())
}

fn psd_sqrt_range(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let s = psd::sqrt_psd(&a, &t);
    ctx.gap("(√A)² = A", hermitian_gap(&(s.matrix() * s.matrix() - a.matrix())), 1.0 + a.norm(), t.tol_conv);
    ctx.gap("ran A ⊆ ran √A", psd::range_excess(&a, &s, &t)?, 1.0, t.tol_conv);
    ctx.gap("ran √A ⊆ ran A", psd::range_excess(&s, &a, &t)?, 1.0, t.tol_conv);
    ctx.expect("rank √A = rank A", s.rank() == a.rank());
    Ok(())
}

fn psd_loewner_order(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let d = ctx.psd("D")?;
    let ad = sum(&a, &d, &t)?;
    ctx.leq("A ≤ A", &a, &a)?;
    ctx.leq("A ≤ A + D", &a, &ad)?;
    if d.rank() > 0 {
        let back = loewner_leq(&ad, &a, &t)?;
        ctx.expect("A + D ≰ A for D ≠ 0", !back);
    }
    Ok(())
}

fn psd_on<R: Rng>(rng: &mut R, basis: &CMatrix, tol: &Tolerances) -> Result<PsdMatrix> {
    let g = basis * random::gaussian_matrix(rng, basis.ncols(), basis.ncols());
    PsdMatrix::from_computed(&g * g.adjoint(), tol)
}

fn psd_subspace_intersection(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let n = ctx.n;
    let k = ctx.rng.random_range(0..=n);
    let x1 = ctx.rng.random_range(0..=n - k);
    let x2 = ctx.rng.random_range(0..=n - k - x1);
    let q = random::random_orthonormal(&mut ctx.rng, n, k + x1 + x2);
    let mut on_a = q.columns(0, k + x1).into_owned();
    let mut on_b = CMatrix::zeros(n, k + x2);
    on_b.columns_mut(0, k).copy_from(&q.columns(0, k));
    on_b.columns_mut(k, x2).copy_from(&q.columns(k + x1, x2));
    if ctx.rng.random_bool(0.5) {
        std::mem::swap(&mut on_a, &mut on_b);
    }
    let a = psd_on(&mut ctx.rng, &on_a, &t)?;
    let b = psd_on(&mut ctx.rng, &on_b, &t)?;
    ctx.keep("A", &a);
    ctx.keep("B", &b);
    let common = psd::subspace_intersection(&Subspace::range_of(&a), &Subspace::range_of(&b), &t)?;
    ctx.expect(&format!("dim(ran A ∩ ran B) = {k} (got {})", common.dim()), common.dim() == k);
    let pa = psd::range_projection(&a, &t);
    let pb = psd::range_projection(&b, &t);
    for v in common.basis().column_iter() {
        ctx.gap("intersection vector in ran A", (v - pa.matrix() * v).norm(), 1.0, t.tol_conv);
        ctx.gap("intersection vector in ran B", (v - pb.matrix() * v).norm(), 1.0, t.tol_conv);
    }
    Ok(())
}

// parallel sum and difference

fn parsum_commutative(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let ab = parallel_sum(&a, &b, &t)?;
    let ba = parallel_sum(&b, &a, &t)?;
    ctx.close("A:B = B:A", &ab, &ba, 1.0 + a.norm() + b.norm(), t.tol_conv);
    Ok(())
}

fn parsum_associative(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let c = ctx.psd("C")?;
    let left = parallel_sum(&parallel_sum(&a, &b, &t)?, &c, &t)?;
    let right = parallel_sum(&a, &parallel_sum(&b, &c, &t)?, &t)?;
    ctx.close("(A:B):C = A:(B:C)", &left, &right, 1.0 + a.norm() + b.norm() + c.norm(), t.tol_conv);
    Ok(())
}

fn parsum_monotone(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let d = ctx.psd("D")?;
    let b = ctx.psd("B")?;
    let a2 = sum(&a, &d, &t)?;
    ctx.leq("A:B ≤ (A + D):B", &parallel_sum(&a, &b, &t)?, &parallel_sum(&a2, &b, &t)?)
}

fn parsum_upper_bound(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let ab = parallel_sum(&a, &b, &t)?;
    ctx.leq("A:B ≤ A", &ab, &a)?;
    ctx.leq("A:B ≤ B", &ab, &b)?;
    ctx.leq("A:B ≤ (A + B)/4", &ab, &sum(&a, &b, &t)?.scale(0.25, &t))
}

fn parsum_oracle(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let x = random::gaussian_matrix(&mut ctx.rng, ctx.n, 1).column(0).into_owned();
    let closed = parallel_sum(&a, &b, &t)?.quadratic_form(&x);
    let descent = variational_parallel_sum_value(&a, &b, &x, &t)?;
    ctx.gap("⟨(A:B)x, x⟩ vs descent infimum", (closed - descent).abs(), 1.0 + closed.abs(), t.tol_conv);
    Ok(())
}

fn parsum_scalar(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("T")?;
    let lambda = ctx.rng.random_range(0.1..=10.0);
    let mu = ctx.rng.random_range(0.1..=10.0);
    ctx.gap("λT:μT = λμ/(λ+μ)·T", scalar_parallel_gap(&a, lambda, mu, &t)?, 1.0, EXACT);
    Ok(())
}

fn pardiff_minimal_solution(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let x0 = ctx.psd("X")?;
    let w = ctx.psd("W")?;
    let s = parallel_sum(&x0, &w, &t)?;
    let d = parallel_diff_bounded(&s, &w, &t)?;
    let r = d.value;
    let scale = 1.0 + s.norm() + w.norm();
    ctx.close("(S÷W):W = S", &parallel_sum(&r, &w, &t)?, &s, scale, t.tol_conv);
    // other solutions: X itself and X enlarged along ker W
    let k = w.kernel_basis();
    let mut candidates = vec![x0.clone()];
    for _ in 0..3 {
        let g = &k * random::gaussian_matrix(&mut ctx.rng, k.ncols(), k.ncols());
        candidates.push(sum(&x0, &PsdMatrix::from_computed(&g * g.adjoint(), &t)?, &t)?);
    }
    for cand in candidates {
        let solves = parallel_sum(&cand, &w, &t)?.distance(&s) <= t.tol_conv * scale;
        if solves {
            let slack = t.tol_order * (1.0 + r.norm() + cand.norm()) + d.error_bound;
            ctx.expect("S÷W below another solution", loewner_margin(&r, &cand)? >= -slack);
        }
    }
    Ok(())
}

fn pardiff_always_solvable(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let x = ctx.psd("T")?;
    let w = ctx.psd("W")?;
    let s = parallel_sum(&x, &w, &t)?;
    match parallel_diff(&s, &w, &t) {
        Ok(_) => {}
        Err(e) => ctx.fail(format!("(T:W)÷W not solvable: {e}")),
    }
    Ok(())
}

// generalized short

fn short_triple_agreement(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    for i in 0..2 {
        let a = ctx.psd(&format!("A{i}"))?;
        let b = ctx.psd(&format!("B{i}"))?;
        let (_, _, _, g) = short_all(&a, &b, &t)?;
        let scale = 1.0 + b.norm();
        ctx.gap("short_aux vs short_schur", g.aux_schur, scale, t.tol_conv);
        ctx.gap("short_aux vs short_iterative", g.aux_iterative, scale, 10.0 * t.tol_conv);
        ctx.gap("short_schur vs short_iterative", g.schur_iterative, scale, 10.0 * t.tol_conv);
    }
    Ok(())
}

fn short_idempotent(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let s = generalized_short(&a, &b, &t)?;
    let s2 = generalized_short(&a, &s, &t)?;
    ctx.close("[A]([A]B) = [A]B", &s2, &s, 1.0 + b.norm(), t.tol_conv);
    Ok(())
}

fn short_quasi_unit(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let s = generalized_short(&a, &b, &t)?;
    let cert = is_quasi_unit(&s, &b, &t)?;
    ctx.gap("[A]B fixed point", cert.fixed_point_gap, 1.0 + b.norm(), t.tol_conv);
    ctx.expect("[A]B is a quasi-unit of B", cert.verdict);
    Ok(())
}

fn short_extreme_sum(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let s = generalized_short(&a, &b, &t)?;
    let ps = parallel_sum(&diff(&b, &s, &t)?, &sum(&a, &s, &t)?, &t)?;
    ctx.gap("(B − [A]B):(A + [A]B) = 0", ps.norm(), 1.0 + a.norm() + b.norm(), t.tol_conv);
    Ok(())
}

fn short_decomposition(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let d = lebesgue_decompose(&a, &b, &t)?;
    let back = d.regular.matrix() + d.singular_part.matrix() - b.matrix();
    ctx.gap("regular + singular = B", hermitian_gap(&back), 1.0 + b.norm(), t.tol_rank);
    ctx.expect("decomposition unique", d.unique);
    if let Some(alpha) = d.alpha_min {
        ctx.leq("[A]B ≤ α_min·A", &d.regular, &a.scale(alpha, &t))?;
    }
    Ok(())
}

fn short_monotone_convergence(ctx: &mut Ctx) -> Result<()> {
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let trace = short_iterative_trace(&a, &b, &ctx.tol)?;
    for (k, w) in trace.iterates.windows(2).enumerate() {
        ctx.leq(&format!("B:(2^{k}A) ≤ B:(2^{}A)", k + 1), &w[0], &w[1])?;
    }
    Ok(())
}

fn short_maximality(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    let b = ctx.psd("B")?;
    let s = generalized_short(&a, &b, &t)?;
    // lower bounds of (cA, B) for huge c are the A-dominated parts of B
    let big = a.scale(1e6, &t);
    for c in quasi::sample_common_lower_bounds(&mut ctx.rng, &big, &b, 10, &t)? {
        ctx.leq("A-dominated C ≤ B lies below [A]B", &c, &s)?;
    }
    for c in short::maximality_candidates(&a, &b, &t)? {
        ctx.leq("candidate lies below [A]B", &c, &s)?;
    }
    Ok(())
}

// quasi-units

fn quasi_equivalence(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    for i in 0..2 {
        let b = ctx.psd(&format!("B{i}"))?;
        let a = ctx.quasiunit(&format!("Q{i}"), &b)?;
        let cert = is_quasi_unit(&a, &b, &t)?;
        ctx.expect("constructed quasi-unit recognized", cert.verdict);
    }
    for i in 0..2 {
        let b = ctx.nonzero_psd(&format!("B'{i}"))?;
        let a = random::random_non_quasiunit(&mut ctx.rng, &b, &t)?;
        ctx.keep(&format!("N{i}"), &a);
        let cert = is_quasi_unit(&a, &b, &t)?;
        ctx.expect("constructed non-quasi-unit rejected", !cert.verdict);
    }
    Ok(())
}

fn quasi_psi_order(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let b = ctx.psd("B")?;
    let r = b.rank();
    let k2 = ctx.rng.random_range(0..=r);
    let k1 = ctx.rng.random_range(0..=k2);
    let v = random::random_orthonormal(&mut ctx.rng, r, k2);
    let u = &v * random::random_orthonormal(&mut ctx.rng, k2, k1);
    let (p_low, p_high) = (&u * u.adjoint(), &v * v.adjoint());
    let low = quasi::projection_to_quasiunit(&p_low, &b, &t)?;
    let high = quasi::projection_to_quasiunit(&p_high, &b, &t)?;
    ctx.keep("Ψ(P)", &low);
    ctx.keep("Ψ(Q)", &high);
    ctx.leq("Ψ_B(P) ≤ Ψ_B(Q)", &low, &high)?;
    let q_low = quasi::quasiunit_to_projection(&low, &b, &t)?;
    let q_high = quasi::quasiunit_to_projection(&high, &b, &t)?;
    ctx.gap("recovered P", linalg::spectral_norm(&(&q_low - &p_low)), 1.0, t.tol_conv);
    ctx.gap("recovered Q", linalg::spectral_norm(&(&q_high - &p_high)), 1.0, t.tol_conv);
    let lo = PsdMatrix::from_computed(q_low, &t)?;
    let hi = PsdMatrix::from_computed(q_high, &t)?;
    ctx.leq("recovered projections ordered", &lo, &hi)?;
    // order is reflected as well as preserved
    let k3 = ctx.rng.random_range(0..=r);
    let p_other = random::random_projection(&mut ctx.rng, r, k3);
    let other = quasi::projection_to_quasiunit(&p_other, &b, &t)?;
    let by_proj = loewner_leq(&PsdMatrix::from_computed(p_low, &t)?, &PsdMatrix::from_computed(p_other, &t)?, &t)?;
    let by_units = loewner_leq(&low, &other, &t)?;
    ctx.expect("Ψ_B reflects order", by_proj == by_units);
    Ok(())
}

fn quasi_lattice(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let b = ctx.psd("B")?;
    let s = ctx.quasiunit("S", &b)?;
    let u = ctx.quasiunit("T", &b)?;
    let v = ctx.quasiunit("U", &b)?;
    let scale = 1.0 + b.norm();
    let lim = t.tol_conv;
    let meet = |x: &PsdMatrix, y: &PsdMatrix| quasi_meet(x, y, &b, &t);
    let join = |x: &PsdMatrix, y: &PsdMatrix| quasi_join(x, y, &b, &t);

    ctx.close("S ⋏ S = S", &meet(&s, &s)?, &s, scale, lim);
    ctx.close("S ⋎ S = S", &join(&s, &s)?, &s, scale, lim);
    let su_meet = meet(&s, &u)?;
    let su_join = join(&s, &u)?;
    ctx.close("S ⋏ T = T ⋏ S", &su_meet, &meet(&u, &s)?, scale, lim);
    ctx.close("S ⋎ T = T ⋎ S", &su_join, &join(&u, &s)?, scale, lim);
    ctx.close("(S ⋏ T) ⋏ U = S ⋏ (T ⋏ U)", &meet(&su_meet, &v)?, &meet(&s, &meet(&u, &v)?)?, scale, lim);
    ctx.close("(S ⋎ T) ⋎ U = S ⋎ (T ⋎ U)", &join(&su_join, &v)?, &join(&s, &join(&u, &v)?)?, scale, lim);
    ctx.close("S ⋏ (S ⋎ T) = S", &meet(&s, &su_join)?, &s, scale, lim);
    ctx.close("S ⋎ (S ⋏ T) = S", &join(&s, &su_meet)?, &s, scale, lim);
    Ok(())
}

fn quasi_meet_coincidence(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let b = ctx.psd("B")?;
    let s = ctx.quasiunit("S", &b)?;
    let u = ctx.quasiunit("T", &b)?;
    let m = quasi_meet(&s, &u, &b, &t)?;
    let scale = 1.0 + b.norm();
    ctx.close("2(S:T) = [S]T", &m, &generalized_short(&s, &u, &t)?, scale, t.tol_conv);
    ctx.close("2(S:T) = [T]S", &m, &generalized_short(&u, &s, &t)?, scale, t.tol_conv);
    Ok(())
}

fn quasi_infimum(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let a = ctx.psd("A")?;
    if ctx.rng.random_bool(0.5) {
        let b = ctx.psd("B")?;
        let r = ando_infimum(&a, &b, &t)?;
        if let Some(v) = &r.value {
            ctx.expect("all common lower bounds sampled", r.samples_checked == quasi::INFIMUM_SAMPLES);
            ctx.leq("A ∧ B ≤ A", v, &a)?;
            ctx.leq("A ∧ B ≤ B", v, &b)?;
        }
    } else {
        // A ≤ B, so A ∧ B = A
        let d = ctx.psd("D")?;
        let b = sum(&a, &d, &t)?;
        let r = ando_infimum(&a, &b, &t)?;
        ctx.expect("infimum exists for A ≤ B", r.exists);
        if let Some(v) = &r.value {
            ctx.close("A ∧ B = A for A ≤ B", v, &a, 1.0 + b.norm(), t.tol_conv);
        }
    }
    Ok(())
}

fn quasi_quasi_unit_infimum(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let b = ctx.psd("T")?;
    let w = ctx.quasiunit("W", &b)?;
    let u = ctx.below("U", &b)?;
    let r = ando_infimum(&w, &u, &t)?;
    ctx.expect("infimum of a quasi-unit and an element of [0,T] exists", r.exists);
    if let Some(v) = &r.value {
        ctx.close("W ∧ U = [W]U", v, &generalized_short(&w, &u, &t)?, 1.0 + b.norm(), t.tol_conv);
    }
    Ok(())
}

fn quasi_disjoint_short(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let w = ctx.psd("W")?;
    let b = ctx.psd("T")?;
    ctx.gap("[W]T : (T − [W]T) = 0", quasi::disjoint_short_gap(&w, &b, &t)?, 1.0 + b.norm(), t.tol_conv);
    Ok(())
}

fn quasi_lambda_recursion(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    if ctx.trial.is_multiple_of(2) {
        let w = ctx.psd("W")?;
        let u = ctx.quasiunit("T", &w)?;
        match lambda_iteration_check(&u, &w, 16, &t) {
            Ok(steps) => {
                let lambdas: Vec<f64> = steps.iter().map(|s| s.lambda).collect();
                ctx.expect("λ_k = 1, 3, 15, 255, …", lambdas == LAMBDAS);
                for s in steps {
                    ctx.gap("(λT):W = λ/(1+λ)·T", s.gap, 1.0 + u.norm(), t.tol_conv);
                }
            }
            Err(e) => ctx.fail(format!("λ-recursion on a quasi-unit: {e}")),
        }
    } else {
        let w = ctx.nonzero_psd("W")?;
        let u = random::random_non_quasiunit(&mut ctx.rng, &w, &t)?;
        ctx.keep("T", &u);
        let rejected = matches!(lambda_iteration_check(&u, &w, 16, &t), Err(Error::HalfLemmaViolated { .. }));
        ctx.expect("half-lemma precondition fails for a non-quasi-unit", rejected);
    }
    Ok(())
}

// forms

fn forms_phi_order(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let f = ctx.form("t")?;
    let r = f.gram().rank();
    let x2 = ctx.contraction(r)?;
    let root = psd::sqrt_psd(&x2, &t);
    let y = ctx.contraction(r)?;
    let x1 = PsdMatrix::from_computed(root.matrix() * y.matrix() * root.matrix(), &t)?;
    let w1 = forms::phi_inverse(&f, &x1, &t)?;
    let w2 = forms::phi_inverse(&f, &x2, &t)?;
    ctx.keep("w1", w1.gram());
    ctx.keep("w2", w2.gram());
    ctx.leq("Φ⁻¹ preserves order", w1.gram(), w2.gram())?;
    let p1 = forms::phi(&f, &w1, &t)?;
    let p2 = forms::phi(&f, &w2, &t)?;
    ctx.leq("Φ preserves order", &p1, &p2)?;
    // an independent element: order of forms matches order of images
    let x3 = ctx.contraction(r)?;
    let w3 = forms::phi_inverse(&f, &x3, &t)?;
    let p3 = forms::phi(&f, &w3, &t)?;
    let forms_ordered = w1.leq(&w3, &t)?;
    let ops_ordered = loewner_leq(&p1, &p3, &t)?;
    ctx.expect("Φ reflects order", forms_ordered == ops_ordered);
    Ok(())
}

fn forms_phi_convex(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let f = ctx.form("t")?;
    let s1 = ctx.form("s1")?;
    let s2 = ctx.form("s2")?;
    let u = forms::form_parallel_sum(&f, &s1, &t)?;
    let v = forms::form_short(&s2, &f, &t)?;
    let alpha = ctx.rng.random_range(0.0..=1.0);
    let mix = u.scale(alpha, &t).add(&v.scale(1.0 - alpha, &t), &t)?;
    let lhs = forms::phi(&f, &mix, &t)?;
    let rhs = forms::phi(&f, &u, &t)?.matrix().scale(alpha) + forms::phi(&f, &v, &t)?.matrix().scale(1.0 - alpha);
    ctx.gap("Φ(αu + (1−α)v) = αΦ(u) + (1−α)Φ(v)", hermitian_gap(&(lhs.matrix() - rhs)), 1.0, t.tol_conv);
    Ok(())
}

fn forms_phi_roundtrip(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let f = ctx.form("t")?;
    let x = ctx.contraction(f.gram().rank())?;
    let back = forms::phi(&f, &forms::phi_inverse(&f, &x, &t)?, &t)?;
    ctx.close("Φ(Φ⁻¹(X)) = X", &back, &x, 1.0, t.tol_order);
    let s = ctx.form("s")?;
    let w = forms::form_parallel_sum(&f, &s, &t)?;
    let again = forms::phi_inverse(&f, &forms::phi(&f, &w, &t)?, &t)?;
    ctx.close("Φ⁻¹(Φ(w)) = w", again.gram(), w.gram(), 1.0 + f.gram().norm(), t.tol_order);
    Ok(())
}

fn forms_phi_parallel_sum(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let f = ctx.form("t")?;
    let w = ctx.form("w")?;
    let total = f.add(&w, &t)?;
    let lhs = forms::phi(&total, &forms::form_parallel_sum(&f, &w, &t)?, &t)?;
    let rhs = parallel_sum(&forms::phi(&total, &f, &t)?, &forms::phi(&total, &w, &t)?, &t)?;
    ctx.close("Φ(t:w) = Φ(t):Φ(w)", &lhs, &rhs, 1.0, t.tol_conv);
    Ok(())
}

fn forms_quasi_unit_transport(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let make_unit = ctx.trial.is_multiple_of(2);
    let w = if make_unit {
        let g = ctx.psd("t")?;
        let u = ctx.quasiunit("w", &g)?;
        (Form::new(g), Form::new(u))
    } else {
        let g = ctx.nonzero_psd("t")?;
        let u = random::random_non_quasiunit(&mut ctx.rng, &g, &t)?;
        ctx.keep("w", &u);
        (Form::new(g), Form::new(u))
    };
    let (f, w) = w;
    let by_forms = forms::is_form_quasi_unit(&w, &f, &t)?;
    let by_gram = is_quasi_unit(w.gram(), f.gram(), &t)?.verdict;
    ctx.expect("form-level and Gram-level quasi-unit tests agree", by_forms == by_gram);
    ctx.expect("quasi-unit status matches construction", by_forms == make_unit);
    Ok(())
}

fn forms_disjoint_short(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let w = ctx.form("w")?;
    let f = ctx.form("t")?;
    let d = forms::form_short(&w, &f, &t)?;
    let rest = f.sub(&d, &t)?;
    let ps = forms::form_parallel_sum(&d, &rest, &t)?;
    ctx.gap("D_w t : (t − D_w t) = 0", ps.gram().norm(), 1.0 + f.gram().norm(), t.tol_conv);
    Ok(())
}

// Galois connection

fn polarity(ctx: &mut Ctx) -> Result<PolarityPair> {
    let w = ctx.form("w")?;
    Ok(PolarityPair::new(w, ctx.tol))
}

fn galois_antitone(ctx: &mut Ctx) -> Result<()> {
    let pair = polarity(ctx)?;
    let t1 = ctx.form("t1")?;
    let d = ctx.form("d")?;
    let t2 = t1.add(&d, &ctx.tol)?;
    let (a1, a2) = (pair.alpha(&t1)?, pair.alpha(&t2)?);
    ctx.leq("t1 ≤ t2 ⇒ α(t1) ≤ α(t2)", a1.gram(), a2.gram())
}

fn galois_closure_contractive(ctx: &mut Ctx) -> Result<()> {
    let pair = polarity(ctx)?;
    let f = ctx.form("t")?;
    let c = pair.closure(&f)?;
    ctx.leq("(β∘α)(t) ≤ t", c.gram(), f.gram())
}

fn galois_closure_idempotent(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let pair = polarity(ctx)?;
    let f = ctx.form("t")?;
    let c = pair.closure(&f)?;
    let cc = pair.closure(&c)?;
    ctx.close("closure idempotent", cc.gram(), c.gram(), 1.0 + f.gram().norm(), t.tol_conv);
    Ok(())
}

fn galois_non_injective(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let pair = polarity(ctx)?;
    let f = ctx.form("t")?;
    let d = pair.closure(&f)?;
    let gap = f.sub(&d, &t)?;
    let extra = ctx.below("u − D_w t", gap.gram())?;
    let u = d.add(&Form::new(extra), &t)?;
    let scale = 1.0 + f.gram().norm() + pair.reference().gram().norm();
    ctx.close("α(u) = α(t) on [D_w t, t]", pair.alpha(&u)?.gram(), pair.alpha(&f)?.gram(), scale, t.tol_conv);
    Ok(())
}

fn galois_bijection_closed(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let pair = polarity(ctx)?;
    let f1 = ctx.form("t1")?;
    let f2 = ctx.form("t2")?;
    let c1 = pair.closure(&f1)?;
    let c2 = pair.closure(&f2)?;
    let (a1, a2) = (pair.alpha(&c1)?, pair.alpha(&c2)?);
    for (a, c, f, name) in [(&a1, &c1, &f1, "β(α(c1)) = c1"), (&a2, &c2, &f2, "β(α(c2)) = c2")] {
        let (b, bound) = pair.beta_bounded(a)?;
        let scale = 1.0 + f.gram().norm();
        ctx.gap(name, b.distance(c), scale, t.tol_conv + bound / scale);
    }
    let scale = 1.0 + f1.gram().norm() + f2.gram().norm();
    if c1.distance(&c2) > t.tol_conv * scale {
        ctx.expect("α injective on closed elements", a1.distance(&a2) > 0.0);
    }
    Ok(())
}

fn galois_identity_chain(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let pair = polarity(ctx)?;
    let w = pair.reference().clone();
    let f = ctx.form("t")?;
    let tw = pair.alpha(&f)?;
    let dw = forms::form_short(&w, &f, &t)?;
    let scale = 1.0 + f.gram().norm() + w.gram().norm();
    ctx.close("t:w = (D_w t):w", tw.gram(), pair.alpha(&dw)?.gram(), scale, t.tol_conv);
    ctx.close("t:w = D_w(t:w)", tw.gram(), forms::form_short(&w, &tw, &t)?.gram(), scale, t.tol_conv);
    Ok(())
}

fn galois_order_transfer(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let pair = polarity(ctx)?;
    let w = pair.reference().clone();
    let f = ctx.form("t")?;
    let s = if ctx.rng.random_bool(0.5) {
        ctx.form("s")?
    } else {
        let d = ctx.form("d")?;
        f.add(&d, &t)?
    };
    let by_alpha = pair.alpha(&f)?.leq(&pair.alpha(&s)?, &t)?;
    let by_short = forms::form_short(&w, &f, &t)?.leq(&forms::form_short(&w, &s, &t)?, &t)?;
    ctx.expect("t:w ≤ s:w ⟺ D_w t ≤ D_w s", by_alpha == by_short);
    Ok(())
}

fn galois_adjunction(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let pair = polarity(ctx)?;
    let u = ctx.form("u")?;
    let src = ctx.form("v source")?;
    let v = pair.alpha(&src)?;
    ctx.expect("v ≤ α(u) ⟺ β(v) ≤ u (generic v)", pair.check_adjunction(&u, &v)?);
    let c = ctx.rng.random_range(0.05..=1.0);
    let v = pair.alpha(&u.scale(c, &t))?;
    let sides = pair.adjunction_sides(&u, &v)?;
    ctx.expect("v ≤ α(u) and β(v) ≤ u for v = α(cu)", sides == (true, true));
    Ok(())
}

fn galois_closed_elements(ctx: &mut Ctx) -> Result<()> {
    let t = ctx.tol;
    let pair = polarity(ctx)?;
    let f = ctx.form("t")?;
    let closed = pair.is_closed_element(&f)?;
    let by_range = psd::range_included(f.gram(), pair.reference().gram(), &t)?;
    ctx.expect("closed ⟺ ran t ⊆ ran w", closed == by_range);
    let inside = ctx.below("t on ran w", pair.reference().gram())?;
    ctx.expect("forms supported on ran w are closed", pair.is_closed_element(&Form::new(inside))?);
    Ok(())
}
