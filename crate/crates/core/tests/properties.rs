//! Property tests against oracles built from nalgebra's own SVD, so nothing
//! here shares code with the crate's Jacobi kernels.

use num_complex::Complex64;
use proptest::prelude::*;
use quasi_units::forms::{phi, phi_inverse};
use quasi_units::parallel::{parallel_diff, parallel_sum};
use quasi_units::psd::loewner_leq;
use quasi_units::quasi::{is_quasi_unit, projection_to_quasiunit};
use quasi_units::random::{gen_random_psd, random_contraction, random_projection, rng_from_seed};
use quasi_units::short::generalized_short;
use quasi_units::{io, CMatrix, Form, PsdMatrix, Tolerances};

fn tol() -> Tolerances {
    Tolerances::default()
}

fn pinv(m: &CMatrix) -> CMatrix {
    if m.is_empty() {
        return m.adjoint();
    }
    let scale = m.norm().max(1.0);
    m.clone().pseudo_inverse(1e-10 * scale).expect("svd converges")
}

/// `A(A+B)⁺B` through nalgebra.
fn oracle_parallel_sum(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * pinv(&(a + b)) * b
}

/// Schur complement of `B` onto `ran A`, with `ran A` taken from nalgebra's SVD.
fn oracle_short(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("u requested");
    let thr = 1e-10 * svd.singular_values.max().max(1.0);
    let (range, kernel): (Vec<usize>, Vec<usize>) = (0..n).partition(|&k| svd.singular_values[k] > thr);
    let cols = |idx: &[usize]| CMatrix::from_fn(n, idx.len(), |i, k| u[(i, idx[k])]);
    let (u1, u2) = (cols(&range), cols(&kernel));
    if u1.ncols() == 0 {
        return CMatrix::zeros(n, n);
    }
    let b11 = u1.adjoint() * b * &u1;
    let b12 = u1.adjoint() * b * &u2;
    let b22 = u2.adjoint() * b * &u2;
    let complement = b11 - &b12 * pinv(&b22) * b12.adjoint();
    &u1 * complement * u1.adjoint()
}

fn spectral(m: &CMatrix) -> f64 {
    m.clone().singular_values().max()
}

prop_compose! {
    fn psd_pair()(dim in 1usize..=5)(
        dim in Just(dim),
        ra in 0..=dim,
        rb in 0..=dim,
        seed in any::<u64>(),
    ) -> (PsdMatrix, PsdMatrix) {
        let t = tol();
        (gen_random_psd(seed, dim, ra, &t).unwrap(), gen_random_psd(seed ^ 0x9e37_79b9, dim, rb, &t).unwrap())
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parallel_sum_matches_closed_form((a, b) in psd_pair()) {
        let got = parallel_sum(&a, &b, &tol()).unwrap();
        let want = oracle_parallel_sum(a.matrix(), b.matrix());
        let scale = 1.0 + a.norm() + b.norm();
        prop_assert!(spectral(&(got.matrix() - want)) <= 1e-8 * scale);
    }

    #[test]
    fn parallel_sum_is_below_both((a, b) in psd_pair()) {
        let t = tol();
        let s = parallel_sum(&a, &b, &t).unwrap();
        prop_assert!(loewner_leq(&s, &a, &t).unwrap());
        prop_assert!(loewner_leq(&s, &b, &t).unwrap());
        let back = parallel_sum(&b, &a, &t).unwrap();
        prop_assert!(s.distance(&back) <= 1e-12 * (1.0 + a.norm() + b.norm()));
    }

    #[test]
    fn short_matches_schur_oracle((a, b) in psd_pair()) {
        let got = generalized_short(&a, &b, &tol()).unwrap();
        let want = oracle_short(a.matrix(), b.matrix());
        prop_assert!(spectral(&(got.matrix() - want)) <= 1e-7 * (1.0 + b.norm()));
    }

    #[test]
    fn parallel_difference_inverts_parallel_sum((x, w) in psd_pair()) {
        let t = tol();
        let s = parallel_sum(&x, &w, &t).unwrap();
        let r = parallel_diff(&s, &w, &t).unwrap();
        let back = parallel_sum(&r, &w, &t).unwrap();
        prop_assert!(back.distance(&s) <= 1e-7 * (1.0 + s.norm() + w.norm()));
    }

    #[test]
    fn projections_map_to_quasi_units(dim in 1usize..=5, seed in any::<u64>()) {
        let t = tol();
        let mut rng = rng_from_seed(seed);
        let b = gen_random_psd(seed, dim, dim, &t).unwrap();
        let k = (seed % (dim as u64 + 1)) as usize;
        let p = random_projection(&mut rng, dim, k);
        let a = projection_to_quasiunit(&p, &b, &t).unwrap();
        prop_assert!(is_quasi_unit(&a, &b, &t).unwrap().verdict);
    }

    #[test]
    fn phi_round_trip(dim in 1usize..=5, rank in 0usize..=5, seed in any::<u64>()) {
        let t = tol();
        let f = Form::new(gen_random_psd(seed, dim, rank.min(dim), &t).unwrap());
        let r = f.gram().rank();
        let x = random_contraction(&mut rng_from_seed(seed), r, 0.0, 1.0);
        let x = PsdMatrix::from_matrix(x, &t).unwrap();
        let back = phi(&f, &phi_inverse(&f, &x, &t).unwrap(), &t).unwrap();
        prop_assert!(back.distance(&x) <= 1e-8);
    }

    #[test]
    fn file_format_round_trip(
        dim in 1usize..=4,
        entries in proptest::collection::vec((-1e3f64..1e3, -1e3f64..1e3), 16),
        complex in any::<bool>(),
    ) {
        let m = CMatrix::from_fn(dim, dim, |i, j| {
            let (re, im) = entries[i * 4 + j];
            Complex64::new(re, if complex { im } else { 0.0 })
        });
        let back = io::parse_matrix(&io::matrix_to_json(&m).to_string()).unwrap();
        prop_assert_eq!(back, m);
    }
}
