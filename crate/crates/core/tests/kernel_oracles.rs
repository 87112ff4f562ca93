mod common;

use common::{dense_gram, kernel, random_function, random_state};
use nalgebra::{DMatrix, DVector};
use pkgtd_core::{
    eval_kernel, gram_matrix, hilbert_norm_sq, inner_product, project_coefficients, Dictionary, KernelSpec,
    RkhsFunction,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn state() -> impl Strategy<Value = [f64; 2]> {
    (-1.2f64..0.6, -0.07f64..0.07).prop_map(|(p, v)| [p, v])
}

fn dictionary(max: usize) -> impl Strategy<Value = Dictionary> {
    prop::collection::vec(state(), 1..=max).prop_map(|pts| Dictionary::from_points(2, &pts).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_is_positive_semidefinite(d in dictionary(50)) {
        let k = gram_matrix(&kernel(), &d, &d).unwrap();
        let m = DMatrix::from_row_slice(k.rows(), k.cols(), k.as_slice());
        let min = m.symmetric_eigenvalues().min();
        prop_assert!(min >= -1e-8 * d.len() as f64, "min eigenvalue {min}");
    }

    #[test]
    fn polynomial_gram_is_positive_semidefinite(d in dictionary(20), b in 0.0f64..2.0, c in 1u32..4) {
        let spec = KernelSpec::polynomial(b, c).unwrap();
        let k = gram_matrix(&spec, &d, &d).unwrap();
        let m = DMatrix::from_row_slice(k.rows(), k.cols(), k.as_slice());
        let eig = m.symmetric_eigenvalues();
        prop_assert!(eig.min() >= -1e-10 * eig.max().max(1.0) * d.len() as f64);
    }

    #[test]
    fn gaussian_is_symmetric_and_bounded(x in state(), y in state()) {
        let k = kernel();
        let a = eval_kernel(&k, &x, &y).unwrap();
        prop_assert_eq!(a, eval_kernel(&k, &y, &x).unwrap());
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert_eq!(a == 1.0, x == y);
    }

    #[test]
    fn polynomial_is_symmetric(x in state(), y in state(), b in 0.0f64..3.0, c in 1u32..5) {
        let k = KernelSpec::polynomial(b, c).unwrap();
        let (a, r) = (eval_kernel(&k, &x, &y).unwrap(), eval_kernel(&k, &y, &x).unwrap());
        prop_assert!((a - r).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn gram_matches_entrywise_kernel(d in dictionary(8), e in dictionary(8)) {
        let k = gram_matrix(&kernel(), &d, &e).unwrap();
        let oracle = dense_gram(&kernel(), &d, &e);
        for i in 0..d.len() {
            for j in 0..e.len() {
                prop_assert_eq!(k[(i, j)], oracle[(i, j)]);
            }
        }
    }
}

#[test]
fn four_point_gram_eigenvalues_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..50 {
        let pts: Vec<[f64; 2]> = (0..4).map(|_| random_state(&mut rng)).collect();
        let d = Dictionary::from_points(2, &pts).unwrap();
        let m = dense_gram(&kernel(), &d, &d);
        assert!(m.symmetric_eigenvalues().min() >= -1e-10);
    }
}

#[test]
fn evaluation_matches_direct_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let f = random_function(&mut rng, 3);
        let x = random_state(&mut rng);
        let direct: f64 = f
            .dictionary()
            .points()
            .zip(f.coeffs())
            .map(|(d, w)| w * eval_kernel(f.spec(), d, &x).unwrap())
            .sum();
        assert!((f.evaluate(&x).unwrap() - direct).abs() <= 1e-12);
    }
}

#[test]
fn inner_product_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..100 {
        let f = random_function(&mut rng, 3);
        let g = random_function(&mut rng, 4);
        let mut direct = 0.0;
        for (d, w) in f.dictionary().points().zip(f.coeffs()) {
            for (e, u) in g.dictionary().points().zip(g.coeffs()) {
                direct += w * u * eval_kernel(f.spec(), d, e).unwrap();
            }
        }
        assert!((inner_product(&f, &g).unwrap() - direct).abs() <= 1e-12);
    }
}

#[test]
fn norm_matches_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let f = random_function(&mut rng, 5);
        let k = dense_gram(f.spec(), f.dictionary(), f.dictionary());
        let w = DVector::from_column_slice(f.coeffs());
        assert!((hilbert_norm_sq(&f) - w.dot(&(&k * &w))).abs() <= 1e-10);
    }
}

#[test]
fn projection_matches_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut checked = 0;
    while checked < 100 {
        let f = random_function(&mut rng, 4);
        let target = f.dictionary().select(&[0, 2, 3]);
        let kdd = dense_gram(f.spec(), &target, &target);
        let eig = kdd.symmetric_eigenvalues();
        if eig.min() / eig.max() < 1e-6 {
            continue;
        }
        let kds = dense_gram(f.spec(), &target, f.dictionary());
        let rhs = &kds * DVector::from_column_slice(f.coeffs());
        let oracle = kdd.lu().solve(&rhs).unwrap();
        let w = project_coefficients(&target, &f).unwrap();
        for (a, b) in w.iter().zip(oracle.iter()) {
            assert!((a - b).abs() <= 1e-8 * b.abs().max(1.0), "{a} vs {b}");
        }
        checked += 1;
    }
}

#[test]
fn norm_of_scaled_section_is_square_of_scale() {
    for c in [-3.0, 0.5, 2.0] {
        let mut f = RkhsFunction::kernel_section(kernel(), &[-0.2, 0.03]).unwrap();
        f.scale(c);
        assert_eq!(hilbert_norm_sq(&f), c * c);
    }
}
