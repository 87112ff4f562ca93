#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pkgtd_core::{eval_kernel, Dictionary, KernelSpec, RkhsFunction};
use rand::Rng;

pub const SIGMA: [f64; 2] = [0.2, 0.0156];

pub fn kernel() -> KernelSpec {
    KernelSpec::gaussian(SIGMA).unwrap()
}

/// A point drawn uniformly from the Mountain Car state box.
pub fn random_state<R: Rng>(rng: &mut R) -> [f64; 2] {
    [rng.random_range(-1.2..0.6), rng.random_range(-0.07..0.07)]
}

pub fn random_function<R: Rng>(rng: &mut R, m: usize) -> RkhsFunction {
    let points: Vec<[f64; 2]> = (0..m).map(|_| random_state(rng)).collect();
    let coeffs = (0..m).map(|_| rng.random_range(-3.0..3.0)).collect();
    RkhsFunction::new(kernel(), Dictionary::from_points(2, &points).unwrap(), coeffs).unwrap()
}

/// Gram matrix built entry by entry through `eval_kernel`.
pub fn dense_gram(spec: &KernelSpec, a: &Dictionary, b: &Dictionary) -> DMatrix<f64> {
    DMatrix::from_fn(a.len(), b.len(), |i, j| eval_kernel(spec, a.point(i), b.point(j)).unwrap())
}

/// `‖Ṽ − Σ_{k∈keep} w_k κ(d_k,·)‖_H` for the best `w`, via an LU solve of
/// the normal equations over the original dictionary.
pub fn oracle_residual(v: &RkhsFunction, keep: &[usize]) -> (Vec<f64>, f64) {
    let k = dense_gram(v.spec(), v.dictionary(), v.dictionary());
    let w_full = DVector::from_column_slice(v.coeffs());
    if keep.is_empty() {
        return (Vec::new(), (w_full.dot(&(&k * &w_full))).max(0.0).sqrt());
    }
    let kss = DMatrix::from_fn(keep.len(), keep.len(), |i, j| k[(keep[i], keep[j])]);
    let kv = &k * &w_full;
    let rhs = DVector::from_iterator(keep.len(), keep.iter().map(|&i| kv[i]));
    let w = kss.lu().solve(&rhs).expect("oracle system is singular");
    let mut r = w_full.clone();
    for (p, &i) in keep.iter().enumerate() {
        r[i] -= w[p];
    }
    (w.iter().copied().collect(), r.dot(&(&k * &r)).max(0.0).sqrt())
}

/// Smallest eigenvalue over largest of the Gram matrix of `v`'s dictionary.
pub fn inverse_condition(v: &RkhsFunction) -> f64 {
    let k = dense_gram(v.spec(), v.dictionary(), v.dictionary());
    let eig = k.symmetric_eigenvalues();
    eig.min() / eig.max()
}
