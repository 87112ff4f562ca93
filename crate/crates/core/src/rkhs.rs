//! Functions in a reproducing kernel Hilbert space, stored as a dictionary
//! of centers plus one weight per center: `f(x) = Σ_n w_n κ(d_n, x)`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::kernels::{gram_matrix, Dictionary, KernelSpec};
use crate::linalg::{solve_gram, Matrix};

/// Hilbert norms squared above this negative value are treated as rounding
/// noise and clamped to zero.
pub const NORM_CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RkhsFunction {
    spec: KernelSpec,
    dict: Dictionary,
    coeffs: Vec<f64>,
}

impl RkhsFunction {
    pub fn new(spec: KernelSpec, dict: Dictionary, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != dict.len() {
            return Err(Error::DimensionMismatch { expected: dict.len(), found: coeffs.len() });
        }
        spec.check_dim(dict.dim())?;
        Ok(RkhsFunction { spec, dict, coeffs })
    }

    /// The zero function on states of dimension `dim`.
    pub fn zero(spec: KernelSpec, dim: usize) -> Result<Self> {
        Self::new(spec, Dictionary::new(dim), Vec::new())
    }

    /// The kernel section `κ(x, ·)`.
    pub fn kernel_section(spec: KernelSpec, x: &[f64]) -> Result<Self> {
        let mut dict = Dictionary::new(x.len());
        dict.push(x)?;
        Self::new(spec, dict, alloc::vec![1.0])
    }

    pub fn spec(&self) -> &KernelSpec {
        &self.spec
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// State dimension `p`.
    pub fn dim(&self) -> usize {
        self.dict.dim()
    }

    /// Number of dictionary centers.
    pub fn model_order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn into_parts(self) -> (KernelSpec, Dictionary, Vec<f64>) {
        (self.spec, self.dict, self.coeffs)
    }

    /// Scales every weight by `factor`.
    pub fn scale(&mut self, factor: f64) {
        for w in &mut self.coeffs {
            *w *= factor;
        }
    }

    /// Appends the atom `weight · κ(x, ·)`.
    pub fn push_atom(&mut self, x: &[f64], weight: f64) -> Result<()> {
        self.dict.push(x)?;
        self.coeffs.push(weight);
        Ok(())
    }

    /// `f(x)`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if self.is_empty() {
            return Ok(0.0);
        }
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        Ok(self.evaluate_unchecked(x))
    }

    pub(crate) fn evaluate_unchecked(&self, x: &[f64]) -> f64 {
        self.dict
            .points()
            .zip(&self.coeffs)
            .map(|(d, w)| w * self.spec.eval_unchecked(d, x))
            .sum()
    }

    /// Gram matrix of this function's own dictionary.
    pub fn gram(&self) -> Matrix {
        gram_matrix(&self.spec, &self.dict, &self.dict).expect("dictionary validated at construction")
    }
}

fn check_compatible(a: &RkhsFunction, b: &RkhsFunction) -> Result<()> {
    if a.spec != b.spec {
        return Err(Error::KernelMismatch);
    }
    if !a.is_empty() && !b.is_empty() && a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), found: b.dim() });
    }
    Ok(())
}

/// `⟨f, g⟩_H = w_fᵀ K_{D_f, D_g} w_g`.
pub fn inner_product(f: &RkhsFunction, g: &RkhsFunction) -> Result<f64> {
    check_compatible(f, g)?;
    if f.is_empty() || g.is_empty() {
        return Ok(0.0);
    }
    let mut s = 0.0;
    for (d, wf) in f.dict.points().zip(&f.coeffs) {
        s += wf * g.evaluate_unchecked(d);
    }
    Ok(s)
}

/// `‖f‖²_H`, clamped to zero when rounding drives it slightly negative.
pub fn hilbert_norm_sq(f: &RkhsFunction) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    let v = f.gram().quadratic_form(&f.coeffs, &f.coeffs);
    if (-NORM_CLAMP_TOL..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

pub fn hilbert_norm(f: &RkhsFunction) -> f64 {
    libm::sqrt(hilbert_norm_sq(f).max(0.0))
}

/// `‖f − g‖_H`.
///
/// The difference is expanded over the union of both dictionaries with
/// bit-identical centers merged into one atom, so functions that share most
/// of their atoms (the usual case after compression) do not lose their
/// distance to cancellation between `‖f‖²` and `‖g‖²`.
pub fn hilbert_distance(f: &RkhsFunction, g: &RkhsFunction) -> Result<f64> {
    check_compatible(f, g)?;
    let dim = if f.is_empty() { g.dim() } else { f.dim() };
    let mut dict = Dictionary::with_capacity(dim, f.model_order() + g.model_order());
    let mut coeffs: Vec<f64> = Vec::with_capacity(f.model_order() + g.model_order());
    let terms = f
        .dict
        .points()
        .zip(f.coeffs.iter().copied())
        .chain(g.dict.points().zip(g.coeffs.iter().map(|w| -w)));
    for (x, w) in terms {
        let existing = dict.points().position(|d| d == x);
        match existing {
            Some(i) => coeffs[i] += w,
            None => {
                dict.push(x)?;
                coeffs.push(w);
            }
        }
    }
    let diff = RkhsFunction::new(f.spec.clone(), dict, coeffs)?;
    Ok(hilbert_norm(&diff))
}

/// Coefficients over `target` of the Hilbert-norm projection of `source`
/// onto `span{κ(d, ·) : d ∈ target}`: the solution of
/// `K_{DD} w = K_{D,D̃} w̃`.
pub fn project_coefficients(target: &Dictionary, source: &RkhsFunction) -> Result<Vec<f64>> {
    if target.is_empty() {
        return Err(Error::InvalidConfig("projection target dictionary is empty"));
    }
    source.spec.check_dim(target.dim())?;
    if !source.is_empty() && source.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: source.dim(), found: target.dim() });
    }
    let k = gram_matrix(&source.spec, target, target)?;
    let rhs: Vec<f64> = target.points().map(|d| source.evaluate_unchecked(d)).collect();
    solve_gram(&k, &rhs)
}

/// Projects `source` onto the span of `target`, returning the new function.
pub fn project(target: &Dictionary, source: &RkhsFunction) -> Result<RkhsFunction> {
    let w = project_coefficients(target, source)?;
    RkhsFunction::new(source.spec.clone(), target.clone(), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn k() -> KernelSpec {
        KernelSpec::gaussian([0.2, 0.0156]).unwrap()
    }

    fn func(points: &[[f64; 2]], w: &[f64]) -> RkhsFunction {
        RkhsFunction::new(k(), Dictionary::from_points(2, points).unwrap(), w.to_vec()).unwrap()
    }

    #[test]
    fn empty_function_is_zero_everywhere() {
        let f = RkhsFunction::zero(k(), 2).unwrap();
        assert_eq!(f.evaluate(&[0.3, 0.01]).unwrap(), 0.0);
        assert_eq!(hilbert_norm_sq(&f), 0.0);
        let g = func(&[[0.0, 0.0]], &[3.0]);
        assert_eq!(inner_product(&g, &f).unwrap(), 0.0);
    }

    #[test]
    fn single_atom_evaluates_to_weight_at_center() {
        let f = func(&[[-0.5, 0.01]], &[2.0]);
        assert_eq!(f.evaluate(&[-0.5, 0.01]).unwrap(), 2.0);
    }

    #[test]
    fn unit_sections_at_same_point_have_unit_inner_product() {
        let a = RkhsFunction::kernel_section(k(), &[0.1, 0.02]).unwrap();
        assert_eq!(inner_product(&a, &a).unwrap(), 1.0);
    }

    #[test]
    fn scaled_section_norm() {
        let f = func(&[[0.1, 0.0]], &[-3.0]);
        assert_eq!(hilbert_norm_sq(&f), 9.0);
    }

    #[test]
    fn mismatched_kernels_rejected() {
        let f = func(&[[0.1, 0.0]], &[1.0]);
        let g = RkhsFunction::new(
            KernelSpec::gaussian([0.3, 0.0156]).unwrap(),
            Dictionary::from_points(2, &[[0.1, 0.0]]).unwrap(),
            vec![1.0],
        )
        .unwrap();
        assert_eq!(inner_product(&f, &g), Err(Error::KernelMismatch));
    }

    #[test]
    fn coefficient_length_must_match_dictionary() {
        let d = Dictionary::from_points(2, &[[0.1, 0.0]]).unwrap();
        assert!(RkhsFunction::new(k(), d, vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn wrong_state_dimension_rejected() {
        let f = func(&[[0.1, 0.0]], &[1.0]);
        assert!(f.evaluate(&[0.1]).is_err());
    }

    #[test]
    fn projection_onto_own_dictionary_is_identity() {
        let f = func(&[[0.0, 0.0], [0.15, 0.01], [-0.3, -0.02]], &[1.5, -0.7, 0.25]);
        let w = project_coefficients(f.dictionary(), &f).unwrap();
        for (a, b) in w.iter().zip(f.coeffs()) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn projection_of_two_atoms_onto_their_centers() {
        let f = func(&[[0.0, 0.0], [0.1, 0.01]], &[1.0, 1.0]);
        let w = project_coefficients(f.dictionary(), &f).unwrap();
        assert!((w[0] - 1.0).abs() < 1e-8 && (w[1] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn empty_target_rejected() {
        let f = func(&[[0.0, 0.0]], &[1.0]);
        assert!(project_coefficients(&Dictionary::new(2), &f).is_err());
    }

    #[test]
    fn distance_between_shared_atoms_is_exact() {
        let f = func(&[[0.0, 0.0], [0.1, 0.01]], &[1.0, 2.0]);
        let g = func(&[[0.1, 0.01]], &[2.0]);
        // f − g = κ(0,·), norm 1
        assert_eq!(hilbert_distance(&f, &g).unwrap(), 1.0);
        assert_eq!(hilbert_distance(&f, &f).unwrap(), 0.0);
    }
}
