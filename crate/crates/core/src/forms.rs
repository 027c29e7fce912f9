//! Connes differential forms represented in `A (x) M_2`.
//!
//! A represented form is a [`CliffordForm`]: four algebra components on the
//! basis `{I, sigma_1, sigma_2, sigma_3}`. `pi(delta a)` is [`comm_D`], and
//! products are reduced with
//! `sigma_j sigma_k = delta_jk I + s i eps_jkl sigma_l`, `s = -1`.
//!
//! Junk is removed by fixed component projections: degree 2 drops `I`,
//! degree 3 keeps only `I`, degree 4 and higher vanish.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::algebra::AlgebraElement;
use crate::conventions::PAULI_ORIENTATION;
use crate::{Error, ModelParams, Result, Window};

/// Highest degree accepted by [`represent`].
pub const MAX_DEGREE: usize = 5;

/// Levi-Civita symbol on `{1, 2, 3}` (0-based here).
pub fn epsilon(j: usize, k: usize, l: usize) -> f64 {
    match (j, k, l) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// Degree plus components on `[I, sigma_1, sigma_2, sigma_3]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CliffordForm {
    pub degree: usize,
    pub components: [AlgebraElement; 4],
}

impl CliffordForm {
    pub fn zero(degree: usize) -> Self {
        CliffordForm { degree, components: Default::default() }
    }

    pub fn new(degree: usize, components: [AlgebraElement; 4]) -> Self {
        CliffordForm { degree, components }
    }

    /// Degree-0 form `a (x) I`.
    pub fn scalar(a: AlgebraElement) -> Self {
        let mut f = CliffordForm::zero(0);
        f.components[0] = a;
        f
    }

    /// `a (x) sigma_j` for `j` in `1..=3`, or `a (x) I` for `j = 0`.
    pub fn single(degree: usize, j: usize, a: AlgebraElement) -> Self {
        let mut f = CliffordForm::zero(degree);
        f.components[j] = a;
        f
    }

    /// Degree-1 form `sum_j x_j sigma_j`.
    pub fn one_form(x: [AlgebraElement; 3]) -> Self {
        let [a, b, c] = x;
        CliffordForm::new(1, [AlgebraElement::zero(), a, b, c])
    }

    pub fn identity_part(&self) -> &AlgebraElement {
        &self.components[0]
    }

    pub fn sigma_part(&self, j: usize) -> &AlgebraElement {
        &self.components[j]
    }

    pub fn with_degree(mut self, degree: usize) -> Self {
        self.degree = degree;
        self
    }

    /// Clifford-reduced product; degrees add.
    pub fn mul(&self, other: &CliffordForm, params: &ModelParams) -> CliffordForm {
        let a = &self.components;
        let b = &other.components;
        let st = |x: &AlgebraElement, y: &AlgebraElement| x.star(y, params);
        let mut out: [AlgebraElement; 4] = Default::default();
        out[0] = st(&a[0], &b[0]);
        for j in 1..4 {
            out[0] += &st(&a[j], &b[j]);
        }
        let si = Complex64::new(0.0, PAULI_ORIENTATION);
        for l in 1..4 {
            let mut c = st(&a[0], &b[l]) + st(&a[l], &b[0]);
            for j in 1..4 {
                for k in 1..4 {
                    let eps = epsilon(j - 1, k - 1, l - 1);
                    if eps != 0.0 {
                        c += &st(&a[j], &b[k]).scale(si * eps);
                    }
                }
            }
            out[l] = c;
        }
        CliffordForm::new(self.degree + other.degree, out)
    }

    /// `a * self`.
    pub fn left_mul(&self, a: &AlgebraElement, params: &ModelParams) -> CliffordForm {
        CliffordForm::new(self.degree, self.components.clone().map(|c| a.star(&c, params)))
    }

    /// `self * a`.
    pub fn right_mul(&self, a: &AlgebraElement, params: &ModelParams) -> CliffordForm {
        CliffordForm::new(self.degree, self.components.clone().map(|c| c.star(a, params)))
    }

    pub fn scale(&self, s: Complex64) -> CliffordForm {
        CliffordForm::new(self.degree, self.components.clone().map(|c| c.scale(s)))
    }

    /// Matrix adjoint: the Pauli matrices are selfadjoint, so each component is
    /// involuted.
    pub fn matrix_adjoint(&self) -> CliffordForm {
        CliffordForm::new(self.degree, self.components.clone().map(|c| c.involution()))
    }

    /// Involution of forms, `(delta a)^* = -delta(a^*)`. A represented degree-`k`
    /// form carries the factor `i^k` relative to the operator image, so this is
    /// `(-1)^k` times the matrix adjoint.
    pub fn form_involution(&self) -> CliffordForm {
        let adj = self.matrix_adjoint();
        if self.degree % 2 == 1 {
            adj.scale(Complex64::new(-1.0, 0.0))
        } else {
            adj
        }
    }

    pub fn add(&self, other: &CliffordForm) -> Result<CliffordForm> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { left: self.degree, right: other.degree });
        }
        let mut out = self.clone();
        for (c, d) in out.components.iter_mut().zip(&other.components) {
            *c += d;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &CliffordForm) -> Result<CliffordForm> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn restrict(&self, w: &Window) -> CliffordForm {
        CliffordForm::new(self.degree, self.components.clone().map(|c| c.restrict(w)))
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_zero())
    }

    /// Largest coefficient modulus over all components.
    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &CliffordForm) -> f64 {
        self.components.iter().zip(&other.components).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }

    /// Largest coefficient modulus of the `sigma` components.
    pub fn sigma_max_abs(&self) -> f64 {
        self.components[1..].iter().map(|c| c.max_abs()).fold(0.0, f64::max)
    }

    /// Number of components that are not forced to vanish in the degree's
    /// quotient `Omega^k_D`.
    pub fn quotient_rank(degree: usize) -> usize {
        match degree {
            0 => 1,
            1 | 2 => 3,
            3 => 1,
            _ => 0,
        }
    }
}

/// `pi(delta a) = sum_j delta_j(a) sigma_j`.
pub fn comm_d(a: &AlgebraElement, window: Option<&Window>, params: &ModelParams) -> Result<CliffordForm> {
    Ok(CliffordForm::one_form(a.gradient(window, params)?))
}

/// Universal `k`-form `sum a_0 delta(a_1) ... delta(a_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct UniversalForm {
    pub degree: usize,
    pub terms: Vec<(AlgebraElement, Vec<AlgebraElement>)>,
}

impl UniversalForm {
    pub fn zero(degree: usize) -> Self {
        UniversalForm { degree, terms: Vec::new() }
    }

    pub fn from_terms(degree: usize, terms: Vec<(AlgebraElement, Vec<AlgebraElement>)>) -> Result<Self> {
        for (_, ds) in &terms {
            if ds.len() != degree {
                return Err(Error::DegreeMismatch { left: degree, right: ds.len() });
            }
        }
        Ok(UniversalForm { degree, terms })
    }

    /// Single term `a_0 delta(a_1) ... delta(a_k)`.
    pub fn term(a0: AlgebraElement, ds: Vec<AlgebraElement>) -> Self {
        UniversalForm { degree: ds.len(), terms: vec![(a0, ds)] }
    }

    pub fn concat(mut self, other: UniversalForm) -> Result<Self> {
        if self.degree != other.degree {
            return Err(Error::DegreeMismatch { left: self.degree, right: other.degree });
        }
        self.terms.extend(other.terms);
        Ok(self)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        UniversalForm {
            degree: self.degree,
            terms: self.terms.iter().map(|(a0, ds)| (a0.scale(s), ds.clone())).collect(),
        }
    }

    /// Product in the universal algebra, moving each right coefficient to the
    /// left with `delta(a) b = delta(a b) - a delta(b)`.
    pub fn mul(&self, other: &UniversalForm, params: &ModelParams) -> UniversalForm {
        let mut terms = Vec::new();
        for t1 in &self.terms {
            for (b0, bs) in &other.terms {
                for (c0, mut cs) in right_mul_term(t1, b0, params) {
                    cs.extend(bs.iter().cloned());
                    terms.push((c0, cs));
                }
            }
        }
        UniversalForm { degree: self.degree + other.degree, terms }
    }
}

/// `(a_0 delta a_1 ... delta a_p) b` as a sum of standard terms.
fn right_mul_term(
    term: &(AlgebraElement, Vec<AlgebraElement>),
    b: &AlgebraElement,
    params: &ModelParams,
) -> Vec<(AlgebraElement, Vec<AlgebraElement>)> {
    let (a0, ds) = term;
    let Some((last, prefix)) = ds.split_last() else {
        return vec![(a0.star(b, params), Vec::new())];
    };
    let mut out = Vec::new();
    let mut first = prefix.to_vec();
    first.push(last.star(b, params));
    out.push((a0.clone(), first));
    for (c0, mut cs) in right_mul_term(&(a0.clone(), prefix.to_vec()), last, params) {
        cs.push(b.clone());
        out.push((-c0, cs));
    }
    out
}

/// `pi(w) = sum a_0 [D, a_1] ... [D, a_k]`, Clifford-reduced.
pub fn represent(w: &UniversalForm, window: Option<&Window>, params: &ModelParams) -> Result<CliffordForm> {
    if w.degree > MAX_DEGREE {
        return Err(Error::DegreeTooLarge(w.degree));
    }
    let mut acc = CliffordForm::zero(w.degree);
    for (a0, ds) in &w.terms {
        let mut f = CliffordForm::scalar(a0.clone());
        for a in ds {
            f = f.mul(&comm_d(a, window, params)?, params);
        }
        acc = acc.add(&f)?;
    }
    Ok(acc)
}

/// `delta(a_0 delta a_1 ... delta a_k) = delta a_0 delta a_1 ... delta a_k`.
pub fn differential(w: &UniversalForm) -> UniversalForm {
    UniversalForm {
        degree: w.degree + 1,
        terms: w
            .terms
            .iter()
            .map(|(a0, ds)| {
                let mut all = Vec::with_capacity(ds.len() + 1);
                all.push(a0.clone());
                all.extend(ds.iter().cloned());
                (AlgebraElement::one(), all)
            })
            .collect(),
    }
}

/// Canonical representative in `Omega^k_D`.
pub fn junk_project(f: &CliffordForm) -> CliffordForm {
    let mut out = f.clone();
    match f.degree {
        0 | 1 => {}
        2 => out.components[0] = AlgebraElement::zero(),
        3 => {
            for j in 1..4 {
                out.components[j] = AlgebraElement::zero();
            }
        }
        _ => out = CliffordForm::zero(f.degree),
    }
    out
}

/// `(1/2)(I (x) tr)(f g^*) = sum_b f_b * g_b^*`.
pub fn valued_inner(f: &CliffordForm, g: &CliffordForm, params: &ModelParams) -> Result<AlgebraElement> {
    if f.degree != g.degree {
        return Err(Error::DegreeMismatch { left: f.degree, right: g.degree });
    }
    let mut s = AlgebraElement::zero();
    for (a, b) in f.components.iter().zip(&g.components) {
        s += &a.star(&b.involution(), params);
    }
    Ok(s)
}

/// `tau` of [`valued_inner`], normalized so `<sigma_1, sigma_1> = 1`.
pub fn form_inner(f: &CliffordForm, g: &CliffordForm) -> Result<Complex64> {
    if f.degree != g.degree {
        return Err(Error::DegreeMismatch { left: f.degree, right: g.degree });
    }
    Ok(f.components.iter().zip(&g.components).map(|(a, b)| a.gns_inner(b)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conventions::tol;
    use crate::linalg::{self, pauli, CMatrix};
    use crate::math::{c, I, ONE, TWO_PI, ZERO};
    use crate::BasisIndex;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn par() -> ModelParams {
        ModelParams::default()
    }

    fn phi(m: i64, n: i64) -> AlgebraElement {
        AlgebraElement::basis3(m, n, 0)
    }

    fn tpi() -> Complex64 {
        I * TWO_PI
    }

    fn random_element(rng: &mut ChaCha8Rng, terms: usize, r: i64, k0: bool) -> AlgebraElement {
        (0..terms)
            .map(|_| {
                let k = if k0 { 0 } else { rng.gen_range(-1..=1) };
                (
                    BasisIndex::new(rng.gen_range(-r..=r), rng.gen_range(-r..=r), k),
                    c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                )
            })
            .collect()
    }

    #[test]
    fn clifford_product_matches_matrices() {
        // Components as scalars: compare with explicit 2x2 products.
        let s = pauli();
        let par = par();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let xs: Vec<Complex64> = (0..8).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let f = CliffordForm::new(1, core::array::from_fn(|j| AlgebraElement::scalar(xs[j])));
            let g = CliffordForm::new(1, core::array::from_fn(|j| AlgebraElement::scalar(xs[4 + j])));
            let mat = |v: &[Complex64]| -> CMatrix {
                linalg::identity(2) * v[0] + &s[0] * v[1] + &s[1] * v[2] + &s[2] * v[3]
            };
            let prod = mat(&xs[..4]) * mat(&xs[4..]);
            let fg = f.mul(&g, &par);
            let got: Vec<Complex64> = fg.components.iter().map(|a| a.trace()).collect();
            assert!(linalg::max_abs(&(mat(&got) - prod)) < 1e-14);
            assert_eq!(fg.degree, 2);
        }
    }

    #[test]
    fn comm_d_examples() {
        let p = par();
        let f = comm_d(&phi(0, 1), None, &p).unwrap();
        assert!(f.components[0].is_zero() && f.components[1].is_zero() && f.components[3].is_zero());
        assert!(f.components[2].max_abs_diff(&phi(0, 1).scale(tpi())) < 1e-15);
        assert!(comm_d(&AlgebraElement::one(), None, &p).unwrap().is_zero());
        let f = comm_d(&phi(1, 0), None, &p).unwrap();
        assert!(f.components[1].max_abs_diff(&phi(1, 0).scale(tpi())) < 1e-15);
    }

    #[test]
    fn represent_examples() {
        let p = par();
        let f = represent(&UniversalForm::term(phi(1, 1), vec![]), None, &p).unwrap();
        assert_eq!(f, CliffordForm::scalar(phi(1, 1)));
        // delta(phi_10) delta(phi_01) = (2 pi i)^2 phi_11 sigma_1 sigma_2 = -i (2 pi i)^2 phi_11 sigma_3.
        let f = represent(&UniversalForm::term(AlgebraElement::one(), vec![phi(1, 0), phi(0, 1)]), None, &p).unwrap();
        let want = phi(1, 1).scale(tpi() * tpi() * Complex64::new(0.0, PAULI_ORIENTATION));
        assert!(f.components[3].max_abs_diff(&want) < 1e-12);
        assert!(f.components[0].is_zero());
    }

    fn j1_witness() -> UniversalForm {
        UniversalForm::from_terms(1, vec![(phi(0, 2).scale_re(2.0), vec![phi(0, 1)]), (-phi(0, 1), vec![phi(0, 2)])])
            .unwrap()
    }

    #[test]
    fn j1_witness_and_its_differential() {
        let p = par();
        assert!(represent(&j1_witness(), None, &p).unwrap().is_zero());
        let d = differential(&j1_witness());
        assert_eq!(d.degree, 2);
        let f = represent(&d, None, &p).unwrap();
        let want = phi(0, 3).scale(tpi() * tpi() * 2.0);
        assert!(f.components[0].max_abs_diff(&want) < 1e-10);
        assert!(f.sigma_max_abs() < 1e-12);
    }

    #[test]
    fn differential_squares_to_zero() {
        let p = par();
        let a = phi(1, 2) + phi(-1, 0);
        let w = UniversalForm::term(a, vec![]);
        let dd = differential(&differential(&w));
        // delta(delta a) = delta(1) delta(a) and delta(1) = 0 in the representation.
        assert!(represent(&dd, None, &p).unwrap().is_zero());
    }

    #[test]
    fn random_j1_elements() {
        let p = par();
        let w = Window::cube(14);
        let inner = w.shrink(6);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let g = random_element(&mut rng, 3, 2, true);
            let h = random_element(&mut rng, 3, 2, false);
            let omega = UniversalForm::from_terms(
                1,
                vec![(h.clone(), vec![g.star(&g, &p)]), (h.star(&g, &p).scale_re(-2.0), vec![g.clone()])],
            )
            .unwrap();
            assert!(represent(&omega, Some(&w), &p).unwrap().max_abs() < tol::JUNK);
            let f = represent(&differential(&omega), Some(&w), &p).unwrap().restrict(&inner);
            assert!(f.sigma_max_abs() < tol::JUNK, "{}", f.sigma_max_abs());
        }
    }

    #[test]
    fn degree_three_witnesses() {
        let p = par();
        let w = Window::cube(10);
        let t3 = tpi() * tpi() * tpi();
        let w1 = UniversalForm::from_terms(
            2,
            vec![(phi(0, 2).scale_re(2.0), vec![phi(0, 1), phi(0, 1)]), (-phi(0, 1), vec![phi(0, 2), phi(0, 1)])],
        )
        .unwrap();
        assert!(represent(&w1, None, &p).unwrap().is_zero());
        let f = represent(&differential(&w1), None, &p).unwrap();
        assert!(f.components[2].max_abs_diff(&phi(0, 4).scale(t3 * 2.0)) < 1e-9);
        assert!(f.components[0].is_zero() && f.components[1].is_zero() && f.components[3].is_zero());

        let w2 = UniversalForm::from_terms(
            2,
            vec![(phi(2, 0).scale_re(2.0), vec![phi(1, 0), phi(1, 0)]), (-phi(1, 0), vec![phi(2, 0), phi(1, 0)])],
        )
        .unwrap();
        assert!(represent(&w2, None, &p).unwrap().is_zero());
        let f = represent(&differential(&w2), None, &p).unwrap();
        assert!(f.components[1].max_abs_diff(&phi(4, 0).scale(t3 * 2.0)) < 1e-9);

        // The third witness needs the factor 2 on phi_02 to lie in J_2.
        let ph = AlgebraElement::basis3(0, 0, 1) + AlgebraElement::basis3(1, -1, 1);
        let w3 = UniversalForm::from_terms(
            2,
            vec![(phi(0, 2).scale_re(2.0), vec![phi(0, 1), ph.clone()]), (-phi(0, 1), vec![phi(0, 2), ph.clone()])],
        )
        .unwrap();
        assert!(represent(&w3, Some(&w), &p).unwrap().max_abs() < 1e-10);
        let f = represent(&differential(&w3), Some(&w), &p).unwrap();
        let grad = ph.gradient(Some(&w), &p).unwrap();
        for j in 0..3 {
            let want = phi(0, 3).star(&grad[j], &p).scale(tpi() * tpi() * 2.0);
            assert!(f.components[j + 1].max_abs_diff(&want) < 1e-9);
            assert!(f.components[j + 1].max_abs() > 1.0);
        }
        assert!(f.components[0].max_abs() < 1e-9);
    }

    #[test]
    fn degree_four_witness_and_quotients() {
        let p = par();
        let w1 = UniversalForm::from_terms(
            3,
            vec![
                (phi(0, 2).scale_re(2.0), vec![phi(0, 1), phi(0, 1), phi(0, 1)]),
                (-phi(0, 1), vec![phi(0, 2), phi(0, 1), phi(0, 1)]),
            ],
        )
        .unwrap();
        assert!(represent(&w1, None, &p).unwrap().is_zero());
        let f = represent(&differential(&w1), None, &p).unwrap();
        let t4 = tpi() * tpi() * tpi() * tpi();
        assert!(f.components[0].max_abs_diff(&phi(0, 5).scale(t4 * 2.0)) < 1e-8);
        assert!(junk_project(&f).is_zero());
        for d in 4..=5 {
            let g = CliffordForm::new(d, core::array::from_fn(|j| phi(j as i64, 1)));
            assert!(junk_project(&g).is_zero());
        }
        let too_big = UniversalForm::term(AlgebraElement::one(), vec![phi(0, 1); 6]);
        assert_eq!(represent(&too_big, None, &p), Err(Error::DegreeTooLarge(6)));
    }

    #[test]
    fn junk_projection_examples() {
        let f = CliffordForm::new(2, [phi(1, 0), phi(0, 1), AlgebraElement::zero(), AlgebraElement::zero()]);
        let g = junk_project(&f);
        assert!(g.components[0].is_zero());
        assert_eq!(g.components[1], phi(0, 1));
        let f3 = CliffordForm::new(3, [phi(1, 0), phi(0, 1), phi(2, 2), phi(3, 3)]);
        let g3 = junk_project(&f3);
        assert_eq!(g3.components[0], phi(1, 0));
        assert!(g3.sigma_max_abs() == 0.0);
        // Ladder of surviving components.
        for d in 0..=5 {
            let full = CliffordForm::new(d, core::array::from_fn(|j| phi(j as i64, 0) + phi(0, 1)));
            let start = if d == 1 { 1 } else { 0 };
            let end = if d == 0 { 1 } else { 4 };
            let mut full = full;
            for j in 0..4 {
                if j < start || j >= end {
                    full.components[j] = AlgebraElement::zero();
                }
            }
            let n = junk_project(&full).components.iter().filter(|c| !c.is_zero()).count();
            assert_eq!(n, CliffordForm::quotient_rank(d), "degree {d}");
        }
    }

    #[test]
    fn inner_product_examples() {
        let p = par();
        let s1 = CliffordForm::single(1, 1, AlgebraElement::one());
        let s2 = CliffordForm::single(1, 2, AlgebraElement::one());
        assert_eq!(form_inner(&s1, &s1).unwrap(), ONE);
        assert_eq!(form_inner(&s1, &s2).unwrap(), ZERO);
        assert_eq!(valued_inner(&s1, &s1, &p).unwrap(), AlgebraElement::one());
        let a = AlgebraElement::basis3(1, 2, 1);
        let b = AlgebraElement::basis3(1, 2, 1);
        let fa = CliffordForm::single(1, 3, a.clone());
        let fb = CliffordForm::single(1, 3, AlgebraElement::basis3(0, 2, 1));
        assert_eq!(form_inner(&fa, &CliffordForm::single(1, 3, b)).unwrap(), ONE);
        assert_eq!(form_inner(&fa, &fb).unwrap(), ZERO);
        let x = AlgebraElement::basis3(2, 0, -1).scale(c(0.5, 1.0));
        let v =
            valued_inner(&CliffordForm::single(1, 1, a.clone()), &CliffordForm::single(1, 1, x.clone()), &p).unwrap();
        assert!(v.max_abs_diff(&a.star(&x.involution(), &p)) < 1e-15);
        assert!(form_inner(&s1, &CliffordForm::scalar(AlgebraElement::one())).is_err());
    }

    fn arb_form(degree: usize) -> impl Strategy<Value = CliffordForm> {
        proptest::collection::vec((0usize..4, (-2i64..=2, -2i64..=2, -1i64..=1), (-1.0f64..1.0, -1.0f64..1.0)), 0..6)
            .prop_map(move |v| {
                let mut f = CliffordForm::zero(degree);
                for (j, (m, n, k), (re, im)) in v {
                    f.components[j].add_term(BasisIndex::new(m, n, k), c(re, im));
                }
                f
            })
    }

    proptest! {
        #[test]
        fn prop_inner_positive(f in arb_form(2)) {
            let p = par();
            let v = form_inner(&f, &f).unwrap();
            prop_assert!(v.re >= 0.0 && v.im.abs() < 1e-12);
            prop_assert_eq!(v.re == 0.0, f.is_zero());
            let tv = valued_inner(&f, &f, &p).unwrap().trace();
            prop_assert!((tv - v).norm() < 1e-12);
        }

        #[test]
        fn prop_clifford_associative(f in arb_form(1), g in arb_form(1), h in arb_form(1)) {
            let p = par();
            let l = f.mul(&g, &p).mul(&h, &p);
            let r = f.mul(&g.mul(&h, &p), &p);
            prop_assert!(l.max_abs_diff(&r) < 1e-12);
        }
    }

    #[test]
    fn represent_is_multiplicative() {
        // Exact for commuting coefficients (k = 0), where every delta_j is an
        // exact derivation; left module structure is checked for general ones.
        let p = par();
        let w = Window::cube(12);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..6 {
            let mut el = || random_element(&mut rng, 2, 2, true);
            let w1 = UniversalForm::term(el(), vec![el()]);
            let w2 = UniversalForm::term(el(), vec![el(), el()]);
            let prod = w1.mul(&w2, &p);
            assert_eq!(prod.degree, 3);
            let l = represent(&prod, Some(&w), &p).unwrap();
            let r = represent(&w1, Some(&w), &p).unwrap().mul(&represent(&w2, Some(&w), &p).unwrap(), &p);
            assert!(l.max_abs_diff(&r) < 1e-8);
        }
        for _ in 0..6 {
            let a = random_element(&mut rng, 2, 2, false);
            let w2 =
                UniversalForm::term(random_element(&mut rng, 2, 2, false), vec![random_element(&mut rng, 2, 2, false)]);
            let l = represent(&UniversalForm::term(a.clone(), vec![]).mul(&w2, &p), Some(&w), &p).unwrap();
            let r = represent(&w2, Some(&w), &p).unwrap().left_mul(&a, &p);
            assert!(l.max_abs_diff(&r) < 1e-10);
        }
    }
}
