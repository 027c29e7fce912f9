//! Coefficient-space arithmetic on the smooth quantum Heisenberg algebra.
//!
//! An element is a finite combination of the basis functions
//! `phi_{m,n,k}(x, y, p) = e(cxyp) e(mx + ny) delta_{kp}`. On this basis the
//! twisted convolution is a twisted group algebra of `Z^3`:
//! `phi_a * phi_b = e(lambda(a, b)) phi_{a+b}` with the cocycle
//! [`structure_phase`]. Star, involution, trace and the GNS inner product are
//! therefore exact.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::math::{self, e, I, TWO_PI, ZERO};
use crate::{BasisIndex, Error, ModelParams, Result, Window};

/// Exponent `lambda(a, b)` with `phi_a * phi_b = e(lambda(a, b)) phi_{a+b}`.
///
/// `hbar mu (m_a k_b - m_b k_a) + hbar nu (n_a k_b - n_b k_a)
///  + c hbar^2 mu nu k_a k_b (k_a + k_b)`.
pub fn structure_phase(a: BasisIndex, b: BasisIndex, params: &ModelParams) -> f64 {
    let h = params.hbar;
    let (ka, kb) = (a.k as f64, b.k as f64);
    h * params.mu * (a.m as f64 * kb - b.m as f64 * ka)
        + h * params.nu * (a.n as f64 * kb - b.n as f64 * ka)
        + params.cf() * h * h * params.mu * params.nu * ka * kb * (ka + kb)
}

/// Fourier coefficient `c_l` of the sawtooth `y` on `[0, 1)`:
/// `1/2` for `l = 0`, otherwise `-1/(2 pi i l) = i/(2 pi l)`.
pub fn sawtooth_coefficient(l: i64) -> Complex64 {
    if l == 0 {
        Complex64::new(0.5, 0.0)
    } else {
        Complex64::new(0.0, 1.0 / (TWO_PI * l as f64))
    }
}

/// Finite coefficient map over the basis `phi_{m,n,k}`. Zero coefficients are
/// never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AlgebraElement {
    coeffs: BTreeMap<BasisIndex, Complex64>,
}

impl AlgebraElement {
    pub fn zero() -> Self {
        AlgebraElement::default()
    }

    /// The unit `phi_{0,0,0}`.
    pub fn one() -> Self {
        AlgebraElement::basis(BasisIndex::ZERO)
    }

    pub fn basis(idx: BasisIndex) -> Self {
        AlgebraElement::term(idx, Complex64::new(1.0, 0.0))
    }

    pub fn basis3(m: i64, n: i64, k: i64) -> Self {
        AlgebraElement::basis(BasisIndex::new(m, n, k))
    }

    pub fn term(idx: BasisIndex, c: Complex64) -> Self {
        let mut a = AlgebraElement::zero();
        a.add_term(idx, c);
        a
    }

    pub fn scalar(c: Complex64) -> Self {
        AlgebraElement::term(BasisIndex::ZERO, c)
    }

    /// Sums repeated indices.
    pub fn from_terms<I: IntoIterator<Item = (BasisIndex, Complex64)>>(terms: I) -> Self {
        let mut a = AlgebraElement::zero();
        for (idx, c) in terms {
            a.add_term(idx, c);
        }
        a
    }

    pub fn add_term(&mut self, idx: BasisIndex, c: Complex64) {
        if c == ZERO {
            return;
        }
        let slot = self.coeffs.entry(idx).or_insert(ZERO);
        *slot += c;
        if *slot == ZERO {
            self.coeffs.remove(&idx);
        }
    }

    pub fn coeff(&self, idx: BasisIndex) -> Complex64 {
        self.coeffs.get(&idx).copied().unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BasisIndex, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support(&self) -> impl Iterator<Item = BasisIndex> + '_ {
        self.coeffs.keys().copied()
    }

    /// Largest Chebyshev radius over the support (0 for the zero element).
    pub fn support_radius(&self) -> i64 {
        self.coeffs.keys().map(|i| i.radius()).max().unwrap_or(0)
    }

    pub fn max_abs_k(&self) -> i64 {
        self.coeffs.keys().map(|i| i.k.abs()).max().unwrap_or(0)
    }

    /// True when every index has `k = 0` (the commutative torus sector).
    pub fn is_k0(&self) -> bool {
        self.coeffs.keys().all(|i| i.k == 0)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        AlgebraElement::from_terms(self.iter().map(|(i, c)| (*i, c * s)))
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Keeps only indices inside `w`.
    pub fn restrict(&self, w: &Window) -> Self {
        AlgebraElement { coeffs: self.coeffs.iter().filter(|(i, _)| w.contains(i)).map(|(i, c)| (*i, *c)).collect() }
    }

    /// Drops coefficients with modulus below `tol`.
    pub fn prune(&self, tol: f64) -> Self {
        AlgebraElement { coeffs: self.coeffs.iter().filter(|(_, c)| c.norm() > tol).map(|(i, c)| (*i, *c)).collect() }
    }

    /// `phi_a * phi_b = e(lambda(a, b)) phi_{a+b}`, extended bilinearly.
    pub fn star(&self, other: &AlgebraElement, params: &ModelParams) -> AlgebraElement {
        let mut out = BTreeMap::new();
        for (ia, ca) in &self.coeffs {
            for (ib, cb) in &other.coeffs {
                let c = ca * cb * e(structure_phase(*ia, *ib, params));
                *out.entry(*ia + *ib).or_insert(ZERO) += c;
            }
        }
        out.retain(|_, c| *c != ZERO);
        AlgebraElement { coeffs: out }
    }

    /// `phi_{m,n,k}^* = phi_{-m,-n,-k}` with conjugated coefficients.
    pub fn involution(&self) -> AlgebraElement {
        AlgebraElement { coeffs: self.coeffs.iter().map(|(i, c)| (-*i, c.conj())).collect() }
    }

    /// The invariant trace: the coefficient of the unit.
    pub fn trace(&self) -> Complex64 {
        self.coeff(BasisIndex::ZERO)
    }

    /// `<self, other> = trace(other^* * self)`, linear in `self`.
    pub fn gns_inner(&self, other: &AlgebraElement) -> Complex64 {
        let mut s = ZERO;
        for (i, c) in &self.coeffs {
            if let Some(d) = other.coeffs.get(i) {
                s += c * d.conj();
            }
        }
        s
    }

    pub fn norm_l2(&self) -> f64 {
        math::sqrt(self.coeffs.values().map(|c| c.norm_sqr()).sum())
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Largest coefficient deviation from `other`.
    pub fn max_abs_diff(&self, other: &AlgebraElement) -> f64 {
        (self - other).max_abs()
    }

    pub fn is_selfadjoint(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.involution()) <= tol
    }

    /// Pointwise value. `y` is taken as given (not reduced mod 1), so the
    /// quasi-periodicity in `x` and the twisted convolution hold exactly.
    pub fn evaluate(&self, x: f64, y: f64, p: i64, params: &ModelParams) -> Complex64 {
        let mut s = ZERO;
        for (i, c) in &self.coeffs {
            if i.k == p {
                s += c * e(i.m as f64 * x + i.n as f64 * y);
            }
        }
        s * e(params.cf() * x * y * p as f64)
    }

    /// `sum_k sup_{(x,y)} |a(x, y, k)|` sampled on a square grid of `grid`
    /// points per axis over the unit square; the grid is raised to at least
    /// `2 (M + N + 1)` for the support.
    pub fn norm_111(&self, grid: usize) -> f64 {
        let mut by_k: BTreeMap<i64, Vec<(BasisIndex, Complex64)>> = BTreeMap::new();
        let mut need = 4usize;
        for (i, c) in &self.coeffs {
            by_k.entry(i.k).or_default().push((*i, *c));
            need = need.max(2 * (i.m.unsigned_abs() + i.n.unsigned_abs() + 1) as usize);
        }
        let g = grid.max(need);
        let h = 1.0 / g as f64;
        let mut total = 0.0;
        for terms in by_k.values() {
            let mut sup = 0.0f64;
            for ix in 0..g {
                let x = ix as f64 * h;
                for iy in 0..g {
                    let y = iy as f64 * h;
                    // |e(cxyp)| = 1, so only the trigonometric part matters.
                    let v: Complex64 = terms.iter().map(|(i, c)| c * e(i.m as f64 * x + i.n as f64 * y)).sum();
                    sup = sup.max(v.norm());
                }
            }
            total += sup;
        }
        total
    }

    /// `delta_j` in the fixed normalization
    /// `delta_2 phi = 2 pi i n phi`, `delta_3 phi = -2 pi i c alpha k phi`,
    /// `delta_1 phi = 2 pi i m phi + 2 pi i c k (y phi)`,
    /// where `y phi_{m,n,k} = sum_l c_l phi_{m,n+l,k}` is the sawtooth expansion,
    /// truncated to `window`.
    ///
    /// Each `delta_j` equals `i [D'_j, L_a]` for the `sigma_j` component `D'_j`
    /// of the Dirac operator, so it is a `*`-derivation.
    pub fn derivation(&self, j: u8, window: Option<&Window>, params: &ModelParams) -> Result<AlgebraElement> {
        let two_pi_i = I * TWO_PI;
        match j {
            2 => Ok(AlgebraElement::from_terms(self.iter().map(|(i, c)| (*i, c * two_pi_i * i.n as f64)))),
            3 => {
                let s = -two_pi_i * params.cf() * params.alpha;
                Ok(AlgebraElement::from_terms(self.iter().map(|(i, c)| (*i, c * s * i.k as f64))))
            }
            1 => {
                let mut out = AlgebraElement::from_terms(self.iter().map(|(i, c)| (*i, c * two_pi_i * i.m as f64)));
                let tail: Vec<_> = self.iter().filter(|(i, _)| i.k != 0).collect();
                if tail.is_empty() {
                    return Ok(out);
                }
                let w = window.ok_or(Error::MissingWindow)?;
                for (i, c) in tail {
                    let pref = c * two_pi_i * params.cf() * i.k as f64;
                    out.add_term(*i, pref * sawtooth_coefficient(0));
                    for n2 in w.n_range().filter(|n2| *n2 != i.n) {
                        let target = BasisIndex::new(i.m, n2, i.k);
                        if w.contains(&target) {
                            out.add_term(target, pref * sawtooth_coefficient(n2 - i.n));
                        }
                    }
                }
                Ok(out)
            }
            _ => Err(Error::InvalidParams(alloc::format!("derivation index {j} not in 1..=3"))),
        }
    }

    /// `i [D'_1 + D'_2 + D'_3, .]` components: `[delta_1 a, delta_2 a, delta_3 a]`.
    pub fn gradient(&self, window: Option<&Window>, params: &ModelParams) -> Result<[AlgebraElement; 3]> {
        Ok([
            self.derivation(1, window, params)?,
            self.derivation(2, window, params)?,
            self.derivation(3, window, params)?,
        ])
    }
}

/// Twisted convolution `(f * g)(x, y, p) = sum_q f(x - hbar (q - p) mu,
/// y - hbar (q - p) nu, q) g(x - hbar q mu, y - hbar q nu, p - q)` evaluated
/// directly from the section values.
pub fn twisted_convolution_at(
    f: &AlgebraElement,
    g: &AlgebraElement,
    x: f64,
    y: f64,
    p: i64,
    params: &ModelParams,
) -> Complex64 {
    let (h, mu, nu) = (params.hbar, params.mu, params.nu);
    let mut s = ZERO;
    for q in f.support().map(|i| i.k).collect::<alloc::collections::BTreeSet<_>>() {
        let d = (q - p) as f64;
        s += f.evaluate(x - h * d * mu, y - h * d * nu, q, params)
            * g.evaluate(x - h * q as f64 * mu, y - h * q as f64 * nu, p - q, params);
    }
    s
}

/// Largest pointwise gap between the twisted convolution of two basis
/// functions and `e(lambda(a, b)) phi_{a+b}` on a `grid x grid` sampling of
/// `[0, 1)^2`, over the `p`-slices where either side can be nonzero.
pub fn structure_oracle_residual(a: BasisIndex, b: BasisIndex, grid: usize, params: &ModelParams) -> f64 {
    let fa = AlgebraElement::basis(a);
    let fb = AlgebraElement::basis(b);
    let rhs = AlgebraElement::term(a + b, e(structure_phase(a, b, params)));
    let ps = [a.k + b.k - 1, a.k + b.k, a.k + b.k + 1];
    let mut worst = 0.0f64;
    for p in ps {
        for ix in 0..grid {
            for iy in 0..grid {
                let (x, y) = (ix as f64 / grid as f64, iy as f64 / grid as f64);
                let l = twisted_convolution_at(&fa, &fb, x, y, p, params);
                worst = worst.max((l - rhs.evaluate(x, y, p, params)).norm());
            }
        }
    }
    worst
}

/// Pointwise value of the Heisenberg group action
/// `(L_{(r,s,t)} a)(x, y, p) = e(p (t + c s (x - r))) a(x - r, y - s, p)`.
#[allow(clippy::too_many_arguments)]
pub fn heisenberg_action(
    r: f64,
    s: f64,
    t: f64,
    a: &AlgebraElement,
    x: f64,
    y: f64,
    p: i64,
    params: &ModelParams,
) -> Complex64 {
    let pf = p as f64;
    e(pf * (t + params.cf() * s * (x - r))) * a.evaluate(x - r, y - s, p, params)
}

impl Add<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, o: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        out += o;
        out
    }
}

impl Add for AlgebraElement {
    type Output = AlgebraElement;
    fn add(mut self, o: AlgebraElement) -> AlgebraElement {
        self += &o;
        self
    }
}

impl Sub<&AlgebraElement> for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, o: &AlgebraElement) -> AlgebraElement {
        let mut out = self.clone();
        out -= o;
        out
    }
}

impl Sub for AlgebraElement {
    type Output = AlgebraElement;
    fn sub(mut self, o: AlgebraElement) -> AlgebraElement {
        self -= &o;
        self
    }
}

impl AddAssign<&AlgebraElement> for AlgebraElement {
    fn add_assign(&mut self, o: &AlgebraElement) {
        for (i, c) in &o.coeffs {
            self.add_term(*i, *c);
        }
    }
}

impl SubAssign<&AlgebraElement> for AlgebraElement {
    fn sub_assign(&mut self, o: &AlgebraElement) {
        for (i, c) in &o.coeffs {
            self.add_term(*i, -c);
        }
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale_re(-1.0)
    }
}

impl Neg for AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale_re(-1.0)
    }
}

impl Mul<Complex64> for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, s: Complex64) -> AlgebraElement {
        self.scale(s)
    }
}

impl FromIterator<(BasisIndex, Complex64)> for AlgebraElement {
    fn from_iter<T: IntoIterator<Item = (BasisIndex, Complex64)>>(iter: T) -> Self {
        AlgebraElement::from_terms(iter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{c, ONE};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p() -> ModelParams {
        ModelParams::default()
    }

    fn bi(m: i64, n: i64, k: i64) -> BasisIndex {
        BasisIndex::new(m, n, k)
    }

    fn random_index(rng: &mut ChaCha8Rng, r: i64) -> BasisIndex {
        bi(rng.gen_range(-r..=r), rng.gen_range(-r..=r), rng.gen_range(-r..=r))
    }

    fn random_element(rng: &mut ChaCha8Rng, terms: usize, r: i64) -> AlgebraElement {
        (0..terms).map(|_| (random_index(rng, r), c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect()
    }

    #[test]
    fn phase_examples() {
        let par = p();
        assert_eq!(structure_phase(bi(2, -1, 0), bi(1, 3, 0), &par), 0.0);
        assert_eq!(structure_phase(BasisIndex::ZERO, bi(1, 2, 3), &par), 0.0);
        let l = structure_phase(bi(1, 0, 1), bi(0, 0, -1), &par);
        assert!((l + par.hbar * par.mu).abs() < 1e-15);
    }

    #[test]
    fn phase_matches_grid_convolution() {
        let par = p();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut worst = 0.0f64;
        for _ in 0..30 {
            let a = random_index(&mut rng, 2);
            let b = random_index(&mut rng, 2);
            worst = worst.max(structure_oracle_residual(a, b, 32, &par));
        }
        assert!(worst < 1e-12, "grid residual {worst}");
        // The convolution also reproduces the star product of sums.
        let f = AlgebraElement::basis(bi(1, 0, 1)) + AlgebraElement::basis(bi(0, 2, -1));
        let g = AlgebraElement::basis(bi(-1, 1, 2)).scale(c(0.5, 1.0));
        let fg = f.star(&g, &par);
        for pp in -1..=4 {
            let l = twisted_convolution_at(&f, &g, 0.3, 0.7, pp, &par);
            assert!((l - fg.evaluate(0.3, 0.7, pp, &par)).norm() < 1e-12);
        }
    }

    #[test]
    fn star_examples() {
        let par = p();
        let prod = AlgebraElement::basis3(1, 0, 0).star(&AlgebraElement::basis3(0, 1, 0), &par);
        assert_eq!(prod, AlgebraElement::basis3(1, 1, 0));
        let prod = AlgebraElement::basis3(1, 0, 1).star(&AlgebraElement::basis3(0, 0, -1), &par);
        let want = AlgebraElement::term(bi(1, 0, 0), e(-par.hbar * par.mu));
        assert!(prod.max_abs_diff(&want) < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_element(&mut rng, 6, 3);
        assert_eq!(a.star(&AlgebraElement::one(), &par), a);
        assert_eq!(AlgebraElement::one().star(&a, &par), a);
    }

    #[test]
    fn involution_examples() {
        assert_eq!(AlgebraElement::one().involution(), AlgebraElement::one());
        let a = AlgebraElement::term(bi(1, 2, 3), c(2.0, 1.0));
        let want = AlgebraElement::term(bi(-1, -2, -3), c(2.0, -1.0));
        assert_eq!(a.involution(), want);
        // Pointwise: a^*(x, y, p) = conj(a(x, y, -p)).
        let par = p();
        for &(x, y) in &[(0.1, 0.2), (0.7, 0.35), (-1.3, 0.9)] {
            for pp in -3..=3 {
                let l = a.involution().evaluate(x, y, pp, &par);
                let r = a.evaluate(x, y, -pp, &par).conj();
                assert!((l - r).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn anti_homomorphism_on_random_pairs() {
        let par = p();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let a = AlgebraElement::basis(random_index(&mut rng, 4));
            let b = AlgebraElement::basis(random_index(&mut rng, 4));
            let l = a.star(&b, &par).involution();
            let r = b.involution().star(&a.involution(), &par);
            assert!(l.max_abs_diff(&r) < 1e-12);
        }
    }

    #[test]
    fn trace_and_gns() {
        let par = p();
        assert_eq!(AlgebraElement::one().trace(), ONE);
        assert_eq!(AlgebraElement::basis3(1, 2, 0).trace(), ZERO);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let a = random_element(&mut rng, 4, 2);
            let b = random_element(&mut rng, 4, 2);
            let d = a.star(&b, &par).trace() - b.star(&a, &par).trace();
            assert!(d.norm() < 1e-12);
            let g = a.gns_inner(&b) - b.involution().star(&a, &par).trace();
            assert!(g.norm() < 1e-12);
            let n2: f64 = a.iter().map(|(_, c)| c.norm_sqr()).sum();
            assert!((a.gns_inner(&a).re - n2).abs() < 1e-12);
        }
        for i in [bi(0, 0, 0), bi(1, 0, 2), bi(-1, 3, 0)] {
            for j in [bi(0, 0, 0), bi(1, 0, 2), bi(-1, 3, 0)] {
                let v = AlgebraElement::basis(i).gns_inner(&AlgebraElement::basis(j));
                assert_eq!(v, if i == j { ONE } else { ZERO });
            }
        }
    }

    #[test]
    fn evaluate_examples() {
        let par = p();
        let v = AlgebraElement::basis3(1, 0, 0).evaluate(0.25, 0.7, 0, &par);
        assert!((v - I).norm() < 1e-15);
        assert_eq!(AlgebraElement::basis3(0, 0, 1).evaluate(0.3, 0.2, 0, &par), ZERO);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = random_element(&mut rng, 6, 3);
            let (x, y) = (rng.gen_range(-2.0..2.0), rng.gen_range(0.0..1.0));
            let pp = rng.gen_range(-3..=3);
            let l = a.evaluate(x + 1.0, y, pp, &par);
            let r = e(par.cf() * pp as f64 * y) * a.evaluate(x, y, pp, &par);
            assert!((l - r).norm() < 1e-11);
        }
    }

    #[test]
    fn norm_111_examples() {
        assert!((AlgebraElement::basis3(2, -1, 3).norm_111(16) - 1.0).abs() < 1e-12);
        let a = AlgebraElement::one() + AlgebraElement::basis3(0, 0, 1);
        assert!((a.norm_111(16) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sawtooth_coefficients_match_quadrature() {
        // Midpoint rule on y e(-l y); the sawtooth is smooth inside (0, 1).
        let q = 200_000;
        for l in [-3i64, -1, 1, 2, 5] {
            let mut s = ZERO;
            for i in 0..q {
                let y = (i as f64 + 0.5) / q as f64;
                s += e(-(l as f64) * y) * y;
            }
            s /= q as f64;
            assert!((s - sawtooth_coefficient(l)).norm() < 1e-8);
            let want = -ONE / (I * TWO_PI * l as f64);
            assert!((sawtooth_coefficient(l) - want).norm() < 1e-15);
        }
    }

    #[test]
    fn derivation_examples() {
        let par = p();
        let w = Window::cube(8);
        let a = AlgebraElement::basis3(3, 5, -2);
        let d2 = a.derivation(2, Some(&w), &par).unwrap();
        assert!(d2.max_abs_diff(&a.scale(I * TWO_PI * 5.0)) < 1e-13);
        let a = AlgebraElement::basis3(4, 0, 0);
        let d1 = a.derivation(1, None, &par).unwrap();
        assert!(d1.max_abs_diff(&a.scale(I * TWO_PI * 4.0)) < 1e-13);
        for j in 1..=3 {
            assert!(AlgebraElement::one().derivation(j, None, &par).unwrap().is_zero());
        }
        let a = AlgebraElement::basis3(0, 0, 2);
        assert_eq!(a.derivation(1, None, &par), Err(Error::MissingWindow));
        let d3 = a.derivation(3, None, &par).unwrap();
        let want = a.scale(-I * TWO_PI * par.cf() * par.alpha * 2.0);
        assert!(d3.max_abs_diff(&want) < 1e-13);
    }

    #[test]
    fn derivations_are_star_derivations() {
        // delta_j(a^*) = delta_j(a)^* for all j.
        let par = p();
        let w = Window::cube(6);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let a = random_element(&mut rng, 5, 2);
            for j in 1..=3 {
                let l = a.involution().derivation(j, Some(&w), &par).unwrap();
                let r = a.derivation(j, Some(&w), &par).unwrap().involution();
                assert!(l.max_abs_diff(&r) < 1e-12, "j = {j}");
            }
        }
    }

    fn leibniz_defect(j: u8, a: &AlgebraElement, b: &AlgebraElement, w: &Window, par: &ModelParams) -> f64 {
        let ab = a.star(b, par);
        let lhs = ab.derivation(j, Some(w), par).unwrap();
        let rhs =
            a.derivation(j, Some(w), par).unwrap().star(b, par) + a.star(&b.derivation(j, Some(w), par).unwrap(), par);
        // Compare on the window where both sides are complete.
        lhs.restrict(w).max_abs_diff(&rhs.restrict(w))
    }

    #[test]
    fn leibniz_exact_cases() {
        let par = p();
        let w = Window::cube(10);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let a = random_element(&mut rng, 4, 2);
            let b = random_element(&mut rng, 4, 2);
            assert!(leibniz_defect(2, &a, &b, &w, &par) < 1e-10);
            assert!(leibniz_defect(3, &a, &b, &w, &par) < 1e-10);
            let a0 = a.iter().map(|(i, c)| (BasisIndex::new(i.m, i.n, 0), *c)).collect();
            let b0: AlgebraElement = b.iter().map(|(i, c)| (BasisIndex::new(i.m, i.n, 0), *c)).collect();
            assert!(leibniz_defect(1, &a0, &b0, &w, &par) < 1e-10);
        }
    }

    #[test]
    fn leibniz_delta1_tail_bound() {
        // With nu = 0 the star never shifts the n-index against a k-phase, so
        // the delta_1 defect is pure truncation tail: the coefficients dropped
        // at |n| > N have modulus <= c|k|/(N - r) per term.
        let par = ModelParams::new(1, 0.1, 2f64.sqrt(), 0.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for nw in [16u32, 32, 64] {
            let w = Window::new(8, nw, 8);
            let interior = Window::new(8, nw / 2, 8);
            for _ in 0..5 {
                let a = random_element(&mut rng, 3, 2);
                let b = random_element(&mut rng, 3, 2);
                let ab = a.star(&b, &par);
                let lhs = ab.derivation(1, Some(&w), &par).unwrap();
                let rhs = a.derivation(1, Some(&w), &par).unwrap().star(&b, &par)
                    + a.star(&b.derivation(1, Some(&w), &par).unwrap(), &par);
                let d = lhs.restrict(&interior).max_abs_diff(&rhs.restrict(&interior));
                let mass: f64 =
                    a.iter().map(|(_, c)| c.norm()).sum::<f64>() * b.iter().map(|(_, c)| c.norm()).sum::<f64>();
                let bound = 4.0 * par.cf() * mass * 4.0 / (nw as f64 / 2.0 - 4.0);
                assert!(d <= bound, "N = {nw}: defect {d} > {bound}");
            }
        }
    }

    #[test]
    fn diagonal_bracket_vanishes_on_k0() {
        let par = p();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a: AlgebraElement =
            random_element(&mut rng, 6, 3).iter().map(|(i, c)| (BasisIndex::new(i.m, i.n, 0), *c)).collect();
        let d12 = a.derivation(2, None, &par).unwrap().derivation(1, None, &par).unwrap();
        let d21 = a.derivation(1, None, &par).unwrap().derivation(2, None, &par).unwrap();
        assert!((d12 - d21).is_zero());
        assert!(a.derivation(3, None, &par).unwrap().is_zero());
    }

    #[test]
    fn heisenberg_action_examples() {
        let par = p();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = random_element(&mut rng, 5, 2);
        for _ in 0..5 {
            let (x, y, pp) = (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(-2..=2));
            let v = heisenberg_action(0.0, 0.0, 0.0, &a, x, y, pp, &par);
            assert!((v - a.evaluate(x, y, pp, &par)).norm() < 1e-14);
            let t = rng.gen_range(0.0..1.0);
            let b = AlgebraElement::basis3(1, -2, 2);
            let v = heisenberg_action(0.0, 0.0, t, &b, x, y, 2, &par);
            assert!((v - e(2.0 * t) * b.evaluate(x, y, 2, &par)).norm() < 1e-13);
        }
        // The trace is invariant under the action.
        let g = 256;
        for _ in 0..5 {
            let (r, s, t) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let mut q = ZERO;
            for ix in 0..g {
                for iy in 0..g {
                    let (x, y) = (ix as f64 / g as f64, iy as f64 / g as f64);
                    q += heisenberg_action(r, s, t, &a, x, y, 0, &par);
                }
            }
            q /= (g * g) as f64;
            assert!((q - a.trace()).norm() < 1e-8);
        }
    }

    fn arb_element() -> impl Strategy<Value = AlgebraElement> {
        proptest::collection::vec(((-2i64..=2, -2i64..=2, -2i64..=2), (-1.0f64..1.0, -1.0f64..1.0)), 0..5)
            .prop_map(|v| v.into_iter().map(|((m, n, k), (re, im))| (BasisIndex::new(m, n, k), c(re, im))).collect())
    }

    proptest! {
        #[test]
        fn prop_associative(a in arb_element(), b in arb_element(), d in arb_element()) {
            let par = p();
            let l = a.star(&b, &par).star(&d, &par);
            let r = a.star(&b.star(&d, &par), &par);
            prop_assert!(l.max_abs_diff(&r) < 1e-12);
        }

        #[test]
        fn prop_involution(a in arb_element(), b in arb_element()) {
            let par = p();
            prop_assert_eq!(a.involution().involution(), a.clone());
            let l = a.star(&b, &par).involution();
            let r = b.involution().star(&a.involution(), &par);
            prop_assert!(l.max_abs_diff(&r) < 1e-12);
        }

        #[test]
        fn prop_faithful_trace(a in arb_element()) {
            let par = p();
            let t = a.involution().star(&a, &par).trace();
            let n2: f64 = a.iter().map(|(_, c)| c.norm_sqr()).sum();
            prop_assert!((t.re - n2).abs() < 1e-12 && t.im.abs() < 1e-12);
            prop_assert!(a.is_zero() || t.re > 0.0);
        }

        #[test]
        fn prop_k0_commutative(a in arb_element(), b in arb_element()) {
            let par = p();
            let flat = |x: &AlgebraElement| -> AlgebraElement {
                x.iter().map(|(i, c)| (BasisIndex::new(i.m, i.n, 0), *c)).collect()
            };
            let (a, b) = (flat(&a), flat(&b));
            prop_assert_eq!(a.star(&b, &par), b.star(&a, &par));
        }
    }
}
