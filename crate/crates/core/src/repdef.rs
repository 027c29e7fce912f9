//! The defining representation on sampled wavefunctions and the Weaver
//! operators, used as independent oracles for [`crate::algebra`].
//!
//! `(pi(a) xi)(x, y, p) = sum_q a(x - hbar (q - 2p) mu, y - hbar (q - 2p) nu, q) xi(x, y, p - q)`.
//!
//! Only the element is evaluated off-grid (exactly, through
//! [`AlgebraElement::evaluate`]); `xi` is always read at grid points except for
//! the irrational shift of `X_r`, which uses trigonometric interpolation.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::algebra::AlgebraElement;
use crate::math::{e, sqrt, ZERO};
use crate::{Error, ModelParams, Result};

/// Samples of `xi` on `[-L, L) x [0, 1) x [-P..P]`, row-major in `(x, y, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub l: u32,
    pub gx: usize,
    pub gy: usize,
    pub p_max: u32,
    pub samples: Vec<Complex64>,
}

impl GridState {
    pub fn zeros(l: u32, gx: usize, gy: usize, p_max: u32) -> Result<Self> {
        if l == 0 || gx < 4 || gy < 4 {
            return Err(Error::InvalidParams("grid needs L >= 1 and at least 4 points per axis".into()));
        }
        let np = 2 * p_max as usize + 1;
        Ok(GridState { l, gx, gy, p_max, samples: vec![ZERO; gx * gy * np] })
    }

    pub fn from_fn<F: Fn(f64, f64, i64) -> Complex64>(l: u32, gx: usize, gy: usize, p_max: u32, f: F) -> Result<Self> {
        let mut s = GridState::zeros(l, gx, gy, p_max)?;
        for ix in 0..gx {
            for iy in 0..gy {
                for p in s.p_range() {
                    let v = f(s.x(ix), s.y(iy), p);
                    s.set(ix, iy, p, v);
                }
            }
        }
        Ok(s)
    }

    pub fn same_shape(&self) -> GridState {
        GridState { samples: vec![ZERO; self.samples.len()], ..*self }
    }

    pub fn np(&self) -> usize {
        2 * self.p_max as usize + 1
    }

    pub fn p_range(&self) -> core::ops::RangeInclusive<i64> {
        -(self.p_max as i64)..=(self.p_max as i64)
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.l as f64 / self.gx as f64
    }

    pub fn dy(&self) -> f64 {
        1.0 / self.gy as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        -(self.l as f64) + ix as f64 * self.dx()
    }

    pub fn y(&self, iy: usize) -> f64 {
        iy as f64 * self.dy()
    }

    #[inline]
    fn offset(&self, ix: usize, iy: usize, p: i64) -> usize {
        (ix * self.gy + iy) * self.np() + (p + self.p_max as i64) as usize
    }

    /// Zero outside the `p` range.
    pub fn get(&self, ix: usize, iy: usize, p: i64) -> Complex64 {
        if p.unsigned_abs() > self.p_max as u64 {
            return ZERO;
        }
        self.samples[self.offset(ix, iy, p)]
    }

    pub fn set(&mut self, ix: usize, iy: usize, p: i64, v: Complex64) {
        let o = self.offset(ix, iy, p);
        self.samples[o] = v;
    }

    /// Grid inner product, linear in `self`.
    pub fn inner(&self, other: &GridState) -> Complex64 {
        let s: Complex64 = self.samples.iter().zip(&other.samples).map(|(a, b)| a * b.conj()).sum();
        s * self.dx() * self.dy()
    }

    /// `L^2` norm as a scaled Frobenius norm.
    pub fn norm(&self) -> f64 {
        let s: f64 = self.samples.iter().map(|a| a.norm_sqr()).sum();
        sqrt(s * self.dx() * self.dy())
    }

    pub fn diff_norm(&self, other: &GridState) -> f64 {
        let s: f64 = self.samples.iter().zip(&other.samples).map(|(a, b)| (a - b).norm_sqr()).sum();
        sqrt(s * self.dx() * self.dy())
    }

    pub fn scale(&mut self, s: Complex64) {
        for v in &mut self.samples {
            *v *= s;
        }
    }

    /// Indices `p` carrying nonzero samples.
    fn occupied_p(&self) -> Vec<i64> {
        self.p_range().filter(|&p| (0..self.gx).any(|ix| (0..self.gy).any(|iy| self.get(ix, iy, p) != ZERO))).collect()
    }

    /// Largest `|x|` with a nonzero sample (or `-L` if the state vanishes).
    fn x_extent(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for ix in 0..self.gx {
            let nz = (0..self.gy).any(|iy| self.p_range().any(|p| self.get(ix, iy, p) != ZERO));
            if nz {
                lo = lo.min(self.x(ix));
                hi = hi.max(self.x(ix));
            }
        }
        (lo, hi)
    }
}

fn check_p_reach(a: &AlgebraElement, xi: &GridState) -> Result<()> {
    let ks = k_values(a);
    for p in xi.occupied_p() {
        for &q in &ks {
            if (p + q).unsigned_abs() > xi.p_max as u64 {
                return Err(Error::WindowOverflow { p: p + q, bound: xi.p_max as i64 });
            }
        }
    }
    Ok(())
}

fn kernel(a: &AlgebraElement, x: f64, y: f64, p: i64, q: i64, params: &ModelParams) -> Complex64 {
    let s = params.hbar * (q - 2 * p) as f64;
    a.evaluate(x - s * params.mu, y - s * params.nu, q, params)
}

fn k_values(a: &AlgebraElement) -> Vec<i64> {
    let mut ks: Vec<i64> = a.support().map(|i| i.k).collect();
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// `pi(a) xi`.
pub fn pi_apply(a: &AlgebraElement, xi: &GridState, params: &ModelParams) -> Result<GridState> {
    check_p_reach(a, xi)?;
    Ok(pi_compressed(a, xi, params))
}

/// `P pi(a) P xi` with `P` the projection onto the grid's `p` range; no
/// overflow check.
pub fn pi_compressed(a: &AlgebraElement, xi: &GridState, params: &ModelParams) -> GridState {
    let ks = k_values(a);
    let mut out = xi.same_shape();
    for ix in 0..xi.gx {
        let x = xi.x(ix);
        for iy in 0..xi.gy {
            let y = xi.y(iy);
            for p in xi.p_range() {
                let mut s = ZERO;
                for &q in &ks {
                    let v = xi.get(ix, iy, p - q);
                    if v != ZERO {
                        s += kernel(a, x, y, p, q, params) * v;
                    }
                }
                out.set(ix, iy, p, s);
            }
        }
    }
    out
}

/// `pi(a)^dagger xi` through the conjugated kernel.
pub fn pi_adjoint_apply(a: &AlgebraElement, xi: &GridState, params: &ModelParams) -> Result<GridState> {
    check_p_reach(&a.involution(), xi)?;
    Ok(pi_adjoint_compressed(a, xi, params))
}

/// `P pi(a)^dagger P xi`.
pub fn pi_adjoint_compressed(a: &AlgebraElement, xi: &GridState, params: &ModelParams) -> GridState {
    let ks = k_values(a);
    let mut out = xi.same_shape();
    for ix in 0..xi.gx {
        let x = xi.x(ix);
        for iy in 0..xi.gy {
            let y = xi.y(iy);
            for p in xi.p_range() {
                let mut s = ZERO;
                for &q in &ks {
                    let v = xi.get(ix, iy, p + q);
                    if v != ZERO {
                        s += kernel(a, x, y, p + q, q, params).conj() * v;
                    }
                }
                out.set(ix, iy, p, s);
            }
        }
    }
    out
}

/// `||pi(a * b) xi - pi(a) pi(b) xi|| / ||xi||`.
pub fn check_homomorphism(a: &AlgebraElement, b: &AlgebraElement, xi: &GridState, params: &ModelParams) -> Result<f64> {
    let lhs = pi_apply(&a.star(b, params), xi, params)?;
    let rhs = pi_apply(a, &pi_apply(b, xi, params)?, params)?;
    Ok(lhs.diff_norm(&rhs) / xi.norm())
}

/// Operator-norm estimate of `pi(a)` by power iteration on the `p`-compressed
/// `pi(a)^dagger pi(a)`. Compression never increases the norm, so the
/// estimate is a lower bound for `||pi(a)||` up to the grid sampling.
pub fn operator_norm_estimate(a: &AlgebraElement, start: &GridState, iterations: usize, params: &ModelParams) -> f64 {
    let mut v = start.clone();
    let n0 = v.norm();
    if n0 == 0.0 {
        return 0.0;
    }
    v.scale(Complex64::new(1.0 / n0, 0.0));
    let mut est = 0.0;
    for _ in 0..iterations {
        let w = pi_compressed(a, &v, params);
        est = w.norm();
        let mut u = pi_adjoint_compressed(a, &w, params);
        let nu = u.norm();
        if nu == 0.0 {
            return est;
        }
        u.scale(Complex64::new(1.0 / nu, 0.0));
        v = u;
    }
    est.max(pi_compressed(a, &v, params).norm())
}

/// Bounded functions `f(x, y)` used for `V_f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VFunction {
    /// `e(a x + b y + q x^2)`.
    PolynomialPhase { a: f64, b: f64, q: f64 },
    /// Indicator of `[x0, x1) x [y0, y1)`.
    Indicator { x0: f64, x1: f64, y0: f64, y1: f64 },
}

impl VFunction {
    pub fn eval(&self, x: f64, y: f64) -> Complex64 {
        match *self {
            VFunction::PolynomialPhase { a, b, q } => e(a * x + b * y + q * x * x),
            VFunction::Indicator { x0, x1, y0, y1 } => {
                if x >= x0 && x < x1 && y >= y0 && y < y1 {
                    Complex64::new(1.0, 0.0)
                } else {
                    ZERO
                }
            }
        }
    }
}

/// Generators of the commutant of `pi(A)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeaverOp {
    V(VFunction),
    /// `(W_k xi)(x, y, p) = e(-ck (p^2 hbar nu + p y)) xi(x + k, y, p)`.
    W(i64),
    /// `(X_r xi)(x, y, p) = xi(x - 2 hbar r mu, y - 2 hbar r nu, p + r)`.
    X(i64),
}

fn w_phase(k: i64, p: i64, y: f64, params: &ModelParams) -> Complex64 {
    let (kf, pf) = (k as f64, p as f64);
    e(-params.cf() * kf * (pf * pf * params.hbar * params.nu + pf * y))
}

fn apply_w(k: i64, xi: &GridState, params: &ModelParams) -> Result<GridState> {
    let per_unit = xi.gx / (2 * xi.l as usize);
    if per_unit * 2 * xi.l as usize != xi.gx {
        return Err(Error::InvalidParams("W_k needs an integer number of x-samples per unit".into()));
    }
    let (lo, hi) = xi.x_extent();
    let kf = k.unsigned_abs() as f64;
    if lo.is_finite() && (lo < -(xi.l as f64) + kf || hi >= xi.l as f64 - kf) {
        return Err(Error::SupportViolation(alloc::format!(
            "state occupies x in [{lo}, {hi}], shift by {k} leaves [-{}, {})",
            xi.l,
            xi.l
        )));
    }
    let shift = k * per_unit as i64;
    let mut out = xi.same_shape();
    for ix in 0..xi.gx {
        let src = ix as i64 + shift;
        if src < 0 || src >= xi.gx as i64 {
            continue;
        }
        for iy in 0..xi.gy {
            let y = xi.y(iy);
            for p in xi.p_range() {
                let v = xi.get(src as usize, iy, p);
                if v != ZERO {
                    out.set(ix, iy, p, w_phase(k, p, y, params) * v);
                }
            }
        }
    }
    Ok(out)
}

/// Signed DFT frequency of bin `j` on `g` points; the Nyquist bin maps to 0
/// weight in the interpolants below.
fn freq(j: usize, g: usize) -> Option<i64> {
    let j = j as i64;
    let g = g as i64;
    if 2 * j == g {
        None
    } else if 2 * j < g {
        Some(j)
    } else {
        Some(j - g)
    }
}

/// Two-dimensional DFT coefficients of each `p`-slice, normalized so that the
/// state is `sum_{fx, fy} c e(fx (x + L) / (2L) + fy y)`.
struct Spectrum {
    coeffs: Vec<Complex64>,
    gx: usize,
    gy: usize,
    np: usize,
}

impl Spectrum {
    fn of(xi: &GridState) -> Spectrum {
        let (gx, gy, np) = (xi.gx, xi.gy, xi.np());
        // Separable transform: y first, then x.
        let mut tmp = vec![ZERO; gx * gy * np];
        for ix in 0..gx {
            for jy in 0..gy {
                for ip in 0..np {
                    let mut s = ZERO;
                    for iy in 0..gy {
                        s += xi.samples[(ix * gy + iy) * np + ip] * e(-((jy * iy) as f64) / gy as f64);
                    }
                    tmp[(ix * gy + jy) * np + ip] = s;
                }
            }
        }
        let mut coeffs = vec![ZERO; gx * gy * np];
        let norm = 1.0 / (gx * gy) as f64;
        for jx in 0..gx {
            for jy in 0..gy {
                for ip in 0..np {
                    let mut s = ZERO;
                    for ix in 0..gx {
                        s += tmp[(ix * gy + jy) * np + ip] * e(-((jx * ix) as f64) / gx as f64);
                    }
                    coeffs[(jx * gy + jy) * np + ip] = s * norm;
                }
            }
        }
        Spectrum { coeffs, gx, gy, np }
    }

    /// Trigonometric interpolant of slice `ip` at an arbitrary point.
    fn eval(&self, xi: &GridState, x: f64, y: f64, ip: usize) -> Complex64 {
        let ux = (x + xi.l as f64) / (2.0 * xi.l as f64);
        let mut s = ZERO;
        for jx in 0..self.gx {
            let Some(fx) = freq(jx, self.gx) else { continue };
            let ex = e(fx as f64 * ux);
            for jy in 0..self.gy {
                let Some(fy) = freq(jy, self.gy) else { continue };
                let c = self.coeffs[(jx * self.gy + jy) * self.np + ip];
                if c != ZERO {
                    s += c * ex * e(fy as f64 * y);
                }
            }
        }
        s
    }

    /// The whole grid translated by `(sx, sy)`: samples of `xi(x - sx, y - sy)`.
    fn translated(&self, xi: &GridState, sx: f64, sy: f64) -> GridState {
        let mut shifted = self.coeffs.clone();
        for jx in 0..self.gx {
            for jy in 0..self.gy {
                let ph = match (freq(jx, self.gx), freq(jy, self.gy)) {
                    (Some(fx), Some(fy)) => e(-(fx as f64 * sx / (2.0 * xi.l as f64) + fy as f64 * sy)),
                    _ => ZERO,
                };
                for ip in 0..self.np {
                    shifted[(jx * self.gy + jy) * self.np + ip] *= ph;
                }
            }
        }
        // Inverse transform.
        let (gx, gy, np) = (self.gx, self.gy, self.np);
        let mut tmp = vec![ZERO; gx * gy * np];
        for ix in 0..gx {
            for jy in 0..gy {
                for ip in 0..np {
                    let mut s = ZERO;
                    for jx in 0..gx {
                        s += shifted[(jx * gy + jy) * np + ip] * e((jx * ix) as f64 / gx as f64);
                    }
                    tmp[(ix * gy + jy) * np + ip] = s;
                }
            }
        }
        let mut out = xi.same_shape();
        for ix in 0..gx {
            for iy in 0..gy {
                for ip in 0..np {
                    let mut s = ZERO;
                    for jy in 0..gy {
                        s += tmp[(ix * gy + jy) * np + ip] * e((jy * iy) as f64 / gy as f64);
                    }
                    out.samples[(ix * gy + iy) * np + ip] = s;
                }
            }
        }
        out
    }
}

fn x_shift(r: i64, params: &ModelParams) -> (f64, f64) {
    let rf = r as f64;
    (2.0 * params.hbar * rf * params.mu, 2.0 * params.hbar * rf * params.nu)
}

fn check_x_reach(r: i64, xi: &GridState) -> Result<()> {
    for p in xi.occupied_p() {
        if (p - r).unsigned_abs() > xi.p_max as u64 {
            return Err(Error::SupportViolation(alloc::format!(
                "X_{r} moves p = {p} outside [-{}, {}]",
                xi.p_max,
                xi.p_max
            )));
        }
    }
    Ok(())
}

/// `X_r xi` via spectral translation of each slice.
fn apply_x(r: i64, xi: &GridState, params: &ModelParams) -> Result<GridState> {
    check_x_reach(r, xi)?;
    let (sx, sy) = x_shift(r, params);
    let moved = Spectrum::of(xi).translated(xi, sx, sy);
    let mut out = xi.same_shape();
    for ix in 0..xi.gx {
        for iy in 0..xi.gy {
            for p in xi.p_range() {
                out.set(ix, iy, p, moved.get(ix, iy, p + r));
            }
        }
    }
    Ok(out)
}

/// Applies a Weaver operator to a grid state.
pub fn weaver_apply(w: &WeaverOp, xi: &GridState, params: &ModelParams) -> Result<GridState> {
    match w {
        WeaverOp::V(f) => {
            let mut out = xi.clone();
            for ix in 0..xi.gx {
                for iy in 0..xi.gy {
                    let fv = f.eval(xi.x(ix), xi.y(iy));
                    for p in xi.p_range() {
                        out.set(ix, iy, p, fv * xi.get(ix, iy, p));
                    }
                }
            }
            Ok(out)
        }
        WeaverOp::W(k) => apply_w(*k, xi, params),
        WeaverOp::X(r) => apply_x(*r, xi, params),
    }
}

/// `||[pi(a), w] xi|| / ||xi||`.
///
/// For `X_r` the composite `X_r pi(a) xi` is evaluated pointwise: `pi(a) xi` at
/// the translated point, with the element evaluated exactly and `xi` through
/// its trigonometric interpolant. The other side uses the spectrally
/// translated grid, so the two sides share no interpolation code path.
pub fn weaver_commutator_norm(a: &AlgebraElement, w: &WeaverOp, xi: &GridState, params: &ModelParams) -> Result<f64> {
    let n = xi.norm();
    let lhs = pi_apply(a, &weaver_apply(w, xi, params)?, params)?;
    let rhs = match w {
        WeaverOp::X(r) => {
            check_x_reach(*r, xi)?;
            check_p_reach(a, xi)?;
            let (sx, sy) = x_shift(*r, params);
            let spec = Spectrum::of(xi);
            let ks = k_values(a);
            let mut out = xi.same_shape();
            for ix in 0..xi.gx {
                for iy in 0..xi.gy {
                    let (x0, y0) = (xi.x(ix) - sx, xi.y(iy) - sy);
                    for p in xi.p_range() {
                        let pp = p + r;
                        let mut s = ZERO;
                        for &q in &ks {
                            let src = pp - q;
                            if src.unsigned_abs() > xi.p_max as u64 {
                                continue;
                            }
                            let ip = (src + xi.p_max as i64) as usize;
                            s += kernel(a, x0, y0, pp, q, params) * spec.eval(xi, x0, y0, ip);
                        }
                        out.set(ix, iy, p, s);
                    }
                }
            }
            out
        }
        _ => weaver_apply(w, &pi_apply(a, xi, params)?, params)?,
    };
    Ok(lhs.diff_norm(&rhs) / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{c, exp, ONE};
    use crate::BasisIndex;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn par() -> ModelParams {
        ModelParams::default()
    }

    fn gaussian_state(rng: &mut ChaCha8Rng, l: u32, gx: usize, gy: usize, p_max: u32, p_occ: i64) -> GridState {
        let coeffs: Vec<(f64, f64, f64)> = (0..=2 * p_occ)
            .map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0), rng.gen_range(0.0..1.0)))
            .collect();
        GridState::from_fn(l, gx, gy, p_max, |x, y, p| {
            if p.abs() > p_occ {
                return ZERO;
            }
            let (a, w, ph) = coeffs[(p + p_occ) as usize];
            c(a, 0.3) * exp(-w * x * x) * e(y + ph) + c(0.2, -0.1) * e(-2.0 * y)
        })
        .unwrap()
    }

    fn random_basis(rng: &mut ChaCha8Rng) -> AlgebraElement {
        AlgebraElement::basis3(rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-2..=2))
    }

    #[test]
    fn identity_acts_trivially() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xi = gaussian_state(&mut rng, 3, 24, 8, 3, 2);
        let out = pi_apply(&AlgebraElement::one(), &xi, &par()).unwrap();
        assert_eq!(out, xi);
    }

    #[test]
    fn spot_values_of_phi_010() {
        // pi(phi_{0,1,0}) xi (x, y, p) = e(y + 2 hbar p nu) xi(x, y, p).
        let pr = par();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xi = gaussian_state(&mut rng, 2, 16, 8, 2, 2);
        let out = pi_apply(&AlgebraElement::basis3(0, 1, 0), &xi, &pr).unwrap();
        for &(ix, iy, p) in &[(0usize, 0usize, 0i64), (3, 5, 1), (8, 2, -2), (15, 7, 2), (10, 1, -1)] {
            let want = e(xi.y(iy) + 2.0 * pr.hbar * p as f64 * pr.nu) * xi.get(ix, iy, p);
            assert!((out.get(ix, iy, p) - want).norm() < 1e-13);
        }
    }

    #[test]
    fn homomorphism_on_random_pairs() {
        let pr = par();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let xi = gaussian_state(&mut rng, 2, 16, 8, 6, 2);
        for _ in 0..50 {
            let (a, b) = (random_basis(&mut rng), random_basis(&mut rng));
            assert!(check_homomorphism(&a, &b, &xi, &pr).unwrap() < 1e-9);
        }
        let a = AlgebraElement::basis3(1, -1, 0);
        let b = AlgebraElement::basis3(2, 2, 0);
        assert!(check_homomorphism(&a, &b, &xi, &pr).unwrap() < 1e-12);
        let one = AlgebraElement::one();
        assert_eq!(check_homomorphism(&one, &one, &xi, &pr).unwrap(), 0.0);
    }

    #[test]
    fn overflow_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let xi = gaussian_state(&mut rng, 2, 8, 4, 2, 2);
        let r = pi_apply(&AlgebraElement::basis3(0, 0, 1), &xi, &par());
        assert!(matches!(r, Err(Error::WindowOverflow { .. })));
    }

    #[test]
    fn adjoint_matches_involution() {
        let pr = par();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let xi = gaussian_state(&mut rng, 2, 16, 8, 5, 2);
        for _ in 0..10 {
            let a = random_basis(&mut rng) + random_basis(&mut rng).scale(c(0.0, 0.5));
            let l = pi_apply(&a.involution(), &xi, &pr).unwrap();
            let r = pi_adjoint_apply(&a, &xi, &pr).unwrap();
            assert!(l.diff_norm(&r) / xi.norm() < 1e-12);
            // <pi(a) xi, eta> = <xi, pi(a)^dagger eta>
            let eta = gaussian_state(&mut rng, 2, 16, 8, 5, 2);
            let lhs = pi_apply(&a, &xi, &pr).unwrap().inner(&eta);
            let rhs = xi.inner(&pi_adjoint_apply(&a, &eta, &pr).unwrap());
            assert!((lhs - rhs).norm() < 1e-10);
        }
    }

    #[test]
    fn young_bound_and_faithfulness() {
        let pr = par();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let a: AlgebraElement = (0..3)
                .map(|_| {
                    (
                        BasisIndex::new(rng.gen_range(-2..=2), rng.gen_range(-2..=2), rng.gen_range(-1..=1)),
                        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    )
                })
                .collect();
            let xi = gaussian_state(&mut rng, 2, 16, 8, 8, 2);
            let est = operator_norm_estimate(&a, &xi, 30, &pr);
            let bound = a.norm_111(128);
            assert!(est <= bound + 1e-6, "{est} > {bound}");
            let nrm = a.norm_l2();
            if nrm > 0.0 {
                let unit = a.scale_re(1.0 / nrm);
                let best = (0..10)
                    .map(|_| {
                        let s = gaussian_state(&mut rng, 2, 16, 8, 8, 2);
                        pi_apply(&unit, &s, &pr).unwrap().norm() / s.norm()
                    })
                    .fold(0.0, f64::max);
                assert!(best >= 1e-3);
            }
        }
    }

    #[test]
    fn v_f_commutes() {
        let pr = par();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let xi = gaussian_state(&mut rng, 2, 16, 8, 5, 2);
        let fs = [
            VFunction::PolynomialPhase { a: 0.3, b: 2.0, q: 0.7 },
            VFunction::Indicator { x0: -0.5, x1: 1.0, y0: 0.2, y1: 0.6 },
        ];
        for f in fs {
            let a = random_basis(&mut rng);
            let r = weaver_commutator_norm(&a, &WeaverOp::V(f), &xi, &pr).unwrap();
            assert!(r <= 1e-12);
        }
    }

    #[test]
    fn w_k_commutes() {
        let pr = par();
        // Compactly supported in x: the Gaussian is cut at |x| <= 1.5.
        let xi = GridState::from_fn(4, 64, 8, 4, |x, y, p| {
            if x.abs() <= 1.5 && p.abs() <= 1 {
                c(1.0, 0.5 * p as f64) * exp(-x * x) * e(y)
            } else {
                ZERO
            }
        })
        .unwrap();
        let a = AlgebraElement::basis3(1, 1, 1);
        for k in [1, -1, 2] {
            let r = weaver_commutator_norm(&a, &WeaverOp::W(k), &xi, &pr).unwrap();
            assert!(r <= 1e-9, "W_{k}: {r}");
        }
        let wide = GridState::from_fn(2, 16, 4, 2, |_, _, _| ONE).unwrap();
        assert!(matches!(weaver_commutator_norm(&a, &WeaverOp::W(1), &wide, &pr), Err(Error::SupportViolation(_))));
    }

    #[test]
    fn x_r_commutes() {
        let pr = par();
        // Band-limited in x over [-L, L) and in y.
        let xi = GridState::from_fn(2, 16, 8, 4, |x, y, p| {
            if p.abs() > 1 {
                return ZERO;
            }
            let u = x / 4.0;
            e(u) * c(1.0, 0.2) + e(-2.0 * u + y) * 0.5 + e(3.0 * u - 2.0 * y) * c(0.0, 0.3 * p as f64)
        })
        .unwrap();
        for (a, r) in [
            (AlgebraElement::basis3(0, 0, 1), 1),
            (AlgebraElement::basis3(1, -1, 1), -1),
            (AlgebraElement::basis3(2, 1, 0), 1),
        ] {
            let res = weaver_commutator_norm(&a, &WeaverOp::X(r), &xi, &pr).unwrap();
            assert!(res <= 1e-7, "X_{r}: {res}");
        }
    }

    #[test]
    fn spectral_translation_matches_pointwise_interpolation() {
        let pr = par();
        let xi = GridState::from_fn(2, 16, 8, 1, |x, y, _| e(x / 4.0 + y) + e(-x / 2.0) * 0.5).unwrap();
        let spec = Spectrum::of(&xi);
        let (sx, sy) = x_shift(1, &pr);
        let moved = spec.translated(&xi, sx, sy);
        for ix in 0..xi.gx {
            for iy in 0..xi.gy {
                let want = e((xi.x(ix) - sx) / 4.0 + xi.y(iy) - sy) + e(-(xi.x(ix) - sx) / 2.0) * 0.5;
                assert!((moved.get(ix, iy, 0) - want).norm() < 1e-12);
                assert!((spec.eval(&xi, xi.x(ix) - sx, xi.y(iy) - sy, 1) - want).norm() < 1e-12);
            }
        }
    }
}
