use core::ops::{Add, Neg, Sub};

use crate::{Error, Result};

/// Parameters of the quantum Heisenberg manifold and of its Dirac operator.
///
/// `c` is the positive integer of the lattice `H_c`, `(hbar, mu, nu)` the
/// deformation data and `alpha > 1` the weight of the central direction in
/// the Dirac operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub c: u32,
    pub hbar: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(c: u32, hbar: f64, mu: f64, nu: f64, alpha: f64) -> Result<Self> {
        let p = ModelParams { c, hbar, mu, nu, alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.c == 0 {
            return Err(Error::InvalidParams("c must be a positive integer".into()));
        }
        if !(self.hbar.is_finite() && self.mu.is_finite() && self.nu.is_finite()) {
            return Err(Error::InvalidParams("hbar, mu, nu must be finite".into()));
        }
        if self.mu * self.mu + self.nu * self.nu == 0.0 {
            return Err(Error::InvalidParams("mu^2 + nu^2 must be nonzero".into()));
        }
        if !(self.alpha.is_finite() && self.alpha > 1.0) {
            return Err(Error::InvalidParams("alpha must be greater than one".into()));
        }
        Ok(())
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        ModelParams { alpha, ..*self }
    }

    /// `c` as a float, for phase arithmetic.
    #[inline]
    pub fn cf(&self) -> f64 {
        self.c as f64
    }
}

impl Default for ModelParams {
    /// `c = 1`, `hbar = 0.1`, `mu = sqrt 2`, `nu = sqrt 3`, `alpha = 2`.
    /// `{1, hbar mu, hbar nu}` is rationally independent.
    fn default() -> Self {
        ModelParams { c: 1, hbar: 0.1, mu: core::f64::consts::SQRT_2, nu: 1.732_050_807_568_877_2, alpha: 2.0 }
    }
}

/// Index `(m, n, k)` of the basis function `e(cxyp) e(mx + ny) delta_{kp}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BasisIndex {
    pub m: i64,
    pub n: i64,
    pub k: i64,
}

impl BasisIndex {
    pub const ZERO: BasisIndex = BasisIndex { m: 0, n: 0, k: 0 };

    #[inline]
    pub const fn new(m: i64, n: i64, k: i64) -> Self {
        BasisIndex { m, n, k }
    }

    /// Chebyshev radius `max(|m|, |n|, |k|)`.
    pub fn radius(&self) -> i64 {
        self.m.abs().max(self.n.abs()).max(self.k.abs())
    }
}

impl Add for BasisIndex {
    type Output = BasisIndex;
    fn add(self, o: BasisIndex) -> BasisIndex {
        BasisIndex::new(self.m + o.m, self.n + o.n, self.k + o.k)
    }
}

impl Sub for BasisIndex {
    type Output = BasisIndex;
    fn sub(self, o: BasisIndex) -> BasisIndex {
        BasisIndex::new(self.m - o.m, self.n - o.n, self.k - o.k)
    }
}

impl Neg for BasisIndex {
    type Output = BasisIndex;
    fn neg(self) -> BasisIndex {
        BasisIndex::new(-self.m, -self.n, -self.k)
    }
}

/// Truncation `|m| <= m_max, |n| <= n_max, |k| <= k_max` of the basis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub m_max: u32,
    pub n_max: u32,
    pub k_max: u32,
}

impl Window {
    pub const fn new(m_max: u32, n_max: u32, k_max: u32) -> Self {
        Window { m_max, n_max, k_max }
    }

    pub const fn cube(r: u32) -> Self {
        Window::new(r, r, r)
    }

    pub fn contains(&self, idx: &BasisIndex) -> bool {
        idx.m.unsigned_abs() <= self.m_max as u64
            && idx.n.unsigned_abs() <= self.n_max as u64
            && idx.k.unsigned_abs() <= self.k_max as u64
    }

    /// Window shrunk by `margin` in every direction (saturating at zero).
    pub fn shrink(&self, margin: u32) -> Window {
        Window::new(
            self.m_max.saturating_sub(margin),
            self.n_max.saturating_sub(margin),
            self.k_max.saturating_sub(margin),
        )
    }

    pub fn m_len(&self) -> usize {
        2 * self.m_max as usize + 1
    }

    pub fn n_len(&self) -> usize {
        2 * self.n_max as usize + 1
    }

    pub fn k_len(&self) -> usize {
        2 * self.k_max as usize + 1
    }

    pub fn len(&self) -> usize {
        self.m_len() * self.n_len() * self.k_len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of `idx` in the `(m, n, k)` lexicographic enumeration.
    pub fn position(&self, idx: &BasisIndex) -> Option<usize> {
        if !self.contains(idx) {
            return None;
        }
        let im = (idx.m + self.m_max as i64) as usize;
        let in_ = (idx.n + self.n_max as i64) as usize;
        let ik = (idx.k + self.k_max as i64) as usize;
        Some((im * self.n_len() + in_) * self.k_len() + ik)
    }

    pub fn index_at(&self, pos: usize) -> BasisIndex {
        let ik = pos % self.k_len();
        let rest = pos / self.k_len();
        let in_ = rest % self.n_len();
        let im = rest / self.n_len();
        BasisIndex::new(im as i64 - self.m_max as i64, in_ as i64 - self.n_max as i64, ik as i64 - self.k_max as i64)
    }

    pub fn indices(&self) -> impl Iterator<Item = BasisIndex> + '_ {
        (0..self.len()).map(move |p| self.index_at(p))
    }

    /// `(m, k)` block keys in lexicographic order.
    pub fn block_keys(&self) -> impl Iterator<Item = (i64, i64)> {
        let (mm, kk) = (self.m_max as i64, self.k_max as i64);
        (-mm..=mm).flat_map(move |m| (-kk..=kk).map(move |k| (m, k)))
    }

    pub fn n_range(&self) -> core::ops::RangeInclusive<i64> {
        -(self.n_max as i64)..=(self.n_max as i64)
    }
}
