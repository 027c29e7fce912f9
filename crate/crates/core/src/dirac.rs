//! Truncated Dirac operators and their spectral analysis.
//!
//! On the GNS space `L^2(A) (x) C^2` with basis `phi_{m,n,k} (x) e_s`,
//! `D' = 2 pi (M_m + t c M_{yp}) (x) sigma_1 + 2 pi M_n (x) sigma_2 - 2 pi c alpha M_p (x) sigma_3`.
//! `M_{yp}` multiplies by `y` on the `n` index only (the Toeplitz matrix `Y`),
//! so `D'` splits into independent blocks indexed by `(m, k)`, each of size
//! `2 (2N + 1)` ordered by `(n, spinor)`. `t = 0` gives the diagonal `T`,
//! `t = 1` the full operator.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::algebra::{sawtooth_coefficient, structure_phase, AlgebraElement};
use crate::conventions::bracket_constant;
use crate::linalg::{self, kron, pauli, CMatrix, CVector};
use crate::math::{e, exp, ln, sqrt, I, ONE, TWO_PI, ZERO};
use crate::{BasisIndex, Error, ModelParams, Result, Window};

/// Toeplitz matrix of multiplication by `y` on modes `-N..=N`:
/// `Y_{n',n} = c_{n'-n}`, i.e. `1/2` on the diagonal and `1/(2 pi i (n - n'))` off it.
pub fn sawtooth_matrix(n_max: u32) -> CMatrix {
    let len = 2 * n_max as usize + 1;
    CMatrix::from_fn(len, len, |r, c| sawtooth_coefficient(r as i64 - c as i64))
}

/// Truncated Dirac operator as a lazily generated family of Hermitian blocks.
#[derive(Debug, Clone)]
pub struct DiracBlocks {
    pub params: ModelParams,
    pub window: Window,
    /// Weight of the `S` part; 0 gives `T`, 1 gives `D'`.
    pub t_weight: f64,
    y: CMatrix,
}

impl DiracBlocks {
    pub fn build(params: ModelParams, window: Window, t_weight: f64) -> Result<Self> {
        params.validate()?;
        if window.k_max == 0 {
            return Err(Error::InvalidParams("Dirac window needs K >= 1".into()));
        }
        Ok(DiracBlocks { params, window, t_weight, y: sawtooth_matrix(window.n_max) })
    }

    pub fn y_matrix(&self) -> &CMatrix {
        &self.y
    }

    pub fn block_dim(&self) -> usize {
        2 * self.window.n_len()
    }

    pub fn block_keys(&self) -> Vec<(i64, i64)> {
        self.window.block_keys().collect()
    }

    fn n_diag(&self) -> CMatrix {
        let d: Vec<f64> = self.window.n_range().map(|n| n as f64).collect();
        linalg::diag_real(&d)
    }

    /// `T` block: `2 pi m sigma_1 + 2 pi diag(n) sigma_2 - 2 pi c alpha k sigma_3`.
    pub fn base_block(&self, m: i64, k: i64) -> CMatrix {
        let [s1, s2, s3] = pauli();
        let len = self.window.n_len();
        let id = linalg::identity(len);
        let cf = self.params.cf();
        kron(&id, &s1) * Complex64::new(TWO_PI * m as f64, 0.0)
            + kron(&self.n_diag(), &s2) * Complex64::new(TWO_PI, 0.0)
            + kron(&id, &s3) * Complex64::new(-TWO_PI * cf * self.params.alpha * k as f64, 0.0)
    }

    /// `S` block `2 pi c k Y (x) sigma_1` (unweighted).
    pub fn s_block(&self, k: i64) -> CMatrix {
        let [s1, _, _] = pauli();
        kron(&self.y, &s1) * Complex64::new(TWO_PI * self.params.cf() * k as f64, 0.0)
    }

    /// Block `(m, k)` of `T + t S`.
    pub fn block(&self, m: i64, k: i64) -> CMatrix {
        let mut b = self.base_block(m, k);
        if self.t_weight != 0.0 && k != 0 {
            b += self.s_block(k) * Complex64::new(self.t_weight, 0.0);
        }
        b
    }

    /// Closed-form spectrum of the `t = 0` block:
    /// `+-2 pi sqrt(m^2 + n^2 + c^2 alpha^2 k^2)`.
    pub fn base_spectrum(&self, m: i64, k: i64) -> Vec<f64> {
        let ck = self.params.cf() * self.params.alpha * k as f64;
        let mut v: Vec<f64> = self
            .window
            .n_range()
            .flat_map(|n| {
                let r = TWO_PI * sqrt((m * m + n * n) as f64 + ck * ck);
                [-r, r]
            })
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

fn check_finite(values: &[f64], m: i64, k: i64) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::EigenFailure { m, k })
    }
}

/// Sorted eigenvalues of one block.
pub fn block_eigenvalues(d: &DiracBlocks, m: i64, k: i64) -> Result<Vec<f64>> {
    let v = linalg::eigvalsh(&d.block(m, k));
    check_finite(&v, m, k)?;
    Ok(v)
}

/// One eigenvalue with its block provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub m: i64,
    pub k: i64,
    pub slot: usize,
}

/// Merged block spectra, sorted by value (ties by block key, then slot).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub eigenvalues: Vec<Eigenpair>,
    abs_sorted: Vec<f64>,
}

impl SpectralReport {
    /// Deterministic merge of per-block spectra in any order.
    pub fn from_blocks<I: IntoIterator<Item = ((i64, i64), Vec<f64>)>>(blocks: I) -> Self {
        let mut eigenvalues: Vec<Eigenpair> = blocks
            .into_iter()
            .flat_map(|((m, k), vals)| {
                vals.into_iter().enumerate().map(move |(slot, value)| Eigenpair { value, m, k, slot })
            })
            .collect();
        eigenvalues
            .sort_by(|a, b| a.value.total_cmp(&b.value).then((a.m, a.k).cmp(&(b.m, b.k))).then(a.slot.cmp(&b.slot)));
        let mut abs_sorted: Vec<f64> = eigenvalues.iter().map(|p| p.value.abs()).collect();
        abs_sorted.sort_by(f64::total_cmp);
        SpectralReport { eigenvalues, abs_sorted }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|p| p.value).collect()
    }

    /// `N(Lambda) = #{ j : |lambda_j| <= Lambda }`.
    pub fn counting(&self, lambda: f64) -> usize {
        self.abs_sorted.partition_point(|&x| x <= lambda)
    }

    /// `(Lambda, N(Lambda))` at `samples` log-spaced points in `[lo, hi]`.
    pub fn counting_samples(&self, lo: f64, hi: f64, samples: usize) -> Vec<(f64, usize)> {
        let samples = samples.max(2);
        let (a, b) = (ln(lo), ln(hi));
        (0..samples)
            .map(|i| {
                let l = exp(a + (b - a) * i as f64 / (samples - 1) as f64);
                (l, self.counting(l))
            })
            .collect()
    }

    /// Least-squares slope of `log N` against `log Lambda` over `[lo, hi]`.
    pub fn weyl_slope(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .counting_samples(lo, hi, samples)
            .into_iter()
            .filter(|&(_, n)| n > 0)
            .map(|(l, n)| (ln(l), ln(n as f64)))
            .collect();
        least_squares_slope(&pts)
    }
}

pub fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// The decade over which the counting function is fitted: the truncation
/// reproduces the full spectrum only below `2 pi min(M, N, c alpha K)`, and
/// the fit uses the decade centered (geometrically) between `2 pi` and that
/// cutoff.
pub fn weyl_decade(params: &ModelParams, window: &Window) -> (f64, f64) {
    let top =
        TWO_PI * (window.m_max as f64).min(window.n_max as f64).min(params.cf() * params.alpha * window.k_max as f64);
    let center = sqrt(TWO_PI * top);
    let half = sqrt(10.0);
    (center / half, center * half)
}

/// All blocks, solved sequentially.
pub fn eigensolve(d: &DiracBlocks) -> Result<SpectralReport> {
    let mut blocks = Vec::new();
    for (m, k) in d.block_keys() {
        blocks.push(((m, k), block_eigenvalues(d, m, k)?));
    }
    Ok(SpectralReport::from_blocks(blocks))
}

/// `|| S (T + i)^{-1} ||` on one block; zero for `k = 0`.
pub fn relative_bound_block(d: &DiracBlocks, m: i64, k: i64) -> Result<f64> {
    if k == 0 {
        return Ok(0.0);
    }
    let eig = linalg::eigh(&d.base_block(m, k));
    check_finite(&eig.values, m, k)?;
    let resolvent = linalg::hermitian_function(&eig, |l| ONE / Complex64::new(l, 1.0));
    Ok(linalg::spectral_norm(&(d.s_block(k) * resolvent)))
}

/// `max_{(m,k)} || S (T + i)^{-1} ||`; requires a `t = 0` operator.
pub fn relative_bound(d: &DiracBlocks) -> Result<f64> {
    if d.t_weight != 0.0 {
        return Err(Error::InvalidParams("relative_bound needs t_weight = 0".into()));
    }
    let mut best = 0.0f64;
    for (m, k) in d.block_keys() {
        best = best.max(relative_bound_block(d, m, k)?);
    }
    Ok(best)
}

/// `D'_j v` on the scalar GNS window (the `sigma_j` component of `D'`).
fn apply_dirac_component(j: u8, v: &AlgebraElement, d: &DiracBlocks) -> AlgebraElement {
    let p = &d.params;
    let w = &d.window;
    let mut out = AlgebraElement::zero();
    for (idx, c) in v.iter() {
        match j {
            1 => {
                out.add_term(*idx, c * TWO_PI * idx.m as f64);
                if idx.k != 0 && d.t_weight != 0.0 {
                    let pref = c * TWO_PI * p.cf() * idx.k as f64 * d.t_weight;
                    for n2 in w.n_range() {
                        out.add_term(
                            BasisIndex::new(idx.m, n2, idx.k),
                            pref * d.y[((n2 + w.n_max as i64) as usize, (idx.n + w.n_max as i64) as usize)],
                        );
                    }
                }
            }
            2 => out.add_term(*idx, c * TWO_PI * idx.n as f64),
            _ => out.add_term(*idx, c * (-TWO_PI * p.cf() * p.alpha * idx.k as f64)),
        }
    }
    out
}

/// `i [D'_j, L_a] v` on the truncated GNS space.
pub fn commutator_apply(j: u8, a: &AlgebraElement, v: &AlgebraElement, d: &DiracBlocks) -> AlgebraElement {
    let w = &d.window;
    let la_v = a.star(&v.restrict(w), &d.params).restrict(w);
    let first = apply_dirac_component(j, &la_v, d);
    let dv = apply_dirac_component(j, &v.restrict(w), d);
    let second = a.star(&dv, &d.params).restrict(w);
    (first - second).scale(I)
}

/// Reads `delta_j(a)` off the commutator `i [D'_j, L_a]` applied to the vacuum
/// `phi_{0,0,0}`.
pub fn derivation_commutator_oracle(j: u8, a: &AlgebraElement, d: &DiracBlocks) -> Result<AlgebraElement> {
    if !(1..=3).contains(&j) {
        return Err(Error::InvalidParams(alloc::format!("derivation index {j} not in 1..=3")));
    }
    let r = a.support_radius();
    let w = &d.window;
    let margin = (w.m_max.min(w.n_max).min(w.k_max) as i64) - r;
    if margin < r {
        return Err(Error::MarginViolation { radius: r, margin });
    }
    Ok(commutator_apply(j, a, &AlgebraElement::one(), d))
}

/// Element of `A (x) M_2`: `sum_{s,t} a_{st} (x) E_{st}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatrixElement {
    pub entries: [[AlgebraElement; 2]; 2],
}

impl MatrixElement {
    pub fn scalar(a: AlgebraElement) -> Self {
        MatrixElement { entries: [[a.clone(), AlgebraElement::zero()], [AlgebraElement::zero(), a]] }
    }

    pub fn diag(a: AlgebraElement, b: AlgebraElement) -> Self {
        MatrixElement { entries: [[a, AlgebraElement::zero()], [AlgebraElement::zero(), b]] }
    }

    pub fn identity() -> Self {
        MatrixElement::scalar(AlgebraElement::one())
    }

    /// `(1/2) (tau (x) tr)`.
    pub fn half_trace(&self) -> Complex64 {
        (self.entries[0][0].trace() + self.entries[1][1].trace()) * 0.5
    }

    pub fn support_radius(&self) -> i64 {
        self.entries.iter().flatten().map(|a| a.support_radius()).max().unwrap_or(0)
    }
}

/// `(|lambda|, <psi, a psi>)` for every nonzero eigenpair of block `(m, k)`.
pub fn dixmier_block_terms(a: &MatrixElement, d: &DiracBlocks, m: i64, k: i64) -> Result<Vec<(f64, Complex64)>> {
    let eig = linalg::eigh(&d.block(m, k));
    check_finite(&eig.values, m, k)?;
    let nn = d.window.n_max as i64;
    let len = d.window.n_len();
    // Matrix of a on the block: only terms with m_c = k_c = 0 stay in the block.
    let mut op = CMatrix::zeros(2 * len, 2 * len);
    for s in 0..2 {
        for t in 0..2 {
            for (idx, c) in a.entries[s][t].iter() {
                if idx.m != 0 || idx.k != 0 {
                    continue;
                }
                for n in -nn..=nn {
                    let n2 = n + idx.n;
                    if n2.abs() > nn {
                        continue;
                    }
                    let ph = e(structure_phase(*idx, BasisIndex::new(m, n, k), &d.params));
                    op[(2 * (n2 + nn) as usize + s, 2 * (n + nn) as usize + t)] += c * ph;
                }
            }
        }
    }
    let mut out = Vec::with_capacity(eig.values.len());
    for (j, &l) in eig.values.iter().enumerate() {
        if l.abs() <= crate::conventions::tol::SINGULAR {
            continue;
        }
        let psi: CVector = eig.vectors.column(j).into_owned();
        let w = psi.dotc(&(&op * &psi));
        out.push((l.abs(), w));
    }
    Ok(out)
}

/// Cesaro estimate of `sigma_N(a) / sigma_N(1)` with a trend over `N/4, N/2, N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DixmierEstimate {
    pub ratio: Complex64,
    pub terms: usize,
    /// Ratios at `N/4`, `N/2`, `N`.
    pub trend: [f64; 3],
}

/// Merges block terms (in block-key order), sorts by `|lambda|` and forms the
/// partial sums `sum w |lambda|^{-3}` and `sum |lambda|^{-3}`. The `1/log N`
/// normalization cancels in the ratio.
pub fn dixmier_from_terms(mut terms: Vec<(f64, Complex64)>) -> DixmierEstimate {
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = terms.len();
    let mut num = ZERO;
    let mut den = 0.0;
    let marks = [n / 4, n / 2, n];
    let mut trend = [0.0; 3];
    for (i, (l, w)) in terms.iter().enumerate() {
        let weight = 1.0 / (l * l * l);
        num += w * weight;
        den += weight;
        for (slot, &mk) in marks.iter().enumerate() {
            if i + 1 == mk {
                trend[slot] = (num / den).re;
            }
        }
    }
    DixmierEstimate { ratio: if den > 0.0 { num / den } else { ZERO }, terms: n, trend }
}

/// Sequential Dixmier ratio over all blocks of `d`.
pub fn dixmier_ratio(a: &MatrixElement, d: &DiracBlocks) -> Result<DixmierEstimate> {
    check_margin(a, d)?;
    let mut terms = Vec::new();
    for (m, k) in d.block_keys() {
        terms.extend(dixmier_block_terms(a, d, m, k)?);
    }
    Ok(dixmier_from_terms(terms))
}

pub fn check_margin(a: &MatrixElement, d: &DiracBlocks) -> Result<()> {
    let r = a.support_radius();
    let w = &d.window;
    let margin = w.m_max.min(w.n_max).min(w.k_max) as i64 - r;
    if margin < r {
        Err(Error::MarginViolation { radius: r, margin })
    } else {
        Ok(())
    }
}

/// `max_{(m,k)} || [e(kt) I, block] ||`; `U_t` acts by the scalar `e(kt)` on
/// each fixed-`k` block.
pub fn ut_symmetry(d: &DiracBlocks, t: f64) -> f64 {
    let mut worst = 0.0f64;
    for (m, k) in d.block_keys() {
        let b = d.block(m, k);
        let u = linalg::identity(b.nrows()) * e(k as f64 * t);
        worst = worst.max(linalg::max_abs(&(&u * &b - &b * &u)));
    }
    worst
}

/// Full operator on the `(m, n, k, spinor)` ordering, assembled from
/// one-dimensional factors; used to check block independence.
pub fn assemble_full(d: &DiracBlocks) -> CMatrix {
    let w = &d.window;
    let diag = |r: u32| {
        let v: Vec<f64> = (-(r as i64)..=r as i64).map(|x| x as f64).collect();
        linalg::diag_real(&v)
    };
    let (im, in_, ik) = (linalg::identity(w.m_len()), linalg::identity(w.n_len()), linalg::identity(w.k_len()));
    let (mm, nn, kk) = (diag(w.m_max), diag(w.n_max), diag(w.k_max));
    let [s1, s2, s3] = pauli();
    let cf = d.params.cf();
    let x1 = kron(&kron(&mm, &in_), &ik) + kron(&kron(&im, &d.y), &kk) * Complex64::new(cf * d.t_weight, 0.0);
    let x2 = kron(&kron(&im, &nn), &ik);
    let x3 = kron(&kron(&im, &in_), &kk) * Complex64::new(-cf * d.params.alpha, 0.0);
    (kron(&x1, &s1) + kron(&x2, &s2) + kron(&x3, &s3)) * Complex64::new(TWO_PI, 0.0)
}

/// `||([delta_1, delta_2] - gamma delta_3) v|| / ||v||` on the `(m, k)` sector
/// of the `n`-window, with `gamma = 1/alpha`. The coefficient-level bracket is
/// `2 pi i c k (J - I)` with `J` the all-ones matrix, so the defect vanishes
/// on vectors whose coefficients sum to zero (no mass at the sawtooth jump).
pub fn bracket_defect(params: &ModelParams, n_max: u32, m: i64, k: i64, v: &CVector) -> f64 {
    let len = 2 * n_max as usize + 1;
    let y = sawtooth_matrix(n_max);
    let cf = params.cf();
    let two_pi_i = I * TWO_PI;
    let d1 =
        (linalg::identity(len) * Complex64::new(m as f64, 0.0) + y * Complex64::new(cf * k as f64, 0.0)) * two_pi_i;
    let nd: Vec<f64> = (-(n_max as i64)..=n_max as i64).map(|n| n as f64).collect();
    let d2 = linalg::diag_real(&nd) * two_pi_i;
    let d3 = linalg::identity(len) * (-two_pi_i * cf * params.alpha * k as f64);
    let gamma = bracket_constant(params.alpha);
    let r = (&d1 * &d2 - &d2 * &d1 - d3 * Complex64::new(gamma, 0.0)) * v;
    r.norm() / v.norm()
}

/// Smooth test vector: difference of two Gaussians in `n` shifted by integers,
/// so the coefficients sum to zero up to the tails cut by the window.
pub fn smooth_vector(n_max: u32, width: f64, shift: i64) -> CVector {
    let len = 2 * n_max as usize + 1;
    let g = |x: f64| exp(-x * x / (2.0 * width * width));
    CVector::from_fn(len, |i, _| {
        let n = i as f64 - n_max as f64;
        Complex64::new(g(n - shift as f64) - g(n + shift as f64 + 1.0), 0.0)
    })
}
