//! Homotopies of the Dirac operator and the index pairing with the unitary
//! `e(y)`.
//!
//! Paths have the form `A_t = A + t B` with `A` the diagonal operator `T`
//! (block `t_weight = 0`) and `B` either the `S` part or the alpha shift
//! `-2 pi c M_p (x) sigma_3`, for which `A_t^(alpha) = A^(alpha + t)`.
//!
//! The unitary `phi_{0,1,0}` acts on block `(m, k)` as `U_1 U_2`, with `U_1` the
//! shift `n -> n + 1` and `U_2 = e(k nu hbar)`. Since `Y` is Toeplitz,
//! `U_1 A U_1^{-1} = A - 2 pi I (x) sigma_2` blockwise, which is the endpoint of
//! the spectral-flow path.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::conventions::tol;
use crate::dirac::DiracBlocks;
use crate::linalg::{self, kron, pauli, CMatrix};
use crate::math::{atan, e, pow, sqrt, PI, TWO_PI};
use crate::{Error, Result};

/// The perturbation `B` of a path `A + t B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// `S = 2 pi c M_{yp} (x) sigma_1`, ending at the full Dirac operator.
    SPart,
    /// `-2 pi c M_p (x) sigma_3`, ending at `alpha + 1`.
    AlphaShift,
}

/// Block `(m, k)` of `B`; zero when `k = 0`.
pub fn perturbation_block(d: &DiracBlocks, kind: Perturbation, k: i64) -> CMatrix {
    match kind {
        Perturbation::SPart => d.s_block(k),
        Perturbation::AlphaShift => {
            let [_, _, s3] = pauli();
            kron(&linalg::identity(d.window.n_len()), &s3) * Complex64::new(-TWO_PI * d.params.cf() * k as f64, 0.0)
        }
    }
}

fn base(d: &DiracBlocks) -> Result<()> {
    if d.t_weight != 0.0 {
        return Err(Error::InvalidParams("homotopy base needs t_weight = 0".into()));
    }
    Ok(())
}

/// `max_(m,k) || |A + kappa|^{-p} B |A + kappa|^{-(1-p)} ||` over blocks with `B != 0`.
pub fn interpolation_bound(d: &DiracBlocks, kind: Perturbation, p: f64, kappa: f64) -> Result<f64> {
    base(d)?;
    let mut best = 0.0f64;
    for (m, k) in d.block_keys() {
        if k == 0 {
            continue;
        }
        best = best.max(interpolation_bound_block(d, kind, p, kappa, m, k)?);
    }
    Ok(best)
}

pub fn interpolation_bound_block(
    d: &DiracBlocks,
    kind: Perturbation,
    p: f64,
    kappa: f64,
    m: i64,
    k: i64,
) -> Result<f64> {
    let b = perturbation_block(d, kind, k);
    let eig = shifted_eigen(d, m, k, kappa)?;
    if let Some(&l) = eig.values.iter().find(|l| l.abs() < tol::SINGULAR) {
        return Err(Error::SingularBase { m, k, eigenvalue: l });
    }
    let left = linalg::hermitian_function(&eig, |l| Complex64::new(pow(l.abs(), -p), 0.0));
    let right = linalg::hermitian_function(&eig, |l| Complex64::new(pow(l.abs(), p - 1.0), 0.0));
    Ok(linalg::spectral_norm(&(left * b * right)))
}

fn shifted_eigen(d: &DiracBlocks, m: i64, k: i64, kappa: f64) -> Result<linalg::HermitianEigen> {
    let a = d.base_block(m, k) + linalg::identity(d.block_dim()) * Complex64::new(kappa, 0.0);
    let eig = linalg::eigh(&a);
    if eig.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure { m, k });
    }
    Ok(eig)
}

/// Shift choice for a base with kernel: the smallest `n >= 2` with
/// `b = a n / (n - 1) < 1`, then `kappa = min(lambda_+, |beta| / n) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KappaChoice {
    pub kappa: f64,
    pub n: u32,
    /// Relative bound of `B` with respect to `A`.
    pub a: f64,
    /// Relative bound with respect to `A + kappa`; equals `a` when `kappa = 0`.
    pub b: f64,
    pub smallest_positive: f64,
    pub largest_negative: f64,
    pub has_kernel: bool,
}

pub fn choose_kappa(d: &DiracBlocks, a: f64) -> Result<KappaChoice> {
    base(d)?;
    if !(0.0..1.0).contains(&a) {
        return Err(Error::KappaViolation(alloc::format!("relative bound {a} not in [0, 1)")));
    }
    let mut pos = f64::INFINITY;
    let mut neg = f64::NEG_INFINITY;
    let mut kernel = false;
    for (m, k) in d.block_keys() {
        for l in d.base_spectrum(m, k) {
            if l.abs() <= tol::SINGULAR {
                kernel = true;
            } else if l > 0.0 {
                pos = pos.min(l);
            } else {
                neg = neg.max(l);
            }
        }
    }
    // Smallest n >= 2 with n > 1 / (1 - a).
    let mut n = 2u32;
    while a * n as f64 / (n as f64 - 1.0) >= 1.0 {
        n += 1;
    }
    let (kappa, b) = if kernel {
        let kappa = 0.5 * pos.min(neg.abs() / n as f64);
        (kappa, a * n as f64 / (n as f64 - 1.0))
    } else {
        (0.0, a)
    };
    Ok(KappaChoice { kappa, n, a, b, smallest_positive: pos, largest_negative: neg, has_kernel: kernel })
}

impl KappaChoice {
    /// Checks the two conditions of the shift against a spectrum.
    pub fn verify(&self, d: &DiracBlocks) -> Result<()> {
        if self.has_kernel && !(self.kappa > 0.0 && self.kappa < self.smallest_positive) {
            return Err(Error::KappaViolation(alloc::format!(
                "kappa {} not in (0, {})",
                self.kappa,
                self.smallest_positive
            )));
        }
        if self.has_kernel && self.largest_negative.abs() < self.n as f64 * self.kappa {
            return Err(Error::KappaViolation(alloc::format!(
                "|beta| = {} below n kappa = {}",
                self.largest_negative.abs(),
                self.n as f64 * self.kappa
            )));
        }
        for (m, k) in d.block_keys() {
            if d.base_spectrum(m, k).iter().any(|l| (l + self.kappa).abs() <= tol::SINGULAR && self.has_kernel) {
                return Err(Error::KappaViolation(alloc::format!("A + kappa singular on block ({m}, {k})")));
            }
        }
        Ok(())
    }
}

/// `(2 / pi) arctan(x + kappa)` of a Hermitian block.
pub fn bounded_transform(block: &CMatrix, kappa: f64) -> CMatrix {
    let eig = linalg::eigh(block);
    linalg::hermitian_function(&eig, |l| Complex64::new(2.0 / PI * atan(l + kappa), 0.0))
}

/// A path `t -> A + t B` sampled on an increasing grid in `[0, 1]`.
#[derive(Debug, Clone)]
pub struct HomotopyPath {
    pub base: DiracBlocks,
    pub kind: Perturbation,
    pub grid: Vec<f64>,
    pub kappa: KappaChoice,
}

impl HomotopyPath {
    /// Uniform grid with `steps` intervals and the shift chosen from the
    /// relative bound `|| B A^{-1} ||` over blocks with `B != 0`.
    pub fn uniform(base: DiracBlocks, kind: Perturbation, steps: usize) -> Result<Self> {
        let a = interpolation_bound(&base, kind, 1.0, 0.0)?;
        let kappa = choose_kappa(&base, a)?;
        let grid = (0..=steps).map(|i| i as f64 / steps as f64).collect();
        Ok(HomotopyPath { base, kind, grid, kappa })
    }

    /// Block `(m, k)` of `A_t`.
    pub fn block(&self, m: i64, k: i64, t: f64) -> CMatrix {
        let mut a = self.base.base_block(m, k);
        if k != 0 {
            a += perturbation_block(&self.base, self.kind, k) * Complex64::new(t, 0.0);
        }
        a
    }

    /// `|t - s| b / (1 - b)^2 pi / 2`.
    pub fn continuity_bound(&self, s: f64, t: f64) -> f64 {
        let b = self.kappa.b;
        (t - s).abs() * b / ((1.0 - b) * (1.0 - b)) * PI / 2.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuityRow {
    pub s: f64,
    pub t: f64,
    pub deviation: f64,
    pub bound: f64,
}

/// `|| f(A_t) - f(A_s) ||` for adjacent grid points, maximized over blocks.
pub fn homotopy_continuity(path: &HomotopyPath) -> Result<Vec<ContinuityRow>> {
    path.kappa.verify(&path.base)?;
    let mut dev = vec![0.0f64; path.grid.len().saturating_sub(1)];
    for (m, k) in path.base.block_keys() {
        for (d, b) in dev.iter_mut().zip(continuity_block(path, m, k)) {
            *d = d.max(b);
        }
    }
    Ok(continuity_rows(path, &dev))
}

/// Adjacent-pair deviations on one block; empty (all zero) when `k = 0`
/// since `B` vanishes there.
pub fn continuity_block(path: &HomotopyPath, m: i64, k: i64) -> Vec<f64> {
    if k == 0 {
        return Vec::new();
    }
    let fs: Vec<CMatrix> =
        path.grid.iter().map(|&t| bounded_transform(&path.block(m, k, t), path.kappa.kappa)).collect();
    fs.windows(2).map(|w| linalg::hermitian_norm(&(&w[1] - &w[0]))).collect()
}

/// Table rows from per-interval deviations.
pub fn continuity_rows(path: &HomotopyPath, dev: &[f64]) -> Vec<ContinuityRow> {
    path.grid
        .windows(2)
        .enumerate()
        .map(|(i, st)| ContinuityRow {
            s: st[0],
            t: st[1],
            deviation: dev.get(i).copied().unwrap_or(0.0),
            bound: path.continuity_bound(st[0], st[1]),
        })
        .collect()
}

/// `E = 1(A >= 0)` on block `(m, k)`, computed as the nonnegative spectral
/// subspace of `A + kappa`.
pub fn spectral_projection(d: &DiracBlocks, m: i64, k: i64, kappa: f64) -> Result<CMatrix> {
    let eig = linalg::eigh(&(d.block(m, k) + linalg::identity(d.block_dim()) * Complex64::new(kappa, 0.0)));
    if eig.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::EigenFailure { m, k });
    }
    Ok(linalg::hermitian_function(&eig, |l| Complex64::new(if l >= 0.0 { 1.0 } else { 0.0 }, 0.0)))
}

/// `U_2` on block `(m, k)`: the scalar `e(k nu hbar)`.
pub fn u2_phase(d: &DiracBlocks, k: i64) -> Complex64 {
    e(k as f64 * d.params.nu * d.params.hbar)
}

/// `max |[U_2, E]|` over all blocks. `U_2` is a scalar on each block, applied
/// on the left and on the right of `E`.
pub fn u2_commutator(d: &DiracBlocks, kappa: f64) -> Result<f64> {
    let mut worst = 0.0f64;
    for (m, k) in d.block_keys() {
        let p = spectral_projection(d, m, k, kappa)?;
        let u = u2_phase(d, k);
        worst = worst.max(linalg::max_abs(&(p.map(|z| u * z) - p.map(|z| z * u))));
    }
    Ok(worst)
}

/// `A - 2 pi I (x) sigma_2`, the conjugate of a block by the `n`-shift.
pub fn shift_conjugate(block: &CMatrix) -> CMatrix {
    let [_, s2, _] = pauli();
    let n = block.nrows() / 2;
    block - kron(&linalg::identity(n), &s2) * Complex64::new(TWO_PI, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub t: f64,
    /// Position in the ascending spectrum at the crossing.
    pub slot: usize,
    /// `+1` for negative to positive.
    pub direction: i8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Flow {
    pub value: i64,
    pub crossings: Vec<Crossing>,
}

fn negatives(h: &CMatrix) -> Result<(usize, f64)> {
    let v = linalg::eigvalsh(h);
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::EigenFailure { m: 0, k: 0 });
    }
    let nearest = v.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    Ok((v.iter().filter(|x| **x < 0.0).count(), nearest))
}

/// Spectral flow of `(1 - t) a0 + t a1` over `[t0, t1]`, counting eigenvalues
/// that move from negative to positive. Grid points where an eigenvalue sits
/// within the crossing tolerance of 0 are nudged by a fraction of the step;
/// after three nudges the crossing is reported unresolved.
pub fn spectral_flow(a0: &CMatrix, a1: &CMatrix, t0: f64, t1: f64, steps: usize) -> Result<Flow> {
    let at = |t: f64| a0 * Complex64::new(1.0 - t, 0.0) + a1 * Complex64::new(t, 0.0);
    let h = (t1 - t0) / steps as f64;
    let sample = |t: f64, inner: bool| -> Result<(f64, usize)> {
        let mut tt = t;
        for attempt in 0..=3 {
            let (neg, near) = negatives(&at(tt))?;
            if near > tol::CROSSING {
                return Ok((tt, neg));
            }
            if !inner || attempt == 3 {
                break;
            }
            tt = t + h * 0.25 / (1 << attempt) as f64;
        }
        Err(Error::UnresolvedCrossing { m: 0, k: 0, t })
    };
    let mut points = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let t = t0 + h * i as f64;
        points.push(sample(t, i != 0 && i != steps)?);
    }
    let mut crossings = Vec::new();
    for w in points.windows(2) {
        let ((ta, na), (tb, nb)) = (w[0], w[1]);
        if na == nb {
            continue;
        }
        // Bisect on the negative count to locate each change.
        let (mut lo, mut hi, mut nlo) = (ta, tb, na);
        for _ in 0..40 {
            let mid = 0.5 * (lo + hi);
            let (nm, _) = negatives(&at(mid))?;
            if nm == nlo {
                lo = mid;
                nlo = nm;
            } else {
                hi = mid;
            }
        }
        let step = na as i64 - nb as i64;
        let dir: i8 = if step > 0 { 1 } else { -1 };
        for j in 0..step.unsigned_abs() as usize {
            let slot = if dir > 0 { na - 1 - j } else { na + j };
            crossings.push(Crossing { t: 0.5 * (lo + hi), slot, direction: dir });
        }
    }
    let value = points[0].1 as i64 - points[points.len() - 1].1 as i64;
    Ok(Flow { value, crossings })
}

/// Index of the compression `E_tgt U E_src` where `a_src`, `a_tgt` are the
/// same operator on `n`-windows offset by one, so that `U` is the identity
/// in the aligned coordinates. Kernels are counted from singular values.
pub fn compression_index(a_src: &CMatrix, a_tgt: &CMatrix, kappa: f64) -> i64 {
    let range = |a: &CMatrix| -> CMatrix {
        let eig = linalg::eigh(&(a + linalg::identity(a.nrows()) * Complex64::new(kappa, 0.0)));
        let cols: Vec<usize> = (0..eig.values.len()).filter(|&i| eig.values[i] >= 0.0).collect();
        CMatrix::from_fn(a.nrows(), cols.len(), |r, c| eig.vectors[(r, cols[c])])
    };
    let (qs, qt) = (range(a_src), range(a_tgt));
    let c = qt.adjoint() * &qs;
    let sv: Vec<f64> = if c.is_empty() { Vec::new() } else { c.clone().singular_values().iter().copied().collect() };
    let rank = sv.iter().filter(|s| **s > tol::KERNEL_SV).count();
    (qs.ncols() - rank) as i64 - (qt.ncols() - rank) as i64
}

/// `n`-windows `[-N, N - 1]` and `[-N + 1, N]` of a block ordered `(n, spinor)`.
pub fn offset_windows(block: &CMatrix) -> (CMatrix, CMatrix) {
    let len = block.nrows();
    (block.view((0, 0), (len - 2, len - 2)).into_owned(), block.view((2, 2), (len - 2, len - 2)).into_owned())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockFlow {
    pub m: i64,
    pub k: i64,
    pub flow: i64,
    /// `false` when the gap `2 pi sqrt(m^2 + c^2 alpha^2 k^2)` exceeds the
    /// perturbation norm plus kappa and the flow is zero without solving.
    pub computed: bool,
    pub crossings: Vec<Crossing>,
}

/// `2 pi sqrt(m^2 + c^2 alpha^2 k^2) > 2 pi + kappa`.
pub fn gap_excludes_crossing(d: &DiracBlocks, m: i64, k: i64, kappa: f64) -> bool {
    let ck = d.params.cf() * d.params.alpha * k as f64;
    TWO_PI * sqrt((m * m) as f64 + ck * ck) > TWO_PI + kappa
}

/// Spectral flow of `A + kappa` to `U_1 A U_1^{-1} + kappa` on one block.
pub fn block_flow(d: &DiracBlocks, m: i64, k: i64, kappa: f64, steps: usize) -> Result<BlockFlow> {
    let shift = linalg::identity(d.block_dim()) * Complex64::new(kappa, 0.0);
    let a0 = d.block(m, k) + &shift;
    let a1 = shift_conjugate(&d.block(m, k)) + &shift;
    let f = spectral_flow(&a0, &a1, 0.0, 1.0, steps).map_err(|e| match e {
        Error::UnresolvedCrossing { t, .. } => Error::UnresolvedCrossing { m, k, t },
        Error::EigenFailure { .. } => Error::EigenFailure { m, k },
        other => other,
    })?;
    Ok(BlockFlow { m, k, flow: f.value, computed: true, crossings: f.crossings })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexResult {
    pub value: i64,
    pub per_block: Vec<BlockFlow>,
    pub kappa: f64,
    pub n_max: u32,
    pub alpha: f64,
    /// Compression index summed over the computed blocks.
    pub compression_value: i64,
}

/// Index of `E U_1 E` via spectral flow, summed over blocks.
pub fn index_pairing(d: &DiracBlocks, steps: usize) -> Result<IndexResult> {
    let kappa = spectral_kappa(d);
    let blocks =
        d.block_keys().into_iter().map(|(m, k)| index_block(d, m, k, kappa, steps)).collect::<Result<Vec<_>>>()?;
    Ok(IndexResult::from_blocks(d, kappa, blocks))
}

/// Flow and compression index of one block; gapped blocks are recorded with
/// zero flow without solving.
pub fn index_block(d: &DiracBlocks, m: i64, k: i64, kappa: f64, steps: usize) -> Result<(BlockFlow, i64)> {
    if gap_excludes_crossing(d, m, k, kappa) {
        return Ok((BlockFlow { m, k, flow: 0, computed: false, crossings: Vec::new() }, 0));
    }
    let flow = block_flow(d, m, k, kappa, steps)?;
    let (src, tgt) = offset_windows(&d.block(m, k));
    Ok((flow, compression_index(&src, &tgt, kappa)))
}

impl IndexResult {
    pub fn from_blocks(d: &DiracBlocks, kappa: f64, blocks: Vec<(BlockFlow, i64)>) -> Self {
        let compression_value = blocks.iter().map(|b| b.1).sum();
        let per_block: Vec<BlockFlow> = blocks.into_iter().map(|b| b.0).collect();
        IndexResult {
            value: per_block.iter().map(|b| b.flow).sum(),
            per_block,
            kappa,
            n_max: d.window.n_max,
            alpha: d.params.alpha,
            compression_value,
        }
    }
}

/// Smallest nonzero `|eigenvalue|` of one block.
pub fn block_smallest_nonzero(d: &DiracBlocks, m: i64, k: i64) -> f64 {
    linalg::eigvalsh(&d.block(m, k))
        .into_iter()
        .map(f64::abs)
        .filter(|l| *l > tol::SINGULAR)
        .fold(f64::INFINITY, f64::min)
}

/// A third of the smallest nonzero eigenvalue modulus of `A` (the kernel is
/// counted in `E = 1(A >= 0)`), capped by the path step `2 pi`. A third keeps
/// the leaving and returning crossings of the shift path at distinct times.
pub fn spectral_kappa(d: &DiracBlocks) -> f64 {
    kappa_from_gap(d.block_keys().into_iter().map(|(m, k)| block_smallest_nonzero(d, m, k)).fold(TWO_PI, f64::min))
}

pub fn kappa_from_gap(gap: f64) -> f64 {
    gap.min(TWO_PI) / 3.0
}
