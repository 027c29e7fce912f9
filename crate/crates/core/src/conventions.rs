//! Fixed conventions and the single table of numerical tolerances.
//!
//! * `e(x) = exp(2 pi i x)`.
//! * Basis `phi_{m,n,k}(x, y, p) = e(cxyp) e(mx + ny) delta_{kp}`; `y` is not
//!   reduced mod 1 when evaluating.
//! * Derivations: `delta_1 = 2 pi i (m + c k Y)`, `delta_2 = 2 pi i n`,
//!   `delta_3 = -2 pi i c alpha k` on `phi_{m,n,k}`, with `Y` the sawtooth
//!   (multiplication by `y`) matrix. `delta_j = i [D'_j, .]` and
//!   `[delta_1, delta_2] = (1/alpha) delta_3` on smooth vectors.
//! * Pauli matrices: `sigma_1`, `sigma_2` standard, `sigma_3 = diag(-1, 1)`,
//!   so `sigma_j sigma_k = delta_jk + s i eps_jkl sigma_l` with orientation
//!   `s = -1` ([`PAULI_ORIENTATION`]).
//! * Represented forms: `comm_D(a) = sum_j delta_j(a) sigma_j = i [D, a]`.
//!   A degree-`k` represented form is `i^k` times the operator image, so the
//!   form involution is `X -> (-1)^k X^dagger`.

/// `s` in `sigma_j sigma_k = delta_jk I + s i eps_jkl sigma_l`.
pub const PAULI_ORIENTATION: f64 = -1.0;

/// Constant `gamma` in `[delta_1, delta_2] = gamma delta_3`.
pub fn bracket_constant(alpha: f64) -> f64 {
    1.0 / alpha
}

/// Derivation normalization: `pi(delta omega)` of a degree-`k` universal form
/// is represented with `(2 pi i)^k` times the unnormalized derivative factors.
pub const FORM_NORMALIZATION: &str = "(2 pi i)^k";

pub mod tol {
    /// Exact coefficient arithmetic.
    pub const COEFF: f64 = 1e-12;
    /// Grid evaluation of the twisted convolution and the homomorphism residual.
    pub const STRUCTURE_ORACLE: f64 = 1e-9;
    /// Hermiticity of Dirac blocks.
    pub const HERMITIAN: f64 = 1e-13;
    /// Full-matrix versus block spectra.
    pub const BLOCK_INDEPENDENCE: f64 = 1e-10;
    /// Counting-function slope around 3.
    pub const WEYL_SLOPE: f64 = 0.15;
    /// Slack on the relative bound `1/alpha`.
    pub const RELATIVE_BOUND: f64 = 1e-8;
    /// Dixmier ratio for `phi_{1,0,0}` (limit 0).
    pub const DIXMIER_OFFDIAG: f64 = 0.1;
    /// Dixmier ratio for `diag(1, 0)` around 1/2.
    pub const DIXMIER_HALF: f64 = 0.05;
    /// Smooth-vector bracket check.
    pub const BRACKET: f64 = 1e-3;
    /// Junk-form sigma components.
    pub const JUNK: f64 = 1e-10;
    /// Scalar curvature, coefficient maps.
    pub const CURVATURE: f64 = 1e-10;
    /// Scalar curvature, pointwise samples.
    pub const CURVATURE_POINTWISE: f64 = 1e-9;
    /// Connection pattern and defining-equation checks.
    pub const CONNECTION: f64 = 1e-10;
    /// Young bound slack.
    pub const YOUNG: f64 = 1e-6;
    /// Weaver W_k commutator.
    pub const WEAVER_W: f64 = 1e-9;
    /// Weaver X_r commutator (interpolation limited).
    pub const WEAVER_X: f64 = 1e-7;
    /// Near-zero eigenvalue threshold along a spectral-flow path.
    pub const CROSSING: f64 = 1e-10;
    /// Singular values counted as kernel in the compression cross-check.
    pub const KERNEL_SV: f64 = 1e-8;
    /// Base operator singularity threshold.
    pub const SINGULAR: f64 = 1e-12;
    /// Projection identities.
    pub const PROJECTION: f64 = 1e-12;
}
