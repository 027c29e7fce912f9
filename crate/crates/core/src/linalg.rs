//! Dense complex linear algebra on top of `nalgebra`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::math::{I, ONE, ZERO};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Pauli matrices `[sigma_1, sigma_2, sigma_3]` with `sigma_3 = diag(-1, 1)`,
/// i.e. `i sigma_1 sigma_2 = sigma_3`.
pub fn pauli() -> [CMatrix; 3] {
    [
        CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        CMatrix::from_row_slice(2, 2, &[-ONE, ZERO, ZERO, ONE]),
    ]
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    let mut out = CMatrix::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for p in 0..br {
                for q in 0..bc {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Columns are the eigenvectors, in the order of `values`.
    pub vectors: CMatrix,
}

/// Eigenvalues and eigenvectors of the Hermitian part of `h`, sorted ascending.
pub fn eigh(h: &CMatrix) -> HermitianEigen {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    HermitianEigen { values, vectors }
}

/// Eigenvalues only, sorted ascending.
pub fn eigvalsh(h: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = h.clone().symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// `V diag(f(lambda)) V^*` for Hermitian `h`.
pub fn hermitian_function<F: Fn(f64) -> Complex64>(eig: &HermitianEigen, f: F) -> CMatrix {
    let v = &eig.vectors;
    let mut scaled = v.clone();
    for (j, &l) in eig.values.iter().enumerate() {
        let s = f(l);
        for i in 0..v.nrows() {
            scaled[(i, j)] *= s;
        }
    }
    scaled * v.adjoint()
}

pub fn spectral_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Spectral norm of a Hermitian matrix via its eigenvalues.
pub fn hermitian_norm(a: &CMatrix) -> f64 {
    eigvalsh(a).iter().map(|x| x.abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |a - a^*|` entrywise.
pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    max_abs(&(a - a.adjoint()))
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn diag_real(d: &[f64]) -> CMatrix {
    let n = d.len();
    let mut m = CMatrix::zeros(n, n);
    for (i, &x) in d.iter().enumerate() {
        m[(i, i)] = Complex64::new(x, 0.0);
    }
    m
}
