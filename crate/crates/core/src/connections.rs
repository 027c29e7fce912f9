//! Connections on the free module `Omega^1_D` with generators
//! `sigma_1, sigma_2, sigma_3`.
//!
//! `nabla(sigma_i) = sum_{j,l} Gamma^i_{jl} sigma_j (x) sigma_l`; row `j` is the
//! form index, column `l` the generator. `omega^i_l = sum_j Gamma^i_{jl} sigma_j`.
//!
//! In the represented normalization (see [`crate::conventions`]):
//! * torsionless iff `Gamma^1`, `Gamma^2` are symmetric and `Gamma^3` is
//!   symmetric except `Gamma^3_{12} - Gamma^3_{21} = -1/alpha`;
//! * unitary iff `Gamma^i_{kj} = -(Gamma^j_{ki})^*`.
//!
//! Both affine conditions can hold at once (see [`incompatibility_check`]).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::algebra::AlgebraElement;
use crate::conventions::{bracket_constant, tol, PAULI_ORIENTATION};
use crate::forms::{comm_d, epsilon, junk_project, CliffordForm};
use crate::{BasisIndex, Error, ModelParams, Result, Window};

pub type GammaMatrix = [[AlgebraElement; 3]; 3];

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Connection {
    /// `gamma[i][j][l] = Gamma^{i+1}_{j+1, l+1}`.
    pub gamma: [GammaMatrix; 3],
}

/// Required value of `Gamma^3_{12} - Gamma^3_{21}` for torsionlessness.
pub fn torsion_offset(params: &ModelParams) -> f64 {
    -bracket_constant(params.alpha)
}

impl Connection {
    pub fn zero() -> Self {
        Connection::default()
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize, usize) -> AlgebraElement) -> Self {
        Connection { gamma: core::array::from_fn(|i| core::array::from_fn(|j| core::array::from_fn(|l| f(i, j, l)))) }
    }

    pub fn entry(&self, i: usize, j: usize, l: usize) -> &AlgebraElement {
        &self.gamma[i][j][l]
    }

    /// `omega^i_l` as a degree-1 form.
    pub fn omega(&self, i: usize, l: usize) -> CliffordForm {
        CliffordForm::one_form(core::array::from_fn(|j| self.gamma[i][j][l].clone()))
    }

    pub fn max_abs_k(&self) -> i64 {
        self.entries().map(|a| a.max_abs_k()).max().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = &AlgebraElement> {
        self.gamma.iter().flatten().flatten()
    }

    pub fn plus(&self, other: &Connection) -> Connection {
        Connection::from_fn(|i, j, l| &self.gamma[i][j][l] + &other.gamma[i][j][l])
    }

    /// Nearest point of the torsionless family: symmetrize, then impose the
    /// offset on `Gamma^3_{12}, Gamma^3_{21}`.
    pub fn torsionless_part(&self, params: &ModelParams) -> Connection {
        let half = Complex64::new(0.5, 0.0);
        let mut out = Connection::from_fn(|i, j, l| (&self.gamma[i][j][l] + &self.gamma[i][l][j]).scale(half));
        let d = AlgebraElement::scalar(Complex64::new(torsion_offset(params) / 2.0, 0.0));
        out.gamma[2][0][1] += &d;
        out.gamma[2][1][0] -= &d;
        out
    }

    /// Nearest point of the unitary family.
    pub fn unitary_part(&self) -> Connection {
        Connection::from_fn(|i, k, j| {
            (&self.gamma[i][k][j] - &self.gamma[j][k][i].involution()).scale(Complex64::new(0.5, 0.0))
        })
    }
}

/// Degree-2 `delta(X)` of a 1-form `X = sum_k X_k sigma_k`, junk projected:
/// the `sigma_l` component is `s i (sum_{jk} eps_jkl delta_j X_k - [l = 3] X_3 / alpha)`.
pub fn curl(x: &CliffordForm, window: Option<&Window>, params: &ModelParams) -> Result<CliffordForm> {
    if x.degree != 1 {
        return Err(Error::DegreeMismatch { left: 1, right: x.degree });
    }
    let si = Complex64::new(0.0, PAULI_ORIENTATION);
    let grads: Vec<[AlgebraElement; 3]> =
        (1..4).map(|k| x.components[k].gradient(window, params)).collect::<Result<_>>()?;
    let mut out = CliffordForm::zero(2);
    for l in 0..3 {
        let mut acc = AlgebraElement::zero();
        for j in 0..3 {
            for k in 0..3 {
                let e = epsilon(j, k, l);
                if e != 0.0 {
                    acc += &grads[k][j].scale_re(e);
                }
            }
        }
        if l == 2 {
            acc -= &x.components[3].scale_re(bracket_constant(params.alpha));
        }
        out.components[l + 1] = acc.scale(si);
    }
    Ok(out)
}

/// `m(nabla(sigma_i)) = sum_l omega^i_l sigma_l`.
pub fn m_nabla(conn: &Connection, i: usize, params: &ModelParams) -> CliffordForm {
    let mut acc = CliffordForm::zero(2);
    for l in 0..3 {
        let s = CliffordForm::single(1, l + 1, AlgebraElement::one());
        acc = acc.add(&conn.omega(i, l).mul(&s, params)).expect("degree 2");
    }
    acc
}

/// `T(X) = delta X - m(nabla X)` in `Omega^2_D`, extending `nabla` by
/// `nabla(a sigma_j) = delta a (x) sigma_j + a nabla(sigma_j)`.
pub fn torsion(
    conn: &Connection,
    x: &CliffordForm,
    window: Option<&Window>,
    params: &ModelParams,
) -> Result<CliffordForm> {
    let mut t = curl(x, window, params)?;
    for j in 0..3 {
        let a = &x.components[j + 1];
        if a.is_zero() {
            continue;
        }
        let s = CliffordForm::single(1, j + 1, AlgebraElement::one());
        t = t.sub(&comm_d(a, window, params)?.mul(&s, params))?;
        t = t.sub(&m_nabla(conn, j, params).left_mul(a, params))?;
    }
    Ok(junk_project(&t))
}

/// Torsion on the three generators.
pub fn torsion_on_generators(conn: &Connection, params: &ModelParams) -> Result<[CliffordForm; 3]> {
    let mut out: [CliffordForm; 3] = Default::default();
    for (i, o) in out.iter_mut().enumerate() {
        *o = torsion(conn, &CliffordForm::single(1, i + 1, AlgebraElement::one()), None, params)?;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryViolation {
    pub generator: usize,
    pub row: usize,
    pub col: usize,
    pub defect: f64,
}

/// Outcome of a pattern check; `violations` lists failing entries (1-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub holds: bool,
    pub violations: Vec<EntryViolation>,
}

impl Certificate {
    fn from_violations(violations: Vec<EntryViolation>) -> Self {
        Certificate { holds: violations.is_empty(), violations }
    }

    pub fn max_defect(&self) -> f64 {
        self.violations.iter().map(|v| v.defect).fold(0.0, f64::max)
    }
}

/// Pattern check for torsionlessness.
pub fn is_torsionless(conn: &Connection, params: &ModelParams) -> Certificate {
    let off = AlgebraElement::scalar(Complex64::new(torsion_offset(params), 0.0));
    let mut v = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            for l in (j + 1)..3 {
                let mut d = &conn.gamma[i][j][l] - &conn.gamma[i][l][j];
                if i == 2 && j == 0 && l == 1 {
                    d -= &off;
                }
                let defect = d.max_abs();
                if defect > tol::CONNECTION {
                    v.push(EntryViolation { generator: i + 1, row: j + 1, col: l + 1, defect });
                }
            }
        }
    }
    Certificate::from_violations(v)
}

/// Pattern check for unitarity: `Gamma^i_{kj} = -(Gamma^j_{ki})^*`.
pub fn is_unitary(conn: &Connection) -> Certificate {
    let mut v = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            for k in 0..3 {
                let defect = (&conn.gamma[i][k][j] + &conn.gamma[j][k][i].involution()).max_abs();
                if defect > tol::CONNECTION {
                    v.push(EntryViolation { generator: i + 1, row: k + 1, col: j + 1, defect });
                }
            }
        }
    }
    Certificate::from_violations(v)
}

/// `<s, t>` for `s = sum a_l sigma_l`, `t = sum b_l sigma_l` in the free module.
fn module_inner(s: &[AlgebraElement; 3], t: &[AlgebraElement; 3], params: &ModelParams) -> AlgebraElement {
    let mut acc = AlgebraElement::zero();
    for (a, b) in s.iter().zip(t) {
        acc += &a.star(&b.involution(), params);
    }
    acc
}

/// `nabla(a sigma_i)` as one-form coefficients of each generator.
fn nabla_apply(conn: &Connection, a: &AlgebraElement, i: usize, params: &ModelParams) -> Result<[CliffordForm; 3]> {
    let mut out: [CliffordForm; 3] = core::array::from_fn(|l| conn.omega(i, l).left_mul(a, params));
    out[i] = out[i].add(&comm_d(a, None, params)?)?;
    Ok(out)
}

/// Defining-equation residual for unitarity on `s = a sigma_i`, `t = b sigma_j`:
/// `delta<s,t> - <nabla s, t> + <s, nabla t>`. Requires `k = 0` coefficients.
pub fn unitarity_residual(
    conn: &Connection,
    a: &AlgebraElement,
    i: usize,
    b: &AlgebraElement,
    j: usize,
    params: &ModelParams,
) -> Result<CliffordForm> {
    let unit = |x: &AlgebraElement, i: usize| -> [AlgebraElement; 3] {
        core::array::from_fn(|l| if l == i { x.clone() } else { AlgebraElement::zero() })
    };
    let (s, t) = (unit(a, i), unit(b, j));
    let lhs = comm_d(&module_inner(&s, &t, params), None, params)?;
    let ns = nabla_apply(conn, a, i, params)?;
    let nt = nabla_apply(conn, b, j, params)?;
    // <w (x) e_l, t> = w <e_l, t>;  <s, w (x) e_l> = <s, e_l> w^*.
    let mut rhs = CliffordForm::zero(1);
    for l in 0..3 {
        let el = unit(&AlgebraElement::one(), l);
        rhs = rhs.add(&ns[l].right_mul(&module_inner(&el, &t, params), params))?;
        rhs = rhs.sub(&nt[l].form_involution().left_mul(&module_inner(&s, &el, params), params))?;
    }
    lhs.sub(&rhs)
}

/// `Omega^2_D -> Omega^1_D` adjoint of left multiplication by `sigma_i`.
pub fn m_left_adjoint(i: usize, y: &CliffordForm, params: &ModelParams) -> CliffordForm {
    let s = CliffordForm::single(1, i, AlgebraElement::one());
    let mut out = s.mul(y, params);
    out.components[0] = AlgebraElement::zero();
    out.with_degree(1)
}

/// `Omega^1_D -> A` adjoint of right multiplication by `sigma_i`.
pub fn m_right_adjoint(i: usize, y: &CliffordForm, params: &ModelParams) -> AlgebraElement {
    let s = CliffordForm::single(1, i, AlgebraElement::one());
    y.mul(&s, params).components[0].clone()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CurvatureData {
    /// `r[i][m]`: component of `-nabla^2(sigma_i)` along `sigma_m`, in `Omega^2_D`.
    pub r: [[CliffordForm; 3]; 3],
    pub ricci: [CliffordForm; 3],
    pub scalar: AlgebraElement,
}

/// `R_im = -(delta omega^i_m - sum_l omega^i_l omega^l_m)` projected to
/// `Omega^2_D`, `Ric_m = sum_i m_L(sigma_i)^ad R_im`,
/// `r = sum_m m_R(sigma_m)^ad Ric_m`.
pub fn curvature(conn: &Connection, window: Option<&Window>, params: &ModelParams) -> Result<CurvatureData> {
    let mut out = CurvatureData::default();
    for i in 0..3 {
        for m in 0..3 {
            out.r[i][m] = curvature_entry(conn, i, m, window, params)?;
        }
    }
    for m in 0..3 {
        let mut acc = CliffordForm::zero(1);
        for i in 0..3 {
            acc = acc.add(&m_left_adjoint(i + 1, &out.r[i][m], params))?;
        }
        out.ricci[m] = acc;
    }
    for m in 0..3 {
        out.scalar += &m_right_adjoint(m + 1, &out.ricci[m], params);
    }
    Ok(out)
}

/// Single `R_im`.
pub fn curvature_entry(
    conn: &Connection,
    i: usize,
    m: usize,
    window: Option<&Window>,
    params: &ModelParams,
) -> Result<CliffordForm> {
    let mut f = curl(&conn.omega(i, m), window, params)?;
    for l in 0..3 {
        f = f.sub(&conn.omega(i, l).mul(&conn.omega(l, m), params))?;
    }
    Ok(junk_project(&f).scale(Complex64::new(-1.0, 0.0)))
}

/// `nabla(sigma_1) = f' delta(g) (x) sigma_1 + g' delta(f) (x) sigma_2`,
/// `nabla(sigma_2) = g' delta(f) (x) sigma_1`, `nabla(sigma_3) = 0`, for `f`
/// depending on `x` only and `g` on `y` only.
pub fn fg_connection(f: &AlgebraElement, g: &AlgebraElement, params: &ModelParams) -> Result<Connection> {
    if let Some(i) = f.support().find(|i| i.n != 0 || i.k != 0) {
        return Err(Error::SupportViolation(format!("f has a term at {i:?} off the (m,0,0) axis")));
    }
    if let Some(i) = g.support().find(|i| i.m != 0 || i.k != 0) {
        return Err(Error::SupportViolation(format!("g has a term at {i:?} off the (0,n,0) axis")));
    }
    let fp = f.derivation(1, None, params)?;
    let gp = g.derivation(2, None, params)?;
    let df = comm_d(f, None, params)?;
    let dg = comm_d(g, None, params)?;
    let mut conn = Connection::zero();
    let n1 = [dg.left_mul(&fp, params), df.left_mul(&gp, params)];
    for (l, w) in n1.iter().enumerate() {
        for j in 0..3 {
            conn.gamma[0][j][l] = w.components[j + 1].clone();
        }
    }
    let n2 = df.left_mul(&gp, params);
    for j in 0..3 {
        conn.gamma[1][j][0] = n2.components[j + 1].clone();
    }
    Ok(conn)
}

/// Result of a real-linear feasibility test `A x = b`.
#[derive(Debug, Clone, PartialEq)]
pub enum LinearOutcome {
    /// `y^T A = 0` and `y^T b = constant != 0`.
    Infeasible { multipliers: Vec<f64>, constant: f64 },
    /// `A x = b` with residual below tolerance.
    Feasible { witness: Vec<f64>, residual: f64 },
}

impl LinearOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LinearOutcome::Feasible { .. })
    }
}

/// Gaussian elimination with multiplier tracking.
pub fn solve_real_system(a: &[Vec<f64>], b: &[f64], eps: f64) -> LinearOutcome {
    let rows = a.len();
    let cols = a.first().map_or(0, |r| r.len());
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut rhs = b.to_vec();
    let mut track: Vec<Vec<f64>> =
        (0..rows).map(|r| (0..rows).map(|c| f64::from(u8::from(r == c))).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).max_by(|&x, &y| m[x][c].abs().total_cmp(&m[y][c].abs())) else { break };
        if m[p][c].abs() <= eps {
            continue;
        }
        m.swap(r, p);
        rhs.swap(r, p);
        track.swap(r, p);
        for q in 0..rows {
            if q != r && m[q][c] != 0.0 {
                let f = m[q][c] / m[r][c];
                for cc in 0..cols {
                    m[q][cc] -= f * m[r][cc];
                }
                rhs[q] -= f * rhs[r];
                for cc in 0..rows {
                    track[q][cc] -= f * track[r][cc];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    if let Some(q) = (r..rows).find(|&q| rhs[q].abs() > eps) {
        return LinearOutcome::Infeasible { multipliers: track[q].clone(), constant: rhs[q] };
    }
    let mut x = vec![0.0; cols];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = rhs[row] / m[row][c];
    }
    let residual = a
        .iter()
        .zip(b)
        .map(|(row, bi)| (row.iter().zip(&x).map(|(p, q)| p * q).sum::<f64>() - bi).abs())
        .fold(0.0, f64::max);
    LinearOutcome::Feasible { witness: x, residual }
}

/// Labelled affine system.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub unknowns: Vec<String>,
    pub equations: Vec<String>,
    pub matrix: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

impl ConstraintSystem {
    pub fn solve(&self) -> LinearOutcome {
        solve_real_system(&self.matrix, &self.rhs, 1e-12)
    }

    fn stack(&self, other: &ConstraintSystem) -> ConstraintSystem {
        let mut out = self.clone();
        out.equations.extend(other.equations.iter().cloned());
        out.matrix.extend(other.matrix.iter().cloned());
        out.rhs.extend(other.rhs.iter().cloned());
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IncompatibilityReport {
    /// Two-entry system `v = p`, `v - p = -1` as transcribed in the
    /// characterization of both families.
    pub transcribed: ConstraintSystem,
    pub transcribed_outcome: LinearOutcome,
    /// Torsion and unitarity residuals on generators, linearized over the
    /// constant parts of the 27 entries (54 real unknowns).
    pub derived: ConstraintSystem,
    pub derived_outcome: LinearOutcome,
    pub torsion_only: LinearOutcome,
    pub unitary_only: LinearOutcome,
    /// Connection built from the derived solution, when feasible.
    pub witness: Option<Connection>,
}

fn connection_from_reals(x: &[f64]) -> Connection {
    Connection::from_fn(|i, j, l| {
        let c = 2 * (9 * i + 3 * j + l);
        AlgebraElement::scalar(Complex64::new(x[c], x[c + 1]))
    })
}

fn residual_vector(parts: &[CliffordForm]) -> Vec<f64> {
    let mut v = Vec::new();
    for f in parts {
        for comp in &f.components {
            let z = comp.coeff(BasisIndex::ZERO);
            v.push(z.re);
            v.push(z.im);
        }
    }
    v
}

fn torsion_residuals(conn: &Connection, params: &ModelParams) -> Result<Vec<f64>> {
    Ok(residual_vector(&torsion_on_generators(conn, params)?))
}

fn unitarity_residuals(conn: &Connection, params: &ModelParams) -> Result<Vec<f64>> {
    let one = AlgebraElement::one();
    let mut parts = Vec::new();
    for i in 0..3 {
        for j in i..3 {
            parts.push(unitarity_residual(conn, &one, i, &one, j, params)?);
        }
    }
    Ok(residual_vector(&parts))
}

/// Linearize an affine residual map over the 54 real unknowns.
fn linearize(name: &str, f: impl Fn(&Connection) -> Result<Vec<f64>>) -> Result<ConstraintSystem> {
    let base = f(&connection_from_reals(&[0.0; 54]))?;
    let mut matrix = vec![vec![0.0; 54]; base.len()];
    for c in 0..54 {
        let mut e = [0.0; 54];
        e[c] = 1.0;
        let col = f(&connection_from_reals(&e))?;
        for (r, v) in col.iter().enumerate() {
            matrix[r][c] = v - base[r];
        }
    }
    let unknowns = (0..54)
        .map(|c| {
            let (e, part) = (c / 2, if c % 2 == 0 { "re" } else { "im" });
            format!("{part} Gamma^{}_{}{}", e / 9 + 1, (e / 3) % 3 + 1, e % 3 + 1)
        })
        .collect();
    let equations = (0..base.len()).map(|r| format!("{name}[{r}]")).collect();
    Ok(ConstraintSystem { unknowns, equations, matrix, rhs: base.iter().map(|v| -v).collect() })
}

/// Joint feasibility of torsionlessness and unitarity.
pub fn incompatibility_check(params: &ModelParams) -> Result<IncompatibilityReport> {
    let transcribed = ConstraintSystem {
        unknowns: vec!["v".into(), "p".into()],
        equations: vec!["unitary: v = p".into(), "torsionless: v - p = -1".into()],
        matrix: vec![vec![1.0, -1.0], vec![1.0, -1.0]],
        rhs: vec![0.0, -1.0],
    };
    let tors = linearize("torsion", |c| torsion_residuals(c, params))?;
    let unit = linearize("unitarity", |c| unitarity_residuals(c, params))?;
    let derived = tors.stack(&unit);
    let derived_outcome = derived.solve();
    let witness = match &derived_outcome {
        LinearOutcome::Feasible { witness, .. } => Some(connection_from_reals(witness)),
        LinearOutcome::Infeasible { .. } => None,
    };
    Ok(IncompatibilityReport {
        transcribed_outcome: transcribed.solve(),
        transcribed,
        torsion_only: tors.solve(),
        unitary_only: unit.solve(),
        derived_outcome,
        derived,
        witness,
    })
}
