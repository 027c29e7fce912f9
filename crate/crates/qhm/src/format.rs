//! File formats: algebra elements and forms as JSON, grid states as a raw
//! little-endian complex array with a JSON sidecar.

use std::path::{Path, PathBuf};

use qhm_core::algebra::AlgebraElement;
use qhm_core::forms::CliffordForm;
use qhm_core::repdef::GridState;
use qhm_core::{BasisIndex, Complex64, ModelParams};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsDoc {
    pub c: u32,
    pub hbar: f64,
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
}

impl From<&ModelParams> for ParamsDoc {
    fn from(p: &ModelParams) -> Self {
        ParamsDoc { c: p.c, hbar: p.hbar, mu: p.mu, nu: p.nu, alpha: p.alpha }
    }
}

impl ParamsDoc {
    pub fn to_params(self) -> Result<ModelParams, CliError> {
        ModelParams::new(self.c, self.hbar, self.mu, self.nu, self.alpha).map_err(|e| CliError::Config(e.to_string()))
    }
}

/// `{"params": {...}, "coeffs": [[m, n, k, re, im], ...]}` sorted by `(m, n, k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElementDoc {
    pub params: ParamsDoc,
    pub coeffs: Vec<(i64, i64, i64, f64, f64)>,
}

impl ElementDoc {
    pub fn new(a: &AlgebraElement, params: &ModelParams) -> Self {
        // BTreeMap iteration is already lexicographic in (m, n, k).
        let coeffs = a.iter().map(|(i, c)| (i.m, i.n, i.k, c.re, c.im)).collect();
        ElementDoc { params: params.into(), coeffs }
    }

    pub fn element(&self) -> AlgebraElement {
        self.coeffs.iter().map(|&(m, n, k, re, im)| (BasisIndex::new(m, n, k), Complex64::new(re, im))).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormComponents {
    #[serde(rename = "I")]
    pub identity: ElementDoc,
    pub s1: ElementDoc,
    pub s2: ElementDoc,
    pub s3: ElementDoc,
}

/// `{"degree": d, "components": {"I": element, "s1": ..., "s2": ..., "s3": ...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormDoc {
    pub degree: usize,
    pub components: FormComponents,
}

impl FormDoc {
    pub fn new(f: &CliffordForm, params: &ModelParams) -> Self {
        let [i, s1, s2, s3] = f.components.each_ref().map(|c| ElementDoc::new(c, params));
        FormDoc { degree: f.degree, components: FormComponents { identity: i, s1, s2, s3 } }
    }

    pub fn form(&self) -> CliffordForm {
        let c = &self.components;
        CliffordForm::new(self.degree, [c.identity.element(), c.s1.element(), c.s2.element(), c.s3.element()])
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|source| CliError::Json { path: path.into(), source })?;
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

pub fn read_element(path: &Path) -> Result<(AlgebraElement, ModelParams), CliError> {
    let doc: ElementDoc = read_json(path)?;
    Ok((doc.element(), doc.params.to_params()?))
}

/// Sidecar describing a `.bin` grid file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSidecar {
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "G_x")]
    pub gx: usize,
    #[serde(rename = "G_y")]
    pub gy: usize,
    #[serde(rename = "P")]
    pub p_max: u32,
}

fn sidecar_path(bin: &Path) -> PathBuf {
    bin.with_extension("json")
}

/// Writes `path` (samples as `re, im` little-endian `f64` pairs in
/// `(x, y, p)` row-major order) and `path` with extension `.json`.
pub fn write_grid(path: &Path, g: &GridState) -> Result<(), CliError> {
    let mut bytes = Vec::with_capacity(16 * g.samples.len());
    for z in &g.samples {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    std::fs::write(path, bytes).map_err(CliError::io(path))?;
    write_json(&sidecar_path(path), &GridSidecar { l: g.l, gx: g.gx, gy: g.gy, p_max: g.p_max })
}

pub fn read_grid(path: &Path) -> Result<GridState, CliError> {
    let side: GridSidecar = read_json(&sidecar_path(path))?;
    let bytes = std::fs::read(path).map_err(CliError::io(path))?;
    let mut g = GridState::zeros(side.l, side.gx, side.gy, side.p_max).map_err(|e| CliError::Config(e.to_string()))?;
    if bytes.len() != 16 * g.samples.len() {
        return Err(CliError::Config(format!(
            "{}: {} bytes, sidecar implies {}",
            path.display(),
            bytes.len(),
            16 * g.samples.len()
        )));
    }
    for (z, chunk) in g.samples.iter_mut().zip(bytes.chunks_exact(16)) {
        let re = f64::from_le_bytes(chunk[..8].try_into().expect("8 bytes"));
        let im = f64::from_le_bytes(chunk[8..].try_into().expect("8 bytes"));
        *z = Complex64::new(re, im);
    }
    Ok(g)
}
