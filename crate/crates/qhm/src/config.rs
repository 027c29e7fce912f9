//! Run configuration: `key = value` lines, then command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use qhm_core::{ModelParams, Window};
use sha2::{Digest, Sha256};

use crate::error::CliError;

/// Every accepted key with its default.
const DEFAULTS: &[(&str, &str)] = &[
    ("c", "1"),
    ("hbar", "0.1"),
    ("mu", "1.4142135623730951"),
    ("nu", "1.7320508075688772"),
    ("alpha", "2"),
    ("window", "8,8,8"),
    ("grid", "64"),
    ("t", "1"),
    ("steps", "20"),
    ("seed", "7"),
    ("alphas", "1.5,2"),
    ("n_windows", "32,64"),
    ("path", "s"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub window: Window,
    /// Grid size for pointwise oracles.
    pub grid: usize,
    /// Weight of the `S` part of the Dirac operator.
    pub t: f64,
    /// Interval count for homotopy and flow grids.
    pub steps: usize,
    pub seed: u64,
    pub alphas: Vec<f64>,
    /// `n`-truncations compared by the index computation.
    pub n_windows: Vec<u32>,
    pub path: String,
    raw: BTreeMap<String, String>,
}

impl RunConfig {
    /// Defaults, then the file (if any), then `overrides` in order.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> Result<Self, CliError> {
        let mut raw: BTreeMap<String, String> = DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = file {
            let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
            for (k, v) in parse_lines(&text)? {
                insert(&mut raw, k, v)?;
            }
        }
        for (k, v) in overrides {
            insert(&mut raw, k.clone(), v.clone())?;
        }
        Self::from_raw(raw)
    }

    pub fn from_pairs(pairs: &[(&str, &str)]) -> Result<Self, CliError> {
        let owned: Vec<(String, String)> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Self::load(None, &owned)
    }

    fn from_raw(raw: BTreeMap<String, String>) -> Result<Self, CliError> {
        let get = |k: &str| raw[k].as_str();
        let params = ModelParams::new(
            parse(get("c"), "c")?,
            parse(get("hbar"), "hbar")?,
            parse(get("mu"), "mu")?,
            parse(get("nu"), "nu")?,
            parse(get("alpha"), "alpha")?,
        )
        .map_err(|e| CliError::Config(e.to_string()))?;
        let w: Vec<u32> = list(get("window"), "window")?;
        let window = match w.as_slice() {
            [m] => Window::cube(*m),
            [m, n, k] => Window::new(*m, *n, *k),
            _ => return Err(CliError::Config("window takes M,N,K or a single size".into())),
        };
        let alphas: Vec<f64> = list(get("alphas"), "alphas")?;
        if alphas.iter().any(|a| *a <= 1.0) {
            return Err(CliError::Config("alphas must exceed 1".into()));
        }
        let path = get("path").to_string();
        if path != "s" && path != "alpha" {
            return Err(CliError::Config(format!("path must be s or alpha, got {path}")));
        }
        let (grid, steps) = (parse(get("grid"), "grid")?, parse(get("steps"), "steps")?);
        if grid < 2 || steps < 1 {
            return Err(CliError::Config("grid must be at least 2 and steps at least 1".into()));
        }
        Ok(RunConfig {
            params,
            window,
            grid,
            t: parse(get("t"), "t")?,
            steps,
            seed: parse(get("seed"), "seed")?,
            alphas,
            n_windows: list(get("n_windows"), "n_windows")?,
            path,
            raw,
        })
    }

    /// Canonical `key=value` lines, sorted by key.
    pub fn canonical(&self) -> String {
        self.raw.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// SHA-256 of [`RunConfig::canonical`], lowercase hex.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.raw
    }
}

fn insert(raw: &mut BTreeMap<String, String>, k: String, v: String) -> Result<(), CliError> {
    match raw.get_mut(&k) {
        Some(slot) => {
            *slot = v;
            Ok(())
        }
        None => Err(CliError::Config(format!("unknown key `{k}`"))),
    }
}

/// `key = value` per line; `#` starts a comment.
pub fn parse_lines(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) =
            line.split_once('=').ok_or_else(|| CliError::Config(format!("line {}: expected key = value", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses `key=value` from the command line.
pub fn parse_override(s: &str) -> Result<(String, String), String> {
    s.split_once('=')
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .ok_or_else(|| format!("expected key=value, got `{s}`"))
}

fn parse<T: std::str::FromStr>(v: &str, key: &str) -> Result<T, CliError> {
    v.parse().map_err(|_| CliError::Config(format!("bad value `{v}` for {key}")))
}

fn list<T: std::str::FromStr>(v: &str, key: &str) -> Result<Vec<T>, CliError> {
    v.split(',').map(|s| parse(s.trim(), key)).collect()
}

/// Resolves an output path, creating the parent directory.
pub fn prepare_output(path: &Path) -> Result<PathBuf, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    }
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::from_pairs(&[]).unwrap();
        assert_eq!(c.params, ModelParams::default());
        assert_eq!(c.window, Window::cube(8));
        let d = RunConfig::from_pairs(&[("alpha", "3"), ("window", "2,4,6")]).unwrap();
        assert_eq!(d.params.alpha, 3.0);
        assert_eq!(d.window, Window::new(2, 4, 6));
        assert_ne!(c.hash(), d.hash());
        assert_eq!(c.hash(), RunConfig::from_pairs(&[]).unwrap().hash());
        assert_eq!(c.hash().len(), 64);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(RunConfig::from_pairs(&[("bogus", "1")]), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::from_pairs(&[("alpha", "0.5")]), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::from_pairs(&[("window", "1,2")]), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::from_pairs(&[("path", "x")]), Err(CliError::Config(_))));
        assert!(matches!(RunConfig::from_pairs(&[("steps", "0")]), Err(CliError::Config(_))));
        assert!(parse_lines("alpha 2").is_err());
        assert!(parse_override("alpha").is_err());
    }

    #[test]
    fn file_lines() {
        let v = parse_lines("# run\nalpha = 4  # shifted\n\nwindow=3\n").unwrap();
        assert_eq!(v, vec![("alpha".into(), "4".into()), ("window".into(), "3".into())]);
    }
}
