//! Machine-readable run reports. Reports carry no timestamp, so identical
//! configurations produce byte-identical files.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::format::write_json;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// One measured quantity against its tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Reference value for two-sided checks.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    /// `measured <= tolerance`.
    pub fn at_most(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check { name: name.into(), measured, target: None, tolerance, pass: measured <= tolerance, note: None }
    }

    /// `|measured - target| <= tolerance`.
    pub fn near(name: impl Into<String>, measured: f64, target: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            target: Some(target),
            tolerance,
            pass: (measured - target).abs() <= tolerance,
            note: None,
        }
    }

    /// A yes/no property; `measured` is 1 when it holds.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            target: Some(1.0),
            tolerance: 0.0,
            pass: ok,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub config: BTreeMap<String, String>,
    pub checks: Vec<Check>,
    pub data: serde_json::Value,
}

impl Report {
    pub fn new(command: &str, cfg: &RunConfig) -> Self {
        Report {
            command: command.to_string(),
            version: VERSION.to_string(),
            config_hash: cfg.hash(),
            config: cfg.entries().clone(),
            checks: Vec::new(),
            data: serde_json::Value::Object(Default::default()),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn extend(&mut self, checks: impl IntoIterator<Item = Check>) {
        self.checks.extend(checks);
    }

    /// Stores `value` under `key` in the free-form data section.
    pub fn put<T: Serialize>(&mut self, key: &str, value: T) {
        let v = serde_json::to_value(value).unwrap_or(serde_json::Value::Null);
        if let serde_json::Value::Object(map) = &mut self.data {
            map.insert(key.to_string(), v);
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        write_json(path, self)
    }

    /// `PASS`/`FAIL` lines for the terminal.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let verdict = if c.pass { "PASS" } else { "FAIL" };
            match c.target {
                Some(t) => s.push_str(&format!(
                    "{verdict} {}: {:.6e} (target {t}, tol {:.1e})",
                    c.name, c.measured, c.tolerance
                )),
                None => s.push_str(&format!("{verdict} {}: {:.6e} <= {:.1e}", c.name, c.measured, c.tolerance)),
            }
            if let Some(n) = &c.note {
                s.push_str(&format!(" [{n}]"));
            }
            s.push('\n');
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_json() {
        let cfg = RunConfig::from_pairs(&[]).unwrap();
        let build = || {
            let mut r = Report::new("validate", &cfg);
            r.extend([Check::at_most("x", 1e-12, 1e-9), Check::near("y", 2.95, 3.0, 0.15)]);
            r.put("rows", vec![1, 2, 3]);
            serde_json::to_string(&r).unwrap()
        };
        assert_eq!(build(), build());
        assert!(!build().contains("time"));
    }

    #[test]
    fn verdicts() {
        assert!(Check::at_most("a", 0.5, 0.5).pass);
        assert!(!Check::at_most("a", f64::NAN, 0.5).pass);
        assert!(!Check::near("b", 3.2, 3.0, 0.15).pass);
        assert!(!Check::holds("c", false).pass);
        let cfg = RunConfig::from_pairs(&[]).unwrap();
        let mut r = Report::new("forms", &cfg);
        r.extend([Check::holds("c", true), Check::at_most("d", 2.0, 1.0).with_note("known")]);
        assert!(!r.passed());
        let s = r.summary();
        assert!(s.starts_with("PASS c") && s.contains("FAIL d") && s.contains("[known]"));
    }
}
