//! The eight `qhm` subcommands. Each returns a report and writes its table
//! or JSON artifact; the caller writes the report and maps the verdict to an
//! exit code.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use qhm_core::dirac::{DiracBlocks, MatrixElement};
use qhm_core::ktheory::Perturbation;
use serde_json::json;

use crate::config::{prepare_output, RunConfig};
use crate::error::CliError;
use crate::format::{read_element, write_json};
use crate::parallel;
use crate::report::Report;
use crate::suites::{self, Outcome};

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Validate,
    Spectrum,
    Weyl,
    /// An element file, or one of the presets `phi100`, `diag10`.
    Dixmier {
        element: Option<PathBuf>,
        preset: String,
    },
    Forms,
    /// Coefficient files for `f` and `g`; `cos 2 pi x` and `sin 2 pi y` when absent.
    Curvature {
        f: Option<PathBuf>,
        g: Option<PathBuf>,
    },
    Index,
    Homotopy,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Spectrum => "spectrum",
            Command::Weyl => "weyl",
            Command::Dixmier { .. } => "dixmier",
            Command::Forms => "forms",
            Command::Curvature { .. } => "curvature",
            Command::Index => "index",
            Command::Homotopy => "homotopy",
        }
    }

    /// Artifact written next to the report, if the command has one.
    pub fn default_out(&self) -> Option<&'static str> {
        match self {
            Command::Spectrum => Some("spectrum.csv"),
            Command::Weyl => Some("weyl.csv"),
            Command::Curvature { .. } => Some("curvature.json"),
            Command::Index => Some("index.json"),
            Command::Homotopy => Some("homotopy.csv"),
            _ => None,
        }
    }
}

fn absorb(report: &mut Report, key: &str, o: Outcome) {
    report.extend(o.checks);
    report.put(key, o.data);
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let path = prepare_output(path)?;
    std::fs::write(&path, text).map_err(CliError::io(&path))
}

/// Runs `cmd`; `out` overrides the artifact path.
pub fn run(cmd: &Command, cfg: &RunConfig, out: Option<&Path>) -> Result<Report, CliError> {
    let mut report = Report::new(cmd.name(), cfg);
    let artifact = out.map(Path::to_path_buf).or_else(|| cmd.default_out().map(PathBuf::from));
    let p = cfg.params;
    match cmd {
        Command::Validate => {
            absorb(&mut report, "structure_constants", suites::structure_constants(&p, 50, cfg.grid, cfg.seed)?);
            absorb(&mut report, "algebra_identities", suites::algebra_identities(&p, 2));
            absorb(&mut report, "commutant", suites::weaver(&p, cfg.seed)?);
            absorb(&mut report, "connections", suites::connections(&p, 10, cfg.seed)?);
        }
        Command::Spectrum => {
            let d = DiracBlocks::build(p, cfg.window, cfg.t)?;
            let rep = parallel::eigensolve(&d)?;
            let mut csv = String::from("lambda,m,k,slot\n");
            for e in &rep.eigenvalues {
                let _ = writeln!(csv, "{},{},{},{}", e.value, e.m, e.k, e.slot);
            }
            if cfg.t == 0.0 {
                report.extend([suites::closed_form_spectrum(&d)?]);
            }
            report.put("eigenvalues", rep.len());
            if let Some(path) = &artifact {
                write_text(path, &csv)?;
            }
        }
        Command::Weyl => {
            let d = DiracBlocks::build(p, cfg.window, cfg.t)?;
            let o = suites::weyl(&d, 40)?;
            let mut csv = String::from("Lambda,N\n");
            if let Some(rows) = o.data["counting"].as_array() {
                for r in rows {
                    let _ = writeln!(csv, "{},{}", r[0], r[1]);
                }
            }
            absorb(&mut report, "weyl", o);
            if let Some(path) = &artifact {
                write_text(path, &csv)?;
            }
        }
        Command::Dixmier { element, preset } => {
            let (a, expect, params) = match element {
                Some(path) => {
                    let (a, fp) = read_element(path)?;
                    if fp != p {
                        return Err(CliError::Config(format!(
                            "{}: element parameters differ from the run configuration",
                            path.display()
                        )));
                    }
                    (MatrixElement::scalar(a), None, fp)
                }
                None => {
                    let a = suites::dixmier_preset(preset)
                        .ok_or_else(|| CliError::Config(format!("unknown preset `{preset}` (phi100, diag10)")))?;
                    (a, Some(preset.as_str()), p)
                }
            };
            let d = DiracBlocks::build(params, cfg.window, cfg.t)?;
            absorb(&mut report, "dixmier", suites::dixmier(&a, &d, expect)?);
        }
        Command::Forms => absorb(&mut report, "junk", suites::junk(&p, cfg.seed)?),
        Command::Curvature { f, g } => {
            let (df, dg) = suites::default_fg();
            let load = |path: &Option<PathBuf>, fallback| match path {
                Some(path) => read_element(path).map(|(a, _)| a),
                None => Ok(fallback),
            };
            let (f, g) = (load(f, df)?, load(g, dg)?);
            let (o, _) = suites::curvature_fg(&f, &g, &p, &cfg.alphas, 100, cfg.seed)?;
            if let Some(path) = &artifact {
                write_json(&prepare_output(path)?, &o.data)?;
            }
            report.extend(o.checks);
            absorb(&mut report, "connections", suites::connections(&p, 10, cfg.seed)?);
        }
        Command::Index => {
            let (o, _) = suites::index(&p, cfg.window, &cfg.n_windows, &cfg.alphas, cfg.steps)?;
            if let Some(path) = &artifact {
                write_json(&prepare_output(path)?, &o.data)?;
            }
            absorb(&mut report, "index", o);
        }
        Command::Homotopy => {
            let kind = suites::perturbation(&cfg.path).unwrap_or(Perturbation::SPart);
            let d = DiracBlocks::build(p, cfg.window, 0.0)?;
            let (o, rows) = suites::homotopy(&d, kind, cfg.steps + 1)?;
            let mut csv = String::from("s,t,deviation,bound\n");
            for r in &rows {
                let _ = writeln!(csv, "{},{},{},{}", r.s, r.t, r.deviation, r.bound);
            }
            absorb(&mut report, "homotopy", o);
            report.put("rows", rows.len());
            if let Some(path) = &artifact {
                write_text(path, &csv)?;
            }
        }
    }
    if let Some(path) = &artifact {
        report.put("artifact", json!(path.display().to_string()));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_csv_and_closed_form() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("s.csv");
        let cfg = RunConfig::from_pairs(&[("t", "0"), ("window", "2,3,2")]).unwrap();
        let r = run(&Command::Spectrum, &cfg, Some(&out)).unwrap();
        assert!(r.passed());
        assert_eq!(r.checks.len(), 1);
        let text = std::fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("lambda,m,k,slot"));
        assert_eq!(lines.count(), 5 * 5 * 14);
    }

    #[test]
    fn dixmier_rejects_bad_preset_and_params() {
        let cfg = RunConfig::from_pairs(&[("window", "3")]).unwrap();
        let bad = Command::Dixmier { element: None, preset: "nope".into() };
        assert!(matches!(run(&bad, &cfg, None), Err(CliError::Config(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        let other = cfg.params.with_alpha(3.0);
        let doc = crate::format::ElementDoc::new(&qhm_core::algebra::AlgebraElement::one(), &other);
        write_json(&path, &doc).unwrap();
        let cmd = Command::Dixmier { element: Some(path), preset: String::new() };
        assert!(matches!(run(&cmd, &cfg, None), Err(CliError::Config(_))));
    }

    #[test]
    fn homotopy_table() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("h.csv");
        let cfg = RunConfig::from_pairs(&[("window", "2,5,2"), ("steps", "4"), ("path", "alpha")]).unwrap();
        let r = run(&Command::Homotopy, &cfg, Some(&out)).unwrap();
        assert!(r.passed(), "{}", r.summary());
        assert_eq!(std::fs::read_to_string(&out).unwrap().lines().count(), 5);
    }
}
