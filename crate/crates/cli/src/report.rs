//! Machine-readable results and the text report derived from them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use homfit_core::estimation::{FitResult, IntervalMethod, ObjectiveKind};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::AnalysisConfig;
use crate::CliError;

pub const TOOL: &str = "homfit";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterRecord {
    pub name: String,
    pub unit: String,
    pub value: f64,
    pub free: bool,
    pub ci95_lower: Option<f64>,
    pub ci95_upper: Option<f64>,
    pub interval_method: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveRecord {
    pub kind: String,
    pub value: f64,
    /// Divided by `n_bins - n_free`.
    pub normalized: f64,
    pub n_bins: usize,
    pub n_free: usize,
    pub skipped_bins: usize,
    pub n_starts: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub tool_version: String,
    pub seed: u64,
    pub config_sha256: String,
    pub config: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub pipeline: String,
    /// Keyed by parameter name with its unit appended.
    pub parameters: BTreeMap<String, ParameterRecord>,
    pub objectives: BTreeMap<String, ObjectiveRecord>,
    pub derived: BTreeMap<String, Value>,
    /// Structured inputs for downstream subcommands.
    pub details: BTreeMap<String, Value>,
    /// Role to file name inside the output directory.
    pub artifacts: BTreeMap<String, String>,
    pub provenance: Provenance,
}

/// Suffix of a key holding a quantity in `unit`.
pub fn unit_suffix(unit: &str) -> String {
    match unit {
        "" | "a.u." => String::new(),
        "1/ns" => "_per_ns".into(),
        "counts/bin" => "_counts_per_bin".into(),
        u => format!("_{}", u.to_lowercase().replace('/', "_per_")),
    }
}

pub fn key(name: &str, unit: &str) -> String {
    format!("{name}{}", unit_suffix(unit))
}

/// Parameters of a fit, prefixed when several fits share a report.
pub fn parameter_records(fit: &FitResult, prefix: &str) -> BTreeMap<String, ParameterRecord> {
    fit.parameters
        .iter()
        .map(|p| {
            let iv = p.interval.as_ref();
            (
                format!("{prefix}{}", key(&p.name, &p.unit)),
                ParameterRecord {
                    name: p.name.clone(),
                    unit: p.unit.clone(),
                    value: p.value,
                    free: p.free,
                    ci95_lower: iv.map(|i| i.lower),
                    ci95_upper: iv.map(|i| i.upper),
                    interval_method: iv.map(|i| {
                        match i.method {
                            IntervalMethod::Curvature => "curvature",
                            IntervalMethod::Profile => "profile",
                        }
                        .to_string()
                    }),
                },
            )
        })
        .collect()
}

pub fn objective_record(fit: &FitResult) -> ObjectiveRecord {
    ObjectiveRecord {
        kind: match fit.objective_kind {
            ObjectiveKind::Mle => "chi2_mle",
            ObjectiveKind::Ls => "chi2_ls",
        }
        .into(),
        value: fit.objective,
        normalized: fit.chi2_normalized,
        n_bins: fit.n,
        n_free: fit.nu,
        skipped_bins: fit.skipped_bins,
        n_starts: fit.n_starts,
        converged: fit.converged,
    }
}

/// A fit without its per-bin model vector, which goes to a CSV instead.
pub fn compact_fit(fit: &FitResult) -> FitResult {
    FitResult {
        fitted: vec![],
        ..fit.clone()
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn detail<T: DeserializeOwned>(&self, name: &str, path: &Path) -> Result<T, CliError> {
        let v = self
            .details
            .get(name)
            .ok_or_else(|| CliError::Input(format!("{}: result has no `{name}` entry", path.display())))?;
        serde_json::from_value(v.clone())
            .map_err(|e| CliError::Input(format!("{}: `{name}` is malformed: {e}", path.display())))
    }

    pub fn derived_f64(&self, name: &str, path: &Path) -> Result<f64, CliError> {
        self.derived
            .get(name)
            .and_then(Value::as_f64)
            .ok_or_else(|| CliError::Input(format!("{}: result has no numeric `{name}`", path.display())))
    }
}

pub fn read_result(path: &Path) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        msg: e.to_string(),
    })
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6}"),
            _ => n.to_string(),
        },
        Value::String(s) => s.clone(),
        Value::Null => "n/a".into(),
        other => other.to_string(),
    }
}

/// Human-readable report, built from the JSON form of the result.
pub fn render_text(result: &Value) -> String {
    let mut s = String::new();
    let get = |k: &str| result.get(k).cloned().unwrap_or(Value::Null);
    let _ = writeln!(s, "{TOOL} {}", scalar(&get("pipeline")));
    if let Some(params) = result.get("parameters").and_then(Value::as_object).filter(|m| !m.is_empty()) {
        let _ = writeln!(s, "\nparameters");
        for (k, p) in params {
            let v = scalar(&p["value"]);
            let ci = match (&p["ci95_lower"], &p["ci95_upper"]) {
                (Value::Null, _) | (_, Value::Null) => String::new(),
                (lo, hi) => format!("  [{}, {}]", scalar(lo), scalar(hi)),
            };
            let fixed = if p["free"] == Value::Bool(false) { "  (fixed)" } else { "" };
            let _ = writeln!(s, "  {k:<32}{v:>16}{ci}{fixed}");
        }
    }
    if let Some(obj) = result.get("objectives").and_then(Value::as_object).filter(|m| !m.is_empty()) {
        let _ = writeln!(s, "\nobjectives");
        for (k, o) in obj {
            let _ = writeln!(
                s,
                "  {k:<32}{} = {}  normalized {}  ({} bins, {} free)",
                scalar(&o["kind"]),
                scalar(&o["value"]),
                scalar(&o["normalized"]),
                scalar(&o["n_bins"]),
                scalar(&o["n_free"])
            );
        }
    }
    if let Some(d) = result.get("derived").and_then(Value::as_object).filter(|m| !m.is_empty()) {
        let _ = writeln!(s, "\nderived");
        for (k, v) in d {
            let _ = writeln!(s, "  {k:<32}{}", scalar(v));
        }
    }
    if let Some(a) = result.get("artifacts").and_then(Value::as_object).filter(|m| !m.is_empty()) {
        let _ = writeln!(s, "\nfiles");
        for (k, v) in a {
            let _ = writeln!(s, "  {k:<32}{}", scalar(v));
        }
    }
    let p = get("provenance");
    let _ = writeln!(
        s,
        "\nprovenance\n  version {}  seed {}\n  config sha256 {}",
        scalar(&p["tool_version"]),
        scalar(&p["seed"]),
        scalar(&p["config_sha256"])
    );
    s
}
