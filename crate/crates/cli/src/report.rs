//! Spec loading, run metadata and shared formatting.

use std::collections::BTreeMap;
use std::path::Path;

use hilbert_geometry::finsler::DifferenceSteps;
use hilbert_geometry::spec_file::{BodySpec, SpecError};
use hilbert_geometry::ConvexBody;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{CliError, Format, Status};

pub struct LoadedSpec {
    pub path: String,
    pub sha256: String,
    pub body: ConvexBody,
}

impl LoadedSpec {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let path = path.ok_or_else(|| CliError::Config("missing --spec".into()))?;
        let shown = path.display().to_string();
        let bytes = std::fs::read(path).map_err(|source| SpecError::Io { path: shown.clone(), source })?;
        let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("{shown}: {e}")))?;
        let body = BodySpec::from_toml(text)?.build().map_err(SpecError::from)?;
        Ok(Self { path: shown, sha256: hex::encode(Sha256::digest(&bytes)), body })
    }
}

/// Provenance embedded in every output. Thread count is left out on purpose:
/// it never changes results, and outputs stay byte-identical across it.
#[derive(Debug, Serialize)]
pub struct Meta {
    pub tool: &'static str,
    pub version: &'static str,
    pub library_version: &'static str,
    pub command: String,
    pub spec: String,
    pub spec_sha256: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<DifferenceSteps>,
}

impl Meta {
    pub fn new(command: &str, spec: &LoadedSpec, seed: u64) -> Self {
        Self {
            tool: "hilbert",
            version: env!("CARGO_PKG_VERSION"),
            library_version: hilbert_geometry::VERSION,
            command: command.to_owned(),
            spec: spec.path.clone(),
            spec_sha256: spec.sha256.clone(),
            seed,
            samples: None,
            tolerances: BTreeMap::new(),
            steps: None,
        }
    }

    /// `key: value` lines, each prefixed (`# ` for tabular output).
    pub fn header(&self, prefix: &str) -> String {
        let mut lines = vec![
            format!("{} {} (hilbert-geometry {})", self.tool, self.version, self.library_version),
            format!("command: {}", self.command),
            format!("spec: {} sha256={}", self.spec, self.spec_sha256),
            format!("seed: {}", self.seed),
        ];
        if let Some(n) = self.samples {
            lines.push(format!("samples: {n}"));
        }
        for (k, v) in &self.tolerances {
            lines.push(format!("tol.{k}: {v:e}"));
        }
        if let Some(steps) = &self.steps {
            let value = serde_json::to_value(steps).expect("steps serialize");
            let map = value.as_object().expect("steps are a struct");
            let parts: Vec<String> = map.iter().map(|(k, v)| format!("{k}={v}")).collect();
            lines.push(format!("steps: {}", parts.join(" ")));
        }
        lines.iter().map(|l| format!("{prefix}{l}\n")).collect()
    }
}

/// What a command produced: the full text, and the summary printed when the
/// text goes to `--out`.
pub struct Output {
    pub text: String,
    pub summary: String,
    pub status: Status,
}

#[derive(Serialize)]
struct Document<'a, T: Serialize> {
    meta: &'a Meta,
    #[serde(flatten)]
    data: T,
}

pub fn structured<T: Serialize>(meta: &Meta, data: T) -> String {
    let mut s = serde_json::to_string_pretty(&Document { meta, data }).expect("output serializes");
    s.push('\n');
    s
}

/// 12 significant digits, as used in tabular output.
pub fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

pub fn point(p: &[f64], decimals: usize) -> String {
    let parts: Vec<String> = p.iter().map(|c| format!("{c:.decimals$}")).collect();
    format!("({})", parts.join(", "))
}

/// Indexed column names `name_0, name_1, ...`.
pub fn columns(name: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{name}_{i}")).collect()
}

pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Assembles the text for one format from its three renderings.
pub fn render(format: Format, meta: &Meta, human: String, tabular: String, structured_text: String) -> String {
    match format {
        Format::Human => meta.header("") + &human,
        Format::Tabular => meta.header("# ") + &tabular,
        Format::Structured => structured_text,
    }
}
