use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::extremizers::ExtremizerSpec;

use super::{ExperimentConfig, FitResult};

/// One scale of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingRecord {
    pub k: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub log2_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extremizer: Option<ExtremizerSpec>,
    /// Quadrature resolutions, leakage, tails and side checks.
    pub diagnostics: BTreeMap<String, f64>,
}

impl ScalingRecord {
    pub fn new(k: u32, lhs: f64, rhs: f64) -> Self {
        Self { k, lhs, rhs, log2_ratio: (lhs / rhs).log2(), extremizer: None, diagnostics: BTreeMap::new() }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}

/// How the fitted slope is judged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SlopeCheck {
    AtLeast { bound: f64 },
    AtMost { bound: f64 },
    Within { center: f64, tolerance: f64 },
    /// Recorded only.
    None,
}

impl SlopeCheck {
    pub fn passes(&self, slope: f64) -> bool {
        match *self {
            Self::AtLeast { bound } => slope >= bound,
            Self::AtMost { bound } => slope <= bound,
            Self::Within { center, tolerance } => (slope - center).abs() <= tolerance,
            Self::None => true,
        }
    }
}

/// Records, fit and verdict of one sweep.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub records: Vec<ScalingRecord>,
    pub fit: FitResult,
    /// Slope predicted by the exponent functions for this experiment.
    pub predicted_slope: f64,
    pub check: SlopeCheck,
    pub passed: bool,
    pub warnings: Vec<String>,
}

/// Checks the trailer hash of a JSONL record file against its body.
pub fn verify_jsonl(text: &str) -> Result<bool> {
    let lines: Vec<&str> = text.lines().collect();
    let Some((last, body)) = lines.split_last() else {
        return Err(Error::Format("empty record file".into()));
    };
    let trailer: Value = serde_json::from_str(last).map_err(|e| Error::Format(format!("trailer line: {e}")))?;
    let Some(hash) = trailer.get("content_hash").and_then(Value::as_str) else {
        return Err(Error::Format("last line carries no content_hash".into()));
    };
    let mut joined = String::new();
    for l in body {
        joined.push_str(l);
        joined.push('\n');
    }
    Ok(sha256_hex(&joined) == hash)
}

pub fn code_version() -> &'static str {
    concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"))
}

fn sha256_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

impl ExperimentOutput {
    /// Lines of the JSONL body: header, one line per record, fit summary.
    fn body_lines(&self) -> Vec<String> {
        let mut lines = vec![json!({
            "type": "header",
            "config": self.config,
            "code_version": code_version(),
        })
        .to_string()];
        for r in &self.records {
            let mut v = serde_json::to_value(r).expect("records serialize");
            v.as_object_mut().expect("object").insert("type".into(), Value::from("record"));
            lines.push(v.to_string());
        }
        lines.push(
            json!({
                "type": "fit",
                "fit": self.fit,
                "predicted_slope": self.predicted_slope,
                "check": self.check,
                "passed": self.passed,
                "warnings": self.warnings,
            })
            .to_string(),
        );
        lines
    }

    /// SHA-256 of the JSONL body (all lines before the trailer).
    pub fn content_hash(&self) -> String {
        let mut body = String::new();
        for l in self.body_lines() {
            body.push_str(&l);
            body.push('\n');
        }
        sha256_hex(&body)
    }

    /// JSON lines: header, records, fit, then a trailer with the content hash.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for l in self.body_lines() {
            out.push_str(&l);
            out.push('\n');
        }
        out.push_str(&json!({ "type": "trailer", "content_hash": self.content_hash() }).to_string());
        out.push('\n');
        out
    }

    /// CSV mirror with the resolved config and content hash as comments.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# config={}", serde_json::to_string(&self.config).expect("config serializes"));
        let _ = writeln!(out, "# content_hash={}", self.content_hash());
        out.push_str("k,lhs,rhs,log2_ratio\n");
        for r in &self.records {
            let _ = writeln!(out, "{},{:e},{:e},{}", r.k, r.lhs, r.rhs, r.log2_ratio);
        }
        out
    }
}
