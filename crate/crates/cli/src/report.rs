//! Summary of JSONL record files: hash check, fit table and re-rendered plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::Value;

use wpl_core::experiments::verify_jsonl;

use crate::svg::{render, Plot};
use crate::UsageError;

pub struct Entry {
    pub path: PathBuf,
    pub hash_ok: bool,
    pub passed: bool,
    pub row: String,
}

pub fn collect_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)
                .with_context(|| format!("listing {}", p.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    if out.is_empty() {
        return Err(UsageError("no .jsonl record files found".into()).into());
    }
    Ok(out)
}

fn field<'a>(v: &'a Value, key: &str, path: &Path) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| UsageError(format!("{}: missing `{key}`", path.display())).into())
}

/// Plot data and verdict from one record file.
pub fn read_record_file(path: &Path) -> Result<(Plot, Value, Value, bool)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let hash_ok = verify_jsonl(&text)?;
    let mut header = Value::Null;
    let mut fit = Value::Null;
    let (mut ks, mut ratios) = (Vec::new(), Vec::new());
    for line in text.lines() {
        let v: Value = serde_json::from_str(line).map_err(|e| UsageError(format!("{}: {e}", path.display())))?;
        match v.get("type").and_then(Value::as_str) {
            Some("header") => header = v,
            Some("record") => {
                ks.push(field(&v, "k", path)?.as_f64().unwrap_or(f64::NAN));
                ratios.push(field(&v, "log2_ratio", path)?.as_f64().unwrap_or(f64::NAN));
            }
            Some("fit") => fit = v,
            _ => {}
        }
    }
    let cfg = field(&header, "config", path)?.clone();
    let f = field(&fit, "fit", path)?;
    let plot = Plot {
        title: plot_title(&cfg),
        ks,
        ratios,
        slope: field(f, "slope", path)?.as_f64().unwrap_or(f64::NAN),
        intercept: field(f, "intercept", path)?.as_f64().unwrap_or(f64::NAN),
        predicted: field(&fit, "predicted_slope", path)?.as_f64().unwrap_or(f64::NAN),
    };
    Ok((plot, cfg, fit, hash_ok))
}

pub fn plot_title(cfg: &Value) -> String {
    let s = |k: &str| cfg.get(k).map(|v| v.to_string().trim_matches('"').to_string()).unwrap_or_default();
    format!("{} n={} p={} phase={} family={}", s("experiment"), s("n"), s("p"), s("phase"), s("extremizer"))
}

pub fn summarize(path: &Path) -> Result<Entry> {
    let (plot, cfg, fit, hash_ok) = read_record_file(path)?;
    std::fs::write(path.with_extension("svg"), render(&plot)).with_context(|| format!("writing plot for {}", path.display()))?;
    let passed = fit.get("passed").and_then(Value::as_bool).unwrap_or(false);
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let row = format!(
        "| {name} | {} | {} | {} | {:.4} | {:.4} | {} | {} |",
        cfg["experiment"].as_str().unwrap_or("?"),
        cfg["p"],
        cfg["extremizer"].as_str().unwrap_or("?"),
        plot.slope,
        plot.predicted,
        if passed { "pass" } else { "FAIL" },
        if hash_ok { "ok" } else { "MISMATCH" },
    );
    Ok(Entry { path: path.to_path_buf(), hash_ok, passed, row })
}

pub fn markdown(entries: &[Entry]) -> String {
    let mut out = String::from("# Experiment report\n\n");
    out.push_str("| file | experiment | p | family | slope | predicted | verdict | hash |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for e in entries {
        let _ = writeln!(out, "{}", e.row);
    }
    let failed = entries.iter().filter(|e| !e.passed || !e.hash_ok).count();
    let _ = writeln!(out, "\n{} of {} files pass with intact hashes.", entries.len() - failed, entries.len());
    out
}
