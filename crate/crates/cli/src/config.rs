//! TOML config loading with `key=value` overrides.

use std::path::Path;

use anyhow::{Context, Result};
use serde::de::DeserializeOwned;
use serde::Serialize;
use toml::{Table, Value};

use wpl_core::experiments::{ExperimentConfig, ExperimentKind, SuiteConfig};

use crate::UsageError;

fn read_table(path: Option<&Path>) -> Result<Table> {
    let Some(path) = path else {
        return Ok(Table::new());
    };
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    text.parse::<Table>()
        .map_err(|e| UsageError(format!("config {}: {e}", path.display())).into())
}

/// Parses the right-hand side as a TOML value, falling back to a bare string.
fn parse_value(raw: &str) -> Value {
    format!("v = {raw}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()))
}

fn apply_overrides(table: &mut Table, overrides: &[String]) -> Result<()> {
    for o in overrides {
        let Some((key, raw)) = o.split_once('=') else {
            return Err(UsageError(format!("override {o:?} is not key=value")).into());
        };
        let path: Vec<&str> = key.trim().split('.').collect();
        let (last, parents) = path.split_last().expect("split yields one item");
        let mut cur = &mut *table;
        for p in parents {
            cur = cur
                .entry(p.to_string())
                .or_insert_with(|| Value::Table(Table::new()))
                .as_table_mut()
                .ok_or_else(|| UsageError(format!("override {key}: `{p}` is not a section")))?;
        }
        cur.insert(last.to_string(), parse_value(raw.trim()));
    }
    Ok(())
}

/// Overlays `user` on `base`, recursing into sections.
fn merge(base: &mut Table, user: Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn resolve<T: Serialize + DeserializeOwned>(defaults: &T, user: Table) -> Result<T> {
    let mut base = Table::try_from(defaults).context("serializing defaults")?;
    merge(&mut base, user);
    base.try_into::<T>().map_err(|e| UsageError(format!("config: {}", e.message())).into())
}

/// Defaults of the named experiment, overlaid by the file and then the overrides.
pub fn load_experiment(path: Option<&Path>, overrides: &[String]) -> Result<ExperimentConfig> {
    let mut user = read_table(path)?;
    apply_overrides(&mut user, overrides)?;
    let kind = match user.get("experiment") {
        None => ExperimentKind::Sharpness,
        Some(Value::String(s)) => s.parse::<ExperimentKind>().map_err(|e| UsageError(format!("config field `experiment`: {e}")))?,
        Some(v) => return Err(UsageError(format!("config field `experiment`: expected a string, got {v}")).into()),
    };
    let cfg: ExperimentConfig = resolve(&ExperimentConfig::defaults_for(kind), user)?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_suite(path: Option<&Path>, overrides: &[String]) -> Result<SuiteConfig> {
    let mut user = read_table(path)?;
    apply_overrides(&mut user, overrides)?;
    resolve(&SuiteConfig::default(), user)
}

/// Reference page listing every default, one TOML block per experiment plus the suite.
pub fn defaults_reference() -> Result<String> {
    let mut out = String::from(
        "# Configuration defaults\n\nGenerated by `wpl experiment --print-defaults`. Any key may be set in the config file\nor overridden on the command line as `--set key=value`.\n",
    );
    for kind in ExperimentKind::ALL {
        let body = toml::to_string(&ExperimentConfig::defaults_for(kind))?;
        out.push_str(&format!("\n## {kind}\n\n```toml\n{body}```\n"));
    }
    let body = toml::to_string(&SuiteConfig::default())?;
    out.push_str(&format!("\n## suite\n\n```toml\n{body}```\n"));
    out.push_str(
        "\nUnset optional keys: `points` (chosen per k by the cell policy), `time_intervals`\n(max(64, 8 * 2^k)), `c` (1/2 for the full family, 1 otherwise), `drop_sector` (suite only).\n",
    );
    Ok(out)
}
