use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde_json::Value;

use super::format::sig9;
use super::{Outcome, Status};
use crate::error::{Error, Result};

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn csv_summary(path: &Path, name: &str, lines: &mut Vec<String>) -> Result<()> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let headers = reader.headers().map_err(|e| Error::Config(e.to_string()))?.clone();
    let col = |h: &str| headers.iter().position(|x| x == h);
    let (Some(verdict), Some(ratio), Some(family)) = (col("verdict"), col("ratio"), col("family")) else {
        return Err(Error::Config(format!("{} lacks the sweep columns", path.display())));
    };
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut max_ratio: BTreeMap<String, f64> = BTreeMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Config(e.to_string()))?;
        *counts.entry(record[verdict].to_string()).or_default() += 1;
        if let Ok(r) = record[ratio].parse::<f64>() {
            let m = max_ratio.entry(record[family].to_string()).or_insert(f64::NEG_INFINITY);
            *m = m.max(r);
        }
    }
    for (v, c) in &counts {
        lines.push(format!("{name}.rows.{v}={c}"));
    }
    for (f, r) in &max_ratio {
        lines.push(format!("{name}.max_ratio.{f}={}", sig9(*r)));
    }
    Ok(())
}

fn field(v: &Value, path: &[&str]) -> String {
    let mut cur = v;
    for key in path {
        cur = &cur[*key];
    }
    match cur {
        Value::Number(n) => n.as_f64().map_or_else(|| n.to_string(), sig9),
        Value::Null => "none".into(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Summarizes whatever results `dir` holds, one `key=value` line each.
pub fn cmd_report(dir: &Path) -> Result<Outcome> {
    let mut lines = vec![format!("dir={}", dir.display())];
    let mut found = 0;
    let exps = dir.join("exponents.json");
    if exps.exists() {
        found += 1;
        let v = read_json(&exps)?;
        lines.push(format!("exponents.status={}", field(&v, &["status"])));
        for key in ["s0", "q0", "alpha0", "q1", "alpha1"] {
            if !v["exponents"][key].is_null() {
                lines.push(format!("exponents.{key}={}", field(&v, &["exponents", key, "value"])));
            }
        }
    }
    for name in ["sweep", "duhamel"] {
        let path = dir.join(format!("{name}.csv"));
        if path.exists() {
            found += 1;
            csv_summary(&path, name, &mut lines)?;
        }
    }
    let diag = dir.join("diagnostics.json");
    if diag.exists() {
        found += 1;
        let v = read_json(&diag)?;
        for key in ["status", "converged", "iterations", "max_contraction_ratio", "residual", "delta_star"] {
            lines.push(format!("solve.{key}={}", field(&v, &[key])));
        }
        lines.push(format!("solve.global_constant={}", field(&v, &["global_bound", "constant"])));
        lines.push(format!("solve.doubling_change={}", field(&v, &["horizon_doubling", "relative_change"])));
        lines.push(format!("solve.splitting_gap={}", field(&v, &["splitting", "relative_l2"])));
    }
    if found == 0 {
        return Err(Error::Config(format!("no results found in {}", dir.display())));
    }
    Ok(Outcome { status: Status::Ok, summary: lines, files: Vec::new() })
}
