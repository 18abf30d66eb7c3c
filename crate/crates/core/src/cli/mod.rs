//! Batch front-end: each command reads a [`RunConfig`], validates it fully,
//! computes, and writes its files into the output directory.

pub mod config;
mod duhamel;
mod exponents;
pub mod format;
mod report;
mod solve;
mod sweep;

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub use config::{RunConfig, OUT_DIR_ENV};
pub use duhamel::cmd_duhamel_check;
pub use exponents::cmd_exponents;
pub use report::cmd_report;
pub use solve::cmd_solve;
pub use sweep::cmd_sweep;

use crate::error::Result;
use crate::exponents::{ExponentSet, Rational};
use crate::radial_transform::TransformPlan;
use format::{json_number, rational_json, round_floats, to_pretty};

/// How a command finished, from best to worst.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Status {
    Ok,
    /// Input outside the domain of the requested computation.
    Rejected,
    /// A declared tolerance was missed.
    ToleranceFailure,
    /// The fixed-point iteration did not converge.
    NonConvergence,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::Rejected => 1,
            Status::ToleranceFailure => 3,
            Status::NonConvergence => 4,
        }
    }
}

/// Result of a command: a status, human-readable summary lines for stdout,
/// and the files written.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub status: Status,
    pub summary: Vec<String>,
    pub files: Vec<PathBuf>,
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, contents)?;
        self.files.push(path);
        Ok(())
    }

    fn write_json(&mut self, name: &str, mut value: Value) -> Result<()> {
        round_floats(&mut value);
        self.write(name, &to_pretty(&value))
    }

    fn write_csv(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let to_io = |e: csv::Error| std::io::Error::other(e.to_string());
        w.write_record(header).map_err(to_io)?;
        for row in rows {
            w.write_record(row).map_err(to_io)?;
        }
        let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
        self.write(name, &String::from_utf8(bytes).expect("utf-8 csv"))
    }

    fn finish(self, status: Status, summary: Vec<String>) -> Outcome {
        Outcome { status, summary, files: self.files }
    }
}

fn exponents_json(exps: &ExponentSet) -> Value {
    let e = exps.as_f64();
    let pair = |q: &Rational, x: f64| json!({ "exact": rational_json(q), "value": json_number(x) });
    json!({
        "n": exps.n,
        "p": pair(&exps.p, e.p),
        "s0": pair(&exps.s0, e.s0),
        "q0": pair(&exps.q0, e.q0),
        "alpha0": pair(&exps.alpha0, e.alpha0),
        "q1": pair(&exps.q1, e.q1),
        "alpha1": pair(&exps.alpha1, e.alpha1),
    })
}

fn grid_json(plan: &TransformPlan) -> Value {
    let (r, k) = (plan.radial(), plan.spectral());
    json!({
        "dimension": plan.dim(),
        "nodes": r.len(),
        "radius": json_number(r.max()),
        "step": json_number(r.step()),
        "spectral_nodes": k.len(),
        "spectral_max": json_number(k.max()),
        "spectral_step": json_number(k.step()),
    })
}

/// Everything that can influence the numbers in a command's output.
fn manifest(command: &str, config: &RunConfig, extra: Value) -> Value {
    let mut m = json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "config": serde_json::to_value(config).expect("serializable config"),
    });
    if let (Value::Object(base), Value::Object(more)) = (&mut m, extra) {
        base.extend(more);
    }
    m
}
