use serde_json::{json, Value};

use super::format::{rational_json, sig9};
use super::{exponents_json, manifest, Outcome, Output, RunConfig, Status};
use crate::error::{Error, Result};
use crate::exponents::{select_exponents, to_f64, window_inequality, ExponentSet, Rational};

fn exact_and_value(q: &Rational) -> String {
    format!("{q} ({})", sig9(to_f64(q)))
}

fn report_lines(exps: &ExponentSet) -> Vec<String> {
    let mut lines = vec![
        "status=ok".to_string(),
        format!("n={}", exps.n),
        format!("p={}", exact_and_value(&exps.p)),
        format!("s0={}", exact_and_value(&exps.s0)),
        format!("q0={}", exact_and_value(&exps.q0)),
        format!("alpha0={}", exact_and_value(&exps.alpha0)),
        format!("q1={}", exact_and_value(&exps.q1)),
        format!("alpha1={}", exact_and_value(&exps.alpha1)),
        format!("q1_conjugate={}", exact_and_value(&exps.q1_conjugate())),
        format!("two_over_q0={}", exact_and_value(&exps.two_over_q0())),
    ];
    if let Ok((lo, hi)) = ExponentSet::window(exps.n, &exps.p) {
        lines.push(format!(
            "window={} < 2/q0 = {} < {}",
            exact_and_value(&lo),
            exact_and_value(&exps.two_over_q0()),
            exact_and_value(&hi)
        ));
    }
    for f in exps.facts() {
        lines.push(format!(
            "fact.{}={} {} {} [{}]",
            f.name,
            exact_and_value(&f.lhs),
            f.relation,
            exact_and_value(&f.rhs),
            if f.holds() { "holds" } else { "FAILS" }
        ));
    }
    lines
}

fn facts_json(exps: &ExponentSet) -> Value {
    Value::Array(
        exps.facts()
            .iter()
            .map(|f| {
                json!({
                    "name": f.name,
                    "lhs": rational_json(&f.lhs),
                    "relation": f.relation.to_string(),
                    "rhs": rational_json(&f.rhs),
                    "holds": f.holds(),
                })
            })
            .collect(),
    )
}

/// Exact exponent report: `exponents.txt` (one `key=value` fact per line) and
/// `exponents.json` (rationals as numerator/denominator pairs).
///
/// Inputs outside the existence range or failing the window inequality give a
/// `status=rejected` report naming the violated condition.
pub fn cmd_exponents(config: &RunConfig) -> Result<Outcome> {
    let params = config.problem_params()?;
    let policy = config.problem.policy()?;
    let mut out = Output::create(&config.output_dir)?;
    let selected = params.require_existence_range().and_then(|_| select_exponents(&params, &policy));
    let (status, lines, record) = match selected {
        Ok(exps) => {
            let lines = report_lines(&exps);
            let mut record = json!({ "status": "ok", "exponents": exponents_json(&exps), "facts": facts_json(&exps) });
            if let Ok((lo, hi)) = ExponentSet::window(exps.n, &exps.p) {
                record["window"] = json!({ "lower": rational_json(&lo), "upper": rational_json(&hi) });
            }
            (Status::Ok, lines, record)
        }
        Err(err @ (Error::Domain(_) | Error::Inequality(_))) => {
            let mut lines = vec![
                "status=rejected".to_string(),
                format!("n={}", params.n),
                format!("p={}", exact_and_value(&params.p)),
                format!("reason={err}"),
            ];
            let mut record = json!({ "status": "rejected", "n": params.n, "p": rational_json(&params.p), "reason": err.to_string() });
            if let Ok(ineq) = window_inequality(params.n, &params.p) {
                let failing: Vec<String> = ineq.failing.iter().map(|b| b.to_string()).collect();
                lines.push(format!(
                    "window_inequality=max({}, {}) < {} [{}]",
                    exact_and_value(&ineq.reciprocal),
                    exact_and_value(&ineq.decay),
                    exact_and_value(&ineq.upper),
                    if ineq.holds() { "holds".to_string() } else { format!("FAILS: {}", failing.join("; ")) }
                ));
                record["window_inequality"] = json!({
                    "reciprocal": rational_json(&ineq.reciprocal),
                    "decay": rational_json(&ineq.decay),
                    "upper": rational_json(&ineq.upper),
                    "failing": failing,
                });
            }
            (Status::Rejected, lines, record)
        }
        Err(other) => return Err(other),
    };
    let mut text = lines.join("\n");
    text.push('\n');
    out.write("exponents.txt", &text)?;
    out.write_json("exponents.json", record)?;
    out.write_json("exponents_manifest.json", manifest("exponents", config, json!({})))?;
    Ok(out.finish(status, lines))
}
