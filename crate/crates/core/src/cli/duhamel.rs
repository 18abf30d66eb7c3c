use num_complex::Complex64;
use serde_json::json;

use super::format::{json_number, sig9};
use super::sweep::SWEEP_HEADER;
use super::{exponents_json, grid_json, manifest, Outcome, Output, RunConfig, Status};
use crate::error::Result;
use crate::estimates_lab::{inhomogeneous_check, InhomogeneousRatios, Verdict};
use crate::exponents::{select_exponents, ExponentSet};
use crate::norms::SpaceTimeField;
use crate::radial_transform::TransformPlan;

const FAMILY: &str = "separable-bump";

fn time_bump(x: f64) -> f64 {
    let y = 2.0 * x - 1.0;
    if y.abs() < 1.0 {
        (-1.0 / (1.0 - y * y)).exp()
    } else {
        0.0
    }
}

struct Case {
    label: &'static str,
    mu: f64,
    ratios: InhomogeneousRatios,
}

/// `μ^a F(μ²τ, μr)` with `a` chosen so `‖|x|^{α1} F‖_{L^{q1'}}` is unchanged,
/// sampled at `steps + 1` equally spaced times.
fn forcing(
    config: &RunConfig,
    plan: &TransformPlan,
    exps: &ExponentSet,
    mu: f64,
    steps: usize,
) -> Result<SpaceTimeField> {
    let d = &config.duhamel;
    let e = exps.as_f64();
    let n = plan.dim() as f64;
    let a = e.alpha1 + (n + 2.0) / e.q1_conjugate();
    let scale = d.amplitude * mu.powf(a);
    let span = d.duration / (mu * mu);
    let times: Vec<f64> = (0..=steps).map(|k| span * k as f64 / steps as f64).collect();
    let w2 = d.width * d.width;
    SpaceTimeField::from_fn(plan.radial().clone(), times, |t, r| {
        let x = mu * r;
        Complex64::new(scale * time_bump(mu * mu * t / d.duration) * (-0.5 * x * x / w2).exp(), 0.0)
    })
}

fn relative_gap(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Inhomogeneous ratios for a separable forcing, with time-step and grid
/// refinement and parabolic rescaling as self-checks. Writes `duhamel.csv`
/// (same columns as the sweep) and `duhamel_manifest.json`.
pub fn cmd_duhamel_check(config: &RunConfig) -> Result<Outcome> {
    config.grid.validate()?;
    config.duhamel.validate()?;
    let params = config.problem_params()?;
    params.require_existence_range()?;
    let exps = select_exponents(&params, &config.problem.policy()?)?;
    let e = exps.as_f64();
    let d = &config.duhamel;
    let steps = (d.duration / d.time_step).round().max(1.0) as usize;
    let plan = TransformPlan::new(params.n, config.grid.nodes, config.grid.radius)?;

    let base = inhomogeneous_check(&plan, &forcing(config, &plan, &exps, 1.0, steps)?, &exps)?;
    let mut cases = vec![Case { label: FAMILY, mu: 1.0, ratios: base }];
    if d.refine {
        let fine = TransformPlan::new(params.n, 2 * config.grid.nodes, config.grid.radius)?;
        let ratios = inhomogeneous_check(&fine, &forcing(config, &fine, &exps, 1.0, 2 * steps)?, &exps)?;
        cases.push(Case { label: "separable-bump-refined", mu: 1.0, ratios });
    }
    for &mu in &d.dilations {
        let ratios = inhomogeneous_check(&plan, &forcing(config, &plan, &exps, mu, steps)?, &exps)?;
        cases.push(Case { label: FAMILY, mu, ratios });
    }

    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, c) in cases.iter().enumerate() {
        let gaps = (relative_gap(c.ratios.ratio_lq, base.ratio_lq), relative_gap(c.ratios.ratio_sup, base.ratio_sup));
        worst = worst.max(gaps.0).max(gaps.1);
        let verdict = |gap: f64, value: f64| {
            let ok = value.is_finite() && (i == 0 || gap < d.tolerance);
            if ok {
                Verdict::Pass
            } else {
                Verdict::Fail
            }
        };
        let common = [c.label.to_string(), sig9(d.width), sig9(d.duration), sig9(c.mu)];
        let mut lq = common.to_vec();
        lq.extend([
            sig9(e.q0),
            sig9(e.alpha0),
            "0".into(),
            sig9(c.ratios.ratio_lq),
            sig9(c.ratios.tail_share),
            verdict(gaps.0, c.ratios.ratio_lq).to_string(),
        ]);
        let mut sup = common.to_vec();
        sup.extend([
            "inf".into(),
            "0".into(),
            sig9(-e.s0),
            sig9(c.ratios.ratio_sup),
            "0".into(),
            verdict(gaps.1, c.ratios.ratio_sup).to_string(),
        ]);
        rows.push(lq);
        rows.push(sup);
    }
    let failures = rows.iter().filter(|r| r[9] == "fail").count();
    let status = if failures > 0 { Status::ToleranceFailure } else { Status::Ok };

    let mut out = Output::create(&config.output_dir)?;
    out.write_csv("duhamel.csv", &SWEEP_HEADER, &rows)?;
    out.write_json(
        "duhamel_manifest.json",
        manifest(
            "duhamel-check",
            config,
            json!({
                "grid": grid_json(&plan),
                "exponents": exponents_json(&exps),
                "time_samples": steps + 1,
                "rescaling_exponent": json_number(e.alpha1 + (params.n as f64 + 2.0) / e.q1_conjugate()),
            }),
        ),
    )?;
    let summary = vec![
        format!("ratio_lq={}", sig9(base.ratio_lq)),
        format!("ratio_sup={}", sig9(base.ratio_sup)),
        format!("tail_share={}", sig9(base.tail_share)),
        format!("max_relative_gap={}", sig9(worst)),
        format!("rows={} failures={failures}", rows.len()),
    ];
    Ok(out.finish(status, summary))
}
