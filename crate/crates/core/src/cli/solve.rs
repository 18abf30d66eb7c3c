use num_complex::Complex64;
use serde_json::{json, Value};

use super::format::{json_number, sig9};
use super::{exponents_json, grid_json, manifest, Outcome, Output, RunConfig, Status};
use crate::error::Result;
use crate::estimates_lab::DataFamily;
use crate::exponents::{select_exponents, ExponentSet, ProblemParams};
use crate::norms::{sobolev_norm, sobolev_norms, SpaceTimeField};
use crate::radial_transform::{RadialProfile, TransformPlan};
use crate::solver::{picard_solve, sample_lipschitz_constant, splitting_solve, verify_global_bound, SolverConfig};

const CONTRACTION_TARGET: f64 = 0.5;

struct Problem<'a> {
    plan: &'a TransformPlan,
    params: &'a ProblemParams,
    exps: &'a ExponentSet,
    shape: &'a RadialProfile,
    shape_norm: f64,
}

impl Problem<'_> {
    fn data(&self, norm: f64) -> RadialProfile {
        if norm == 0.0 {
            RadialProfile::zeros(self.plan.radial().clone())
        } else {
            self.shape.scaled(Complex64::new(norm / self.shape_norm, 0.0))
        }
    }

    /// Converged with every contraction ratio below the target.
    fn contracts(&self, solver: &SolverConfig, delta: f64) -> Result<bool> {
        let cfg = SolverConfig { delta, ..solver.clone() };
        let (_, diag) = picard_solve(self.plan, &self.data(delta), self.params, self.exps, &cfg)?;
        let first = diag.distances.first().copied().unwrap_or(0.0);
        Ok(diag.converged && diag.max_ratio(first).is_none_or(|r| r < CONTRACTION_TARGET))
    }

    /// Largest data norm found to contract, by doubling then geometric bisection.
    fn bisect_delta(&self, solver: &SolverConfig, steps: usize) -> Result<f64> {
        let mut lo = solver.delta;
        let mut shrinks = 0;
        while !self.contracts(solver, lo)? {
            lo *= 0.5;
            shrinks += 1;
            if shrinks > 20 {
                return Ok(0.0);
            }
        }
        let mut hi = 2.0 * lo;
        let mut grows = 0;
        while self.contracts(solver, hi)? {
            lo = hi;
            hi *= 2.0;
            grows += 1;
            if grows > 30 {
                return Ok(lo);
            }
        }
        for _ in 0..steps {
            let mid = (lo * hi).sqrt();
            if self.contracts(solver, mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

fn l2_gap(a: &RadialProfile, b: &RadialProfile) -> Result<f64> {
    let diff = a.sub(b)?.l2_norm();
    let base = a.l2_norm();
    Ok(if base == 0.0 { diff } else { diff / base })
}

fn nearest_index(times: &[f64], t: f64) -> usize {
    times.iter().enumerate().min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs())).map_or(0, |(i, _)| i)
}

fn timeseries(plan: &TransformPlan, u: &SpaceTimeField, sigma: f64) -> Result<Vec<Vec<String>>> {
    let sob = sobolev_norms(plan, u, sigma)?;
    Ok(u.times()
        .iter()
        .zip(u.profiles())
        .zip(sob)
        .map(|((t, p), s)| vec![sig9(*t), sig9(p.l2_norm()), sig9(s)])
        .collect())
}

/// Full small-data pipeline: exponents, data synthesis, Picard iteration,
/// global bound, and the optional horizon-doubling, splitting and δ-search
/// checks. Writes `solve_manifest.json`, `timeseries.csv` and
/// `diagnostics.json`.
pub fn cmd_solve(config: &RunConfig) -> Result<Outcome> {
    let s = &config.solve;
    s.validate()?;
    let params = config.problem_params()?;
    params.require_existence_range()?;
    let exps = select_exponents(&params, &config.problem.policy()?)?;
    let sigma = -exps.as_f64().s0;
    let plan = s.solver.plan(params.n)?;
    let member = s.member()?;
    let shape = DataFamily::with_defaults(s.family_kind()?).profile(&plan, member, 1.0);
    let shape_norm = sobolev_norm(&plan, &shape, sigma)?;
    let problem = Problem { plan: &plan, params: &params, exps: &exps, shape: &shape, shape_norm };
    let data_norm = s.data_norm();
    let phi = problem.data(data_norm);

    let (u, diag) = picard_solve(&plan, &phi, &params, &exps, &s.solver)?;
    let first = diag.distances.first().copied().unwrap_or(0.0);
    let max_ratio = diag.max_ratio(first);
    let bound = if diag.converged { Some(verify_global_bound(&plan, &u, &phi, &exps)?) } else { None };
    let mut failed = Vec::new();
    if bound.is_some_and(|b| !b.passed) {
        failed.push("global_bound");
    }

    let mut doubling = Value::Null;
    if let (true, Some(c)) = (s.doubling_check, bound.and_then(|b| b.constant)) {
        let cfg = SolverConfig { horizon: 2.0 * s.solver.horizon, ..s.solver.clone() };
        let (u2, d2) = picard_solve(&plan, &phi, &params, &exps, &cfg)?;
        let c2 = verify_global_bound(&plan, &u2, &phi, &exps)?.constant.unwrap_or(f64::NAN);
        let change = (c2 - c).abs() / c;
        let passed = d2.converged && change < s.doubling_tolerance;
        if !passed {
            failed.push("horizon_doubling");
        }
        doubling = json!({
            "horizon": json_number(cfg.horizon),
            "converged": d2.converged,
            "constant": json_number(c2),
            "relative_change": json_number(change),
            "passed": passed,
        });
    }

    let mut splitting = Value::Null;
    if s.splitting_check && diag.converged {
        let v = splitting_solve(&plan, &phi, &params, &s.solver)?;
        let k = nearest_index(u.times(), s.check_time);
        let gap = l2_gap(&u.profiles()[k], &v.profiles()[k])?;
        let passed = gap < s.splitting_tolerance;
        if !passed {
            failed.push("splitting_agreement");
        }
        splitting = json!({ "time": json_number(u.times()[k]), "relative_l2": json_number(gap), "passed": passed });
    }

    let delta_star = if s.bisect { Some(problem.bisect_delta(&s.solver, s.bisect_steps)?) } else { None };
    let lipschitz = sample_lipschitz_constant(&params, s.lipschitz_samples, 1.0, config.seed);

    let status = if !diag.converged {
        Status::NonConvergence
    } else if !failed.is_empty() {
        Status::ToleranceFailure
    } else {
        Status::Ok
    };
    let mut out = Output::create(&config.output_dir)?;
    out.write_json(
        "solve_manifest.json",
        manifest(
            "solve",
            config,
            json!({
                "grid": grid_json(&plan),
                "exponents": exps_json_with_lambda(&exps, &params),
                "data": {
                    "family": s.family_kind()?.name(),
                    "member": [json_number(member.0), json_number(member.1)],
                    "data_norm": json_number(data_norm),
                    "shape_norm": json_number(shape_norm),
                },
                "time_samples": s.solver.times().len(),
            }),
        ),
    )?;
    out.write_csv("timeseries.csv", &["t", "l2_norm", "sobolev_norm"], &timeseries(&plan, &u, sigma)?)?;
    let diagnostics = json!({
        "status": match status {
            Status::Ok => "ok",
            Status::NonConvergence => "non-convergence",
            _ => "tolerance-failure",
        },
        "converged": diag.converged,
        "iterations": diag.iterations,
        "distances": diag.distances.iter().map(|&d| json_number(d)).collect::<Vec<_>>(),
        "ratios": diag.ratios.iter().map(|&r| json_number(r)).collect::<Vec<_>>(),
        "max_contraction_ratio": max_ratio.map(json_number),
        "residual": json_number(diag.residual),
        "final_norm": serde_json::to_value(diag.final_norm).expect("serializable"),
        "data_norm": json_number(data_norm),
        "global_bound": bound.map(|b| json!({ "constant": b.constant.map(json_number), "passed": b.passed })),
        "horizon_doubling": doubling,
        "splitting": splitting,
        "lipschitz": { "samples": s.lipschitz_samples, "seed": config.seed, "constant": json_number(lipschitz) },
        "delta_star": delta_star.map(json_number),
        "failed_checks": failed,
    });
    out.write_json("diagnostics.json", diagnostics)?;

    let mut summary = vec![
        format!("converged={}", diag.converged),
        format!("iterations={}", diag.iterations),
        format!("last_distance={}", sig9(diag.distances.last().copied().unwrap_or(0.0))),
        format!("residual={}", sig9(diag.residual)),
    ];
    if let Some(r) = max_ratio {
        summary.push(format!("max_contraction_ratio={}", sig9(r)));
    }
    if let Some(c) = bound.and_then(|b| b.constant) {
        summary.push(format!("global_constant={}", sig9(c)));
    }
    if let Some(d) = delta_star {
        summary.push(format!("delta_star={}", sig9(d)));
    }
    summary.extend(failed.iter().map(|f| format!("failed={f}")));
    Ok(out.finish(status, summary))
}

fn exps_json_with_lambda(exps: &ExponentSet, params: &ProblemParams) -> Value {
    let mut v = exponents_json(exps);
    v["lambda"] = json!([json_number(params.lambda.re), json_number(params.lambda.im)]);
    v
}
