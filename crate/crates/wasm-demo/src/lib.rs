//! Browser bindings for three small views of the library: the exponent
//! window, free evolution of a radial profile, and dilation sweeps of the
//! weighted Strichartz ratio.

use num_complex::Complex64;
use radial_nls::estimates_lab::{sweep_homogeneous, DataFamily, FamilyKind, SweepConfig};
use radial_nls::exponents::{
    parse_rational, select_exponents, to_f64, window_inequality, ExponentSet, ProblemParams, Rational, SelectionPolicy,
};
use radial_nls::radial_transform::TransformPlan;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn exact(q: &Rational) -> Value {
    json!({ "text": q.to_string(), "value": to_f64(q) })
}

fn params(n: u32, p: &str) -> Result<ProblemParams, String> {
    let p = parse_rational(p).map_err(|e| e.to_string())?;
    ProblemParams::new(n, p, Complex64::new(1.0, 0.0)).map_err(|e| e.to_string())
}

/// Exponents for `(n, p)` as JSON, or the violated condition.
#[wasm_bindgen]
pub fn exponent_window(n: u32, p: &str) -> Result<String, String> {
    let params = params(n, p)?;
    let mut out = json!({
        "n": n,
        "p": exact(&params.p),
        "in_existence_range": params.in_existence_range(),
    });
    if let Ok(b) = window_inequality(n, &params.p) {
        out["bounds"] = json!({
            "reciprocal": exact(&b.reciprocal),
            "decay": exact(&b.decay),
            "upper": exact(&b.upper),
            "holds": b.holds(),
        });
    }
    let selected = params.require_existence_range().and_then(|_| select_exponents(&params, &SelectionPolicy::Midpoint));
    match selected {
        Ok(e) => {
            out["status"] = "ok".into();
            out["exponents"] = json!({
                "s0": exact(&e.s0),
                "q0": exact(&e.q0),
                "alpha0": exact(&e.alpha0),
                "q1": exact(&e.q1),
                "alpha1": exact(&e.alpha1),
                "two_over_q0": exact(&e.two_over_q0()),
            });
        }
        Err(err) => {
            out["status"] = "rejected".into();
            out["reason"] = err.to_string().into();
        }
    }
    Ok(out.to_string())
}

/// Lower and upper ends of the `2/q0` window across the existence range in
/// dimension `n`, as `[p, lower, upper]` triples.
#[wasm_bindgen]
pub fn window_band(n: u32, samples: usize) -> Result<Vec<f64>, String> {
    if n < 2 || samples < 2 {
        return Err("need n >= 2 and at least two samples".into());
    }
    let lo = 1.0 + 4.0 / (n as f64 + 1.0);
    let hi = 1.0 + 4.0 / n as f64;
    let mut out = Vec::with_capacity(3 * samples);
    for k in 0..samples {
        // open interval: stay off the endpoints
        let p = lo + (hi - lo) * (k as f64 + 0.5) / samples as f64;
        let b = window_inequality(n, &Rational::from_float(p).unwrap()).map_err(|e| e.to_string())?;
        out.extend([p, to_f64(&b.lower()), to_f64(&b.upper.min(Rational::from_integer(1.into())))]);
    }
    Ok(out)
}

fn family(name: &str) -> Result<FamilyKind, String> {
    name.parse().map_err(|e: radial_nls::Error| e.to_string())
}

/// `|φ(r)|` and `|U(t)φ(r)|` on the grid, as `[r, |φ|, |U(t)φ|]` triples.
#[wasm_bindgen]
pub fn free_evolution(
    n: u32,
    kind: &str,
    param1: f64,
    param2: f64,
    t: f64,
    nodes: usize,
    radius: f64,
) -> Result<Vec<f64>, String> {
    let kind = family(kind)?;
    kind.check_member(param1, param2).map_err(|e| e.to_string())?;
    let plan = TransformPlan::new(n, nodes, radius).map_err(|e| e.to_string())?;
    let phi = DataFamily::with_defaults(kind).profile(&plan, (param1, param2), 1.0);
    let u = plan.propagate_free(&phi, t).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * nodes);
    for ((r, a), b) in plan.radial().nodes().iter().zip(&phi.values).zip(&u.values) {
        out.extend([*r, a.norm(), b.norm()]);
    }
    Ok(out)
}

/// Primary-triple ratios of the `(n, p)` exponent set over dilations of one
/// family member, with `alpha` shifted by `alpha_shift`. JSON with the
/// dilations, ratios, fitted slope and the slope the scaling predicts.
#[wasm_bindgen]
pub fn dilation_sweep(
    n: u32,
    p: &str,
    kind: &str,
    param1: f64,
    param2: f64,
    alpha_shift: &str,
    nodes: usize,
    radius: f64,
) -> Result<String, String> {
    let params = params(n, p)?;
    let exps: ExponentSet = params
        .require_existence_range()
        .and_then(|_| select_exponents(&params, &SelectionPolicy::Midpoint))
        .map_err(|e| e.to_string())?;
    let mut triple = exps.primary_triple();
    triple.alpha += parse_rational(alpha_shift).map_err(|e| e.to_string())?;
    let kind = family(kind)?;
    let fam =
        DataFamily::new(kind, vec![(param1, param2)], vec![0.25, 0.5, 1.0, 2.0, 4.0]).map_err(|e| e.to_string())?;
    let plan = TransformPlan::new(n, nodes, radius).map_err(|e| e.to_string())?;
    let config = SweepConfig { allow_inadmissible: true, ..Default::default() };
    let report = sweep_homogeneous(&plan, &fam, &triple, &config).map_err(|e| e.to_string())?;
    let rows: Vec<_> = report.rows.iter().filter(|r| r.mu.is_some()).collect();
    Ok(json!({
        "mu": rows.iter().map(|r| r.mu).collect::<Vec<_>>(),
        "ratio": rows.iter().map(|r| r.ratio).collect::<Vec<_>>(),
        "slope": report.summary.slopes[0],
        "expected_slope": report.summary.expected_slope,
        "variation": report.summary.max_dilation_variation,
        "admissible": report.summary.admissible,
    })
    .to_string())
}
