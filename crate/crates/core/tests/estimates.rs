mod common;

use num_complex::Complex64;
use radial_nls::estimates_lab::{
    inhomogeneous_check, kernel_weighted_integrals, pointwise_weighted_bound, strichartz_ratio, sweep_homogeneous,
    DataFamily, FamilyKind, SweepConfig, Verdict,
};
use radial_nls::exponents::{
    ratio, select_exponents, AdmissibilityTriple, ExponentSet, ProblemParams, SelectionPolicy,
};
use radial_nls::norms::{evolution_norm, weighted_spacetime_norm, EvolutionNormOptions, SpaceTimeField};
use radial_nls::radial_transform::TransformPlan;
use radial_nls::Error;
use statrs::function::gamma::gamma;

fn default_exponents() -> ExponentSet {
    let params = ProblemParams::new(3, ratio(11, 5), Complex64::new(1.0, 0.0)).unwrap();
    select_exponents(&params, &SelectionPolicy::Midpoint).unwrap()
}

/// `∫_0^∞ J_ν(t)² t^{-λ} dt` by the Weber–Schafheitlin formula, `0 < λ < 2ν + 1`.
fn bessel_square_moment(nu: f64, lambda: f64) -> f64 {
    gamma(lambda) * gamma(nu + (1.0 - lambda) / 2.0)
        / (2f64.powf(lambda) * gamma((1.0 + lambda) / 2.0).powi(2) * gamma(nu + (1.0 + lambda) / 2.0))
}

/// For radial data and `q = 2`, `α + s = 1`, Plancherel in time and space turn
/// `‖|x|^{-α}|D|^s U(t)φ‖²_{L²(R×R^n)} / ‖φ‖²` into `π ∫ u^{1-2α} J_{n/2-1}(u)² du`,
/// the same for every datum.
fn smoothing_constant(n: u32, alpha: f64) -> f64 {
    (std::f64::consts::PI * bessel_square_moment(n as f64 / 2.0 - 1.0, 2.0 * alpha - 1.0)).sqrt()
}

#[test]
fn smoothing_ratio_matches_bessel_moment() {
    for n in [3, 4, 5] {
        let plan = TransformPlan::default_for(n).unwrap();
        for (kind, member) in [(FamilyKind::Gaussian, (1.0, 0.0)), (FamilyKind::Bump, (2.0, 0.0))] {
            let phi = DataFamily::with_defaults(kind).profile(&plan, member, 1.0);
            for (alpha, s) in [(ratio(1, 1), ratio(0, 1)), (ratio(3, 4), ratio(1, 4)), (ratio(6, 5), ratio(-1, 5))] {
                let triple = AdmissibilityTriple::new(ratio(2, 1), alpha.clone(), s);
                let a = radial_nls::exponents::to_f64(&alpha);
                let lib = strichartz_ratio(&plan, &phi, &triple, &EvolutionNormOptions::default()).unwrap().ratio;
                let exact = smoothing_constant(n, a);
                assert!((lib / exact - 1.0).abs() < 2e-3, "n={n} {kind} α={a}: {lib} vs {exact}");
            }
        }
    }
}

#[test]
fn q2_ratio_stable_under_horizon_doubling() {
    let plan = TransformPlan::default_for(3).unwrap();
    let phi = DataFamily::with_defaults(FamilyKind::Gaussian).profile(&plan, (1.0, 0.0), 1.0);
    let triple = AdmissibilityTriple::new(ratio(2, 1), ratio(1, 1), ratio(0, 1));
    let at = |t: f64| {
        let opts = EvolutionNormOptions { horizon: Some(t), ..Default::default() };
        strichartz_ratio(&plan, &phi, &triple, &opts).unwrap().ratio
    };
    let (a, b) = (at(20.0), at(40.0));
    assert!((b / a - 1.0).abs() < 0.02, "{a} vs {b}");
}

#[test]
fn two_sided_norm_matches_sampling_at_negative_times() {
    let e = default_exponents().as_f64();
    let plan = TransformPlan::default_for(3).unwrap();
    let phi = DataFamily::with_defaults(FamilyKind::OscillatoryChirp).profile(&plan, (4.0, 2.0), 1.0);
    assert!(phi.values.iter().any(|v| v.im != 0.0));
    let horizon = 0.5;
    let opts = EvolutionNormOptions { horizon: Some(horizon), two_sided: true, ..Default::default() };
    let lib = evolution_norm(&plan, &phi, e.q0, e.alpha0, 0.0, &opts).unwrap().value;
    let steps = 4000;
    let times: Vec<f64> = (-steps..=steps).map(|k| horizon * k as f64 / steps as f64).collect();
    let evolved = plan.evolve_many(&plan.forward(&phi).unwrap(), &times).unwrap();
    let oracle = weighted_spacetime_norm(&SpaceTimeField::new(times, evolved).unwrap(), e.q0, e.alpha0).unwrap();
    assert!((lib / oracle - 1.0).abs() < 1e-5, "{lib} vs {oracle}");
}

#[test]
fn norm_independent_of_handover_time() {
    let e = default_exponents().as_f64();
    let plan = TransformPlan::default_for(3).unwrap();
    let phi = DataFamily::with_defaults(FamilyKind::Bump).profile(&plan, (2.0, 0.0), 1.0);
    let at = |switch: Option<f64>| {
        let opts = EvolutionNormOptions { switch_time: switch, ..Default::default() };
        evolution_norm(&plan, &phi, e.q0, e.alpha0, 0.0, &opts).unwrap()
    };
    let auto = at(None);
    for t in [0.5 * auto.switch_time, 2.0 * auto.switch_time] {
        let v = at(Some(t)).value;
        assert!((v / auto.value - 1.0).abs() < 1e-4, "switch {t}: {v} vs {}", auto.value);
    }
}

#[test]
fn kernel_integral_q2_matches_bessel_moment() {
    // (|y|^{-α}|dσ̂(y)|)² y^{n-1} = (2π)^n y^{1-2α} J_{n/2-1}(y)²
    let (n, alpha) = (3, 1.0);
    let cutoffs = [32.0, 64.0, 128.0];
    let k = kernel_weighted_integrals(n, 2.0, alpha, &cutoffs).unwrap();
    let scale = (2.0 * std::f64::consts::PI).powi(n as i32);
    let exact = scale * bessel_square_moment(0.5, 2.0 * alpha - 1.0);
    // beyond the cutoff J² averages to 1/(π y)
    let c = cutoffs[2];
    let tail = scale * c.powf(1.0 - 2.0 * alpha) / (std::f64::consts::PI * (2.0 * alpha - 1.0));
    let total = k.inner + k.outer[2] + tail;
    assert!((total / exact - 1.0).abs() < 1e-3, "{total} vs {exact}");
}

#[test]
fn kernel_integrals_stable_inside_window_and_grow_outside() {
    let e = default_exponents().as_f64();
    let cutoffs = [32.0, 64.0, 128.0];
    // window for the weight is n/q - (n-1)/2 < α < n/q; the outer tail
    // decays like c^{-(α - lower) q}, so test well inside it
    let lower = 3.0 / e.q0 - 1.0;
    let middle = lower + 0.5;
    let inside = kernel_weighted_integrals(3, e.q0, middle, &cutoffs).unwrap();
    assert!(inside.changes.iter().all(|c| c.abs() < 0.01), "{:?}", inside.changes);
    let near_edge = kernel_weighted_integrals(3, e.q0, e.alpha0, &cutoffs).unwrap();
    assert!(near_edge.changes.iter().all(|&c| c > 0.0));
    // below the lower end the outer integral diverges
    let outside = kernel_weighted_integrals(3, e.q0, lower - 0.1, &cutoffs).unwrap();
    assert!(outside.changes.iter().all(|&c| c > 0.10), "{:?}", outside.changes);
    assert!(matches!(kernel_weighted_integrals(3, e.q0, 3.0 / e.q0, &cutoffs), Err(Error::WeightNotIntegrable { .. })));
}

#[test]
fn pointwise_bound_refines_and_is_dilation_invariant() {
    let times: Vec<f64> = (0..=100).map(|k| k as f64 * 0.02).collect();
    let plan = TransformPlan::default_for(3).unwrap();
    let fine = TransformPlan::new(3, 4096, 40.0).unwrap();
    let fam = DataFamily::with_defaults(FamilyKind::Gaussian);
    let coarse = pointwise_weighted_bound(&plan, &fam.profile(&plan, (1.0, 0.0), 1.0), 1.0, &times).unwrap();
    let refined = pointwise_weighted_bound(&fine, &fam.profile(&fine, (1.0, 0.0), 1.0), 1.0, &times).unwrap();
    assert!((refined / coarse - 1.0).abs() < 0.01, "{coarse} vs {refined}");
    // φ(2·) over times scaled by 1/4
    let quarter: Vec<f64> = times.iter().map(|t| t / 4.0).collect();
    let dilated = pointwise_weighted_bound(&plan, &fam.profile(&plan, (1.0, 0.0), 2.0), 1.0, &quarter).unwrap();
    assert!((dilated / coarse - 1.0).abs() < 0.02, "{coarse} vs {dilated}");
    // at t = 0 the supremum is at least the initial weighted value
    let g = fam.profile(&plan, (1.0, 0.0), 1.0);
    let at_zero = pointwise_weighted_bound(&plan, &g, 1.0, &[0.0]).unwrap();
    assert!(coarse >= at_zero);
    // ‖|D| g‖² = |S²| Γ(5/2) / 2 and sup r^{1/2} e^{-r²/2} = (2e)^{-1/4}
    let d1 = (common::sphere_area_rec(3) * gamma(2.5) / 2.0).sqrt();
    let exact = (2.0 * std::f64::consts::E).powf(-0.25) / d1;
    assert!((at_zero / exact - 1.0).abs() < 1e-4, "{at_zero} vs {exact}");
    assert!(pointwise_weighted_bound(&plan, &g, 0.5, &times).is_err());
    assert!(pointwise_weighted_bound(&plan, &g, 1.5, &times).is_err());
}

fn separable_forcing(plan: &TransformPlan, duration: f64, steps: usize, width: f64, amp: f64) -> SpaceTimeField {
    let times: Vec<f64> = (0..=steps).map(|k| duration * k as f64 / steps as f64).collect();
    SpaceTimeField::from_fn(plan.radial().clone(), times, |t, r| {
        Complex64::new(amp * common::bump(2.0 * t / duration - 1.0) * (-0.5 * r * r / (width * width)).exp(), 0.0)
    })
    .unwrap()
}

#[test]
fn inhomogeneous_ratios_refine_and_rescale() {
    let exps = default_exponents();
    let e = exps.as_f64();
    let plan = TransformPlan::default_for(3).unwrap();
    let base = inhomogeneous_check(&plan, &separable_forcing(&plan, 1.0, 100, 1.0, 1.0), &exps).unwrap();
    assert!(base.ratio_lq > 0.0 && base.ratio_sup > 0.0);
    let fine_plan = TransformPlan::new(3, 4096, 40.0).unwrap();
    let fine = inhomogeneous_check(&fine_plan, &separable_forcing(&fine_plan, 1.0, 200, 1.0, 1.0), &exps).unwrap();
    assert!((fine.ratio_lq / base.ratio_lq - 1.0).abs() < 0.03);
    assert!((fine.ratio_sup / base.ratio_sup - 1.0).abs() < 0.03);
    // F_μ(t, x) = μ^a F(μ² t, μ x) keeps both ratios
    let mu = 2.0;
    let a = e.alpha1 + 5.0 / e.q1_conjugate();
    let scaled =
        inhomogeneous_check(&plan, &separable_forcing(&plan, 1.0 / (mu * mu), 100, 1.0 / mu, mu.powf(a)), &exps)
            .unwrap();
    assert!((scaled.ratio_lq / base.ratio_lq - 1.0).abs() < 0.03);
    assert!((scaled.ratio_sup / base.ratio_sup - 1.0).abs() < 0.03);
    // ratios do not depend on the amplitude
    let louder = inhomogeneous_check(&plan, &separable_forcing(&plan, 1.0, 100, 1.0, 3.0), &exps).unwrap();
    assert!((louder.ratio_lq / base.ratio_lq - 1.0).abs() < 1e-10);
}

#[test]
fn zero_forcing_gives_zero_ratios() {
    let exps = default_exponents();
    let plan = TransformPlan::new(3, 256, 20.0).unwrap();
    let zero = SpaceTimeField::zeros(plan.radial().clone(), vec![0.0, 0.5, 1.0]).unwrap();
    let r = inhomogeneous_check(&plan, &zero, &exps).unwrap();
    assert_eq!((r.ratio_lq, r.ratio_sup), (0.0, 0.0));
}

#[test]
fn single_member_single_dilation_summary() {
    let exps = default_exponents();
    let plan = TransformPlan::default_for(3).unwrap();
    let fam = DataFamily::new(FamilyKind::Gaussian, vec![(1.0, 0.0)], vec![1.0]).unwrap();
    let triple = exps.primary_triple();
    let report = sweep_homogeneous(&plan, &fam, &triple, &SweepConfig::default()).unwrap();
    let direct = strichartz_ratio(&plan, &fam.profile(&plan, (1.0, 0.0), 1.0), &triple, &Default::default()).unwrap();
    assert_eq!(report.rows.len(), 1);
    assert_eq!(report.summary.max_ratio, direct.ratio);
    assert_eq!(report.summary.max_dilation_variation, 0.0);
    assert_eq!(report.rows[0].verdict, Verdict::Pass);
}

#[test]
fn inadmissible_triple_needs_opt_in() {
    let exps = default_exponents();
    let plan = TransformPlan::new(3, 512, 30.0).unwrap();
    let fam = DataFamily::with_defaults(FamilyKind::Gaussian);
    let mut triple = exps.primary_triple();
    triple.alpha += ratio(1, 5);
    assert!(matches!(sweep_homogeneous(&plan, &fam, &triple, &SweepConfig::default()), Err(Error::Inequality(_))));
}
