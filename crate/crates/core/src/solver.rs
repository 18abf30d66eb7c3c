//! Fixed-point solver for `i u_t + Δu = λ|u|^{p-1}u` with small radial data,
//! plus a Strang splitting integrator used as an independent cross-check.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::{ExponentSet, ProblemParams};
use crate::norms::{sobolev_norm, trapezoid_weights, x_norm, SpaceTimeField, XNormValue};
use crate::radial_transform::{RadialProfile, TransformPlan};
use crate::special::sphere_area;

/// Below this modulus `|u|^{p-1}` is taken to be zero.
const VACUUM: f64 = 1e-300;

/// Knobs of the Picard and splitting solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Upper bound for `‖|D|^{-s0}φ‖_{L²}`.
    pub delta: f64,
    /// Time horizon `T`.
    pub horizon: f64,
    pub max_iter: usize,
    /// Stop once the metric distance between iterates drops below this.
    pub tol: f64,
    pub time_step: f64,
    /// Radial nodes.
    pub nodes: usize,
    /// Radius of the computational ball.
    pub radius: f64,
    /// Solve on `[-T, T]` instead of `[0, T]`.
    pub two_sided: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            horizon: 4.0,
            max_iter: 30,
            tol: 1e-10,
            time_step: 0.01,
            nodes: 1024,
            radius: 80.0,
            two_sided: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return bad(format!("delta = {} must be positive", self.delta));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return bad(format!("horizon = {} must be positive", self.horizon));
        }
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1".into());
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol = {} must be positive", self.tol));
        }
        if !(self.time_step > 0.0 && self.time_step <= self.horizon) {
            return bad(format!("time_step = {} must lie in (0, horizon]", self.time_step));
        }
        if self.nodes < 16 {
            return bad(format!("nodes = {} is too small", self.nodes));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return bad(format!("radius = {} must be positive", self.radius));
        }
        Ok(())
    }

    pub fn plan(&self, n: u32) -> Result<TransformPlan> {
        self.validate()?;
        TransformPlan::new(n, self.nodes, self.radius)
    }

    /// Uniform samples `k Δt` covering `[0, T]` or `[-T, T]`.
    pub fn times(&self) -> Vec<f64> {
        let steps = (self.horizon / self.time_step).round().max(1.0) as i64;
        let dt = self.horizon / steps as f64;
        let first = if self.two_sided { -steps } else { 0 };
        (first..=steps).map(|k| k as f64 * dt).collect()
    }
}

/// Per-iteration record of a Picard run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PicardDiagnostics {
    /// `d(u_{k+1}, u_k)` for each iteration.
    pub distances: Vec<f64>,
    /// `d_{k+1} / d_k`.
    pub ratios: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `d(u, N(u))` for the returned iterate.
    pub residual: f64,
    pub final_norm: XNormValueRecord,
}

/// Serializable copy of [`XNormValue`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct XNormValueRecord {
    pub sup_sobolev: f64,
    pub weighted_lq: f64,
    pub total: f64,
}

impl From<XNormValue> for XNormValueRecord {
    fn from(v: XNormValue) -> Self {
        Self { sup_sobolev: v.sup_sobolev, weighted_lq: v.weighted_lq, total: v.total }
    }
}

impl PicardDiagnostics {
    /// Largest contraction ratio among iterations whose distance is still
    /// above round-off relative to `scale`.
    pub fn max_ratio(&self, scale: f64) -> Option<f64> {
        let floor = 1e-12 * scale.max(f64::MIN_POSITIVE);
        self.ratios
            .iter()
            .enumerate()
            .filter(|(k, _)| self.distances[k + 1] > floor)
            .map(|(_, &r)| r)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }
}

/// `λ|v|^{p-1}v` pointwise.
pub fn nonlinearity_value(v: Complex64, p: f64, lambda: Complex64) -> Complex64 {
    let m = v.norm();
    if m < VACUUM {
        return Complex64::new(0.0, 0.0);
    }
    lambda * v * ((p - 1.0) * m.ln()).exp()
}

pub fn nonlinearity(profile: &RadialProfile, params: &ProblemParams) -> RadialProfile {
    let p = params.p_f64();
    RadialProfile {
        grid: profile.grid.clone(),
        values: profile.values.iter().map(|&v| nonlinearity_value(v, p, params.lambda)).collect(),
    }
}

pub fn nonlinearity_field(field: &SpaceTimeField, params: &ProblemParams) -> SpaceTimeField {
    let p = params.p_f64();
    let lambda = params.lambda;
    field.map(|v| nonlinearity_value(v, p, lambda))
}

/// Smallest `C` with `|f(a) - f(b)| ≤ C (|a| + |b|)^{p-1} |a - b|` over
/// `samples` random pairs in the unit disc of radius `scale`.
pub fn sample_lipschitz_constant(params: &ProblemParams, samples: usize, scale: f64, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = params.p_f64();
    let pick = |rng: &mut ChaCha8Rng| {
        let r = scale * rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
    };
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let a = pick(&mut rng);
        let b = pick(&mut rng);
        let gap = (a - b).norm();
        let denom = (a.norm() + b.norm()).powf(p - 1.0) * gap;
        if denom > 0.0 {
            let num = (nonlinearity_value(a, p, params.lambda) - nonlinearity_value(b, p, params.lambda)).norm();
            best = best.max(num / denom);
        }
    }
    best
}

/// `φ1(x) = (e^x - 1)/x` and `ψ2(x) = (e^x(x - 1) + 1)/x²`, with series near 0.
fn exponential_moments(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() < 0.05 {
        let mut phi1 = Complex64::new(0.0, 0.0);
        let mut psi2 = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        let mut fact = 1.0;
        for k in 0..8 {
            phi1 += power / (fact * (k + 1) as f64);
            psi2 += power / (fact * (k + 2) as f64);
            power *= x;
            fact *= (k + 1) as f64;
        }
        (phi1, psi2)
    } else {
        let e = x.exp();
        ((e - 1.0) / x, (e * (x - 1.0) + 1.0) / (x * x))
    }
}

/// Propagator and quadrature weights for one time step `h` on the spectral grid.
struct StepCoefficients {
    h: f64,
    phase: Vec<Complex64>,
    start: Vec<Complex64>,
    end: Vec<Complex64>,
}

impl StepCoefficients {
    fn new(rho: &[f64], h: f64) -> Self {
        let mut phase = Vec::with_capacity(rho.len());
        let mut start = Vec::with_capacity(rho.len());
        let mut end = Vec::with_capacity(rho.len());
        for &r in rho {
            let x = Complex64::new(0.0, -r * r * h);
            let (phi1, psi2) = exponential_moments(x);
            phase.push(x.exp());
            // -i ∫ e^{-iρ²(t_b - τ)} F(τ) dτ with F linear between the endpoints
            start.push(Complex64::new(0.0, -h) * psi2);
            end.push(Complex64::new(0.0, -h) * (phi1 - psi2));
        }
        Self { h, phase, start, end }
    }
}

/// Spectral samples of `-i ∫_0^t U(t - τ) F(τ) dτ` at every sample time,
/// given the spectral samples of `F`. Requires a sample at `t = 0`.
fn duhamel_spectral(plan: &TransformPlan, times: &[f64], forcing: &[Vec<Complex64>]) -> Result<Vec<Vec<Complex64>>> {
    let zero = times
        .iter()
        .position(|&t| t == 0.0)
        .ok_or_else(|| Error::Domain("the Duhamel integral starts at t = 0, which must be a sample".into()))?;
    let rho = plan.spectral().nodes();
    let ns = rho.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); ns]; times.len()];
    let mut coeffs: Option<StepCoefficients> = None;
    let mut step = |from: usize, to: usize, out: &mut Vec<Vec<Complex64>>| {
        let h = times[to] - times[from];
        let rebuild = coeffs.as_ref().is_none_or(|c| (c.h - h).abs() > 1e-14 * h.abs());
        if rebuild {
            coeffs = Some(StepCoefficients::new(rho, h));
        }
        let c = coeffs.as_ref().unwrap();
        let next: Vec<Complex64> = (0..ns)
            .map(|k| c.phase[k] * out[from][k] + c.start[k] * forcing[from][k] + c.end[k] * forcing[to][k])
            .collect();
        out[to] = next;
    };
    for k in zero..times.len() - 1 {
        step(k, k + 1, &mut out);
    }
    for k in (1..=zero).rev() {
        step(k, k - 1, &mut out);
    }
    Ok(out)
}

/// `D(t) = -i ∫_0^t U(t - τ) F(τ) dτ` at the sample times of `F`.
///
/// `F` is interpolated linearly between samples and the propagator is
/// integrated exactly against each linear piece, so the error is second order
/// in the time step uniformly in frequency.
pub fn duhamel(plan: &TransformPlan, forcing: &SpaceTimeField) -> Result<SpaceTimeField> {
    if **forcing.grid() != **plan.radial() {
        return Err(Error::GridMismatch);
    }
    let refs: Vec<&[Complex64]> = forcing.profiles().iter().map(|p| p.values.as_slice()).collect();
    let fhat = plan.forward_values(&refs);
    let dhat = duhamel_spectral(plan, forcing.times(), &fhat)?;
    let drefs: Vec<&[Complex64]> = dhat.iter().map(|v| v.as_slice()).collect();
    let profiles = plan
        .inverse_values(&drefs)
        .into_iter()
        .map(|values| RadialProfile { grid: plan.radial().clone(), values })
        .collect();
    SpaceTimeField::new(forcing.times().to_vec(), profiles)
}

/// Iteration metric: sup-in-time `Ḣ^{-s0}` plus weighted `L^{q0}` over the samples.
struct Metric {
    q0: f64,
    n: u32,
    spectral_w: Vec<f64>,
    radial_w: Vec<f64>,
    time_w: Vec<f64>,
}

impl Metric {
    fn new(plan: &TransformPlan, exps: &ExponentSet, times: &[f64]) -> Self {
        let e = exps.as_f64();
        let n = plan.dim();
        let nf = n as f64;
        Self {
            q0: e.q0,
            n,
            spectral_w: plan.spectral().power_weights(nf - 1.0 - 2.0 * e.s0),
            radial_w: plan.radial().power_weights(nf - 1.0 - e.alpha0 * e.q0),
            time_w: trapezoid_weights(times),
        }
    }

    /// Distance between two iterates given both physical and spectral samples.
    fn distance(&self, a: &Iterate, b: &Iterate) -> XNormValue {
        let omega = sphere_area(self.n);
        let plancherel = omega * (2.0 * std::f64::consts::PI).powi(-(self.n as i32));
        let mut sup: f64 = 0.0;
        for (x, y) in a.spectral.iter().zip(&b.spectral) {
            let s: f64 = x.iter().zip(y).zip(&self.spectral_w).map(|((u, v), w)| w * (u - v).norm_sqr()).sum();
            sup = sup.max((plancherel * s).sqrt());
        }
        let mut total = 0.0;
        for ((x, y), tw) in a.physical.iter().zip(&b.physical).zip(&self.time_w) {
            let s: f64 =
                x.iter().zip(y).zip(&self.radial_w).map(|((u, v), w)| w * (u - v).norm_sqr().powf(0.5 * self.q0)).sum();
            total += tw * s;
        }
        XNormValue::new(sup, (omega * total).powf(1.0 / self.q0))
    }
}

struct Iterate {
    physical: Vec<Vec<Complex64>>,
    spectral: Vec<Vec<Complex64>>,
}

impl Iterate {
    fn zeros(m: usize, nr: usize, ns: usize) -> Self {
        Self {
            physical: vec![vec![Complex64::new(0.0, 0.0); nr]; m],
            spectral: vec![vec![Complex64::new(0.0, 0.0); ns]; m],
        }
    }
}

/// Picard iteration `u_{k+1} = U(t)φ - i ∫_0^t U(t-τ) λ|u_k|^{p-1}u_k dτ`.
///
/// Stops when `d(u_{k+1}, u_k) < tol`, when `max_iter` is reached, or when the
/// distances blow up. Non-convergence is reported in the diagnostics, not as
/// an error.
pub fn picard_solve(
    plan: &TransformPlan,
    phi: &RadialProfile,
    params: &ProblemParams,
    exps: &ExponentSet,
    config: &SolverConfig,
) -> Result<(SpaceTimeField, PicardDiagnostics)> {
    config.validate()?;
    if params.n != exps.n || params.p != exps.p {
        return Err(Error::Domain("exponents were selected for a different problem".into()));
    }
    exps.verify()?;
    let e = exps.as_f64();
    let data_norm = sobolev_norm(plan, phi, -e.s0)?;
    if data_norm > config.delta * (1.0 + 1e-9) {
        return Err(Error::Domain(format!(
            "data norm {data_norm:.9e} exceeds the smallness bound delta = {:.9e}",
            config.delta
        )));
    }
    let times = config.times();
    let m = times.len();
    let nr = plan.radial().len();
    let ns = plan.spectral().len();
    let p = params.p_f64();
    let lambda = params.lambda;

    let psi = plan.forward(phi)?;
    let free_spectral: Vec<Vec<Complex64>> = times.iter().map(|&t| psi.evolve(t).values).collect();
    let free_refs: Vec<&[Complex64]> = free_spectral.iter().map(|v| v.as_slice()).collect();
    let free_physical = plan.inverse_values(&free_refs);
    let free = Iterate { physical: free_physical, spectral: free_spectral };
    let metric = Metric::new(plan, exps, &times);

    let apply = |u: &Iterate| -> Result<Iterate> {
        let forcing: Vec<Vec<Complex64>> =
            u.physical.iter().map(|row| row.iter().map(|&v| nonlinearity_value(v, p, lambda)).collect()).collect();
        let frefs: Vec<&[Complex64]> = forcing.iter().map(|v| v.as_slice()).collect();
        let fhat = plan.forward_values(&frefs);
        let dhat = duhamel_spectral(plan, &times, &fhat)?;
        let drefs: Vec<&[Complex64]> = dhat.iter().map(|v| v.as_slice()).collect();
        let dphys = plan.inverse_values(&drefs);
        let add = |a: &[Vec<Complex64>], b: &[Vec<Complex64>]| -> Vec<Vec<Complex64>> {
            a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| u + v).collect()).collect()
        };
        Ok(Iterate { physical: add(&free.physical, &dphys), spectral: add(&free.spectral, &dhat) })
    };

    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut converged = false;
    let mut current = Iterate { physical: free.physical.clone(), spectral: free.spectral.clone() };
    let mut next = apply(&current)?;
    let mut iterations = 0;
    while iterations < config.max_iter {
        iterations += 1;
        let d = metric.distance(&next, &current).total;
        if let Some(&prev) = distances.last() {
            ratios.push(if prev > 0.0 { d / prev } else { 0.0 });
        }
        distances.push(d);
        current = next;
        if d < config.tol {
            converged = true;
            break;
        }
        if !d.is_finite() || d > 1e6 * (1.0 + data_norm) {
            break;
        }
        next = apply(&current)?;
    }
    // the returned iterate is `current`; measure how far it is from its image
    let image = if converged || current.physical.iter().flatten().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Some(apply(&current)?)
    } else {
        None
    };
    let residual = image.map_or(f64::INFINITY, |img| metric.distance(&img, &current).total);
    let zero = Iterate::zeros(m, nr, ns);
    let final_norm = metric.distance(&current, &zero);

    let profiles =
        current.physical.into_iter().map(|values| RadialProfile { grid: plan.radial().clone(), values }).collect();
    let field = SpaceTimeField::new(times, profiles)?;
    Ok((field, PicardDiagnostics { distances, ratios, converged, iterations, residual, final_norm: final_norm.into() }))
}

/// Measured constant in `‖u‖_X ≤ C ‖|D|^{-s0}φ‖_{L²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GlobalBound {
    /// `None` for zero data, where the bound holds vacuously.
    pub constant: Option<f64>,
    pub passed: bool,
}

pub fn verify_global_bound(
    plan: &TransformPlan,
    solution: &SpaceTimeField,
    phi: &RadialProfile,
    exps: &ExponentSet,
) -> Result<GlobalBound> {
    let data = sobolev_norm(plan, phi, -exps.as_f64().s0)?;
    if data == 0.0 {
        return Ok(GlobalBound { constant: None, passed: true });
    }
    let c = x_norm(plan, solution, exps)?.total / data;
    Ok(GlobalBound { constant: Some(c), passed: c.is_finite() })
}

/// Pointwise flow of `i u_t = λ|u|^{p-1}u` over a time `h`.
fn nonlinear_flow(v: Complex64, h: f64, p: f64, lambda: Complex64) -> Complex64 {
    let rhs = |u: Complex64| -Complex64::i() * nonlinearity_value(u, p, lambda);
    if lambda.im == 0.0 {
        // |u| is conserved, so the flow is a phase rotation
        let m = v.norm();
        if m < VACUUM {
            return v;
        }
        return v * Complex64::from_polar(1.0, -lambda.re * ((p - 1.0) * m.ln()).exp() * h);
    }
    const SUBSTEPS: usize = 4;
    let dt = h / SUBSTEPS as f64;
    let mut u = v;
    for _ in 0..SUBSTEPS {
        let k1 = rhs(u);
        let k2 = rhs(u + k1 * (0.5 * dt));
        let k3 = rhs(u + k2 * (0.5 * dt));
        let k4 = rhs(u + k3 * dt);
        u += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
    }
    u
}

/// Strang splitting: half nonlinear step, full free step, half nonlinear step.
pub fn splitting_solve(
    plan: &TransformPlan,
    phi: &RadialProfile,
    params: &ProblemParams,
    config: &SolverConfig,
) -> Result<SpaceTimeField> {
    config.validate()?;
    let times = config.times();
    let p = params.p_f64();
    let lambda = params.lambda;
    let zero = times.iter().position(|&t| t == 0.0).unwrap();
    let mut states: Vec<Option<Vec<Complex64>>> = vec![None; times.len()];
    states[zero] = Some(phi.values.clone());
    let advance = |u: &[Complex64], h: f64| -> Result<Vec<Complex64>> {
        let half: Vec<Complex64> = u.iter().map(|&v| nonlinear_flow(v, 0.5 * h, p, lambda)).collect();
        let spectral = plan.forward_values(&[&half]).pop().unwrap();
        let rho = plan.spectral().nodes();
        let evolved: Vec<Complex64> =
            spectral.iter().zip(rho).map(|(v, &r)| v * Complex64::from_polar(1.0, -h * r * r)).collect();
        let linear = plan.inverse_values(&[&evolved]).pop().unwrap();
        let out: Vec<Complex64> = linear.iter().map(|&v| nonlinear_flow(v, 0.5 * h, p, lambda)).collect();
        if out.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain(format!("splitting step of size {h} produced non-finite values")));
        }
        Ok(out)
    };
    for k in zero..times.len() - 1 {
        let next = advance(states[k].as_ref().unwrap(), times[k + 1] - times[k])?;
        states[k + 1] = Some(next);
    }
    for k in (1..=zero).rev() {
        let next = advance(states[k].as_ref().unwrap(), times[k - 1] - times[k])?;
        states[k - 1] = Some(next);
    }
    let profiles =
        states.into_iter().map(|s| RadialProfile { grid: plan.radial().clone(), values: s.unwrap() }).collect();
    SpaceTimeField::new(times, profiles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ratio;

    #[test]
    fn nonlinearity_modulus() {
        let lambda = Complex64::new(0.3, -1.2);
        for &(re, im) in &[(0.2, 0.1), (-1.5, 2.0), (1e-8, 0.0)] {
            let v = Complex64::new(re, im);
            let f = nonlinearity_value(v, 2.2, lambda);
            let expect = lambda.norm() * v.norm().powf(2.2);
            assert!((f.norm() - expect).abs() <= 1e-14 * expect.max(1e-300));
        }
        assert_eq!(nonlinearity_value(Complex64::new(0.0, 0.0), 2.2, lambda), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn exponential_moments_continuous_at_switch() {
        for &a in &[0.0499, 0.0501] {
            let x = Complex64::new(0.0, -a);
            let (p1, p2) = exponential_moments(x);
            let (e1, e2) = ((x.exp() - 1.0) / x, (x.exp() * (x - 1.0) + 1.0) / (x * x));
            assert!((p1 - e1).norm() < 1e-13 && (p2 - e2).norm() < 1e-12);
        }
    }

    #[test]
    fn config_times_cover_horizon() {
        let c = SolverConfig { horizon: 1.0, time_step: 0.25, two_sided: true, ..Default::default() };
        assert_eq!(c.times(), vec![-1.0, -0.75, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn lipschitz_constant_below_p_lambda() {
        let params = ProblemParams::new(3, ratio(11, 5), Complex64::new(1.0, 0.0)).unwrap();
        let c = sample_lipschitz_constant(&params, 1000, 1.0, 7);
        assert!(c > 0.5 && c <= 2.2 + 1e-12, "{c}");
    }
}
