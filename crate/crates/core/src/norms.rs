//! Norms used to measure solutions: weighted space-time Lebesgue norms,
//! homogeneous Sobolev norms, the iteration metric, and the dual Hardy
//! comparison.
//!
//! Free evolutions get a dedicated engine, [`evolution_norm`], which covers
//! all of `t ∈ R`. Short times are handled by propagating on the grid; long
//! times use the lens identity
//!
//! ```text
//! U(t)g(x) = (4πit)^{-n/2} e^{i|x|²/4t} F[e^{i|y|²/4t} g](x/2t),
//! ```
//!
//! which maps `t ∈ [t_s, ∞)` onto a compact interval of `σ = 1/t`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exponents::ExponentSet;
use crate::radial_transform::{apply_fractional_derivative, RadialGrid, RadialProfile, SpectralProfile, TransformPlan};
use crate::special::{gauss_legendre_on, sphere_area};

/// Samples of a radial function of `(t, r)` on a shared grid.
#[derive(Clone, Debug)]
pub struct SpaceTimeField {
    times: Vec<f64>,
    profiles: Vec<RadialProfile>,
}

impl SpaceTimeField {
    pub fn new(times: Vec<f64>, profiles: Vec<RadialProfile>) -> Result<Self> {
        if times.is_empty() || times.len() != profiles.len() {
            return Err(Error::Domain("field needs one profile per time sample".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Domain("time samples must be strictly increasing".into()));
        }
        let grid = &profiles[0].grid;
        if profiles.iter().any(|p| p.grid != *grid) {
            return Err(Error::GridMismatch);
        }
        for p in &profiles {
            if p.values.len() != grid.len() || p.values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::Domain("field contains non-finite samples".into()));
            }
        }
        Ok(Self { times, profiles })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, times: Vec<f64>, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let profiles = times.iter().map(|&t| RadialProfile::from_fn(grid.clone(), |r| f(t, r))).collect();
        Self::new(times, profiles)
    }

    pub fn zeros(grid: Arc<RadialGrid>, times: Vec<f64>) -> Result<Self> {
        Self::from_fn(grid, times, |_, _| Complex64::new(0.0, 0.0))
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn profiles(&self) -> &[RadialProfile] {
        &self.profiles
    }

    pub fn grid(&self) -> &Arc<RadialGrid> {
        &self.profiles[0].grid
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let profiles = self
            .profiles
            .iter()
            .map(|p| RadialProfile { grid: p.grid.clone(), values: p.values.iter().map(|&v| f(v)).collect() })
            .collect();
        Self { times: self.times.clone(), profiles }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.times != other.times {
            return Err(Error::Domain("fields sampled at different times".into()));
        }
        let profiles = self.profiles.iter().zip(&other.profiles).map(|(a, b)| a.sub(b)).collect::<Result<Vec<_>>>()?;
        Ok(Self { times: self.times.clone(), profiles })
    }
}

/// Trapezoid weights for samples at increasing times.
pub fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let m = times.len();
    let mut w = vec![0.0; m];
    for k in 1..m {
        let h = times[k] - times[k - 1];
        w[k - 1] += 0.5 * h;
        w[k] += 0.5 * h;
    }
    w
}

fn require_weight(n: u32, q: f64, alpha: f64) -> Result<()> {
    if !(q >= 1.0) || !q.is_finite() {
        return Err(Error::Domain(format!("exponent q = {q} must be finite and at least 1")));
    }
    if !(alpha * q < n as f64) {
        return Err(Error::WeightNotIntegrable { alpha, q, n });
    }
    Ok(())
}

/// `∫ r^{-αq} |v(r)|^q ω r^{n-1} dr` for one profile.
fn weighted_power_integral(values: &[Complex64], weights: &[f64], q: f64) -> f64 {
    values.iter().zip(weights).map(|(v, w)| w * v.norm_sqr().powf(0.5 * q)).sum()
}

/// `‖|x|^{-α} v‖_{L^q_{t,x}}`: trapezoid in time over the samples, grid
/// quadrature in space.
pub fn weighted_spacetime_norm(field: &SpaceTimeField, q: f64, alpha: f64) -> Result<f64> {
    let grid = field.grid();
    let n = grid.dim();
    require_weight(n, q, alpha)?;
    let weights = grid.power_weights(n as f64 - 1.0 - alpha * q);
    let tw = trapezoid_weights(field.times());
    let omega = sphere_area(n);
    let total: f64 =
        field.profiles().iter().zip(&tw).map(|(p, &w)| w * weighted_power_integral(&p.values, &weights, q)).sum();
    Ok((omega * total).powf(1.0 / q))
}

/// `‖|x|^{-α} v‖_{L^q_x}` at each time sample.
pub fn weighted_space_norms(field: &SpaceTimeField, q: f64, alpha: f64) -> Result<Vec<f64>> {
    let grid = field.grid();
    let n = grid.dim();
    require_weight(n, q, alpha)?;
    let weights = grid.power_weights(n as f64 - 1.0 - alpha * q);
    let omega = sphere_area(n);
    Ok(field
        .profiles()
        .iter()
        .map(|p| (omega * weighted_power_integral(&p.values, &weights, q)).powf(1.0 / q))
        .collect())
}

fn require_sobolev_index(n: u32, sigma: f64) -> Result<()> {
    if !(sigma > -(n as f64) / 2.0) || !sigma.is_finite() {
        return Err(Error::Domain(format!("Sobolev index {sigma} must exceed -n/2 = {}", -(n as f64) / 2.0)));
    }
    Ok(())
}

/// `‖|D|^σ φ‖_{L²}` from the spectral samples.
pub fn spectral_sobolev_norm(spectral: &SpectralProfile, sigma: f64) -> Result<f64> {
    let grid = &spectral.grid;
    let n = grid.dim();
    require_sobolev_index(n, sigma)?;
    let w = grid.power_weights(2.0 * sigma + n as f64 - 1.0);
    Ok(spectral_sobolev_with(&spectral.values, &w, n))
}

fn spectral_sobolev_with(values: &[Complex64], weights: &[f64], n: u32) -> f64 {
    let s: f64 = values.iter().zip(weights).map(|(v, w)| w * v.norm_sqr()).sum();
    let scale = sphere_area(n) * (2.0 * std::f64::consts::PI).powi(-(n as i32));
    (scale * s).sqrt()
}

/// `‖|D|^σ φ‖_{L²}`, computed on the spectral side.
pub fn sobolev_norm(plan: &TransformPlan, profile: &RadialProfile, sigma: f64) -> Result<f64> {
    require_sobolev_index(plan.dim(), sigma)?;
    spectral_sobolev_norm(&plan.forward(profile)?, sigma)
}

/// `‖|D|^σ v(t)‖_{L²}` at every time sample.
pub fn sobolev_norms(plan: &TransformPlan, field: &SpaceTimeField, sigma: f64) -> Result<Vec<f64>> {
    let n = plan.dim();
    require_sobolev_index(n, sigma)?;
    if *field.grid().as_ref() != **plan.radial() {
        return Err(Error::GridMismatch);
    }
    let refs: Vec<&[Complex64]> = field.profiles().iter().map(|p| p.values.as_slice()).collect();
    let w = plan.spectral().power_weights(2.0 * sigma + n as f64 - 1.0);
    Ok(plan.forward_values(&refs).iter().map(|v| spectral_sobolev_with(v, &w, n)).collect())
}

/// Both pieces of the iteration metric and their sum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XNormValue {
    pub sup_sobolev: f64,
    pub weighted_lq: f64,
    pub total: f64,
}

impl XNormValue {
    pub fn new(sup_sobolev: f64, weighted_lq: f64) -> Self {
        Self { sup_sobolev, weighted_lq, total: sup_sobolev + weighted_lq }
    }
}

/// `sup_t ‖|D|^{-s0} v(t)‖_{L²} + ‖|x|^{-α0} v‖_{L^{q0}}` over the samples.
pub fn x_norm(plan: &TransformPlan, field: &SpaceTimeField, exps: &ExponentSet) -> Result<XNormValue> {
    let e = exps.as_f64();
    let sup = sobolev_norms(plan, field, -e.s0)?.into_iter().fold(0.0, f64::max);
    let lq = weighted_spacetime_norm(field, e.q0, e.alpha0)?;
    Ok(XNormValue::new(sup, lq))
}

/// `‖|x|^β φ‖_{L²}` by physical-space quadrature.
pub fn weighted_l2_norm(profile: &RadialProfile, beta: f64) -> Result<f64> {
    let n = profile.grid.dim();
    if !(2.0 * beta + n as f64 > 0.0) {
        return Err(Error::WeightNotIntegrable { alpha: -beta, q: 2.0, n });
    }
    let w = profile.grid.power_weights(n as f64 - 1.0 + 2.0 * beta);
    let s: f64 = profile.values.iter().zip(&w).map(|(v, w)| w * v.norm_sqr()).sum();
    Ok((sphere_area(n) * s).sqrt())
}

/// `‖|D|^{-s0} φ‖_{L²} / ‖|x|^{s0} φ‖_{L²}`.
pub fn dual_hardy_ratio(plan: &TransformPlan, profile: &RadialProfile, s0: f64) -> Result<f64> {
    if !(s0 > 0.0 && s0 < 0.5) {
        return Err(Error::Domain(format!("index {s0} must lie in (0, 1/2)")));
    }
    let lhs = sobolev_norm(plan, profile, -s0)?;
    let rhs = weighted_l2_norm(profile, s0)?;
    if rhs == 0.0 {
        return Err(Error::ZeroData);
    }
    Ok(lhs / rhs)
}

/// Settings for [`evolution_norm`].
#[derive(Clone, Debug)]
pub struct EvolutionNormOptions {
    /// Restrict time to `|t| ≤ T`; `None` integrates over all of `R`.
    pub horizon: Option<f64>,
    /// Include negative times.
    pub two_sided: bool,
    /// Handover time between grid propagation and the lens representation;
    /// `None` picks it from the spatial and spectral extent of the data.
    pub switch_time: Option<f64>,
    /// Gauss-Legendre panels on `[0, t_s]`.
    pub near_panels: usize,
    /// Nodes per panel, near and far.
    pub panel_nodes: usize,
    /// Panels for the far region are geometric in the lens variable down to `2^{-far_levels}`.
    pub far_levels: usize,
}

impl Default for EvolutionNormOptions {
    fn default() -> Self {
        Self { horizon: None, two_sided: true, switch_time: None, near_panels: 12, panel_nodes: 8, far_levels: 12 }
    }
}

/// Output of [`evolution_norm`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionNorm {
    /// The norm over the requested time range.
    pub value: f64,
    /// Norm of the part beyond the horizon (zero without a horizon).
    pub tail: f64,
    /// Handover time actually used.
    pub switch_time: f64,
}

/// Radius containing all but `frac` of `∫ |f|² x^{n-1} dx` over the grid.
fn mass_radius(grid: &RadialGrid, values: &[Complex64], frac: f64) -> f64 {
    let w = grid.weights();
    let total: f64 = values.iter().zip(w).map(|(v, w)| w * v.norm_sqr()).sum();
    let mut tail = 0.0;
    for j in (0..values.len()).rev() {
        tail += w[j] * values[j].norm_sqr();
        if tail > frac * total {
            return grid.nodes()[j];
        }
    }
    grid.nodes()[0]
}

/// Automatic handover time, or a resolution error if no time works.
///
/// The near field must finish before the wave reaches the edge of the ball,
/// and the far field needs the chirp `e^{iσr²/4}` on the support of the data
/// to stay within the spectral grid. Extents are measured as the radii
/// holding all but a tiny fraction of the `L²` mass.
pub fn auto_switch_time(plan: &TransformPlan, phi: &RadialProfile, spectral: &SpectralProfile) -> Result<f64> {
    let r_max = plan.radial().max();
    let rho_max = plan.spectral().max();
    let radius = mass_radius(plan.radial(), &phi.values, 1e-10);
    let band = mass_radius(plan.spectral(), &spectral.values, 1e-8);
    // σ R / 2 is the frequency the chirp adds at the edge of the support
    let budget = (0.8 * rho_max - band).max(0.05 * rho_max);
    let earliest = radius / (2.0 * budget);
    // the evolved wave must stay inside the ball: R + 2 ρ_b t < 0.8 r_max
    let latest = (0.8 * r_max - radius) / (2.0 * band.max(1e-12));
    if earliest > 0.0 && latest > earliest {
        return Ok((earliest * latest).sqrt());
    }
    // Data near the resolution limit: balance the two failure modes by
    // making the highest frequency kept in the near field, (0.9 r_max - R)/2t,
    // equal to the one kept by the chirped transform, ρ_max - R/2t.
    if radius < 0.5 * r_max {
        return Ok(0.45 * r_max / rho_max);
    }
    Err(Error::Resolution(format!(
        "data radius {radius:.3} and bandwidth {band:.3} do not fit the grid (r_max {r_max}, rho_max {rho_max:.3})"
    )))
}

/// Geometric breakpoints in `[0, 1]` refined toward 0, with `extra` inserted.
fn graded_breakpoints(levels: usize, extra: Option<f64>) -> Vec<f64> {
    let mut b: Vec<f64> = (0..=levels).map(|k| 0.5f64.powi((levels - k) as i32)).collect();
    b.insert(0, 0.0);
    if let Some(x) = extra {
        if x > 0.0 && x < 1.0 && !b.contains(&x) {
            b.push(x);
            b.sort_by(|a, c| a.partial_cmp(c).unwrap());
        }
    }
    b
}

/// `‖|x|^{-α} |D|^s U(t) φ‖_{L^q}` over the requested time range, for `q < ∞`.
pub fn evolution_norm(
    plan: &TransformPlan,
    phi: &RadialProfile,
    q: f64,
    alpha: f64,
    s: f64,
    opts: &EvolutionNormOptions,
) -> Result<EvolutionNorm> {
    let n = plan.dim();
    let nf = n as f64;
    require_weight(n, q, alpha)?;
    let kappa = alpha * q + nf * q / 2.0 - nf - 2.0;
    if opts.horizon.is_none() && !(kappa > -1.0) {
        return Err(Error::DivergentTimeIntegral(kappa));
    }
    if let Some(t) = opts.horizon {
        if !(t > 0.0) {
            return Err(Error::Domain(format!("time horizon {t} must be positive")));
        }
    }
    let base = plan.forward(phi)?;
    let lifted = apply_fractional_derivative(&base, s)?;
    let switch = match opts.switch_time {
        Some(t) if t > 0.0 => t,
        Some(t) => return Err(Error::Domain(format!("switch time {t} must be positive"))),
        None => auto_switch_time(plan, phi, &base)?,
    };

    let real_data = phi.values.iter().all(|v| v.im == 0.0);
    let mut sides = vec![lifted.clone()];
    if opts.two_sided && !real_data {
        // U(-t)g = conj(U(t) conj g), and |D|^s commutes with conjugation.
        let conj_phi = phi.conj();
        let conj_base = plan.forward(&conj_phi)?;
        sides.push(apply_fractional_derivative(&conj_base, s)?);
    }

    let radial_w = plan.radial().power_weights(nf - 1.0 - alpha * q);
    let spectral_w = plan.spectral().power_weights(nf - 1.0 - alpha * q);
    let weights = Weights { radial: &radial_w, spectral: &spectral_w, alpha_q: alpha * q };

    let mut inside = 0.0;
    let mut outside = 0.0;
    for side in &sides {
        let (a, b) = one_side(plan, side, q, kappa, switch, opts, &weights)?;
        inside += a;
        outside += b;
    }
    if opts.two_sided && real_data {
        // real data: negative times mirror positive ones
        inside *= 2.0;
        outside *= 2.0;
    }
    Ok(EvolutionNorm { value: inside.powf(1.0 / q), tail: outside.powf(1.0 / q), switch_time: switch })
}

struct Weights<'a> {
    radial: &'a [f64],
    spectral: &'a [f64],
    alpha_q: f64,
}

/// Returns the `q`-th powers of the norm inside and beyond the horizon for `t ≥ 0`.
fn one_side(
    plan: &TransformPlan,
    lifted: &SpectralProfile,
    q: f64,
    kappa: f64,
    switch: f64,
    opts: &EvolutionNormOptions,
    weights: &Weights,
) -> Result<(f64, f64)> {
    let n = plan.dim();
    let nf = n as f64;
    let omega = sphere_area(n);
    let horizon = opts.horizon.unwrap_or(f64::INFINITY);

    // Near field: grid propagation on [0, t_s], split at the horizon if it falls inside.
    let mut near_nodes = Vec::new();
    let panels = opts.near_panels.max(1);
    let mut cuts: Vec<f64> = (0..=panels).map(|k| switch * k as f64 / panels as f64).collect();
    if horizon < switch && !cuts.contains(&horizon) {
        cuts.push(horizon);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    }
    for w in cuts.windows(2) {
        near_nodes.extend(gauss_legendre_on(opts.panel_nodes, w[0], w[1]));
    }
    let times: Vec<f64> = near_nodes.iter().map(|&(t, _)| t).collect();
    let profiles = plan.evolve_many(lifted, &times)?;
    let mut inside = 0.0;
    let mut outside = 0.0;
    for ((t, w), p) in near_nodes.iter().zip(&profiles) {
        let val = w * omega * weighted_power_integral(&p.values, weights.radial, q);
        if *t <= horizon {
            inside += val;
        } else {
            outside += val;
        }
    }

    // Far field in σ = 1/t ∈ (0, 1/t_s] with σ = σ_hi v^m. For κ > -1 the
    // choice m = 1/(κ+1) turns σ^κ dσ into a constant times dv; otherwise the
    // time integral diverges at infinity and only a finite horizon makes sense.
    let sigma_hi = 1.0 / switch;
    let convergent = kappa > -1.0;
    let m = if convergent { 1.0 / (kappa + 1.0) } else { 1.0 };
    let v_horizon = if horizon.is_finite() && horizon > switch {
        Some((1.0 / (horizon * sigma_hi)).powf(1.0 / m))
    } else if horizon <= switch {
        Some(1.0)
    } else {
        None
    };
    let breaks = graded_breakpoints(opts.far_levels, v_horizon);
    let mut far_nodes = Vec::new();
    for w in breaks.windows(2) {
        let keep_all = convergent || v_horizon.is_some_and(|vh| w[0] >= vh);
        if keep_all {
            far_nodes.extend(gauss_legendre_on(opts.panel_nodes, w[0], w[1]));
        }
    }
    if !convergent {
        outside = f64::INFINITY;
    }
    if far_nodes.is_empty() {
        return Ok((inside, outside));
    }
    let g = plan.inverse(lifted)?;
    let chirped: Vec<Vec<Complex64>> = far_nodes
        .iter()
        .map(|&(v, _)| {
            let sigma = sigma_hi * v.powf(m);
            g.grid
                .nodes()
                .iter()
                .zip(&g.values)
                .map(|(&r, x)| x * Complex64::from_polar(1.0, 0.25 * sigma * r * r))
                .collect()
        })
        .collect();
    let refs: Vec<&[Complex64]> = chirped.iter().map(|v| v.as_slice()).collect();
    let transformed = plan.forward_values(&refs);
    let constant = omega * 2f64.powf(nf - weights.alpha_q) * (4.0 * std::f64::consts::PI).powf(-nf * q / 2.0);
    let scale = constant * sigma_hi.powf(kappa + 1.0) * m;
    for ((v, w), psi) in far_nodes.iter().zip(&transformed) {
        let jacobian = if convergent { 1.0 } else { v.powf(kappa) };
        let val = scale * w * jacobian * weighted_power_integral(psi, weights.spectral, q);
        let t = 1.0 / (sigma_hi * v.powf(m));
        if t <= horizon {
            inside += val;
        } else {
            outside += val;
        }
    }
    Ok((inside, outside))
}
