//! Radial Fourier analysis in `R^n`.
//!
//! With the convention `φ̂(ξ) = ∫ e^{-ix·ξ} φ(x) dx`, a radial function and its
//! transform are linked through the Fourier transform of the surface measure
//! of `S^{n-1}`:
//!
//! ```text
//! ψ(ρ) = ∫_0^∞ φ(r) dσ̂(ρ r) r^{n-1} dr,
//! φ(r) = (2π)^{-n} ∫_0^∞ ψ(ρ) dσ̂(ρ r) ρ^{n-1} dρ,
//! dσ̂(y) = (2π)^{n/2} |y|^{1-n/2} J_{n/2-1}(|y|).
//! ```
//!
//! Both integrals are evaluated by direct quadrature against a precomputed
//! kernel matrix. The free propagator `U(t) = e^{itΔ}` is the multiplier
//! `e^{-itρ²}` on the spectral side.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::par;
use crate::special::{scaled_bessel_j, sphere_area, zeta};

/// Default number of radial nodes.
pub const DEFAULT_NODES: usize = 2048;
/// Default truncation radius.
pub const DEFAULT_RADIUS: f64 = 40.0;

/// Uniform nodes `x_j = j h`, `j = 1..=len`, for integrals `∫_0^∞ f(x) x^{n-1} dx`.
///
/// The origin is excluded. Weights are trapezoid weights with the power
/// `x^γ` folded in, plus a zeta-function endpoint correction at `x = 0` that
/// restores high order for integrands `x^γ f(x)` with `f` smooth and even.
#[derive(Clone, Debug)]
pub struct RadialGrid {
    dim: u32,
    step: f64,
    len: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PartialEq for RadialGrid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.len == other.len && self.step == other.step
    }
}

impl RadialGrid {
    pub fn new(dim: u32, len: usize, max: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Domain(format!("dimension {dim} must be at least 2")));
        }
        if len < 8 {
            return Err(Error::Domain(format!("grid needs at least 8 nodes, got {len}")));
        }
        if !(max.is_finite() && max > 0.0) {
            return Err(Error::Domain(format!("grid radius {max} must be positive")));
        }
        let step = max / len as f64;
        let nodes: Vec<f64> = (1..=len).map(|j| j as f64 * step).collect();
        let mut grid = Self { dim, step, len, nodes, weights: Vec::new() };
        grid.weights = grid.power_weights(dim as f64 - 1.0);
        Ok(grid)
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn max(&self) -> f64 {
        self.nodes[self.len - 1]
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for `∫_0^∞ f(x) x^{n-1} dx`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights for `∫_0^∞ f(x) x^γ dx`, `γ > -1`.
    pub fn power_weights(&self, gamma: f64) -> Vec<f64> {
        assert!(gamma > -1.0, "x^{gamma} is not integrable at the origin");
        let h = self.step;
        let mut w: Vec<f64> = self.nodes.iter().map(|&x| h * x.powf(gamma)).collect();
        w[self.len - 1] *= 0.5;
        // ζ vanishes at the negative even integers, so positive even powers need no correction
        let even_integer = gamma >= 1.5 && (gamma - gamma.round()).abs() < 1e-14 && (gamma.round() as i64) % 2 == 0;
        if !even_integer {
            // sum_j h (jh)^γ f(jh) = ∫ + ζ(-γ) h^{γ+1} f(0) + ζ(-γ-2) h^{γ+3} f''(0)/2 + ...
            // with f(0) and f''(0)/2 from the even quartic through the first three nodes.
            let z0 = zeta(-gamma);
            let z2 = zeta(-gamma - 2.0);
            let scale = h.powf(gamma + 1.0);
            for j in 0..3 {
                w[j] -= scale * (z0 * EVEN_FIT_VALUE[j] + z2 * EVEN_FIT_CURVATURE[j]);
            }
        }
        w
    }

    /// Measure of `S^{n-1}`.
    pub fn sphere(&self) -> f64 {
        sphere_area(self.dim)
    }
}

// Rows of the inverse of [[1,1,1],[1,4,16],[1,9,81]]: the even quartic
// a + b x^2 + c x^4 through (j, f_j), j = 1..3, has a = Σ VALUE_j f_j and
// b h^2 = Σ CURVATURE_j f_j.
const EVEN_FIT_VALUE: [f64; 3] = [1.5, -0.6, 0.1];
const EVEN_FIT_CURVATURE: [f64; 3] = [-65.0 / 120.0, 80.0 / 120.0, -15.0 / 120.0];

/// Radial function sampled on physical radii.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<Complex64>,
}

/// Radial function sampled on frequency radii.
#[derive(Clone, Debug)]
pub struct SpectralProfile {
    pub grid: Arc<RadialGrid>,
    pub values: Vec<Complex64>,
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    if values.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::Domain("profile contains non-finite samples".into()))
    }
}

fn quadrature_l2(grid: &RadialGrid, values: &[Complex64]) -> f64 {
    let s: f64 = grid.weights().iter().zip(values).map(|(w, v)| w * v.norm_sqr()).sum();
    (grid.sphere() * s).sqrt()
}

impl RadialProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<RadialGrid>) -> Self {
        let values = vec![Complex64::new(0.0, 0.0); grid.len()];
        Self { grid, values }
    }

    /// `‖φ‖_{L²(R^n)}` by quadrature.
    pub fn l2_norm(&self) -> f64 {
        quadrature_l2(&self.grid, &self.values)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * c).collect() }
    }

    pub fn conj(&self) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v.conj()).collect() }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }
}

impl SpectralProfile {
    pub fn new(grid: Arc<RadialGrid>, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<RadialGrid>, f: impl Fn(f64) -> Complex64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        Self { grid, values }
    }

    /// `(2π)^{-n/2} ‖ψ‖_{L²(R^n)}`, which equals `‖φ‖_{L²}` by Plancherel.
    pub fn l2_norm(&self) -> f64 {
        quadrature_l2(&self.grid, &self.values) * (2.0 * PI).powf(-(self.grid.dim() as f64) / 2.0)
    }

    /// Multiplier `e^{-itρ²}`, the spectral form of `U(t)`.
    pub fn evolve(&self, t: f64) -> Self {
        let values = self
            .grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&rho, v)| v * Complex64::from_polar(1.0, -t * rho * rho))
            .collect();
        Self { grid: self.grid.clone(), values }
    }
}

/// `|D_x|^s`, i.e. multiplication of `ψ(ρ)` by `ρ^s`. Requires `s > -n/2`.
pub fn apply_fractional_derivative(spectral: &SpectralProfile, s: f64) -> Result<SpectralProfile> {
    let n = spectral.grid.dim() as f64;
    if !(s > -n / 2.0) || !s.is_finite() {
        return Err(Error::Domain(format!("|D|^{s} needs s > -n/2 = {} for local square integrability", -n / 2.0)));
    }
    if s == 0.0 {
        return Ok(spectral.clone());
    }
    let values = spectral.grid.nodes().iter().zip(&spectral.values).map(|(&rho, v)| v * rho.powf(s)).collect();
    Ok(SpectralProfile { grid: spectral.grid.clone(), values })
}

/// Fourier transform of the surface measure of `S^{n-1}` at `|y| = r`.
pub fn surface_measure_ft(n: u32, r: f64) -> f64 {
    assert!(n >= 2, "surface measure transform needs n >= 2");
    let r = r.abs();
    if n == 3 {
        return if r < 1e-4 {
            let r2 = r * r;
            4.0 * PI * (1.0 - r2 / 6.0 + r2 * r2 / 120.0)
        } else {
            4.0 * PI * r.sin() / r
        };
    }
    let nu = n as f64 / 2.0 - 1.0;
    (2.0 * PI).powf(n as f64 / 2.0) * scaled_bessel_j(nu, r)
}

/// Immutable kernel matrix `dσ̂(ρ_k r_j)` for a fixed pair of grids.
#[derive(Debug)]
pub struct TransformPlan {
    radial: Arc<RadialGrid>,
    spectral: Arc<RadialGrid>,
    /// Spectral-major: `kernel[k * nr + j]`.
    kernel: Vec<f64>,
    /// Radial-major: `kernel_t[j * ns + k]`.
    kernel_t: Vec<f64>,
    /// Origin corrections for even `n`, where the trapezoid sum of an odd
    /// integrand loses accuracy at high frequency.
    forward_fix: Option<OriginFix>,
    inverse_fix: Option<OriginFix>,
}

/// Rank-three correction for the quadrature error at `r = 0`.
///
/// Samples at the first three nodes are fitted by `(x/h)^{2m} e^{-x²/2}`,
/// `m = 0, 1, 2`, whose transforms are known in closed form; the difference
/// between the exact and the discrete transform of the fit is added back.
#[derive(Debug)]
struct OriginFix {
    fit: [[f64; 3]; 3],
    delta: Vec<[f64; 3]>,
}

impl OriginFix {
    fn new(
        input: &RadialGrid,
        output: &RadialGrid,
        exact: impl Fn(usize, f64) -> f64,
        discrete: impl Fn(&[Vec<Complex64>]) -> Vec<Vec<Complex64>>,
    ) -> Self {
        let h = input.step();
        let basis = |m: usize, x: f64| (x / h).powi(2 * m as i32) * (-0.5 * x * x).exp();
        let mut g = [[0.0; 3]; 3];
        for (i, row) in g.iter_mut().enumerate() {
            for (m, v) in row.iter_mut().enumerate() {
                *v = basis(m, input.nodes()[i]);
            }
        }
        let fit = invert3(&g);
        let samples: Vec<Vec<Complex64>> =
            (0..3).map(|m| input.nodes().iter().map(|&x| Complex64::new(basis(m, x), 0.0)).collect()).collect();
        let approx = discrete(&samples);
        let delta = output
            .nodes()
            .iter()
            .enumerate()
            .map(|(k, &y)| {
                let mut d = [0.0; 3];
                for m in 0..3 {
                    d[m] = exact(m, y) * h.powi(-2 * m as i32) - approx[m][k].re;
                }
                d
            })
            .collect();
        Self { fit, delta }
    }

    fn apply(&self, input: &[Complex64], output: &mut [Complex64]) {
        let mut a = [Complex64::new(0.0, 0.0); 3];
        for (m, am) in a.iter_mut().enumerate() {
            for i in 0..3 {
                *am += input[i] * self.fit[m][i];
            }
        }
        for (o, d) in output.iter_mut().zip(&self.delta) {
            *o += a[0] * d[0] + a[1] * d[1] + a[2] * d[2];
        }
    }
}

fn invert3(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let c = |i: usize, j: usize| {
        let (i1, i2) = ((i + 1) % 3, (i + 2) % 3);
        let (j1, j2) = ((j + 1) % 3, (j + 2) % 3);
        a[i1][j1] * a[i2][j2] - a[i1][j2] * a[i2][j1]
    };
    let det = a[0][0] * c(0, 0) + a[0][1] * c(0, 1) + a[0][2] * c(0, 2);
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = c(j, i) / det;
        }
    }
    inv
}

/// Transform of `x^{2m} e^{-x²/2}` in `R^n`, evaluated at radius `y`.
///
/// Uses `F[|x|² f] = -Δ F[f]` with the radial Laplacian acting on
/// `Q(y²) e^{-y²/2}`.
fn gaussian_moment_transform(n: u32, m: usize, y: f64) -> f64 {
    let nf = n as f64;
    let a = 0.5;
    let mut q = vec![1.0];
    for _ in 0..m {
        // Δ[Q(u) e^{-au}] = [2n(Q' - aQ) + 4u(Q'' - 2aQ' + a²Q)] e^{-au}, u = y²
        let deg = q.len();
        let d1: Vec<f64> = (1..deg).map(|k| k as f64 * q[k]).collect();
        let d2: Vec<f64> = (2..deg).map(|k| (k * (k - 1)) as f64 * q[k]).collect();
        let mut next = vec![0.0; deg + 1];
        for k in 0..deg {
            let qp = d1.get(k).copied().unwrap_or(0.0);
            let qpp = d2.get(k).copied().unwrap_or(0.0);
            next[k] -= 2.0 * nf * (qp - a * q[k]);
            next[k + 1] -= 4.0 * (qpp - 2.0 * a * qp + a * a * q[k]);
        }
        q = next;
    }
    let u = y * y;
    let poly = q.iter().rev().fold(0.0, |acc, c| acc * u + c);
    (2.0 * PI).powf(nf / 2.0) * poly * (-a * u).exp()
}

impl TransformPlan {
    /// Radial grid on `(0, r_max]` with `len` nodes and the dual spectral grid
    /// `ρ_k = k π / r_max`.
    pub fn new(dim: u32, len: usize, r_max: f64) -> Result<Self> {
        let radial = Arc::new(RadialGrid::new(dim, len, r_max)?);
        let spectral = Arc::new(RadialGrid::new(dim, len, len as f64 * PI / r_max)?);
        Ok(Self::with_grids(radial, spectral))
    }

    /// Default plan: 2048 nodes on `(0, 40]`.
    pub fn default_for(dim: u32) -> Result<Self> {
        Self::new(dim, DEFAULT_NODES, DEFAULT_RADIUS)
    }

    pub fn with_grids(radial: Arc<RadialGrid>, spectral: Arc<RadialGrid>) -> Self {
        assert_eq!(radial.dim(), spectral.dim(), "grids disagree on the dimension");
        let n = radial.dim();
        let nr = radial.len();
        let ns = spectral.len();
        let rows: Vec<Vec<f64>> = par::map_indexed(ns, |k| {
            let rho = spectral.nodes()[k];
            radial.nodes().iter().map(|&r| surface_measure_ft(n, rho * r)).collect()
        });
        let kernel: Vec<f64> = rows.into_iter().flatten().collect();
        let mut kernel_t = vec![0.0; nr * ns];
        for k in 0..ns {
            for j in 0..nr {
                kernel_t[j * ns + k] = kernel[k * nr + j];
            }
        }
        let mut plan = Self { radial, spectral, kernel, kernel_t, forward_fix: None, inverse_fix: None };
        if n % 2 == 0 {
            let forward_fix = OriginFix::new(
                &plan.radial,
                &plan.spectral,
                |m, y| gaussian_moment_transform(n, m, y),
                |v| plan.forward_raw(v),
            );
            let inverse_fix = OriginFix::new(
                &plan.spectral,
                &plan.radial,
                |m, y| gaussian_moment_transform(n, m, y) * (2.0 * PI).powi(-(n as i32)),
                |v| plan.inverse_raw(v),
            );
            plan.forward_fix = Some(forward_fix);
            plan.inverse_fix = Some(inverse_fix);
        }
        plan
    }

    pub fn dim(&self) -> u32 {
        self.radial.dim()
    }

    pub fn radial(&self) -> &Arc<RadialGrid> {
        &self.radial
    }

    pub fn spectral(&self) -> &Arc<RadialGrid> {
        &self.spectral
    }

    fn check_radial(&self, grid: &RadialGrid) -> Result<()> {
        if *grid == *self.radial {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn check_spectral(&self, grid: &RadialGrid) -> Result<()> {
        if *grid == *self.spectral {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `ψ(ρ) = ∫ φ(r) dσ̂(ρr) r^{n-1} dr`.
    pub fn forward(&self, profile: &RadialProfile) -> Result<SpectralProfile> {
        self.check_radial(&profile.grid)?;
        let values = self.forward_values(&[&profile.values]).pop().unwrap();
        Ok(SpectralProfile { grid: self.spectral.clone(), values })
    }

    /// `φ(r) = (2π)^{-n} ∫ ψ(ρ) dσ̂(ρr) ρ^{n-1} dρ`.
    pub fn inverse(&self, spectral: &SpectralProfile) -> Result<RadialProfile> {
        self.check_spectral(&spectral.grid)?;
        let values = self.inverse_values(&[&spectral.values]).pop().unwrap();
        Ok(RadialProfile { grid: self.radial.clone(), values })
    }

    /// Forward transform of several sample vectors on the radial grid.
    pub fn forward_values(&self, inputs: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        let mut out = self.forward_raw(inputs);
        if let Some(fix) = &self.forward_fix {
            for (input, o) in inputs.iter().zip(out.iter_mut()) {
                fix.apply(input, o);
            }
        }
        out
    }

    /// Inverse transform of several sample vectors on the spectral grid.
    pub fn inverse_values(&self, inputs: &[&[Complex64]]) -> Vec<Vec<Complex64>> {
        let mut out = self.inverse_raw(inputs);
        if let Some(fix) = &self.inverse_fix {
            for (input, o) in inputs.iter().zip(out.iter_mut()) {
                fix.apply(input, o);
            }
        }
        out
    }

    fn forward_raw<V: AsRef<[Complex64]>>(&self, inputs: &[V]) -> Vec<Vec<Complex64>> {
        let weighted: Vec<Vec<Complex64>> = inputs
            .iter()
            .map(|v| {
                let v = v.as_ref();
                assert_eq!(v.len(), self.radial.len());
                v.iter().zip(self.radial.weights()).map(|(x, w)| x * w).collect()
            })
            .collect();
        matvec_batch(&self.kernel, self.radial.len(), self.spectral.len(), &weighted, 1.0)
    }

    fn inverse_raw<V: AsRef<[Complex64]>>(&self, inputs: &[V]) -> Vec<Vec<Complex64>> {
        let weighted: Vec<Vec<Complex64>> = inputs
            .iter()
            .map(|v| {
                let v = v.as_ref();
                assert_eq!(v.len(), self.spectral.len());
                v.iter().zip(self.spectral.weights()).map(|(x, w)| x * w).collect()
            })
            .collect();
        let scale = (2.0 * PI).powi(-(self.dim() as i32));
        matvec_batch(&self.kernel_t, self.spectral.len(), self.radial.len(), &weighted, scale)
    }

    /// Forward transform evaluated at an arbitrary frequency radius.
    pub fn forward_at(&self, profile: &RadialProfile, rho: f64) -> Result<Complex64> {
        self.check_radial(&profile.grid)?;
        let n = self.dim();
        Ok(self
            .radial
            .nodes()
            .iter()
            .zip(self.radial.weights())
            .zip(&profile.values)
            .map(|((&r, &w), v)| v * (w * surface_measure_ft(n, rho * r)))
            .sum())
    }

    /// `U(t)φ = e^{itΔ}φ`.
    pub fn propagate_free(&self, profile: &RadialProfile, t: f64) -> Result<RadialProfile> {
        if t == 0.0 {
            self.check_radial(&profile.grid)?;
            return Ok(profile.clone());
        }
        let spectral = self.forward(profile)?;
        self.inverse(&spectral.evolve(t))
    }

    /// `|D|^s U(t) φ` for several times from one forward transform.
    pub fn evolve_many(&self, spectral: &SpectralProfile, times: &[f64]) -> Result<Vec<RadialProfile>> {
        self.check_spectral(&spectral.grid)?;
        let evolved: Vec<Vec<Complex64>> = times.iter().map(|&t| spectral.evolve(t).values).collect();
        let refs: Vec<&[Complex64]> = evolved.iter().map(|v| v.as_slice()).collect();
        Ok(self
            .inverse_values(&refs)
            .into_iter()
            .map(|values| RadialProfile { grid: self.radial.clone(), values })
            .collect())
    }
}

/// Rows per block handed to the matrix product. Fixed, so the arithmetic for
/// every output entry is the same whatever the thread count.
const ROW_BLOCK: usize = 64;

/// `out[b][row] = scale * Σ_col matrix[row * cols + col] * inputs[b][col]`.
fn matvec_batch(
    matrix: &[f64],
    cols: usize,
    rows: usize,
    inputs: &[Vec<Complex64>],
    scale: f64,
) -> Vec<Vec<Complex64>> {
    let batch = inputs.len();
    let width = 2 * batch;
    // columns (re_0, im_0, re_1, im_1, ...), row-major
    let mut packed = vec![0.0; cols * width];
    for (b, v) in inputs.iter().enumerate() {
        for (j, c) in v.iter().enumerate() {
            packed[j * width + 2 * b] = c.re;
            packed[j * width + 2 * b + 1] = c.im;
        }
    }
    let blocks = rows.div_ceil(ROW_BLOCK);
    let products: Vec<Vec<f64>> = par::map_indexed(blocks, |blk| {
        let r0 = blk * ROW_BLOCK;
        let m = ROW_BLOCK.min(rows - r0);
        let mut c = vec![0.0; m * width];
        // SAFETY: the slices cover m x cols, cols x width and m x width
        // row-major matrices with the strides given.
        unsafe {
            matrixmultiply::dgemm(
                m,
                cols,
                width,
                scale,
                matrix[r0 * cols..].as_ptr(),
                cols as isize,
                1,
                packed.as_ptr(),
                width as isize,
                1,
                0.0,
                c.as_mut_ptr(),
                width as isize,
                1,
            );
        }
        c
    });
    let mut out = vec![vec![Complex64::new(0.0, 0.0); rows]; batch];
    for (blk, c) in products.iter().enumerate() {
        let r0 = blk * ROW_BLOCK;
        for (i, row) in c.chunks_exact(width).enumerate() {
            for (b, o) in out.iter_mut().enumerate() {
                o[r0 + i] = Complex64::new(row[2 * b], row[2 * b + 1]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::gamma;

    fn gaussian(grid: &Arc<RadialGrid>) -> RadialProfile {
        RadialProfile::from_fn(grid.clone(), |r| Complex64::new((-0.5 * r * r).exp(), 0.0))
    }

    #[test]
    fn quadrature_exact_on_gaussian_moments() {
        for n in 2..=7u32 {
            let grid = RadialGrid::new(n, DEFAULT_NODES, DEFAULT_RADIUS).unwrap();
            let approx: f64 = grid.nodes().iter().zip(grid.weights()).map(|(&r, w)| w * (-r * r).exp()).sum();
            let exact = gamma(n as f64 / 2.0) / 2.0;
            let tol = if n % 2 == 1 { 1e-13 } else { 1e-10 };
            assert!((approx - exact).abs() < tol * exact, "n={n}: {approx} vs {exact}");
        }
    }

    #[test]
    fn fractional_power_weights_corrected() {
        // ∫ r^γ e^{-r²} dr = Γ((γ+1)/2)/2
        let grid = RadialGrid::new(3, 2048, 40.0).unwrap();
        for &g in &[-0.5, 0.0, 0.3, 1.0, 1.68, 2.0, 2.5, 4.0] {
            let w = grid.power_weights(g);
            let approx: f64 = grid.nodes().iter().zip(&w).map(|(&r, w)| w * (-r * r).exp()).sum();
            let exact = gamma((g + 1.0) / 2.0) / 2.0;
            assert!((approx - exact).abs() < 1e-9 * exact, "γ={g}: {approx} vs {exact}");
        }
    }

    #[test]
    fn surface_measure_at_origin_is_sphere_area() {
        for n in 2..=8 {
            assert!((surface_measure_ft(n, 0.0) - sphere_area(n)).abs() < 1e-12 * sphere_area(n));
        }
        assert!((surface_measure_ft(3, 1.0) - 10.574_236_256_3).abs() < 1e-6);
    }

    #[test]
    fn gaussian_transform_pair() {
        let plan = TransformPlan::default_for(3).unwrap();
        let g = gaussian(plan.radial());
        let psi = plan.forward(&g).unwrap();
        let c = (2.0 * PI).powf(1.5);
        let err = psi
            .grid
            .nodes()
            .iter()
            .zip(&psi.values)
            .map(|(&rho, v)| (v - c * (-0.5 * rho * rho).exp()).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10 * c, "{err}");
    }

    #[test]
    fn zero_maps_to_zero_and_grid_mismatch_rejected() {
        let plan = TransformPlan::new(3, 64, 10.0).unwrap();
        let z = RadialProfile::zeros(plan.radial().clone());
        assert!(plan.forward(&z).unwrap().values.iter().all(|v| v.norm() == 0.0));
        let other = Arc::new(RadialGrid::new(3, 64, 11.0).unwrap());
        assert!(matches!(plan.forward(&RadialProfile::zeros(other)), Err(Error::GridMismatch)));
    }

    #[test]
    fn fractional_derivative_domain() {
        let plan = TransformPlan::new(3, 64, 10.0).unwrap();
        let psi = plan.forward(&gaussian(plan.radial())).unwrap();
        assert!(apply_fractional_derivative(&psi, -1.5).is_err());
        assert!(apply_fractional_derivative(&psi, -1.49).is_ok());
        let id = apply_fractional_derivative(&psi, 0.0).unwrap();
        assert_eq!(id.values, psi.values);
    }
}
