//! Reference computations that share no code with the library.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;

/// `|S^{m}|` by the recurrence `|S^m| = 2π/(m-1) |S^{m-2}|`.
pub fn sphere_area_rec(n: u32) -> f64 {
    let m = n - 1;
    match m {
        0 => 2.0,
        1 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 1.0) * sphere_area_rec(n - 2),
    }
}

/// `∫_{S^{n-1}} e^{-i r ω_1} dσ(ω)` by composite Simpson in the polar angle.
pub fn sphere_fourier_quadrature(n: u32, r: f64) -> f64 {
    let panels = 20_000;
    let h = PI / panels as f64;
    let f = |th: f64| (r * th.cos()).cos() * th.sin().powi(n as i32 - 2);
    let mut s = f(0.0) + f(PI);
    for k in 1..panels {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    let polar = if n == 2 { 2.0 } else { sphere_area_rec(n - 1) };
    polar * s * h / 3.0
}

/// `e^{itΔ} e^{-|x|²/2}` in closed form.
pub fn evolved_gaussian(n: u32, t: f64, r: f64) -> Complex64 {
    let a = Complex64::new(1.0, 2.0 * t);
    a.powf(-(n as f64) / 2.0) * (-(r * r) / (2.0 * a)).exp()
}

/// `-Δf` for a radial `f` by fourth-order central differences.
pub fn minus_laplacian_fd(n: u32, f: impl Fn(f64) -> f64, r: f64, h: f64) -> f64 {
    let (m2, m1, c, p1, p2) = (f(r - 2.0 * h), f(r - h), f(r), f(r + h), f(r + 2.0 * h));
    let d2 = (-p2 + 16.0 * p1 - 30.0 * c + 16.0 * m1 - m2) / (12.0 * h * h);
    let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) / (12.0 * h);
    -(d2 + (n as f64 - 1.0) / r * d1)
}

/// Solves `A x = d` for tridiagonal `A` with constant off-diagonals.
fn thomas(lower: Complex64, diag: Complex64, upper: Complex64, d: &[Complex64]) -> Vec<Complex64> {
    let m = d.len();
    let mut c = vec![Complex64::new(0.0, 0.0); m];
    let mut x = vec![Complex64::new(0.0, 0.0); m];
    c[0] = upper / diag;
    x[0] = d[0] / diag;
    for i in 1..m {
        let den = diag - lower * c[i - 1];
        c[i] = upper / den;
        x[i] = (d[i] - lower * x[i - 1]) / den;
    }
    for i in (0..m - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    x
}

/// Crank–Nicolson for `i u_t + Δu = F` with radial `u` in three dimensions,
/// via `v = r u`, which solves `i v_t + v_rr = r F` with `v(0) = v(R) = 0`.
pub struct CrankNicolson3 {
    pub h: f64,
    pub radius: f64,
    pub dt: f64,
}

impl CrankNicolson3 {
    pub fn nodes(&self) -> Vec<f64> {
        let m = (self.radius / self.h).round() as usize;
        (1..m).map(|j| j as f64 * self.h).collect()
    }

    /// `u(t_end)` at [`Self::nodes`], starting from `u0`.
    pub fn run(
        &self,
        u0: impl Fn(f64) -> Complex64,
        forcing: impl Fn(f64, f64) -> Complex64,
        t_end: f64,
    ) -> Vec<Complex64> {
        let r = self.nodes();
        let steps = (t_end / self.dt).round() as usize;
        let dt = t_end / steps as f64;
        let i = Complex64::i();
        let k = i * dt / (2.0 * self.h * self.h);
        let mut v: Vec<Complex64> = r.iter().map(|&x| x * u0(x)).collect();
        let g = |t: f64| -> Vec<Complex64> { r.iter().map(|&x| x * forcing(t, x)).collect() };
        let mut g_now = g(0.0);
        for s in 0..steps {
            let t1 = (s + 1) as f64 * dt;
            let g_next = g(t1);
            let m = v.len();
            let rhs: Vec<Complex64> = (0..m)
                .map(|j| {
                    let left = if j > 0 { v[j - 1] } else { Complex64::new(0.0, 0.0) };
                    let right = if j + 1 < m { v[j + 1] } else { Complex64::new(0.0, 0.0) };
                    v[j] + k * (left - 2.0 * v[j] + right) - i * dt / 2.0 * (g_now[j] + g_next[j])
                })
                .collect();
            v = thomas(-k, 1.0 + 2.0 * k, -k, &rhs);
            g_now = g_next;
        }
        v.iter().zip(&r).map(|(v, x)| v / x).collect()
    }
}

/// Linear interpolation of samples on a uniform grid `r_j = j h`, `j >= 1`.
pub fn interpolate(step: f64, values: &[Complex64], r: f64) -> Complex64 {
    let x = r / step - 1.0;
    let j = (x.floor() as usize).min(values.len() - 2);
    let w = x - j as f64;
    values[j] * (1.0 - w) + values[j + 1] * w
}

/// `exp(-1/(1-x²))` on `(-1, 1)`.
pub fn bump(x: f64) -> f64 {
    if x.abs() < 1.0 {
        (-1.0 / (1.0 - x * x)).exp()
    } else {
        0.0
    }
}

/// Relative discrete `ℓ²` distance on a common set of nodes, with radial
/// weight `r^{n-1}`.
pub fn weighted_rel_l2(n: u32, r: &[f64], a: &[Complex64], b: &[Complex64]) -> f64 {
    let w = |x: f64| x.powi(n as i32 - 1);
    let num: f64 = r.iter().zip(a.iter().zip(b)).map(|(&x, (u, v))| w(x) * (u - v).norm_sqr()).sum();
    let den: f64 = r.iter().zip(b).map(|(&x, v)| w(x) * v.norm_sqr()).sum();
    (num / den).sqrt()
}
