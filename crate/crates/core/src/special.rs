//! Special functions needed by the radial transforms and quadratures.
//!
//! Bessel functions are only required for orders `nu = n/2 - 1` with integer
//! dimension `n >= 2`, i.e. integer or half-integer orders, which is all that is
//! supported here.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

/// Even-index Bernoulli numbers `B_0, B_2, ..., B_24`.
const BERNOULLI_EVEN: [f64; 13] = [
    1.0,
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
];

/// Power series is used below this argument, the large-argument forms above it.
const SERIES_LIMIT: f64 = 8.0;
/// Integer orders switch from the Bessel integral to the Hankel expansion here.
const ASYMPTOTIC_LIMIT: f64 = 25.0;

/// Surface area of the unit sphere `S^{n-1}` in `R^n`.
pub fn sphere_area(n: u32) -> f64 {
    let half = n as f64 / 2.0;
    2.0 * PI.powf(half) / gamma(half)
}

fn is_half_integer(nu: f64) -> bool {
    (nu - nu.floor() - 0.5).abs() < 1e-12
}

fn is_integer(nu: f64) -> bool {
    (nu - nu.round()).abs() < 1e-12
}

/// `x^(-nu) J_nu(x)`, an entire even function of `x`. Valid for every `x >= 0`.
pub fn scaled_bessel_j(nu: f64, x: f64) -> f64 {
    let x = x.abs();
    if x < SERIES_LIMIT {
        scaled_series(nu, x)
    } else {
        bessel_j(nu, x) * x.powf(-nu)
    }
}

fn scaled_series(nu: f64, x: f64) -> f64 {
    let z = -0.25 * x * x;
    let mut term = 1.0 / gamma(nu + 1.0);
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= z / (k * (nu + k));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() || k > 200.0 {
            break;
        }
    }
    sum * 2f64.powf(-nu)
}

/// Bessel function of the first kind `J_nu(x)` for integer or half-integer `nu >= 0`.
///
/// Panics if `nu` is neither.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    assert!(
        nu >= 0.0 && (is_integer(nu) || is_half_integer(nu)),
        "bessel_j supports integer and half-integer orders only, got {nu}"
    );
    let ax = x.abs();
    let parity = if x < 0.0 && is_integer(nu) && (nu.round() as i64) % 2 == 1 { -1.0 } else { 1.0 };
    if ax == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    let value = if ax < SERIES_LIMIT {
        scaled_series(nu, ax) * ax.powf(nu)
    } else if is_half_integer(nu) || ax >= ASYMPTOTIC_LIMIT {
        // For half-integer orders the Hankel expansion terminates and is exact.
        hankel_expansion(nu, ax)
    } else {
        bessel_integral(nu.round() as i32, ax)
    };
    parity * value
}

/// `J_m(x) = (1/pi) int_0^pi cos(m t - x sin t) dt`; the trapezoid rule is
/// spectrally accurate on this periodic integrand.
fn bessel_integral(m: i32, x: f64) -> f64 {
    const PANELS: usize = 96;
    let h = PI / PANELS as f64;
    let mut sum = 0.5 * (1.0 + (m as f64 * PI).cos());
    for k in 1..PANELS {
        let t = k as f64 * h;
        sum += (m as f64 * t - x * t.sin()).cos();
    }
    sum * h / PI
}

fn hankel_expansion(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let terminating = is_half_integer(nu);
    let mut p = 0.0;
    let mut q = 0.0;
    let mut coeff = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            coeff *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        }
        let magnitude = coeff.abs();
        if coeff == 0.0 {
            break;
        }
        if magnitude > prev && !terminating {
            break;
        }
        prev = magnitude;
        // a_k / x^k with alternating signs split between the P and Q series.
        match k % 4 {
            0 => p += coeff,
            1 => q += coeff,
            2 => p -= coeff,
            _ => q -= coeff,
        }
        if magnitude < 1e-17 * (p.abs() + q.abs()) {
            break;
        }
    }
    let phase = (0.5 * nu + 0.25) * PI;
    let (s, c) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = c * cp + s * sp;
    let sin_chi = s * cp - c * sp;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Riemann zeta function on the real line, `s != 1`.
pub fn zeta(s: f64) -> f64 {
    assert!((s - 1.0).abs() > 1e-12, "zeta has a pole at s = 1");
    if s <= 0.0 && is_integer(s) {
        let m = (-s).round() as usize;
        if m == 0 {
            return -0.5;
        }
        if m % 2 == 0 {
            return 0.0;
        }
        // zeta(-m) = -B_{m+1} / (m + 1) for odd m
        let idx = (m + 1) / 2;
        assert!(idx < BERNOULLI_EVEN.len(), "zeta({s}) outside the tabulated range");
        return -BERNOULLI_EVEN[idx] / (m as f64 + 1.0);
    }
    if s < -1.0 {
        // reflection keeps the Euler-Maclaurin sum away from cancellation
        let reflected = zeta(1.0 - s);
        return 2f64.powf(s) * PI.powf(s - 1.0) * (0.5 * PI * s).sin() * gamma(1.0 - s) * reflected;
    }
    zeta_euler_maclaurin(s)
}

fn zeta_euler_maclaurin(s: f64) -> f64 {
    const N: usize = 12;
    let nf = N as f64;
    let mut sum: f64 = (1..N).map(|k| (k as f64).powf(-s)).sum();
    sum += nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s);
    // sum_j B_2j/(2j)! * s(s+1)...(s+2j-2) * N^(-s-2j+1)
    let mut rising = s;
    let mut factorial = 2.0;
    let mut power = nf.powf(-s - 1.0);
    for j in 1..BERNOULLI_EVEN.len() {
        sum += BERNOULLI_EVEN[j] / factorial * rising * power;
        let a = 2.0 * j as f64;
        rising *= (s + a - 1.0) * (s + a);
        factorial *= (a + 1.0) * (a + 2.0);
        power /= nf * nf;
    }
    sum
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(count: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(count >= 1);
    let n = count;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let pn = if n == 0 { 1.0 } else { p1 };
    let pm = if n == 0 { 0.0 } else { p0 };
    let d = n as f64 * (x * pn - pm) / (x * x - 1.0);
    (pn, d)
}

/// Gauss-Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(count: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(count);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    x.iter().zip(&w).map(|(&xi, &wi)| (mid + half * xi, half * wi)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_integer_orders_match_spherical_bessel_closed_forms() {
        for &x in &[0.3, 1.0, 5.0, 7.9, 8.1, 11.9, 12.1, 30.0, 400.0] {
            let j_half = (2.0 / (PI * x)).sqrt() * x.sin();
            assert!((bessel_j(0.5, x) - j_half).abs() < 1e-13, "x={x}");
            let j_3half = (2.0 / (PI * x)).sqrt() * (x.sin() / x - x.cos());
            assert!((bessel_j(1.5, x) - j_3half).abs() < 1e-13, "x={x}");
        }
    }

    #[test]
    fn integer_orders_continuous_across_regimes() {
        // published values
        assert!((bessel_j(0.0, 1.0) - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((bessel_j(1.0, 10.0) - 0.043_472_746_168_861_44).abs() < 1e-13);
        assert!((bessel_j(0.0, 20.0) - 0.167_024_664_340_583_2).abs() < 1e-13);
        assert!((bessel_j(2.0, 30.0) - 0.078_451_246_073_265_35).abs() < 1e-13);
        for m in 0..6 {
            let nu = m as f64;
            for &edge in &[SERIES_LIMIT, ASYMPTOTIC_LIMIT] {
                let lo = bessel_j(nu, edge - 1e-12);
                let hi = bessel_j(nu, edge + 1e-12);
                assert!((lo - hi).abs() < 1e-12, "order {m} at {edge}: {lo} vs {hi}");
            }
        }
    }

    #[test]
    fn bessel_integral_agrees_with_series_in_overlap() {
        for m in 0..6 {
            for &x in &[2.0, 6.0, 7.9, 9.0] {
                let a = bessel_integral(m, x);
                let b = scaled_series(m as f64, x) * x.powi(m);
                assert!((a - b).abs() < 1e-12, "m={m} x={x}: {a} {b}");
            }
        }
    }

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((zeta(-1.0) + 1.0 / 12.0).abs() < 1e-15);
        assert_eq!(zeta(-2.0), 0.0);
        assert!((zeta(-3.0) - 1.0 / 120.0).abs() < 1e-15);
        assert!((zeta(0.5) + 1.460_354_508_809_586_8).abs() < 1e-13);
        assert!((zeta(-0.5) + 0.207_886_224_977_354_57).abs() < 1e-13);
        // reflected branch must meet the direct branch
        assert!((zeta(-1.0 - 1e-9) - zeta(-1.0 + 1e-9)).abs() < 1e-9);
        assert!((zeta(-2.5) - 0.008_516_928_777_850_331).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre_on(8, 0.0, 2.0);
        let integral: f64 = rule.iter().map(|&(x, w)| w * x.powi(15)).sum();
        assert!((integral - 2f64.powi(16) / 16.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
    }
}
