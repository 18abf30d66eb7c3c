//! Exact exponent bookkeeping for the small-data problem.
//!
//! Every strict inequality here is decided in exact rational arithmetic; only
//! [`p0_root`] is irrational and is returned as `f64`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// Integer ratio as an exact rational.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn to_f64(q: &Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"11/5"`, `"3"`, or a terminating decimal such as `"2.2"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let text = text.trim();
    let bad = || Error::Config(format!("cannot parse `{text}` as a rational"));
    if let Some((num, den)) = text.split_once('/') {
        let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
        let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
        if den.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(num, den));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        let negative = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return Err(bad());
        }
        let num = BigInt::from_str(&digits).map_err(|_| bad())?;
        let den = BigInt::from(10).pow(frac.len() as u32);
        let value = Rational::new(num, den);
        return Ok(if negative { -value } else { value });
    }
    let num = BigInt::from_str(text).map_err(|_| bad())?;
    Ok(Rational::from_integer(num))
}

/// Dimension, power and coupling of `i u_t + Δu = λ|u|^{p-1}u`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemParams {
    pub n: u32,
    pub p: Rational,
    pub lambda: Complex64,
}

impl ProblemParams {
    pub fn new(n: u32, p: Rational, lambda: Complex64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
        }
        if p <= Rational::one() {
            return Err(Error::Domain(format!("power p = {p} must exceed 1")));
        }
        if !(lambda.re.is_finite() && lambda.im.is_finite()) {
            return Err(Error::Domain("coupling must be finite".into()));
        }
        Ok(Self { n, p, lambda })
    }

    pub fn p_f64(&self) -> f64 {
        to_f64(&self.p)
    }

    /// `n >= 3` and `4/(n+1) < p - 1 < 4/n`.
    pub fn in_existence_range(&self) -> bool {
        let n = self.n as i64;
        let pm1 = &self.p - Rational::one();
        self.n >= 3 && pm1 > ratio(4, n + 1) && pm1 < ratio(4, n)
    }

    pub fn require_existence_range(&self) -> Result<()> {
        if self.in_existence_range() {
            Ok(())
        } else {
            Err(Error::Domain(format!("(n, p) = ({}, {}) outside n >= 3, 4/(n+1) < p-1 < 4/n", self.n, self.p)))
        }
    }

    pub fn critical_index(&self) -> Result<Rational> {
        critical_sobolev_index(self.n, &self.p)
    }
}

/// `s0 = -n/2 + 2/(p-1)`, the index with `φ ∈ Ḣ^{-s0}` scale invariant.
pub fn critical_sobolev_index(n: u32, p: &Rational) -> Result<Rational> {
    if *p <= Rational::one() {
        return Err(Error::Domain(format!("power p = {p} must exceed 1")));
    }
    Ok(ratio(-(n as i64), 2) + int(2) / (p - Rational::one()))
}

/// Larger root of `(n-1)p^2 - (n+1)p - 2 = 0`.
pub fn p0_root(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("p0 is defined for n >= 2, got {n}")));
    }
    let n = n as f64;
    Ok((n + 1.0 + (n * n + 10.0 * n - 7.0).sqrt()) / (2.0 * (n - 1.0)))
}

/// Which branch of the lower bound fails to sit below the upper bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowBound {
    /// `1/p < 2/(p-1) - (n+1)/(2p)`, equivalent to `p < 1 + 4/(n-1)`.
    Reciprocal,
    /// `2/(p-1) - (n-1)/2 < 2/(p-1) - (n+1)/(2p)`, equivalent to `p > (n+1)/(n-1)`.
    Decay,
}

impl fmt::Display for WindowBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowBound::Reciprocal => write!(f, "1/p < 2/(p-1) - (n+1)/(2p)"),
            WindowBound::Decay => write!(f, "2/(p-1) - (n-1)/2 < 2/(p-1) - (n+1)/(2p) (p > (n+1)/(n-1))"),
        }
    }
}

/// Both sides of `max(1/p, 2/(p-1) - (n-1)/2) < 2/(p-1) - (n+1)/(2p)`.
#[derive(Clone, Debug)]
pub struct WindowInequality {
    pub reciprocal: Rational,
    pub decay: Rational,
    pub upper: Rational,
    pub failing: Vec<WindowBound>,
}

impl WindowInequality {
    pub fn holds(&self) -> bool {
        self.failing.is_empty()
    }

    pub fn lower(&self) -> Rational {
        self.reciprocal.clone().max(self.decay.clone())
    }
}

/// Evaluates the exponent inequality exactly. `(n, p)` must lie strictly inside
/// `1 + 4/(n+1) < p < 1 + 4/n`; outside that range a domain error is returned.
pub fn window_inequality(n: u32, p: &Rational) -> Result<WindowInequality> {
    if n < 2 {
        return Err(Error::Domain(format!("dimension n = {n} must be at least 2")));
    }
    let ni = n as i64;
    let lo = Rational::one() + ratio(4, ni + 1);
    let hi = Rational::one() + ratio(4, ni);
    if !(*p > lo && *p < hi) {
        return Err(Error::Domain(format!("p = {p} outside the open range ({lo}, {hi}) for n = {n}")));
    }
    let pm1 = p - Rational::one();
    let two_over = int(2) / &pm1;
    let reciprocal = p.recip();
    let decay = &two_over - ratio(ni - 1, 2);
    let upper = &two_over - Rational::from_integer(BigInt::from(ni + 1)) / (int(2) * p);
    let mut failing = Vec::new();
    if reciprocal >= upper {
        failing.push(WindowBound::Reciprocal);
    }
    if decay >= upper {
        failing.push(WindowBound::Decay);
    }
    Ok(WindowInequality { reciprocal, decay, upper, failing })
}

pub fn window_inequality_holds(n: u32, p: &Rational) -> Result<bool> {
    Ok(window_inequality(n, p)?.holds())
}

/// How to pick `2/q0` inside its admissible open window.
#[derive(Clone, Debug, PartialEq)]
pub enum SelectionPolicy {
    Midpoint,
    /// Explicit `2/q0`; must land strictly inside the window.
    TwoOverQ0(Rational),
}

/// One checked exponent relation, `lhs (<, <=, =) rhs`.
#[derive(Clone, Debug)]
pub struct Fact {
    pub name: &'static str,
    pub lhs: Rational,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Less,
    LessEq,
    Equal,
}

impl Fact {
    fn new(name: &'static str, lhs: Rational, relation: Relation, rhs: Rational) -> Self {
        Self { name, lhs, relation, rhs }
    }

    pub fn holds(&self) -> bool {
        match self.relation {
            Relation::Less => self.lhs < self.rhs,
            Relation::LessEq => self.lhs <= self.rhs,
            Relation::Equal => self.lhs == self.rhs,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Less => "<",
            Relation::LessEq => "<=",
            Relation::Equal => "=",
        })
    }
}

/// Critical index, space-time exponents and the dual pair used for the
/// inhomogeneous estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct ExponentSet {
    pub n: u32,
    pub p: Rational,
    pub s0: Rational,
    pub q0: Rational,
    pub alpha0: Rational,
    pub q1: Rational,
    pub alpha1: Rational,
}

impl ExponentSet {
    /// Open window for `2/q0`, already intersected with `2/q0 < 1`.
    pub fn window(n: u32, p: &Rational) -> Result<(Rational, Rational)> {
        let ineq = window_inequality(n, p)?;
        if !ineq.holds() {
            let names: Vec<String> = ineq.failing.iter().map(|b| b.to_string()).collect();
            return Err(Error::Inequality(format!(
                "max(1/p, 2/(p-1) - (n-1)/2) < 2/(p-1) - (n+1)/(2p) fails for n = {n}, p = {p}: {}",
                names.join("; ")
            )));
        }
        let lower = ineq.lower();
        let upper = ineq.upper.min(Rational::one());
        Ok((lower, upper))
    }

    pub fn two_over_q0(&self) -> Rational {
        int(2) / &self.q0
    }

    /// Derivative index paired with `(q1, alpha1)`, equal to `-s0`.
    pub fn dual_index(&self) -> Rational {
        let n = self.n as i64;
        -&self.alpha1 + int(n + 2) / &self.q1 - ratio(n, 2)
    }

    /// Conjugate exponent `q1' = q1/(q1-1)`.
    pub fn q1_conjugate(&self) -> Rational {
        &self.q1 / (&self.q1 - Rational::one())
    }

    /// Every relation the construction must satisfy, in a fixed order.
    pub fn facts(&self) -> Vec<Fact> {
        use Relation::*;
        let n = self.n as i64;
        let p = &self.p;
        let pm1 = p - Rational::one();
        let two_over_pm1 = int(2) / &pm1;
        let inv_q0 = self.q0.recip();
        let inv_q1 = self.q1.recip();
        let two_q0 = &inv_q0 * int(2);
        let nf = int(n);
        let half_nm1 = ratio(n - 1, 2);
        let derivative = |alpha: &Rational, q: &Rational| -alpha + int(n + 2) / q - ratio(n, 2);
        let lower = p.recip().max(&two_over_pm1 - &half_nm1);
        let upper = &two_over_pm1 - int(n + 1) / (int(2) * p);
        vec![
            Fact::new("s0_definition", self.s0.clone(), Equal, ratio(-n, 2) + &two_over_pm1),
            Fact::new("s0_positive", Rational::zero(), Less, self.s0.clone()),
            Fact::new("s0_below_half", self.s0.clone(), Less, ratio(1, 2)),
            Fact::new("alpha0_definition", self.alpha0.clone(), Equal, int(n + 2) * &inv_q0 - &two_over_pm1),
            Fact::new("scaling_identity", self.s0.clone(), Equal, derivative(&self.alpha0, &self.q0)),
            Fact::new("window_lower", lower, Less, two_q0.clone()),
            Fact::new("window_upper", two_q0.clone(), Less, upper),
            Fact::new("q0_above_two", two_q0, Less, Rational::one()),
            Fact::new("dual_q_definition", inv_q1.clone(), Equal, Rational::one() - p * &inv_q0),
            Fact::new("dual_q_finite", Rational::zero(), Less, inv_q1.clone()),
            Fact::new("dual_q_at_least_two", inv_q1.clone(), LessEq, ratio(1, 2)),
            Fact::new("alpha1_definition", self.alpha1.clone(), Equal, -(p * &self.alpha0)),
            Fact::new("alpha0_lower", &nf * &inv_q0 - &half_nm1, Less, self.alpha0.clone()),
            Fact::new("alpha0_upper", self.alpha0.clone(), Less, &nf * &inv_q0),
            Fact::new("alpha1_lower", &nf * &inv_q1 - &half_nm1, Less, self.alpha1.clone()),
            Fact::new("alpha1_upper", self.alpha1.clone(), Less, &nf * &inv_q1),
            Fact::new("dual_index", self.dual_index(), Equal, -self.s0.clone()),
            Fact::new(
                "sum_condition",
                derivative(&self.alpha0, &self.q0) + derivative(&self.alpha1, &self.q1),
                Equal,
                Rational::zero(),
            ),
        ]
    }

    /// Fails with the name of the first violated relation.
    pub fn verify(&self) -> Result<()> {
        match self.facts().into_iter().find(|f| !f.holds()) {
            None => Ok(()),
            Some(f) => Err(Error::Inequality(format!("{}: {} {} {} is false", f.name, f.lhs, f.relation, f.rhs))),
        }
    }

    /// `(q0, alpha0, s0)`, admissible for the homogeneous weighted estimate.
    pub fn primary_triple(&self) -> AdmissibilityTriple {
        AdmissibilityTriple { q: self.q0.clone(), alpha: self.alpha0.clone(), s: self.s0.clone() }
    }

    /// `(q1, alpha1, -s0)`.
    pub fn dual_triple(&self) -> AdmissibilityTriple {
        AdmissibilityTriple { q: self.q1.clone(), alpha: self.alpha1.clone(), s: self.dual_index() }
    }

    pub fn as_f64(&self) -> ExponentsF64 {
        ExponentsF64 {
            n: self.n,
            p: to_f64(&self.p),
            s0: to_f64(&self.s0),
            q0: to_f64(&self.q0),
            alpha0: to_f64(&self.alpha0),
            q1: to_f64(&self.q1),
            alpha1: to_f64(&self.alpha1),
        }
    }
}

/// Floating-point view used by the numerical modules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentsF64 {
    pub n: u32,
    pub p: f64,
    pub s0: f64,
    pub q0: f64,
    pub alpha0: f64,
    pub q1: f64,
    pub alpha1: f64,
}

impl ExponentsF64 {
    pub fn q1_conjugate(&self) -> f64 {
        self.q1 / (self.q1 - 1.0)
    }
}

pub fn select_exponents(params: &ProblemParams, policy: &SelectionPolicy) -> Result<ExponentSet> {
    let n = params.n;
    let p = &params.p;
    let (lower, upper) = ExponentSet::window(n, p)?;
    let two_over_q0 = match policy {
        SelectionPolicy::Midpoint => (&lower + &upper) / int(2),
        SelectionPolicy::TwoOverQ0(v) => {
            if *v <= lower {
                return Err(Error::Inequality(format!(
                    "window_lower: 2/q0 = {v} must exceed max(1/p, 2/(p-1) - (n-1)/2) = {lower}"
                )));
            }
            if *v >= upper {
                return Err(Error::Inequality(format!(
                    "window_upper: 2/q0 = {v} must lie below min(2/(p-1) - (n+1)/(2p), 1) = {upper}"
                )));
            }
            v.clone()
        }
    };
    let ni = n as i64;
    let q0 = int(2) / &two_over_q0;
    let pm1 = p - Rational::one();
    let alpha0 = int(ni + 2) / &q0 - int(2) / &pm1;
    let s0 = critical_sobolev_index(n, p)?;
    let inv_q1 = Rational::one() - p / &q0;
    let q1 = inv_q1.recip();
    let alpha1 = -(p * &alpha0);
    let set = ExponentSet { n, p: p.clone(), s0, q0, alpha0, q1, alpha1 };
    set.verify()?;
    Ok(set)
}

/// `(q, alpha, s)` for the weighted homogeneous estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityTriple {
    pub q: Rational,
    pub alpha: Rational,
    pub s: Rational,
}

impl AdmissibilityTriple {
    pub fn new(q: Rational, alpha: Rational, s: Rational) -> Self {
        Self { q, alpha, s }
    }

    /// `-alpha - s + (n+2)/q - n/2`; zero exactly when the estimate is scale balanced.
    pub fn scaling_defect(&self, n: u32) -> Rational {
        let n = n as i64;
        -&self.alpha - &self.s + int(n + 2) / &self.q - ratio(n, 2)
    }

    pub fn as_f64(&self) -> (f64, f64, f64) {
        (to_f64(&self.q), to_f64(&self.alpha), to_f64(&self.s))
    }
}

/// Scaling balance, `2 <= q < ∞`, and `n/q - (n-1)/2 < alpha < n/q`.
pub fn is_admissible_triple(n: u32, triple: &AdmissibilityTriple) -> bool {
    if !triple.q.is_positive() || triple.q < int(2) {
        return false;
    }
    let ni = n as i64;
    let n_over_q = int(ni) / &triple.q;
    triple.scaling_defect(n).is_zero() && triple.alpha > &n_over_q - ratio(ni - 1, 2) && triple.alpha < n_over_q
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: u32, p: Rational) -> ProblemParams {
        ProblemParams::new(n, p, Complex64::new(1.0, 0.0)).unwrap()
    }

    #[test]
    fn critical_index_examples() {
        assert_eq!(critical_sobolev_index(3, &ratio(11, 5)).unwrap(), ratio(1, 6));
        assert_eq!(critical_sobolev_index(4, &ratio(19, 10)).unwrap(), ratio(2, 9));
        assert_eq!(critical_sobolev_index(3, &ratio(7, 3)).unwrap(), Rational::zero());
        assert!(!params(3, ratio(7, 3)).in_existence_range());
        assert!(critical_sobolev_index(3, &int(1)).is_err());
        assert!(critical_sobolev_index(3, &ratio(1, 2)).is_err());
    }

    #[test]
    fn p0_root_values() {
        assert_eq!(p0_root(4).unwrap(), 2.0);
        assert!((p0_root(3).unwrap() - (1.0 + 2f64.sqrt())).abs() < 1e-15);
        assert!((p0_root(5).unwrap() - 1.780_776_406_404_415).abs() < 1e-12);
        assert!(p0_root(1).is_err());
    }

    #[test]
    fn window_inequality_examples() {
        assert!(window_inequality_holds(3, &ratio(11, 5)).unwrap());
        let two = window_inequality(2, &ratio(5, 2)).unwrap();
        assert!(!two.holds());
        assert_eq!(two.lower(), ratio(5, 6));
        assert_eq!(two.upper, ratio(11, 15));
        assert_eq!(two.failing, vec![WindowBound::Decay]);
        assert!(matches!(window_inequality_holds(3, &int(2)), Err(Error::Domain(_))));
    }

    #[test]
    fn midpoint_selection_for_n3() {
        let set = select_exponents(&params(3, ratio(11, 5)), &SelectionPolicy::Midpoint).unwrap();
        assert_eq!(set.two_over_q0(), ratio(47, 66));
        assert_eq!(set.q0, ratio(132, 47));
        assert_eq!(set.alpha0, ratio(5, 44));
        assert_eq!(set.q1, ratio(660, 143));
        assert_eq!(set.alpha1, ratio(-1, 4));
        assert_eq!(set.s0, ratio(1, 6));
        let f = set.as_f64();
        assert!((f.q0 - 2.808_510_6).abs() < 1e-7);
        assert!((f.alpha0 - 0.113_636_4).abs() < 1e-7);
        assert!((f.q1 - 4.615_384_6).abs() < 1e-7);
    }

    #[test]
    fn override_on_window_boundary_is_rejected() {
        let pr = params(3, ratio(11, 5));
        let err = select_exponents(&pr, &SelectionPolicy::TwoOverQ0(ratio(2, 3))).unwrap_err();
        assert!(err.to_string().contains("window_lower"), "{err}");
        let err = select_exponents(&pr, &SelectionPolicy::TwoOverQ0(ratio(25, 33))).unwrap_err();
        assert!(err.to_string().contains("window_upper"), "{err}");
        let ok = select_exponents(&pr, &SelectionPolicy::TwoOverQ0(ratio(7, 10))).unwrap();
        assert_eq!(ok.two_over_q0(), ratio(7, 10));
    }

    #[test]
    fn admissibility_examples() {
        let good = AdmissibilityTriple::new(int(2), ratio(3, 4), ratio(1, 4));
        assert!(is_admissible_triple(3, &good));
        let bad = AdmissibilityTriple::new(int(2), ratio(8, 5), ratio(-3, 5));
        assert!(!is_admissible_triple(3, &bad));
        let set = select_exponents(&params(3, ratio(11, 5)), &SelectionPolicy::Midpoint).unwrap();
        assert!(is_admissible_triple(3, &set.primary_triple()));
        assert!(is_admissible_triple(3, &set.dual_triple()));
    }

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_rational("11/5").unwrap(), ratio(11, 5));
        assert_eq!(parse_rational("2.2").unwrap(), ratio(11, 5));
        assert_eq!(parse_rational("-0.25").unwrap(), ratio(-1, 4));
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
