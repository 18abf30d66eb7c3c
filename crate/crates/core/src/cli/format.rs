//! Number rendering shared by every output file.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::exponents::Rational;

/// `%.9g`: nine significant digits, trailing zeros removed.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        trim_zeros(format!("{:.*}", (8 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

/// `x` rounded to nine significant digits, or `null` when not finite.
pub fn json_number(x: f64) -> Value {
    if x.is_finite() {
        json!(sig9(x).parse::<f64>().expect("round trip"))
    } else {
        Value::Null
    }
}

/// Rounds every float inside `v` to nine significant digits.
pub fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => *v = json_number(n.as_f64().unwrap_or(f64::NAN)),
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn big_to_json(b: &BigInt) -> Value {
    match b.to_i64() {
        Some(v) => json!(v),
        None => json!(b.to_string()),
    }
}

/// `{"num": .., "den": ..}` with the fraction in lowest terms.
pub fn rational_json(q: &Rational) -> Value {
    json!({ "num": big_to_json(q.numer()), "den": big_to_json(q.denom()) })
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::ratio;

    #[test]
    fn nine_digits() {
        assert_eq!(sig9(1.0), "1");
        assert_eq!(sig9(-0.0), "0");
        assert_eq!(sig9(2.808510638297872), "2.80851064");
        assert_eq!(sig9(1.0 / 6.0), "0.166666667");
        assert_eq!(sig9(123456789.4), "123456789");
        assert_eq!(sig9(1234567890.0), "1.23456789e9");
        assert_eq!(sig9(1.5e-7), "1.5e-7");
        assert_eq!(sig9(1.7383101e-5), "1.7383101e-5");
        assert_eq!(sig9(1.25e-4), "0.000125");
        assert_eq!(sig9(0.99999999999), "1");
        assert_eq!(sig9(f64::INFINITY), "inf");
    }

    #[test]
    fn rationals_in_lowest_terms() {
        assert_eq!(rational_json(&ratio(22, 10)), json!({"num": 11, "den": 5}));
        assert_eq!(rational_json(&ratio(-1, 6)), json!({"num": -1, "den": 6}));
    }
}
