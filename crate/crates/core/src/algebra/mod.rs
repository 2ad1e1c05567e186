//! Arithmetic expression evaluation and linear equation systems, both over exact rationals.

pub mod arith;
pub mod linear;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

pub use arith::{Arithmetics, Expr};
pub use linear::{classify_target, EquationSystem, LinearSystem, Solution};

/// Parses a decimal (`-12`, `7.6`, `1e-3`) or fraction (`3/4`) exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_rational(n)?;
        let d = parse_rational(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    if exp.unsigned_abs() > 400 {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut value = BigRational::from_integer(all.parse::<BigInt>().unwrap_or_default());
    let scale = exp - frac_part.len() as i32;
    let ten = BigRational::from_integer(BigInt::from(10));
    if scale >= 0 {
        value *= pow(&ten, scale as u32);
    } else {
        value /= pow(&ten, (-scale) as u32);
    }
    Some(if neg { -value } else { value })
}

fn pow(base: &BigRational, e: u32) -> BigRational {
    num_traits::pow(base.clone(), e as usize)
}

/// Rounds half away from zero to `places` decimals and renders without trailing zeros.
pub fn render_rounded(v: &BigRational, places: u32) -> String {
    let scale = BigInt::from(10).pow(places);
    let scaled = v * BigRational::from_integer(scale.clone());
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let rounded = if scaled.is_negative() {
        -((-scaled) + half).floor()
    } else {
        (scaled + half).floor()
    }
    .to_integer();
    if rounded.is_zero() {
        return "0".into();
    }
    let neg = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let p = places as usize;
    let padded = format!("{digits:0>width$}", width = p + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - p);
    let frac_part = frac_part.trim_end_matches('0');
    let body = if frac_part.is_empty() {
        int_part.to_string()
    } else {
        format!("{int_part}.{frac_part}")
    };
    if neg { format!("-{body}") } else { body }
}

pub fn rational_to_string(v: &BigRational) -> String {
    if v.is_integer() {
        v.to_integer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn parses_numbers() {
        assert_eq!(parse_rational("864.49"), Some(r(86449, 100)));
        assert_eq!(parse_rational("-14"), Some(r(-14, 1)));
        assert_eq!(parse_rational(".5"), Some(r(1, 2)));
        assert_eq!(parse_rational("3/4"), Some(r(3, 4)));
        assert_eq!(parse_rational("1e-2"), Some(r(1, 100)));
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("-"), None);
        assert_eq!(parse_rational("1/0"), None);
    }

    #[test]
    fn rounding_render() {
        assert_eq!(render_rounded(&r(86449, 100), 2), "864.49");
        assert_eq!(render_rounded(&r(1, 3), 2), "0.33");
        assert_eq!(render_rounded(&r(-1, 200), 2), "-0.01");
        assert_eq!(render_rounded(&r(1, 1000), 2), "0");
        assert_eq!(render_rounded(&r(12, 1), 2), "12");
        assert_eq!(render_rounded(&r(-5, 2), 2), "-2.5");
        assert_eq!(render_rounded(&r(7, 100), 2), "0.07");
    }
}
