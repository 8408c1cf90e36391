//! Exact rational exponents.

use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number used for the potential exponents and derived
/// McGehee exponents.
pub type Rational = Ratio<i64>;

pub fn rational(numer: i64, denom: i64) -> Rational {
    Ratio::new(numer, denom)
}

pub fn int(n: i64) -> Rational {
    Ratio::from_integer(n)
}

/// Parses `"3"` or `"4/3"` (surrounding whitespace allowed).
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("invalid rational `{s}`")))?;
            let d: i64 = d
                .trim()
                .parse()
                .map_err(|_| Error::domain(format!("invalid rational `{s}`")))?;
            if d == 0 {
                return Err(Error::domain(format!("zero denominator in `{s}`")));
            }
            Ok(Ratio::new(n, d))
        }
        None => s
            .parse::<i64>()
            .map(Ratio::from_integer)
            .map_err(|_| Error::domain(format!("invalid rational `{s}`"))),
    }
}

pub fn to_f64(q: Rational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `r^p` for `r >= 0` with the blow-up conventions: `r^0 = 1`, and at
/// `r = 0` positive powers vanish while negative ones are infinite.
pub fn pow_nonneg(r: f64, p: Rational) -> f64 {
    if p.is_zero() {
        1.0
    } else if r == 0.0 {
        if p > Rational::zero() {
            0.0
        } else {
            f64::INFINITY
        }
    } else if p.is_integer() {
        r.powi(*p.numer() as i32)
    } else {
        r.powf(to_f64(p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integers_and_fractions() {
        assert_eq!(parse_rational("3").unwrap(), int(3));
        assert_eq!(parse_rational(" 4/3 ").unwrap(), rational(4, 3));
        assert_eq!(parse_rational("6/4").unwrap(), rational(3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn power_conventions_at_zero() {
        assert_eq!(pow_nonneg(0.0, rational(4, 5)), 0.0);
        assert_eq!(pow_nonneg(0.0, int(0)), 1.0);
        assert_eq!(pow_nonneg(0.0, rational(-1, 2)), f64::INFINITY);
        assert!((pow_nonneg(32.0, rational(2, 5)) - 4.0).abs() < 1e-14);
        assert_eq!(pow_nonneg(2.0, int(3)), 8.0);
    }
}
