//! Small exact-arithmetic helpers shared by the other modules.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Binomial coefficient `C(n, k)` as a big integer; zero when `k > n`.
pub fn binom(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// `n!` as a big integer.
pub fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Divides exactly, panicking if the remainder is nonzero (an internal invariant).
pub(crate) fn exact_div(num: BigUint, den: &BigUint) -> BigUint {
    let (q, r) = num.div_rem(den);
    assert!(r.is_zero(), "inexact division in multiplicity formula");
    q
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn rat_from_uint(n: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(n.clone()))
}

/// The exact rational value of a finite binary64 number.
pub fn rat_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Domain(format!("{x} is not a finite number")))
}

pub fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

pub fn uint_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// Parses `a/b`, an integer, or a decimal literal (`3.75`, `1e-3`) into an exact rational.
/// Decimal literals are read as the decimal number they denote, not as the nearest double.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("cannot read `{s}` as a number"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(a, b));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: BigInt = format!("{int_part}{frac_part}").parse().map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let mut q = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

/// Formats an exact rational as `num/den` (or `num` when the denominator is one).
pub fn format_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Formats a double with 17 significant digits, which round-trips binary64.
pub fn format_f64(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.16e}", x);
    // Normalise `1.2345000000000000e3` to a compact but still 17-digit form.
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed)
    } else {
        format!("{}e{}", trim_zeros(mant), exp)
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// `true` when the nonnegative integer `n` satisfies `n <= z`, compared exactly.
pub fn uint_le_f64(n: &BigUint, z: f64) -> bool {
    if z.is_nan() || z < 0.0 {
        return false;
    }
    if z.is_infinite() {
        return true;
    }
    match BigUint::from_f64(z.floor()) {
        Some(f) => *n <= f,
        None => false,
    }
}

/// `true` when `n <= z` for a nonnegative integer and an exact rational.
pub fn uint_le_rat(n: &BigUint, z: &BigRational) -> bool {
    if z.is_negative() {
        return false;
    }
    BigInt::from(n.clone()) * z.denom() <= *z.numer()
}

/// Rational raised to a nonnegative integer power.
pub fn rat_pow(q: &BigRational, e: u32) -> BigRational {
    num_traits::pow(q.clone(), e as usize)
}

/// A number of the form `coeff * pi^(half_powers / 2)`, closed under products and quotients.
/// Gamma at integer and half-integer points, sphere volumes and semiclassical constants all
/// live in this set, so identities between them can be checked without rounding.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct PiRational {
    pub coeff: BigRational,
    pub half_powers: i32,
}

impl PiRational {
    pub fn rational(q: BigRational) -> Self {
        PiRational { coeff: q, half_powers: 0 }
    }

    pub fn mul(&self, other: &PiRational) -> PiRational {
        PiRational {
            coeff: &self.coeff * &other.coeff,
            half_powers: self.half_powers + other.half_powers,
        }
    }

    pub fn div(&self, other: &PiRational) -> PiRational {
        PiRational {
            coeff: &self.coeff / &other.coeff,
            half_powers: self.half_powers - other.half_powers,
        }
    }

    /// The rational value, when the power of pi cancels.
    pub fn as_rational(&self) -> Option<&BigRational> {
        (self.half_powers == 0).then_some(&self.coeff)
    }

    pub fn to_f64(&self) -> f64 {
        rat_to_f64(&self.coeff) * std::f64::consts::PI.powf(self.half_powers as f64 / 2.0)
    }
}

/// `Gamma(n/2)` for `n >= 1`, by recursion down to `Gamma(1) = 1` or `Gamma(1/2) = sqrt(pi)`.
pub fn gamma_half(n: u32) -> PiRational {
    assert!(n >= 1, "Gamma(n/2) needs n >= 1");
    if n.is_multiple_of(2) {
        PiRational::rational(rat_from_uint(&factorial(u64::from(n / 2 - 1))))
    } else {
        // Gamma(k + 1/2) = (2k)! / (4^k k!) sqrt(pi)
        let k = u64::from(n / 2);
        let num = factorial(2 * k);
        let den = BigUint::from(4u32).pow(k as u32) * factorial(k);
        PiRational {
            coeff: BigRational::new(BigInt::from(num), BigInt::from(den)),
            half_powers: 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binom(5, 2), BigUint::from(10u32));
        assert_eq!(binom(3, 5), BigUint::zero());
        assert_eq!(binom(0, 0), BigUint::one());
    }

    #[test]
    fn gamma_half_values() {
        assert_eq!(gamma_half(12).as_rational().unwrap(), &rat_int(120));
        let g = gamma_half(3); // sqrt(pi)/2
        assert_eq!(g.coeff, rat(1, 2));
        assert_eq!(g.half_powers, 1);
        assert!((gamma_half(5).to_f64() - 1.329_340_388_179_137).abs() < 1e-14);
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational("3.75").unwrap(), rat(15, 4));
        assert_eq!(parse_rational("-1/3").unwrap(), rat(-1, 3));
        assert_eq!(parse_rational("2e3").unwrap(), rat_int(2000));
        assert_eq!(parse_rational("1.5e-1").unwrap(), rat(3, 20));
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
        assert_eq!(format_f64(0.1), "0.10000000000000001");
        assert_eq!(format_f64(3.125), "3.125");
        assert_eq!(format_f64(1e-300).parse::<f64>().unwrap(), 1e-300);
    }

    #[test]
    fn exact_comparisons() {
        assert!(uint_le_f64(&BigUint::from(6u32), 6.0));
        assert!(!uint_le_f64(&BigUint::from(6u32), 5.999_999_999));
        assert!(uint_le_rat(&BigUint::from(2u32), &rat(5, 2)));
        assert!(!uint_le_rat(&BigUint::from(3u32), &rat(5, 2)));
    }
}
