//! Exact rationals and closed intervals with rational endpoints.
//!
//! Every non-rational quantity in the crate (square roots, `n`-th roots,
//! half-integer powers) is carried as an [`Interval`] that is guaranteed to
//! contain the true value. Endpoints are exact, so all comparisons between
//! enclosures are decided without rounding.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rational = BigRational;

/// Default denominator bound used by [`Interval::simplify`] callers.
pub const DEFAULT_DENOMINATOR_BOUND: u64 = 1_000_000_000_000_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumericError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("cannot parse rational from {0:?}")]
    Parse(String),
    #[error("division by an interval containing zero: {0}")]
    DivisionByZero(String),
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `10^-k` as an exact rational.
pub fn ten_pow_neg(k: u32) -> Rational {
    Rational::new(BigInt::one(), num_traits::pow(BigInt::from(10), k as usize))
}

/// Parses `p/q`, an integer, a decimal (`0.125`) or scientific notation
/// (`1e-6`, `2.5E3`) into the exact rational it denotes.
pub fn parse_rational(s: &str) -> Result<Rational, NumericError> {
    let t = s.trim();
    let err = || NumericError::Parse(s.to_string());
    if t.is_empty() {
        return Err(err());
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = t[i + 1..].parse().map_err(|_| err())?;
            (&t[..i], e)
        }
        None => (t, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && frac.is_empty() {
        return Err(err());
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(err());
    }
    let all: BigInt = format!("{whole}{frac}").parse().map_err(|_| err())?;
    let scale = exponent - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        Rational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// `p/q` (or `p` for integers).
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Decimal rendering truncated toward zero after `digits` fractional digits.
pub fn format_decimal(x: &Rational, digits: usize) -> String {
    let neg = x.is_negative();
    let a = x.abs();
    let scale = num_traits::pow(BigInt::from(10), digits);
    let scaled = (a * Rational::from_integer(scale)).trunc().to_integer();
    let mut s = scaled.to_string();
    if digits > 0 {
        if s.len() <= digits {
            s = "0".repeat(digits + 1 - s.len()) + &s;
        }
        s.insert(s.len() - digits, '.');
    }
    if neg {
        s.insert(0, '-');
    }
    s
}

pub fn to_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or_else(|| {
        // Extreme magnitudes: fall back to a scaled conversion.
        let n = x.numer().bits() as i64 - x.denom().bits() as i64;
        if n > 0 {
            f64::INFINITY * if x.is_negative() { -1.0 } else { 1.0 }
        } else {
            0.0
        }
    })
}

/// Exact conversion of a finite float.
pub fn from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite float")
}

pub fn pow_int(x: &Rational, k: u32) -> Rational {
    num_traits::pow(x.clone(), k as usize)
}

fn floor_mul(x: &Rational, scale: &BigInt) -> BigInt {
    (x * Rational::from_integer(scale.clone())).floor().to_integer()
}

fn ceil_mul(x: &Rational, scale: &BigInt) -> BigInt {
    (x * Rational::from_integer(scale.clone())).ceil().to_integer()
}

/// Largest `m/bound <= x`; `x` itself when its denominator is already small.
pub fn round_down_to(x: &Rational, bound: &BigInt) -> Rational {
    if x.denom() <= bound {
        return x.clone();
    }
    Rational::new(floor_mul(x, bound), bound.clone())
}

/// Smallest `m/bound >= x`; `x` itself when its denominator is already small.
pub fn round_up_to(x: &Rational, bound: &BigInt) -> Rational {
    if x.denom() <= bound {
        return x.clone();
    }
    Rational::new(ceil_mul(x, bound), bound.clone())
}

/// Closed interval `[lo, hi]` with exact rational endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self, NumericError> {
        if lo > hi {
            return Err(NumericError::Domain(format!(
                "empty interval [{}, {}]",
                format_rational(&lo),
                format_rational(&hi)
            )));
        }
        Ok(Interval { lo, hi })
    }

    /// Builds `[min(a,b), max(a,b)]`.
    pub fn spanning(a: Rational, b: Rational) -> Self {
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn point(x: Rational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_int(n: i64) -> Self {
        Self::point(int(n))
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn into_bounds(self) -> (Rational, Rational) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rational {
        (&self.lo + &self.hi) / int(2)
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn as_point(&self) -> Option<&Rational> {
        self.is_point().then_some(&self.lo)
    }

    pub fn contains(&self, x: &Rational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    pub fn contains_zero(&self) -> bool {
        !self.lo.is_positive() && !self.hi.is_negative()
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval {
            lo: self.lo.clone().min(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
        }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let lo = self.lo.clone().max(other.lo.clone());
        let hi = self.hi.clone().min(other.hi.clone());
        (lo <= hi).then_some(Interval { lo, hi })
    }

    /// `Some(ordering)` when every element of `self` compares the same way
    /// against every element of `other`; ties only on degenerate overlap.
    pub fn certain_cmp(&self, other: &Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else if self.is_point() && other.is_point() {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    /// True when every element of `self` is `<=` every element of `other`.
    pub fn certainly_le(&self, other: &Interval) -> bool {
        self.hi <= other.lo
    }

    pub fn certainly_lt(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn is_positive(&self) -> bool {
        self.lo.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.hi.is_negative()
    }

    pub fn neg(&self) -> Interval {
        Interval {
            lo: -&self.hi,
            hi: -&self.lo,
        }
    }

    pub fn add(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    pub fn sub(&self, other: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    pub fn mul(&self, other: &Interval) -> Interval {
        if self.is_point() && other.is_point() {
            return Interval::point(&self.lo * &other.lo);
        }
        let (a, b, c, d) = (&self.lo, &self.hi, &other.lo, &other.hi);
        if !a.is_negative() && !c.is_negative() {
            return Interval { lo: a * c, hi: b * d };
        }
        if !b.is_positive() && !d.is_positive() {
            return Interval { lo: b * d, hi: a * c };
        }
        if !a.is_negative() && !d.is_positive() {
            return Interval { lo: b * c, hi: a * d };
        }
        if !b.is_positive() && !c.is_negative() {
            return Interval { lo: a * d, hi: b * c };
        }
        let p = [a * c, a * d, b * c, b * d];
        let lo = p.iter().min().unwrap().clone();
        let hi = p.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, k: &Rational) -> Interval {
        Interval::spanning(&self.lo * k, &self.hi * k)
    }

    pub fn add_scalar(&self, k: &Rational) -> Interval {
        Interval {
            lo: &self.lo + k,
            hi: &self.hi + k,
        }
    }

    pub fn recip(&self) -> Result<Interval, NumericError> {
        if self.contains_zero() {
            return Err(NumericError::DivisionByZero(self.to_string()));
        }
        Ok(Interval {
            lo: self.hi.recip(),
            hi: self.lo.recip(),
        })
    }

    pub fn div(&self, other: &Interval) -> Result<Interval, NumericError> {
        if other.is_point() {
            if other.lo.is_zero() {
                return Err(NumericError::DivisionByZero(other.to_string()));
            }
            return Ok(self.scale(&other.lo.recip()));
        }
        Ok(self.mul(&other.recip()?))
    }

    pub fn pow_int(&self, k: u32) -> Interval {
        if k == 0 {
            return Interval::point(Rational::one());
        }
        let pl = pow_int(&self.lo, k);
        if self.is_point() {
            return Interval::point(pl);
        }
        let ph = pow_int(&self.hi, k);
        if k % 2 == 1 || !self.lo.is_negative() {
            Interval { lo: pl, hi: ph }
        } else if !self.hi.is_positive() {
            Interval { lo: ph, hi: pl }
        } else {
            Interval {
                lo: Rational::zero(),
                hi: pl.max(ph),
            }
        }
    }

    /// Outward rounding of each endpoint whose denominator exceeds `bound`.
    pub fn simplify(&self, bound: &BigInt) -> Interval {
        Interval {
            lo: round_down_to(&self.lo, bound),
            hi: round_up_to(&self.hi, bound),
        }
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (to_f64(&self.lo), to_f64(&self.hi))
    }

    pub fn mid_f64(&self) -> f64 {
        to_f64(&self.mid())
    }

    pub fn sqrt(&self, tol: &Rational) -> Result<Interval, NumericError> {
        nth_root_enclosure(self, 2, tol)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_point() {
            write!(f, "{}", format_rational(&self.lo))
        } else {
            write!(
                f,
                "[{}, {}]",
                format_rational(&self.lo),
                format_rational(&self.hi)
            )
        }
    }
}

impl From<Rational> for Interval {
    fn from(x: Rational) -> Self {
        Interval::point(x)
    }
}

#[derive(Serialize, Deserialize)]
struct IntervalRepr {
    lo: String,
    hi: String,
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        IntervalRepr {
            lo: format_rational(&self.lo),
            hi: format_rational(&self.hi),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = IntervalRepr::deserialize(d)?;
        let lo = parse_rational(&r.lo).map_err(serde::de::Error::custom)?;
        let hi = parse_rational(&r.hi).map_err(serde::de::Error::custom)?;
        Interval::new(lo, hi).map_err(serde::de::Error::custom)
    }
}

/// Serde adapters that write rationals as `"p/q"` strings.
pub mod serde_rational {
    use super::{format_rational, parse_rational, Rational};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }

    pub mod vec {
        use super::*;
        use serde::ser::SerializeSeq;

        pub fn serialize<S: Serializer>(xs: &[Rational], s: S) -> Result<S::Ok, S::Error> {
            let mut seq = s.serialize_seq(Some(xs.len()))?;
            for x in xs {
                seq.serialize_element(&format_rational(x))?;
            }
            seq.end()
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
            let v = Vec::<String>::deserialize(d)?;
            v.iter()
                .map(|s| parse_rational(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod option {
        use super::*;

        pub fn serialize<S: Serializer>(x: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
            match x {
                Some(x) => s.serialize_some(&format_rational(x)),
                None => s.serialize_none(),
            }
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> Result<Option<Rational>, D::Error> {
            let v = Option::<String>::deserialize(d)?;
            v.map(|s| parse_rational(&s).map_err(serde::de::Error::custom))
                .transpose()
        }
    }
}

fn exact_nth_root(x: &BigInt, n: u32) -> Option<BigInt> {
    let r = x.nth_root(n);
    (num_traits::pow(r.clone(), n as usize) == *x).then_some(r)
}

/// Rational `a <= t^(1/n) <= b` with `b - a <= tol` (both equal when the
/// root is rational).
fn root_bounds(t: &Rational, n: u32, tol: &Rational) -> (Rational, Rational) {
    debug_assert!(!t.is_negative());
    if t.is_zero() || n == 1 {
        return (t.clone(), t.clone());
    }
    if let (Some(p), Some(q)) = (exact_nth_root(t.numer(), n), exact_nth_root(t.denom(), n)) {
        let r = Rational::new(p, q);
        return (r.clone(), r);
    }
    // Scale so that one unit in the last place is at most `tol`.
    let k = tol.recip().ceil().to_integer().max(BigInt::one());
    let scaled = floor_mul(t, &num_traits::pow(k.clone(), n as usize));
    let a = scaled.nth_root(n);
    let lo = Rational::new(a.clone(), k.clone());
    let hi = Rational::new(a + 1, k);
    debug_assert!(&pow_int(&lo, n) <= t && t <= &pow_int(&hi, n));
    (lo, hi)
}

/// Enclosure of `x^(1/n)` for `x >= 0`, widened by at most `tol` per side.
pub fn nth_root_enclosure(x: &Interval, n: u32, tol: &Rational) -> Result<Interval, NumericError> {
    if n == 0 {
        return Err(NumericError::Domain("zeroth root".into()));
    }
    if x.lo.is_negative() {
        return Err(NumericError::Domain(format!("root of negative interval {x}")));
    }
    if !tol.is_positive() {
        return Err(NumericError::Domain("root tolerance must be positive".into()));
    }
    let (lo, lo_hi) = root_bounds(&x.lo, n, tol);
    if x.is_point() {
        return Ok(Interval { lo, hi: lo_hi });
    }
    let (_, hi) = root_bounds(&x.hi, n, tol);
    Ok(Interval { lo, hi })
}

/// Default tolerance for root enclosures that are not otherwise specified.
pub fn default_root_tol() -> Rational {
    ten_pow_neg(40)
}

/// Enclosure of `x^k` (`halved = false`) or `x^(k/2)` (`halved = true`).
pub fn pow_half_integer(x: &Interval, k: u32, halved: bool) -> Result<Interval, NumericError> {
    pow_half_integer_tol(x, k, halved, &default_root_tol())
}

pub fn pow_half_integer_tol(
    x: &Interval,
    k: u32,
    halved: bool,
    tol: &Rational,
) -> Result<Interval, NumericError> {
    if !halved {
        return Ok(x.pow_int(k));
    }
    if x.lo.is_negative() {
        return Err(NumericError::Domain(format!(
            "half-integer power of negative interval {x}"
        )));
    }
    if k.is_multiple_of(2) {
        return Ok(x.pow_int(k / 2));
    }
    nth_root_enclosure(&x.pow_int(k), 2, tol)
}

/// Enclosure of `x^(num/den)` for `x >= 0` and `num/den >= 0`.
pub fn pow_rational_enclosure(
    x: &Interval,
    exponent: &Rational,
    tol: &Rational,
) -> Result<Interval, NumericError> {
    if exponent.is_negative() {
        return Err(NumericError::Domain("negative exponent".into()));
    }
    let num = exponent
        .numer()
        .to_u32()
        .ok_or_else(|| NumericError::Domain("exponent numerator too large".into()))?;
    let den = exponent
        .denom()
        .to_u32()
        .ok_or_else(|| NumericError::Domain("exponent denominator too large".into()))?;
    if den == 1 {
        return Ok(x.pow_int(num));
    }
    nth_root_enclosure(&x.pow_int(num), den, tol)
}

/// Sign of a rational as `-1`, `0`, `1`.
pub fn sign(x: &Rational) -> i32 {
    match x.numer().sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// `10^k` as a big integer.
pub fn ten_pow(k: u32) -> BigInt {
    num_traits::pow(BigInt::from(10), k as usize)
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    xs.into_iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_every_supported_form() {
        assert_eq!(parse_rational("53/27").unwrap(), rat(53, 27));
        assert_eq!(parse_rational("-3").unwrap(), int(-3));
        assert_eq!(parse_rational("0.125").unwrap(), rat(1, 8));
        assert_eq!(parse_rational("1e-6").unwrap(), rat(1, 1_000_000));
        assert_eq!(parse_rational("2.5E3").unwrap(), int(2500));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn formats() {
        assert_eq!(format_rational(&rat(6, 4)), "3/2");
        assert_eq!(format_rational(&int(7)), "7");
        assert_eq!(format_decimal(&rat(1, 3), 4), "0.3333");
        assert_eq!(format_decimal(&rat(-5, 4), 2), "-1.25");
        assert_eq!(format_decimal(&rat(1, 100), 1), "0.0");
    }

    #[test]
    fn pow_int_examples() {
        assert_eq!(pow_int(&rat(2, 3), 0), int(1));
        assert_eq!(pow_int(&rat(1, 4), 2), rat(1, 16));
        assert_eq!(pow_int(&rat(23, 26), 3), rat(12167, 17576));
    }

    #[test]
    fn root_examples() {
        let tol = ten_pow_neg(12);
        let r = nth_root_enclosure(&Interval::from_int(1), 3, &tol).unwrap();
        assert_eq!(r, Interval::from_int(1));
        let r = nth_root_enclosure(&Interval::from_int(0), 2, &tol).unwrap();
        assert_eq!(r, Interval::from_int(0));
        let r = nth_root_enclosure(&Interval::from_int(2), 3, &tol).unwrap();
        assert!(r.width() <= tol);
        assert!(pow_int(r.lo(), 3) <= int(2) && pow_int(r.hi(), 3) >= int(2));
        assert!(nth_root_enclosure(&Interval::new(int(-1), int(1)).unwrap(), 2, &tol).is_err());
    }

    #[test]
    fn half_integer_examples() {
        let q = Interval::point(rat(1, 4));
        assert_eq!(pow_half_integer(&q, 2, false).unwrap(), Interval::point(rat(1, 16)));
        assert_eq!(pow_half_integer(&Interval::from_int(1), 7, true).unwrap(), Interval::from_int(1));
        let e = pow_half_integer(&q, 3, true).unwrap();
        assert!(e.contains(&rat(1, 8)));
        let e = pow_half_integer(&Interval::point(rat(1, 2)), 3, true).unwrap();
        assert!(e.width() <= default_root_tol());
    }

    #[test]
    fn interval_arithmetic_signs() {
        let a = Interval::new(int(-2), int(3)).unwrap();
        let b = Interval::new(int(-1), int(4)).unwrap();
        let p = a.mul(&b);
        assert_eq!(p, Interval::new(int(-8), int(12)).unwrap());
        assert_eq!(a.pow_int(2), Interval::new(int(0), int(9)).unwrap());
        assert!(a.recip().is_err());
        let c = Interval::new(int(2), int(4)).unwrap();
        assert_eq!(c.recip().unwrap(), Interval::new(rat(1, 4), rat(1, 2)).unwrap());
    }

    #[test]
    fn simplify_is_outward() {
        let x = Interval::new(rat(1, 3), rat(2, 3)).unwrap();
        let s = x.simplify(&BigInt::from(2));
        assert_eq!(s, Interval::new(int(0), int(1)).unwrap());
        assert_eq!(x.simplify(&BigInt::from(10)), x);
        assert!(s.contains_interval(&x));
    }

    #[test]
    fn serde_round_trip() {
        let x = Interval::new(rat(-1, 3), rat(5, 2)).unwrap();
        let j = serde_json::to_string(&x).unwrap();
        assert_eq!(j, r#"{"lo":"-1/3","hi":"5/2"}"#);
        assert_eq!(serde_json::from_str::<Interval>(&j).unwrap(), x);
    }
}
