//! Value parsers for command-line arguments. Every number is read as an exact
//! rational (`p/q`, integer or decimal; decimals are converted exactly).

use std::fmt;
use std::str::FromStr;

use potts_core::bounds::beta_star;
use potts_core::numeric::{format_rational, parse_rational};
use potts_core::Rational;

pub fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|_| format!("not a rational number: {s:?}"))
}

/// `lo:hi` with `lo < hi`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatRange {
    pub lo: Rational,
    pub hi: Rational,
}

impl FromStr for RatRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got {s:?}"))?;
        let (lo, hi) = (rational(a)?, rational(b)?);
        if lo >= hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(RatRange { lo, hi })
    }
}

impl RatRange {
    /// `(lo, hi]`
    pub fn left_open(&self) -> String {
        format!("({}, {}]", format_rational(&self.lo), format_rational(&self.hi))
    }
}

impl fmt::Display for RatRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", format_rational(&self.lo), format_rational(&self.hi))
    }
}

/// `a:b` inclusive, or a single integer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntRange {
    pub lo: usize,
    pub hi: usize,
}

impl IntRange {
    pub fn values(&self) -> Vec<usize> {
        (self.lo..=self.hi).collect()
    }
}

impl FromStr for IntRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("not an integer: {t:?}"));
        let (lo, hi) = match s.split_once(':') {
            Some((a, b)) => (parse(a)?, parse(b)?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range {s:?}"));
        }
        Ok(IntRange { lo, hi })
    }
}

/// An edge interaction: a rational in `[0, 1]` or `critical` (β_* per `d`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BetaArg {
    Critical,
    Value(Rational),
}

impl BetaArg {
    pub fn resolve(&self, q: usize, d: usize) -> Rational {
        match self {
            BetaArg::Critical => beta_star(q, d),
            BetaArg::Value(b) => b.clone(),
        }
    }

    pub fn is_critical(&self) -> bool {
        matches!(self, BetaArg::Critical)
    }
}

impl FromStr for BetaArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("critical") {
            return Ok(BetaArg::Critical);
        }
        let b = rational(s)?;
        if b < Rational::from_integer(0.into()) || b > Rational::from_integer(1.into()) {
            return Err(format!("beta must lie in [0, 1], got {s}"));
        }
        Ok(BetaArg::Value(b))
    }
}

impl fmt::Display for BetaArg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaArg::Critical => f.write_str("critical"),
            BetaArg::Value(b) => f.write_str(&format_rational(b)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use potts_core::numeric::rat;

    #[test]
    fn ranges() {
        let r: RatRange = "1:53/27".parse().unwrap();
        assert_eq!((r.lo, r.hi), (rat(1, 1), rat(53, 27)));
        assert!("2:1".parse::<RatRange>().is_err());
        assert_eq!("3:5".parse::<IntRange>().unwrap().values(), vec![3, 4, 5]);
        assert_eq!("7".parse::<IntRange>().unwrap().values(), vec![7]);
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(rational("0.1").unwrap(), rat(1, 10));
        assert_eq!(rational("1e-9").unwrap(), rat(1, 1_000_000_000));
    }

    #[test]
    fn beta() {
        assert_eq!("critical".parse::<BetaArg>().unwrap().resolve(3, 3), rat(1, 4));
        assert!("3/2".parse::<BetaArg>().is_err());
    }
}
