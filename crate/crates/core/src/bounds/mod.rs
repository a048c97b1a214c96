//! Upper/lower bounding sequences for root marginals of the 3-colour model.
//!
//! With `b = 1 - beta` and `z = 1 - x - y`,
//!
//! ```text
//! f_u(d, beta, x, y) = (1 - b y)^d / ((1 - b y)^d + 2 (1 - b x)^(d/2) (1 - b z)^(d/2))
//! f_l(d, beta, x, y) = (1 - b x)^d / ((1 - b x)^d + (1 - b y)^d + (1 - b z)^d)
//! ```
//!
//! and the sequences start at `(u_0, l_0) = (1, 0)` with
//! `u_{n+1} = f_u(u_n, l_n)`, `l_{n+1} = f_l(u_n, l_n)`.

pub mod critical;
pub mod d23;
pub mod derivatives;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{
    from_f64, int, nth_root_enclosure, pow_int, rat, serde_rational, ten_pow, ten_pow_neg, to_f64,
    Interval, NumericError, Rational,
};
use crate::resolver::{
    exclude_common_zero, EvalOptions, ExclusionVerdict, ExprDag, ResolverError, SearchConfig,
    UniRange,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundsError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error(transparent)]
    Resolver(#[from] ResolverError),
    #[error("could not separate a rounding boundary at step {0}")]
    Rounding(usize),
}

/// `max(1 - q/(d+1), 0)`.
pub fn beta_star(q: usize, d: usize) -> Rational {
    let b = Rational::one() - rat(q as i64, d as i64 + 1);
    if b.is_negative() {
        Rational::zero()
    } else {
        b
    }
}

fn check_args(d: u32, beta: &Rational) -> Result<(), BoundsError> {
    if d < 1 {
        return Err(BoundsError::Invalid("d must be positive".into()));
    }
    if beta.is_negative() || beta > &Rational::one() {
        return Err(BoundsError::Invalid("beta outside [0, 1]".into()));
    }
    Ok(())
}

/// `(1 - b x, 1 - b y, 1 - b (1 - x - y))`.
fn base_terms(beta: &Rational, x: &Rational, y: &Rational) -> (Rational, Rational, Rational) {
    let b = Rational::one() - beta;
    let a = Rational::one() - &b * x;
    let yy = Rational::one() - &b * y;
    let c = Rational::one() - &b * (Rational::one() - x - y);
    (a, yy, c)
}

/// `A^(d/2) C^(d/2)` (exact for even `d`).
fn half_power_product(d: u32, a: &Rational, c: &Rational, tol: &Rational) -> Result<Interval, BoundsError> {
    if d.is_multiple_of(2) {
        return Ok(Interval::point(pow_int(a, d / 2) * pow_int(c, d / 2)));
    }
    if a.is_negative() || c.is_negative() {
        return Err(BoundsError::Invalid("half power of a negative base".into()));
    }
    Ok(nth_root_enclosure(&Interval::point(pow_int(&(a * c), d)), 2, tol)?)
}

/// Enclosure of `f_u` at a rational point (a single point for even `d`).
pub fn f_u(d: u32, beta: &Rational, x: &Rational, y: &Rational, tol: &Rational) -> Result<Interval, BoundsError> {
    check_args(d, beta)?;
    let (a, yy, c) = base_terms(beta, x, y);
    let s = half_power_product(d, &a, &c, tol)?;
    let yd = pow_int(&yy, d);
    let den = s.scale(&int(2)).add_scalar(&yd);
    if den.contains_zero() {
        return Err(BoundsError::Invalid("f_u denominator vanishes".into()));
    }
    Ok(Interval::point(yd).div(&den)?)
}

pub fn f_l(d: u32, beta: &Rational, x: &Rational, y: &Rational) -> Result<Rational, BoundsError> {
    check_args(d, beta)?;
    let (a, yy, c) = base_terms(beta, x, y);
    let ad = pow_int(&a, d);
    let den = &ad + pow_int(&yy, d) + pow_int(&c, d);
    if den.is_zero() {
        return Err(BoundsError::Invalid("f_l denominator vanishes".into()));
    }
    Ok(ad / den)
}

/// Natural interval extension of `f_u` over a box in `(x, y)`.
pub fn f_u_box(d: u32, beta: &Rational, x: &Interval, y: &Interval, tol: &Rational) -> Result<Interval, BoundsError> {
    let b = Rational::one() - beta;
    let one = Interval::from_int(1);
    let a = one.sub(&x.scale(&b));
    let yy = one.sub(&y.scale(&b));
    let c = one.sub(&one.sub(x).sub(y).scale(&b));
    let s = if d.is_multiple_of(2) {
        a.pow_int(d / 2).mul(&c.pow_int(d / 2))
    } else {
        nth_root_enclosure(&a.mul(&c).pow_int(d), 2, tol)?
    };
    // 1 / (1 + 2 S / Y^d)
    let t = s.scale(&int(2)).div(&yy.pow_int(d))?.add_scalar(&Rational::one());
    Ok(t.recip()?)
}

pub fn f_l_box(d: u32, beta: &Rational, x: &Interval, y: &Interval) -> Result<Interval, BoundsError> {
    let b = Rational::one() - beta;
    let one = Interval::from_int(1);
    let a = one.sub(&x.scale(&b));
    let yy = one.sub(&y.scale(&b));
    let c = one.sub(&one.sub(x).sub(y).scale(&b));
    let t = yy.pow_int(d).add(&c.pow_int(d)).div(&a.pow_int(d))?.add_scalar(&Rational::one());
    Ok(t.recip()?)
}

/// Floating-point `f_u` with real `d` (for sampling and derivatives).
pub fn f_u_f64(d: f64, beta: f64, x: f64, y: f64) -> f64 {
    let b = 1.0 - beta;
    let a = 1.0 - b * x;
    let yy = 1.0 - b * y;
    let c = 1.0 - b * (1.0 - x - y);
    let yd = yy.powf(d);
    yd / (yd + 2.0 * a.powf(d / 2.0) * c.powf(d / 2.0))
}

pub fn f_l_f64(d: f64, beta: f64, x: f64, y: f64) -> f64 {
    let b = 1.0 - beta;
    let a = 1.0 - b * x;
    let yy = 1.0 - b * y;
    let c = 1.0 - b * (1.0 - x - y);
    let ad = a.powf(d);
    ad / (ad + yy.powf(d) + c.powf(d))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SeqMode {
    /// Enclosures of the true sequence; endpoints whose denominators exceed
    /// `denominator_bound` are rounded outward.
    Exact {
        #[serde(with = "crate::bounds::serde_bigint")]
        denominator_bound: BigInt,
    },
    /// `u' = ceil(P f_u)/P`, `l' = floor(P f_l)/P`.
    Rounded { precision: u64 },
}

impl SeqMode {
    pub fn exact() -> Self {
        SeqMode::Exact {
            denominator_bound: ten_pow(18),
        }
    }

    pub fn rounded(precision: u64) -> Self {
        SeqMode::Rounded { precision }
    }
}

pub(crate) mod serde_bigint {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&x.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundPair {
    pub n: usize,
    pub u: Interval,
    pub l: Interval,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundSequence {
    pub d: u32,
    #[serde(with = "serde_rational")]
    pub beta: Rational,
    pub mode: SeqMode,
    pub entries: Vec<BoundPair>,
}

fn ceil_to(x: &Rational, p: &BigInt) -> Rational {
    Rational::new((x * Rational::from_integer(p.clone())).ceil().to_integer(), p.clone())
}

fn floor_to(x: &Rational, p: &BigInt) -> Rational {
    Rational::new((x * Rational::from_integer(p.clone())).floor().to_integer(), p.clone())
}

/// `ceil(P f_u(x, y)) / P`, tightening the root enclosure until decided.
fn rounded_u(d: u32, beta: &Rational, x: &Rational, y: &Rational, p: &BigInt, step: usize) -> Result<Rational, BoundsError> {
    let mut tol = ten_pow_neg(30);
    for _ in 0..12 {
        let e = f_u(d, beta, x, y, &tol)?;
        let (lo, hi) = (ceil_to(e.lo(), p), ceil_to(e.hi(), p));
        if lo == hi {
            return Ok(lo);
        }
        tol = &tol * &tol;
    }
    Err(BoundsError::Rounding(step))
}

fn exact_step(
    d: u32,
    beta: &Rational,
    u: &Interval,
    l: &Interval,
    tol: &Rational,
) -> Result<(Interval, Interval), BoundsError> {
    if let (Some(x), Some(y)) = (u.as_point(), l.as_point()) {
        let nu = f_u(d, beta, x, y, tol)?;
        let nl = Interval::point(f_l(d, beta, x, y)?);
        return Ok((nu, nl));
    }
    let one = Rational::one();
    let (a, b, c, e) = (u.lo(), u.hi(), l.lo(), l.hi());
    // f_u increases in x where 2x + y >= 1 and always decreases in y;
    // f_l decreases in x and increases in y where x + 2y <= 1.
    let nu = if (a * int(2) + c) >= one {
        let lo = f_u(d, beta, a, e, tol)?;
        let hi = f_u(d, beta, b, c, tol)?;
        Interval::new(lo.lo().clone(), hi.hi().clone())?
    } else {
        f_u_box(d, beta, u, l, tol)?
    };
    let nl = if (b + e * int(2)) <= one {
        Interval::new(f_l(d, beta, b, c)?, f_l(d, beta, a, e)?)?
    } else {
        f_l_box(d, beta, u, l)?
    };
    Ok((nu, nl))
}

/// Terms `0..=n_max` of the bounding sequences.
pub fn iterate_bounds(d: u32, beta: &Rational, n_max: usize, mode: &SeqMode) -> Result<BoundSequence, BoundsError> {
    check_args(d, beta)?;
    let mut entries = vec![BoundPair {
        n: 0,
        u: Interval::from_int(1),
        l: Interval::from_int(0),
    }];
    for n in 1..=n_max {
        let prev = &entries[n - 1];
        let (u, l) = match mode {
            SeqMode::Rounded { precision } => {
                let p = BigInt::from(*precision);
                let (x, y) = (prev.u.lo(), prev.l.lo());
                let u = rounded_u(d, beta, x, y, &p, n)?;
                let l = floor_to(&f_l(d, beta, x, y)?, &p);
                (Interval::point(u), Interval::point(l))
            }
            SeqMode::Exact { denominator_bound } => {
                let tol = Rational::new(BigInt::one(), denominator_bound * BigInt::from(1000));
                let (u, l) = exact_step(d, beta, &prev.u, &prev.l, &tol)?;
                (u.simplify(denominator_bound), l.simplify(denominator_bound))
            }
        };
        entries.push(BoundPair { n, u, l });
    }
    Ok(BoundSequence {
        d,
        beta: beta.clone(),
        mode: mode.clone(),
        entries,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Pass,
    Fail,
    /// Enclosures overlap; the comparison could not be decided.
    Undecided,
}

impl Check {
    fn and(self, other: Check) -> Check {
        match (self, other) {
            (Check::Fail, _) | (_, Check::Fail) => Check::Fail,
            (Check::Undecided, _) | (_, Check::Undecided) => Check::Undecided,
            _ => Check::Pass,
        }
    }

    /// `a <= b` on enclosures.
    fn le(a: &Interval, b: &Interval) -> Check {
        if a.hi() <= b.lo() {
            Check::Pass
        } else if a.lo() > b.hi() {
            Check::Fail
        } else {
            Check::Undecided
        }
    }

    pub fn passed(self) -> bool {
        self == Check::Pass
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub d: u32,
    #[serde(with = "serde_rational")]
    pub beta: Rational,
    pub terms: usize,
    pub u_nonincreasing: Check,
    pub l_nondecreasing: Check,
    /// `2 l + u <= 1 <= 2 u + l` at every index.
    pub sandwich: Check,
    /// Enclosure of `u_N / l_N` at the last index (absent when `l_N` may be 0).
    pub terminal_ratio: Option<Interval>,
    #[serde(with = "serde_rational::option")]
    pub ratio_bound: Option<Rational>,
    pub ratio_within_bound: Check,
    /// First index at which some flag failed.
    pub first_failure: Option<usize>,
}

impl SequenceReport {
    pub fn all_pass(&self) -> bool {
        self.u_nonincreasing.passed()
            && self.l_nondecreasing.passed()
            && self.sandwich.passed()
            && self.ratio_within_bound.passed()
    }
}

/// Checks monotonicity, the sandwich inequalities and (optionally) the
/// terminal ratio `u_N / l_N <= ratio_bound`.
pub fn verify_sequence_report(seq: &BoundSequence, ratio_bound: Option<&Rational>) -> SequenceReport {
    let one = Interval::from_int(1);
    let two = int(2);
    let mut first_failure = None;
    let mut note = |c: Check, n: usize| {
        if c == Check::Fail && first_failure.is_none() {
            first_failure = Some(n);
        }
        c
    };
    let mut u_mono = Check::Pass;
    let mut l_mono = Check::Pass;
    let mut sandwich = Check::Pass;
    for (i, e) in seq.entries.iter().enumerate() {
        let low = e.l.scale(&two).add(&e.u);
        let high = e.u.scale(&two).add(&e.l);
        let s = Check::le(&low, &one).and(Check::le(&one, &high));
        sandwich = sandwich.and(note(s, e.n));
        if i > 0 {
            let prev = &seq.entries[i - 1];
            u_mono = u_mono.and(note(Check::le(&e.u, &prev.u), e.n));
            l_mono = l_mono.and(note(Check::le(&prev.l, &e.l), e.n));
        }
    }
    let last = seq.entries.last().expect("sequence has a first term");
    let terminal_ratio = last.l.is_positive().then(|| last.u.div(&last.l).expect("positive divisor"));
    let ratio_within_bound = match (ratio_bound, &terminal_ratio) {
        (None, _) => Check::Pass,
        (Some(_), None) => Check::Undecided,
        (Some(b), Some(r)) => note(Check::le(r, &Interval::point(b.clone())), last.n),
    };
    SequenceReport {
        d: seq.d,
        beta: seq.beta.clone(),
        terms: seq.entries.len(),
        u_nonincreasing: u_mono,
        l_nondecreasing: l_mono,
        sandwich,
        terminal_ratio,
        ratio_bound: ratio_bound.cloned(),
        ratio_within_bound,
        first_failure,
    }
}

/// CSV rows `n,u_lo,u_hi,l_lo,l_hi,ratio` (`ratio` is an upper bound of
/// `u/l`, exact when both terms are exact; empty when `l` may vanish).
pub fn sequence_csv_rows(seq: &BoundSequence) -> Vec<[String; 6]> {
    use crate::numeric::format_rational as f;
    seq.entries
        .iter()
        .map(|e| {
            let ratio = if e.l.is_positive() {
                f(&(e.u.hi() / e.l.lo()))
            } else {
                String::new()
            };
            [
                e.n.to_string(),
                f(e.u.lo()),
                f(e.u.hi()),
                f(e.l.lo()),
                f(e.l.hi()),
                ratio,
            ]
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub d: u32,
    #[serde(with = "serde_rational")]
    pub beta: Rational,
    #[serde(with = "serde_rational")]
    pub u: Rational,
    #[serde(with = "serde_rational")]
    pub l: Rational,
    /// Upper bounds on `|f_u(u, l) - u|` and `|f_l(u, l) - l|`.
    #[serde(with = "serde_rational")]
    pub residual_u: Rational,
    #[serde(with = "serde_rational")]
    pub residual_l: Rational,
    pub iterations: usize,
    /// `0 < l <= 1 - u - l <= u < 1`.
    pub ordered: bool,
}

/// Iterates the map from `(1, 0)` in floating point until successive
/// iterates agree to `tol / 100`, then bounds the residual exactly at the
/// rational point reached.
pub fn fixed_point_iterate(d: u32, beta: &Rational, tol: &Rational, max_iter: usize) -> Result<FixedPoint, BoundsError> {
    check_args(d, beta)?;
    let (df, bf, tf) = (d as f64, to_f64(beta), to_f64(tol) / 100.0);
    let (mut u, mut l) = (1.0f64, 0.0f64);
    let mut iterations = 0;
    while iterations < max_iter {
        let nu = f_u_f64(df, bf, u, l);
        let nl = f_l_f64(df, bf, u, l);
        iterations += 1;
        let delta = (nu - u).abs() + (nl - l).abs();
        u = nu;
        l = nl;
        if delta < tf {
            break;
        }
    }
    let (ur, lr) = (from_f64(u), from_f64(l));
    let tight = ten_pow_neg(40);
    let fu = f_u(d, beta, &ur, &lr, &tight)?;
    let fl = f_l(d, beta, &ur, &lr)?;
    let residual_u = (fu.hi() - &ur).abs().max((fu.lo() - &ur).abs());
    let residual_l = (fl - &lr).abs();
    let z = Rational::one() - &ur - &lr;
    let ordered = lr.is_positive() && lr <= z && z <= ur && ur < Rational::one();
    Ok(FixedPoint {
        d,
        beta: beta.clone(),
        u: ur,
        l: lr,
        residual_u,
        residual_l,
        iterations,
        ordered,
    })
}

/// A box in `(x, y, beta)` with per-side open/closed flags.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointBox {
    pub name: String,
    pub x: UniRange,
    pub y: UniRange,
    pub beta: UniRange,
}

fn side(lo: Rational, hi: Rational, lo_open: bool, hi_open: bool) -> UniRange {
    UniRange { lo, hi, lo_open, hi_open }
}

/// The two `d = 2` regions that must not contain a fixed point:
/// `{0 < y <= 1/3, 1106/2500 <= x < 1}` and `{0 < y <= 460/2000, 1/3 <= x < 1}`,
/// each for `0 < beta <= 1`.
pub fn exclusion_boxes() -> [FixedPointBox; 2] {
    let beta = side(int(0), int(1), true, false);
    [
        FixedPointBox {
            name: "x-upper".into(),
            x: side(rat(1106, 2500), int(1), false, true),
            y: side(int(0), rat(1, 3), true, false),
            beta: beta.clone(),
        },
        FixedPointBox {
            name: "y-lower".into(),
            x: side(rat(1, 3), int(1), false, true),
            y: side(int(0), rat(460, 2000), true, false),
            beta,
        },
    ]
}

/// `x (Y^d + 2 A^(d/2) C^(d/2)) - Y^d` and `y (A^d + Y^d + C^d) - A^d`
/// (even `d`) over variables `(x, y, beta)`, written with nonnegative
/// summands for `x, y, beta` in `[0, 1]`.
pub fn fixed_point_system(d: u32) -> Result<[ExprDag; 2], BoundsError> {
    if d % 2 == 1 || d == 0 {
        return Err(BoundsError::Invalid("fixed-point system needs even d".into()));
    }
    let h = d / 2;
    let b = "(- 1 beta)";
    let a = format!("(+ beta (* {b} (- 1 x)))");
    let yy = "(+ (- 1 y) (* beta y))".to_string();
    let c = format!("(+ beta (* {b} (+ x y)))");
    let g1 = format!("(- (* 2 x (^ {a} {h}) (^ {c} {h})) (* (- 1 x) (^ {yy} {d})))");
    let g2 = format!("(- (* y (+ (^ {a} {d}) (^ {yy} {d}) (^ {c} {d}))) (^ {a} {d}))");
    let vars = ["x", "y", "beta"];
    Ok([ExprDag::parse(&g1, &vars)?, ExprDag::parse(&g2, &vars)?])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionReport {
    pub d: u32,
    pub region: FixedPointBox,
    #[serde(with = "serde_rational")]
    pub epsilon: Rational,
    /// Closed box actually searched: open sides moved inward by `epsilon`.
    pub searched: Vec<Interval>,
    pub verdict: ExclusionVerdict,
}

pub fn default_exclusion_config(budget: usize) -> SearchConfig {
    SearchConfig {
        budget,
        min_relative_width: Rational::new(BigInt::one(), BigInt::one() << 44),
        eval: EvalOptions::default(),
    }
}

/// Shows that `(f_u, f_l)` has no fixed point in the region.
pub fn fixed_point_exclusion(
    d: u32,
    region: &FixedPointBox,
    epsilon: &Rational,
    cfg: &SearchConfig,
) -> Result<ExclusionReport, BoundsError> {
    let system = fixed_point_system(d)?;
    let shrink = |s: &UniRange| {
        let lo = if s.lo_open { &s.lo + epsilon } else { s.lo.clone() };
        let hi = if s.hi_open { &s.hi - epsilon } else { s.hi.clone() };
        Interval::new(lo, hi)
    };
    let searched = vec![shrink(&region.x)?, shrink(&region.y)?, shrink(&region.beta)?];
    let verdict = exclude_common_zero(&system, &searched, cfg, &ten_pow_neg(9))?;
    Ok(ExclusionReport {
        d,
        region: region.clone(),
        epsilon: epsilon.clone(),
        searched,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_star_examples() {
        assert_eq!(beta_star(3, 2), int(0));
        assert_eq!(beta_star(3, 3), rat(1, 4));
        assert_eq!(beta_star(4, 4), rat(1, 5));
    }

    #[test]
    fn first_step_closed_forms() {
        for d in 2..=6u32 {
            for beta in [rat(1, 4), rat(1, 2), rat(9, 10)] {
                let s = iterate_bounds(d, &beta, 1, &SeqMode::exact()).unwrap();
                let e = &s.entries[1];
                let bd = pow_int(&beta, d);
                assert_eq!(e.l, Interval::point(&bd / (&bd + int(2))));
                // u_1 = 1 / (1 + 2 beta^(d/2))
                let half = crate::numeric::pow_half_integer(&Interval::point(beta.clone()), d, true).unwrap();
                let want = half.scale(&int(2)).add_scalar(&int(1)).recip().unwrap();
                assert!(e.u.intersect(&want).is_some());
            }
        }
    }

    #[test]
    fn odd_d_exact_sequence_passes() {
        let s = iterate_bounds(5, &beta_star(3, 5), 20, &SeqMode::exact()).unwrap();
        let r = verify_sequence_report(&s, None);
        assert!(r.all_pass(), "{r:?}");
    }

    #[test]
    fn corrupted_sequence_fails() {
        let mut s = iterate_bounds(4, &beta_star(3, 4), 10, &SeqMode::rounded(10000)).unwrap();
        s.entries[5].u = Interval::point(s.entries[4].u.hi() + rat(1, 100));
        let r = verify_sequence_report(&s, None);
        assert_eq!(r.u_nonincreasing, Check::Fail);
        assert_eq!(r.first_failure, Some(5));
    }

    #[test]
    fn rounded_dominates_exact() {
        for d in [3u32, 4, 7] {
            let beta = beta_star(3, d as usize);
            let e = iterate_bounds(d, &beta, 15, &SeqMode::exact()).unwrap();
            let r = iterate_bounds(d, &beta, 15, &SeqMode::rounded(10000)).unwrap();
            for (a, b) in e.entries.iter().zip(&r.entries) {
                assert!(a.u.hi() <= b.u.lo());
                assert!(a.l.lo() >= b.l.hi());
            }
        }
    }

    #[test]
    fn fixed_point_at_d2() {
        let fp = fixed_point_iterate(2, &rat(1, 2), &ten_pow_neg(9), 100_000).unwrap();
        assert!(fp.residual_u <= ten_pow_neg(9) && fp.residual_l <= ten_pow_neg(9));
        assert!(fp.ordered);
        assert!(fp.u <= rat(1107, 2500) && fp.l >= rat(459, 2000));
    }

    #[test]
    fn system_matches_map() {
        let [g1, g2] = fixed_point_system(2).unwrap();
        let (x, y, beta) = (rat(2, 5), rat(1, 4), rat(1, 3));
        let fu = f_u(2, &beta, &x, &y, &ten_pow_neg(20)).unwrap();
        let fl = f_l(2, &beta, &x, &y).unwrap();
        let p = [x.clone(), y.clone(), beta];
        // g1 = den_u (x - f_u) with den_u > 0, similarly for g2.
        let v1 = g1.eval_point(&p).unwrap();
        let v2 = g2.eval_point(&p).unwrap();
        assert_eq!(crate::numeric::sign(v1.lo()), crate::numeric::sign(&(&x - fu.lo())));
        assert_eq!(crate::numeric::sign(v2.lo()), crate::numeric::sign(&(&y - &fl)));
    }

    #[test]
    fn box_containing_fixed_point_fails() {
        let region = FixedPointBox {
            name: "control".into(),
            x: UniRange::closed(rat(3, 10), rat(2, 5)),
            y: UniRange::closed(rat(3, 10), rat(2, 5)),
            beta: UniRange::closed(rat(1, 2), rat(1, 2)),
        };
        let r = fixed_point_exclusion(2, &region, &ten_pow_neg(9), &default_exclusion_config(100_000)).unwrap();
        let w = r.verdict.witness().expect("fixed point inside");
        assert!((&w.point[0] - rat(1, 3)).abs() < ten_pow_neg(9));
    }
}
