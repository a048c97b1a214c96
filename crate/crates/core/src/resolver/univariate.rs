//! Exact sign decisions for univariate polynomials on an interval.
//!
//! `prove_univariate` answers "is `p < 0` (or `p <= 0`) on the range?" with
//! either a certificate or a witness. Low degrees go through Sturm sequences;
//! high degrees first try a subdivision of the Bernstein form, which only
//! needs integer additions, and fall back to Sturm when that stalls (a
//! tangential interior root, for instance).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use super::{Never, ResolverError, Verdict};
use crate::numeric::{int, serde_rational, sign, Interval, Rational};

/// Polynomials above this degree try the Bernstein subdivision first.
pub const STURM_MAX_DEGREE: usize = 40;
/// Subdivision budget for the Bernstein pass before falling back.
pub const BERNSTEIN_BUDGET: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strictness {
    /// `p < 0`
    Strict,
    /// `p <= 0`
    NonStrict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniRange {
    #[serde(with = "serde_rational")]
    pub lo: Rational,
    #[serde(with = "serde_rational")]
    pub hi: Rational,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl UniRange {
    pub fn closed(lo: Rational, hi: Rational) -> Self {
        UniRange {
            lo,
            hi,
            lo_open: false,
            hi_open: false,
        }
    }

    /// `(lo, hi]`
    pub fn left_open(lo: Rational, hi: Rational) -> Self {
        UniRange {
            lo,
            hi,
            lo_open: true,
            hi_open: false,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        let above = if self.lo_open { x > &self.lo } else { x >= &self.lo };
        let below = if self.hi_open { x < &self.hi } else { x <= &self.hi };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi || (self.lo == self.hi && (self.lo_open || self.hi_open))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndpointRoot {
    #[serde(with = "serde_rational")]
    pub root: Rational,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum UniMethod {
    /// Range is empty or a single point that was evaluated directly.
    Trivial,
    /// Zero polynomial under a non-strict relation.
    ZeroPolynomial,
    /// Pieces between consecutive breakpoints hold at most one distinct root
    /// of the cofactor (none under a strict relation) and the cofactor is
    /// negative at every breakpoint.
    Sturm {
        #[serde(with = "serde_rational::vec")]
        breakpoints: Vec<Rational>,
    },
    /// Bernstein coefficients of the cofactor are all negative on each piece.
    Bernstein {
        #[serde(with = "serde_rational::vec")]
        breakpoints: Vec<Rational>,
    },
}

impl UniMethod {
    pub fn name(&self) -> &'static str {
        match self {
            UniMethod::Trivial => "trivial",
            UniMethod::ZeroPolynomial => "zero_polynomial",
            UniMethod::Sturm { .. } => "sturm",
            UniMethod::Bernstein { .. } => "bernstein",
        }
    }
}

/// Everything needed to re-check a univariate claim from scratch.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniCertificate {
    pub poly: Poly,
    pub range: UniRange,
    pub strictness: Strictness,
    pub endpoint_roots: Vec<EndpointRoot>,
    pub method: UniMethod,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniWitness {
    /// Exact violating point, when one was found.
    #[serde(with = "serde_rational::option")]
    pub point: Option<Rational>,
    /// Encloses the violating point (a root for touching-zero failures).
    pub enclosure: Interval,
    #[serde(with = "serde_rational::option")]
    pub value: Option<Rational>,
    pub reason: String,
}

pub type UniVerdict = Verdict<UniCertificate, UniWitness, Never>;

fn violates(v: &Rational, strictness: Strictness) -> bool {
    v.is_positive() || (v.is_zero() && strictness == Strictness::Strict)
}

fn point_witness(x: Rational, v: Rational, reason: &str) -> UniWitness {
    UniWitness {
        enclosure: Interval::point(x.clone()),
        point: Some(x),
        value: Some(v),
        reason: reason.into(),
    }
}

/// Sturm sequence of `p` (assumed square-free), each term rescaled to a
/// primitive integer polynomial.
pub fn sturm_sequence(p: &Poly) -> Vec<Poly> {
    let mut seq = vec![p.primitive()];
    let d = p.derivative();
    if d.is_zero() {
        return seq;
    }
    seq.push(d.primitive());
    loop {
        let n = seq.len();
        let (_, r) = seq[n - 2].div_rem(&seq[n - 1]);
        if r.is_zero() {
            break;
        }
        seq.push(r.neg().primitive());
    }
    seq
}

pub fn sign_variations(seq: &[Poly], x: &Rational) -> usize {
    let mut count = 0;
    let mut last = 0;
    for p in seq {
        let s = p.sign_at(x);
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

/// Distinct roots in the open interval `(a, b)`; `a`, `b` must not be roots.
pub fn count_roots_open(seq: &[Poly], a: &Rational, b: &Rational) -> usize {
    sign_variations(seq, a).saturating_sub(sign_variations(seq, b))
}

/// A point of `(a, b)` that is not a root of `p`.
fn safe_split(p: &Poly, a: &Rational, b: &Rational) -> Rational {
    let w = b - a;
    for den in 2..64i64 {
        for num in 1..den {
            if num.gcd(&den) != 1 {
                continue;
            }
            let x = a + &w * Rational::new(num.into(), den.into());
            if !p.eval(&x).is_zero() {
                return x;
            }
        }
    }
    unreachable!("a nonzero polynomial has finitely many roots")
}

/// Splits `(lo, hi)` until every piece holds at most one distinct root.
/// Returns the breakpoints (including `lo` and `hi`) and the root pieces.
fn isolate(sf: &Poly, seq: &[Poly], lo: &Rational, hi: &Rational) -> (Vec<Rational>, Vec<usize>) {
    let mut done: Vec<(Rational, Rational, usize)> = Vec::new();
    let mut stack = vec![(lo.clone(), hi.clone())];
    while let Some((a, b)) = stack.pop() {
        let k = count_roots_open(seq, &a, &b);
        if k <= 1 {
            done.push((a, b, k));
            continue;
        }
        let m = safe_split(sf, &a, &b);
        stack.push((m.clone(), b));
        stack.push((a, m));
    }
    done.sort_by(|x, y| x.0.cmp(&y.0));
    let mut points = vec![lo.clone()];
    let mut counts = Vec::new();
    for (_, b, k) in done {
        points.push(b);
        counts.push(k);
    }
    (points, counts)
}

/// Integer multiple (positive) of the Bernstein coefficients of `p` on `[a, b]`.
pub fn bernstein_coefficients(p: &Poly, a: &Rational, b: &Rational) -> Vec<BigInt> {
    let c = p.integer_coeffs();
    let n = c.len().saturating_sub(1);
    if c.is_empty() {
        return vec![BigInt::zero()];
    }
    let w = b - a;
    let den = a.denom().lcm(w.denom());
    let big_a = (a * Rational::from_integer(den.clone())).to_integer();
    let big_w = (&w * Rational::from_integer(den.clone())).to_integer();
    // Q(y) = den^n p(y / den)
    let mut q: Vec<BigInt> = Vec::with_capacity(n + 1);
    let mut dp = BigInt::one();
    let mut den_pows = vec![BigInt::one(); n + 1];
    for slot in den_pows.iter_mut().skip(1) {
        dp *= &den;
        *slot = dp.clone();
    }
    for (i, ci) in c.iter().enumerate() {
        q.push(ci * &den_pows[n - i]);
    }
    // Taylor shift y -> y + A.
    if !big_a.is_zero() {
        for i in 0..n {
            for j in (i..n).rev() {
                let t = &q[j + 1] * &big_a;
                q[j] += t;
            }
        }
    }
    // Scale t -> W t.
    let mut wp = BigInt::one();
    for qi in q.iter_mut() {
        *qi *= &wp;
        wp *= &big_w;
    }
    // Divide by C(n, i) via multiplication with lcm / C(n, i).
    let mut binom = vec![BigInt::one(); n + 1];
    for i in 1..=n {
        binom[i] = &binom[i - 1] * BigInt::from(n - i + 1) / BigInt::from(i);
    }
    let l = binom.iter().fold(BigInt::one(), |acc, x| acc.lcm(x));
    let mut s: Vec<BigInt> = q.iter().zip(&binom).map(|(qi, bi)| qi * (&l / bi)).collect();
    // Binomial transform: b_k = sum_i C(k, i) s_i.
    for j in 1..=n {
        for k in (j..=n).rev() {
            let t = s[k - 1].clone();
            s[k] += t;
        }
    }
    s
}

fn reduce_powers_of_two(v: &mut [BigInt]) {
    let tz = v.iter().filter(|x| !x.is_zero()).filter_map(|x| x.trailing_zeros()).min();
    if let Some(tz) = tz {
        if tz > 0 {
            for x in v.iter_mut() {
                *x >>= tz;
            }
        }
    }
}

/// de Casteljau split at the midpoint, both halves scaled by `2^n`.
fn split_half(b: &[BigInt]) -> (Vec<BigInt>, Vec<BigInt>) {
    let n = b.len() - 1;
    let mut work = b.to_vec();
    let mut left = Vec::with_capacity(n + 1);
    let mut right = vec![BigInt::zero(); n + 1];
    left.push(&work[0] << n);
    right[n] = &work[n] << n;
    for j in 1..=n {
        for k in 0..=(n - j) {
            let t = work[k + 1].clone();
            work[k] += t;
        }
        left.push(&work[0] << (n - j));
        right[n - j] = &work[n - j] << (n - j);
    }
    reduce_powers_of_two(&mut left);
    reduce_powers_of_two(&mut right);
    (left, right)
}

enum Cover {
    Covered(Vec<Rational>),
    Witness(Rational),
    Exhausted,
}

/// Tries to show `p < 0` on closed `[lo, hi]` by Bernstein subdivision.
fn bernstein_cover(p: &Poly, lo: &Rational, hi: &Rational, budget: usize) -> Cover {
    let coeffs = bernstein_coefficients(p, lo, hi);
    let mut stack = vec![(lo.clone(), hi.clone(), coeffs)];
    let mut breaks = vec![lo.clone()];
    let mut used = 0;
    while let Some((a, b, c)) = stack.pop() {
        if c.iter().all(|x| x.is_negative()) {
            breaks.push(b);
            continue;
        }
        if !c[0].is_negative() {
            return Cover::Witness(a);
        }
        if !c[c.len() - 1].is_negative() {
            return Cover::Witness(b);
        }
        used += 1;
        if used > budget {
            return Cover::Exhausted;
        }
        let m = (&a + &b) / int(2);
        let (l, r) = split_half(&c);
        stack.push((m.clone(), b, r));
        stack.push((a, m, l));
    }
    Cover::Covered(breaks)
}

/// Searches for an interior point near `e` (toward `toward`) where `p`
/// violates the relation. Used when the violation sits at an open endpoint.
fn witness_near(
    p: &Poly,
    e: &Rational,
    toward: &Rational,
    strictness: Strictness,
) -> Option<(Rational, Rational)> {
    let mut step = toward - e;
    for _ in 0..4096 {
        step /= int(2);
        let x = e + &step;
        let v = p.eval(&x);
        if violates(&v, strictness) {
            return Some((x, v));
        }
    }
    None
}

/// Decides `p < 0` (strict) or `p <= 0` on `range`.
///
/// `known_roots` lists endpoints where `p` is known to vanish; at a closed
/// endpoint they are accepted even under a strict relation (the condition is
/// checked on the rest of the range), and they are recorded in the
/// certificate. Roots at open endpoints are handled automatically.
pub fn prove_univariate(
    p: &Poly,
    range: &UniRange,
    strictness: Strictness,
    known_roots: &[Rational],
) -> Result<UniVerdict, ResolverError> {
    for r in known_roots {
        if r != &range.lo && r != &range.hi {
            return Err(ResolverError::Invalid(format!(
                "declared root {r} is not an endpoint of the range"
            )));
        }
        if !p.eval(r).is_zero() {
            return Err(ResolverError::Invalid(format!("declared root {r} is not a root")));
        }
    }
    let cert = |endpoint_roots, method| UniCertificate {
        poly: p.clone(),
        range: range.clone(),
        strictness,
        endpoint_roots,
        method,
    };
    if range.is_empty() {
        return Ok(Verdict::Holds(cert(Vec::new(), UniMethod::Trivial)));
    }
    if p.is_zero() {
        return Ok(match strictness {
            Strictness::NonStrict => Verdict::Holds(cert(Vec::new(), UniMethod::ZeroPolynomial)),
            Strictness::Strict => {
                let x = if range.lo_open { (&range.lo + &range.hi) / int(2) } else { range.lo.clone() };
                Verdict::Fails(point_witness(x, Rational::zero(), "zero polynomial"))
            }
        });
    }
    let (lo, hi) = (&range.lo, &range.hi);
    for (e, open) in [(lo, range.lo_open), (hi, range.hi_open)] {
        if open {
            continue;
        }
        let v = p.eval(e);
        let declared = known_roots.contains(e);
        if v.is_positive() || (v.is_zero() && strictness == Strictness::Strict && !declared) {
            return Ok(Verdict::Fails(point_witness(e.clone(), v, "endpoint")));
        }
    }
    if lo == hi {
        return Ok(Verdict::Holds(cert(Vec::new(), UniMethod::Trivial)));
    }
    let (q, m_lo) = p.strip_root(lo);
    let (q, m_hi) = q.strip_root(hi);
    let mut endpoint_roots = Vec::new();
    if m_lo > 0 {
        endpoint_roots.push(EndpointRoot { root: lo.clone(), multiplicity: m_lo });
    }
    if m_hi > 0 {
        endpoint_roots.push(EndpointRoot { root: hi.clone(), multiplicity: m_hi });
    }
    // On (lo, hi): sign p = sign q * (-1)^m_hi.
    let q = if m_hi % 2 == 1 { q.neg() } else { q };
    // Violations right next to an endpoint.
    for (e, other) in [(lo, hi), (hi, lo)] {
        if q.eval(e).is_positive() {
            if let Some((x, v)) = witness_near(p, e, other, strictness) {
                return Ok(Verdict::Fails(point_witness(x, v, "near endpoint")));
            }
        }
    }
    if q.degree().unwrap_or(0) > STURM_MAX_DEGREE {
        match bernstein_cover(&q, lo, hi, BERNSTEIN_BUDGET) {
            Cover::Covered(breakpoints) => {
                return Ok(Verdict::Holds(cert(endpoint_roots, UniMethod::Bernstein { breakpoints })));
            }
            Cover::Witness(x) => {
                let v = p.eval(&x);
                if violates(&v, strictness) && range.contains(&x) {
                    return Ok(Verdict::Fails(point_witness(x, v, "sign")));
                }
            }
            Cover::Exhausted => {}
        }
    }
    let sf = q.square_free();
    let seq = sturm_sequence(&sf);
    let (breakpoints, counts) = isolate(&sf, &seq, lo, hi);
    for x in &breakpoints[1..breakpoints.len() - 1] {
        let v = p.eval(x);
        if violates(&v, strictness) {
            return Ok(Verdict::Fails(point_witness(x.clone(), v, "sign")));
        }
    }
    if strictness == Strictness::Strict {
        if let Some(i) = counts.iter().position(|&k| k > 0) {
            return Ok(Verdict::Fails(UniWitness {
                point: None,
                enclosure: Interval::new(breakpoints[i].clone(), breakpoints[i + 1].clone())
                    .expect("ordered breakpoints"),
                value: None,
                reason: "interior root".into(),
            }));
        }
    }
    Ok(Verdict::Holds(cert(endpoint_roots, UniMethod::Sturm { breakpoints })))
}

/// Re-checks a certificate without trusting any of its derived data.
pub fn replay_univariate(cert: &UniCertificate) -> bool {
    let p = &cert.poly;
    let range = &cert.range;
    if range.is_empty() {
        return matches!(cert.method, UniMethod::Trivial);
    }
    if p.is_zero() {
        return cert.strictness == Strictness::NonStrict
            && matches!(cert.method, UniMethod::ZeroPolynomial);
    }
    let (lo, hi) = (&range.lo, &range.hi);
    let declared: Vec<&Rational> = cert.endpoint_roots.iter().map(|r| &r.root).collect();
    for (e, open) in [(lo, range.lo_open), (hi, range.hi_open)] {
        if open {
            continue;
        }
        let v = p.eval(e);
        if v.is_positive()
            || (v.is_zero() && cert.strictness == Strictness::Strict && !declared.contains(&e))
        {
            return false;
        }
    }
    if lo == hi {
        return matches!(cert.method, UniMethod::Trivial);
    }
    let mut q = p.clone();
    let mut m_hi = 0;
    for r in &cert.endpoint_roots {
        if &r.root != lo && &r.root != hi {
            return false;
        }
        for _ in 0..r.multiplicity {
            let (quot, rem) = q.divide_by_root(&r.root);
            if !rem.is_zero() {
                return false;
            }
            q = quot;
        }
        if &r.root == hi {
            m_hi += r.multiplicity;
        }
    }
    if q.eval(lo).is_zero() || q.eval(hi).is_zero() {
        return false;
    }
    let q = if m_hi % 2 == 1 { q.neg() } else { q };
    let check_breaks = |b: &[Rational]| {
        b.len() >= 2 && &b[0] == lo && &b[b.len() - 1] == hi && b.windows(2).all(|w| w[0] < w[1])
    };
    match &cert.method {
        UniMethod::Trivial | UniMethod::ZeroPolynomial => false,
        UniMethod::Sturm { breakpoints } => {
            if !check_breaks(breakpoints) {
                return false;
            }
            if breakpoints.iter().any(|x| !q.eval(x).is_negative()) {
                return false;
            }
            let sf = q.square_free();
            let seq = sturm_sequence(&sf);
            let limit = match cert.strictness {
                Strictness::Strict => 0,
                Strictness::NonStrict => 1,
            };
            breakpoints
                .windows(2)
                .all(|w| count_roots_open(&seq, &w[0], &w[1]) <= limit)
        }
        UniMethod::Bernstein { breakpoints } => {
            check_breaks(breakpoints)
                && breakpoints.windows(2).all(|w| {
                    bernstein_coefficients(&q, &w[0], &w[1])
                        .iter()
                        .all(|c| c.is_negative())
                })
        }
    }
}

/// Sign of `p` on an interval known to contain no root (exact midpoint test).
pub fn constant_sign(p: &Poly, a: &Rational, b: &Rational) -> i32 {
    sign(&p.eval(&((a + b) / int(2))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn negative_definite() {
        let p = Poly::from_ints(&[-1, 0, -1]);
        let v = prove_univariate(&p, &UniRange::closed(int(0), int(1)), Strictness::Strict, &[]).unwrap();
        let c = v.certificate().unwrap();
        assert!(replay_univariate(c));
    }

    #[test]
    fn crossing_has_witness() {
        let p = Poly::from_ints(&[-1, 1]);
        let v = prove_univariate(&p, &UniRange::closed(int(0), int(2)), Strictness::Strict, &[]).unwrap();
        let w = v.witness().unwrap();
        let x = w.point.clone().unwrap();
        assert!(x >= int(1) && x <= int(2));
        assert!(!p.eval(&x).is_negative());
    }

    #[test]
    fn boundary_root_and_touching_root() {
        // -(x-1)^2 (x+1) on (1, 3]: root at the open end only.
        let p = Poly::from_ints(&[-1, 1]).pow(2).mul(&Poly::from_ints(&[1, 1])).neg();
        let r = UniRange::left_open(int(1), int(3));
        let v = prove_univariate(&p, &r, Strictness::Strict, &[int(1)]).unwrap();
        assert!(replay_univariate(v.certificate().unwrap()));
        // -(x-2)^2 on [0,3]: non-strict holds, strict fails at the double root.
        let p = Poly::from_ints(&[-2, 1]).pow(2).neg();
        let r = UniRange::closed(int(0), int(3));
        let v = prove_univariate(&p, &r, Strictness::NonStrict, &[]).unwrap();
        assert!(replay_univariate(v.certificate().unwrap()));
        let v = prove_univariate(&p, &r, Strictness::Strict, &[]).unwrap();
        assert!(v.witness().unwrap().enclosure.contains(&int(2)));
    }

    #[test]
    fn bernstein_matches_direct_evaluation() {
        let p = Poly::from_ints(&[3, -2, 0, 1]);
        let (a, b) = (rat(1, 3), rat(5, 2));
        let c = bernstein_coefficients(&p, &a, &b);
        // End coefficients are positive multiples of the endpoint values.
        assert_eq!(sign(&Rational::from_integer(c[0].clone())), sign(&p.eval(&a)));
        assert_eq!(sign(&Rational::from_integer(c[3].clone())), sign(&p.eval(&b)));
        let (l, r) = split_half(&c);
        let m = (&a + &b) / int(2);
        let lc = bernstein_coefficients(&p, &a, &m);
        let rc = bernstein_coefficients(&p, &m, &b);
        let ratio = |u: &[BigInt], v: &[BigInt]| {
            let k = Rational::new(u[0].clone(), v[0].clone());
            u.iter().zip(v).all(|(x, y)| Rational::from_integer(x.clone()) == &k * Rational::from_integer(y.clone()))
        };
        assert!(ratio(&l, &lc));
        assert!(ratio(&r, &rc));
    }

    #[test]
    fn high_degree_uses_bernstein() {
        // -(1 + x^50) on [-1, 2].
        let mut c = vec![int(0); 51];
        c[0] = int(-1);
        c[50] = int(-1);
        let p = Poly::new(c);
        let v = prove_univariate(&p, &UniRange::closed(int(-1), int(2)), Strictness::Strict, &[]).unwrap();
        let cert = v.certificate().unwrap();
        assert_eq!(cert.method.name(), "bernstein");
        assert!(replay_univariate(cert));
    }
}
