//! Extremal tuples, the two-level maximum and the contraction condition.
//!
//! A vector in `Ex_c(α)` has entries in `{1, α}`, entry `1` at colour `c`
//! and at least one `α`; it is stored as a `q`-bit pattern (bit set ⇔ `α`).
//! The maximum of `h` over the simplex is attained on tuples of such vectors,
//! so both the point check and the range check only enumerate those. Because
//! `h` is symmetric in its children, tuples are enumerated as multisets
//! unless a full scan is requested.

mod phi;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::beta_star;
use crate::model::{ModelError, ProbVec};
use crate::numeric::{int, pow_int, serde_rational, Rational};
use crate::resolver::{
    prove_univariate, Poly, ResolverError, Strictness, UniCertificate, UniRange, Verdict,
};

pub use phi::{
    check_phi_star, phi_eval, phi_star, phi_star_grid, reduce_extremal_to_phi, PhiStarResult,
    TYPE_I, TYPE_II, TYPE_III,
};

/// Largest colour count handled (patterns are `u32`).
pub const MAX_Q: usize = 16;
/// Default cap on enumerated tuples.
pub const DEFAULT_ENUMERATION_CAP: u128 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConditionError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("enumeration needs {needed} tuples, cap is {cap}")]
    Budget { needed: u128, cap: u128 },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Resolver(#[from] ResolverError),
    #[error("tuple is not one of the three q = 3 types")]
    NotReducible,
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ConditionError> {
    Err(ConditionError::Invalid(msg.into()))
}

fn check_colours(q: usize, cs: &[usize]) -> Result<(), ConditionError> {
    if !(3..=MAX_Q).contains(&q) {
        return invalid(format!("q must lie in 3..={MAX_Q}"));
    }
    if cs.iter().any(|&c| c >= q) {
        return invalid("colour out of range");
    }
    Ok(())
}

fn check_beta(beta: &Rational) -> Result<(), ConditionError> {
    if beta.is_negative() || beta >= &Rational::one() {
        return invalid("beta must lie in [0, 1)");
    }
    Ok(())
}

/// Bit patterns of `Ex_c`, in increasing order.
pub fn ex_patterns(q: usize, c: usize) -> Vec<u32> {
    (1u32..(1u32 << q)).filter(|m| m & (1 << c) == 0).collect()
}

pub fn pattern_vector(q: usize, pattern: u32, alpha: &Rational) -> ProbVec {
    (0..q)
        .map(|i| if pattern >> i & 1 == 1 { alpha.clone() } else { Rational::one() })
        .collect()
}

/// The `2^{q-1} - 1` vectors of `Ex_c(α)`, unnormalised.
pub fn enumerate_ex(q: usize, c: usize, alpha: &Rational) -> Result<Vec<ProbVec>, ConditionError> {
    check_colours(q, &[c])?;
    if alpha <= &Rational::one() {
        return invalid("alpha must exceed 1");
    }
    Ok(ex_patterns(q, c).into_iter().map(|m| pattern_vector(q, m, alpha)).collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtremalTuple {
    pub q: usize,
    pub d: usize,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    pub base_colour: usize,
    pub patterns: Vec<u32>,
}

impl ExtremalTuple {
    pub fn new(
        q: usize,
        alpha: Rational,
        base_colour: usize,
        patterns: Vec<u32>,
    ) -> Result<Self, ConditionError> {
        check_colours(q, &[base_colour])?;
        if alpha <= Rational::one() {
            return invalid("alpha must exceed 1");
        }
        let full = (1u32 << q) - 1;
        for &m in &patterns {
            if m == 0 || m & !full != 0 || m >> base_colour & 1 == 1 {
                return invalid(format!("pattern {m:#b} is not in Ex_{base_colour}"));
            }
        }
        Ok(ExtremalTuple { q, d: patterns.len(), alpha, base_colour, patterns })
    }

    pub fn vectors(&self) -> Vec<ProbVec> {
        self.patterns.iter().map(|&m| pattern_vector(self.q, m, &self.alpha)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumOptions {
    /// Enumerate multisets instead of ordered tuples.
    pub dedupe: bool,
    pub cap: u128,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions { dedupe: true, cap: DEFAULT_ENUMERATION_CAP }
    }
}

fn binomial(n: u128, k: u128) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut r: u128 = 1;
    for i in 0..k {
        r = r.checked_mul(n - i)? / (i + 1);
    }
    Some(r)
}

/// Number of tuples of `d` patterns out of `m`.
pub fn tuple_count(m: usize, d: usize, dedupe: bool) -> Option<u128> {
    if dedupe {
        binomial((m + d) as u128 - 1, d as u128)
    } else {
        (m as u128).checked_pow(d as u32)
    }
}

/// Index sequences in lexicographic order; non-decreasing when `dedupe`.
pub fn index_tuples(m: usize, d: usize, dedupe: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; d];
    if m == 0 {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] + 1 < m {
                cur[i] += 1;
                let v = if dedupe { cur[i] } else { 0 };
                for x in cur.iter_mut().skip(i + 1) {
                    *x = v;
                }
                break;
            }
        }
    }
}

/// Per-pattern factors `1 - (1-β)(p_c - 1)/(β + Σ_{c'≠c2} p_{c'})` for each
/// colour `c ≠ c2`, indexed `[pattern][c]` (entry at `c2` unused).
fn factors(q: usize, c2: usize, beta: &Rational, alpha: &Rational, pats: &[u32]) -> Vec<Vec<Rational>> {
    let b = Rational::one() - beta;
    pats.iter()
        .map(|&m| {
            let v = pattern_vector(q, m, alpha);
            let den: Rational = beta + v.iter().enumerate().filter(|(c, _)| *c != c2).map(|(_, x)| x).sum::<Rational>();
            (0..q)
                .map(|c| Rational::one() - &b * (&v[c] - Rational::one()) / &den)
                .collect()
        })
        .collect()
}

fn h_from_factors(
    q: usize,
    c1: usize,
    c2: usize,
    beta: &Rational,
    table: &[Vec<Rational>],
    idx: &[usize],
) -> Rational {
    let mut sum = Rational::zero();
    let mut g1 = Rational::one();
    for c in (0..q).filter(|&c| c != c2) {
        let mut g = Rational::one();
        for &i in idx {
            g *= &table[i][c];
        }
        if c == c1 {
            g1 = g.clone();
        }
        sum += g;
    }
    Rational::one() + (Rational::one() - beta) * (Rational::one() - g1) / (beta + sum)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxH {
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub argmax: ExtremalTuple,
    pub evaluated: u128,
}

pub fn max_h_extremal(
    q: usize,
    d: usize,
    alpha: &Rational,
    c1: usize,
    c2: usize,
    beta: &Rational,
) -> Result<MaxH, ConditionError> {
    max_h_extremal_with(q, d, alpha, c1, c2, beta, &EnumOptions::default())
}

/// Exact maximum of `h_{c1,c2,β}` over `(α, c2)`-extremal tuples of length `d`.
pub fn max_h_extremal_with(
    q: usize,
    d: usize,
    alpha: &Rational,
    c1: usize,
    c2: usize,
    beta: &Rational,
    opts: &EnumOptions,
) -> Result<MaxH, ConditionError> {
    check_colours(q, &[c1, c2])?;
    check_beta(beta)?;
    if d == 0 {
        return invalid("d must be positive");
    }
    if alpha <= &Rational::one() {
        return invalid("alpha must exceed 1");
    }
    let pats = ex_patterns(q, c2);
    let needed = tuple_count(pats.len(), d, opts.dedupe).unwrap_or(u128::MAX);
    if needed > opts.cap {
        return Err(ConditionError::Budget { needed, cap: opts.cap });
    }
    let table = factors(q, c2, beta, alpha, &pats);
    let mut best: Option<(Rational, Vec<usize>)> = None;
    let mut evaluated = 0u128;
    for idx in index_tuples(pats.len(), d, opts.dedupe) {
        evaluated += 1;
        let h = if c1 == c2 { Rational::one() } else { h_from_factors(q, c1, c2, beta, &table, &idx) };
        if best.as_ref().is_none_or(|(v, _)| &h > v) {
            best = Some((h, idx));
        }
    }
    let (value, idx) = best.expect("at least one tuple");
    let argmax = ExtremalTuple::new(q, alpha.clone(), c2, idx.iter().map(|&i| pats[i]).collect())?;
    Ok(MaxH { value, argmax, evaluated })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[derive(Default)]
pub struct ConditionOptions {
    /// Check every ordered colour pair instead of relying on symmetry.
    pub all_pairs: bool,
    pub enumeration: EnumOptions,
}


fn colour_pairs(q: usize, all: bool) -> Vec<(usize, usize)> {
    if all {
        (0..q).flat_map(|a| (0..q).filter(move |&b| b != a).map(move |b| (a, b))).collect()
    } else {
        vec![(0, q - 1)]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSummary {
    pub c1: usize,
    pub c2: usize,
    pub worst_tuple: Vec<u32>,
    /// `α − h^d` at the evaluation point (the right end of a range).
    #[serde(with = "serde_rational")]
    pub margin: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub q: usize,
    pub d: usize,
    #[serde(with = "serde_rational")]
    pub beta_star: Rational,
    pub range: UniRange,
    pub symmetric_reduction: bool,
    pub pairs: Vec<PairSummary>,
    pub verdict: String,
    pub worst_tuple: Vec<u32>,
    #[serde(with = "serde_rational")]
    pub margin: Rational,
    pub certificate_kind: String,
    pub tuples_checked: u128,
}

/// `α − v^d`, positive iff `v < α^{1/d}` when `v > 0`.
fn point_margin(alpha: &Rational, v: &Rational, d: usize) -> Rational {
    alpha - pow_int(v, d as u32)
}

fn holds_at(alpha: &Rational, v: &Rational, d: usize) -> bool {
    // v <= 0 lies below the positive root trivially.
    !v.is_positive() || point_margin(alpha, v, d).is_positive()
}

fn check_alpha_point(alpha: &Rational) -> Result<(), ConditionError> {
    if alpha <= &Rational::one() {
        return invalid("alpha must exceed 1");
    }
    Ok(())
}

pub fn check_condition_at(q: usize, d: usize, alpha: &Rational) -> Result<(bool, ConditionReport), ConditionError> {
    check_condition_at_with(q, d, alpha, &ConditionOptions::default())
}

/// Point check of the condition at `β_*(q, d)`.
pub fn check_condition_at_with(
    q: usize,
    d: usize,
    alpha: &Rational,
    opts: &ConditionOptions,
) -> Result<(bool, ConditionReport), ConditionError> {
    check_colours(q, &[])?;
    check_alpha_point(alpha)?;
    let beta = beta_star(q, d);
    let mut pairs = Vec::new();
    let mut ok = true;
    let mut checked = 0;
    for (c1, c2) in colour_pairs(q, opts.all_pairs) {
        let best = max_h_extremal_with(q, d, alpha, c1, c2, &beta, &opts.enumeration)?;
        checked += best.evaluated;
        ok &= holds_at(alpha, &best.value, d);
        pairs.push(PairSummary {
            c1,
            c2,
            worst_tuple: best.argmax.patterns,
            margin: point_margin(alpha, &best.value, d),
        });
    }
    let worst = pairs.iter().min_by(|a, b| a.margin.cmp(&b.margin)).expect("one pair").clone();
    let report = ConditionReport {
        q,
        d,
        beta_star: beta,
        range: UniRange::closed(alpha.clone(), alpha.clone()),
        symmetric_reduction: !opts.all_pairs,
        pairs,
        verdict: if ok { "holds" } else { "fails" }.into(),
        worst_tuple: worst.worst_tuple,
        margin: worst.margin,
        certificate_kind: "point".into(),
        tuples_checked: checked,
    };
    Ok((ok, report))
}

/// `h = P/Q` as polynomials in `α` for a fixed pattern multiset.
pub fn tuple_rational_function(
    q: usize,
    c1: usize,
    c2: usize,
    beta: &Rational,
    patterns: &[u32],
) -> (Poly, Poly) {
    let b = Rational::one() - beta;
    let mut den = Poly::one();
    let mut nums: Vec<Poly> = vec![Poly::one(); q];
    for &m in patterns {
        let k = m.count_ones() as i64;
        // β + kα + (q-1-k)
        let dm = Poly::linear(beta + int(q as i64 - 1 - k), int(k));
        // Subtract (1-β)(α-1) where the entry is α.
        let shifted = dm.sub(&Poly::linear(-b.clone(), b.clone()));
        for (c, n) in nums.iter_mut().enumerate() {
            if c == c2 {
                continue;
            }
            *n = n.mul(if m >> c & 1 == 1 { &shifted } else { &dm });
        }
        den = den.mul(&dm);
    }
    let mut qpoly = den.scale(beta);
    for (c, n) in nums.iter().enumerate() {
        if c != c2 {
            qpoly = qpoly.add(n);
        }
    }
    let p = qpoly.add(&den.sub(&nums[c1]).scale(&b));
    (p, qpoly)
}

/// Positive common multiple making both polynomials integral.
fn integral_pair(p: &Poly, q: &Poly) -> (Poly, Poly) {
    let l = p
        .coeffs()
        .iter()
        .chain(q.coeffs())
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let l = Rational::from_integer(l);
    (p.scale(&l), q.scale(&l))
}

/// `P^d − α Q^d`, reduced to a primitive integer polynomial.
pub fn margin_polynomial(p: &Poly, q: &Poly, d: usize) -> Poly {
    let (p, q) = integral_pair(p, q);
    p.pow(d as u32).sub(&q.pow(d as u32).mul(&Poly::x())).primitive()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginCertificate {
    /// `−Q < 0` on the closed range.
    pub denominator: UniCertificate,
    /// `P^d − αQ^d < 0` on the left-open range.
    pub margin: UniCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginWitness {
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub h: Rational,
    /// `h^d − α`; non-negative for a genuine violation.
    #[serde(with = "serde_rational")]
    pub excess: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarginUnknown {
    pub reason: String,
}

pub type MarginVerdict = Verdict<MarginCertificate, MarginWitness, MarginUnknown>;

/// Certifies `(P/Q)^d < α` on `(lo, hi]` through the cleared polynomial.
///
/// A negative `h` at a sign change of the margin is not a violation, so such
/// outcomes come back `Unknown` rather than `Fails`.
pub fn margin_verdict(
    p: &Poly,
    q: &Poly,
    d: usize,
    lo: &Rational,
    hi: &Rational,
) -> Result<MarginVerdict, ConditionError> {
    let den = prove_univariate(&q.neg().primitive(), &UniRange::closed(lo.clone(), hi.clone()), Strictness::Strict, &[])?;
    let denominator = match den {
        Verdict::Holds(c) => c,
        _ => {
            return Ok(Verdict::Unknown(MarginUnknown {
                reason: "denominator not certified positive".into(),
            }))
        }
    };
    let n = margin_polynomial(p, q, d);
    let v = prove_univariate(&n, &UniRange::left_open(lo.clone(), hi.clone()), Strictness::Strict, &[])?;
    Ok(match v {
        Verdict::Holds(margin) => Verdict::Holds(MarginCertificate { denominator, margin }),
        Verdict::Fails(w) => match w.point {
            Some(x) => {
                let h = p.eval(&x) / q.eval(&x);
                let excess = pow_int(&h, d as u32) - &x;
                if h.is_positive() && !excess.is_negative() {
                    Verdict::Fails(MarginWitness { alpha: x, h, excess })
                } else {
                    Verdict::Unknown(MarginUnknown {
                        reason: format!("margin sign change at alpha = {x} with h = {h}"),
                    })
                }
            }
            None => Verdict::Unknown(MarginUnknown {
                reason: format!("margin touches zero inside {:?}", w.enclosure.to_f64_pair()),
            }),
        },
        Verdict::Unknown(n) => match n {},
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TupleCertificate {
    pub c1: usize,
    pub c2: usize,
    pub patterns: Vec<u32>,
    pub certificate: MarginCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConditionCertificate {
    Point {
        #[serde(with = "serde_rational")]
        alpha: Rational,
    },
    Range { tuples: Vec<TupleCertificate> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionWitness {
    pub c1: usize,
    pub c2: usize,
    pub tuple: ExtremalTuple,
    #[serde(with = "serde_rational")]
    pub h: Rational,
    #[serde(with = "serde_rational")]
    pub excess: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionUnknown {
    pub reason: String,
    pub tuples_checked: u128,
}

pub type ConditionVerdict = Verdict<ConditionCertificate, ConditionWitness, ConditionUnknown>;

pub fn check_condition_over(
    q: usize,
    d: usize,
    lo: &Rational,
    hi: &Rational,
    budget: u128,
) -> Result<(ConditionVerdict, ConditionReport), ConditionError> {
    let opts = ConditionOptions {
        enumeration: EnumOptions { cap: budget, ..EnumOptions::default() },
        ..ConditionOptions::default()
    };
    check_condition_over_with(q, d, lo, hi, &opts)
}

fn method_kind(certs: &[TupleCertificate]) -> String {
    let mut kinds: Vec<&str> = certs.iter().map(|t| t.certificate.margin.method.name()).collect();
    kinds.sort_unstable();
    kinds.dedup();
    kinds.join("+")
}

/// Certified range check on `(lo, hi]` at `β_*(q, d)`. `opts.enumeration.cap`
/// bounds the number of tuples; beyond it the verdict is `Unknown`.
pub fn check_condition_over_with(
    q: usize,
    d: usize,
    lo: &Rational,
    hi: &Rational,
    opts: &ConditionOptions,
) -> Result<(ConditionVerdict, ConditionReport), ConditionError> {
    check_colours(q, &[])?;
    if d == 0 {
        return invalid("d must be positive");
    }
    if lo < &Rational::one() || lo > hi {
        return invalid("need 1 <= alphaLo <= alphaHi");
    }
    if lo == hi {
        let (ok, report) = check_condition_at_with(q, d, hi, opts)?;
        let verdict = if ok {
            Verdict::Holds(ConditionCertificate::Point { alpha: hi.clone() })
        } else {
            let worst = &report.pairs.iter().min_by(|a, b| a.margin.cmp(&b.margin)).expect("one pair");
            let tuple = ExtremalTuple::new(q, hi.clone(), worst.c2, worst.worst_tuple.clone())?;
            Verdict::Fails(ConditionWitness {
                c1: worst.c1,
                c2: worst.c2,
                tuple,
                h: Rational::zero(),
                excess: -worst.margin.clone(),
            })
        };
        let verdict = match verdict {
            Verdict::Fails(mut w) => {
                w.h = crate::model::h_eval(w.c1, w.c2, &report.beta_star, &w.tuple.vectors())?;
                Verdict::Fails(w)
            }
            v => v,
        };
        return Ok((verdict, report));
    }
    let beta = beta_star(q, d);
    let pairs = colour_pairs(q, opts.all_pairs);
    let mut jobs = Vec::new();
    for &(c1, c2) in &pairs {
        let pats = ex_patterns(q, c2);
        let count = tuple_count(pats.len(), d, opts.enumeration.dedupe).unwrap_or(u128::MAX);
        let total = (jobs.len() as u128).saturating_add(count);
        if total > opts.enumeration.cap {
            let report = range_report(q, d, &beta, lo, hi, opts, Vec::new(), "unknown", String::new(), 0);
            return Ok((
                Verdict::Unknown(ConditionUnknown {
                    reason: format!("{total} tuples exceed the budget {}", opts.enumeration.cap),
                    tuples_checked: 0,
                }),
                report,
            ));
        }
        for idx in index_tuples(pats.len(), d, opts.enumeration.dedupe) {
            jobs.push((c1, c2, idx.iter().map(|&i| pats[i]).collect::<Vec<u32>>()));
        }
    }
    let results: Vec<Result<(MarginVerdict, Rational), ConditionError>> = jobs
        .par_iter()
        .map(|(c1, c2, pats)| {
            let (p, qq) = tuple_rational_function(q, *c1, *c2, &beta, pats);
            let v = margin_verdict(&p, &qq, d, lo, hi)?;
            let h_hi = p.eval(hi) / qq.eval(hi);
            Ok((v, h_hi))
        })
        .collect();
    let mut summaries: Vec<PairSummary> = Vec::new();
    let mut certs = Vec::new();
    let mut failure = None;
    let mut unknown = None;
    for ((c1, c2, pats), r) in jobs.iter().zip(results) {
        let (v, h_hi) = r?;
        let margin = point_margin(hi, &h_hi, d);
        match summaries.iter_mut().find(|s| s.c1 == *c1 && s.c2 == *c2) {
            Some(s) if margin < s.margin => {
                s.margin = margin;
                s.worst_tuple = pats.clone();
            }
            Some(_) => {}
            None => summaries.push(PairSummary { c1: *c1, c2: *c2, worst_tuple: pats.clone(), margin }),
        }
        match v {
            Verdict::Holds(certificate) => certs.push(TupleCertificate {
                c1: *c1,
                c2: *c2,
                patterns: pats.clone(),
                certificate,
            }),
            Verdict::Fails(w) if failure.is_none() => {
                failure = Some(ConditionWitness {
                    c1: *c1,
                    c2: *c2,
                    tuple: ExtremalTuple::new(q, w.alpha, *c2, pats.clone())?,
                    h: w.h,
                    excess: w.excess,
                })
            }
            Verdict::Unknown(u) if unknown.is_none() => unknown = Some(u.reason),
            _ => {}
        }
    }
    let n = jobs.len() as u128;
    let (verdict, label) = if let Some(w) = failure {
        (Verdict::Fails(w), "fails")
    } else if let Some(reason) = unknown {
        (Verdict::Unknown(ConditionUnknown { reason, tuples_checked: n }), "unknown")
    } else {
        (Verdict::Holds(ConditionCertificate::Range { tuples: Vec::new() }), "holds")
    };
    let kind = method_kind(&certs);
    let verdict = match verdict {
        Verdict::Holds(_) => Verdict::Holds(ConditionCertificate::Range { tuples: certs }),
        v => v,
    };
    let report = range_report(q, d, &beta, lo, hi, opts, summaries, label, kind, n);
    Ok((verdict, report))
}

#[allow(clippy::too_many_arguments)]
fn range_report(
    q: usize,
    d: usize,
    beta: &Rational,
    lo: &Rational,
    hi: &Rational,
    opts: &ConditionOptions,
    pairs: Vec<PairSummary>,
    verdict: &str,
    kind: String,
    checked: u128,
) -> ConditionReport {
    let worst = pairs.iter().min_by(|a, b| a.margin.cmp(&b.margin)).cloned();
    ConditionReport {
        q,
        d,
        beta_star: beta.clone(),
        range: UniRange::left_open(lo.clone(), hi.clone()),
        symmetric_reduction: !opts.all_pairs,
        worst_tuple: worst.as_ref().map(|w| w.worst_tuple.clone()).unwrap_or_default(),
        margin: worst.map(|w| w.margin).unwrap_or_else(Rational::zero),
        pairs,
        verdict: verdict.into(),
        certificate_kind: kind,
        tuples_checked: checked,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionFailure {
    pub q: usize,
    pub d: usize,
    /// Largest probed `α` at which the condition held.
    #[serde(with = "serde_rational")]
    pub holds_at: Rational,
    /// Violating `α`, within `tolerance` of `holds_at`.
    #[serde(with = "serde_rational")]
    pub fails_at: Rational,
    pub tuple: ExtremalTuple,
    #[serde(with = "serde_rational")]
    pub h: Rational,
    /// `h^d − α`, strictly positive.
    #[serde(with = "serde_rational")]
    pub excess: Rational,
}

/// Scans `α = start·2^k` up to `max` for a violation, then bisects the first
/// bracket down to width `tol`. The bracket locates a sign change of the
/// worst margin, not necessarily the smallest violating `α`.
pub fn locate_condition_failure(
    q: usize,
    d: usize,
    start: &Rational,
    max: &Rational,
    tol: &Rational,
) -> Result<Option<ConditionFailure>, ConditionError> {
    let at = |a: &Rational| check_condition_at(q, d, a);
    let (ok, _) = at(start)?;
    if !ok {
        return invalid("condition already fails at the start of the scan");
    }
    let mut good = start.clone();
    let mut bad = None;
    while &good < max {
        let next = (&good * int(2)).min(max.clone());
        if !at(&next)?.0 {
            bad = Some(next);
            break;
        }
        good = next;
    }
    let Some(mut bad) = bad else { return Ok(None) };
    while &bad - &good > *tol {
        let mid = (&good + &bad) / int(2);
        if at(&mid)?.0 {
            good = mid;
        } else {
            bad = mid;
        }
    }
    let beta = beta_star(q, d);
    let best = max_h_extremal(q, d, &bad, 0, q - 1, &beta)?;
    let excess = pow_int(&best.value, d as u32) - &bad;
    Ok(Some(ConditionFailure {
        q,
        d,
        holds_at: good,
        fails_at: bad,
        tuple: best.argmax,
        h: best.value,
        excess,
    }))
}
