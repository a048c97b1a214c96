//! Interval branch-and-prune over axis-aligned boxes.
//!
//! Boxes are explored depth-first, left half before right half, so a run
//! with a larger budget only extends a run with a smaller one. Every step is
//! recorded in preorder; replaying the steps re-splits the domain and
//! re-evaluates every leaf, trusting nothing stored in the certificate except
//! the split points.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::expr::{EvalOptions, ExprDag};
use super::{ResolverError, Verdict};
use crate::numeric::{serde_rational, Interval, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// `expr < 0`
    Lt,
    /// `expr <= 0`
    Le,
}

impl Relation {
    fn certified(&self, enc: &Interval) -> bool {
        match self {
            Relation::Lt => enc.hi().is_negative(),
            Relation::Le => !enc.hi().is_positive(),
        }
    }

    fn violated(&self, enc: &Interval) -> bool {
        match self {
            Relation::Lt => !enc.lo().is_negative(),
            Relation::Le => enc.lo().is_positive(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    /// Maximum number of boxes processed.
    pub budget: usize,
    /// Boxes whose every side is narrower than this (relative to the domain)
    /// are not split further.
    pub min_relative_width: Rational,
    pub eval: EvalOptions,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 1_000_000,
            min_relative_width: Rational::new(1.into(), num_traits::pow(num_bigint::BigInt::from(2), 60)),
            eval: EvalOptions::default(),
        }
    }
}

impl SearchConfig {
    pub fn with_budget(budget: usize) -> Self {
        SearchConfig {
            budget,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum CertStep {
    Split {
        var: usize,
        #[serde(with = "serde_rational")]
        at: Rational,
    },
    /// The relation holds on this box; `bound` is the upper enclosure found.
    Leaf {
        #[serde(with = "serde_rational")]
        bound: Rational,
    },
    /// Expression `expr` has constant sign `sign` on this box.
    Excluded { expr: usize, sign: i8 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxCertificate {
    pub expr: String,
    pub vars: Vec<String>,
    pub domain: Vec<Interval>,
    pub relation: Relation,
    pub steps: Vec<CertStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExclusionCertificate {
    pub exprs: Vec<String>,
    pub vars: Vec<String>,
    pub domain: Vec<Interval>,
    pub steps: Vec<CertStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxWitness {
    #[serde(with = "serde_rational::vec")]
    pub point: Vec<Rational>,
    /// Enclosure of the expression value at `point`.
    pub value: Interval,
}

/// Approximate common zero: every expression is within the reported
/// enclosures at `point`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroWitness {
    #[serde(with = "serde_rational::vec")]
    pub point: Vec<Rational>,
    pub values: Vec<Interval>,
    pub cell: Vec<Interval>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub boxes: usize,
    pub max_depth: usize,
    pub guard_failures: usize,
    /// The box that could not be resolved, if the search stopped on one.
    pub unresolved: Option<Vec<Interval>>,
    pub reason: String,
}

pub type BoxVerdict = Verdict<BoxCertificate, BoxWitness, SearchStats>;
pub type ExclusionVerdict = Verdict<ExclusionCertificate, ZeroWitness, SearchStats>;

fn split_var(b: &[Interval], domain_widths: &[Rational]) -> Option<(usize, Rational)> {
    let mut best: Option<(usize, Rational)> = None;
    for (i, (iv, w0)) in b.iter().zip(domain_widths).enumerate() {
        if w0.is_zero() {
            continue;
        }
        let rel = iv.width() / w0;
        if best.as_ref().is_none_or(|(_, r)| rel > *r) {
            best = Some((i, rel));
        }
    }
    best
}

fn halves(b: &[Interval], var: usize, at: &Rational) -> (Vec<Interval>, Vec<Interval>) {
    let mut l = b.to_vec();
    let mut r = b.to_vec();
    l[var] = Interval::new(b[var].lo().clone(), at.clone()).expect("split inside");
    r[var] = Interval::new(at.clone(), b[var].hi().clone()).expect("split inside");
    (l, r)
}

fn check_domain(expr_vars: usize, domain: &[Interval]) -> Result<Vec<Rational>, ResolverError> {
    if domain.len() != expr_vars {
        return Err(ResolverError::Invalid(format!(
            "box has {} sides, expression has {} variables",
            domain.len(),
            expr_vars
        )));
    }
    Ok(domain.iter().map(|i| i.width()).collect())
}

/// Proves `expr < 0` (or `<= 0`) on every point of `domain`.
pub fn prove_on_box(
    expr: &ExprDag,
    domain: &[Interval],
    relation: Relation,
    cfg: &SearchConfig,
) -> Result<BoxVerdict, ResolverError> {
    let widths = check_domain(expr.var_count(), domain)?;
    let mut stats = SearchStats::default();
    let mut steps = Vec::new();
    let mut stack = vec![(domain.to_vec(), 0usize)];
    while let Some((b, depth)) = stack.pop() {
        stats.boxes += 1;
        stats.max_depth = stats.max_depth.max(depth);
        if stats.boxes > cfg.budget {
            stats.reason = "budget exhausted".into();
            stats.unresolved = Some(b);
            return Ok(Verdict::Unknown(stats));
        }
        match expr.eval_interval(&b, &cfg.eval) {
            Ok(enc) if relation.certified(&enc) => {
                steps.push(CertStep::Leaf {
                    bound: enc.hi().clone(),
                });
                continue;
            }
            Ok(_) => {}
            Err(_) => stats.guard_failures += 1,
        }
        let mid: Vec<Rational> = b.iter().map(|i| i.mid()).collect();
        if let Ok(v) = expr.eval_point(&mid) {
            if relation.violated(&v) {
                return Ok(Verdict::Fails(BoxWitness { point: mid, value: v }));
            }
        }
        let Some((var, rel)) = split_var(&b, &widths) else {
            stats.reason = "degenerate box not decided".into();
            stats.unresolved = Some(b);
            return Ok(Verdict::Unknown(stats));
        };
        if rel < cfg.min_relative_width {
            stats.reason = "minimum width reached".into();
            stats.unresolved = Some(b);
            return Ok(Verdict::Unknown(stats));
        }
        let at = b[var].mid();
        let (l, r) = halves(&b, var, &at);
        steps.push(CertStep::Split { var, at });
        stack.push((r, depth + 1));
        stack.push((l, depth + 1));
    }
    Ok(Verdict::Holds(BoxCertificate {
        expr: expr.to_prefix(),
        vars: expr.vars().to_vec(),
        domain: domain.to_vec(),
        relation,
        steps,
    }))
}

fn excluding(exprs: &[ExprDag], b: &[Interval], opts: &EvalOptions) -> (Option<(usize, i8)>, Vec<Option<Interval>>) {
    let mut encs = Vec::with_capacity(exprs.len());
    for (i, e) in exprs.iter().enumerate() {
        match e.eval_interval(b, opts) {
            Ok(enc) if enc.is_positive() => return (Some((i, 1)), encs),
            Ok(enc) if enc.is_negative() => return (Some((i, -1)), encs),
            Ok(enc) => encs.push(Some(enc)),
            Err(_) => encs.push(None),
        }
    }
    (None, encs)
}

/// Proves that the expressions have no common zero in `domain`.
///
/// When a cell narrower than `cfg.min_relative_width` still admits a common
/// zero and every expression is within `witness_tol` of zero at its centre,
/// the centre is returned as an approximate common zero.
pub fn exclude_common_zero(
    exprs: &[ExprDag],
    domain: &[Interval],
    cfg: &SearchConfig,
    witness_tol: &Rational,
) -> Result<ExclusionVerdict, ResolverError> {
    let first = exprs
        .first()
        .ok_or_else(|| ResolverError::Invalid("no expressions".into()))?;
    if exprs.iter().any(|e| e.vars() != first.vars()) {
        return Err(ResolverError::Invalid("expressions use different variables".into()));
    }
    let widths = check_domain(first.var_count(), domain)?;
    let mut stats = SearchStats::default();
    let mut steps = Vec::new();
    let mut stack = vec![(domain.to_vec(), 0usize)];
    while let Some((b, depth)) = stack.pop() {
        stats.boxes += 1;
        stats.max_depth = stats.max_depth.max(depth);
        if stats.boxes > cfg.budget {
            stats.reason = "budget exhausted".into();
            stats.unresolved = Some(b);
            return Ok(Verdict::Unknown(stats));
        }
        let (hit, encs) = excluding(exprs, &b, &cfg.eval);
        if let Some((expr, sign)) = hit {
            steps.push(CertStep::Excluded { expr, sign });
            continue;
        }
        if encs.iter().any(|e| e.is_none()) {
            stats.guard_failures += 1;
        }
        let split = split_var(&b, &widths);
        let narrow = split
            .as_ref()
            .is_none_or(|(_, rel)| rel < &cfg.min_relative_width);
        if narrow {
            let mid: Vec<Rational> = b.iter().map(|i| i.mid()).collect();
            let values: Result<Vec<Interval>, _> = exprs.iter().map(|e| e.eval_point(&mid)).collect();
            if let Ok(values) = values {
                let small = values
                    .iter()
                    .all(|v| v.lo() >= &-witness_tol.clone() && v.hi() <= witness_tol);
                if small {
                    return Ok(Verdict::Fails(ZeroWitness {
                        point: mid,
                        values,
                        cell: b,
                    }));
                }
            }
            stats.reason = "minimum width reached".into();
            stats.unresolved = Some(b);
            return Ok(Verdict::Unknown(stats));
        }
        let (var, _) = split.expect("checked above");
        let at = b[var].mid();
        let (l, r) = halves(&b, var, &at);
        steps.push(CertStep::Split { var, at });
        stack.push((r, depth + 1));
        stack.push((l, depth + 1));
    }
    Ok(Verdict::Holds(ExclusionCertificate {
        exprs: exprs.iter().map(|e| e.to_prefix()).collect(),
        vars: first.vars().to_vec(),
        domain: domain.to_vec(),
        steps,
    }))
}

/// Walks `steps` over `domain`, calling `leaf` on every leaf box.
fn replay_steps(
    domain: &[Interval],
    steps: &[CertStep],
    mut leaf: impl FnMut(&CertStep, &[Interval]) -> bool,
) -> bool {
    let mut stack = vec![domain.to_vec()];
    for step in steps {
        let Some(b) = stack.pop() else {
            return false;
        };
        match step {
            CertStep::Split { var, at } => {
                if *var >= b.len() || at <= b[*var].lo() || at >= b[*var].hi() {
                    return false;
                }
                let (l, r) = halves(&b, *var, at);
                stack.push(r);
                stack.push(l);
            }
            other => {
                if !leaf(other, &b) {
                    return false;
                }
            }
        }
    }
    stack.is_empty()
}

/// Re-checks a box certificate. `opts` may differ from the options used to
/// produce it (e.g. a coarser denominator bound).
pub fn replay_certificate(cert: &BoxCertificate, opts: &EvalOptions) -> Result<bool, ResolverError> {
    let names: Vec<&str> = cert.vars.iter().map(|s| s.as_str()).collect();
    let expr = ExprDag::parse(&cert.expr, &names)?;
    check_domain(expr.var_count(), &cert.domain)?;
    Ok(replay_steps(&cert.domain, &cert.steps, |step, b| match step {
        CertStep::Leaf { .. } => expr
            .eval_interval(b, opts)
            .is_ok_and(|enc| cert.relation.certified(&enc)),
        _ => false,
    }))
}

pub fn replay_exclusion(cert: &ExclusionCertificate, opts: &EvalOptions) -> Result<bool, ResolverError> {
    let names: Vec<&str> = cert.vars.iter().map(|s| s.as_str()).collect();
    let exprs: Vec<ExprDag> = cert
        .exprs
        .iter()
        .map(|t| ExprDag::parse(t, &names))
        .collect::<Result<_, _>>()?;
    check_domain(names.len(), &cert.domain)?;
    Ok(replay_steps(&cert.domain, &cert.steps, |step, b| match step {
        CertStep::Excluded { expr, sign } => exprs.get(*expr).is_some_and(|e| {
            e.eval_interval(b, opts).is_ok_and(|enc| match sign {
                1 => enc.is_positive(),
                -1 => enc.is_negative(),
                _ => false,
            })
        }),
        _ => false,
    }))
}

/// Box `[lo, hi]^n` helper for tests and callers.
pub fn cube(n: usize, lo: Rational, hi: Rational) -> Vec<Interval> {
    vec![Interval::new(lo, hi).expect("ordered bounds"); n]
}

/// Shrinks an open side `(a, b)` to `[a + eps, b - eps]` (sides flagged open only).
pub fn shrink_open(iv: &Interval, lo_open: bool, hi_open: bool, eps: &Rational) -> Interval {
    let lo = if lo_open { iv.lo() + eps } else { iv.lo().clone() };
    let hi = if hi_open { iv.hi() - eps } else { iv.hi().clone() };
    Interval::new(lo, hi).expect("epsilon smaller than half the side")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};

    #[test]
    fn easy_box_depth_zero() {
        let e = ExprDag::parse("(- (+ x y) 3)", &["x", "y"]).unwrap();
        let v = prove_on_box(&e, &cube(2, int(0), int(1)), Relation::Lt, &SearchConfig::default()).unwrap();
        let c = v.certificate().unwrap();
        assert_eq!(c.steps.len(), 1);
        assert!(replay_certificate(c, &EvalOptions::default()).unwrap());
        let mut wide = c.clone();
        wide.domain = cube(2, int(0), int(5));
        assert!(!replay_certificate(&wide, &EvalOptions::default()).unwrap());
    }

    #[test]
    fn needs_splitting_and_replays_coarsely() {
        // x^2 - x - 1/5 < 0 on [0.1, 0.9]: dependency forces subdivision.
        let e = ExprDag::parse("(- (- (* x x) x) 1/5)", &["x"]).unwrap();
        let dom = vec![Interval::new(rat(1, 10), rat(9, 10)).unwrap()];
        let v = prove_on_box(&e, &dom, Relation::Lt, &SearchConfig::default()).unwrap();
        let c = v.certificate().unwrap();
        assert!(c.steps.len() > 1);
        let coarse = EvalOptions {
            denominator_bound: Some(1_000_000u64.into()),
            ..EvalOptions::default()
        };
        assert!(replay_certificate(c, &coarse).unwrap());
    }

    #[test]
    fn violation_gives_exact_witness() {
        let e = ExprDag::parse("(- x 1)", &["x"]).unwrap();
        let dom = vec![Interval::new(int(0), int(2)).unwrap()];
        let v = prove_on_box(&e, &dom, Relation::Lt, &SearchConfig::default()).unwrap();
        let w = v.witness().unwrap();
        assert!(w.point[0] >= int(1));
    }

    #[test]
    fn budget_gives_unknown() {
        let e = ExprDag::parse("(- (- (* x x) x) 1/5)", &["x"]).unwrap();
        let dom = vec![Interval::new(rat(1, 10), rat(9, 10)).unwrap()];
        let v = prove_on_box(&e, &dom, Relation::Lt, &SearchConfig::with_budget(1)).unwrap();
        assert!(v.is_unknown());
    }

    #[test]
    fn exclusion_finds_and_excludes() {
        let f = ExprDag::parse("(- x y)", &["x", "y"]).unwrap();
        let g = ExprDag::parse("(- (+ x y) 1)", &["x", "y"]).unwrap();
        let tol = rat(1, 1_000_000);
        let cfg = SearchConfig {
            min_relative_width: rat(1, 1 << 30),
            ..SearchConfig::default()
        };
        let v = exclude_common_zero(&[f.clone(), g.clone()], &cube(2, int(0), rat(2, 5)), &cfg, &tol).unwrap();
        let c = v.certificate().unwrap();
        assert!(replay_exclusion(c, &EvalOptions::default()).unwrap());
        let v = exclude_common_zero(&[f, g], &cube(2, int(0), int(1)), &cfg, &tol).unwrap();
        let w = v.witness().unwrap();
        assert!((&w.point[0] - rat(1, 2)).abs() < tol);
    }
}
