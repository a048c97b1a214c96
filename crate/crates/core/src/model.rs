//! Antiferromagnetic Potts model on the complete `d`-ary tree of height `n`.
//!
//! Vertices are numbered breadth-first: the root is `0` and the children of
//! `v` are `d*v + 1 ..= d*v + d`. Leaves are therefore listed left to right,
//! which is also the order of a [`BoundaryConfig`].

use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{format_rational, int, serde_rational, Rational};

pub type ProbVec = Vec<Rational>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("enumeration needs {needed} configurations, budget is {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("boundary has zero Gibbs measure (frozen boundary)")]
    ZeroMeasure,
    #[error("quantity undefined: {0}")]
    Undefined(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub q: usize,
    pub d: usize,
    #[serde(with = "serde_rational")]
    pub beta: Rational,
    pub n: usize,
}

impl ModelParams {
    pub fn new(q: usize, d: usize, beta: Rational, n: usize) -> Result<Self, ModelError> {
        if q < 3 {
            return Err(ModelError::InvalidParams(format!("q = {q} < 3")));
        }
        if q > 255 {
            return Err(ModelError::InvalidParams(format!("q = {q} too large")));
        }
        if d < 2 {
            return Err(ModelError::InvalidParams(format!("d = {d} < 2")));
        }
        if beta.is_negative() || beta > Rational::one() {
            return Err(ModelError::InvalidParams(format!(
                "beta = {} outside [0, 1]",
                format_rational(&beta)
            )));
        }
        Ok(ModelParams { q, d, beta, n })
    }

    pub fn leaf_count(&self) -> usize {
        self.d.pow(self.n as u32)
    }

    pub fn internal_count(&self) -> usize {
        (self.leaf_count() - 1) / (self.d - 1)
    }

    pub fn boundary_count(&self) -> u128 {
        (self.q as u128).saturating_pow(self.leaf_count() as u32)
    }
}

/// Leaf colours in left-to-right order, each in `0..q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoundaryConfig {
    pub colours: Vec<u8>,
}

impl BoundaryConfig {
    pub fn new(colours: Vec<u8>) -> Self {
        BoundaryConfig { colours }
    }

    /// Decodes `index` in base `q`, most significant digit = first leaf.
    pub fn from_index(q: usize, leaves: usize, mut index: u128) -> Self {
        let mut colours = vec![0u8; leaves];
        for slot in colours.iter_mut().rev() {
            *slot = (index % q as u128) as u8;
            index /= q as u128;
        }
        BoundaryConfig { colours }
    }

    pub fn validate(&self, params: &ModelParams) -> Result<(), ModelError> {
        if self.colours.len() != params.leaf_count() {
            return Err(ModelError::InvalidParams(format!(
                "boundary has {} leaves, tree has {}",
                self.colours.len(),
                params.leaf_count()
            )));
        }
        if let Some(c) = self.colours.iter().find(|&&c| c as usize >= params.q) {
            return Err(ModelError::InvalidParams(format!("colour {c} >= q")));
        }
        Ok(())
    }
}

/// Unnormalised root weights: `weights[c] = sum over colourings with root c`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GibbsWeights {
    pub weights: Vec<Rational>,
}

impl GibbsWeights {
    pub fn normalise(&self) -> Result<ProbVec, ModelError> {
        let total: Rational = self.weights.iter().sum();
        if total.is_zero() {
            return Err(ModelError::ZeroMeasure);
        }
        Ok(self.weights.iter().map(|w| w / &total).collect())
    }
}

pub fn indicator(q: usize, c: usize) -> ProbVec {
    (0..q)
        .map(|i| if i == c { Rational::one() } else { Rational::zero() })
        .collect()
}

pub fn uniform(q: usize) -> ProbVec {
    (0..q).map(|_| Rational::new(1.into(), (q as i64).into())).collect()
}

/// Default configuration budget for exhaustive Gibbs sums.
pub const DEFAULT_BRUTE_BUDGET: u128 = 100_000_000;

/// Root marginal by summing the Gibbs weight of every colouring of the
/// internal vertices (leaves fixed by `boundary`).
pub fn brute_force_weights(
    params: &ModelParams,
    boundary: &BoundaryConfig,
    budget: u128,
) -> Result<GibbsWeights, ModelError> {
    boundary.validate(params)?;
    let q = params.q;
    let d = params.d;
    let internal = params.internal_count();
    let needed = (q as u128).saturating_pow(internal as u32);
    if needed > budget {
        return Err(ModelError::Budget { needed, budget });
    }
    if params.n == 0 {
        let c = boundary.colours[0] as usize;
        return Ok(GibbsWeights {
            weights: indicator(q, c),
        });
    }
    let edges = internal * d;
    // leaf_match[v * q + c]: leaf children of v coloured c.
    let mut leaf_match = vec![0usize; internal * q];
    for v in 0..internal {
        for j in 1..=d {
            let child = d * v + j;
            if child >= internal {
                let colour = boundary.colours[child - internal] as usize;
                leaf_match[v * q + colour] += 1;
            }
        }
    }
    let mut hist = vec![vec![0u64; edges + 1]; q];
    let mut colours = vec![0usize; internal];
    for root in 0..q {
        colours[0] = root;
        let m0 = leaf_match[root];
        enumerate(
            1,
            m0,
            internal,
            d,
            q,
            &leaf_match,
            &mut colours,
            &mut hist[root],
        );
    }
    let beta = &params.beta;
    let mut powers = Vec::with_capacity(edges + 1);
    let mut p = Rational::one();
    for _ in 0..=edges {
        powers.push(p.clone());
        p *= beta;
    }
    let weights = hist
        .iter()
        .map(|h| {
            h.iter()
                .zip(&powers)
                .filter(|(count, _)| **count > 0)
                .map(|(count, bp)| bp * int(*count as i64))
                .sum()
        })
        .collect();
    Ok(GibbsWeights { weights })
}

#[allow(clippy::too_many_arguments)]
fn enumerate(
    v: usize,
    m: usize,
    internal: usize,
    d: usize,
    q: usize,
    leaf_match: &[usize],
    colours: &mut [usize],
    hist: &mut [u64],
) {
    if v == internal {
        hist[m] += 1;
        return;
    }
    let parent_colour = colours[(v - 1) / d];
    for c in 0..q {
        colours[v] = c;
        let extra = usize::from(c == parent_colour) + leaf_match[v * q + c];
        enumerate(v + 1, m + extra, internal, d, q, leaf_match, colours, hist);
    }
}

pub fn brute_force_root_marginal(
    params: &ModelParams,
    boundary: &BoundaryConfig,
    budget: u128,
) -> Result<ProbVec, ModelError> {
    brute_force_weights(params, boundary, budget)?.normalise()
}

/// Root marginal of a vertex whose children have the given subtree marginals.
pub fn one_step_marginal(children: &[ProbVec], beta: &Rational) -> Result<ProbVec, ModelError> {
    let q = children
        .first()
        .map(|c| c.len())
        .ok_or_else(|| ModelError::InvalidParams("no children".into()))?;
    let b = Rational::one() - beta;
    let weights: Vec<Rational> = (0..q)
        .map(|c| {
            children
                .iter()
                .map(|child| Rational::one() - &b * &child[c])
                .product()
        })
        .collect();
    GibbsWeights { weights }.normalise()
}

/// Marginals of every subtree, indexed by breadth-first vertex number.
pub fn subtree_marginals(
    params: &ModelParams,
    boundary: &BoundaryConfig,
) -> Result<Vec<ProbVec>, ModelError> {
    boundary.validate(params)?;
    let internal = params.internal_count();
    let total = internal + params.leaf_count();
    let mut marg: Vec<ProbVec> = vec![Vec::new(); total];
    for (i, &c) in boundary.colours.iter().enumerate() {
        marg[internal + i] = indicator(params.q, c as usize);
    }
    for v in (0..internal).rev() {
        let kids = &marg[params.d * v + 1..=params.d * v + params.d];
        marg[v] = one_step_marginal(kids, &params.beta)?;
    }
    Ok(marg)
}

pub fn recursion_root_marginal(
    params: &ModelParams,
    boundary: &BoundaryConfig,
) -> Result<ProbVec, ModelError> {
    Ok(subtree_marginals(params, boundary)?.swap_remove(0))
}

/// `g_{c1,c2}` of a tuple of (possibly unnormalised) vectors.
pub fn g_eval(
    c1: usize,
    c2: usize,
    beta: &Rational,
    tuple: &[ProbVec],
) -> Result<Rational, ModelError> {
    let b = Rational::one() - beta;
    let mut g = Rational::one();
    for p in tuple {
        let rest: Rational = p
            .iter()
            .enumerate()
            .filter(|(c, _)| *c != c2)
            .map(|(_, x)| x)
            .sum();
        let den = beta * &p[c2] + rest;
        if den.is_zero() {
            return Err(ModelError::Undefined("g denominator vanishes".into()));
        }
        g *= Rational::one() - &b * (&p[c1] - &p[c2]) / den;
    }
    Ok(g)
}

/// Two-level ratio function `h_{c1,c2}`.
pub fn h_eval(
    c1: usize,
    c2: usize,
    beta: &Rational,
    tuple: &[ProbVec],
) -> Result<Rational, ModelError> {
    let q = tuple
        .first()
        .map(|p| p.len())
        .ok_or_else(|| ModelError::InvalidParams("empty tuple".into()))?;
    let mut sum = Rational::zero();
    let mut g1 = Rational::one();
    for c in (0..q).filter(|&c| c != c2) {
        let g = g_eval(c, c2, beta, tuple)?;
        if c == c1 {
            g1 = g.clone();
        }
        sum += g;
    }
    let den = beta + sum;
    if den.is_zero() {
        return Err(ModelError::Undefined("h denominator vanishes".into()));
    }
    Ok(Rational::one() + (Rational::one() - beta) * (Rational::one() - g1) / den)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GammaResult {
    #[serde(with = "serde_rational")]
    pub value: Rational,
    pub witness: BoundaryConfig,
    pub c1: usize,
    pub c2: usize,
    /// Distinct subtree marginals at the last level.
    pub distinct_marginals: usize,
}

fn max_ratio(p: &ProbVec) -> Option<(Rational, usize, usize)> {
    let (mut best, mut i1, mut i2) = (None::<Rational>, 0, 0);
    for (a, pa) in p.iter().enumerate() {
        for (b, pb) in p.iter().enumerate() {
            if a == b || pb.is_zero() {
                continue;
            }
            let r = pa / pb;
            if best.as_ref().is_none_or(|x| r > *x) {
                best = Some(r);
                i1 = a;
                i2 = b;
            }
        }
    }
    best.map(|b| (b, i1, i2))
}

fn multisets(len: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, len: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..len {
            cur.push(i);
            rec(i, len, k, cur, out);
            cur.pop();
        }
    }
    rec(0, len, k, &mut cur, &mut out);
    out
}

/// Largest ratio of root marginals over all boundaries and colour pairs.
///
/// Children of a vertex commute in the recursion, so the set of subtree
/// marginals at height `k+1` is generated by multisets of `d` marginals at
/// height `k`; identical vectors are merged, keeping one boundary that
/// realises each.
pub fn gamma_exact(params: &ModelParams, budget: u128) -> Result<GammaResult, ModelError> {
    if params.beta.is_zero() {
        return Err(ModelError::Undefined(
            "gamma is infinite at beta = 0 (frozen colourings)".into(),
        ));
    }
    if params.n == 0 {
        return Err(ModelError::Undefined(
            "gamma needs n >= 1 (leaf marginals are indicators)".into(),
        ));
    }
    let q = params.q;
    let mut level: Vec<(ProbVec, Vec<u8>)> = (0..q).map(|c| (indicator(q, c), vec![c as u8])).collect();
    for _ in 0..params.n {
        let combos = multisets(level.len(), params.d);
        if combos.len() as u128 > budget {
            return Err(ModelError::Budget {
                needed: combos.len() as u128,
                budget,
            });
        }
        let produced: Vec<(ProbVec, Vec<u8>)> = combos
            .par_iter()
            .map(|combo| {
                let kids: Vec<ProbVec> = combo.iter().map(|&i| level[i].0.clone()).collect();
                let leaves = combo.iter().flat_map(|&i| level[i].1.iter().copied()).collect();
                one_step_marginal(&kids, &params.beta).map(|m| (m, leaves))
            })
            .collect::<Result<_, _>>()?;
        let mut seen: HashMap<ProbVec, usize> = HashMap::new();
        let mut next = Vec::new();
        for (m, leaves) in produced {
            if !seen.contains_key(&m) {
                seen.insert(m.clone(), next.len());
                next.push((m, leaves));
            }
        }
        level = next;
    }
    let mut best: Option<GammaResult> = None;
    for (m, leaves) in &level {
        if let Some((r, c1, c2)) = max_ratio(m) {
            if best.as_ref().is_none_or(|b| r > b.value) {
                best = Some(GammaResult {
                    value: r,
                    witness: BoundaryConfig::new(leaves.clone()),
                    c1,
                    c2,
                    distinct_marginals: level.len(),
                });
            }
        }
    }
    best.ok_or_else(|| ModelError::Undefined("no finite ratio".into()))
}

/// Same quantity as [`gamma_exact`] by running the recursion on every
/// boundary whose first leaf has colour 0 (the others follow by relabelling).
pub fn gamma_by_enumeration(params: &ModelParams, budget: u128) -> Result<GammaResult, ModelError> {
    if params.beta.is_zero() {
        return Err(ModelError::Undefined("gamma is infinite at beta = 0".into()));
    }
    let leaves = params.leaf_count();
    let total = params.boundary_count() / params.q as u128;
    if total > budget {
        return Err(ModelError::Budget {
            needed: total,
            budget,
        });
    }
    let mut best: Option<GammaResult> = None;
    for idx in 0..total {
        let tau = BoundaryConfig::from_index(params.q, leaves, idx);
        let m = recursion_root_marginal(params, &tau)?;
        if let Some((r, c1, c2)) = max_ratio(&m) {
            if best.as_ref().is_none_or(|b| r > b.value) {
                best = Some(GammaResult {
                    value: r,
                    witness: tau,
                    c1,
                    c2,
                    distinct_marginals: 0,
                });
            }
        }
    }
    best.ok_or_else(|| ModelError::Undefined("no finite ratio".into()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoStepCheck {
    #[serde(with = "serde_rational")]
    pub lhs: Rational,
    #[serde(with = "serde_rational")]
    pub rhs: Rational,
    pub equal: bool,
}

/// Compares the root ratio `p[c1]/p[c2]` with the product over root children
/// of `h` evaluated at that child's children marginals.
pub fn two_step_identity_check(
    params: &ModelParams,
    boundary: &BoundaryConfig,
    c1: usize,
    c2: usize,
) -> Result<TwoStepCheck, ModelError> {
    if params.n < 2 {
        return Err(ModelError::InvalidParams("two-step identity needs n >= 2".into()));
    }
    if c1 >= params.q || c2 >= params.q {
        return Err(ModelError::InvalidParams("colour out of range".into()));
    }
    let marg = subtree_marginals(params, boundary)?;
    if marg[0][c2].is_zero() {
        return Err(ModelError::Undefined("root marginal vanishes at c2".into()));
    }
    let lhs = &marg[0][c1] / &marg[0][c2];
    let d = params.d;
    let mut rhs = Rational::one();
    for k in 1..=d {
        let grand: Vec<ProbVec> = (d * k + 1..=d * k + d).map(|g| marg[g].clone()).collect();
        rhs *= h_eval(c1, c2, &params.beta, &grand)?;
    }
    Ok(TwoStepCheck {
        equal: lhs == rhs,
        lhs,
        rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    fn params(q: usize, d: usize, beta: Rational, n: usize) -> ModelParams {
        ModelParams::new(q, d, beta, n).unwrap()
    }

    #[test]
    fn height_zero_is_indicator() {
        let p = params(3, 2, rat(1, 2), 0);
        for c in 0..3u8 {
            let m = brute_force_root_marginal(&p, &BoundaryConfig::new(vec![c]), 10).unwrap();
            assert_eq!(m, indicator(3, c as usize));
        }
    }

    #[test]
    fn single_level_example() {
        let p = params(3, 2, rat(1, 2), 1);
        let tau = BoundaryConfig::new(vec![0, 0]);
        let want = vec![rat(1, 9), rat(4, 9), rat(4, 9)];
        assert_eq!(brute_force_root_marginal(&p, &tau, 100).unwrap(), want);
        assert_eq!(recursion_root_marginal(&p, &tau).unwrap(), want);
    }

    #[test]
    fn one_step_examples() {
        let u = uniform(3);
        assert_eq!(one_step_marginal(&[u.clone(), u.clone()], &rat(1, 3)).unwrap(), u);
        let e = indicator(3, 0);
        let m = one_step_marginal(&[e.clone(), e], &rat(1, 4)).unwrap();
        assert_eq!(m, vec![rat(1, 33), rat(16, 33), rat(16, 33)]);
    }

    #[test]
    fn budget_and_frozen_errors() {
        let p = params(3, 3, rat(1, 2), 4);
        let tau = BoundaryConfig::new(vec![0; 81]);
        assert!(matches!(
            brute_force_root_marginal(&p, &tau, 1000),
            Err(ModelError::Budget { .. })
        ));
        let p = params(3, 3, Rational::zero(), 1);
        let tau = BoundaryConfig::new(vec![0, 1, 2]);
        assert_eq!(brute_force_root_marginal(&p, &tau, 100), Err(ModelError::ZeroMeasure));
        assert_eq!(recursion_root_marginal(&p, &tau), Err(ModelError::ZeroMeasure));
    }

    #[test]
    fn g_and_h_examples() {
        let v = vec![rat(2, 4), rat(1, 4), rat(1, 4)];
        let t = vec![v.clone(), v];
        assert_eq!(g_eval(0, 1, &rat(1, 4), &t).unwrap(), rat(100, 169));
        assert_eq!(h_eval(1, 1, &rat(1, 4), &t).unwrap(), int(1));
        let u = uniform(3);
        assert_eq!(h_eval(0, 2, &rat(1, 4), &[u.clone(), u]).unwrap(), int(1));
    }

    #[test]
    fn gamma_small_example() {
        let p = params(3, 2, rat(1, 2), 1);
        let g = gamma_exact(&p, 1 << 20).unwrap();
        assert_eq!(g.value, int(4));
        assert_eq!(gamma_by_enumeration(&p, 1 << 20).unwrap().value, int(4));
        assert!(gamma_exact(&params(3, 2, Rational::zero(), 1), 100).is_err());
    }

    #[test]
    fn gamma_agrees_with_enumeration() {
        for n in 1..=3 {
            let p = params(3, 2, rat(1, 3), n);
            let a = gamma_exact(&p, 1 << 20).unwrap();
            let b = gamma_by_enumeration(&p, 1 << 20).unwrap();
            assert_eq!(a.value, b.value);
            let m = recursion_root_marginal(&p, &a.witness).unwrap();
            assert_eq!(&m[a.c1] / &m[a.c2], a.value);
        }
    }

    #[test]
    fn two_step_example() {
        let p = params(3, 2, rat(1, 3), 2);
        let tau = BoundaryConfig::new(vec![0, 1, 2, 0]);
        for c1 in 0..3 {
            for c2 in 0..3 {
                assert!(two_step_identity_check(&p, &tau, c1, c2).unwrap().equal);
            }
        }
    }
}
