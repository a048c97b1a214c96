//! The `q = 3` reduction: `φ`, `φ*` and their range checks.
//!
//! With colours `c1 = 0`, `c2 = 2`, `c3 = 1` every extremal vector is one of
//! three types: `α` at both `c1` and `c3` (i), at `c1` only (ii), at `c3`
//! only (iii). Their `g_{c1}` factors are `x`, `y` and `1`.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    margin_verdict, tuple_rational_function, ConditionError, ExtremalTuple, MarginVerdict,
};
use crate::bounds::beta_star;
use crate::numeric::{int, pow_int, Rational};

pub const TYPE_I: u32 = 0b011;
pub const TYPE_II: u32 = 0b001;
pub const TYPE_III: u32 = 0b010;

fn xy(alpha: &Rational, beta: &Rational) -> (Rational, Rational) {
    let b = Rational::one() - beta;
    let a1 = alpha - Rational::one();
    let x = Rational::one() - &b * &a1 / (beta + alpha * int(2));
    let y = Rational::one() - &b * &a1 / (beta + alpha + Rational::one());
    (x, y)
}

/// `φ(d, d0, d1, α, β)`.
pub fn phi_eval(
    d: usize,
    d0: usize,
    d1: usize,
    alpha: &Rational,
    beta: &Rational,
) -> Result<Rational, ConditionError> {
    if d0 + d1 > d {
        return Err(ConditionError::Invalid("need d0 + d1 <= d".into()));
    }
    if alpha < &Rational::one() {
        return Err(ConditionError::Invalid("alpha must be at least 1".into()));
    }
    if beta.is_negative() || beta > &Rational::one() {
        return Err(ConditionError::Invalid("beta must lie in [0, 1]".into()));
    }
    let (x, y) = xy(alpha, beta);
    let xd0 = pow_int(&x, d0 as u32);
    let g1 = &xd0 * pow_int(&y, d1 as u32);
    let g3 = &xd0 * pow_int(&y, (d - d0 - d1) as u32);
    let den = beta + &g1 + g3;
    if den.is_zero() {
        return Err(ConditionError::Invalid("phi denominator vanishes".into()));
    }
    Ok(Rational::one() + (Rational::one() - beta) * (Rational::one() - g1) / den)
}

/// `φ*(d, d0, α) = φ(d, d0, d − d0, α, β_*(d))`.
pub fn phi_star(d: usize, d0: usize, alpha: &Rational) -> Result<Rational, ConditionError> {
    if d0 > d {
        return Err(ConditionError::Invalid("need d0 <= d".into()));
    }
    phi_eval(d, d0, d - d0, alpha, &beta_star(3, d))
}

/// Counts `(d0, d1)` of type-(i) and type-(ii) children relative to `c1`.
pub fn reduce_extremal_to_phi(tuple: &ExtremalTuple, c1: usize) -> Result<(usize, usize), ConditionError> {
    let c2 = tuple.base_colour;
    if tuple.q != 3 || c1 == c2 || c1 >= 3 {
        return Err(ConditionError::NotReducible);
    }
    let c3 = 3 - c1 - c2;
    let (mut d0, mut d1) = (0, 0);
    for &m in &tuple.patterns {
        match (m >> c1 & 1, m >> c3 & 1, m >> c2 & 1) {
            (1, 1, 0) => d0 += 1,
            (1, 0, 0) => d1 += 1,
            (0, 1, 0) => {}
            _ => return Err(ConditionError::NotReducible),
        }
    }
    Ok((d0, d1))
}

fn phi_star_patterns(d: usize, d0: usize) -> Vec<u32> {
    let mut p = vec![TYPE_I; d0];
    p.extend(std::iter::repeat_n(TYPE_II, d - d0));
    p
}

/// Certifies `φ*(d, d0, α)^d < α` on `(lo, hi]`.
pub fn check_phi_star(
    d: usize,
    d0: usize,
    lo: &Rational,
    hi: &Rational,
) -> Result<MarginVerdict, ConditionError> {
    if d < 2 || d0 > d {
        return Err(ConditionError::Invalid("need d >= 2 and d0 <= d".into()));
    }
    if lo < &Rational::one() || lo >= hi {
        return Err(ConditionError::Invalid("need 1 <= alphaLo < alphaHi".into()));
    }
    let (p, q) = tuple_rational_function(3, 0, 2, &beta_star(3, d), &phi_star_patterns(d, d0));
    margin_verdict(&p, &q, d, lo, hi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiStarResult {
    pub d: usize,
    pub d0: usize,
    pub verdict: MarginVerdict,
}

/// `check_phi_star` over every `d0 ∈ 0..=d` for each `d`, in parallel; the
/// result order is `(d, d0)` lexicographic.
pub fn phi_star_grid(
    ds: &[usize],
    lo: &Rational,
    hi: &Rational,
) -> Result<Vec<PhiStarResult>, ConditionError> {
    let jobs: Vec<(usize, usize)> = ds.iter().flat_map(|&d| (0..=d).map(move |d0| (d, d0))).collect();
    jobs.par_iter()
        .map(|&(d, d0)| Ok(PhiStarResult { d, d0, verdict: check_phi_star(d, d0, lo, hi)? }))
        .collect()
}
