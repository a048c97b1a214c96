//! Property checkers shared by the proptest suites and the acceptance run.
//! Each takes already-sampled rationals and returns `Err` with a description
//! on violation; samples outside a property's region are reported as skips.
#![allow(dead_code)]

use num_traits::{One, Zero};
use potts_core::bounds::{beta_star, f_l, f_u, iterate_bounds, SeqMode};
use potts_core::condition::max_h_extremal;
use potts_core::model::h_eval;
use potts_core::numeric::{int, rat, ten_pow_neg, Interval};
use potts_core::{ProbVec, Rational};
use rand::Rng;

pub type Outcome = Result<bool, String>;

/// Tight enough that odd-`d` enclosures of distinct values separate.
pub fn tol() -> Rational {
    ten_pow_neg(40)
}

/// Rational in `[lo, hi]` on a grid of `steps` cells.
pub fn grid(lo: &Rational, hi: &Rational, k: u64, steps: u64) -> Rational {
    lo + (hi - lo) * Rational::new(k.into(), steps.into())
}

pub fn random_rational<R: Rng>(rng: &mut R, lo: &Rational, hi: &Rational) -> Rational {
    let steps = 1u64 << 20;
    grid(lo, hi, rng.gen_range(0..=steps), steps)
}

/// Point of `{0 <= y <= x <= 1, 2y + x <= 1 <= 2x + y}` from two unit
/// coordinates.
pub fn region_point(s: &Rational, t: &Rational) -> (Rational, Rational) {
    let x = rat(1, 3) + s * rat(2, 3);
    let lo = (Rational::one() - &x * int(2)).max(Rational::zero());
    let hi = (Rational::one() - &x) / int(2);
    let y = &lo + (hi - &lo) * t;
    (x, y)
}

fn le(a: &Interval, b: &Interval) -> bool {
    a.hi() <= b.lo()
}

fn fu(d: u32, beta: &Rational, x: &Rational, y: &Rational) -> Result<Interval, String> {
    f_u(d, beta, x, y, &tol()).map_err(|e| e.to_string())
}

fn fl(d: u32, beta: &Rational, x: &Rational, y: &Rational) -> Result<Interval, String> {
    f_l(d, beta, x, y).map(Interval::point).map_err(|e| e.to_string())
}

/// `f_u` non-increasing and `f_l` non-decreasing in `beta` on the region.
pub fn fbetamono(d: u32, b1: &Rational, b2: &Rational, x: &Rational, y: &Rational) -> Outcome {
    let (b1, b2) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
    if b1.is_zero() || b2 >= &Rational::one() {
        return Ok(false);
    }
    let ok = le(&fu(d, b2, x, y)?, &fu(d, b1, x, y)?) && le(&fl(d, b1, x, y)?, &fl(d, b2, x, y)?);
    ok.then_some(true)
        .ok_or_else(|| format!("beta monotonicity fails at d={d} b=({b1},{b2}) x={x} y={y}"))
}

/// `f_l` decreasing in `x`; increasing in `y` where `x + 2y <= 1`.
pub fn flxymono(d: u32, beta: &Rational, x1: &Rational, x2: &Rational, y1: &Rational, y2: &Rational) -> Outcome {
    let (x1, x2) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    let (y1, y2) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
    let mut tested = false;
    if x2 + y1 <= Rational::one() {
        tested = true;
        if !le(&fl(d, beta, x2, y1)?, &fl(d, beta, x1, y1)?) {
            return Err(format!("f_l not decreasing in x at d={d} beta={beta} y={y1}"));
        }
    }
    if x1 + y2 * int(2) <= Rational::one() {
        tested = true;
        if !le(&fl(d, beta, x1, y1)?, &fl(d, beta, x1, y2)?) {
            return Err(format!("f_l not increasing in y at d={d} beta={beta} x={x1}"));
        }
    }
    Ok(tested)
}

/// `f_u` increasing in `x` where `2x + y >= 1`; decreasing in `y`.
pub fn fuxymono(d: u32, beta: &Rational, x1: &Rational, x2: &Rational, y1: &Rational, y2: &Rational) -> Outcome {
    let (x1, x2) = if x1 <= x2 { (x1, x2) } else { (x2, x1) };
    let (y1, y2) = if y1 <= y2 { (y1, y2) } else { (y2, y1) };
    let mut tested = false;
    if x1 * int(2) + y1 >= Rational::one() && x2 + y1 <= Rational::one() {
        tested = true;
        if !le(&fu(d, beta, x1, y1)?, &fu(d, beta, x2, y1)?) {
            return Err(format!("f_u not increasing in x at d={d} beta={beta} y={y1}"));
        }
    }
    if x1 + y2 <= Rational::one() {
        tested = true;
        if !le(&fu(d, beta, x1, y2)?, &fu(d, beta, x1, y1)?) {
            return Err(format!("f_u not decreasing in y at d={d} beta={beta} x={x1}"));
        }
    }
    Ok(tested)
}

/// `2 f_l + f_u <= 1 <= 2 f_u + f_l` on the region.
pub fn fimgrange(d: u32, beta: &Rational, x: &Rational, y: &Rational) -> Outcome {
    if beta.is_zero() || beta >= &Rational::one() {
        return Ok(false);
    }
    let (u, l) = (fu(d, beta, x, y)?, fl(d, beta, x, y)?);
    let one = Interval::from_int(1);
    let two = int(2);
    let ok = le(&l.scale(&two).add(&u), &one) && le(&one, &u.scale(&two).add(&l));
    ok.then_some(true)
        .ok_or_else(|| format!("image range fails at d={d} beta={beta} x={x} y={y}"))
}

/// Joint monotonicity for nested region points `y1 <= y2 <= x2 <= x1`.
pub fn fulxymono(d: u32, beta: &Rational, p1: (&Rational, &Rational), p2: (&Rational, &Rational)) -> Outcome {
    let ((x1, y1), (x2, y2)) = (p1, p2);
    if !(y1 <= y2 && y2 <= x2 && x2 <= x1) || beta.is_zero() || beta >= &Rational::one() {
        return Ok(false);
    }
    let ok = le(&fu(d, beta, x2, y2)?, &fu(d, beta, x1, y1)?) && le(&fl(d, beta, x1, y1)?, &fl(d, beta, x2, y2)?);
    ok.then_some(true)
        .ok_or_else(|| format!("joint monotonicity fails at d={d} beta={beta}"))
}

/// `u_n(β_*) >= u_n(β)` and `l_n(β_*) <= l_n(β)` for `n <= n_max`.
pub fn seqbetamono(d: u32, beta: &Rational, n_max: usize) -> Outcome {
    let bs = beta_star(3, d as usize);
    if beta < &bs || beta >= &Rational::one() {
        return Ok(false);
    }
    let a = iterate_bounds(d, &bs, n_max, &SeqMode::exact()).map_err(|e| e.to_string())?;
    let b = iterate_bounds(d, beta, n_max, &SeqMode::exact()).map_err(|e| e.to_string())?;
    for (ea, eb) in a.entries.iter().zip(&b.entries) {
        if !(le(&eb.u, &ea.u) && le(&ea.l, &eb.l)) {
            return Err(format!("critical dominance fails at d={d} beta={beta} n={}", ea.n));
        }
    }
    Ok(true)
}

/// `h` unchanged when each child vector is rescaled.
pub fn scale_free(c1: usize, c2: usize, beta: &Rational, tuple: &[ProbVec], scales: &[Rational]) -> Outcome {
    let scaled: Vec<ProbVec> = tuple
        .iter()
        .zip(scales)
        .map(|(p, t)| p.iter().map(|x| x * t).collect())
        .collect();
    let a = h_eval(c1, c2, beta, tuple).map_err(|e| e.to_string())?;
    let b = h_eval(c1, c2, beta, &scaled).map_err(|e| e.to_string())?;
    (a == b).then_some(true).ok_or_else(|| format!("scale changes h: {a} vs {b}"))
}

/// Vector with entries in `[1, alpha]`, normalised.
pub fn simplex_vector(entries: &[Rational]) -> ProbVec {
    let s: Rational = entries.iter().sum();
    entries.iter().map(|x| x / &s).collect()
}

/// `h` of an arbitrary tuple from the α-simplex never beats the extremal max.
pub fn extremal_optimality(
    q: usize,
    alpha: &Rational,
    c1: usize,
    c2: usize,
    beta: &Rational,
    tuple: &[ProbVec],
) -> Outcome {
    let d = tuple.len();
    let best = max_h_extremal(q, d, alpha, c1, c2, beta).map_err(|e| e.to_string())?;
    let h = h_eval(c1, c2, beta, tuple).map_err(|e| e.to_string())?;
    (h <= best.value)
        .then_some(true)
        .ok_or_else(|| format!("tuple beats extremal max at q={q} d={d} alpha={alpha} beta={beta}"))
}

/// `M` non-increasing in `beta`.
pub fn m_beta_mono(q: usize, d: usize, alpha: &Rational, b1: &Rational, b2: &Rational) -> Outcome {
    let (b1, b2) = if b1 <= b2 { (b1, b2) } else { (b2, b1) };
    let m1 = max_h_extremal(q, d, alpha, 0, q - 1, b1).map_err(|e| e.to_string())?;
    let m2 = max_h_extremal(q, d, alpha, 0, q - 1, b2).map_err(|e| e.to_string())?;
    (m2.value <= m1.value)
        .then_some(true)
        .ok_or_else(|| format!("M increases in beta at q={q} d={d} alpha={alpha}"))
}
