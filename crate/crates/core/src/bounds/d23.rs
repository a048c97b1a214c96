//! Large-`d` quantities for the `phi_*` bound, with `kappa = d0/d` and
//! `b = beta_*(d)`:
//!
//! ```text
//! X = 1 - (1-b)(alpha-1)/(b + 2 alpha)      Y = 1 - (1-b)(alpha-1)/(b + alpha + 1)
//! xi1 = (alpha-1)(-d kappa + 3d - 4 kappa)/3 + d(kappa+1)
//! xi3 = s0 X^(d kappa) Y^(d(1-kappa)) + t0 X^(2 kappa (d+1)/3) Y^((1-kappa)(d+1)/3)
//! d^2 xi3 / d alpha^2 = s2 X^(d kappa) Y^(d(1-kappa)) + t2 X^(...) Y^(...)
//! ```
//!
//! `s2` and `t2` are exact rationals at rational points; the fractional
//! powers in `xi3`, `M`, `S` and `xi2` are enclosed.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{beta_star, BoundsError, Check};
use crate::numeric::{
    int, nth_root_enclosure, pow_rational_enclosure, rat, serde_rational, Interval, Rational,
};
use crate::resolver::Poly;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct D23Quantities {
    pub d: u32,
    #[serde(with = "serde_rational")]
    pub kappa: Rational,
    #[serde(with = "serde_rational")]
    pub alpha: Rational,
    #[serde(with = "serde_rational")]
    pub x: Rational,
    #[serde(with = "serde_rational")]
    pub y: Rational,
    #[serde(with = "serde_rational")]
    pub xi1: Rational,
    pub xi3: Interval,
    /// `M + alpha^(1/d) S`.
    pub xi2: Interval,
    pub m: Interval,
    pub s: Interval,
    #[serde(with = "serde_rational")]
    pub w: Rational,
    #[serde(with = "serde_rational")]
    pub s0: Rational,
    #[serde(with = "serde_rational")]
    pub t0: Rational,
    #[serde(with = "serde_rational")]
    pub s2: Rational,
    #[serde(with = "serde_rational")]
    pub t2: Rational,
    pub s2_plus_t2_positive: bool,
    pub xi1_le_xi3: Check,
    pub xi3_le_xi2: Check,
}

/// `s0` as a polynomial in `alpha`.
pub fn s0_poly(d: u32, kappa: &Rational) -> Poly {
    let (dd, one) = (int(d as i64), Rational::one());
    let a = (&dd * int(2) - &one) * &dd * (&one - kappa) / (&dd + &one);
    let c = (&dd - int(2)) * kappa / (int(3) * (&dd + &one));
    // -(a alpha + c ((d-2) alpha + 2(d+1)))
    Poly::linear(-(&c * int(2) * (&dd + &one)), -(a + &c * (&dd - int(2))))
}

/// `W = 1 + (alpha-1)/d - (d-1)(alpha-1)^2/(2 d^2)` as a polynomial in `alpha`.
pub fn w_poly(d: u32) -> Poly {
    let dd = int(d as i64);
    let t = Poly::from_ints(&[-1, 1]);
    Poly::one()
        .add(&t.scale(&dd.recip()))
        .sub(&t.mul(&t).scale(&((&dd - int(1)) / (int(2) * &dd * &dd))))
}

pub fn t0_poly(d: u32) -> Poly {
    let dd = int(d as i64);
    let f1 = Poly::linear(int(2) * &dd - int(1), &dd + int(1));
    let f2 = Poly::linear(int(2) * (&dd + int(1)), &dd - int(2));
    f1.mul(&f2).scale(&(int(3) * (&dd + int(1))).recip()).mul(&w_poly(d))
}

/// `xi1` as a polynomial in `alpha`.
pub fn xi1_poly(d: u32, kappa: &Rational) -> Poly {
    let dd = int(d as i64);
    let slope = (-(&dd * kappa) + int(3) * &dd - int(4) * kappa) / int(3);
    let at_one = &dd * (kappa + int(1));
    Poly::linear(&at_one - &slope, slope)
}

/// `X, X', X''` and `Y, Y', Y''` at `alpha`.
fn xy_derivs(b: &Rational, alpha: &Rational) -> ([Rational; 3], [Rational; 3]) {
    let one = Rational::one();
    let bh = &one - b;
    let k = &bh * (b + int(2));
    let gx = b + int(2) * alpha;
    let gy = b + alpha + &one;
    let x = &one - &bh * (alpha - &one) / &gx;
    let y = &one - &bh * (alpha - &one) / &gy;
    let xs = [x, -(&k / (&gx * &gx)), int(4) * &k / (&gx * &gx * &gx)];
    let ys = [y, -(&k / (&gy * &gy)), int(2) * &k / (&gy * &gy * &gy)];
    (xs, ys)
}

/// `(d^2/d alpha^2)(r X^k1 Y^k2) / (X^k1 Y^k2)`.
fn second_coefficient(r: &Poly, k1: &Rational, k2: &Rational, alpha: &Rational, xs: &[Rational; 3], ys: &[Rational; 3]) -> Rational {
    let (r0, r1, r2) = (r.eval(alpha), r.derivative().eval(alpha), r.derivative().derivative().eval(alpha));
    let (lx, ly) = (&xs[1] / &xs[0], &ys[1] / &ys[0]);
    let l = k1 * &lx + k2 * &ly;
    let dl = k1 * (&xs[2] / &xs[0] - &lx * &lx) + k2 * (&ys[2] / &ys[0] - &ly * &ly);
    r2 + int(2) * &r1 * &l + r0 * (dl + &l * &l)
}

fn exponents(d: u32, kappa: &Rational) -> [Rational; 4] {
    let dd = int(d as i64);
    let one = Rational::one();
    [
        &dd * kappa,
        &dd * (&one - kappa),
        int(2) * kappa * (&dd + &one) / int(3),
        (&one - kappa) * (&dd + &one) / int(3),
    ]
}

/// `(s2, t2)` at `(d, kappa, alpha)`.
pub fn s2_t2(d: u32, kappa: &Rational, alpha: &Rational) -> Result<(Rational, Rational), BoundsError> {
    check(d, kappa, alpha)?;
    let b = beta_star(3, d as usize);
    let (xs, ys) = xy_derivs(&b, alpha);
    let [e1, e2, e3, e4] = exponents(d, kappa);
    let s2 = second_coefficient(&s0_poly(d, kappa), &e1, &e2, alpha, &xs, &ys);
    let t2 = second_coefficient(&t0_poly(d), &e3, &e4, alpha, &xs, &ys);
    Ok((s2, t2))
}

fn check(d: u32, kappa: &Rational, alpha: &Rational) -> Result<(), BoundsError> {
    if d < 3 {
        return Err(BoundsError::Invalid("d must be at least 3".into()));
    }
    if kappa.is_negative() || kappa > &Rational::one() {
        return Err(BoundsError::Invalid("kappa outside [0, 1]".into()));
    }
    if alpha < &Rational::one() {
        return Err(BoundsError::Invalid("alpha must be at least 1".into()));
    }
    Ok(())
}

fn powers(x: &Rational, y: &Rational, ex: &Rational, ey: &Rational, tol: &Rational) -> Result<Interval, BoundsError> {
    let a = pow_rational_enclosure(&Interval::point(x.clone()), ex, tol)?;
    let b = pow_rational_enclosure(&Interval::point(y.clone()), ey, tol)?;
    Ok(a.mul(&b))
}

pub fn d23_quantities(d: u32, kappa: &Rational, alpha: &Rational, tol: &Rational) -> Result<D23Quantities, BoundsError> {
    check(d, kappa, alpha)?;
    let b = beta_star(3, d as usize);
    let one = Rational::one();
    let dd = int(d as i64);
    let (xs, ys) = xy_derivs(&b, alpha);
    let (x, y) = (xs[0].clone(), ys[0].clone());
    let [e1, e2, e3, e4] = exponents(d, kappa);
    let p_s = powers(&x, &y, &e1, &e2, tol)?;
    let p_t = powers(&x, &y, &e3, &e4, tol)?;
    let s0 = s0_poly(d, kappa).eval(alpha);
    let t0 = t0_poly(d).eval(alpha);
    let w = w_poly(d).eval(alpha);
    let xi3 = p_s.scale(&s0).add(&p_t.scale(&t0));
    let xi1 = xi1_poly(d, kappa).eval(alpha);
    // M = -X^(d0) Y^(d-d0) (d0 b (2 + alpha b)/(2 + b) + (d-d0)(b+1) alpha)
    let d0 = &dd * kappa;
    let coeff = &d0 * &b * (int(2) + alpha * &b) / (int(2) + &b) + (&dd - &d0) * (&b + &one) * alpha;
    let m = p_s.scale(&-coeff);
    // S = X^(2 d0/(2+b)) Y^((d-d0)/(2+b)) (alpha+b+1)(alpha b+2)/(1-b); here 2d0/(2+b) = e3.
    let s = p_t.scale(&((alpha + &b + &one) * (alpha * &b + int(2)) / (&one - &b)));
    let root = nth_root_enclosure(&Interval::point(alpha.clone()), d, tol)?;
    let xi2 = m.add(&root.mul(&s));
    let (s2, t2) = s2_t2(d, kappa, alpha)?;
    let le = |a: &Interval, b: &Interval| {
        if a.hi() <= b.lo() {
            Check::Pass
        } else if a.lo() > b.hi() {
            Check::Fail
        } else {
            Check::Undecided
        }
    };
    Ok(D23Quantities {
        d,
        kappa: kappa.clone(),
        alpha: alpha.clone(),
        x,
        y,
        xi1_le_xi3: le(&Interval::point(xi1.clone()), &xi3),
        xi3_le_xi2: le(&xi3, &xi2),
        xi1,
        xi3,
        xi2,
        m,
        s,
        w,
        s0,
        t0,
        s2_plus_t2_positive: (&s2 + &t2) > Rational::zero(),
        s2,
        t2,
    })
}

/// Floating-point `xi3(alpha)` for real `d`, `kappa` (finite differences).
pub fn xi3_f64(d: f64, kappa: f64, alpha: f64) -> f64 {
    let b = 1.0 - 3.0 / (d + 1.0);
    let x = 1.0 - (1.0 - b) * (alpha - 1.0) / (b + 2.0 * alpha);
    let y = 1.0 - (1.0 - b) * (alpha - 1.0) / (b + alpha + 1.0);
    let s0 = -((2.0 * d - 1.0) * d * (1.0 - kappa) * alpha / (d + 1.0)
        + (d - 2.0) * kappa * ((d - 2.0) * alpha + 2.0 * (d + 1.0)) / (3.0 * (d + 1.0)));
    let w = 1.0 + (alpha - 1.0) / d - (d - 1.0) * (alpha - 1.0).powi(2) / (2.0 * d * d);
    let t0 = w * ((d + 1.0) * alpha + 2.0 * d - 1.0) * ((d - 2.0) * alpha + 2.0 * (d + 1.0)) / (3.0 * (d + 1.0));
    s0 * x.powf(d * kappa) * y.powf(d * (1.0 - kappa))
        + t0 * x.powf(2.0 * kappa * (d + 1.0) / 3.0) * y.powf((1.0 - kappa) * (d + 1.0) / 3.0)
}

/// `s2 X^(..) Y^(..) + t2 X^(..) Y^(..)` in floating point, via the exact
/// coefficients at the rational point.
pub fn xi3_second_f64(d: u32, kappa: &Rational, alpha: &Rational) -> Result<f64, BoundsError> {
    use crate::numeric::to_f64;
    let (s2, t2) = s2_t2(d, kappa, alpha)?;
    let b = beta_star(3, d as usize);
    let (xs, ys) = xy_derivs(&b, alpha);
    let [e1, e2, e3, e4] = exponents(d, kappa).map(|e| to_f64(&e));
    let (x, y) = (to_f64(&xs[0]), to_f64(&ys[0]));
    Ok(to_f64(&s2) * x.powf(e1) * y.powf(e2) + to_f64(&t2) * x.powf(e3) * y.powf(e4))
}

/// `(alpha - 1)` slope of `xi3` at `alpha = 1`: `(-d kappa + 3d - 4 kappa)/3`.
pub fn xi3_slope_at_one(d: u32, kappa: &Rational) -> Rational {
    let dd = int(d as i64);
    (-(&dd * kappa) + int(3) * &dd - int(4) * kappa) / int(3)
}

/// The `s2 + t2 > 0` sampling grid: `d` in `ds`, `kappa` in `{0, 1/k, .., 1}`,
/// `alpha = 1 + 3r` with `r` in `(0, 26/81]` on `steps` points.
pub fn s2_t2_grid(ds: &[u32], kappa_steps: i64, alpha_steps: i64) -> Vec<(u32, Rational, Rational, bool)> {
    let mut out = Vec::new();
    for &d in ds {
        for i in 0..=kappa_steps {
            let kappa = rat(i, kappa_steps);
            for j in 1..=alpha_steps {
                let r = rat(26 * j, 81 * alpha_steps);
                let alpha = Rational::one() + int(3) * r;
                let (s2, t2) = s2_t2(d, &kappa, &alpha).expect("grid inside domain");
                out.push((d, kappa.clone(), alpha, (s2 + t2) > Rational::zero()));
            }
        }
    }
    out
}
