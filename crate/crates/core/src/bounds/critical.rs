//! Objects at the critical interaction `beta_*(d) = 1 - 3/(d+1)`.
//!
//! `g_u(d, mu, y) = f_u(d, beta_*, mu y, y) - mu y`,
//! `g_l(d, mu, y) = f_l(d, beta_*, mu y, y) - y`, and with
//!
//! ```text
//! y_mu = 7/(10 mu + 12) + 3/500   (mu < 32)
//! y_mu = 7/(10 mu + 12)           (mu >= 32)
//! x_mu = mu y_mu
//! ```
//!
//! `h_u(d, mu) = g_u(d, mu, y_mu)` and `h_l(d, mu) = g_l(d, mu, y_mu)`.
//!
//! Claims quantified over all `mu > 1` are checked on `[1 + offset, mu_max]`
//! (defaults `10^-6` and `10^3`).

use num_traits::One;
use serde::{Deserialize, Serialize};

use super::{beta_star, f_l, f_u, BoundsError};
use crate::numeric::{format_rational, int, rat, serde_rational, ten_pow_neg, Interval, Rational};
use crate::resolver::{
    prove_on_box, prove_univariate, BoxVerdict, ExprDag, Poly, Relation, SearchConfig, Strictness, UniRange,
    UniVerdict,
};

/// Where the definition of `y_mu` switches branches.
pub fn mu_switch() -> Rational {
    int(32)
}

/// `157/80`, the smallest `mu` the critical-ratio argument needs.
pub fn mu_min() -> Rational {
    rat(157, 80)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// `mu < 32`, with the `3/500` offset.
    Low,
    /// `mu >= 32`.
    High,
}

impl Branch {
    pub fn of(mu: &Rational) -> Branch {
        if mu < &mu_switch() {
            Branch::Low
        } else {
            Branch::High
        }
    }
}

pub fn y_mu_branch(mu: &Rational, branch: Branch) -> Rational {
    let base = int(7) / (int(10) * mu + int(12));
    match branch {
        Branch::Low => base + rat(3, 500),
        Branch::High => base,
    }
}

pub fn y_mu(mu: &Rational) -> Rational {
    y_mu_branch(mu, Branch::of(mu))
}

pub fn x_mu(mu: &Rational) -> Rational {
    mu * y_mu(mu)
}

pub fn y_mu_f64(mu: f64) -> f64 {
    let base = 7.0 / (10.0 * mu + 12.0);
    if mu < 32.0 {
        base + 0.006
    } else {
        base
    }
}

fn check_mu(mu: &Rational) -> Result<(), BoundsError> {
    if mu < &Rational::one() {
        return Err(BoundsError::Invalid("mu must be at least 1".into()));
    }
    Ok(())
}

pub fn g_u(d: u32, mu: &Rational, y: &Rational, tol: &Rational) -> Result<Interval, BoundsError> {
    check_mu(mu)?;
    let x = mu * y;
    let v = f_u(d, &beta_star(3, d as usize), &x, y, tol)?;
    Ok(v.add_scalar(&-x))
}

pub fn g_l(d: u32, mu: &Rational, y: &Rational) -> Result<Rational, BoundsError> {
    check_mu(mu)?;
    Ok(f_l(d, &beta_star(3, d as usize), &(mu * y), y)? - y)
}

pub fn h_u(d: u32, mu: &Rational, tol: &Rational) -> Result<Interval, BoundsError> {
    g_u(d, mu, &y_mu(mu), tol)
}

pub fn h_l(d: u32, mu: &Rational) -> Result<Rational, BoundsError> {
    g_l(d, mu, &y_mu(mu))
}

/// `d/(d - 3z + 1) + ln(d + 1 - 3z)`; floating point only.
pub fn psi(d: f64, z: f64) -> f64 {
    d / (d - 3.0 * z + 1.0) + (d + 1.0 - 3.0 * z).ln()
}

/// `2 psi(d, y) - psi(d, x) - psi(d, 1 - x - y)`.
pub fn zeta(d: f64, x: f64, y: f64) -> f64 {
    2.0 * psi(d, y) - psi(d, x) - psi(d, 1.0 - x - y)
}

/// Prefix forms of `(x_mu, y_mu)` in the variable `m`.
fn xy_prefix(branch: Branch) -> (String, String) {
    match branch {
        Branch::Low => (
            "(+ (/ (* 7 m) (+ (* 10 m) 12)) (* 3/500 m))".into(),
            "(+ (/ 7 (+ (* 10 m) 12)) 3/500)".into(),
        ),
        Branch::High => ("(/ (* 7 m) (+ (* 10 m) 12))".into(), "(/ 7 (+ (* 10 m) 12))".into()),
    }
}

/// `x_mu`, `y_mu` as `(X/D, Y/D)` with polynomial `X, Y, D`, `D > 0` for `m > 0`.
pub fn xy_polys(branch: Branch) -> (Poly, Poly, Poly) {
    let lin = Poly::from_ints(&[12, 10]);
    match branch {
        Branch::Low => {
            // D = 500 (10m + 12); X = 3500 m + 3 m (10m + 12); Y = 3500 + 3 (10m + 12)
            let d = lin.scale(&int(500));
            let x = Poly::from_ints(&[0, 3500]).add(&Poly::x().mul(&lin).scale(&int(3)));
            let y = Poly::constant(int(3500)).add(&lin.scale(&int(3)));
            (x, y, d)
        }
        Branch::High => (Poly::from_ints(&[0, 7]), Poly::constant(int(7)), lin),
    }
}

/// Cleared numerator of `h_l(d, mu)`: positive exactly where `h_l > 0`
/// (for `mu > 0`).
pub fn h_l_numerator(d: u32, branch: Branch) -> Poly {
    let (x, y, den) = xy_polys(branch);
    let bh = rat(3, d as i64 + 1);
    let a = den.sub(&x.scale(&bh));
    let b = den.sub(&y.scale(&bh));
    let c = den.sub(&den.sub(&x).sub(&y).scale(&bh));
    let ad = a.pow(d);
    let sum = ad.add(&b.pow(d)).add(&c.pow(d));
    den.mul(&ad).sub(&y.mul(&sum))
}

/// One rendered check from the mu inequality suite.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuCheck {
    pub name: String,
    pub claim: String,
    /// Rendered range of `mu` (a single point for point checks).
    pub range: Interval,
    pub outcome: MuOutcome,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuOutcome {
    Box { verdict: BoxVerdict },
    Univariate { verdict: UniVerdict },
    Point {
        value: Interval,
        /// Required sign of `value`.
        sign: i8,
    },
}

impl MuCheck {
    pub fn holds(&self) -> bool {
        match &self.outcome {
            MuOutcome::Box { verdict } => verdict.is_holds(),
            MuOutcome::Univariate { verdict } => verdict.is_holds(),
            MuOutcome::Point { value, sign } => match sign {
                1 => value.is_positive(),
                _ => value.is_negative(),
            },
        }
    }

    pub fn label(&self) -> &'static str {
        match &self.outcome {
            MuOutcome::Box { verdict } => verdict.label(),
            MuOutcome::Univariate { verdict } => verdict.label(),
            MuOutcome::Point { .. } if self.holds() => "holds",
            MuOutcome::Point { .. } => "fails",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MuSuiteConfig {
    /// `mu` starts at `1 + mu_offset` where a claim covers all `mu > 1`.
    #[serde(with = "serde_rational")]
    pub mu_offset: Rational,
    #[serde(with = "serde_rational")]
    pub mu_max: Rational,
    pub budget: usize,
}

impl Default for MuSuiteConfig {
    fn default() -> Self {
        MuSuiteConfig {
            mu_offset: ten_pow_neg(6),
            mu_max: int(1000),
            budget: 200_000,
        }
    }
}

/// Named `expr < 0` claims in the variable `m`, with their rendered ranges.
pub fn mu_suite_expressions(cfg: &MuSuiteConfig) -> Result<Vec<(String, String, ExprDag, Interval)>, BoundsError> {
    let lo1 = Rational::one() + &cfg.mu_offset;
    let low = Interval::new(lo1.clone(), mu_switch())?;
    let low_from_min = Interval::new(mu_min(), mu_switch())?;
    let high = Interval::new(mu_switch(), cfg.mu_max.clone())?;
    let all = Interval::new(lo1, cfg.mu_max.clone())?;
    let mut out = Vec::new();
    let mut push = |name: &str, claim: String, text: String, range: &Interval| -> Result<(), BoundsError> {
        let e = ExprDag::parse(&text, &["m"])?;
        out.push((name.to_string(), claim, e, range.clone()));
        Ok(())
    };
    for (branch, tag, range) in [(Branch::Low, "low", &low), (Branch::High, "high", &high)] {
        let (x, y) = xy_prefix(branch);
        push(
            &format!("z-bound-{tag}"),
            "(8-y)(2x+y-1)/((8-x)(2x+y+22)) < 1/24".into(),
            format!("(- (/ (* (- 8 {y}) (+ (* 2 {x}) {y} -1)) (* (- 8 {x}) (+ (* 2 {x}) {y} 22))) 1/24)"),
            range,
        )?;
    }
    let lhs = |branch| {
        let (x, y) = xy_prefix(branch);
        format!("(/ (* 3 (+ (* 2 {x}) {y} 22)) (* (- 8 {y}) (+ {x} {y} 7)))")
    };
    push(
        "dhu-case1",
        "3(2x+y+22)/((8-y)(x+y+7)) < 8/7, mu >= 32".into(),
        format!("(- {} 8/7)", lhs(Branch::High)),
        &high,
    )?;
    push(
        "dhu-case2",
        "3(2x+y+22)/((8-y)(x+y+7)) < 24(25m^2+60m+3536)/(25m^2+60m+73536), mu > 1".into(),
        format!(
            "(- {} (/ (* 24 (+ (* 25 (^ m 2)) (* 60 m) 3536)) (+ (* 25 (^ m 2)) (* 60 m) 73536)))",
            lhs(Branch::Low)
        ),
        &all,
    )?;
    for (branch, tag, range) in [(Branch::Low, "low", &low_from_min), (Branch::High, "high", &high)] {
        let (x, y) = xy_prefix(branch);
        let z = format!("(- 1 {x} {y})");
        let chain = [
            ("0 < y", format!("(- {y})")),
            ("y < 1-x-y", format!("(- {y} {z})")),
            ("1-x-y < 1/3", format!("(- {z} 1/3)")),
            ("1/3 < x", format!("(- 1/3 {x})")),
            ("x < 1-y", format!("(- {x} (- 1 {y}))")),
        ];
        for (i, (claim, text)) in chain.into_iter().enumerate() {
            push(&format!("ineqs-{tag}-{}", i + 1), claim.into(), text, range)?;
        }
    }
    Ok(out)
}

/// Runs every mu inequality on its rendered range.
pub fn mu_suite_checks(cfg: &MuSuiteConfig) -> Result<Vec<MuCheck>, BoundsError> {
    let search = SearchConfig::with_budget(cfg.budget);
    let mut out = Vec::new();
    for (name, claim, expr, range) in mu_suite_expressions(cfg)? {
        let verdict = prove_on_box(&expr, std::slice::from_ref(&range), Relation::Lt, &search)?;
        out.push(MuCheck {
            name,
            claim,
            range,
            outcome: MuOutcome::Box { verdict },
        });
    }
    for (branch, tag, lo, hi) in [
        (Branch::Low, "low", mu_min(), mu_switch()),
        (Branch::High, "high", mu_switch(), cfg.mu_max.clone()),
    ] {
        // h_l > 0  <=>  -numerator < 0; the low branch stops short of 32.
        let range = UniRange {
            lo: lo.clone(),
            hi: hi.clone(),
            lo_open: false,
            hi_open: branch == Branch::Low,
        };
        let verdict = prove_univariate(&h_l_numerator(23, branch).neg(), &range, Strictness::Strict, &[])?;
        out.push(MuCheck {
            name: format!("hl23-{tag}"),
            claim: "h_l(23, mu) > 0".into(),
            range: Interval::new(lo, hi)?,
            outcome: MuOutcome::Univariate { verdict },
        });
    }
    let tol = ten_pow_neg(30);
    for mu in [mu_min(), mu_switch()] {
        out.push(MuCheck {
            name: format!("hu23-{}", format_rational(&mu)),
            claim: format!("h_u(23, {}) < 0", format_rational(&mu)),
            range: Interval::point(mu.clone()),
            outcome: MuOutcome::Point {
                value: h_u(23, &mu, &tol)?,
                sign: -1,
            },
        });
    }
    out.push(MuCheck {
        name: "hl23-157/80".into(),
        claim: "h_l(23, 157/80) > 0".into(),
        range: Interval::point(mu_min()),
        outcome: MuOutcome::Point {
            value: Interval::point(h_l(23, &mu_min())?),
            sign: 1,
        },
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn y_mu_examples() {
        assert_eq!(y_mu(&int(32)), rat(7, 332));
        assert_eq!(y_mu_branch(&int(32), Branch::Low) - y_mu(&int(32)), rat(3, 500));
        assert_eq!(x_mu(&int(32)), rat(224, 332));
    }

    #[test]
    fn xy_polys_match() {
        for branch in [Branch::Low, Branch::High] {
            let (x, y, d) = xy_polys(branch);
            for mu in [rat(157, 80), int(5), int(40)] {
                let den = d.eval(&mu);
                assert_eq!(y.eval(&mu) / &den, y_mu_branch(&mu, branch));
                assert_eq!(x.eval(&mu) / &den, &mu * y_mu_branch(&mu, branch));
            }
        }
    }

    #[test]
    fn h_l_numerator_sign_matches() {
        for mu in [rat(157, 80), int(3), int(20)] {
            let n = h_l_numerator(23, Branch::Low).eval(&mu);
            let h = h_l(23, &mu).unwrap();
            assert_eq!(crate::numeric::sign(&n), crate::numeric::sign(&h));
        }
    }

    #[test]
    fn critical_signs_at_23() {
        let tol = ten_pow_neg(30);
        assert!(h_u(23, &mu_min(), &tol).unwrap().is_negative());
        assert!(h_u(23, &int(32), &tol).unwrap().is_negative());
        assert!(h_l(23, &mu_min()).unwrap() > crate::numeric::int(0));
    }

    #[test]
    fn mu_suite_holds() {
        let checks = mu_suite_checks(&MuSuiteConfig::default()).unwrap();
        assert!(checks.iter().all(|c| c.holds()), "{checks:?}");
    }

    #[test]
    fn psi_symmetry_point() {
        for d in [23.0, 40.0] {
            assert_eq!(psi(d, 1.0 / 3.0 + 0.0) - psi(d, 1.0 / 3.0 - 0.0), 0.0);
        }
    }
}
