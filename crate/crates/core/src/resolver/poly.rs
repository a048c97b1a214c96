//! Dense univariate polynomials with rational coefficients.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::numeric::{format_rational, int, serde_rational, Interval, Rational};

/// Coefficients in ascending order; no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    #[serde(with = "serde_rational::vec")]
    c: Vec<Rational>,
}

impl Poly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        Poly { c }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Poly::new(c.iter().map(|&x| int(x)).collect())
    }

    pub fn zero() -> Self {
        Poly { c: Vec::new() }
    }

    pub fn constant(x: Rational) -> Self {
        Poly::new(vec![x])
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    /// The identity polynomial `x`.
    pub fn x() -> Self {
        Poly::new(vec![Rational::zero(), Rational::one()])
    }

    /// `a + b x`.
    pub fn linear(a: Rational, b: Rational) -> Self {
        Poly::new(vec![a, b])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.c
    }

    pub fn degree(&self) -> Option<usize> {
        self.c.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    pub fn leading(&self) -> Rational {
        self.c.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        if self.is_zero() {
            return Rational::zero();
        }
        // Integer Horner on numerators: den * b^n * p(a/b).
        let (c, den) = self.integer_parts();
        let (a, b) = (x.numer(), x.denom());
        let n = c.len() - 1;
        let mut acc = c[n].clone();
        let mut bp = BigInt::one();
        for ci in c[..n].iter().rev() {
            bp *= b;
            acc = acc * a + ci * &bp;
        }
        Rational::new(acc, den * bp)
    }

    /// Horner-form interval extension.
    pub fn eval_interval(&self, x: &Interval) -> Interval {
        let mut acc = Interval::point(Rational::zero());
        for a in self.c.iter().rev() {
            acc = acc.mul(x).add_scalar(a);
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, a)| a * int(i as i64))
                .collect(),
        )
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.c.len().max(o.c.len());
        let z = Rational::zero();
        Poly::new(
            (0..n)
                .map(|i| self.c.get(i).unwrap_or(&z) + o.c.get(i).unwrap_or(&z))
                .collect(),
        )
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Poly {
        Poly {
            c: self.c.iter().map(|a| -a).collect(),
        }
    }

    pub fn scale(&self, k: &Rational) -> Poly {
        Poly::new(self.c.iter().map(|a| a * k).collect())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.is_zero() || o.is_zero() {
            return Poly::zero();
        }
        // Multiply integer numerators over a common denominator: far cheaper
        // than normalising a rational at every step.
        let (a, da) = self.integer_parts();
        let (b, db) = o.integer_parts();
        let mut c = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                c[i + j] += x * y;
            }
        }
        let den = da * db;
        Poly::new(c.into_iter().map(|x| Rational::new(x, den.clone())).collect())
    }

    /// Integer numerators over the least common denominator.
    fn integer_parts(&self) -> (Vec<BigInt>, BigInt) {
        let den = self.c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let nums = self
            .c
            .iter()
            .map(|x| x.numer() * (&den / x.denom()))
            .collect();
        (nums, den)
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Euclidean division: `self = q * o + r`, `deg r < deg o`.
    pub fn div_rem(&self, o: &Poly) -> (Poly, Poly) {
        assert!(!o.is_zero(), "polynomial division by zero");
        let mut r = self.c.clone();
        let dn = o.c.len() - 1;
        if r.len() <= dn {
            return (Poly::zero(), self.clone());
        }
        let lead = o.leading();
        let mut q = vec![Rational::zero(); r.len() - dn];
        for i in (0..q.len()).rev() {
            let coef = &r[i + dn] / &lead;
            if !coef.is_zero() {
                for (j, b) in o.c.iter().enumerate() {
                    r[i + j] -= &coef * b;
                }
            }
            q[i] = coef;
        }
        r.truncate(dn);
        (Poly::new(q), Poly::new(r))
    }

    /// Positive rational multiple with coprime integer coefficients.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return Poly::zero();
        }
        let ints = self.integer_coeffs();
        Poly::new(ints.into_iter().map(Rational::from_integer).collect())
    }

    /// Integer coefficients of the primitive positive multiple.
    pub fn integer_coeffs(&self) -> Vec<BigInt> {
        let den = self
            .c
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = self
            .c
            .iter()
            .map(|x| (x * Rational::from_integer(den.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() || g.is_one() {
            return ints;
        }
        ints.into_iter().map(|x| x / &g).collect()
    }

    pub fn gcd(&self, o: &Poly) -> Poly {
        let (mut a, mut b) = (self.primitive(), o.primitive());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r.primitive();
        }
        a
    }

    /// Product of the distinct irreducible factors (up to a constant).
    pub fn square_free(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        if g.degree().unwrap_or(0) == 0 {
            return self.primitive();
        }
        self.div_rem(&g).0.primitive()
    }

    /// Synthetic division by `(x - r)`: quotient and remainder `p(r)`.
    pub fn divide_by_root(&self, r: &Rational) -> (Poly, Rational) {
        if self.is_zero() {
            return (Poly::zero(), Rational::zero());
        }
        let n = self.c.len();
        if r.is_integer() && self.c.iter().all(|x| x.is_integer()) {
            let r = r.numer();
            let mut q = vec![Rational::zero(); n - 1];
            let mut acc = BigInt::zero();
            for i in (0..n).rev() {
                acc = acc * r + self.c[i].numer();
                if i > 0 {
                    q[i - 1] = Rational::from_integer(acc.clone());
                }
            }
            return (Poly::new(q), Rational::from_integer(acc));
        }
        let mut q = vec![Rational::zero(); n - 1];
        let mut acc = Rational::zero();
        for i in (0..n).rev() {
            acc = acc * r + &self.c[i];
            if i > 0 {
                q[i - 1] = acc.clone();
            }
        }
        (Poly::new(q), acc)
    }

    /// Removes every factor `(x - r)`; returns the cofactor and multiplicity.
    pub fn strip_root(&self, r: &Rational) -> (Poly, usize) {
        let mut p = self.clone();
        let mut m = 0;
        while !p.is_zero() {
            let (q, rem) = p.divide_by_root(r);
            if !rem.is_zero() {
                break;
            }
            p = q;
            m += 1;
        }
        (p, m)
    }

    /// Prefix expression in the documented text format, variable `var`.
    pub fn to_prefix(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let terms: Vec<String> = self
            .c
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| match i {
                0 => format_rational(a),
                1 => format!("(* {} {var})", format_rational(a)),
                _ => format!("(* {} (^ {var} {i}))", format_rational(a)),
            })
            .collect();
        if terms.len() == 1 {
            terms.into_iter().next().unwrap()
        } else {
            format!("(+ {})", terms.join(" "))
        }
    }

    pub fn sign_at(&self, x: &Rational) -> i32 {
        crate::numeric::sign(&self.eval(x))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, a) in self.c.iter().enumerate().rev() {
            if a.is_zero() {
                continue;
            }
            let s = format_rational(&a.abs());
            let sign = if a.is_negative() { "-" } else { "+" };
            if first {
                if a.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{s}")?,
                1 => write!(f, "{s}*x")?,
                _ => write!(f, "{s}*x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Rational function `num / den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFunc {
    pub num: Poly,
    pub den: Poly,
}

impl RatFunc {
    pub fn new(num: Poly, den: Poly) -> Self {
        RatFunc { num, den }
    }

    pub fn eval(&self, x: &Rational) -> Option<Rational> {
        let d = self.den.eval(x);
        (!d.is_zero()).then(|| self.num.eval(x) / d)
    }
}
