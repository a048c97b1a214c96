//! Expression DAGs over named real variables.
//!
//! Text format (prefix, S-expression style):
//!
//! ```text
//! expr   := number | name | "(" op expr* ")"
//! number := integer | p/q | decimal | decimal "e" exponent     (exact)
//! op     := "+" | "-" | "*" | "/" | "^" | "sqrt" | "root"
//! ```
//!
//! * `(+ a b ...)`, `(* a b ...)`, `(- a b ...)`, `(/ a b ...)` take two or
//!   more operands, folded from the left;
//! * `(- a)` is negation;
//! * `(^ a k)` raises to a non-negative integer literal `k`;
//! * `(sqrt a)` and `(root n a)` are the principal square / `n`-th root.
//!
//! Example: `(- (/ (* (- 8 y) (+ (* 2 x) y -1)) (* (- 8 x) (+ (* 2 x) y 22))) 1/24)`.

use std::collections::HashMap;
use std::fmt::Write as _;

use num_bigint::BigInt;

use super::ResolverError;
use crate::numeric::{
    format_rational, int, nth_root_enclosure, parse_rational, rat, ten_pow, ten_pow_neg, to_f64,
    Interval, Rational,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Node {
    Var(usize),
    Const(Rational),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Neg(usize),
    Pow(usize, u32),
    Sqrt(usize),
    Root(usize, u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExprDag {
    nodes: Vec<Node>,
    vars: Vec<String>,
    root: usize,
}

/// Failed domain guard during interval evaluation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Guard {
    pub node: usize,
    pub op: &'static str,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvalOptions {
    /// Endpoints with a larger denominator are rounded outward after every node.
    pub denominator_bound: Option<BigInt>,
    /// Width added per side by root enclosures.
    pub root_tol: Rational,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            denominator_bound: Some(ten_pow(18)),
            root_tol: ten_pow_neg(30),
        }
    }
}

impl EvalOptions {
    pub fn exact() -> Self {
        EvalOptions {
            denominator_bound: None,
            root_tol: ten_pow_neg(40),
        }
    }
}

/// Handle to a node under construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct E(usize);

#[derive(Default)]
pub struct ExprBuilder {
    nodes: Vec<Node>,
    vars: Vec<String>,
    memo: HashMap<Node, usize>,
}

impl ExprBuilder {
    pub fn new(vars: &[&str]) -> Self {
        ExprBuilder {
            nodes: Vec::new(),
            vars: vars.iter().map(|s| s.to_string()).collect(),
            memo: HashMap::new(),
        }
    }

    fn push(&mut self, n: Node) -> E {
        if let Some(&i) = self.memo.get(&n) {
            return E(i);
        }
        let i = self.nodes.len();
        self.nodes.push(n.clone());
        self.memo.insert(n, i);
        E(i)
    }

    pub fn var(&mut self, name: &str) -> E {
        let i = self
            .vars
            .iter()
            .position(|v| v == name)
            .unwrap_or_else(|| panic!("undeclared variable {name}"));
        self.push(Node::Var(i))
    }

    pub fn constant(&mut self, x: Rational) -> E {
        self.push(Node::Const(x))
    }

    pub fn int(&mut self, n: i64) -> E {
        self.constant(int(n))
    }

    pub fn rat(&mut self, n: i64, d: i64) -> E {
        self.constant(rat(n, d))
    }

    pub fn add(&mut self, a: E, b: E) -> E {
        self.push(Node::Add(a.0, b.0))
    }

    pub fn sub(&mut self, a: E, b: E) -> E {
        self.push(Node::Sub(a.0, b.0))
    }

    pub fn mul(&mut self, a: E, b: E) -> E {
        self.push(Node::Mul(a.0, b.0))
    }

    pub fn div(&mut self, a: E, b: E) -> E {
        self.push(Node::Div(a.0, b.0))
    }

    pub fn neg(&mut self, a: E) -> E {
        self.push(Node::Neg(a.0))
    }

    pub fn pow(&mut self, a: E, k: u32) -> E {
        self.push(Node::Pow(a.0, k))
    }

    pub fn sqrt(&mut self, a: E) -> E {
        self.push(Node::Sqrt(a.0))
    }

    pub fn root(&mut self, a: E, n: u32) -> E {
        self.push(Node::Root(a.0, n))
    }

    pub fn finish(self, root: E) -> ExprDag {
        ExprDag {
            nodes: self.nodes,
            vars: self.vars,
            root: root.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open,
    Close,
    Atom(String),
}

fn tokenize(s: &str) -> Vec<Tok> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let flush = |cur: &mut String, out: &mut Vec<Tok>| {
        if !cur.is_empty() {
            out.push(Tok::Atom(std::mem::take(cur)));
        }
    };
    for ch in s.chars() {
        match ch {
            '(' => {
                flush(&mut cur, &mut out);
                out.push(Tok::Open);
            }
            ')' => {
                flush(&mut cur, &mut out);
                out.push(Tok::Close);
            }
            c if c.is_whitespace() => flush(&mut cur, &mut out),
            c => cur.push(c),
        }
    }
    flush(&mut cur, &mut out);
    out
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    b: ExprBuilder,
    vars: &'a [&'a str],
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> ResolverError {
        ResolverError::Parse(format!("{msg} at token {}", self.pos))
    }

    fn atom_int(&mut self) -> Result<u32, ResolverError> {
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Atom(a)) => {
                self.pos += 1;
                a.parse().map_err(|_| self.err("expected a non-negative integer"))
            }
            _ => Err(self.err("expected a non-negative integer")),
        }
    }

    fn expr(&mut self) -> Result<E, ResolverError> {
        match self.toks.get(self.pos).cloned() {
            None => Err(self.err("unexpected end of input")),
            Some(Tok::Close) => Err(self.err("unexpected ')'")),
            Some(Tok::Atom(a)) => {
                self.pos += 1;
                if let Some(i) = self.vars.iter().position(|v| *v == a) {
                    return Ok(self.b.push(Node::Var(i)));
                }
                let x = parse_rational(&a).map_err(|_| self.err(&format!("unknown name {a:?}")))?;
                Ok(self.b.constant(x))
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let op = match self.toks.get(self.pos).cloned() {
                    Some(Tok::Atom(op)) => op,
                    _ => return Err(self.err("expected an operator")),
                };
                self.pos += 1;
                let e = match op.as_str() {
                    "^" => {
                        let a = self.expr()?;
                        let k = self.atom_int()?;
                        self.b.pow(a, k)
                    }
                    "root" => {
                        let n = self.atom_int()?;
                        if n == 0 {
                            return Err(self.err("zeroth root"));
                        }
                        let a = self.expr()?;
                        self.b.root(a, n)
                    }
                    "sqrt" => {
                        let a = self.expr()?;
                        self.b.sqrt(a)
                    }
                    "+" | "-" | "*" | "/" => {
                        let mut args = Vec::new();
                        while self.toks.get(self.pos) != Some(&Tok::Close) {
                            if self.pos >= self.toks.len() {
                                return Err(self.err("unclosed '('"));
                            }
                            args.push(self.expr()?);
                        }
                        match (op.as_str(), args.len()) {
                            ("-", 1) => self.b.neg(args[0]),
                            (_, n) if n >= 2 => {
                                // Left fold: (- a b c) is (a - b) - c.
                                let mut acc = args[0];
                                for &a in &args[1..] {
                                    acc = match op.as_str() {
                                        "+" => self.b.add(acc, a),
                                        "-" => self.b.sub(acc, a),
                                        "*" => self.b.mul(acc, a),
                                        _ => self.b.div(acc, a),
                                    };
                                }
                                acc
                            }
                            _ => return Err(self.err(&format!("wrong arity for {op}"))),
                        }
                    }
                    other => return Err(self.err(&format!("unknown operator {other:?}"))),
                };
                if self.toks.get(self.pos) != Some(&Tok::Close) {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
        }
    }
}

impl ExprDag {
    pub fn parse(text: &str, vars: &[&str]) -> Result<ExprDag, ResolverError> {
        let mut p = Parser {
            toks: tokenize(text),
            pos: 0,
            b: ExprBuilder::new(vars),
            vars,
        };
        let root = p.expr()?;
        if p.pos != p.toks.len() {
            return Err(p.err("trailing input"));
        }
        Ok(p.b.finish(root))
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn var_count(&self) -> usize {
        self.vars.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn to_prefix(&self) -> String {
        let mut s = String::new();
        self.write_node(self.root, &mut s);
        s
    }

    fn write_node(&self, i: usize, s: &mut String) {
        let bin = |s: &mut String, op: &str, a: usize, b: usize| {
            let _ = write!(s, "({op} ");
            self.write_node(a, s);
            s.push(' ');
            self.write_node(b, s);
            s.push(')');
        };
        match &self.nodes[i] {
            Node::Var(v) => s.push_str(&self.vars[*v]),
            Node::Const(x) => s.push_str(&format_rational(x)),
            Node::Add(a, b) => bin(s, "+", *a, *b),
            Node::Sub(a, b) => bin(s, "-", *a, *b),
            Node::Mul(a, b) => bin(s, "*", *a, *b),
            Node::Div(a, b) => bin(s, "/", *a, *b),
            Node::Neg(a) => {
                s.push_str("(- ");
                self.write_node(*a, s);
                s.push(')');
            }
            Node::Pow(a, k) => {
                s.push_str("(^ ");
                self.write_node(*a, s);
                let _ = write!(s, " {k})");
            }
            Node::Sqrt(a) => {
                s.push_str("(sqrt ");
                self.write_node(*a, s);
                s.push(')');
            }
            Node::Root(a, n) => {
                let _ = write!(s, "(root {n} ");
                self.write_node(*a, s);
                s.push(')');
            }
        }
    }

    /// Natural interval extension. Nodes are stored in topological order.
    pub fn eval_interval(&self, point: &[Interval], opts: &EvalOptions) -> Result<Interval, Guard> {
        let mut vals: Vec<Interval> = Vec::with_capacity(self.root + 1);
        for (i, n) in self.nodes.iter().enumerate().take(self.root + 1) {
            let v = match n {
                Node::Var(k) => point[*k].clone(),
                Node::Const(x) => Interval::point(x.clone()),
                Node::Add(a, b) => vals[*a].add(&vals[*b]),
                Node::Sub(a, b) => vals[*a].sub(&vals[*b]),
                Node::Mul(a, b) => {
                    if a == b {
                        vals[*a].pow_int(2)
                    } else {
                        vals[*a].mul(&vals[*b])
                    }
                }
                Node::Div(a, b) => vals[*a]
                    .div(&vals[*b])
                    .map_err(|_| Guard { node: i, op: "/" })?,
                Node::Neg(a) => vals[*a].neg(),
                Node::Pow(a, k) => vals[*a].pow_int(*k),
                Node::Sqrt(a) => nth_root_enclosure(&vals[*a], 2, &opts.root_tol)
                    .map_err(|_| Guard { node: i, op: "sqrt" })?,
                Node::Root(a, k) => nth_root_enclosure(&vals[*a], *k, &opts.root_tol)
                    .map_err(|_| Guard { node: i, op: "root" })?,
            };
            let v = match &opts.denominator_bound {
                Some(b) => v.simplify(b),
                None => v,
            };
            vals.push(v);
        }
        Ok(vals.swap_remove(self.root))
    }

    /// Exact evaluation at a rational point (an enclosure only when roots occur).
    pub fn eval_point(&self, point: &[Rational]) -> Result<Interval, Guard> {
        let p: Vec<Interval> = point.iter().cloned().map(Interval::point).collect();
        self.eval_interval(&p, &EvalOptions::exact())
    }

    /// Plain floating-point evaluation (no guarantees; for sampling).
    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        let mut vals: Vec<f64> = Vec::with_capacity(self.root + 1);
        for n in self.nodes.iter().take(self.root + 1) {
            let v = match n {
                Node::Var(k) => point[*k],
                Node::Const(x) => to_f64(x),
                Node::Add(a, b) => vals[*a] + vals[*b],
                Node::Sub(a, b) => vals[*a] - vals[*b],
                Node::Mul(a, b) => vals[*a] * vals[*b],
                Node::Div(a, b) => vals[*a] / vals[*b],
                Node::Neg(a) => -vals[*a],
                Node::Pow(a, k) => vals[*a].powi(*k as i32),
                Node::Sqrt(a) => vals[*a].sqrt(),
                Node::Root(a, k) => vals[*a].powf(1.0 / *k as f64),
            };
            vals.push(v);
        }
        vals[self.root]
    }

    /// True when the expression is a constant (no variables reachable).
    pub fn is_constant(&self) -> bool {
        !self.nodes[..=self.root].iter().any(|n| matches!(n, Node::Var(_)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n_ary_minus_folds_left() {
        let e = ExprDag::parse("(- 10 x 3)", &["x"]).unwrap();
        let f = ExprDag::parse("(/ 12 x 3)", &["x"]).unwrap();
        let at = |e: &ExprDag| e.eval_interval(&[Interval::from_int(2)], &EvalOptions::default()).unwrap();
        assert_eq!(at(&e), Interval::from_int(5));
        assert_eq!(at(&f), Interval::from_int(2));
    }

    #[test]
    fn parse_and_print_round_trip() {
        let text = "(- (/ (* (- 8 y) (+ (* 2 x) y -1)) (* (- 8 x) (+ (* 2 x) y 22))) 1/24)";
        let e = ExprDag::parse(text, &["x", "y"]).unwrap();
        let again = ExprDag::parse(&e.to_prefix(), &["x", "y"]).unwrap();
        let pt = [rat(1, 2), rat(1, 5)];
        assert_eq!(e.eval_point(&pt).unwrap(), again.eval_point(&pt).unwrap());
    }

    #[test]
    fn parse_errors() {
        assert!(ExprDag::parse("(+ x)", &["x"]).is_err());
        assert!(ExprDag::parse("(+ x z)", &["x"]).is_err());
        assert!(ExprDag::parse("(^ x y)", &["x", "y"]).is_err());
        assert!(ExprDag::parse("(+ x 1", &["x"]).is_err());
        assert!(ExprDag::parse("x 1", &["x"]).is_err());
    }

    #[test]
    fn interval_eval_encloses_points() {
        let e = ExprDag::parse("(+ (sqrt x) (root 3 (* x x)) (/ 1 (+ x 1)))", &["x"]).unwrap();
        let b = [Interval::new(rat(1, 2), int(2)).unwrap()];
        let enc = e.eval_interval(&b, &EvalOptions::default()).unwrap();
        for k in 0..=10 {
            let x = rat(1, 2) + rat(3, 20) * int(k);
            let v = e.eval_point(&[x]).unwrap();
            assert!(enc.contains_interval(&v));
        }
    }

    #[test]
    fn guards_fire() {
        let e = ExprDag::parse("(/ 1 x)", &["x"]).unwrap();
        let b = [Interval::new(int(-1), int(1)).unwrap()];
        assert_eq!(e.eval_interval(&b, &EvalOptions::default()).unwrap_err().op, "/");
        let e = ExprDag::parse("(sqrt x)", &["x"]).unwrap();
        assert!(e.eval_interval(&b, &EvalOptions::default()).is_err());
    }
}
