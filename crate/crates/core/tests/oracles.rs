//! Expected values recomputed by independent means: hand enumeration,
//! direct formula substitution, full scans and dense sampling.

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use potts_core::bounds::{
    beta_star, f_l, f_u, fixed_point_iterate, iterate_bounds, verify_sequence_report, SeqMode,
};
use potts_core::bounds::derivatives::{derivative_spotcheck, identity};
use potts_core::condition::{
    check_condition_over, enumerate_ex, locate_condition_failure, max_h_extremal, phi_eval,
    phi_star, reduce_extremal_to_phi, tuple_rational_function, ExtremalTuple,
};
use potts_core::model::{
    brute_force_root_marginal, g_eval, gamma_exact, h_eval, one_step_marginal,
    recursion_root_marginal, two_step_identity_check, BoundaryConfig, ModelParams,
};
use potts_core::numeric::{
    int, nth_root_enclosure, pow_half_integer_tol, pow_int, rat, ten_pow_neg, Interval,
};
use potts_core::resolver::{prove_univariate, Poly, Strictness, UniRange};
use potts_core::{ProbVec, Rational};

fn rng() -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed)
}

#[test]
fn cube_root_of_two_against_bisection() {
    let e = nth_root_enclosure(&Interval::point(int(2)), 3, &ten_pow_neg(12)).unwrap();
    assert!(e.width() <= ten_pow_neg(12));
    // Bisect t^3 - 2 on [1, 2] to width 1e-15 and check containment.
    let (mut lo, mut hi) = (int(1), int(2));
    while &hi - &lo > ten_pow_neg(15) {
        let mid = (&lo + &hi) / int(2);
        if pow_int(&mid, 3) < int(2) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!(e.lo() <= &lo && &hi <= e.hi());
}

#[test]
fn quarter_to_three_halves() {
    let e = pow_half_integer_tol(&Interval::point(rat(1, 4)), 3, true, &ten_pow_neg(20)).unwrap();
    assert!(e.contains(&rat(1, 8)));
    assert!(e.width() <= ten_pow_neg(20));
    assert_eq!(pow_int(&rat(23, 26), 3), rat(12167, 17576));
}

#[test]
fn one_level_hand_enumeration() {
    // Root colour c has weight prod_children (beta if same else 1).
    let beta = rat(1, 2);
    let w: Vec<Rational> = (0..3).map(|c| if c == 0 { &beta * &beta } else { int(1) }).collect();
    let z: Rational = w.iter().sum();
    let want: ProbVec = w.iter().map(|x| x / &z).collect();
    assert_eq!(want, vec![rat(1, 9), rat(4, 9), rat(4, 9)]);
    let p = ModelParams::new(3, 2, beta.clone(), 1).unwrap();
    let tau = BoundaryConfig::new(vec![0, 0]);
    assert_eq!(recursion_root_marginal(&p, &tau).unwrap(), want);
    assert_eq!(brute_force_root_marginal(&p, &tau, 1 << 20).unwrap(), want);
}

#[test]
fn random_children_match_brute_force() {
    let mut r = rng();
    let p = ModelParams::new(3, 2, rat(2, 5), 2).unwrap();
    for _ in 0..50 {
        let tau = BoundaryConfig::new((0..4).map(|_| r.gen_range(0..3u8)).collect());
        // Children marginals from the recursion, combined by hand.
        let kids: Vec<ProbVec> = (0..2)
            .map(|k| {
                let sub = ModelParams::new(3, 2, rat(2, 5), 1).unwrap();
                recursion_root_marginal(&sub, &BoundaryConfig::new(tau.colours[2 * k..2 * k + 2].to_vec())).unwrap()
            })
            .collect();
        let combined = one_step_marginal(&kids, &rat(2, 5)).unwrap();
        assert_eq!(combined, brute_force_root_marginal(&p, &tau, 1 << 20).unwrap());
    }
}

#[test]
fn g_and_h_direct_formula() {
    let beta = rat(1, 4);
    let alpha = int(2);
    let v: ProbVec = vec![&alpha / int(4), rat(1, 4), rat(1, 4)];
    let tuple = vec![v.clone(), v];
    // factor = 1 - (3/4)(p1 - p2) / (beta p2 + p1 + p3) with p = (2,1,1)/4
    let factor = Rational::one() - rat(3, 4) * rat(1, 4) / (rat(1, 16) + rat(3, 4));
    assert_eq!(factor, rat(10, 13));
    let g = g_eval(0, 1, &beta, &tuple).unwrap();
    assert_eq!(g, rat(100, 169));
    let g3 = g_eval(2, 1, &beta, &tuple).unwrap();
    assert_eq!(g3, rat(1, 1));
    let h = Rational::one() + rat(3, 4) * (Rational::one() - &g) / (&beta + &g + &g3);
    assert_eq!(h_eval(0, 1, &beta, &tuple).unwrap(), h);
}

#[test]
fn gamma_one_level_and_decrease() {
    let g1 = gamma_exact(&ModelParams::new(3, 2, rat(1, 2), 1).unwrap(), 1 << 30).unwrap();
    assert_eq!(g1.value, int(4));
    let vals: Vec<Rational> = (2..=4)
        .map(|n| gamma_exact(&ModelParams::new(3, 2, rat(1, 2), n).unwrap(), 1 << 40).unwrap().value)
        .collect();
    assert!(vals[1] <= vals[0] && vals[2] <= vals[1]);
    assert!(vals[2] < vals[0]);
}

#[test]
fn two_step_example_boundary() {
    let p = ModelParams::new(3, 2, rat(1, 3), 2).unwrap();
    let tau = BoundaryConfig::new(vec![0, 1, 2, 0]);
    for (c1, c2) in [(0, 1), (1, 2), (2, 0)] {
        let t = two_step_identity_check(&p, &tau, c1, c2).unwrap();
        assert!(t.equal, "{t:?}");
    }
}

fn f_u_direct(d: u32, b: &Rational, x: &Rational, y: &Rational) -> Rational {
    let o = Rational::one() - b;
    let a = Rational::one() - &o * x;
    let yy = Rational::one() - &o * y;
    let c = Rational::one() - &o * (Rational::one() - x - y);
    let yd = pow_int(&yy, d);
    &yd / (&yd + int(2) * pow_int(&(a * c), d / 2))
}

fn f_l_direct(d: u32, b: &Rational, x: &Rational, y: &Rational) -> Rational {
    let o = Rational::one() - b;
    let a = pow_int(&(Rational::one() - &o * x), d);
    let yy = pow_int(&(Rational::one() - &o * y), d);
    let c = pow_int(&(Rational::one() - &o * (Rational::one() - x - y)), d);
    &a / (&a + yy + c)
}

#[test]
fn bound_maps_by_substitution() {
    let (x, y) = (rat(1106, 2500), rat(460, 2000));
    let got = f_u(2, &rat(1, 2), &x, &y, &ten_pow_neg(30)).unwrap();
    assert_eq!(got.as_point(), Some(&f_u_direct(2, &rat(1, 2), &x, &y)));
    assert_eq!(f_l(3, &rat(1, 4), &rat(1, 2), &rat(1, 5)).unwrap(), f_l_direct(3, &rat(1, 4), &rat(1, 2), &rat(1, 5)));
    // x = y = 1/3 is fixed.
    let third = rat(1, 3);
    assert_eq!(f_l(5, &rat(1, 7), &third, &third).unwrap(), third);
    assert!(f_u(5, &rat(1, 7), &third, &third, &ten_pow_neg(30)).unwrap().contains(&third));
}

#[test]
fn exact_sequence_recomputed() {
    let beta = beta_star(3, 4);
    let s = iterate_bounds(4, &beta, 4, &SeqMode::exact()).unwrap();
    let (mut u, mut l) = (int(1), int(0));
    for e in &s.entries {
        assert!(e.u.contains(&u) && e.l.contains(&l), "n = {}", e.n);
        let nu = f_u_direct(4, &beta, &u, &l);
        l = f_l_direct(4, &beta, &u, &l);
        u = nu;
    }
    assert!(verify_sequence_report(&iterate_bounds(5, &beta_star(3, 5), 3, &SeqMode::exact()).unwrap(), None).all_pass());
}

#[test]
fn rounded_sequence_dominates_exact_run() {
    let beta = beta_star(3, 4);
    let exact = iterate_bounds(4, &beta, 4, &SeqMode::exact()).unwrap();
    let rounded = iterate_bounds(4, &beta, 20, &SeqMode::rounded(10000)).unwrap();
    for (e, r) in exact.entries.iter().zip(&rounded.entries) {
        assert!(r.u.lo() >= e.u.hi() && r.l.hi() <= e.l.lo(), "n = {}", e.n);
    }
}

#[test]
fn fixed_point_limit_is_in_bracket() {
    for beta in [rat(1, 4), rat(1, 2), rat(3, 4)] {
        let fp = fixed_point_iterate(2, &beta, &ten_pow_neg(9), 1_000_000).unwrap();
        assert!(fp.u <= rat(1107, 2500) && fp.l >= rat(459, 2000), "{fp:?}");
    }
}

#[test]
fn spotchecks_at_named_points() {
    let fb = identity("fbetamono-fu").unwrap();
    let c = derivative_spotcheck(&fb, &[4.0, 0.5, 0.2, 1.0 / 3.0], 1e-4).unwrap();
    assert!(c.pass && c.residual <= 1e-6, "{c:?}");
    let dh = identity("Dhud").unwrap();
    let c = derivative_spotcheck(&dh, &[30.0, 2.0], 1e-4).unwrap();
    assert!(c.pass && c.residual <= 1e-6, "{c:?}");
}

#[test]
fn ex_sets_by_brute_enumeration() {
    let alpha = rat(3, 2);
    for q in 3..=5usize {
        for c in 0..q {
            let mut want = Vec::new();
            for mask in 0..(1u32 << q) {
                let v: ProbVec = (0..q).map(|i| if mask >> i & 1 == 1 { alpha.clone() } else { int(1) }).collect();
                if v[c] == int(1) && v.iter().any(|x| x == &alpha) {
                    want.push(v);
                }
            }
            let mut got = enumerate_ex(q, c, &alpha).unwrap();
            got.sort();
            want.sort();
            assert_eq!(got, want);
            assert_eq!(got.len(), (1 << (q - 1)) - 1);
        }
    }
}

#[test]
fn extremal_max_against_full_scan() {
    let (alpha, beta) = (rat(3, 2), rat(1, 4));
    let ex = enumerate_ex(3, 2, &alpha).unwrap();
    let mut best = None::<Rational>;
    for a in &ex {
        for b in &ex {
            for c in &ex {
                let h = h_eval(0, 2, &beta, &[a.clone(), b.clone(), c.clone()]).unwrap();
                if best.as_ref().is_none_or(|v| &h > v) {
                    best = Some(h);
                }
            }
        }
    }
    assert_eq!(max_h_extremal(3, 3, &alpha, 0, 2, &beta).unwrap().value, best.unwrap());
}

#[test]
fn failure_for_d2_by_bisection() {
    let f = locate_condition_failure(3, 2, &rat(53, 27), &int(1000), &rat(1, 1 << 20)).unwrap().unwrap();
    assert!(f.fails_at > rat(53, 27));
    // Violation verified independently: h > 0 and h^2 >= alpha at the tuple.
    let h = h_eval(0, 2, &Rational::zero(), &f.tuple.vectors()).unwrap();
    assert!(h.is_positive() && &h * &h > f.fails_at);
    // The holding side really holds: every extremal tuple is below.
    let ok = max_h_extremal(3, 2, &f.holds_at, 0, 2, &Rational::zero()).unwrap().value;
    assert!(&ok * &ok < f.holds_at);
}

#[test]
fn condition_on_wide_range_for_d3() {
    let (v, r) = check_condition_over(3, 3, &int(1), &int(100), 1 << 20).unwrap();
    assert!(v.is_holds(), "{r:?}");
}

#[test]
fn phi_equals_h_on_encoded_tuples() {
    let mut r = rng();
    for _ in 0..50 {
        let d = r.gen_range(1..=6usize);
        let d0 = r.gen_range(0..=d);
        let d1 = r.gen_range(0..=d - d0);
        let alpha = rat(r.gen_range(101..400), 100);
        let beta = rat(r.gen_range(0..100), 100);
        let mut pats = vec![0b011u32; d0];
        pats.extend(vec![0b001; d1]);
        pats.extend(vec![0b010; d - d0 - d1]);
        let t = ExtremalTuple::new(3, alpha.clone(), 2, pats).unwrap();
        assert_eq!(h_eval(0, 2, &beta, &t.vectors()).unwrap(), phi_eval(d, d0, d1, &alpha, &beta).unwrap());
    }
}

#[test]
fn phi_star_hand_substitution() {
    let (x, y) = (rat(23, 26), rat(19, 22));
    assert_eq!(x, Rational::one() - rat(3, 4) * rat(1, 2) / rat(13, 4));
    assert_eq!(y, Rational::one() - rat(3, 4) * rat(1, 2) / rat(11, 4));
    let want = Rational::one() + rat(3, 4) * (Rational::one() - &x * &y * &y) / (rat(1, 4) + &x * (&y * &y + int(1)));
    assert_eq!(phi_star(3, 1, &rat(3, 2)).unwrap(), want);
    assert_eq!(phi_eval(3, 1, 2, &rat(3, 2), &rat(1, 4)).unwrap(), want);
}

#[test]
fn reduction_matches_classification() {
    let mut r = rng();
    for _ in 0..100 {
        let d = r.gen_range(1..=6usize);
        let c2 = r.gen_range(0..3usize);
        let c1 = (c2 + r.gen_range(1..3)) % 3;
        let c3 = 3 - c1 - c2;
        let alpha = rat(r.gen_range(101..300), 100);
        let pats: Vec<u32> = (0..d)
            .map(|_| [1u32 << c1 | 1 << c3, 1 << c1, 1 << c3][r.gen_range(0..3)])
            .collect();
        let t = ExtremalTuple::new(3, alpha.clone(), c2, pats.clone()).unwrap();
        let d0 = pats.iter().filter(|&&m| m == (1 << c1 | 1 << c3)).count();
        let d1 = pats.iter().filter(|&&m| m == 1 << c1).count();
        assert_eq!(reduce_extremal_to_phi(&t, c1).unwrap(), (d0, d1));
        let beta = rat(r.gen_range(0..100), 100);
        assert_eq!(h_eval(c1, c2, &beta, &t.vectors()).unwrap(), phi_eval(d, d0, d1, &alpha, &beta).unwrap());
    }
}

#[test]
fn phi_star_margin_polynomial_against_sampling() {
    let (p, q) = tuple_rational_function(3, 0, 2, &beta_star(3, 2), &[0b011, 0b001]);
    let margin = p.pow(2).sub(&q.pow(2).mul(&Poly::x()));
    let range = UniRange::left_open(int(1), rat(53, 27));
    let v = prove_univariate(&margin, &range, Strictness::Strict, &[]).unwrap();
    assert!(v.is_holds());
    let closed = UniRange::closed(int(1), rat(53, 27));
    assert!(prove_univariate(&margin, &closed, Strictness::Strict, &[int(1)]).unwrap().is_holds());
    for k in 1..=10_000i64 {
        let a = int(1) + rat(26 * k, 27 * 10_000);
        let phi = phi_star(2, 1, &a).unwrap();
        assert!(&phi * &phi < a, "alpha = {a}");
        assert!(margin.eval(&a).is_negative());
    }
    assert!(margin.eval(&int(1)).is_zero());
}

#[test]
fn simplified_certificate_replays() {
    use potts_core::resolver::{prove_on_box, replay_certificate, EvalOptions, ExprDag, Relation, SearchConfig};
    let e = ExprDag::parse("(- (+ (* x x) (* y y)) 3)", &["x", "y"]).unwrap();
    let dom = vec![Interval::spanning(int(-1), int(1)), Interval::spanning(int(0), int(1))];
    let v = prove_on_box(&e, &dom, Relation::Lt, &SearchConfig::with_budget(1000)).unwrap();
    let cert = v.certificate().unwrap().clone();
    // Rational round trip through text normalises every endpoint.
    let text = serde_json::to_string(&cert).unwrap();
    let back = serde_json::from_str(&text).unwrap();
    assert!(replay_certificate(&back, &EvalOptions::default()).unwrap());
}
