use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use pdecanon_core::{
    compose, invert_transform, lagrange_diagonalize, linalg, match_modulo, principal_matrix, pullback,
    pullback_consistency_check, residual_eval, scale_dependent, subst_params, AffineTransform, DerivKey, DiffMonomial, DiffPoly,
    Error, MPoly, MatchOutcome, Param, PowerProduct, PrincipalMatrix, RatFun, TestFunction, VarSet, Q,
};
use proptest::prelude::*;

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

fn small_poly(names: &'static [&'static str]) -> impl Strategy<Value = MPoly> {
    prop::collection::vec((prop::collection::vec(0u32..3, names.len()), -4i64..=4), 0..4).prop_map(move |terms| {
        MPoly::from_terms(terms.into_iter().map(|(exps, c)| {
            let pp = PowerProduct::from_pairs(names.iter().zip(exps).map(|(n, e)| (Param::from(*n), e)));
            (pp, q(c))
        }))
    })
}

const PARAMS: &[&str] = &["alpha", "beta"];

fn ratfun() -> impl Strategy<Value = RatFun> {
    (small_poly(PARAMS), small_poly(PARAMS))
        .prop_filter("nonzero denominator", |(_, d)| !d.is_zero())
        .prop_map(|(n, d)| RatFun::new(n, d).unwrap())
}

fn nonzero_ratfun() -> impl Strategy<Value = RatFun> {
    ratfun().prop_filter("nonzero", |r| !r.is_zero())
}

fn small_rational() -> impl Strategy<Value = Q> {
    (-9i64..=9, 1i64..=9).prop_map(|(n, d)| Q::new(n.into(), d.into()))
}

fn vars2() -> VarSet {
    VarSet::new(["t", "x"]).unwrap()
}

fn monomial(n: usize) -> impl Strategy<Value = DiffMonomial> {
    prop::collection::vec((prop::collection::vec(0u32..3, n), 1u32..3), 0..3)
        .prop_map(|fs| DiffMonomial::from_factors(fs.into_iter().map(|(o, e)| (DerivKey::from_orders(o), e))))
        .prop_filter("bounded weighted order", |m| m.weighted_order() <= 6)
}

fn coefficient() -> impl Strategy<Value = RatFun> {
    prop_oneof![
        (-5i64..=5).prop_map(RatFun::integer),
        (-3i64..=3, 1i64..=3).prop_map(|(a, b)| &RatFun::param("alpha") * &RatFun::ratio(a, b)),
        (-3i64..=3).prop_map(|a| &RatFun::param("beta") + &RatFun::integer(a)),
    ]
}

fn diffpoly(vars: VarSet) -> impl Strategy<Value = DiffPoly> {
    let n = vars.len();
    prop::collection::vec((monomial(n), coefficient()), 0..5)
        .prop_map(move |terms| DiffPoly::from_terms(&vars, terms))
}

fn transform2() -> impl Strategy<Value = AffineTransform> {
    transform_from(prop::collection::vec(coefficient(), 4))
}

fn transform_from(entries: impl Strategy<Value = Vec<RatFun>>) -> impl Strategy<Value = AffineTransform> {
    (entries, prop::collection::vec(-3i64..=3, 2))
        .prop_filter_map("invertible", |(m, o)| {
            let matrix = vec![vec![m[0].clone(), m[1].clone()], vec![m[2].clone(), m[3].clone()]];
            let t = AffineTransform::new(
                vars2(),
                VarSet::new(["t'", "x'"]).unwrap(),
                matrix,
                o.into_iter().map(RatFun::integer).collect(),
            )
            .ok()?;
            (!t.determinant().is_zero()).then_some(t)
        })
}

fn params_at(a: i64, b: i64) -> BTreeMap<Param, Q> {
    [(Param::from("alpha"), q(a)), (Param::from("beta"), q(b))].into_iter().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn field_laws(a in ratfun(), b in ratfun(), c in ratfun()) {
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        if !a.is_zero() {
            prop_assert!((&a * &a.inv().unwrap()).is_one());
        }
    }

    #[test]
    fn common_factors_cancel(
        a in small_poly(&["alpha", "beta", "gamma"]),
        b in small_poly(&["alpha", "beta", "gamma"]),
        g in small_poly(&["alpha", "beta", "gamma"]),
    ) {
        prop_assume!(!b.is_zero() && !g.is_zero());
        let reduced = RatFun::new(a.clone(), b.clone()).unwrap();
        let scaled = RatFun::new(&a * &g.pow(2), &b * &g.pow(2)).unwrap();
        prop_assert_eq!(&scaled, &reduced);
        prop_assert_eq!(&(&(scaled.num() * &b) - &(&a * scaled.den())), &MPoly::zero());
    }

    #[test]
    fn equal_values_print_identically(a in ratfun(), b in ratfun()) {
        let x = &(&a + &b) * &b;
        let y = &(&b * &b) + &(&a * &b);
        prop_assert_eq!(x.to_string(), y.to_string());
        prop_assert!(x.cross_eq(&y));
    }

    #[test]
    fn eval_is_a_homomorphism(a in ratfun(), b in ratfun(), x in small_rational(), y in small_rational()) {
        let at: BTreeMap<Param, Q> = [(Param::from("alpha"), x), (Param::from("beta"), y)].into_iter().collect();
        if let (Ok(va), Ok(vb)) = (a.eval(&at), b.eval(&at)) {
            prop_assert_eq!((&a + &b).eval(&at).unwrap(), &va + &vb);
            prop_assert_eq!((&a * &b).eval(&at).unwrap(), &va * &vb);
        }
    }

    #[test]
    fn sqrt_is_sound(a in ratfun()) {
        let sq = &a * &a;
        let r = sq.sqrt().expect("a square has a root");
        prop_assert_eq!(&r * &r, sq);
        if let Some(s) = a.sqrt() {
            prop_assert_eq!(&s * &s, a);
        }
    }

    #[test]
    fn diffpoly_ring_laws(p in diffpoly(vars2()), r in diffpoly(vars2()), s in diffpoly(vars2())) {
        prop_assert_eq!(&p + &r, &r + &p);
        prop_assert_eq!(&p * &r, &r * &p);
        prop_assert_eq!(&p * &(&r + &s), &(&p * &r) + &(&p * &s));
        prop_assert!((&p - &p).is_zero());
    }

    #[test]
    fn total_derivatives_commute_and_obey_leibniz(p in diffpoly(vars2()), r in diffpoly(vars2())) {
        prop_assert_eq!(p.total_derivative(0).total_derivative(1), p.total_derivative(1).total_derivative(0));
        let lhs = (&p * &r).total_derivative(1);
        let rhs = &(&p.total_derivative(1) * &r) + &(&p * &r.total_derivative(1));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn dependent_scaling_composes(p in diffpoly(vars2()), k1 in nonzero_ratfun(), k2 in nonzero_ratfun()) {
        let twice = scale_dependent(&scale_dependent(&p, &k1).unwrap(), &k2).unwrap();
        prop_assert_eq!(twice, scale_dependent(&p, &(&k1 * &k2)).unwrap());
        prop_assert_eq!(scale_dependent(&p, &RatFun::one()).unwrap(), p);
    }

    #[test]
    fn pullback_is_a_ring_map(p in diffpoly(vars2()), r in diffpoly(vars2()), t in transform2()) {
        let sum = pullback(&(&p + &r), &t).unwrap();
        prop_assert_eq!(sum, &pullback(&p, &t).unwrap() + &pullback(&r, &t).unwrap());
        let prod = pullback(&(&p * &r), &t).unwrap();
        prop_assert_eq!(prod, &pullback(&p, &t).unwrap() * &pullback(&r, &t).unwrap());
    }

    #[test]
    fn pullback_round_trip_and_functoriality(p in diffpoly(vars2()), t in transform2(), s in transform2()) {
        let inv = invert_transform(&t).unwrap();
        prop_assert_eq!(pullback(&pullback(&p, &t).unwrap(), &inv).unwrap(), p.clone());
        let s = s.with_target(VarSet::new(["t''", "x''"]).unwrap()).unwrap();
        let s = AffineTransform::new(t.target().clone(), s.target().clone(), s.matrix().to_vec(), s.offset().to_vec()).unwrap();
        let composed = compose(&s, &t).unwrap();
        prop_assert_eq!(pullback(&p, &composed).unwrap(), pullback(&pullback(&p, &t).unwrap(), &s).unwrap());
    }

    #[test]
    fn pullback_matches_oracle(
        p in diffpoly(vars2()),
        t in transform2(),
        coeffs in prop::collection::vec(-5i64..=5, 6),
        pt in prop::collection::vec(small_rational(), 2),
        a in 1i64..=4,
        b in 1i64..=4,
    ) {
        let params = params_at(a, b);
        prop_assume!(!t.determinant().eval(&params).map(|d| d.is_zero()).unwrap_or(true));
        let pp = |e: &[(&str, u32)]| PowerProduct::from_pairs(e.iter().map(|(n, k)| (Param::from(*n), *k)));
        let f = MPoly::from_terms([
            (pp(&[]), q(coeffs[0])),
            (pp(&[("t", 1)]), q(coeffs[1])),
            (pp(&[("x", 2)]), q(coeffs[2])),
            (pp(&[("t", 2), ("x", 1)]), q(coeffs[3])),
            (pp(&[("x", 3)]), q(coeffs[4])),
            (pp(&[("t", 1), ("x", 3)]), q(coeffs[5])),
        ]);
        let f = TestFunction::new(vars2(), f).unwrap();
        match pullback_consistency_check(&p, &t, &f, &pt, &params) {
            Ok(check) => prop_assert!(check.holds, "{:?}", check),
            Err(Error::PoleAtPoint(_)) => {}
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        }
    }

    #[test]
    fn residual_is_linear(p in diffpoly(vars2()), r in diffpoly(vars2()), pt in prop::collection::vec(small_rational(), 2)) {
        let params = params_at(2, 3);
        let f = TestFunction::new(vars2(), &MPoly::var(Param::from("t")).pow(3) + &MPoly::var(Param::from("x")).pow(4)).unwrap();
        let lhs = residual_eval(&(&p + &r), &f, &pt, &params).unwrap().value;
        let rhs = residual_eval(&p, &f, &pt, &params).unwrap().value + residual_eval(&r, &f, &pt, &params).unwrap().value;
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lagrange_is_a_congruence(entries in prop::collection::vec(coefficient(), 6)) {
        let vars = VarSet::new(["t", "x", "y"]).unwrap();
        let e = &entries;
        let a = vec![
            vec![e[0].clone(), e[1].clone(), e[2].clone()],
            vec![e[1].clone(), e[3].clone(), e[4].clone()],
            vec![e[2].clone(), e[4].clone(), e[5].clone()],
        ];
        let a = PrincipalMatrix::new(vars, a).unwrap();
        let report = lagrange_diagonalize(&a);
        let s = report.congruence_matrix();
        let d = linalg::mat_mul(&linalg::mat_mul(&linalg::transpose(&s), a.entries()), &s);
        let expected = PrincipalMatrix::diagonal(report.transform.target().clone(), &report.diagonal);
        prop_assert_eq!(&d, expected.entries());
        prop_assert!(!report.transform.determinant().is_zero());
    }

    #[test]
    fn lagrange_agrees_with_pullback(p in diffpoly(vars2())) {
        let report = lagrange_diagonalize(&principal_matrix(&p));
        let reduced = pullback(&p, &report.transform).unwrap();
        prop_assert_eq!(principal_matrix(&reduced), report.principal);
    }

    #[test]
    fn signature_is_stable_off_degeneracy(entries in prop::collection::vec(coefficient(), 6), seeds in prop::collection::vec((-9i64..=9, -9i64..=9), 5)) {
        let vars = VarSet::new(["t", "x", "y"]).unwrap();
        let e = &entries;
        let a = vec![
            vec![e[0].clone(), e[1].clone(), e[2].clone()],
            vec![e[1].clone(), e[3].clone(), e[4].clone()],
            vec![e[2].clone(), e[4].clone(), e[5].clone()],
        ];
        let a = PrincipalMatrix::new(vars, a).unwrap();
        let report = lagrange_diagonalize(&a);
        let zeros = report.diagonal.iter().filter(|d| d.is_zero()).count();
        for (x, y) in seeds {
            let params = params_at(x, y);
            if report.degeneracy.violated_at(&params).is_some() {
                continue;
            }
            let Ok(vals) = report.diagonal.iter().map(|d| d.eval(&params)).collect::<Result<Vec<Q>, _>>() else {
                continue;
            };
            let Ok(numeric) = a.entries().iter().map(|row| row.iter().map(|c| c.eval(&params)).collect::<Result<Vec<Q>, _>>()).collect::<Result<Vec<_>, _>>() else {
                continue;
            };
            let sig = (
                vals.iter().filter(|v| v.is_positive()).count(),
                vals.iter().filter(|v| v.is_negative()).count(),
                vals.iter().filter(|v| v.is_zero()).count(),
            );
            prop_assert_eq!(sig.2, zeros);
            prop_assert_eq!(sig, inertia3(&numeric));
        }
    }
}

/// Inertia of a symmetric 3x3 rational matrix from the signs of its
/// characteristic polynomial; all roots are real, so Descartes' rule is exact.
fn inertia3(m: &[Vec<Q>]) -> (usize, usize, usize) {
    let trace = &m[0][0] + &m[1][1] + &m[2][2];
    let minors = &(&m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]) + &(&(&m[0][0] * &m[2][2] - &m[0][2] * &m[2][0]) + &(&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1]));
    let det = linalg::determinant(&m.to_vec());
    // x^3 - trace x^2 + minors x - det
    let coeffs = [q(1), -trace, minors, -det];
    let zeros = coeffs.iter().rev().take_while(|c| c.is_zero()).count();
    let live: Vec<&Q> = coeffs[..4 - zeros].iter().filter(|c| !c.is_zero()).collect();
    let changes = |v: &[&Q]| v.windows(2).filter(|w| w[0].is_positive() != w[1].is_positive()).count();
    let positive = changes(&live);
    // roots of p(-x): flip signs of odd-degree coefficients (degree counted from the top)
    let negated: Vec<Q> = coeffs[..4 - zeros]
        .iter()
        .enumerate()
        .map(|(i, c)| if (3 - i) % 2 == 1 { -c.clone() } else { c.clone() })
        .collect();
    let live_neg: Vec<&Q> = negated.iter().filter(|c| !c.is_zero()).collect();
    let negative = changes(&live_neg);
    (positive, negative, zeros)
}

fn scaled_copy(p: &DiffPoly, s: &[i64], kappa: i64, c: i64) -> DiffPoly {
    let target = VarSet::new(["a", "b"]).unwrap();
    let terms = p.terms().map(|(m, coef)| {
        let mut f = coef * &RatFun::integer(c);
        f = &f * &RatFun::integer(kappa).pow(m.degree() as i32 - 1).unwrap();
        for (k, e) in m.factors() {
            for (i, &o) in k.orders().iter().enumerate() {
                f = &f * &RatFun::integer(s[i]).pow((o * e) as i32).unwrap();
            }
        }
        let swapped = m.map_keys(|k| DerivKey::from_orders(vec![k.get(1), k.get(0)]));
        (swapped, f)
    });
    DiffPoly::from_terms(&target, terms)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn match_identity(p in diffpoly(vars2())) {
        prop_assume!(!p.restrict_to_active().vars().is_empty() && !p.active_vars().is_empty());
        match match_modulo(&p, &p) {
            Ok(MatchOutcome::Witness(w)) => {
                prop_assert!(w.var_scales().values().all(RatFun::is_one));
                prop_assert!(w.overall().is_one());
            }
            Ok(MatchOutcome::Refuted(r)) => return Err(TestCaseError::fail(format!("refuted itself: {r}"))),
            Err(Error::UnresolvedNonlinearSystem(_)) => {}
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        }
    }

    #[test]
    fn match_symmetry(p in diffpoly(vars2()), s0 in 1i64..=3, s1 in -3i64..=-1, kappa in 1i64..=2, c in 1i64..=2) {
        prop_assume!(p.active_vars().len() == 2);
        let r = scaled_copy(&p, &[s0, s1], kappa, c);
        let forward = match_modulo(&p, &r);
        let backward = match_modulo(&r, &p);
        let found = |o: &Result<MatchOutcome, Error>| matches!(o, Ok(MatchOutcome::Witness(_)));
        let refuted = |o: &Result<MatchOutcome, Error>| matches!(o, Ok(MatchOutcome::Refuted(_)));
        prop_assert!(!refuted(&forward) && !refuted(&backward));
        prop_assert_eq!(found(&forward), found(&backward));
        if let Ok(MatchOutcome::Witness(w)) = forward {
            let expected = subst_params(&r.restrict_to_active(), w.param_map()).unwrap();
            prop_assert_eq!(w.apply(&p, expected.vars()).unwrap(), expected);
        }
    }
}
