//! Randomized properties over generated terms. Each case draws a seed and
//! builds its inputs with the crate's deterministic generator, so a failing
//! seed reproduces exactly.

use proptest::prelude::*;

use num_bigint::BigUint;
use wpengine::ast::{
    parse_exp, parse_formula, parse_program, subst_exp, AExpr, BExpr, Exp, Program, Var,
};
use wpengine::gen::Gen;
use wpengine::goedel::{
    cantor_pair, cantor_unpair, decode_rat_seq, decode_seq, encode_rat_seq, encode_seq,
};
use wpengine::normalform::{to_prenex, to_snf};
use wpengine::semantics::{
    calkin_wilf, eval_aexpr, eval_bexpr, eval_exp, Evaluator, Mode, Rat, XReal,
};
use wpengine::series::{make_product, make_sum, product_index, sum_index};
use wpengine::wp::{forward_dist, kleene_iterate, wp_loop_free, Limits, Loop};

fn seeds() -> impl Strategy<Value = u64> {
    any::<u64>()
}

fn v(name: &str) -> Var {
    Var::parse_any(name).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn programs_print_and_parse_back(seed in seeds()) {
        let mut g = Gen::new(seed);
        let c: Program = g.program_depth(8);
        prop_assert_eq!(parse_program(&c.to_string()).unwrap(), c);
    }

    #[test]
    fn expectations_print_and_parse_back(seed in seeds()) {
        let mut g = Gen::new(seed);
        let f = g.exp(8);
        prop_assert_eq!(parse_exp(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn formulas_print_and_parse_back(seed in seeds()) {
        let mut g = Gen::new(seed);
        let p = g.formula(8);
        prop_assert_eq!(parse_formula(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn substitution_lemma(seed in seeds(), k in 0usize..6) {
        let mut g = Gen::new(seed);
        let f = g.exp(4);
        let x = v(["x", "y", "z"][seed as usize % 3]);
        let t = g.aexpr(3);
        let s = g.state();
        let dom = calkin_wilf(k, []);
        let lhs = eval_exp(&subst_exp(&f, &x, &t), &s, &dom, Mode::Restricted);
        let rhs = eval_exp(&f, &s.with(&x, eval_aexpr(&t, &s)), &dom, Mode::Restricted);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn or_lowers_to_de_morgan(seed in seeds()) {
        let mut g = Gen::new(seed);
        let (a, b) = (g.bexpr(3), g.bexpr(3));
        let s = g.state();
        let lowered = BExpr::not(BExpr::and(BExpr::not(a.clone()), BExpr::not(b.clone())));
        prop_assert_eq!(eval_bexpr(&BExpr::or(a, b), &s), eval_bexpr(&lowered, &s));
    }

    #[test]
    fn quantifier_free_values_ignore_domain_and_mode(seed in seeds(), k in 0usize..8) {
        let mut g = Gen::new(seed);
        let f = g.qf_exp(5);
        let s = g.state();
        let small = eval_exp(&f, &s, &calkin_wilf(0, []), Mode::Restricted);
        prop_assert_eq!(&small, &eval_exp(&f, &s, &calkin_wilf(k, []), Mode::Restricted));
        prop_assert_eq!(&small, &eval_exp(&f, &s, &calkin_wilf(k, []), Mode::OracleAssisted));
    }

    #[test]
    fn sup_prefixes_grow_and_inf_prefixes_shrink_with_the_domain(
        seed in seeds(), k in 0usize..4, extra in 1usize..5,
    ) {
        let mut g = Gen::new(seed);
        let body = g.qf_exp(4);
        let s = g.state();
        let (small, large) = (calkin_wilf(k, []), calkin_wilf(k + extra, []));
        let sup = Exp::sup(&v("u"), Exp::sup(&v("w"), body.clone()));
        let inf = Exp::inf(&v("u"), Exp::inf(&v("w"), body));
        prop_assert!(eval_exp(&sup, &s, &small, Mode::Restricted) <= eval_exp(&sup, &s, &large, Mode::Restricted));
        prop_assert!(eval_exp(&inf, &s, &small, Mode::Restricted) >= eval_exp(&inf, &s, &large, Mode::Restricted));
    }

    #[test]
    fn guards_are_idempotent(seed in seeds(), k in 0usize..5) {
        let mut g = Gen::new(seed);
        let (b, f) = (g.bexpr(3), g.exp(3));
        let s = g.state();
        let dom = calkin_wilf(k, []);
        let once = Exp::guard(b.clone(), f);
        let twice = Exp::guard(b, once.clone());
        prop_assert_eq!(
            eval_exp(&once, &s, &dom, Mode::Restricted),
            eval_exp(&twice, &s, &dom, Mode::Restricted)
        );
    }

    #[test]
    fn normal_forms_keep_values(seed in seeds(), k in 0usize..4) {
        let mut g = Gen::new(seed);
        let f = g.exp(4);
        let s = g.state();
        let dom = calkin_wilf(k, []);
        let want = eval_exp(&f, &s, &dom, Mode::Restricted);
        prop_assert_eq!(&eval_exp(&to_prenex(&f).to_exp(), &s, &dom, Mode::Restricted), &want);
        prop_assert_eq!(&eval_exp(&to_snf(&f).to_exp(), &s, &dom, Mode::Restricted), &want);
    }

    #[test]
    fn wp_of_zero_is_zero(seed in seeds()) {
        let mut g = Gen::new(seed);
        let c = g.program();
        let s = g.state();
        let pre = wp_loop_free(&c, &Exp::zero()).unwrap();
        prop_assert_eq!(eval_exp(&pre, &s, &calkin_wilf(2, []), Mode::Restricted), XReal::zero());
    }

    #[test]
    fn wp_matches_forward_distribution(seed in seeds()) {
        let mut g = Gen::new(seed);
        let c = g.program();
        let f = g.qf_exp(3);
        let s = g.state();
        let ev = Evaluator::restricted(calkin_wilf(0, []));
        let pre = wp_loop_free(&c, &f).unwrap();
        let dist = forward_dist(&c, &s, &g.var_set(), &Limits::default()).unwrap();
        prop_assert_eq!(ev.exp(&pre, &s), dist.expect(&f, &ev));
    }

    #[test]
    fn kleene_iterates_are_monotone(seed in seeds()) {
        let mut g = Gen::new(seed);
        let prog = g.loop_program();
        let lp = Loop::from_program(&prog).unwrap();
        let post = g.qf_exp(2);
        let s = g.loop_state();
        let ev = Evaluator::oracle(calkin_wilf(0, []));
        let vars = g.var_set();
        let limits = Limits::default();
        let mut prev = XReal::zero();
        for k in 0..6 {
            let cur = kleene_iterate(&lp, &post, &s, &vars, k, &ev, &limits).unwrap();
            prop_assert!(prev <= cur, "k = {}: {} then {}", k, prev, cur);
            prev = cur;
        }
    }

    #[test]
    fn written_out_series_match_literal_aggregates(seed in seeds(), n in 0u64..=12) {
        let mut g = Gen::new(seed);
        let pool = [v("x"), sum_index()];
        let body = g.exp_over(&pool, 3, false);
        let s = g.state();
        let ev = Evaluator::oracle(calkin_wilf(0, []));
        let bound = AExpr::rat(Rat::from_int(n));
        let literal = |index: &Var, body: &Exp| -> Vec<XReal> {
            (0..=n)
                .map(|j| ev.exp(&subst_exp(body, index, &AExpr::rat(Rat::from_int(j))), &s))
                .collect()
        };
        let sum = make_sum(&body, &bound).unwrap();
        let want = literal(&sum_index(), &body).into_iter().fold(XReal::zero(), |a, b| a + b);
        prop_assert_eq!(ev.exp(&sum.exp, &s), want);

        let factor = subst_exp(&body, &sum_index(), &AExpr::var(&product_index()));
        let prod = make_product(&factor, &bound).unwrap();
        let want = literal(&product_index(), &factor).into_iter().fold(XReal::one(), |a, b| a * b);
        prop_assert_eq!(ev.exp(&prod.exp, &s), want);
    }

    #[test]
    fn partial_sums_grow_with_the_bound(seed in seeds()) {
        let mut g = Gen::new(seed);
        let body = g.exp_over(&[v("x"), sum_index()], 3, false);
        let s = g.state();
        let ev = Evaluator::oracle(calkin_wilf(0, []));
        let sum = make_sum(&body, &AExpr::var(&v("k"))).unwrap();
        let mut prev = XReal::zero();
        for k in 0..8u64 {
            let cur = ev.exp(&sum.exp, &s.with(&v("k"), Rat::from_int(k)));
            prop_assert!(prev <= cur);
            prev = cur;
        }
    }

    #[test]
    fn sequence_codes_decode_back(seq in prop::collection::vec(0u64..40, 0..5)) {
        let big: Vec<BigUint> = seq.iter().map(|&n| BigUint::from(n)).collect();
        let code = encode_seq(&big);
        prop_assert_eq!(decode_seq(&code.num, big.len()), big);
    }

    #[test]
    fn rational_codes_decode_back(parts in prop::collection::vec((0u64..30, 1u64..10), 0..4)) {
        let rats: Vec<Rat> = parts.iter().map(|&(p, q)| Rat::ratio(p, q).unwrap()).collect();
        let code = encode_rat_seq(&rats);
        prop_assert_eq!(decode_rat_seq(&code.num, rats.len()), Some(rats));
    }

    #[test]
    fn cantor_pairing_is_a_bijection(a in 0u64..5000, b in 0u64..5000) {
        let (a, b) = (BigUint::from(a), BigUint::from(b));
        prop_assert_eq!(cantor_unpair(&cantor_pair(&a, &b)), (a, b));
    }

    #[test]
    fn extended_reals_distribute_over_finite_sups(
        xs in prop::collection::vec(prop::option::weighted(0.85, (0u64..20, 1u64..5)), 1..5),
        ys in prop::collection::vec(prop::option::weighted(0.85, (0u64..20, 1u64..5)), 1..5),
        c in prop::option::weighted(0.7, (0u64..6, 1u64..4)),
    ) {
        let xr = |o: &Option<(u64, u64)>| match o {
            Some((p, q)) => XReal::from(Rat::ratio(*p, *q).unwrap()),
            None => XReal::Inf,
        };
        let a: Vec<XReal> = xs.iter().map(xr).collect();
        let b: Vec<XReal> = ys.iter().map(xr).collect();
        let c = xr(&c);
        let sup = |v: &[XReal]| v.iter().max().cloned().unwrap();
        let inf = |v: &[XReal]| v.iter().min().cloned().unwrap();
        let scaled: Vec<XReal> = a.iter().map(|x| &c * x).collect();
        prop_assert_eq!(&c * &sup(&a), sup(&scaled));
        prop_assert_eq!(&c * &inf(&a), inf(&scaled));
        let sums: Vec<XReal> = a.iter().flat_map(|x| b.iter().map(move |y| x + y)).collect();
        prop_assert_eq!(&sup(&a) + &sup(&b), sup(&sums));
        prop_assert_eq!(&inf(&a) + &inf(&b), inf(&sums));
    }
}
