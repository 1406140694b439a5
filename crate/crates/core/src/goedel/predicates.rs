//! Formulas for the coding predicates. Each builder returns the formula
//! written out in first-order arithmetic, tagged with a decoder that
//! decides it directly.
//!
//! Arguments are terms. `pair_formula`, `elem_formula`, `relprime_formula`
//! and `seq_formula` are formulas over the naturals; their tags are false
//! whenever a variable of an argument is not natural, which matches their
//! relativized form. The remaining builders are formulas over the
//! non-negative rationals and guard their natural-valued parts themselves.

use std::sync::Arc;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive};

use super::beta::{decode_rat_seq, elem, is_rat_seq_code, is_seq_code, rat_from_code};
use super::fo::{helper, relativize_nat, robinson_nat_formula};
use crate::ast::{AExpr, BExpr, FoTag, Formula, Var, VarSet};
use crate::semantics::{eval_aexpr, Evaluator, FoIntrinsic, Rat, State};

fn var(v: &Var) -> AExpr {
    AExpr::var(v)
}

fn avoid_of(terms: &[&AExpr]) -> VarSet {
    let mut out = VarSet::new();
    for t in terms {
        t.free_vars_into(&mut out);
    }
    out
}

#[derive(Debug, Clone)]
enum Pred {
    Elem,
    RelPrime,
    Seq,
    RElem,
    RSeq,
    EncState(Vec<Var>),
    StateSeq(Vec<Var>),
}

/// Decoder for one coding predicate applied to argument terms.
#[derive(Debug)]
struct Decoder {
    pred: Pred,
    args: Vec<AExpr>,
}

fn natural(r: &Rat) -> Option<BigUint> {
    r.to_natural()
}

fn small(n: &BigUint) -> Option<usize> {
    n.to_usize()
}

fn state_values(s: &State, vars: &[Var]) -> Vec<Rat> {
    vars.iter().map(|v| s.get(v)).collect()
}

fn is_state_code(n: &BigUint, k: usize) -> bool {
    is_rat_seq_code(n, k)
}

impl FoIntrinsic for Decoder {
    fn holds(&self, _ev: &Evaluator, s: &State) -> bool {
        let vals: Vec<Rat> = self.args.iter().map(|a| eval_aexpr(a, s)).collect();
        // Every argument variable that lives in the naturals must be one.
        let nat_positions = match self.pred {
            Pred::Elem | Pred::RelPrime | Pred::Seq => self.args.len(),
            Pred::RElem => 2,
            Pred::RSeq | Pred::StateSeq(_) => 2,
            Pred::EncState(_) => 1,
        };
        let vars_nat = self.args[..nat_positions]
            .iter()
            .flat_map(|a| a.free_vars())
            .all(|v| s.get(&v).is_integer());
        if !vars_nat {
            return false;
        }
        let Some(nats) = vals[..nat_positions]
            .iter()
            .map(natural)
            .collect::<Option<Vec<BigUint>>>()
        else {
            return false;
        };
        match &self.pred {
            Pred::Elem => match nats[1].to_u64() {
                Some(i) => elem(&nats[0], i) == nats[2],
                None => false,
            },
            Pred::RelPrime => nats[0].gcd(&nats[1]).is_one(),
            Pred::Seq => small(&nats[1]).is_some_and(|len| is_seq_code(&nats[0], len)),
            Pred::RElem => match nats[1].to_u64() {
                Some(i) => rat_from_code(&elem(&nats[0], i)).is_some_and(|r| r == vals[2]),
                None => false,
            },
            Pred::RSeq => small(&nats[1]).is_some_and(|len| is_rat_seq_code(&nats[0], len)),
            Pred::EncState(vars) => {
                is_rat_seq_code(&nats[0], vars.len())
                    && decode_rat_seq(&nats[0], vars.len())
                        .is_some_and(|rs| rs == state_values(s, vars))
            }
            Pred::StateSeq(vars) => {
                let k = vars.len();
                let Some(len) = small(&nats[1]) else {
                    return false;
                };
                let num = &nats[0];
                let first = elem(num, 0);
                is_seq_code(num, len)
                    && is_state_code(&first, k)
                    && decode_rat_seq(&first, k).is_some_and(|rs| rs == state_values(s, vars))
                    && (0..len as u64).all(|u| is_state_code(&elem(num, u), k))
            }
        }
    }
}

fn tag(pred: Pred, args: &[&AExpr], pure: Formula) -> Formula {
    let d = Decoder {
        pred,
        args: args.iter().map(|a| (*a).clone()).collect(),
    };
    Formula::tagged(Arc::new(d) as FoTag, pure)
}

/// `2 n = (n1 + n2)(n1 + n2 + 1) + 2 n2`: `n` is the Cantor pair of
/// `(n1, n2)`.
pub fn pair_formula(n: &AExpr, n1: &AExpr, n2: &AExpr) -> Formula {
    let s = AExpr::add(n1.clone(), n2.clone());
    let rhs = AExpr::add(
        AExpr::mul(s.clone(), AExpr::add(s, AExpr::one())),
        AExpr::mul(AExpr::lit(2), n2.clone()),
    );
    Formula::atom(BExpr::eq(AExpr::mul(AExpr::lit(2), n.clone()), rhs))
}

/// Element `i` of the sequence coded by `num` is `m`:
/// `exists a, b: Pair(num, a, b) and m < 1 + (i+1) b and
/// exists q: a = q (1 + (i+1) b) + m`.
pub fn elem_formula(num: &AExpr, i: &AExpr, m: &AExpr) -> Formula {
    let avoid = avoid_of(&[num, i, m]);
    let a = helper("a", &avoid);
    let b = helper("b", &avoid);
    let q = helper("q", &avoid);
    let modulus = AExpr::add(
        AExpr::one(),
        AExpr::mul(AExpr::add(i.clone(), AExpr::one()), var(&b)),
    );
    let pure = Formula::exists_all(
        &[a.clone(), b.clone()],
        Formula::all([
            pair_formula(num, &var(&a), &var(&b)),
            Formula::atom(BExpr::lt(m.clone(), modulus.clone())),
            Formula::exists(
                &q,
                Formula::atom(BExpr::eq(
                    var(&a),
                    AExpr::add(AExpr::mul(var(&q), modulus), m.clone()),
                )),
            ),
        ]),
    );
    tag(Pred::Elem, &[num, i, m], pure)
}

/// `exists q: d q = n`.
fn divides(d: &AExpr, n: &AExpr, avoid: &VarSet) -> Formula {
    let q = helper("q", avoid);
    Formula::exists(
        &q,
        Formula::atom(BExpr::eq(AExpr::mul(d.clone(), var(&q)), n.clone())),
    )
}

/// `forall d: (d | n1 and d | n2) implies d = 1`.
pub fn relprime_formula(n1: &AExpr, n2: &AExpr) -> Formula {
    let mut avoid = avoid_of(&[n1, n2]);
    let d = helper("d", &avoid);
    avoid.insert(d.clone());
    let pure = Formula::forall(
        &d,
        Formula::implies(
            Formula::and(divides(&var(&d), n1, &avoid), divides(&var(&d), n2, &avoid)),
            Formula::atom(BExpr::eq(var(&d), AExpr::one())),
        ),
    );
    tag(Pred::RelPrime, &[n1, n2], pure)
}

/// Shared shape of the minimality predicates: every index below `len` has
/// an element, and every number agreeing on those elements is at least
/// `num`. `elem_of(num, u, w)` builds the element predicate; `wrap_u` and
/// `wrap_num` add guards on the bound index and competitor.
fn minimal_code(
    num: &AExpr,
    len: &AExpr,
    elem_of: &dyn Fn(&AExpr, &AExpr, &AExpr) -> Formula,
    guard: &dyn Fn(&Var, Formula) -> Formula,
) -> Formula {
    let mut avoid = avoid_of(&[num, len]);
    let u = helper("u", &avoid);
    avoid.insert(u.clone());
    let w = helper("w", &avoid);
    avoid.insert(w.clone());
    let other = helper("num", &avoid);
    let below = Formula::atom(BExpr::lt(var(&u), len.clone()));
    let has = Formula::forall(
        &u,
        guard(
            &u,
            Formula::implies(
                below.clone(),
                Formula::exists(&w, elem_of(num, &var(&u), &var(&w))),
            ),
        ),
    );
    let agree = Formula::forall(
        &u,
        guard(
            &u,
            Formula::implies(
                below,
                Formula::exists(
                    &w,
                    Formula::and(
                        elem_of(num, &var(&u), &var(&w)),
                        elem_of(&var(&other), &var(&u), &var(&w)),
                    ),
                ),
            ),
        ),
    );
    let least = Formula::forall(
        &other,
        guard(
            &other,
            Formula::implies(agree, Formula::atom(BExpr::ge(var(&other), num.clone()))),
        ),
    );
    Formula::and(has, least)
}

/// `num` is the least code of its first `len` elements.
pub fn seq_formula(num: &AExpr, len: &AExpr) -> Formula {
    let pure = minimal_code(num, len, &elem_formula, &|_, f| f);
    tag(Pred::Seq, &[num, len], pure)
}

fn nat_implies(v: &Var, f: Formula) -> Formula {
    Formula::implies(robinson_nat_formula(v), f)
}

fn nat_and(v: &Var, f: Formula) -> Formula {
    Formula::and(robinson_nat_formula(v), f)
}

/// Element `i` of the rational sequence coded by `num` is `r`:
/// `exists n, n1, n2: Pair(n, n1, n2) and Elem(num, i, n) and n2 r = n1 and
/// (RelPrime(n1, n2) or (n1 = 0 and n2 = 1))`, with the natural-valued
/// parts relativized.
pub fn relem_formula(num: &AExpr, i: &AExpr, r: &AExpr) -> Formula {
    let mut avoid = avoid_of(&[num, i, r]);
    let n = helper("n", &avoid);
    avoid.insert(n.clone());
    let n1 = helper("n1", &avoid);
    avoid.insert(n1.clone());
    let n2 = helper("n2", &avoid);
    let (vn, v1, v2) = (var(&n), var(&n1), var(&n2));
    let matrix = Formula::all([
        pair_formula(&vn, &v1, &v2),
        relativize_nat(&elem_formula(num, i, &vn)),
        Formula::atom(BExpr::eq(AExpr::mul(v2.clone(), r.clone()), v1.clone())),
        Formula::or(
            relativize_nat(&relprime_formula(&v1, &v2)),
            Formula::atom(BExpr::and(
                BExpr::eq(v1, AExpr::zero()),
                BExpr::eq(v2, AExpr::one()),
            )),
        ),
    ]);
    let pure = Formula::exists_all(
        &[n.clone(), n1.clone(), n2.clone()],
        nat_and(&n, nat_and(&n1, nat_and(&n2, matrix))),
    );
    tag(Pred::RElem, &[num, i, r], pure)
}

/// The minimality predicate over rational elements.
pub fn rseq_formula(num: &AExpr, len: &AExpr) -> Formula {
    let pure = Formula::and(
        super::fo::nat_guards(&avoid_of(&[num, len])),
        minimal_code(num, len, &relem_formula, &nat_implies),
    );
    tag(Pred::RSeq, &[num, len], pure)
}

/// `num` is the code of the current state restricted to `vars` (in
/// variable order).
pub fn enc_state_formula(vars: &VarSet, num: &AExpr) -> Formula {
    let list: Vec<Var> = vars.iter().cloned().collect();
    let k = AExpr::lit(list.len() as u64);
    let pure = Formula::all(
        std::iter::once(rseq_formula(num, &k)).chain(
            list.iter()
                .enumerate()
                .map(|(i, x)| relem_formula(num, &AExpr::lit(i as u64), &var(x))),
        ),
    );
    tag(Pred::EncState(list), &[num], pure)
}

/// `num` codes a sequence of `len` state codes whose first state agrees
/// with the current state on `vars`.
pub fn state_seq_formula(vars: &VarSet, num: &AExpr, len: &AExpr) -> Formula {
    let k = AExpr::lit(vars.len() as u64);
    let mut avoid = avoid_of(&[num, len]);
    avoid.extend(vars.iter().cloned());
    let first = helper("v'", &avoid);
    avoid.insert(first.clone());
    let u = helper("u", &avoid);
    let (vf, vu) = (var(&first), var(&u));
    let starts = Formula::exists(
        &first,
        nat_and(
            &first,
            Formula::and(
                relativize_nat(&elem_formula(num, &AExpr::zero(), &vf)),
                enc_state_formula(vars, &vf),
            ),
        ),
    );
    let all_states = Formula::forall(
        &u,
        nat_implies(
            &u,
            Formula::forall(
                &first,
                nat_implies(
                    &first,
                    Formula::implies(
                        Formula::and(
                            Formula::atom(BExpr::lt(vu.clone(), len.clone())),
                            relativize_nat(&elem_formula(num, &vu, &vf)),
                        ),
                        rseq_formula(&vf, &k),
                    ),
                ),
            ),
        ),
    );
    let pure = Formula::all([relativize_nat(&seq_formula(num, len)), starts, all_states]);
    let list: Vec<Var> = vars.iter().cloned().collect();
    tag(Pred::StateSeq(list), &[num, len], pure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goedel::beta::{encode_rat_seq, encode_seq, encode_state, encode_state_seq};
    use crate::semantics::QDomain;

    fn n(x: u64) -> BigUint {
        BigUint::from(x)
    }

    fn v(s: &str) -> Var {
        Var::parse_any(s).unwrap()
    }

    fn at(pairs: &[(&str, Rat)]) -> State {
        let vars: Vec<Var> = pairs.iter().map(|(k, _)| v(k)).collect();
        State::from_pairs(vars.iter().zip(pairs.iter().map(|(_, r)| r.clone())))
    }

    fn lit(x: &BigUint) -> AExpr {
        AExpr::rat(Rat::from_biguint(x.clone()))
    }

    fn oracle() -> Evaluator {
        Evaluator::oracle(QDomain::default())
    }

    #[test]
    fn elem_oracle() {
        let code = encode_seq(&[n(3), n(1), n(4)]).num;
        let ev = oracle();
        let s = State::new();
        assert!(ev.formula(
            &elem_formula(&lit(&code), &AExpr::lit(1), &AExpr::lit(1)),
            &s
        ));
        assert!(!ev.formula(
            &elem_formula(&lit(&code), &AExpr::lit(1), &AExpr::lit(2)),
            &s
        ));
    }

    #[test]
    fn elem_pure_matches_oracle_on_small_numbers() {
        let (num, i, m) = (v("num"), v("i"), v("m"));
        let f = elem_formula(&var(&num), &var(&i), &var(&m));
        let pure = Evaluator::restricted(QDomain::naturals(12));
        let orc = oracle();
        for c in 0..=12u64 {
            for idx in 0..3u64 {
                for val in 0..4u64 {
                    let s = at(&[
                        ("num", Rat::from_int(c)),
                        ("i", Rat::from_int(idx)),
                        ("m", Rat::from_int(val)),
                    ]);
                    assert_eq!(pure.formula(&f, &s), orc.formula(&f, &s), "{c} {idx} {val}");
                }
            }
        }
    }

    #[test]
    fn relprime_pure_matches_gcd() {
        let f = relprime_formula(&var(&v("p")), &var(&v("q")));
        let pure = Evaluator::restricted(QDomain::naturals(9));
        for p in 0..=9u64 {
            for q in 0..=9u64 {
                let s = at(&[("p", Rat::from_int(p)), ("q", Rat::from_int(q))]);
                assert_eq!(pure.formula(&f, &s), oracle().formula(&f, &s));
            }
        }
    }

    #[test]
    fn relem_oracle() {
        let code = encode_rat_seq(&["1/2".parse().unwrap(), Rat::from_int(3)]).num;
        let ev = oracle();
        let f = relem_formula(&lit(&code), &AExpr::zero(), &var(&v("r")));
        assert!(ev.formula(&f, &at(&[("r", "1/2".parse().unwrap())])));
        assert!(!ev.formula(
            &f,
            &at(&[("r", "2/4".parse::<Rat>().unwrap() + Rat::one())])
        ));
    }

    #[test]
    fn seq_pure_matches_oracle_on_small_numbers() {
        // Every code below 20 has components at most 5, so a domain of
        // naturals up to 20 contains every witness the formula needs.
        let f = seq_formula(&var(&v("num")), &AExpr::one());
        let pure = Evaluator::restricted(QDomain::naturals(20));
        for c in 0..=8u64 {
            let s = at(&[("num", Rat::from_int(c))]);
            assert_eq!(pure.formula(&f, &s), oracle().formula(&f, &s), "num = {c}");
        }
    }

    #[test]
    fn state_codes() {
        let vars: VarSet = [v("c"), v("x")].into_iter().collect();
        let s = at(&[("x", "1/2".parse().unwrap()), ("c", Rat::one())]);
        let code = encode_state(&s, &vars).num;
        let ev = oracle();
        assert!(ev.formula(&enc_state_formula(&vars, &lit(&code)), &s));
        assert!(!ev.formula(&enc_state_formula(&vars, &lit(&code)), &State::new()));
        let seq = encode_state_seq(std::slice::from_ref(&s), &vars).num;
        assert!(ev.formula(&state_seq_formula(&vars, &lit(&seq), &AExpr::one()), &s));
        assert!(!ev.formula(
            &state_seq_formula(&vars, &lit(&seq), &AExpr::one()),
            &State::new()
        ));
    }
}
