//! Finite sums and products of expectations, the unrestricted product of
//! two expectations, and exact quotients.
//!
//! Each construction returns the expectation written out in the language
//! (sequence codes, Dedekind cuts and all), tagged with an evaluator that
//! computes the intended value directly. Restricted evaluation of the
//! written-out terms is correct in the limit but needs domains far larger
//! than anything practical, so tests exercise the tags.

use std::sync::Arc;

use crate::ast::{fresh_or_same, subst_bexpr, AExpr, BExpr, Exp, Formula, Var, VarSet};
use crate::error::{Error, Result};
use crate::goedel::{iverson, relem_formula};
use crate::normalform::{to_dnf, Dnf, DEFAULT_SUMMAND_CAP};
use crate::semantics::{eval_aexpr, Evaluator, Intrinsic, Rat, State, XReal};

/// Largest body, in nodes, that a series will be built around. The
/// Dedekind matrix of a body is several times larger than the body.
pub const TERM_NODE_CAP: usize = 8_000_000;

/// Index variable of [`make_sum`].
pub fn sum_index() -> Var {
    Var::reserved("$s")
}

/// Index variable of [`make_product`].
pub fn product_index() -> Var {
    Var::reserved("$p")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Aggregate {
    Sum,
    Product,
}

impl Aggregate {
    fn unit(self) -> u64 {
        match self {
            Aggregate::Sum => 0,
            Aggregate::Product => 1,
        }
    }

    fn combine(self, a: AExpr, b: AExpr) -> AExpr {
        match self {
            Aggregate::Sum => AExpr::add(a, b),
            Aggregate::Product => AExpr::mul(a, b),
        }
    }

    /// Folds values with `0 * inf = 0` for products.
    pub fn fold(self, values: impl IntoIterator<Item = XReal>) -> XReal {
        match self {
            Aggregate::Sum => {
                let mut acc = XReal::zero();
                for x in values {
                    acc = &acc + &x;
                    if acc.is_inf() {
                        break;
                    }
                }
                acc
            }
            Aggregate::Product => {
                let mut acc = XReal::one();
                for x in values {
                    if x.is_zero() {
                        return XReal::zero();
                    }
                    acc = &acc * &x;
                }
                acc
            }
        }
    }
}

/// `Sum` or `Product` of `body` over `index = 0, ..., bound`.
#[derive(Clone, Debug)]
pub struct Series {
    pub kind: Aggregate,
    pub body: Exp,
    pub index: Var,
    pub bound: AExpr,
    /// The written-out expectation, tagged with the direct evaluator.
    pub exp: Exp,
}

impl Series {
    /// Direct value: the sum or product of `body` with the index set to
    /// `0, ..., bound`; `0` when the bound is not a natural number.
    pub fn eval(&self, ev: &Evaluator, s: &State) -> XReal {
        aggregate(self.kind, &self.body, &self.index, &self.bound, ev, s)
    }
}

fn aggregate(
    kind: Aggregate,
    body: &Exp,
    index: &Var,
    bound: &AExpr,
    ev: &Evaluator,
    s: &State,
) -> XReal {
    let Some(n) = eval_aexpr(bound, s).to_natural() else {
        return XReal::zero();
    };
    let mut j = num_bigint::BigUint::default();
    let values = std::iter::from_fn(|| {
        if j > n {
            return None;
        }
        let x = ev.exp(body, &s.with(index, Rat::from_biguint(j.clone())));
        j += 1u32;
        Some(x)
    });
    kind.fold(values)
}

#[derive(Debug)]
struct SeriesTag {
    kind: Aggregate,
    body: Exp,
    index: Var,
    bound: AExpr,
}

impl Intrinsic for SeriesTag {
    fn eval(&self, ev: &Evaluator, s: &State) -> XReal {
        aggregate(self.kind, &self.body, &self.index, &self.bound, ev, s)
    }
}

/// `sum_{index = 0}^{bound} body`, with `$s` as the index.
pub fn make_sum(body: &Exp, bound: &AExpr) -> Result<Series> {
    make_series(Aggregate::Sum, body, &sum_index(), bound)
}

/// `prod_{index = 0}^{bound} body`, with `$p` as the index.
pub fn make_product(body: &Exp, bound: &AExpr) -> Result<Series> {
    make_series(Aggregate::Product, body, &product_index(), bound)
}

/// Builds
///
/// ```text
/// sup v: sup num: v * inf u: inf z: sup cut: Q: [R(num, 0, e) and R(num, bound + 1, v)
///     and ((u < bound + 1 and R(num, u, z) and (phi[index/u] or cut = 0))
///          implies R(num, u + 1, z op cut))]
/// ```
///
/// where `Q: [phi]` is the Dedekind normal form of `body` with cut
/// variable `cut`, `R` is the rational element predicate, `e` is the unit
/// of the operation and `op` is `+` or `*`. The code `num` stores the
/// running aggregate of cut values, so the supremum over `v` is the
/// aggregate of the body values.
pub fn make_series(kind: Aggregate, body: &Exp, index: &Var, bound: &AExpr) -> Result<Series> {
    let mut avoid = body.all_vars();
    bound.free_vars_into(&mut avoid);
    avoid.insert(index.clone());
    if !body.size_within(TERM_NODE_CAP) {
        return Err(Error::TermTooLarge { cap: TERM_NODE_CAP });
    }
    let d = to_dnf(body, DEFAULT_SUMMAND_CAP)?.rename_apart(&bound.free_vars());
    avoid.extend(d.prefix.iter().map(|(_, v)| v.clone()));
    avoid.insert(d.cut.clone());
    let mut fresh = |base: &str| {
        let v = fresh_or_same(&Var::reserved(base), &avoid);
        avoid.insert(v.clone());
        v
    };
    let (acc, num, u, z) = (fresh("v"), fresh("num"), fresh("u"), fresh("z"));
    let var = AExpr::var;
    let next = AExpr::add(bound.clone(), AExpr::one());
    let step = Formula::implies(
        Formula::all([
            Formula::atom(BExpr::lt(var(&u), next.clone())),
            relem_formula(&var(&num), &var(&u), &var(&z)),
            Formula::atom(BExpr::or(
                subst_bexpr(&d.matrix, index, &var(&u)),
                BExpr::eq(var(&d.cut), AExpr::zero()),
            )),
        ]),
        relem_formula(
            &var(&num),
            &AExpr::add(var(&u), AExpr::one()),
            &kind.combine(var(&z), var(&d.cut)),
        ),
    );
    let spec = Formula::all([
        relem_formula(&var(&num), &AExpr::zero(), &AExpr::lit(kind.unit())),
        relem_formula(&var(&num), &next, &var(&acc)),
        step,
    ]);
    let inner = Exp::with_prefix(&d.prefix, iverson(&spec));
    let pure = Exp::sup(
        &acc,
        Exp::sup(
            &num,
            Exp::scale(
                var(&acc),
                Exp::inf(&u, Exp::inf(&z, Exp::sup(&d.cut, inner))),
            ),
        ),
    );
    let tag = SeriesTag {
        kind,
        body: body.clone(),
        index: index.clone(),
        bound: bound.clone(),
    };
    Ok(Series {
        kind,
        body: body.clone(),
        index: index.clone(),
        bound: bound.clone(),
        exp: Exp::tagged(Arc::new(tag), pure),
    })
}

fn all_vars2(f: &Exp, g: &Exp) -> VarSet {
    let mut v = f.all_vars();
    v.extend(g.all_vars());
    v
}

/// `f (.) g`: the product `prod_{p=0}^{1} ([p = 0] * f + [p = 1] * g)`,
/// with a fresh index `p`.
pub fn odot(f: &Exp, g: &Exp) -> Result<Exp> {
    let p = fresh_or_same(&product_index(), &all_vars2(f, g));
    let is = |k: u64| BExpr::eq(AExpr::var(&p), AExpr::lit(k));
    let body = Exp::add(Exp::guard(is(0), f.clone()), Exp::guard(is(1), g.clone()));
    Ok(make_series(Aggregate::Product, &body, &p, &AExpr::one())?.exp)
}

#[derive(Debug)]
struct Times(Exp, Exp);

impl Intrinsic for Times {
    fn eval(&self, ev: &Evaluator, s: &State) -> XReal {
        Aggregate::Product.fold([ev.exp(&self.0, s), ev.exp(&self.1, s)])
    }
}

/// The product of two expectations through their Dedekind cuts:
/// `sup c1: sup c2: c1 * c2 * Q1: Q2: [phi1 && phi2]`, where
/// `Q1: [phi1]` and `Q2: [phi2]` are the Dedekind normal forms with their
/// variables renamed apart.
pub fn dedekind_product(f: &Exp, g: &Exp) -> Result<Exp> {
    let d1: Dnf = to_dnf(f, DEFAULT_SUMMAND_CAP)?;
    let mut taken = all_vars2(f, g);
    taken.extend(d1.prefix.iter().map(|(_, v)| v.clone()));
    taken.insert(d1.cut.clone());
    let d2 = to_dnf(g, DEFAULT_SUMMAND_CAP)?.rename_apart(&taken);
    let mut prefix = d1.prefix.clone();
    prefix.extend(d2.prefix.iter().cloned());
    let body = Exp::with_prefix(
        &prefix,
        Exp::indicator(BExpr::and(d1.matrix.clone(), d2.matrix.clone())),
    );
    let pure = Exp::sup(
        &d1.cut,
        Exp::sup(
            &d2.cut,
            Exp::scale(AExpr::mul(AExpr::var(&d1.cut), AExpr::var(&d2.cut)), body),
        ),
    );
    Ok(Exp::tagged(Arc::new(Times(f.clone(), g.clone())), pure))
}

#[derive(Debug)]
struct Quotient {
    num: AExpr,
    den: AExpr,
}

impl Intrinsic for Quotient {
    fn eval(&self, _ev: &Evaluator, s: &State) -> XReal {
        let a = eval_aexpr(&self.num, s);
        let b = eval_aexpr(&self.den, s);
        match a.div(&b) {
            Some(q) => XReal::Fin(q),
            None if a.is_zero() => XReal::Inf,
            None => XReal::zero(),
        }
    }
}

/// `a / b` as `sup w: [w * b = a] * w`. With `b = 0` the supremum is `0`
/// for `a > 0` and unbounded for `a = 0`.
pub fn quotient(a: AExpr, b: AExpr) -> Exp {
    let mut avoid = a.free_vars();
    avoid.extend(b.free_vars());
    let w = fresh_or_same(&Var::reserved("$w"), &avoid);
    let pure = Exp::sup(
        &w,
        Exp::guard(
            BExpr::eq(AExpr::mul(AExpr::var(&w), b.clone()), a.clone()),
            Exp::var(&w),
        ),
    );
    Exp::tagged(Arc::new(Quotient { num: a, den: b }), pure)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_exp;
    use crate::semantics::QDomain;

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn x() -> Var {
        Var::new("x").unwrap()
    }

    fn oracle() -> Evaluator {
        Evaluator::oracle(QDomain::naturals(4))
    }

    #[test]
    fn harmonic_sum() {
        let body = parse_exp("1 / $s").unwrap();
        let s = make_sum(&body, &AExpr::var(&x())).unwrap();
        let st = State::new().with(&x(), Rat::from_int(3));
        assert_eq!(oracle().exp(&s.exp, &st), XReal::Fin(r("11/6")));
    }

    #[test]
    fn products() {
        let fact = parse_exp("[$p = 0] * 1 + [1 <= $p] * $p").unwrap();
        let p = make_product(&fact, &AExpr::lit(5)).unwrap();
        assert_eq!(oracle().exp(&p.exp, &State::new()), XReal::Fin(r("120")));
        let b = parse_exp("[$p = 0] * 2 + [1 <= $p] * 3").unwrap();
        let p = make_product(&b, &AExpr::lit(2)).unwrap();
        assert_eq!(oracle().exp(&p.exp, &State::new()), XReal::Fin(r("18")));
    }

    #[test]
    fn non_natural_bound_is_zero() {
        let s = make_sum(&Exp::one(), &AExpr::var(&x())).unwrap();
        let st = State::new().with(&x(), r("1/2"));
        assert_eq!(oracle().exp(&s.exp, &st), XReal::zero());
    }

    #[test]
    fn odot_and_cut_product() {
        let f = parse_exp("[x < 1] * 5").unwrap();
        let g = parse_exp("sup v: [v < 2] * v").unwrap();
        let dom = QDomain::from_values(["0", "1", "3/2", "7/4"].map(r));
        let ev = Evaluator::oracle(dom);
        let prod = odot(&f, &g).unwrap();
        assert_eq!(ev.exp(&prod, &State::new()), XReal::Fin(r("35/4")));
        let zero = odot(&f, &Exp::zero()).unwrap();
        assert_eq!(ev.exp(&zero, &State::new()), XReal::zero());
        let dp = dedekind_product(&Exp::zero(), &parse_exp("sup v: v").unwrap()).unwrap();
        assert_eq!(ev.exp(&dp, &State::new()), XReal::zero());
    }

    #[test]
    fn restricted_cut_product_takes_best_pair_below() {
        let dp = dedekind_product(&Exp::lit(2), &Exp::lit(3)).unwrap();
        let dom = QDomain::from_values(["0", "1", "3/2", "5/2", "3"].map(r));
        let got = Evaluator::restricted(dom).exp(&dp, &State::new());
        assert_eq!(got, XReal::Fin(r("15/4")));
    }
}
