use std::fmt;
use std::sync::Arc;

use super::{calkin_wilf, QDomain, Rat, State, XReal};
use crate::ast::{AExpr, BExpr, Exp, FoTag, Formula, SubstMap, Tag};

/// How quantifiers and tags are evaluated.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    /// Quantifiers range over the finite domain; tags are ignored.
    Restricted,
    /// Tagged subtrees are evaluated by their tag; untagged quantifiers still
    /// range over the finite domain.
    OracleAssisted,
}

/// Evaluation hint attached to an expectation subtree. Implementations must
/// agree with the pure semantics of the subtree they tag and may only read
/// the subtree's free variables from the state.
pub trait Intrinsic: Send + Sync + fmt::Debug {
    fn eval(&self, ev: &Evaluator, state: &State) -> XReal;
}

/// Truth hint attached to a formula subtree.
pub trait FoIntrinsic: Send + Sync + fmt::Debug {
    fn holds(&self, ev: &Evaluator, state: &State) -> bool;
}

/// Evaluator for expressions, expectations and formulas.
#[derive(Clone, Debug)]
pub struct Evaluator {
    pub dom: QDomain,
    pub mode: Mode,
}

pub fn eval_aexpr(a: &AExpr, s: &State) -> Rat {
    match a {
        AExpr::Lit(r) => r.clone(),
        AExpr::Var(v) => s.get(v),
        AExpr::Add(x, y) => eval_aexpr(x, s) + eval_aexpr(y, s),
        AExpr::Mul(x, y) => eval_aexpr(x, s) * eval_aexpr(y, s),
        AExpr::Monus(x, y) => eval_aexpr(x, s).monus(&eval_aexpr(y, s)),
    }
}

pub fn eval_bexpr(b: &BExpr, s: &State) -> bool {
    match b {
        BExpr::Lt(x, y) => eval_aexpr(x, s) < eval_aexpr(y, s),
        BExpr::And(x, y) => eval_bexpr(x, s) && eval_bexpr(y, s),
        BExpr::Not(x) => !eval_bexpr(x, s),
    }
}

/// Evaluates `f` at `s` with quantifiers over `dom`.
pub fn eval_exp(f: &Exp, s: &State, dom: &QDomain, mode: Mode) -> XReal {
    Evaluator {
        dom: dom.clone(),
        mode,
    }
    .exp(f, s)
}

/// Calkin-Wilf prefix of length `k` extended with the constants of `f` and
/// the values of `s`.
pub fn default_domain(f: &Exp, s: &State, k: usize) -> QDomain {
    calkin_wilf(k, f.constants().into_iter().chain(s.values().cloned()))
}

impl Evaluator {
    pub fn new(dom: QDomain, mode: Mode) -> Evaluator {
        Evaluator { dom, mode }
    }

    pub fn restricted(dom: QDomain) -> Evaluator {
        Evaluator::new(dom, Mode::Restricted)
    }

    pub fn oracle(dom: QDomain) -> Evaluator {
        Evaluator::new(dom, Mode::OracleAssisted)
    }

    pub fn exp(&self, f: &Exp, s: &State) -> XReal {
        match f {
            Exp::Arith(a) => XReal::Fin(eval_aexpr(a, s)),
            Exp::Guard(b, g) => {
                if eval_bexpr(b, s) {
                    self.exp(g, s)
                } else {
                    XReal::zero()
                }
            }
            Exp::Add(g, h) => {
                let x = self.exp(g, s);
                if x.is_inf() {
                    return x;
                }
                &x + &self.exp(h, s)
            }
            Exp::Scale(a, g) => {
                let r = eval_aexpr(a, s);
                if r.is_zero() {
                    return XReal::zero();
                }
                self.exp(g, s).scale(&r)
            }
            Exp::Sup(v, g) => {
                let mut best = XReal::zero();
                for r in self.dom.values() {
                    let x = self.exp(g, &s.with(v, r.clone()));
                    if x > best {
                        best = x;
                        if best.is_inf() {
                            break;
                        }
                    }
                }
                best
            }
            Exp::Inf(v, g) => {
                let mut best = XReal::Inf;
                for r in self.dom.values() {
                    let x = self.exp(g, &s.with(v, r.clone()));
                    if x < best {
                        best = x;
                        if best.is_zero() {
                            break;
                        }
                    }
                }
                best
            }
            Exp::Tagged(tag, g) => match self.mode {
                Mode::OracleAssisted => tag.eval(self, s),
                Mode::Restricted => self.exp(g, s),
            },
        }
    }

    /// Truth of `p` at `s`; quantifiers range over the domain.
    pub fn formula(&self, p: &Formula, s: &State) -> bool {
        match p {
            Formula::Atom(b) => eval_bexpr(b, s),
            Formula::And(a, b) => self.formula(a, s) && self.formula(b, s),
            Formula::Or(a, b) => self.formula(a, s) || self.formula(b, s),
            Formula::Implies(a, b) => !self.formula(a, s) || self.formula(b, s),
            Formula::Not(a) => !self.formula(a, s),
            Formula::Exists(v, a) => self
                .dom
                .values()
                .iter()
                .any(|r| self.formula(a, &s.with(v, r.clone()))),
            Formula::Forall(v, a) => self
                .dom
                .values()
                .iter()
                .all(|r| self.formula(a, &s.with(v, r.clone()))),
            Formula::Tagged(tag, a) => match self.mode {
                Mode::OracleAssisted => tag.holds(self, s),
                Mode::Restricted => self.formula(a, s),
            },
        }
    }
}

/// Applies a simultaneous substitution to a state: each variable gets the
/// value its term has in the original state.
fn shift(m: &SubstMap, s: &State) -> State {
    let mut out = s.clone();
    for (x, t) in m {
        out.set(x, eval_aexpr(t, s));
    }
    out
}

#[derive(Debug)]
struct Substituted {
    inner: Tag,
    map: SubstMap,
}

impl Intrinsic for Substituted {
    fn eval(&self, ev: &Evaluator, s: &State) -> XReal {
        self.inner.eval(ev, &shift(&self.map, s))
    }
}

/// The tag of `f[m]` given the tag of `f`: by the substitution lemma it is
/// the old tag evaluated in the shifted state.
pub fn substituted_tag(inner: Tag, map: SubstMap) -> Tag {
    Arc::new(Substituted { inner, map })
}

#[derive(Debug)]
struct SubstitutedFo {
    inner: FoTag,
    map: SubstMap,
}

impl FoIntrinsic for SubstitutedFo {
    fn holds(&self, ev: &Evaluator, s: &State) -> bool {
        self.inner.holds(ev, &shift(&self.map, s))
    }
}

pub fn substituted_fo_tag(inner: FoTag, map: SubstMap) -> FoTag {
    Arc::new(SubstitutedFo { inner, map })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_exp, Var};

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn restricted_sup_picks_largest_witness() {
        let f = parse_exp("sup v: [v * v < 2] * v").unwrap();
        let dom = QDomain::from_values([r("0"), r("1"), r("4/3"), r("3/2")]);
        assert_eq!(
            eval_exp(&f, &State::new(), &dom, Mode::Restricted),
            XReal::Fin(r("4/3"))
        );
    }

    #[test]
    fn empty_domain_conventions() {
        let dom = QDomain::default();
        let s = State::new();
        assert_eq!(
            eval_exp(&parse_exp("sup v: v").unwrap(), &s, &dom, Mode::Restricted),
            XReal::zero()
        );
        assert_eq!(
            eval_exp(&parse_exp("inf v: v").unwrap(), &s, &dom, Mode::Restricted),
            XReal::Inf
        );
    }

    #[test]
    fn monus_in_expectation() {
        let f = parse_exp("x - 3").unwrap();
        let x = Var::new("x").unwrap();
        let s = State::new().with(&x, r("2"));
        assert_eq!(
            eval_exp(&f, &s, &QDomain::default(), Mode::Restricted),
            XReal::zero()
        );
    }
}
