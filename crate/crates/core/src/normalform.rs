//! Prenex, summation and Dedekind normal forms of expectations, plus
//! prenexing of first-order formulas.
//!
//! Quantifiers are pulled out with four rules, each for `sup` and `inf`:
//!
//! ```text
//! (Q v: f) + g  ~>  Q v': f[v/v'] + g
//! g + (Q v: f)  ~>  Q v': g + f[v/v']
//! a * (Q v: f)  ~>  Q v': a * f[v/v']
//! [b] * (Q v: f) ~> Q v': [b] * f[v/v']
//! ```
//!
//! where `v'` is fresh. Over a non-empty quantifier domain each rule
//! preserves the restricted value exactly.

use std::sync::Arc;

use crate::ast::{
    fresh_from, fresh_or_same, subst_aexpr_many, subst_bexpr_many, subst_exp, subst_exp_many,
    subst_formula_many, AExpr, BExpr, Exp, Formula, Quant, SubstMap, Var, VarSet,
};
use crate::error::{Error, Result};

/// `Q_1 v_1 ... Q_m v_m: matrix` with a quantifier-free matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prenex {
    pub prefix: Vec<(Quant, Var)>,
    pub matrix: Exp,
}

impl Prenex {
    pub fn to_exp(&self) -> Exp {
        Exp::with_prefix(&self.prefix, self.matrix.clone())
    }
}

/// One pull step at the root of `f`, if a rule applies there.
pub fn pull_step(f: &Exp) -> Option<Exp> {
    let avoid = f.all_vars();
    let rebind = |q: Quant, v: &Var, body: &Exp, wrap: &dyn Fn(Exp) -> Exp| {
        let nv = fresh_from(v, &avoid);
        let body = subst_exp(body, v, &AExpr::var(&nv));
        Exp::quant(q, &nv, wrap(body))
    };
    let quant = |e: &Exp| match e.untagged() {
        Exp::Sup(v, g) => Some((Quant::Sup, v.clone(), (**g).clone())),
        Exp::Inf(v, g) => Some((Quant::Inf, v.clone(), (**g).clone())),
        _ => None,
    };
    match f.untagged() {
        Exp::Add(l, r) => {
            if let Some((q, v, g)) = quant(l) {
                let r = (**r).clone();
                Some(rebind(q, &v, &g, &|b| Exp::add(b, r.clone())))
            } else if let Some((q, v, g)) = quant(r) {
                let l = (**l).clone();
                Some(rebind(q, &v, &g, &|b| Exp::add(l.clone(), b)))
            } else {
                None
            }
        }
        Exp::Scale(a, g) => {
            let (q, v, g) = quant(g)?;
            Some(rebind(q, &v, &g, &|b| Exp::scale(a.clone(), b)))
        }
        Exp::Guard(c, g) => {
            let (q, v, g) = quant(g)?;
            Some(rebind(q, &v, &g, &|b| Exp::guard(c.clone(), b)))
        }
        _ => None,
    }
}

struct Namer {
    /// Free variables of the input and names handed out so far.
    taken: VarSet,
    /// Every name occurring in the input and names handed out so far.
    all: VarSet,
}

impl Namer {
    fn new(free: VarSet, all: VarSet) -> Namer {
        Namer { taken: free, all }
    }

    /// Keeps an outermost binder's name when it is still unused.
    fn keep(&mut self, v: &Var) -> Var {
        let nv = fresh_or_same(v, &self.taken);
        let nv = if nv != *v {
            fresh_from(v, &self.all)
        } else {
            nv
        };
        self.taken.insert(nv.clone());
        self.all.insert(nv.clone());
        nv
    }

    /// A binder pulled over an operator always gets a fresh name.
    fn fresh(&mut self, v: &Var) -> Var {
        let nv = fresh_from(v, &self.all);
        self.taken.insert(nv.clone());
        self.all.insert(nv.clone());
        nv
    }
}

fn prenex_go(f: &Exp, env: &SubstMap, names: &mut Namer, outer: bool) -> (Vec<(Quant, Var)>, Exp) {
    match f {
        Exp::Arith(a) => (vec![], Exp::Arith(subst_aexpr_many(a, env))),
        Exp::Guard(b, g) => {
            let (p, m) = prenex_go(g, env, names, false);
            (p, Exp::guard(subst_bexpr_many(b, env), m))
        }
        Exp::Scale(a, g) => {
            let (p, m) = prenex_go(g, env, names, false);
            (p, Exp::scale(subst_aexpr_many(a, env), m))
        }
        Exp::Add(g, h) => {
            let (mut p1, m1) = prenex_go(g, env, names, false);
            let (p2, m2) = prenex_go(h, env, names, false);
            p1.extend(p2);
            (p1, Exp::add(m1, m2))
        }
        Exp::Sup(v, g) | Exp::Inf(v, g) => {
            let q = if matches!(f, Exp::Sup(..)) {
                Quant::Sup
            } else {
                Quant::Inf
            };
            let nv = if outer { names.keep(v) } else { names.fresh(v) };
            let mut env = env.clone();
            env.insert(v.clone(), AExpr::var(&nv));
            let (mut p, m) = prenex_go(g, &env, names, outer);
            p.insert(0, (q, nv));
            (p, m)
        }
        Exp::Tagged(_, g) => {
            if g.is_quantifier_free() {
                (vec![], subst_exp_many(f, env))
            } else {
                prenex_go(g, env, names, outer)
            }
        }
    }
}

/// Pulls all quantifiers to the front, leftmost-outermost first. Outermost
/// binders keep their names when possible; every binder pulled over an
/// operator is renamed fresh. Tags on subtrees that lose quantifiers are
/// dropped.
pub fn to_prenex(f: &Exp) -> Prenex {
    let mut names = Namer::new(f.free_vars(), f.all_vars());
    let (prefix, matrix) = prenex_go(f, &SubstMap::new(), &mut names, true);
    Prenex { prefix, matrix }
}

pub fn is_prenex(f: &Exp) -> bool {
    match f.untagged() {
        Exp::Sup(_, g) | Exp::Inf(_, g) => is_prenex(g),
        g => g.is_quantifier_free(),
    }
}

/// `Q: sum_i [phi_i] * a_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Snf {
    pub prefix: Vec<(Quant, Var)>,
    pub summands: Vec<(BExpr, AExpr)>,
}

impl Snf {
    pub fn to_exp(&self) -> Exp {
        let body = Exp::sum(
            self.summands
                .iter()
                .map(|(b, a)| Exp::guard(b.clone(), Exp::Arith(a.clone()))),
        );
        Exp::with_prefix(&self.prefix, body)
    }
}

fn snf_matrix(f: &Exp) -> Vec<(BExpr, AExpr)> {
    match f {
        Exp::Arith(a) => vec![(BExpr::tt(), a.clone())],
        Exp::Guard(b, g) => snf_matrix(g)
            .into_iter()
            .map(|(c, a)| (BExpr::conj(b.clone(), c), a))
            .collect(),
        Exp::Scale(k, g) => snf_matrix(g)
            .into_iter()
            .map(|(c, a)| (c, AExpr::mul(k.clone(), a)))
            .collect(),
        Exp::Add(g, h) => {
            let mut out = snf_matrix(g);
            out.extend(snf_matrix(h));
            out
        }
        Exp::Tagged(_, g) => snf_matrix(g),
        Exp::Sup(..) | Exp::Inf(..) => unreachable!("matrix is quantifier-free"),
    }
}

/// Prenex form with the matrix distributed into guarded arithmetic
/// summands.
pub fn to_snf(f: &Exp) -> Snf {
    let p = to_prenex(f);
    Snf {
        prefix: p.prefix,
        summands: snf_matrix(&p.matrix),
    }
}

/// Default bound on the number of summands turned into a Dedekind normal
/// form; the matrix has `2^n` conjuncts.
pub const DEFAULT_SUMMAND_CAP: usize = 16;

/// `Q: [matrix]` with a free cut variable: the indicator is `1` exactly
/// when the cut lies strictly below the value of the original expectation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dnf {
    pub prefix: Vec<(Quant, Var)>,
    pub cut: Var,
    pub matrix: BExpr,
}

impl Dnf {
    pub fn to_exp(&self) -> Exp {
        Exp::with_prefix(&self.prefix, Exp::indicator(self.matrix.clone()))
    }

    /// Renames the bound and cut variables that occur in `avoid`.
    pub fn rename_apart(&self, avoid: &VarSet) -> Dnf {
        let mut used = avoid.clone();
        self.matrix.free_vars_into(&mut used);
        used.extend(self.prefix.iter().map(|(_, v)| v.clone()));
        used.insert(self.cut.clone());
        let mut map = SubstMap::new();
        let mut rename = |v: &Var| -> Var {
            if avoid.contains(v) {
                let nv = fresh_from(v, &used);
                used.insert(nv.clone());
                map.insert(v.clone(), AExpr::var(&nv));
                nv
            } else {
                v.clone()
            }
        };
        let prefix: Vec<(Quant, Var)> = self.prefix.iter().map(|(q, v)| (*q, rename(v))).collect();
        let cut = rename(&self.cut);
        Dnf {
            prefix,
            cut,
            matrix: subst_bexpr_many(&self.matrix, &map),
        }
    }
}

/// The Dedekind normal form. For summands `(phi_i, a_i)` the matrix is the
/// conjunction over all sign patterns of
/// `(B_1 && ... && B_n) -> cut < T_1 + ... + T_n`, where each `(B_i, T_i)`
/// is `(phi_i, a_i)` or `(!phi_i, 0)`.
pub fn to_dnf(f: &Exp, cap: usize) -> Result<Dnf> {
    let snf = to_snf(f);
    let n = snf.summands.len();
    if n > cap {
        return Err(Error::SummandBlowup { found: n, cap });
    }
    let mut avoid = f.all_vars();
    avoid.extend(snf.prefix.iter().map(|(_, v)| v.clone()));
    let cut = fresh_or_same(&Var::reserved("$cut"), &avoid);
    let mut conjuncts = Vec::with_capacity(1 << n);
    for mask in 0..(1usize << n) {
        let mut premises = Vec::with_capacity(n);
        let mut terms = Vec::with_capacity(n);
        for (i, (phi, a)) in snf.summands.iter().enumerate() {
            if mask & (1 << (n - 1 - i)) == 0 {
                premises.push(phi.clone());
                terms.push(a.clone());
            } else {
                premises.push(BExpr::not(phi.clone()));
                terms.push(AExpr::zero());
            }
        }
        conjuncts.push(BExpr::implies(
            BExpr::all(premises),
            BExpr::lt(AExpr::var(&cut), AExpr::sum(terms)),
        ));
    }
    Ok(Dnf {
        prefix: snf.prefix,
        cut,
        matrix: BExpr::all(conjuncts),
    })
}

/// `sup cut: cut * D`, which equals the original expectation.
pub fn dnf_recover(d: &Dnf) -> Exp {
    Exp::sup(&d.cut, Exp::scale(AExpr::var(&d.cut), d.to_exp()))
}

fn formula_prenex_go(
    p: &Formula,
    env: &SubstMap,
    names: &mut Namer,
) -> (Vec<(bool, Var)>, Formula) {
    // Prefix entries are (is_exists, var).
    match p {
        Formula::Atom(_) => (vec![], subst_formula_many(p, env)),
        Formula::Tagged(_, a) => {
            if a.is_quantifier_free() {
                (vec![], subst_formula_many(p, env))
            } else {
                formula_prenex_go(a, env, names)
            }
        }
        Formula::Not(a) => {
            let (pre, m) = formula_prenex_go(a, env, names);
            (
                pre.into_iter().map(|(e, v)| (!e, v)).collect(),
                Formula::not(m),
            )
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (mut p1, m1) = formula_prenex_go(a, env, names);
            let (p2, m2) = formula_prenex_go(b, env, names);
            p1.extend(p2);
            let m = if matches!(p, Formula::And(..)) {
                Formula::And(Arc::new(m1), Arc::new(m2))
            } else {
                Formula::Or(Arc::new(m1), Arc::new(m2))
            };
            (p1, m)
        }
        Formula::Implies(a, b) => {
            let (p1, m1) = formula_prenex_go(a, env, names);
            let (p2, m2) = formula_prenex_go(b, env, names);
            let mut pre: Vec<(bool, Var)> = p1.into_iter().map(|(e, v)| (!e, v)).collect();
            pre.extend(p2);
            (pre, Formula::implies(m1, m2))
        }
        Formula::Exists(v, a) | Formula::Forall(v, a) => {
            let nv = names.keep(v);
            let mut env = env.clone();
            env.insert(v.clone(), AExpr::var(&nv));
            let (mut pre, m) = formula_prenex_go(a, &env, names);
            pre.insert(0, (matches!(p, Formula::Exists(..)), nv));
            (pre, m)
        }
    }
}

/// Classical prenex form (valid over non-empty domains). Bound variables
/// keep their names unless they clash with a free variable or an earlier
/// binder, in which case they are primed.
pub fn formula_to_prenex(p: &Formula) -> Formula {
    let mut names = Namer::new(p.free_vars(), p.all_vars());
    let (prefix, matrix) = formula_prenex_go(p, &SubstMap::new(), &mut names);
    prefix
        .into_iter()
        .rev()
        .fold(matrix, |acc, (is_exists, v)| {
            if is_exists {
                Formula::exists(&v, acc)
            } else {
                Formula::forall(&v, acc)
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_exp;
    use crate::semantics::{Evaluator, QDomain, Rat, State, XReal};

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    #[test]
    fn prenex_renames_pulled_binder() {
        let f = parse_exp("(sup v: v) + 1").unwrap();
        assert_eq!(to_prenex(&f).to_exp().to_string(), "sup v': v' + 1");
        assert_eq!(pull_step(&f).unwrap().to_string(), "sup v': v' + 1");
    }

    #[test]
    fn prenex_of_quantifier_free_is_identity() {
        let f = parse_exp("x + [x < 2] * 3").unwrap();
        let p = to_prenex(&f);
        assert!(p.prefix.is_empty());
        assert_eq!(p.matrix, f);
    }

    #[test]
    fn snf_examples() {
        let f = parse_exp("[x < 1] * ([y < 1] * x + y)").unwrap();
        let s = to_snf(&f);
        let text: Vec<String> = s
            .summands
            .iter()
            .map(|(b, a)| format!("{b} | {a}"))
            .collect();
        assert_eq!(text, ["x < 1 && y < 1 | x", "x < 1 | y"]);
        let g = parse_exp("2 * [x < 1] * x").unwrap();
        let text: Vec<String> = to_snf(&g)
            .summands
            .iter()
            .map(|(b, a)| format!("{b} | {a}"))
            .collect();
        assert_eq!(text, ["x < 1 | 2 * x"]);
    }

    #[test]
    fn dnf_of_variable() {
        let f = parse_exp("x").unwrap();
        let d = to_dnf(&f, DEFAULT_SUMMAND_CAP).unwrap();
        assert_eq!(
            d.matrix.to_string(),
            "(true -> $cut < x) && (!true -> $cut < 0)"
        );
    }

    #[test]
    fn dnf_recovers_largest_domain_point_below_value() {
        let d = to_dnf(&Exp::lit(2), DEFAULT_SUMMAND_CAP).unwrap();
        let dom = QDomain::from_values(["0", "1", "3/2", "7/4", "2"].map(r));
        let ev = Evaluator::restricted(dom);
        assert_eq!(
            ev.exp(&dnf_recover(&d), &State::new()),
            XReal::Fin(r("7/4"))
        );
    }

    #[test]
    fn summand_cap() {
        let f = parse_exp("x + [x < 1] * 1 + [x < 2] * 2").unwrap();
        assert_eq!(
            to_dnf(&f, 2),
            Err(Error::SummandBlowup { found: 3, cap: 2 })
        );
    }
}
