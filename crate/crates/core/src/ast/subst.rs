//! Capture-avoiding substitution of arithmetic terms for variables.
//!
//! All functions substitute simultaneously. Internally they return `None`
//! when nothing changed so that unchanged subtrees stay shared.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{fresh_from, AExpr, BExpr, Exp, Formula, Var, VarSet};
use crate::semantics::substituted_tag;

pub type SubstMap = BTreeMap<Var, AExpr>;

fn a_opt(a: &AExpr, m: &SubstMap) -> Option<AExpr> {
    match a {
        AExpr::Lit(_) => None,
        AExpr::Var(v) => m.get(v).cloned(),
        AExpr::Add(l, r) | AExpr::Mul(l, r) | AExpr::Monus(l, r) => {
            let (nl, nr) = (a_opt(l, m), a_opt(r, m));
            if nl.is_none() && nr.is_none() {
                return None;
            }
            let l = nl.map(Arc::new).unwrap_or_else(|| l.clone());
            let r = nr.map(Arc::new).unwrap_or_else(|| r.clone());
            Some(match a {
                AExpr::Add(..) => AExpr::Add(l, r),
                AExpr::Mul(..) => AExpr::Mul(l, r),
                _ => AExpr::Monus(l, r),
            })
        }
    }
}

fn b_opt(b: &BExpr, m: &SubstMap) -> Option<BExpr> {
    match b {
        BExpr::Lt(x, y) => {
            let (nx, ny) = (a_opt(x, m), a_opt(y, m));
            if nx.is_none() && ny.is_none() {
                return None;
            }
            Some(BExpr::Lt(
                nx.unwrap_or_else(|| x.clone()),
                ny.unwrap_or_else(|| y.clone()),
            ))
        }
        BExpr::And(l, r) => {
            let (nl, nr) = (b_opt(l, m), b_opt(r, m));
            if nl.is_none() && nr.is_none() {
                return None;
            }
            Some(BExpr::And(
                nl.map(Arc::new).unwrap_or_else(|| l.clone()),
                nr.map(Arc::new).unwrap_or_else(|| r.clone()),
            ))
        }
        BExpr::Not(x) => b_opt(x, m).map(BExpr::not),
    }
}

fn rhs_vars(m: &SubstMap) -> VarSet {
    let mut out = VarSet::new();
    for (k, t) in m {
        out.insert(k.clone());
        t.free_vars_into(&mut out);
    }
    out
}

fn captures(v: &Var, m: &SubstMap) -> bool {
    m.values().any(|t| t.free_vars().contains(v))
}

/// Handles a binder `v` over `body`: drops `v` from the map and renames it
/// when a substituted term mentions it. Returns the binder to use and the
/// map for the body, or `None` when the body is untouched.
fn enter_binder(
    v: &Var,
    body_free: impl FnOnce() -> VarSet,
    body_all: impl FnOnce() -> VarSet,
    m: &SubstMap,
) -> Option<(Var, SubstMap)> {
    let mut inner = m.clone();
    inner.remove(v);
    if inner.is_empty() {
        return None;
    }
    if captures(v, &inner) {
        let free = body_free();
        inner.retain(|k, _| free.contains(k));
        if inner.is_empty() {
            return None;
        }
        if captures(v, &inner) {
            let mut avoid = rhs_vars(&inner);
            avoid.extend(body_all());
            avoid.insert(v.clone());
            let nv = fresh_from(v, &avoid);
            inner.insert(v.clone(), AExpr::Var(nv.clone()));
            return Some((nv, inner));
        }
    }
    Some((v.clone(), inner))
}

fn e_opt(e: &Exp, m: &SubstMap) -> Option<Exp> {
    match e {
        Exp::Arith(a) => a_opt(a, m).map(Exp::Arith),
        Exp::Guard(b, f) => {
            let (nb, nf) = (b_opt(b, m), e_opt(f, m));
            if nb.is_none() && nf.is_none() {
                return None;
            }
            Some(Exp::Guard(
                nb.unwrap_or_else(|| b.clone()),
                nf.map(Arc::new).unwrap_or_else(|| f.clone()),
            ))
        }
        Exp::Scale(a, f) => {
            let (na, nf) = (a_opt(a, m), e_opt(f, m));
            if na.is_none() && nf.is_none() {
                return None;
            }
            Some(Exp::Scale(
                na.unwrap_or_else(|| a.clone()),
                nf.map(Arc::new).unwrap_or_else(|| f.clone()),
            ))
        }
        Exp::Add(f, g) => {
            let (nf, ng) = (e_opt(f, m), e_opt(g, m));
            if nf.is_none() && ng.is_none() {
                return None;
            }
            Some(Exp::Add(
                nf.map(Arc::new).unwrap_or_else(|| f.clone()),
                ng.map(Arc::new).unwrap_or_else(|| g.clone()),
            ))
        }
        Exp::Sup(v, f) | Exp::Inf(v, f) => {
            let (nv, inner) = enter_binder(v, || f.free_vars(), || f.all_vars(), m)?;
            let renamed = nv != *v;
            let nf = e_opt(f, &inner);
            if nf.is_none() && !renamed {
                return None;
            }
            let nf = nf.map(Arc::new).unwrap_or_else(|| f.clone());
            Some(match e {
                Exp::Sup(..) => Exp::Sup(nv, nf),
                _ => Exp::Inf(nv, nf),
            })
        }
        Exp::Tagged(tag, f) => {
            let nf = e_opt(f, m)?;
            Some(Exp::Tagged(
                substituted_tag(tag.clone(), m.clone()),
                Arc::new(nf),
            ))
        }
    }
}

fn f_opt(p: &Formula, m: &SubstMap) -> Option<Formula> {
    match p {
        Formula::Atom(b) => b_opt(b, m).map(Formula::Atom),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
            let (na, nb) = (f_opt(a, m), f_opt(b, m));
            if na.is_none() && nb.is_none() {
                return None;
            }
            let a = na.map(Arc::new).unwrap_or_else(|| a.clone());
            let b = nb.map(Arc::new).unwrap_or_else(|| b.clone());
            Some(match p {
                Formula::And(..) => Formula::And(a, b),
                Formula::Or(..) => Formula::Or(a, b),
                _ => Formula::Implies(a, b),
            })
        }
        Formula::Not(a) => f_opt(a, m).map(Formula::not),
        Formula::Exists(v, a) | Formula::Forall(v, a) => {
            let (nv, inner) = enter_binder(v, || a.free_vars(), || a.all_vars(), m)?;
            let renamed = nv != *v;
            let na = f_opt(a, &inner);
            if na.is_none() && !renamed {
                return None;
            }
            let na = na.map(Arc::new).unwrap_or_else(|| a.clone());
            Some(match p {
                Formula::Exists(..) => Formula::Exists(nv, na),
                _ => Formula::Forall(nv, na),
            })
        }
        Formula::Tagged(tag, a) => {
            let na = f_opt(a, m)?;
            Some(Formula::Tagged(
                crate::semantics::substituted_fo_tag(tag.clone(), m.clone()),
                Arc::new(na),
            ))
        }
    }
}

pub fn subst_aexpr(a: &AExpr, x: &Var, t: &AExpr) -> AExpr {
    let m = SubstMap::from([(x.clone(), t.clone())]);
    a_opt(a, &m).unwrap_or_else(|| a.clone())
}

pub fn subst_aexpr_many(a: &AExpr, m: &SubstMap) -> AExpr {
    a_opt(a, m).unwrap_or_else(|| a.clone())
}

pub fn subst_bexpr(b: &BExpr, x: &Var, t: &AExpr) -> BExpr {
    let m = SubstMap::from([(x.clone(), t.clone())]);
    b_opt(b, &m).unwrap_or_else(|| b.clone())
}

pub fn subst_bexpr_many(b: &BExpr, m: &SubstMap) -> BExpr {
    b_opt(b, m).unwrap_or_else(|| b.clone())
}

/// `f[x / t]`, renaming bound variables that would capture a variable of `t`.
pub fn subst_exp(f: &Exp, x: &Var, t: &AExpr) -> Exp {
    let m = SubstMap::from([(x.clone(), t.clone())]);
    e_opt(f, &m).unwrap_or_else(|| f.clone())
}

/// Simultaneous substitution.
pub fn subst_exp_many(f: &Exp, m: &SubstMap) -> Exp {
    if m.is_empty() {
        return f.clone();
    }
    e_opt(f, m).unwrap_or_else(|| f.clone())
}

pub fn subst_formula(p: &Formula, x: &Var, t: &AExpr) -> Formula {
    let m = SubstMap::from([(x.clone(), t.clone())]);
    f_opt(p, &m).unwrap_or_else(|| p.clone())
}

pub fn subst_formula_many(p: &Formula, m: &SubstMap) -> Formula {
    if m.is_empty() {
        return p.clone();
    }
    f_opt(p, m).unwrap_or_else(|| p.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_exp;

    fn v(s: &str) -> Var {
        Var::new(s).unwrap()
    }

    #[test]
    fn capture_avoidance() {
        let f = parse_exp("sup v: v + x").unwrap();
        let g = subst_exp(&f, &v("x"), &AExpr::var(&v("v")));
        assert_eq!(g.to_string(), "sup v': v' + v");
    }

    #[test]
    fn bound_variable_untouched() {
        let f = parse_exp("sup x: x + 1").unwrap();
        assert_eq!(subst_exp(&f, &v("x"), &AExpr::lit(5)), f);
    }

    #[test]
    fn simultaneous() {
        let f = parse_exp("x + [y < x] * y").unwrap();
        let m = SubstMap::from([(v("x"), AExpr::var(&v("y"))), (v("y"), AExpr::var(&v("x")))]);
        assert_eq!(subst_exp_many(&f, &m).to_string(), "y + [x < y] * x");
    }
}
