//! First-order arithmetic inside expectations: definability of the
//! naturals, relativization of formulas over the naturals, and the Iverson
//! embedding of formulas as {0,1}-valued expectations.

use std::sync::Arc;

use crate::ast::{AExpr, BExpr, Exp, FoTag, Formula, Var, VarSet};
use crate::error::{Error, Result};
use crate::normalform::formula_to_prenex;
use crate::semantics::{Evaluator, FoIntrinsic, Intrinsic, State, XReal};

/// Truth of `N(x)`: the value of `x` is a natural number.
#[derive(Debug)]
struct IsNat(Var);

impl FoIntrinsic for IsNat {
    fn holds(&self, _ev: &Evaluator, s: &State) -> bool {
        s.get(&self.0).is_integer()
    }
}

fn suffixed(base: &str, x: &Var) -> Var {
    let body = x.name().replace('$', "d_");
    Var::reserved(&format!("{base}_{body}"))
}

/// Robinson's formula `A(k)` with every quantifier read over the
/// non-negative rationals; it holds exactly when `x` is a natural number.
///
/// Bound names are derived from `x`, so formulas for different variables
/// never share binders. The formula is tagged with a direct integrality
/// check, which oracle-assisted evaluation uses in place of the
/// quantifiers.
pub fn robinson_nat_formula(x: &Var) -> Formula {
    let [a, b, m, vx, vy, vz] = ["a", "b", "m", "x", "y", "z"].map(|n| suffixed(n, x));
    let var = AExpr::var;
    // Phi(a, b, t): exists x, y, z: 2 + a b t t + b z z = x x + a y y
    let phi = |t: AExpr| {
        let lhs = AExpr::add(
            AExpr::add(
                AExpr::lit(2),
                AExpr::mul(AExpr::mul(AExpr::mul(var(&a), var(&b)), t.clone()), t),
            ),
            AExpr::mul(AExpr::mul(var(&b), var(&vz)), var(&vz)),
        );
        let rhs = AExpr::add(
            AExpr::mul(var(&vx), var(&vx)),
            AExpr::mul(AExpr::mul(var(&a), var(&vy)), var(&vy)),
        );
        Formula::exists_all(
            &[vx.clone(), vy.clone(), vz.clone()],
            Formula::atom(BExpr::eq(lhs, rhs)),
        )
    };
    let base = Formula::and(
        phi(AExpr::zero()),
        Formula::forall(
            &m,
            Formula::implies(phi(var(&m)), phi(AExpr::add(var(&m), AExpr::one()))),
        ),
    );
    let body = Formula::forall_all(&[a.clone(), b.clone()], Formula::implies(base, phi(var(x))));
    Formula::tagged(Arc::new(IsNat(x.clone())) as FoTag, body)
}

/// `N(v)` for every `v`, as a conjunction (`true` when empty).
pub fn nat_guards<'a>(vars: impl IntoIterator<Item = &'a Var>) -> Formula {
    Formula::all(vars.into_iter().map(robinson_nat_formula))
}

/// Embeds a prenex formula over the naturals into the rationals: universal
/// binders get an `N(x) ->` guard, existential binders stay as they are,
/// and the matrix is conjoined with `N(x)` for each of its free variables.
pub fn fo_nat_to_rat(p: &Formula) -> Result<Formula> {
    if !p.is_prenex() {
        return Err(Error::NotPrenex);
    }
    Ok(nat_to_rat_go(p.untagged()))
}

fn nat_to_rat_go(p: &Formula) -> Formula {
    match p {
        Formula::Exists(v, a) => Formula::exists(v, nat_to_rat_go(a.untagged())),
        Formula::Forall(v, a) => Formula::forall(
            v,
            Formula::implies(robinson_nat_formula(v), nat_to_rat_go(a.untagged())),
        ),
        matrix => {
            let fv = matrix.free_vars();
            if fv.is_empty() {
                matrix.clone()
            } else {
                Formula::and(matrix.clone(), nat_guards(&fv))
            }
        }
    }
}

/// Relativizes a formula over the naturals to the rationals at any
/// nesting depth: free variables are guarded once at the top, `exists x`
/// becomes `exists x: N(x) and ...` and `forall x` becomes
/// `forall x: N(x) implies ...`. Tags are kept; a tag on a formula over the
/// naturals must already be false at non-natural arguments.
pub fn relativize_nat(p: &Formula) -> Formula {
    let fv = p.free_vars();
    let inner = relativize_go(p);
    if fv.is_empty() {
        inner
    } else {
        Formula::and(nat_guards(&fv), inner)
    }
}

fn relativize_go(p: &Formula) -> Formula {
    match p {
        Formula::Atom(_) => p.clone(),
        Formula::And(a, b) => Formula::and(relativize_go(a), relativize_go(b)),
        Formula::Or(a, b) => Formula::or(relativize_go(a), relativize_go(b)),
        Formula::Implies(a, b) => Formula::implies(relativize_go(a), relativize_go(b)),
        Formula::Not(a) => Formula::not(relativize_go(a)),
        Formula::Exists(v, a) => {
            Formula::exists(v, Formula::and(robinson_nat_formula(v), relativize_go(a)))
        }
        Formula::Forall(v, a) => Formula::forall(
            v,
            Formula::implies(robinson_nat_formula(v), relativize_go(a)),
        ),
        Formula::Tagged(t, a) => Formula::tagged(t.clone(), relativize_go(a)),
    }
}

/// The Iverson embedding of a prenex formula: `exists` becomes `sup`,
/// `forall` becomes `inf` and the matrix `b` becomes `[b] * 1`.
pub fn fo_to_exp(p: &Formula) -> Result<Exp> {
    if !p.is_prenex() {
        return Err(Error::NotPrenex);
    }
    Ok(fo_to_exp_go(p.untagged()))
}

fn fo_to_exp_go(p: &Formula) -> Exp {
    match p {
        Formula::Exists(v, a) => Exp::sup(v, fo_to_exp_go(a.untagged())),
        Formula::Forall(v, a) => Exp::inf(v, fo_to_exp_go(a.untagged())),
        matrix => Exp::indicator(matrix.to_bexpr().expect("prenex matrix is quantifier-free")),
    }
}

#[derive(Debug)]
struct Truth(Formula);

impl Intrinsic for Truth {
    fn eval(&self, ev: &Evaluator, s: &State) -> XReal {
        if ev.formula(&self.0, s) {
            XReal::one()
        } else {
            XReal::zero()
        }
    }
}

/// `[P]` for any formula: the Iverson embedding of its prenex form, tagged
/// so that oracle-assisted evaluation decides `P` itself (using the tags
/// inside `P`).
pub fn iverson(p: &Formula) -> Exp {
    let pure = fo_to_exp(&formula_to_prenex(p)).expect("prenex form");
    Exp::tagged(Arc::new(Truth(p.clone())), pure)
}

/// Fresh helper name `$base` (primed as needed) avoiding `avoid`.
pub(crate) fn helper(base: &str, avoid: &VarSet) -> Var {
    crate::ast::fresh_or_same(&Var::reserved(base), avoid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_formula;
    use crate::semantics::{QDomain, Rat};

    fn v(s: &str) -> Var {
        Var::parse_any(s).unwrap()
    }

    #[test]
    fn robinson_shape() {
        let k = v("k");
        let n = robinson_nat_formula(&k);
        assert_eq!(n.free_vars(), [k.clone()].into_iter().collect());
        assert!(n.to_string().contains(
            "2 + $a_k * $b_k * k * k + $b_k * $z_k * $z_k = $x_k * $x_k + $a_k * $y_k * $y_k"
        ));
        let other = robinson_nat_formula(&v("j"));
        let bound_k: VarSet = n.all_vars().difference(&n.free_vars()).cloned().collect();
        assert!(bound_k.is_disjoint(&other.all_vars()));
    }

    #[test]
    fn nat_to_rat_rows() {
        let p = parse_formula("forall v: v < x").unwrap();
        let q = fo_nat_to_rat(&p).unwrap();
        let Formula::Forall(_, body) = q.untagged() else {
            panic!()
        };
        assert!(matches!(body.untagged(), Formula::Implies(..)));
        let t = parse_formula("true").unwrap();
        assert_eq!(fo_nat_to_rat(&t).unwrap(), t);
        let np = parse_formula("x < 1 and exists v: v < 1").unwrap();
        assert_eq!(fo_nat_to_rat(&np), Err(Error::NotPrenex));
    }

    #[test]
    fn nat_to_rat_falsifies_non_naturals() {
        let p = parse_formula("exists v: x < v + 1").unwrap();
        let q = fo_nat_to_rat(&p).unwrap();
        let dom = QDomain::from_values(["0", "1/2", "1", "2"].map(|s| s.parse::<Rat>().unwrap()));
        let ev = Evaluator::oracle(dom);
        let x = v("x");
        assert!(ev.formula(&q, &State::new().with(&x, Rat::one())));
        assert!(!ev.formula(&q, &State::new().with(&x, "1/2".parse().unwrap())));
    }

    #[test]
    fn iverson_rows() {
        let p = parse_formula("exists v: v < 1").unwrap();
        assert_eq!(fo_to_exp(&p).unwrap().to_string(), "sup v: [v < 1] * 1");
        let all = parse_formula("forall v: 0 <= v").unwrap();
        let dom = QDomain::naturals(4);
        let e = fo_to_exp(&all).unwrap();
        assert_eq!(
            Evaluator::restricted(dom).exp(&e, &State::new()),
            XReal::one()
        );
    }
}
