//! Concrete syntax printing. Every printer emits text that parses back to
//! the same tree (for expectations: the same canonical tree).

use std::fmt::{self, Display, Formatter, Write};

use super::{AExpr, BExpr, Exp, Formula, Program};
use crate::semantics::Rat;

const A_SUM: u8 = 1;
const A_MUL: u8 = 2;
const A_ATOM: u8 = 3;

fn aexpr_prec(a: &AExpr) -> u8 {
    match a {
        AExpr::Add(..) | AExpr::Monus(..) => A_SUM,
        AExpr::Mul(..) => A_MUL,
        AExpr::Lit(_) | AExpr::Var(_) => A_ATOM,
    }
}

/// Prints `a`, parenthesized when its precedence is below `min`.
fn write_aexpr(out: &mut Formatter<'_>, a: &AExpr, min: u8) -> fmt::Result {
    let p = aexpr_prec(a);
    if p < min {
        out.write_char('(')?;
    }
    match a {
        AExpr::Lit(r) => write!(out, "{r}")?,
        AExpr::Var(v) => write!(out, "{v}")?,
        AExpr::Add(l, r) | AExpr::Monus(l, r) | AExpr::Mul(l, r) => {
            let op = match a {
                AExpr::Add(..) => " + ",
                AExpr::Monus(..) => " - ",
                _ => " * ",
            };
            write_aexpr(out, l, p)?;
            out.write_str(op)?;
            write_aexpr(out, r, p + 1)?;
        }
    }
    if p < min {
        out.write_char(')')?;
    }
    Ok(())
}

impl Display for AExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_aexpr(f, self, 0)
    }
}

const B_IMPL: u8 = 1;
const B_OR: u8 = 2;
const B_AND: u8 = 3;
const B_NOT: u8 = 4;
const B_ATOM: u8 = 5;

/// Surface view of a Boolean expression, recovering the sugar the parser
/// lowers.
enum BView<'a> {
    True,
    False,
    Eq(&'a AExpr, &'a AExpr),
    Le(&'a AExpr, &'a AExpr),
    Lt(&'a AExpr, &'a AExpr),
    Or(&'a BExpr, &'a BExpr),
    Implies(&'a BExpr, &'a BExpr),
    And(&'a BExpr, &'a BExpr),
    Not(&'a BExpr),
}

fn is_zero_lit(a: &AExpr) -> bool {
    a.is_lit(&Rat::zero())
}

fn view(b: &BExpr) -> BView<'_> {
    match b {
        BExpr::Lt(x, y) if is_zero_lit(x) && is_zero_lit(y) => BView::False,
        BExpr::Lt(x, y) => BView::Lt(x, y),
        BExpr::And(l, r) => {
            if let (BExpr::Not(l), BExpr::Not(r)) = (&**l, &**r) {
                if let (BExpr::Lt(a, b), BExpr::Lt(b2, a2)) = (&**l, &**r) {
                    if a == a2 && b == b2 {
                        return BView::Eq(a, b);
                    }
                }
            }
            BView::And(l, r)
        }
        BExpr::Not(inner) => match &**inner {
            BExpr::Lt(x, y) if is_zero_lit(x) && is_zero_lit(y) => BView::True,
            BExpr::Lt(x, y) => BView::Le(y, x),
            BExpr::And(l, r) => match (&**l, &**r) {
                // `true -> b` and `false -> b` read better than `false || b`
                // and `true || b`, which are the same trees.
                (BExpr::Not(a), BExpr::Not(b)) if a.is_tt() || **a == BExpr::ff() => {
                    BView::Implies(l, b)
                }
                (BExpr::Not(a), BExpr::Not(b)) => BView::Or(a, b),
                (a, BExpr::Not(b)) => BView::Implies(a, b),
                _ => BView::Not(inner),
            },
            BExpr::Not(_) => BView::Not(inner),
        },
    }
}

fn bexpr_prec(v: &BView<'_>) -> u8 {
    match v {
        BView::Implies(..) => B_IMPL,
        BView::Or(..) => B_OR,
        BView::And(..) => B_AND,
        BView::Not(..) => B_NOT,
        _ => B_ATOM,
    }
}

fn write_bexpr(out: &mut Formatter<'_>, b: &BExpr, min: u8) -> fmt::Result {
    let v = view(b);
    let p = bexpr_prec(&v);
    if p < min {
        out.write_char('(')?;
    }
    match v {
        BView::True => out.write_str("true")?,
        BView::False => out.write_str("false")?,
        BView::Eq(a, c) | BView::Le(a, c) | BView::Lt(a, c) => {
            let op = match v {
                BView::Eq(..) => " = ",
                BView::Le(..) => " <= ",
                _ => " < ",
            };
            write_aexpr(out, a, 0)?;
            out.write_str(op)?;
            write_aexpr(out, c, 0)?;
        }
        BView::Or(l, r) => {
            write_bexpr(out, l, B_OR)?;
            out.write_str(" || ")?;
            write_bexpr(out, r, B_OR + 1)?;
        }
        BView::And(l, r) => {
            write_bexpr(out, l, B_AND)?;
            out.write_str(" && ")?;
            write_bexpr(out, r, B_AND + 1)?;
        }
        BView::Implies(l, r) => {
            write_bexpr(out, l, B_IMPL + 1)?;
            out.write_str(" -> ")?;
            write_bexpr(out, r, B_IMPL)?;
        }
        BView::Not(inner) => {
            out.write_char('!')?;
            let iv = view(inner);
            let bare = matches!(iv, BView::True | BView::False | BView::Not(_));
            write_bexpr(out, inner, if bare { B_NOT } else { B_ATOM + 1 })?;
        }
    }
    if p < min {
        out.write_char(')')?;
    }
    Ok(())
}

impl Display for BExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_bexpr(f, self, 0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ECtx {
    Top,
    SumLeft,
    SumRight,
    ScaleChild,
    GuardChild,
}

fn write_exp(out: &mut Formatter<'_>, e: &Exp, ctx: ECtx) -> fmt::Result {
    let e = e.untagged();
    match e {
        Exp::Sup(v, body) | Exp::Inf(v, body) => {
            let q = if matches!(e, Exp::Sup(..)) {
                "sup"
            } else {
                "inf"
            };
            let paren = ctx != ECtx::Top;
            if paren {
                out.write_char('(')?;
            }
            write!(out, "{q} {v}: ")?;
            write_exp(out, body, ECtx::Top)?;
            if paren {
                out.write_char(')')?;
            }
            Ok(())
        }
        Exp::Add(l, r) => {
            let paren = matches!(ctx, ECtx::SumRight | ECtx::ScaleChild | ECtx::GuardChild);
            if paren {
                out.write_char('(')?;
            }
            write_exp(out, l, ECtx::SumLeft)?;
            out.write_str(" + ")?;
            write_exp(out, r, ECtx::SumRight)?;
            if paren {
                out.write_char(')')?;
            }
            Ok(())
        }
        Exp::Arith(a) => {
            let min = match ctx {
                ECtx::Top | ECtx::SumLeft => 0,
                ECtx::SumRight => A_MUL,
                ECtx::GuardChild => A_MUL,
                ECtx::ScaleChild => A_ATOM + 1,
            };
            write_aexpr(out, a, min)
        }
        Exp::Scale(a, f) => {
            let paren = ctx == ECtx::ScaleChild;
            if paren {
                out.write_char('(')?;
            }
            write_aexpr(out, a, A_MUL)?;
            out.write_str(" * ")?;
            write_exp(out, f, ECtx::ScaleChild)?;
            if paren {
                out.write_char(')')?;
            }
            Ok(())
        }
        Exp::Guard(b, f) => {
            write!(out, "[{b}] * ")?;
            write_exp(out, f, ECtx::GuardChild)
        }
        Exp::Tagged(..) => unreachable!(),
    }
}

impl Display for Exp {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_exp(f, self, ECtx::Top)
    }
}

fn write_program(out: &mut Formatter<'_>, p: &Program) -> fmt::Result {
    match p {
        Program::Skip => out.write_str("skip"),
        Program::Assign(x, a) => write!(out, "{x} := {a}"),
        Program::Seq(a, b) => {
            if matches!(**a, Program::Seq(..)) {
                out.write_char('{')?;
                write_program(out, a)?;
                out.write_char('}')?;
            } else {
                write_program(out, a)?;
            }
            out.write_str("; ")?;
            write_program(out, b)
        }
        Program::PChoice(a, prob, b) => {
            out.write_char('{')?;
            write_program(out, a)?;
            write!(out, "}} [{prob}] {{")?;
            write_program(out, b)?;
            out.write_char('}')
        }
        Program::Ite(g, a, b) => {
            write!(out, "if ({g}) {{ ")?;
            write_program(out, a)?;
            out.write_str(" } else { ")?;
            write_program(out, b)?;
            out.write_str(" }")
        }
        Program::While(g, body) => {
            write!(out, "while ({g}) {{ ")?;
            write_program(out, body)?;
            out.write_str(" }")
        }
    }
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_program(f, self)
    }
}

const F_QUANT: u8 = 0;
const F_IMPL: u8 = 1;
const F_OR: u8 = 2;
const F_AND: u8 = 3;
const F_NOT: u8 = 4;
const F_ATOM: u8 = 5;

fn formula_prec(p: &Formula) -> u8 {
    match p.untagged() {
        Formula::Exists(..) | Formula::Forall(..) => F_QUANT,
        Formula::Implies(..) => F_IMPL,
        Formula::Or(..) => F_OR,
        Formula::And(..) => F_AND,
        Formula::Not(..) => F_NOT,
        Formula::Atom(_) => F_ATOM,
        Formula::Tagged(..) => unreachable!(),
    }
}

fn write_formula(out: &mut Formatter<'_>, p: &Formula, min: u8) -> fmt::Result {
    let p = p.untagged();
    let prec = formula_prec(p);
    if prec < min {
        out.write_char('(')?;
    }
    match p {
        Formula::Atom(b) => write!(out, "{b}")?,
        Formula::Exists(v, a) | Formula::Forall(v, a) => {
            let q = if matches!(p, Formula::Exists(..)) {
                "exists"
            } else {
                "forall"
            };
            write!(out, "{q} {v}: ")?;
            write_formula(out, a, F_QUANT)?;
        }
        Formula::Implies(a, b) => {
            write_formula(out, a, F_IMPL + 1)?;
            out.write_str(" implies ")?;
            write_formula(out, b, F_IMPL)?;
        }
        Formula::Or(a, b) => {
            write_formula(out, a, F_OR)?;
            out.write_str(" or ")?;
            write_formula(out, b, F_OR + 1)?;
        }
        Formula::And(a, b) => {
            write_formula(out, a, F_AND)?;
            out.write_str(" and ")?;
            write_formula(out, b, F_AND + 1)?;
        }
        Formula::Not(a) => {
            out.write_str("not ")?;
            write_formula(out, a, F_NOT)?;
        }
        Formula::Tagged(..) => unreachable!(),
    }
    if prec < min {
        out.write_char(')')?;
    }
    Ok(())
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_formula(f, self, 0)
    }
}
