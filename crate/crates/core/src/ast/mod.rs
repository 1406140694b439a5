//! Syntax of programs, arithmetic and Boolean expressions, expectations and
//! first-order formulas.

mod parse;
mod print;
mod subst;
mod var;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use crate::semantics::{FoIntrinsic, Intrinsic, Rat};

pub use parse::{parse_aexpr, parse_bexpr, parse_exp, parse_formula, parse_program};
pub use subst::{
    subst_aexpr, subst_aexpr_many, subst_bexpr, subst_bexpr_many, subst_exp, subst_exp_many,
    subst_formula, subst_formula_many, SubstMap,
};
pub use var::{fresh_from, fresh_or_same, fresh_var, Var, VarSet, KEYWORDS};

/// Arithmetic expressions over non-negative rationals. `Monus` is
/// truncated subtraction.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum AExpr {
    Lit(Rat),
    Var(Var),
    Add(Arc<AExpr>, Arc<AExpr>),
    Mul(Arc<AExpr>, Arc<AExpr>),
    Monus(Arc<AExpr>, Arc<AExpr>),
}

impl AExpr {
    pub fn lit(n: u64) -> AExpr {
        AExpr::Lit(Rat::from_int(n))
    }

    pub fn rat(r: Rat) -> AExpr {
        AExpr::Lit(r)
    }

    pub fn var(v: &Var) -> AExpr {
        AExpr::Var(v.clone())
    }

    pub fn zero() -> AExpr {
        AExpr::lit(0)
    }

    pub fn one() -> AExpr {
        AExpr::lit(1)
    }

    pub fn add(a: AExpr, b: AExpr) -> AExpr {
        AExpr::Add(Arc::new(a), Arc::new(b))
    }

    pub fn mul(a: AExpr, b: AExpr) -> AExpr {
        AExpr::Mul(Arc::new(a), Arc::new(b))
    }

    pub fn monus(a: AExpr, b: AExpr) -> AExpr {
        AExpr::Monus(Arc::new(a), Arc::new(b))
    }

    /// Left-nested sum; `0` for an empty list.
    pub fn sum(terms: impl IntoIterator<Item = AExpr>) -> AExpr {
        let mut it = terms.into_iter();
        match it.next() {
            None => AExpr::zero(),
            Some(first) => it.fold(first, AExpr::add),
        }
    }

    pub fn is_lit(&self, r: &Rat) -> bool {
        matches!(self, AExpr::Lit(x) if x == r)
    }

    pub fn free_vars_into(&self, out: &mut VarSet) {
        match self {
            AExpr::Lit(_) => {}
            AExpr::Var(v) => {
                out.insert(v.clone());
            }
            AExpr::Add(a, b) | AExpr::Mul(a, b) | AExpr::Monus(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
        }
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn constants_into(&self, out: &mut BTreeSet<Rat>) {
        match self {
            AExpr::Lit(r) => {
                out.insert(r.clone());
            }
            AExpr::Var(_) => {}
            AExpr::Add(a, b) | AExpr::Mul(a, b) | AExpr::Monus(a, b) => {
                a.constants_into(out);
                b.constants_into(out);
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            AExpr::Lit(_) | AExpr::Var(_) => 1,
            AExpr::Add(a, b) | AExpr::Mul(a, b) | AExpr::Monus(a, b) => 1 + a.size() + b.size(),
        }
    }
}

/// Boolean expressions. The core constructors are `Lt`, `And` and `Not`;
/// the other connectives and comparisons are lowered onto them when built.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum BExpr {
    Lt(AExpr, AExpr),
    And(Arc<BExpr>, Arc<BExpr>),
    Not(Arc<BExpr>),
}

impl BExpr {
    pub fn lt(a: AExpr, b: AExpr) -> BExpr {
        BExpr::Lt(a, b)
    }

    pub fn and(a: BExpr, b: BExpr) -> BExpr {
        BExpr::And(Arc::new(a), Arc::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: BExpr) -> BExpr {
        BExpr::Not(Arc::new(a))
    }

    /// `0 < 0`.
    pub fn ff() -> BExpr {
        BExpr::Lt(AExpr::zero(), AExpr::zero())
    }

    /// `!(0 < 0)`.
    pub fn tt() -> BExpr {
        BExpr::not(BExpr::ff())
    }

    pub fn is_tt(&self) -> bool {
        *self == BExpr::tt()
    }

    /// `!(!a && !b)`.
    pub fn or(a: BExpr, b: BExpr) -> BExpr {
        BExpr::not(BExpr::and(BExpr::not(a), BExpr::not(b)))
    }

    /// `!(a && !b)`.
    pub fn implies(a: BExpr, b: BExpr) -> BExpr {
        BExpr::not(BExpr::and(a, BExpr::not(b)))
    }

    /// `!(b < a)`.
    pub fn le(a: AExpr, b: AExpr) -> BExpr {
        BExpr::not(BExpr::Lt(b, a))
    }

    pub fn gt(a: AExpr, b: AExpr) -> BExpr {
        BExpr::Lt(b, a)
    }

    pub fn ge(a: AExpr, b: AExpr) -> BExpr {
        BExpr::le(b, a)
    }

    /// `!(a < b) && !(b < a)`.
    pub fn eq(a: AExpr, b: AExpr) -> BExpr {
        BExpr::and(
            BExpr::not(BExpr::Lt(a.clone(), b.clone())),
            BExpr::not(BExpr::Lt(b, a)),
        )
    }

    pub fn ne(a: AExpr, b: AExpr) -> BExpr {
        BExpr::not(BExpr::eq(a, b))
    }

    /// Conjunction that drops a literal `true` operand.
    pub fn conj(a: BExpr, b: BExpr) -> BExpr {
        if a.is_tt() {
            b
        } else if b.is_tt() {
            a
        } else {
            BExpr::and(a, b)
        }
    }

    /// Left-nested conjunction; `true` for an empty list.
    pub fn all(items: impl IntoIterator<Item = BExpr>) -> BExpr {
        let mut it = items.into_iter();
        match it.next() {
            None => BExpr::tt(),
            Some(first) => it.fold(first, BExpr::and),
        }
    }

    pub fn free_vars_into(&self, out: &mut VarSet) {
        match self {
            BExpr::Lt(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            BExpr::And(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            BExpr::Not(a) => a.free_vars_into(out),
        }
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn constants_into(&self, out: &mut BTreeSet<Rat>) {
        match self {
            BExpr::Lt(a, b) => {
                a.constants_into(out);
                b.constants_into(out);
            }
            BExpr::And(a, b) => {
                a.constants_into(out);
                b.constants_into(out);
            }
            BExpr::Not(a) => a.constants_into(out),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            BExpr::Lt(a, b) => 1 + a.size() + b.size(),
            BExpr::And(a, b) => 1 + a.size() + b.size(),
            BExpr::Not(a) => 1 + a.size(),
        }
    }

    /// Whether the tree has at most `cap` nodes, without visiting more
    /// than `cap + 1` of them.
    pub fn size_within(&self, cap: usize) -> bool {
        fn go(b: &BExpr, left: &mut usize) -> bool {
            if *left == 0 {
                return false;
            }
            *left -= 1;
            match b {
                BExpr::Lt(x, y) => {
                    let n = x.size() + y.size();
                    if n > *left {
                        return false;
                    }
                    *left -= n;
                    true
                }
                BExpr::And(x, y) => go(x, left) && go(y, left),
                BExpr::Not(x) => go(x, left),
            }
        }
        let mut left = cap;
        go(self, &mut left)
    }
}

/// Quantifier of an expectation prefix.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Quant {
    Sup,
    Inf,
}

/// Opaque evaluation hint attached to an expectation subtree.
pub type Tag = Arc<dyn Intrinsic>;

/// Expectations: arithmetic, guarded, sums, scaling by an arithmetic term,
/// and supremum/infimum quantifiers. There is no product of two
/// expectations.
///
/// `Tagged` carries an evaluation hint and is invisible to printing and
/// equality. The smart constructors keep trees canonical: `Add` and `Scale`
/// never combine purely arithmetic operands, which are folded into `Arith`.
#[derive(Clone)]
pub enum Exp {
    Arith(AExpr),
    Guard(BExpr, Arc<Exp>),
    Add(Arc<Exp>, Arc<Exp>),
    Scale(AExpr, Arc<Exp>),
    Sup(Var, Arc<Exp>),
    Inf(Var, Arc<Exp>),
    Tagged(Tag, Arc<Exp>),
}

impl Exp {
    pub fn arith(a: AExpr) -> Exp {
        Exp::Arith(a)
    }

    pub fn lit(n: u64) -> Exp {
        Exp::Arith(AExpr::lit(n))
    }

    pub fn var(v: &Var) -> Exp {
        Exp::Arith(AExpr::var(v))
    }

    pub fn zero() -> Exp {
        Exp::lit(0)
    }

    pub fn one() -> Exp {
        Exp::lit(1)
    }

    pub fn guard(b: BExpr, f: Exp) -> Exp {
        Exp::Guard(b, Arc::new(f))
    }

    /// `[b] * 1`.
    pub fn indicator(b: BExpr) -> Exp {
        Exp::guard(b, Exp::one())
    }

    pub fn add(f: Exp, g: Exp) -> Exp {
        match (f, g) {
            (Exp::Arith(a), Exp::Arith(b)) => Exp::Arith(AExpr::add(a, b)),
            (f, g) => Exp::Add(Arc::new(f), Arc::new(g)),
        }
    }

    pub fn scale(a: AExpr, f: Exp) -> Exp {
        match f {
            Exp::Arith(b) => Exp::Arith(AExpr::mul(a, b)),
            f => Exp::Scale(a, Arc::new(f)),
        }
    }

    pub fn sup(v: &Var, f: Exp) -> Exp {
        Exp::Sup(v.clone(), Arc::new(f))
    }

    pub fn inf(v: &Var, f: Exp) -> Exp {
        Exp::Inf(v.clone(), Arc::new(f))
    }

    pub fn quant(q: Quant, v: &Var, f: Exp) -> Exp {
        match q {
            Quant::Sup => Exp::sup(v, f),
            Quant::Inf => Exp::inf(v, f),
        }
    }

    /// Wraps `f` in the quantifiers of `prefix`, outermost first.
    pub fn with_prefix(prefix: &[(Quant, Var)], f: Exp) -> Exp {
        prefix
            .iter()
            .rev()
            .fold(f, |acc, (q, v)| Exp::quant(*q, v, acc))
    }

    pub fn tagged(tag: Tag, f: Exp) -> Exp {
        Exp::Tagged(tag, Arc::new(f))
    }

    /// Left-nested sum; `0` for an empty list.
    pub fn sum(items: impl IntoIterator<Item = Exp>) -> Exp {
        let mut it = items.into_iter();
        match it.next() {
            None => Exp::zero(),
            Some(first) => it.fold(first, Exp::add),
        }
    }

    /// The tree with every tag removed.
    pub fn untagged(&self) -> &Exp {
        let mut e = self;
        while let Exp::Tagged(_, inner) = e {
            e = inner;
        }
        e
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Exp::Arith(_) => true,
            Exp::Guard(_, f) | Exp::Scale(_, f) | Exp::Tagged(_, f) => f.is_quantifier_free(),
            Exp::Add(f, g) => f.is_quantifier_free() && g.is_quantifier_free(),
            Exp::Sup(..) | Exp::Inf(..) => false,
        }
    }

    pub fn has_tags(&self) -> bool {
        match self {
            Exp::Arith(_) => false,
            Exp::Tagged(..) => true,
            Exp::Guard(_, f) | Exp::Scale(_, f) | Exp::Sup(_, f) | Exp::Inf(_, f) => f.has_tags(),
            Exp::Add(f, g) => f.has_tags() || g.has_tags(),
        }
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn free_vars_into(&self, out: &mut VarSet) {
        match self {
            Exp::Arith(a) => a.free_vars_into(out),
            Exp::Guard(b, f) => {
                b.free_vars_into(out);
                f.free_vars_into(out);
            }
            Exp::Add(f, g) => {
                f.free_vars_into(out);
                g.free_vars_into(out);
            }
            Exp::Scale(a, f) => {
                a.free_vars_into(out);
                f.free_vars_into(out);
            }
            Exp::Sup(v, f) | Exp::Inf(v, f) => {
                let mut inner = f.free_vars();
                inner.remove(v);
                out.extend(inner);
            }
            Exp::Tagged(_, f) => f.free_vars_into(out),
        }
    }

    /// Free and bound variables.
    pub fn all_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.all_vars_into(&mut out);
        out
    }

    pub fn all_vars_into(&self, out: &mut VarSet) {
        match self {
            Exp::Arith(a) => a.free_vars_into(out),
            Exp::Guard(b, f) => {
                b.free_vars_into(out);
                f.all_vars_into(out);
            }
            Exp::Add(f, g) => {
                f.all_vars_into(out);
                g.all_vars_into(out);
            }
            Exp::Scale(a, f) => {
                a.free_vars_into(out);
                f.all_vars_into(out);
            }
            Exp::Sup(v, f) | Exp::Inf(v, f) => {
                out.insert(v.clone());
                f.all_vars_into(out);
            }
            Exp::Tagged(_, f) => f.all_vars_into(out),
        }
    }

    pub fn constants(&self) -> BTreeSet<Rat> {
        let mut out = BTreeSet::new();
        self.constants_into(&mut out);
        out
    }

    pub fn constants_into(&self, out: &mut BTreeSet<Rat>) {
        match self {
            Exp::Arith(a) => a.constants_into(out),
            Exp::Guard(b, f) => {
                b.constants_into(out);
                f.constants_into(out);
            }
            Exp::Add(f, g) => {
                f.constants_into(out);
                g.constants_into(out);
            }
            Exp::Scale(a, f) => {
                a.constants_into(out);
                f.constants_into(out);
            }
            Exp::Sup(_, f) | Exp::Inf(_, f) | Exp::Tagged(_, f) => f.constants_into(out),
        }
    }

    /// Whether [`Exp::size`] is at most `cap`, without visiting more than
    /// `cap + 1` nodes.
    pub fn size_within(&self, cap: usize) -> bool {
        fn go(f: &Exp, left: &mut usize) -> bool {
            let take = |n: usize, left: &mut usize| {
                if n > *left {
                    return false;
                }
                *left -= n;
                true
            };
            match f {
                Exp::Arith(a) => take(a.size(), left),
                Exp::Guard(b, g) => {
                    take(1, left) && b.size_within(*left) && take(b.size(), left) && go(g, left)
                }
                Exp::Add(g, h) => take(1, left) && go(g, left) && go(h, left),
                Exp::Scale(a, g) => take(1 + a.size(), left) && go(g, left),
                Exp::Sup(_, g) | Exp::Inf(_, g) => take(1, left) && go(g, left),
                Exp::Tagged(_, g) => go(g, left),
            }
        }
        let mut left = cap;
        go(self, &mut left)
    }

    /// Number of nodes, tags excluded.
    pub fn size(&self) -> usize {
        match self {
            Exp::Arith(a) => a.size(),
            Exp::Guard(b, f) => 1 + b.size() + f.size(),
            Exp::Add(f, g) => 1 + f.size() + g.size(),
            Exp::Scale(a, f) => 1 + a.size() + f.size(),
            Exp::Sup(_, f) | Exp::Inf(_, f) => 1 + f.size(),
            Exp::Tagged(_, f) => f.size(),
        }
    }
}

impl PartialEq for Exp {
    fn eq(&self, other: &Exp) -> bool {
        match (self.untagged(), other.untagged()) {
            (Exp::Arith(a), Exp::Arith(b)) => a == b,
            (Exp::Guard(a, f), Exp::Guard(b, g)) => a == b && f == g,
            (Exp::Add(f1, g1), Exp::Add(f2, g2)) => f1 == f2 && g1 == g2,
            (Exp::Scale(a, f), Exp::Scale(b, g)) => a == b && f == g,
            (Exp::Sup(v, f), Exp::Sup(w, g)) | (Exp::Inf(v, f), Exp::Inf(w, g)) => v == w && f == g,
            _ => false,
        }
    }
}

impl Eq for Exp {}

impl fmt::Debug for Exp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Probabilistic guarded commands.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Program {
    Skip,
    Assign(Var, AExpr),
    Seq(Arc<Program>, Arc<Program>),
    /// `{C1} [p] {C2}`: run `C1` with probability `p`, otherwise `C2`.
    PChoice(Arc<Program>, Rat, Arc<Program>),
    Ite(BExpr, Arc<Program>, Arc<Program>),
    While(BExpr, Arc<Program>),
}

impl Program {
    pub fn assign(x: &Var, a: AExpr) -> Program {
        Program::Assign(x.clone(), a)
    }

    pub fn seq(a: Program, b: Program) -> Program {
        Program::Seq(Arc::new(a), Arc::new(b))
    }

    /// Right-nested sequence; `skip` for an empty list.
    pub fn seq_all(items: impl IntoIterator<Item = Program>) -> Program {
        let items: Vec<Program> = items.into_iter().collect();
        let mut it = items.into_iter().rev();
        match it.next() {
            None => Program::Skip,
            Some(last) => it.fold(last, |acc, p| Program::seq(p, acc)),
        }
    }

    /// Panics unless `p` lies in `[0, 1]`.
    pub fn pchoice(a: Program, p: Rat, b: Program) -> Program {
        assert!(p <= Rat::one(), "probability out of range");
        Program::PChoice(Arc::new(a), p, Arc::new(b))
    }

    pub fn ite(b: BExpr, t: Program, e: Program) -> Program {
        Program::Ite(b, Arc::new(t), Arc::new(e))
    }

    pub fn while_loop(b: BExpr, body: Program) -> Program {
        Program::While(b, Arc::new(body))
    }

    pub fn contains_loop(&self) -> bool {
        match self {
            Program::Skip | Program::Assign(..) => false,
            Program::Seq(a, b) | Program::PChoice(a, _, b) | Program::Ite(_, a, b) => {
                a.contains_loop() || b.contains_loop()
            }
            Program::While(..) => true,
        }
    }

    /// Every variable read or written.
    pub fn vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.vars_into(&mut out);
        out
    }

    fn vars_into(&self, out: &mut VarSet) {
        match self {
            Program::Skip => {}
            Program::Assign(x, a) => {
                out.insert(x.clone());
                a.free_vars_into(out);
            }
            Program::Seq(a, b) | Program::PChoice(a, _, b) => {
                a.vars_into(out);
                b.vars_into(out);
            }
            Program::Ite(g, a, b) => {
                g.free_vars_into(out);
                a.vars_into(out);
                b.vars_into(out);
            }
            Program::While(g, a) => {
                g.free_vars_into(out);
                a.vars_into(out);
            }
        }
    }

    pub fn constants(&self) -> BTreeSet<Rat> {
        let mut out = BTreeSet::new();
        self.constants_into(&mut out);
        out
    }

    fn constants_into(&self, out: &mut BTreeSet<Rat>) {
        match self {
            Program::Skip => {}
            Program::Assign(_, a) => a.constants_into(out),
            Program::Seq(a, b) => {
                a.constants_into(out);
                b.constants_into(out);
            }
            Program::PChoice(a, p, b) => {
                out.insert(p.clone());
                a.constants_into(out);
                b.constants_into(out);
            }
            Program::Ite(g, a, b) => {
                g.constants_into(out);
                a.constants_into(out);
                b.constants_into(out);
            }
            Program::While(g, a) => {
                g.constants_into(out);
                a.constants_into(out);
            }
        }
    }
}

impl fmt::Debug for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Opaque truth hint attached to a formula subtree.
pub type FoTag = Arc<dyn FoIntrinsic>;

/// First-order formulas over Boolean-expression atoms. Whether quantifiers
/// range over naturals or non-negative rationals is fixed by the caller.
#[derive(Clone)]
pub enum Formula {
    Atom(BExpr),
    And(Arc<Formula>, Arc<Formula>),
    Or(Arc<Formula>, Arc<Formula>),
    Not(Arc<Formula>),
    Implies(Arc<Formula>, Arc<Formula>),
    Exists(Var, Arc<Formula>),
    Forall(Var, Arc<Formula>),
    Tagged(FoTag, Arc<Formula>),
}

impl Formula {
    pub fn atom(b: BExpr) -> Formula {
        Formula::Atom(b)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Arc::new(a), Arc::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Arc::new(a), Arc::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::Not(Arc::new(a))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Arc::new(a), Arc::new(b))
    }

    pub fn exists(v: &Var, a: Formula) -> Formula {
        Formula::Exists(v.clone(), Arc::new(a))
    }

    pub fn forall(v: &Var, a: Formula) -> Formula {
        Formula::Forall(v.clone(), Arc::new(a))
    }

    pub fn exists_all(vs: &[Var], a: Formula) -> Formula {
        vs.iter().rev().fold(a, |acc, v| Formula::exists(v, acc))
    }

    pub fn forall_all(vs: &[Var], a: Formula) -> Formula {
        vs.iter().rev().fold(a, |acc, v| Formula::forall(v, acc))
    }

    pub fn tagged(tag: FoTag, a: Formula) -> Formula {
        Formula::Tagged(tag, Arc::new(a))
    }

    /// Left-nested conjunction; `true` for an empty list.
    pub fn all(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::Atom(BExpr::tt()),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    pub fn untagged(&self) -> &Formula {
        let mut e = self;
        while let Formula::Tagged(_, inner) = e {
            e = inner;
        }
        e
    }

    pub fn free_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.free_vars_into(&mut out);
        out
    }

    pub fn free_vars_into(&self, out: &mut VarSet) {
        match self {
            Formula::Atom(b) => b.free_vars_into(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.free_vars_into(out);
                b.free_vars_into(out);
            }
            Formula::Not(a) | Formula::Tagged(_, a) => a.free_vars_into(out),
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                let mut inner = a.free_vars();
                inner.remove(v);
                out.extend(inner);
            }
        }
    }

    pub fn all_vars(&self) -> VarSet {
        let mut out = VarSet::new();
        self.all_vars_into(&mut out);
        out
    }

    fn all_vars_into(&self, out: &mut VarSet) {
        match self {
            Formula::Atom(b) => b.free_vars_into(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.all_vars_into(out);
                b.all_vars_into(out);
            }
            Formula::Not(a) | Formula::Tagged(_, a) => a.all_vars_into(out),
            Formula::Exists(v, a) | Formula::Forall(v, a) => {
                out.insert(v.clone());
                a.all_vars_into(out);
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                a.is_quantifier_free() && b.is_quantifier_free()
            }
            Formula::Not(a) | Formula::Tagged(_, a) => a.is_quantifier_free(),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// A (possibly empty) quantifier prefix over a quantifier-free matrix.
    pub fn is_prenex(&self) -> bool {
        match self.untagged() {
            Formula::Exists(_, a) | Formula::Forall(_, a) => a.is_prenex(),
            other => other.is_quantifier_free(),
        }
    }

    /// Converts a quantifier-free formula into a Boolean expression.
    pub fn to_bexpr(&self) -> Option<BExpr> {
        Some(match self {
            Formula::Atom(b) => b.clone(),
            Formula::And(a, b) => BExpr::and(a.to_bexpr()?, b.to_bexpr()?),
            Formula::Or(a, b) => BExpr::or(a.to_bexpr()?, b.to_bexpr()?),
            Formula::Implies(a, b) => BExpr::implies(a.to_bexpr()?, b.to_bexpr()?),
            Formula::Not(a) => BExpr::not(a.to_bexpr()?),
            Formula::Tagged(_, a) => a.to_bexpr()?,
            Formula::Exists(..) | Formula::Forall(..) => return None,
        })
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(b) => b.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => 1 + a.size(),
            Formula::Tagged(_, a) => a.size(),
        }
    }
}

impl PartialEq for Formula {
    fn eq(&self, other: &Formula) -> bool {
        match (self.untagged(), other.untagged()) {
            (Formula::Atom(a), Formula::Atom(b)) => a == b,
            (Formula::And(a1, b1), Formula::And(a2, b2))
            | (Formula::Or(a1, b1), Formula::Or(a2, b2))
            | (Formula::Implies(a1, b1), Formula::Implies(a2, b2)) => a1 == a2 && b1 == b2,
            (Formula::Not(a), Formula::Not(b)) => a == b,
            (Formula::Exists(v, a), Formula::Exists(w, b))
            | (Formula::Forall(v, a), Formula::Forall(w, b)) => v == w && a == b,
            _ => false,
        }
    }
}

impl Eq for Formula {}

impl fmt::Debug for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for AExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for BExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
