//! Weakest preexpectations, forward distributions and the loop iteration
//! routes.
//!
//! A loop `while (b) { C }` with postexpectation `f` has the characteristic
//! function `Phi(Y) = [!b] * f + [b] * wp(C, Y)`; its least fixed point is
//! the supremum of `Phi^k(0)`. This module computes `Phi^k(0)` three ways:
//! by memoized semantic recursion ([`kleene_iterate`]), by summing over
//! state sequences with forward one-step probabilities ([`path_sum`]), and
//! syntactically ([`char_iterate`]).

use std::collections::{BTreeMap, HashMap};

use crate::ast::{subst_exp, AExpr, BExpr, Exp, Program, Var, VarSet};
use crate::error::{Error, Result};
use crate::semantics::{eval_aexpr, eval_bexpr, Evaluator, Rat, State, XReal};

/// Resource bounds for loop unrolling and state enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Limits {
    /// Unrolling rounds for loops nested inside the analysed program.
    pub fuel: usize,
    /// Maximum number of states or sequences held at once.
    pub state_cap: usize,
}

impl Default for Limits {
    fn default() -> Limits {
        Limits {
            fuel: 32,
            state_cap: 100_000,
        }
    }
}

/// `wp(C, f)` for loop-free `C`.
pub fn wp_loop_free(c: &Program, f: &Exp) -> Result<Exp> {
    Ok(match c {
        Program::Skip => f.clone(),
        Program::Assign(x, a) => subst_exp(f, x, a),
        Program::Seq(c1, c2) => wp_loop_free(c1, &wp_loop_free(c2, f)?)?,
        Program::PChoice(c1, p, c2) => {
            let q = Rat::one().checked_sub(p).expect("probability at most 1");
            Exp::add(
                Exp::scale(AExpr::Lit(p.clone()), wp_loop_free(c1, f)?),
                Exp::scale(AExpr::Lit(q), wp_loop_free(c2, f)?),
            )
        }
        Program::Ite(b, c1, c2) => Exp::add(
            Exp::guard(b.clone(), wp_loop_free(c1, f)?),
            Exp::guard(BExpr::not(b.clone()), wp_loop_free(c2, f)?),
        ),
        Program::While(..) => return Err(Error::ContainsLoop),
    })
}

/// Finite subdistribution over final states, keyed by restricted states.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dist {
    weights: BTreeMap<State, Rat>,
}

impl Dist {
    pub fn point(s: State) -> Dist {
        Dist {
            weights: BTreeMap::from([(s, Rat::one())]),
        }
    }

    pub fn weight(&self, s: &State) -> Rat {
        self.weights.get(s).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn mass(&self) -> Rat {
        self.weights.values().fold(Rat::zero(), |acc, w| &acc + w)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&State, &Rat)> {
        self.weights.iter()
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    fn add(&mut self, s: State, w: Rat) {
        if w.is_zero() {
            return;
        }
        let e = self.weights.entry(s).or_insert_with(Rat::zero);
        *e = &*e + &w;
    }

    fn merge(&mut self, other: Dist) {
        for (s, w) in other.weights {
            self.add(s, w);
        }
    }

    fn scaled(self, p: &Rat) -> Dist {
        let mut out = Dist::default();
        for (s, w) in self.weights {
            out.add(s, &w * p);
        }
        out
    }

    /// Expected value of `f` under this subdistribution.
    pub fn expect(&self, f: &Exp, ev: &Evaluator) -> XReal {
        self.weights
            .iter()
            .fold(XReal::zero(), |acc, (s, w)| &acc + &ev.exp(f, s).scale(w))
    }
}

fn check_cap(d: &Dist, limits: &Limits) -> Result<()> {
    if d.len() > limits.state_cap {
        Err(Error::FuelExceeded(format!(
            "more than {} states",
            limits.state_cap
        )))
    } else {
        Ok(())
    }
}

fn run(c: &Program, d: Dist, limits: &Limits) -> Result<Dist> {
    Ok(match c {
        Program::Skip => d,
        Program::Assign(x, a) => {
            let mut out = Dist::default();
            for (s, w) in d.weights {
                let v = eval_aexpr(a, &s);
                out.add(s.with(x, v), w);
            }
            out
        }
        Program::Seq(c1, c2) => run(c2, run(c1, d, limits)?, limits)?,
        Program::PChoice(c1, p, c2) => {
            let q = Rat::one().checked_sub(p).expect("probability at most 1");
            let mut out = run(c1, d.clone(), limits)?.scaled(p);
            out.merge(run(c2, d, limits)?.scaled(&q));
            check_cap(&out, limits)?;
            out
        }
        Program::Ite(b, c1, c2) => {
            let (yes, no) = split(d, b);
            let mut out = run(c1, yes, limits)?;
            out.merge(run(c2, no, limits)?);
            out
        }
        Program::While(b, body) => {
            let mut done = Dist::default();
            let mut live = d;
            for _ in 0..limits.fuel {
                let (yes, no) = split(live, b);
                done.merge(no);
                if yes.is_empty() {
                    return Ok(done);
                }
                live = run(body, yes, limits)?;
                check_cap(&live, limits)?;
            }
            let (_, no) = split(live, b);
            done.merge(no);
            done
        }
    })
}

fn split(d: Dist, b: &BExpr) -> (Dist, Dist) {
    let (mut yes, mut no) = (Dist::default(), Dist::default());
    for (s, w) in d.weights {
        if eval_bexpr(b, &s) {
            yes.add(s, w);
        } else {
            no.add(s, w);
        }
    }
    (yes, no)
}

/// Exact final-state subdistribution of `c` started in `s`. Loops are
/// unrolled `limits.fuel` times; mass still looping afterwards is dropped.
/// Results are keyed by restriction to `vars`.
pub fn forward_dist(c: &Program, s: &State, vars: &VarSet, limits: &Limits) -> Result<Dist> {
    let mut scope = vars.clone();
    scope.extend(c.vars());
    let out = run(c, Dist::point(s.restrict(&scope)), limits)?;
    let mut restricted = Dist::default();
    for (t, w) in out.weights {
        restricted.add(t.restrict(vars), w);
    }
    Ok(restricted)
}

/// A `while` loop split into guard and body.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Loop {
    pub guard: BExpr,
    pub body: Program,
}

impl Loop {
    pub fn new(guard: BExpr, body: Program) -> Loop {
        Loop { guard, body }
    }

    pub fn from_program(p: &Program) -> Option<Loop> {
        match p {
            Program::While(g, b) => Some(Loop::new(g.clone(), (**b).clone())),
            _ => None,
        }
    }

    pub fn to_program(&self) -> Program {
        Program::while_loop(self.guard.clone(), self.body.clone())
    }

    /// `if (b) { C } else { skip }`.
    pub fn guarded_step(&self) -> Program {
        Program::ite(self.guard.clone(), self.body.clone(), Program::Skip)
    }

    /// Variables of the loop and of `f`.
    pub fn scope(&self, f: &Exp, vars: &VarSet) -> VarSet {
        let mut scope = vars.clone();
        scope.extend(self.to_program().vars());
        scope.extend(f.free_vars());
        scope
    }
}

/// Semantic `wp(c, k)(s)` where `k` is given as a function on states.
fn wp_sem(
    c: &Program,
    s: &State,
    k: &mut dyn FnMut(&State) -> Result<XReal>,
    fuel: usize,
) -> Result<XReal> {
    match c {
        Program::Skip => k(s),
        Program::Assign(x, a) => k(&s.with(x, eval_aexpr(a, s))),
        Program::Seq(c1, c2) => wp_sem(c1, s, &mut |t| wp_sem(c2, t, &mut *k, fuel), fuel),
        Program::PChoice(c1, p, c2) => {
            let q = Rat::one().checked_sub(p).expect("probability at most 1");
            let a = if p.is_zero() {
                XReal::zero()
            } else {
                wp_sem(c1, s, k, fuel)?.scale(p)
            };
            let b = if q.is_zero() {
                XReal::zero()
            } else {
                wp_sem(c2, s, k, fuel)?.scale(&q)
            };
            Ok(&a + &b)
        }
        Program::Ite(b, c1, c2) => {
            if eval_bexpr(b, s) {
                wp_sem(c1, s, k, fuel)
            } else {
                wp_sem(c2, s, k, fuel)
            }
        }
        Program::While(b, body) => while_sem(b, body, fuel, s, k, fuel),
    }
}

fn while_sem(
    b: &BExpr,
    body: &Program,
    n: usize,
    s: &State,
    k: &mut dyn FnMut(&State) -> Result<XReal>,
    fuel: usize,
) -> Result<XReal> {
    if n == 0 {
        return Ok(XReal::zero());
    }
    if !eval_bexpr(b, s) {
        return k(s);
    }
    wp_sem(
        body,
        s,
        &mut |t| while_sem(b, body, n - 1, t, &mut *k, fuel),
        fuel,
    )
}

struct Kleene<'a> {
    lp: &'a Loop,
    f: &'a Exp,
    ev: &'a Evaluator,
    scope: VarSet,
    memo: HashMap<(usize, State), XReal>,
    limits: Limits,
}

impl Kleene<'_> {
    fn phi(&mut self, n: usize, s: &State) -> Result<XReal> {
        if n == 0 {
            return Ok(XReal::zero());
        }
        let s = s.restrict(&self.scope);
        if let Some(v) = self.memo.get(&(n, s.clone())) {
            return Ok(v.clone());
        }
        let v = if !eval_bexpr(&self.lp.guard, &s) {
            self.ev.exp(self.f, &s)
        } else {
            let lp = self.lp;
            let fuel = self.limits.fuel;
            wp_sem(&lp.body, &s, &mut |t| self.phi(n - 1, t), fuel)?
        };
        if self.memo.len() >= self.limits.state_cap {
            return Err(Error::FuelExceeded(format!(
                "more than {} memo entries",
                self.limits.state_cap
            )));
        }
        self.memo.insert((n, s), v.clone());
        Ok(v)
    }
}

/// `Phi^k(0)(s)` by memoized recursion over states.
pub fn kleene_iterate(
    lp: &Loop,
    f: &Exp,
    s: &State,
    vars: &VarSet,
    k: usize,
    ev: &Evaluator,
    limits: &Limits,
) -> Result<XReal> {
    let mut kl = Kleene {
        lp,
        f,
        ev,
        scope: lp.scope(f, vars),
        memo: HashMap::new(),
        limits: *limits,
    };
    kl.phi(k, s)
}

/// `Phi^k(0)(s)` as a sum over state sequences `s = s_0, ..., s_{k-1}`:
/// the terminal value `([!b] * f)(s_{k-1})` times the one-step
/// probabilities of `if (b) { C } else { skip }`, each obtained from the
/// forward distribution.
pub fn path_sum(
    lp: &Loop,
    f: &Exp,
    s: &State,
    vars: &VarSet,
    k: usize,
    ev: &Evaluator,
    limits: &Limits,
) -> Result<XReal> {
    if k == 0 {
        return Ok(XReal::zero());
    }
    let scope = lp.scope(f, vars);
    let step = lp.guarded_step();
    let terminal = Exp::guard(BExpr::not(lp.guard.clone()), f.clone());
    let mut cache: HashMap<State, Dist> = HashMap::new();
    let mut total = XReal::zero();
    let mut sequences = 0usize;
    let mut stack = vec![(0usize, s.restrict(&scope), Rat::one())];
    while let Some((i, st, w)) = stack.pop() {
        if i + 1 == k {
            sequences += 1;
            if sequences > limits.state_cap {
                return Err(Error::FuelExceeded(format!(
                    "more than {} state sequences",
                    limits.state_cap
                )));
            }
            total = &total + &ev.exp(&terminal, &st).scale(&w);
            continue;
        }
        if !cache.contains_key(&st) {
            let d = forward_dist(&step, &st, &scope, limits)?;
            cache.insert(st.clone(), d);
        }
        for (t, p) in cache[&st].iter() {
            stack.push((i + 1, t.clone(), &w * p));
        }
    }
    Ok(total)
}

/// `Phi(Y) = [!b] * f + [b] * wp(C, Y)`.
pub fn char_apply(lp: &Loop, f: &Exp, y: &Exp) -> Result<Exp> {
    Ok(Exp::add(
        Exp::guard(BExpr::not(lp.guard.clone()), f.clone()),
        Exp::guard(lp.guard.clone(), wp_loop_free(&lp.body, y)?),
    ))
}

/// `Phi^k(0)` as an expectation.
pub fn char_iterate(lp: &Loop, f: &Exp, k: usize) -> Result<Exp> {
    let mut y = Exp::zero();
    for _ in 0..k {
        y = char_apply(lp, f, &y)?;
    }
    Ok(y)
}

/// The one-step transition template of a loop: `g = wp(if (b) { C } else
/// { skip }, [x_1 = x_1' && ... && x_n = x_n'])` over primed copies of the
/// program variables. `g[x' / t](s)` is the probability of moving from `s`
/// to `t` in one guarded step.
#[derive(Clone, Debug)]
pub struct BodyTemplate {
    pub g: Exp,
    pub vars: Vec<Var>,
    pub primed: Vec<Var>,
}

/// The primed copy `$x'` of a program variable.
pub fn primed_copy(x: &Var) -> Var {
    let base = x.name().strip_prefix('$').unwrap_or(x.name());
    Var::reserved(&format!("{base}'"))
}

pub fn body_wp_template(lp: &Loop, vars: &VarSet) -> Result<BodyTemplate> {
    let vars: Vec<Var> = vars.iter().cloned().collect();
    let primed: Vec<Var> = vars.iter().map(primed_copy).collect();
    let chi = BExpr::all(
        vars.iter()
            .zip(&primed)
            .map(|(x, y)| BExpr::eq(AExpr::var(x), AExpr::var(y))),
    );
    let g = wp_loop_free(&lp.guarded_step(), &Exp::indicator(chi))?;
    Ok(BodyTemplate { g, vars, primed })
}

impl BodyTemplate {
    /// `g[x' / t(x)](s)`, evaluated by binding the primed variables.
    pub fn transition(&self, s: &State, t: &State, ev: &Evaluator) -> XReal {
        let mut st = s.clone();
        for (x, y) in self.vars.iter().zip(&self.primed) {
            st.set(y, t.get(x));
        }
        ev.exp(&self.g, &st)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_exp, parse_program};
    use crate::semantics::QDomain;

    fn v(s: &str) -> Var {
        Var::new(s).unwrap()
    }

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn geo() -> Loop {
        let p = parse_program("while (c = 1) { {c := 0} [1/2] {c := 1}; x := x + 1 }").unwrap();
        Loop::from_program(&p).unwrap()
    }

    #[test]
    fn wp_of_coin_flip() {
        let c = parse_program("{x := 0} [1/3] {x := 1}").unwrap();
        let f = parse_exp("x").unwrap();
        assert_eq!(
            wp_loop_free(&c, &f).unwrap().to_string(),
            "1/3 * 0 + 2/3 * 1"
        );
    }

    #[test]
    fn wp_of_assignment() {
        let c = parse_program("x := x + 1").unwrap();
        let f = parse_exp("[x < 3] * x").unwrap();
        assert_eq!(
            wp_loop_free(&c, &f).unwrap().to_string(),
            "[x + 1 < 3] * (x + 1)"
        );
    }

    #[test]
    fn wp_rejects_loops() {
        let c = parse_program("while (x < 1) { x := 1 }").unwrap();
        assert_eq!(wp_loop_free(&c, &Exp::zero()), Err(Error::ContainsLoop));
    }

    #[test]
    fn forward_geometric_fuel_three() {
        let vars: VarSet = [v("c"), v("x")].into_iter().collect();
        let s = State::new().with(&v("c"), Rat::one());
        let limits = Limits {
            fuel: 3,
            ..Limits::default()
        };
        let d = forward_dist(&geo().to_program(), &s, &vars, &limits).unwrap();
        let at = |x: u64| d.weight(&State::new().with(&v("x"), Rat::from_int(x)));
        assert_eq!(at(1), r("1/2"));
        assert_eq!(at(2), r("1/4"));
        assert_eq!(at(3), r("1/8"));
        assert_eq!(d.mass(), r("7/8"));
    }

    #[test]
    fn three_routes_on_geometric_loop() {
        let lp = geo();
        let f = parse_exp("x").unwrap();
        let vars: VarSet = [v("c"), v("x")].into_iter().collect();
        let s = State::new().with(&v("c"), Rat::one());
        let ev = Evaluator::restricted(QDomain::default());
        let lim = Limits::default();
        for (k, want) in [(2, "1/2"), (4, "11/8")] {
            let want = XReal::Fin(r(want));
            assert_eq!(
                kleene_iterate(&lp, &f, &s, &vars, k, &ev, &lim).unwrap(),
                want
            );
            assert_eq!(path_sum(&lp, &f, &s, &vars, k, &ev, &lim).unwrap(), want);
            let e = char_iterate(&lp, &f, k).unwrap();
            assert_eq!(ev.exp(&e, &s), want);
        }
    }

    #[test]
    fn template_transition_probabilities() {
        let lp = geo();
        let vars: VarSet = [v("c"), v("x")].into_iter().collect();
        let t = body_wp_template(&lp, &vars).unwrap();
        let ev = Evaluator::restricted(QDomain::default());
        let s = State::new().with(&v("c"), Rat::one());
        let to = |c: u64, x: u64| {
            State::new()
                .with(&v("c"), Rat::from_int(c))
                .with(&v("x"), Rat::from_int(x))
        };
        assert_eq!(t.transition(&s, &to(0, 1), &ev), XReal::Fin(r("1/2")));
        assert_eq!(t.transition(&s, &to(1, 1), &ev), XReal::Fin(r("1/2")));
        assert_eq!(t.transition(&s, &to(1, 0), &ev), XReal::zero());
        assert_eq!(t.transition(&to(0, 5), &to(0, 5), &ev), XReal::one());
    }
}
