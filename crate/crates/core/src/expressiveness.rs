//! Expectations for `wp` of loops: characteristic assertions, evaluation
//! of an expectation at a coded state, the path weight of a coded state
//! sequence, and the full loop encoding
//!
//! ```text
//! h = sup length: sup nums: Sum[s, [StateSeq(s, length)] (.) Path(length, s), nums]
//! ```
//!
//! The written-out terms are huge; each carries a tag that evaluates it
//! directly (decoding witnesses instead of searching for them), and
//! [`LoopPlan`] evaluates `h` truncated at a given path length.

use std::collections::HashMap;
use std::sync::Arc;

use crate::ast::{
    fresh_or_same, subst_exp_many, AExpr, BExpr, Exp, Formula, Program, SubstMap, Var, VarSet,
};
use crate::error::{Error, Result};
use crate::goedel::{
    elem, elem_formula, encode_state_seq, iverson, rat_from_code, relem_formula, state_seq_formula,
};
use crate::semantics::{eval_aexpr, Evaluator, Intrinsic, Rat, State, XReal};
use crate::series::{make_series, odot, Aggregate};
use crate::wp::{body_wp_template, forward_dist, BodyTemplate, Limits, Loop};

/// `[x_1 = s(x_1) && ... && x_n = s(x_n)]`.
pub fn char_assertion(s: &State, vars: &VarSet) -> Exp {
    Exp::indicator(BExpr::all(
        vars.iter()
            .map(|x| BExpr::eq(AExpr::var(x), AExpr::rat(s.get(x)))),
    ))
}

/// How a witness variable is recovered from the state.
#[derive(Clone, Debug)]
enum Solve {
    /// The rational coded at position `index` of the sequence `num`.
    RElem { num: AExpr, index: u64 },
    /// The natural at position `index` of the sequence `num`.
    Elem { num: AExpr, index: AExpr },
    /// The `v` with `v + minus = target`.
    Offset { target: AExpr, minus: u64 },
}

impl Solve {
    fn value(&self, s: &State) -> Option<Rat> {
        match self {
            Solve::RElem { num, index } => {
                let n = eval_aexpr(num, s).to_natural()?;
                rat_from_code(&elem(&n, *index))
            }
            Solve::Elem { num, index } => {
                let n = eval_aexpr(num, s).to_natural()?;
                let i = eval_aexpr(index, s).to_u64()?;
                Some(Rat::from_biguint(elem(&n, i)))
            }
            Solve::Offset { target, minus } => {
                eval_aexpr(target, s).checked_sub(&Rat::from_int(*minus))
            }
        }
    }
}

/// Evaluates `sup v_1 ... v_n: [P] * body` when `P` pins every `v_i` to a
/// value that can be decoded from the state: solve the variables in order
/// and evaluate `body`, or return `0` when some variable has no value.
#[derive(Debug)]
struct Witness {
    steps: Vec<(Var, Solve)>,
    body: Exp,
}

impl Intrinsic for Witness {
    fn eval(&self, ev: &Evaluator, s: &State) -> XReal {
        let mut st = s.clone();
        for (v, solve) in &self.steps {
            match solve.value(&st) {
                Some(r) => st.set(v, r),
                None => return XReal::zero(),
            }
        }
        ev.exp(&self.body, &st)
    }
}

fn fresh(base: &str, avoid: &mut VarSet) -> Var {
    let v = fresh_or_same(&Var::reserved(base), avoid);
    avoid.insert(v.clone());
    v
}

/// `sup v_1 ... v_n: [R(num, 0, v_1) and ... and R(num, n-1, v_n)] (.)
/// f[x_i / v_i]` for `vars = {x_1, ..., x_n}` in order, where `R` is the
/// rational element predicate. When `num` codes a state `t`, this is `f`
/// with each `x_i` replaced by `t(x_i)`.
pub fn goedel_subst(f: &Exp, vars: &VarSet, num: &Var) -> Result<Exp> {
    let mut avoid = f.all_vars();
    avoid.extend(vars.iter().cloned());
    avoid.insert(num.clone());
    let mut map = SubstMap::new();
    let mut binders = Vec::new();
    let mut steps = Vec::new();
    let mut preds = Vec::new();
    for (i, x) in vars.iter().enumerate() {
        let v = fresh(&format!("r{i}"), &mut avoid);
        map.insert(x.clone(), AExpr::var(&v));
        preds.push(relem_formula(
            &AExpr::var(num),
            &AExpr::lit(i as u64),
            &AExpr::var(&v),
        ));
        steps.push((
            v.clone(),
            Solve::RElem {
                num: AExpr::var(num),
                index: i as u64,
            },
        ));
        binders.push(v);
    }
    let body = subst_exp_many(f, &map);
    let pure = binders
        .iter()
        .rev()
        .try_fold(odot(&iverson(&Formula::all(preds)), &body)?, |acc, v| {
            Ok::<Exp, Error>(Exp::sup(v, acc))
        })?;
    Ok(Exp::tagged(Arc::new(Witness { steps, body }), pure))
}

/// [`goedel_subst`] for an `f` whose free variables all lie in `vars`:
/// when `num` codes `t`, the value is `f(t)` at every state.
pub fn goedel_apply(f: &Exp, vars: &VarSet, num: &Var) -> Result<Exp> {
    if let Some(x) = f.free_vars().difference(vars).next() {
        return Err(Error::FreeVarsOutsideVarSet(x.to_string()));
    }
    goedel_subst(f, vars, num)
}

/// Names used by [`path_expectation`].
struct PathNames {
    num: Var,
    v: Var,
    num1: Var,
    num2: Var,
}

impl PathNames {
    fn new(avoid: &mut VarSet) -> PathNames {
        PathNames {
            num: fresh("num", avoid),
            v: fresh("v", avoid),
            num1: fresh("num1", avoid),
            num2: fresh("num2", avoid),
        }
    }
}

/// `Path(v1, v2)`: for `v1 = k >= 1` and `v2` the code of `s_0, ..., s_{k-1}`
/// its value is `([!b] * f)(s_{k-1})` times the one-step probabilities
/// `g[x' / s_{i+1}](s_i)`; it is `0` when `v1` is `0` or not natural.
///
/// ```text
/// [v1 < 2] * Last + [2 <= v1] * (Last (.) sup v: [v + 2 = v1] *
///     Product(sup num1: sup num2: [Elem(v2, p, num1) and Elem(v2, p + 1, num2)]
///             (.) Apply(Subst'(g, num2), num1), v))
/// Last = sup num: sup v: [v + 1 = v1] * ([Elem(v2, v, num)] (.) Apply([!b] * f, num))
/// ```
pub fn path_expectation(lp: &Loop, post: &Exp, vars: &VarSet, v1: &Var, v2: &Var) -> Result<Exp> {
    let template = body_wp_template(lp, vars)?;
    path_with_template(lp, post, vars, &template, v1, v2)
}

fn path_with_template(
    lp: &Loop,
    post: &Exp,
    vars: &VarSet,
    template: &BodyTemplate,
    v1: &Var,
    v2: &Var,
) -> Result<Exp> {
    let mut avoid = vars.clone();
    avoid.extend(post.all_vars());
    avoid.extend(template.g.all_vars());
    avoid.insert(v1.clone());
    avoid.insert(v2.clone());
    let n = PathNames::new(&mut avoid);
    let var = AExpr::var;
    let (a1, a2) = (var(v1), var(v2));

    let terminal = Exp::guard(BExpr::not(lp.guard.clone()), post.clone());
    let apply_last = goedel_apply(&terminal, vars, &n.num)?;
    let last_pure = Exp::sup(
        &n.num,
        Exp::sup(
            &n.v,
            Exp::guard(
                BExpr::eq(AExpr::add(var(&n.v), AExpr::one()), a1.clone()),
                odot(
                    &iverson(&elem_formula(&a2, &var(&n.v), &var(&n.num))),
                    &apply_last,
                )?,
            ),
        ),
    );
    let last = Exp::tagged(
        Arc::new(Witness {
            steps: vec![
                (
                    n.v.clone(),
                    Solve::Offset {
                        target: a1.clone(),
                        minus: 1,
                    },
                ),
                (
                    n.num.clone(),
                    Solve::Elem {
                        num: a2.clone(),
                        index: var(&n.v),
                    },
                ),
            ],
            body: apply_last.clone(),
        }),
        last_pure,
    );

    let p = fresh("p", &mut avoid);
    let primed: VarSet = template.primed.iter().cloned().collect();
    let step_value = goedel_subst(&goedel_subst(&template.g, &primed, &n.num2)?, vars, &n.num1)?;
    let pair = Formula::and(
        elem_formula(&a2, &var(&p), &var(&n.num1)),
        elem_formula(&a2, &AExpr::add(var(&p), AExpr::one()), &var(&n.num2)),
    );
    let step_pure = Exp::sup(
        &n.num1,
        Exp::sup(&n.num2, odot(&iverson(&pair), &step_value)?),
    );
    let step = Exp::tagged(
        Arc::new(Witness {
            steps: vec![
                (
                    n.num1.clone(),
                    Solve::Elem {
                        num: a2.clone(),
                        index: var(&p),
                    },
                ),
                (
                    n.num2.clone(),
                    Solve::Elem {
                        num: a2.clone(),
                        index: AExpr::add(var(&p), AExpr::one()),
                    },
                ),
            ],
            body: step_value.clone(),
        }),
        step_pure,
    );
    let product = make_series(Aggregate::Product, &step, &p, &var(&n.v))?.exp;
    let transitions_pure = Exp::sup(
        &n.v,
        Exp::guard(
            BExpr::eq(AExpr::add(var(&n.v), AExpr::lit(2)), a1.clone()),
            product.clone(),
        ),
    );
    let transitions = Exp::tagged(
        Arc::new(Witness {
            steps: vec![(
                n.v.clone(),
                Solve::Offset {
                    target: a1.clone(),
                    minus: 2,
                },
            )],
            body: product,
        }),
        transitions_pure,
    );
    Ok(Exp::add(
        Exp::guard(BExpr::lt(a1.clone(), AExpr::lit(2)), last.clone()),
        Exp::guard(BExpr::le(AExpr::lit(2), a1), odot(&last, &transitions)?),
    ))
}

/// Evaluates the loop encoding truncated at a path length: the sum over
/// state sequences `s_0 = s, ..., s_{k-1}` of the terminal value times the
/// template transition weights. Sequences are drawn from the states
/// reachable in one guarded step, since any other successor has weight
/// `0`.
#[derive(Clone, Debug)]
pub struct LoopPlan {
    pub lp: Loop,
    pub post: Exp,
    pub vars: VarSet,
    pub template: BodyTemplate,
    pub limits: Limits,
}

impl LoopPlan {
    fn terminal(&self) -> Exp {
        Exp::guard(BExpr::not(self.lp.guard.clone()), self.post.clone())
    }

    /// Visits every sequence of length `k` starting at `s` with non-zero
    /// weight, passing the sequence and its transition weight.
    fn for_each_sequence(
        &self,
        s: &State,
        k: usize,
        ev: &Evaluator,
        mut visit: impl FnMut(&[State], &XReal),
    ) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        let step = self.lp.guarded_step();
        let mut succ: HashMap<State, Vec<State>> = HashMap::new();
        let mut seen = 0usize;
        let mut stack = vec![(vec![s.restrict(&self.vars)], XReal::one())];
        while let Some((seq, w)) = stack.pop() {
            if seq.len() == k {
                seen += 1;
                if seen > self.limits.state_cap {
                    return Err(Error::FuelExceeded(format!(
                        "more than {} state sequences",
                        self.limits.state_cap
                    )));
                }
                visit(&seq, &w);
                continue;
            }
            let cur = seq.last().expect("non-empty").clone();
            if !succ.contains_key(&cur) {
                let d = forward_dist(&step, &cur, &self.vars, &self.limits)?;
                succ.insert(cur.clone(), d.iter().map(|(t, _)| t.clone()).collect());
            }
            for t in &succ[&cur] {
                let p = self.template.transition(&cur, t, ev);
                if p.is_zero() {
                    continue;
                }
                let mut next = seq.clone();
                next.push(t.clone());
                stack.push((next, &w * &p));
            }
        }
        Ok(())
    }

    /// The truncation of `h` at path length `k`.
    pub fn eval(&self, s: &State, k: usize, ev: &Evaluator) -> Result<XReal> {
        let terminal = self.terminal();
        let mut total = XReal::zero();
        self.for_each_sequence(s, k, ev, |seq, w| {
            let last = ev.exp(&terminal, seq.last().expect("non-empty"));
            total = &total + &Aggregate::Product.fold([w.clone(), last]);
        })?;
        Ok(total)
    }

    /// `Path(length, code)` for this loop, with fresh `length` and `code`.
    pub fn path_term(&self) -> Result<PathTerm> {
        let mut avoid = self.vars.clone();
        avoid.extend(self.post.all_vars());
        let length = fresh("length", &mut avoid);
        let code = fresh("s", &mut avoid);
        let exp = path_with_template(
            &self.lp,
            &self.post,
            &self.vars,
            &self.template,
            &length,
            &code,
        )?;
        Ok(PathTerm { length, code, exp })
    }

    /// The same truncation computed through the coding: each sequence is
    /// turned into its code, checked with the state-sequence predicate
    /// and weighed by evaluating `path` with its tags.
    pub fn eval_via_goedel(
        &self,
        path: &PathTerm,
        s: &State,
        k: usize,
        ev: &Evaluator,
    ) -> Result<XReal> {
        let seq_pred = state_seq_formula(
            &self.vars,
            &AExpr::var(&path.code),
            &AExpr::var(&path.length),
        );
        let mut seqs = Vec::new();
        self.for_each_sequence(s, k, ev, |seq, _| seqs.push(seq.to_vec()))?;
        let mut total = XReal::zero();
        for seq in seqs {
            let num = encode_state_seq(&seq, &self.vars).num;
            let at = s
                .with(&path.length, Rat::from_int(k as u64))
                .with(&path.code, Rat::from_biguint(num));
            if ev.formula(&seq_pred, &at) {
                total = &total + &ev.exp(&path.exp, &at);
            }
        }
        Ok(total)
    }
}

/// `Path(length, code)` together with its two free helper variables.
#[derive(Clone, Debug)]
pub struct PathTerm {
    pub length: Var,
    pub code: Var,
    pub exp: Exp,
}

#[derive(Debug)]
struct LoopTag {
    plan: LoopPlan,
    depth: usize,
}

impl Intrinsic for LoopTag {
    fn eval(&self, ev: &Evaluator, s: &State) -> XReal {
        // Truncations grow with the path length; on failure fall back to
        // the largest length that could be enumerated.
        (1..=self.depth)
            .rev()
            .find_map(|k| self.plan.eval(s, k, ev).ok())
            .unwrap_or_else(XReal::zero)
    }
}

/// The encoding of `wp(while (b) { C }, f)`: the evaluation plan, with the
/// written-out expectation `h` built on request.
#[derive(Clone, Debug)]
pub struct LoopEncoding {
    pub program: Program,
    pub post: Exp,
    pub vars: VarSet,
    pub plan: LoopPlan,
}

impl LoopEncoding {
    /// `h`. The term grows by a constant factor with every nested product,
    /// and for most loops it exceeds [`crate::series::TERM_NODE_CAP`],
    /// which is reported as [`Error::TermTooLarge`].
    pub fn pure(&self) -> Result<Exp> {
        let LoopPlan {
            lp,
            post,
            vars,
            template,
            ..
        } = &self.plan;
        let mut avoid = vars.clone();
        avoid.extend(post.all_vars());
        avoid.extend(template.g.all_vars());
        let length = fresh("length", &mut avoid);
        let nums = fresh("nums", &mut avoid);
        let code = fresh("s", &mut avoid);
        let path = path_with_template(lp, post, vars, template, &length, &code)?;
        let body = odot(
            &iverson(&state_seq_formula(
                vars,
                &AExpr::var(&code),
                &AExpr::var(&length),
            )),
            &path,
        )?;
        let sum = make_series(Aggregate::Sum, &body, &code, &AExpr::var(&nums))?.exp;
        Ok(Exp::sup(&length, Exp::sup(&nums, sum)))
    }

    /// `h` tagged with its truncation at path length `depth`.
    pub fn tagged(&self, depth: usize) -> Result<Exp> {
        Ok(Exp::tagged(
            Arc::new(LoopTag {
                plan: self.plan.clone(),
                depth,
            }),
            self.pure()?,
        ))
    }

    /// The truncation of `h` at path length `k`.
    pub fn eval(&self, s: &State, k: usize, ev: &Evaluator) -> Result<XReal> {
        self.plan.eval(s, k, ev)
    }
}

/// Encodes a loop with a loop-free body. `vars` is extended with the
/// loop's variables and the free variables of `post`.
pub fn encode_loop(
    program: &Program,
    post: &Exp,
    vars: &VarSet,
    limits: &Limits,
) -> Result<LoopEncoding> {
    let lp = Loop::from_program(program).ok_or(Error::NotALoop)?;
    if lp.body.contains_loop() {
        return Err(Error::ContainsLoop);
    }
    let vars = lp.scope(post, vars);
    let template = body_wp_template(&lp, &vars)?;
    let plan = LoopPlan {
        lp,
        post: post.clone(),
        vars: vars.clone(),
        template,
        limits: *limits,
    };
    Ok(LoopEncoding {
        program: program.clone(),
        post: post.clone(),
        vars,
        plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{parse_exp, parse_program};
    use crate::goedel::encode_state;
    use crate::semantics::QDomain;
    use crate::wp::{kleene_iterate, path_sum};

    fn v(s: &str) -> Var {
        Var::parse_any(s).unwrap()
    }

    fn r(s: &str) -> Rat {
        s.parse().unwrap()
    }

    fn st(c: u64, x: u64) -> State {
        State::new()
            .with(&v("c"), Rat::from_int(c))
            .with(&v("x"), Rat::from_int(x))
    }

    fn cx() -> VarSet {
        [v("c"), v("x")].into_iter().collect()
    }

    fn geo() -> Program {
        parse_program("while (c = 1) { {c := 0} [1/2] {c := 1}; x := x + 1 }").unwrap()
    }

    fn oracle() -> Evaluator {
        Evaluator::oracle(QDomain::naturals(2))
    }

    #[test]
    fn characteristic_assertion() {
        let a = char_assertion(&st(0, 1), &cx());
        assert_eq!(a.to_string(), "[c = 0 && x = 1] * 1");
        let ev = oracle();
        assert_eq!(ev.exp(&a, &st(0, 1)), XReal::one());
        assert_eq!(ev.exp(&a, &st(0, 2)), XReal::zero());
    }

    #[test]
    fn subst_and_apply() {
        let xy: VarSet = [v("x"), v("y")].into_iter().collect();
        let code = encode_state(
            &State::new()
                .with(&v("x"), Rat::one())
                .with(&v("y"), Rat::from_int(2)),
            &xy,
        )
        .num;
        let num = v("$n");
        let f = goedel_subst(&parse_exp("x + y").unwrap(), &xy, &num).unwrap();
        let at = State::new().with(&num, Rat::from_biguint(code));
        assert_eq!(oracle().exp(&f, &at), XReal::Fin(r("3")));

        let g = parse_exp("[!(c = 1)] * x").unwrap();
        let code = encode_state(&st(0, 3), &cx()).num;
        let a = goedel_apply(&g, &cx(), &num).unwrap();
        let at = st(1, 9).with(&num, Rat::from_biguint(code));
        assert_eq!(oracle().exp(&a, &at), XReal::Fin(r("3")));
        assert!(matches!(
            goedel_apply(&g, &[v("c")].into_iter().collect(), &num),
            Err(Error::FreeVarsOutsideVarSet(_))
        ));
    }

    /// Runs `f` on a thread whose stack fits the deeply nested terms.
    fn deep<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn(f)
            .unwrap()
            .join()
            .unwrap()
    }

    #[test]
    fn path_values() {
        deep(path_values_inner)
    }

    fn path_values_inner() {
        let lp = Loop::from_program(&geo()).unwrap();
        let (l, c) = (v("$l"), v("$q"));
        let path = path_expectation(&lp, &parse_exp("x").unwrap(), &cx(), &l, &c).unwrap();
        let ev = oracle();
        let one = encode_state_seq(&[st(0, 5)], &cx()).num;
        let at = State::new()
            .with(&l, Rat::one())
            .with(&c, Rat::from_biguint(one.clone()));
        assert_eq!(ev.exp(&path, &at), XReal::Fin(r("5")));
        let two = encode_state_seq(&[st(1, 0), st(0, 1)], &cx()).num;
        let at = State::new()
            .with(&l, Rat::from_int(2))
            .with(&c, Rat::from_biguint(two));
        assert_eq!(ev.exp(&path, &at), XReal::Fin(r("1/2")));
        let at = State::new()
            .with(&l, r("3/2"))
            .with(&c, Rat::from_biguint(one));
        assert_eq!(ev.exp(&path, &at), XReal::zero());
    }

    #[test]
    fn plan_matches_other_routes() {
        deep(plan_matches_other_routes_inner)
    }

    fn plan_matches_other_routes_inner() {
        let post = parse_exp("x").unwrap();
        let enc = encode_loop(&geo(), &post, &cx(), &Limits::default()).unwrap();
        let ev = oracle();
        let lp = Loop::from_program(&geo()).unwrap();
        let lim = Limits::default();
        assert_eq!(
            enc.plan.eval(&st(1, 0), 4, &ev).unwrap(),
            XReal::Fin(r("11/8"))
        );
        assert_eq!(
            enc.plan.eval(&st(0, 7), 3, &ev).unwrap(),
            XReal::Fin(r("7"))
        );
        for k in 1..=5 {
            let plan = enc.plan.eval(&st(1, 0), k, &ev).unwrap();
            assert_eq!(
                plan,
                path_sum(&lp, &post, &st(1, 0), &cx(), k, &ev, &lim).unwrap()
            );
            assert_eq!(
                plan,
                kleene_iterate(&lp, &post, &st(1, 0), &cx(), k, &ev, &lim).unwrap()
            );
        }
        let path = enc.plan.path_term().unwrap();
        for k in 1..=4 {
            assert_eq!(
                enc.plan.eval_via_goedel(&path, &st(1, 0), k, &ev).unwrap(),
                enc.plan.eval(&st(1, 0), k, &ev).unwrap()
            );
        }
    }

    #[test]
    fn reachable_sequences_match_grid_enumeration() {
        let post = parse_exp("x + c").unwrap();
        let enc = encode_loop(&geo(), &post, &cx(), &Limits::default()).unwrap();
        let ev = oracle();
        let terminal = Exp::guard(BExpr::not(enc.plan.lp.guard.clone()), post);
        let grid: Vec<State> = (0..2).flat_map(|c| (0..6).map(move |x| st(c, x))).collect();
        for k in 1..=4 {
            let mut seqs = vec![vec![st(1, 0)]];
            for _ in 1..k {
                seqs = seqs
                    .into_iter()
                    .flat_map(|q| {
                        grid.iter()
                            .map(move |t| [q.clone(), vec![t.clone()]].concat())
                    })
                    .collect();
            }
            let mut total = XReal::zero();
            for q in &seqs {
                let mut w = ev.exp(&terminal, q.last().unwrap());
                for pair in q.windows(2) {
                    w = Aggregate::Product
                        .fold([w, enc.plan.template.transition(&pair[0], &pair[1], &ev)]);
                }
                total = &total + &w;
            }
            assert_eq!(enc.eval(&st(1, 0), k, &ev).unwrap(), total, "k = {k}");
        }
    }

    #[test]
    fn pure_term_exceeds_node_cap() {
        deep(|| {
            let enc =
                encode_loop(&geo(), &parse_exp("x").unwrap(), &cx(), &Limits::default()).unwrap();
            assert!(matches!(enc.pure(), Err(Error::TermTooLarge { .. })));
        })
    }
}
