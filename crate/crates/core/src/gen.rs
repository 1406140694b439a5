//! Seeded random generators for programs, expectations, normal forms,
//! formulas and states. The same seed always yields the same sequence.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ast::{AExpr, BExpr, Exp, Formula, Program, Quant, Var, VarSet};
use crate::normalform::Snf;
use crate::semantics::{Rat, State};

/// Shape limits for generated terms.
#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Program variables.
    pub vars: Vec<Var>,
    /// Names available to quantifiers.
    pub bound: Vec<Var>,
    /// Largest numerator and denominator of a constant.
    pub max_const: u64,
    /// Largest tree depth.
    pub depth: usize,
}

impl Default for GenConfig {
    fn default() -> GenConfig {
        let v = |s: &str| Var::new(s).expect("valid name");
        GenConfig {
            vars: vec![v("x"), v("y"), v("z")],
            bound: vec![v("u"), v("w")],
            max_const: 9,
            depth: 4,
        }
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
    pub cfg: GenConfig,
}

impl Gen {
    pub fn new(seed: u64) -> Gen {
        Gen::with_config(seed, GenConfig::default())
    }

    pub fn with_config(seed: u64, cfg: GenConfig) -> Gen {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            cfg,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn var_set(&self) -> VarSet {
        self.cfg.vars.iter().cloned().collect()
    }

    pub fn rat(&mut self) -> Rat {
        let p = self.rng.gen_range(0..=self.cfg.max_const);
        let q = self.rng.gen_range(1..=self.cfg.max_const);
        Rat::ratio(p, q).expect("non-zero denominator")
    }

    /// A natural constant up to `max_const`.
    pub fn nat(&mut self) -> Rat {
        Rat::from_int(self.rng.gen_range(0..=self.cfg.max_const))
    }

    pub fn prob(&mut self) -> Rat {
        let q = self.rng.gen_range(1..=self.cfg.max_const);
        let p = self.rng.gen_range(0..=q);
        Rat::ratio(p, q).expect("non-zero denominator")
    }

    fn pick(&mut self, pool: &[Var]) -> Var {
        pool.choose(&mut self.rng).expect("non-empty pool").clone()
    }

    /// A state over the program variables with values drawn by [`Gen::rat`].
    pub fn state(&mut self) -> State {
        let mut s = State::new();
        for v in self.cfg.vars.clone() {
            let r = if self.rng.gen_bool(0.5) {
                self.nat()
            } else {
                self.rat()
            };
            s.set(&v, r);
        }
        s
    }

    /// An arithmetic term over `pool`.
    pub fn aexpr_over(&mut self, pool: &[Var], depth: usize) -> AExpr {
        if depth == 0 || self.rng.gen_bool(0.4) {
            return if !pool.is_empty() && self.rng.gen_bool(0.6) {
                AExpr::var(&self.pick(pool))
            } else {
                AExpr::rat(self.rat())
            };
        }
        let a = self.aexpr_over(pool, depth - 1);
        let b = self.aexpr_over(pool, depth - 1);
        match self.rng.gen_range(0..4) {
            0 | 1 => AExpr::add(a, b),
            2 => AExpr::mul(a, b),
            _ => AExpr::monus(a, b),
        }
    }

    pub fn aexpr(&mut self, depth: usize) -> AExpr {
        let pool = self.cfg.vars.clone();
        self.aexpr_over(&pool, depth)
    }

    /// A Boolean expression over `pool`.
    pub fn bexpr_over(&mut self, pool: &[Var], depth: usize) -> BExpr {
        if depth == 0 || self.rng.gen_bool(0.5) {
            let a = self.aexpr_over(pool, 1);
            let b = self.aexpr_over(pool, 1);
            return match self.rng.gen_range(0..4) {
                0 => BExpr::lt(a, b),
                1 => BExpr::le(a, b),
                2 => BExpr::eq(a, b),
                _ => BExpr::ne(a, b),
            };
        }
        match self.rng.gen_range(0..3) {
            0 => BExpr::and(
                self.bexpr_over(pool, depth - 1),
                self.bexpr_over(pool, depth - 1),
            ),
            1 => BExpr::or(
                self.bexpr_over(pool, depth - 1),
                self.bexpr_over(pool, depth - 1),
            ),
            _ => BExpr::not(self.bexpr_over(pool, depth - 1)),
        }
    }

    pub fn bexpr(&mut self, depth: usize) -> BExpr {
        let pool = self.cfg.vars.clone();
        self.bexpr_over(&pool, depth)
    }

    /// A loop-free program of at most the configured depth.
    pub fn program(&mut self) -> Program {
        let d = self.cfg.depth;
        self.program_depth(d)
    }

    pub fn program_depth(&mut self, depth: usize) -> Program {
        let pool = self.cfg.vars.clone();
        self.program_over(&pool, depth)
    }

    /// A loop-free program that only assigns variables from `pool`.
    pub fn program_over(&mut self, pool: &[Var], depth: usize) -> Program {
        if depth <= 1 || self.rng.gen_bool(0.25) {
            return if self.rng.gen_bool(0.1) {
                Program::Skip
            } else {
                let x = self.pick(pool);
                Program::assign(&x, self.aexpr(1))
            };
        }
        match self.rng.gen_range(0..3) {
            0 => Program::seq(
                self.program_over(pool, depth - 1),
                self.program_over(pool, depth - 1),
            ),
            1 => {
                let p = self.prob();
                Program::pchoice(
                    self.program_over(pool, depth - 1),
                    p,
                    self.program_over(pool, depth - 1),
                )
            }
            _ => Program::ite(
                self.bexpr(1),
                self.program_over(pool, depth - 1),
                self.program_over(pool, depth - 1),
            ),
        }
    }

    /// A probability strictly between 0 and 1.
    fn proper_prob(&mut self) -> Rat {
        let q = self.rng.gen_range(2..=self.cfg.max_const.max(2));
        let p = self.rng.gen_range(1..q);
        Rat::ratio(p, q).expect("non-zero denominator")
    }

    /// A `while` loop with a loop-free body of depth at most 3. Three
    /// shapes are mixed: a flag loop `while (c = 1) { C; {c := 0} [p]
    /// {skip} }`, a counter loop `while (x < n) { {x := x + 1} [p] {C} }`,
    /// and an arbitrary guard around an arbitrary body.
    pub fn loop_program(&mut self) -> Program {
        let vars = self.cfg.vars.clone();
        let (flag, rest) = vars.split_last().expect("at least one variable");
        let rest = if rest.is_empty() {
            vars.clone()
        } else {
            rest.to_vec()
        };
        match self.rng.gen_range(0..4) {
            0 | 1 => {
                let body = self.program_over(&rest, 2);
                let p = self.proper_prob();
                let stop = Program::pchoice(Program::assign(flag, AExpr::zero()), p, Program::Skip);
                Program::while_loop(
                    BExpr::eq(AExpr::var(flag), AExpr::one()),
                    Program::seq(body, stop),
                )
            }
            2 => {
                let bound = AExpr::lit(self.rng.gen_range(1..=4));
                let body = self.program_over(&rest, 2);
                let p = self.proper_prob();
                let step = Program::assign(flag, AExpr::add(AExpr::var(flag), AExpr::one()));
                Program::while_loop(
                    BExpr::lt(AExpr::var(flag), bound),
                    Program::pchoice(step, p, body),
                )
            }
            _ => {
                let guard = self.bexpr(1);
                Program::while_loop(guard, self.program_depth(3))
            }
        }
    }

    /// A state for loops from [`Gen::loop_program`]: naturals, with the
    /// flag variable set to 1 three times out of four.
    pub fn loop_state(&mut self) -> State {
        let mut s = State::new();
        for v in self.cfg.vars.clone() {
            let r = self.rng.gen_range(0..=3);
            s.set(&v, Rat::from_int(r));
        }
        if self.rng.gen_bool(0.75) {
            let flag = self.cfg.vars.last().expect("at least one variable").clone();
            s.set(&flag, Rat::one());
        }
        s
    }

    /// A quantifier-free expectation over the program variables.
    pub fn qf_exp(&mut self, depth: usize) -> Exp {
        let pool = self.cfg.vars.clone();
        self.exp_over(&pool, depth, false)
    }

    /// An expectation whose quantifiers bind names from the bound pool.
    pub fn exp(&mut self, depth: usize) -> Exp {
        let pool = self.cfg.vars.clone();
        self.exp_over(&pool, depth, true)
    }

    /// An expectation over `pool`, with quantifiers when `quantifiers` is set.
    pub fn exp_over(&mut self, pool: &[Var], depth: usize, quantifiers: bool) -> Exp {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return Exp::arith(self.aexpr_over(pool, 1));
        }
        let choices = if quantifiers { 5 } else { 3 };
        match self.rng.gen_range(0..choices) {
            0 => Exp::guard(
                self.bexpr_over(pool, 1),
                self.exp_over(pool, depth - 1, quantifiers),
            ),
            1 => Exp::add(
                self.exp_over(pool, depth - 1, quantifiers),
                self.exp_over(pool, depth - 1, quantifiers),
            ),
            2 => Exp::scale(
                self.aexpr_over(pool, 1),
                self.exp_over(pool, depth - 1, quantifiers),
            ),
            q => {
                let v = self.pick(&self.cfg.bound.clone());
                let mut inner: Vec<Var> = pool.to_vec();
                inner.push(v.clone());
                let body = self.exp_over(&inner, depth - 1, quantifiers);
                if q == 3 {
                    Exp::sup(&v, body)
                } else {
                    Exp::inf(&v, body)
                }
            }
        }
    }

    /// A summation normal form with up to `max_summands` summands and up
    /// to `max_prefix` quantifiers.
    pub fn snf(&mut self, max_summands: usize, max_prefix: usize) -> Snf {
        let k = self.rng.gen_range(0..=max_prefix.min(self.cfg.bound.len()));
        let prefix: Vec<(Quant, Var)> = self.cfg.bound[..k]
            .to_vec()
            .into_iter()
            .map(|v| {
                (
                    if self.rng.gen_bool(0.5) {
                        Quant::Sup
                    } else {
                        Quant::Inf
                    },
                    v,
                )
            })
            .collect();
        let mut pool = self.cfg.vars.clone();
        pool.extend(prefix.iter().map(|(_, v)| v.clone()));
        let n = self.rng.gen_range(1..=max_summands);
        let summands = (0..n)
            .map(|_| (self.bexpr_over(&pool, 1), self.aexpr_over(&pool, 1)))
            .collect();
        Snf { prefix, summands }
    }

    /// A first-order formula over the program variables.
    pub fn formula(&mut self, depth: usize) -> Formula {
        let pool = self.cfg.vars.clone();
        self.formula_over(&pool, depth)
    }

    fn formula_over(&mut self, pool: &[Var], depth: usize) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return Formula::atom(self.bexpr_over(pool, 0));
        }
        match self.rng.gen_range(0..6) {
            0 => Formula::and(
                self.formula_over(pool, depth - 1),
                self.formula_over(pool, depth - 1),
            ),
            1 => Formula::or(
                self.formula_over(pool, depth - 1),
                self.formula_over(pool, depth - 1),
            ),
            2 => Formula::implies(
                self.formula_over(pool, depth - 1),
                self.formula_over(pool, depth - 1),
            ),
            3 => Formula::not(self.formula_over(pool, depth - 1)),
            q => {
                let v = self.pick(&self.cfg.bound.clone());
                let mut inner: Vec<Var> = pool.to_vec();
                inner.push(v.clone());
                let body = self.formula_over(&inner, depth - 1);
                if q == 4 {
                    Formula::exists(&v, body)
                } else {
                    Formula::forall(&v, body)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_terms() {
        let mut a = Gen::new(7);
        let mut b = Gen::new(7);
        for _ in 0..20 {
            assert_eq!(a.program().to_string(), b.program().to_string());
            assert_eq!(a.exp(3).to_string(), b.exp(3).to_string());
        }
    }

    #[test]
    fn shapes_respect_limits() {
        let mut g = Gen::new(1);
        for _ in 0..100 {
            assert!(!g.program().contains_loop());
            assert!(g.qf_exp(3).is_quantifier_free());
            let s = g.snf(3, 2);
            assert!((1..=3).contains(&s.summands.len()) && s.prefix.len() <= 2);
            let r = g.rat();
            assert!(r.numer() <= 9u32.into() && r.denom() <= 9u32.into());
        }
    }
}
