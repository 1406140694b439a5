//! Randomized and exhaustive property suites. Each suite compares two
//! independent routes to the same value and reports every disagreement.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigUint;
use rand::Rng;

use crate::ast::{AExpr, Exp, Quant, Var};
use crate::error::Result;
use crate::expressiveness::encode_loop;
use crate::gen::Gen;
use crate::goedel::{
    beta_decode, beta_encode, cantor_pair, cantor_unpair, decode_rat_seq, decode_seq,
    encode_rat_seq, encode_seq, fo_nat_to_rat, iverson, rat_code, rat_from_code, relem_formula,
};
use crate::normalform::{
    dnf_recover, formula_to_prenex, pull_step, to_dnf, to_prenex, DEFAULT_SUMMAND_CAP,
};
use crate::semantics::{calkin_wilf, Evaluator, QDomain, Rat, State, XReal};
use crate::series::{dedekind_product, make_product, make_sum, odot};
use crate::wp::{char_apply, forward_dist, kleene_iterate, path_sum, wp_loop_free, Limits, Loop};

/// Settings shared by all suites.
#[derive(Clone, Debug)]
pub struct CheckConfig {
    pub seed: u64,
    /// Largest iteration count for the loop suite.
    pub depth: usize,
    pub limits: Limits,
}

impl Default for CheckConfig {
    fn default() -> CheckConfig {
        CheckConfig {
            seed: 0,
            depth: 8,
            limits: Limits::default(),
        }
    }
}

/// Outcome of one suite.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub suite: String,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl Report {
    fn new(suite: &str) -> Report {
        Report {
            suite: suite.to_string(),
            ..Report::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn case(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.failures.push(describe());
        }
    }

    fn error(&mut self, what: impl fmt::Display) {
        self.cases += 1;
        self.failures.push(what.to_string());
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed() { "pass" } else { "FAIL" };
        write!(f, "{}: {verdict}, {} cases", self.suite, self.cases)?;
        if !self.passed() {
            write!(f, ", {} failures", self.failures.len())?;
        }
        Ok(())
    }
}

/// Names of the suites accepted by [`run`].
pub const SUITES: &[&str] = &["duality", "prenex", "dnf", "goedel", "series", "fo", "loop"];

/// Runs the suite called `name`.
pub fn run(name: &str, cfg: &CheckConfig) -> Option<Report> {
    Some(match name {
        "duality" => duality(cfg, 200, 20),
        "prenex" => prenex(cfg, 100),
        "dnf" => dnf(cfg, 100),
        "goedel" => goedel(),
        "series" => series(cfg, 200, 100),
        "fo" => fo(cfg, 200),
        "loop" => loops(cfg, 20),
        _ => return None,
    })
}

fn qf_eval() -> Evaluator {
    Evaluator::restricted(QDomain::default())
}

/// `wp(C, f)(s)` against the expected value of `f` under the forward
/// distribution of `C` from `s`, for random loop-free `C` and
/// quantifier-free `f`.
pub fn duality(cfg: &CheckConfig, programs: usize, states: usize) -> Report {
    let mut rep = Report::new("duality");
    let mut g = Gen::new(cfg.seed);
    let ev = qf_eval();
    let vars = g.var_set();
    for _ in 0..programs {
        let c = g.program();
        let f = g.qf_exp(3);
        let pre = match wp_loop_free(&c, &f) {
            Ok(pre) => pre,
            Err(e) => {
                rep.error(format!("{c}: {e}"));
                continue;
            }
        };
        for _ in 0..states {
            let s = g.state();
            let back = ev.exp(&pre, &s);
            let fwd = forward_dist(&c, &s, &vars, &cfg.limits).map(|d| d.expect(&f, &ev));
            match fwd {
                Ok(fwd) => rep.case(back == fwd, || {
                    format!("C = {c}, f = {f}, s = {s}: wp gives {back}, forward gives {fwd}")
                }),
                Err(e) => rep.error(format!("{c}: {e}")),
            }
        }
    }
    rep
}

/// The four pull rules, each at both quantifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PullRule {
    AddLeft,
    AddRight,
    Scale,
    Guard,
}

pub const PULL_RULES: [PullRule; 4] = [
    PullRule::AddLeft,
    PullRule::AddRight,
    PullRule::Scale,
    PullRule::Guard,
];

fn pull_instance(g: &mut Gen, rule: PullRule, q: Quant) -> Exp {
    let v = g.cfg.bound[0].clone();
    let mut pool = g.cfg.vars.clone();
    pool.push(v.clone());
    // The side operand may mention `v` freely, so the rule must rename.
    let f = g.exp_over(&pool, 2, true);
    let quantified = Exp::quant(q, &v, f);
    match rule {
        PullRule::AddLeft => Exp::add(quantified, g.exp_over(&pool, 1, false)),
        PullRule::AddRight => Exp::add(g.exp_over(&pool, 1, false), quantified),
        PullRule::Scale => Exp::scale(g.aexpr_over(&pool, 1), quantified),
        PullRule::Guard => Exp::guard(g.bexpr_over(&pool, 1), quantified),
    }
}

fn bound_state(g: &mut Gen) -> State {
    let mut s = g.state();
    for v in g.cfg.bound.clone() {
        let r = g.rat();
        s.set(&v, r);
    }
    s
}

/// Every pull rule at both quantifiers: the left- and right-hand sides
/// agree under restricted evaluation on three domain sizes. The full
/// prenex form is compared as well.
pub fn prenex(cfg: &CheckConfig, instances: usize) -> Report {
    let mut rep = Report::new("prenex");
    let mut g = Gen::new(cfg.seed);
    let doms: Vec<QDomain> = [1, 4, 8].iter().map(|&k| calkin_wilf(k, [])).collect();
    for rule in PULL_RULES {
        for q in [Quant::Sup, Quant::Inf] {
            for _ in 0..instances {
                let lhs = pull_instance(&mut g, rule, q);
                let Some(rhs) = pull_step(&lhs) else {
                    rep.error(format!("{rule:?}/{q:?}: no rule applies to {lhs}"));
                    continue;
                };
                let full = to_prenex(&lhs).to_exp();
                for _ in 0..10 {
                    let s = bound_state(&mut g);
                    for dom in &doms {
                        let ev = Evaluator::restricted(dom.clone());
                        let (a, b, c) = (ev.exp(&lhs, &s), ev.exp(&rhs, &s), ev.exp(&full, &s));
                        rep.case(a == b && a == c, || {
                            format!(
                                "{rule:?}/{q:?}: {lhs} = {a}, {rhs} = {b}, prenex {full} = {c} \
                                 at {s} over {} values",
                                dom.len()
                            )
                        });
                    }
                }
            }
        }
    }
    rep
}

/// The Dedekind normal form of random summation normal forms: it is
/// {0,1}-valued, it is 1 exactly at cuts below the value, and recovery
/// yields the largest domain value below the value.
pub fn dnf(cfg: &CheckConfig, forms: usize) -> Report {
    let mut rep = Report::new("dnf");
    let mut g = Gen::new(cfg.seed);
    for _ in 0..forms {
        let f = g.snf(3, 2).to_exp();
        let d = match to_dnf(&f, DEFAULT_SUMMAND_CAP) {
            Ok(d) => d,
            Err(e) => {
                rep.error(format!("{f}: {e}"));
                continue;
            }
        };
        let de = d.to_exp();
        let rec = dnf_recover(&d);
        for _ in 0..10 {
            let s = g.state();
            let dom = calkin_wilf(6, s.values().cloned());
            let ev = Evaluator::restricted(dom.clone());
            let value = ev.exp(&f, &s);
            let mut cuts: Vec<Rat> = dom.values().iter().take(8).cloned().collect();
            if let Some(v) = value.finite() {
                cuts.push(v.clone());
                cuts.push(v + &Rat::ratio(1, 2).expect("non-zero denominator"));
            }
            for r in cuts {
                let got = ev.exp(&de, &s.with(&d.cut, r.clone()));
                let want = if XReal::Fin(r.clone()) < value {
                    XReal::one()
                } else {
                    XReal::zero()
                };
                rep.case(got == want, || {
                    format!("D<{f}> at {s}, cut {r}: got {got}, value is {value}")
                });
            }
            let below = dom
                .values()
                .iter()
                .filter(|r| XReal::Fin((*r).clone()) < value)
                .max()
                .cloned()
                .unwrap_or_else(Rat::zero);
            let got = ev.exp(&rec, &s);
            rep.case(got == XReal::Fin(below.clone()), || {
                format!("recover D<{f}> at {s}: got {got}, largest value below {value} is {below}")
            });
        }
    }
    rep
}

fn nat(n: u64) -> BigUint {
    BigUint::from(n)
}

/// All sequences of length `len` over `0..=max`.
fn sequences(len: usize, max: u64) -> Vec<Vec<BigUint>> {
    (0..len).fold(vec![vec![]], |acc, _| {
        acc.into_iter()
            .flat_map(|p| (0..=max).map(move |e| [p.clone(), vec![nat(e)]].concat()))
            .collect()
    })
}

/// Brute-force minimal code of `seq`: the least `n` that decodes to it.
fn least_code(seq: &[BigUint]) -> BigUint {
    let mut n = nat(0);
    while decode_seq(&n, seq.len()) != seq {
        n += 1u32;
    }
    n
}

/// Sequence coding: beta roundtrip, canonical-code roundtrip, Cantor
/// bijection, rational codes, and minimality of sequence codes against
/// brute-force search.
pub fn goedel() -> Report {
    let mut rep = Report::new("goedel");
    for len in 0..=4 {
        for seq in sequences(len, 12) {
            let p = beta_encode(&seq);
            let back: Vec<BigUint> = (0..len as u64).map(|i| beta_decode(&p, i)).collect();
            rep.case(back == seq, || {
                format!("beta roundtrip of {seq:?}: got {back:?}")
            });
        }
    }
    for len in 0..=3 {
        for seq in sequences(len, 12) {
            let back = encode_seq(&seq).decode();
            rep.case(back == seq, || {
                format!("canonical roundtrip of {seq:?}: got {back:?}")
            });
        }
    }
    let mut codes = BTreeSet::new();
    for a in 0..=50u64 {
        for b in 0..=50u64 {
            let n = cantor_pair(&nat(a), &nat(b));
            let back = cantor_unpair(&n);
            rep.case(back == (nat(a), nat(b)), || {
                format!("unpair(pair({a}, {b})) = {back:?}")
            });
            codes.insert(n);
        }
    }
    rep.case(codes.len() == 51 * 51, || {
        "Cantor pairing is not injective".into()
    });
    for n in 0..2601u64 {
        let (a, b) = cantor_unpair(&nat(n));
        rep.case(cantor_pair(&a, &b) == nat(n), || {
            format!("pair(unpair({n})) != {n}")
        });
    }
    let ev = Evaluator::oracle(QDomain::default());
    let (num, i, r) = (Var::reserved("num"), Var::reserved("i"), Var::reserved("r"));
    let relem = relem_formula(&AExpr::var(&num), &AExpr::var(&i), &AExpr::var(&r));
    let mut rats = vec![];
    for q in 1..=7 {
        for p in 0..=14 {
            let x = Rat::ratio(p, q).expect("non-zero denominator");
            let back = rat_from_code(&rat_code(&x));
            rep.case(back.as_ref() == Some(&x), || {
                format!("rational code of {x}: got {back:?}")
            });
            rats.push(x);
        }
    }
    rats.sort();
    rats.dedup();
    for w in rats.windows(3).step_by(5) {
        let code = encode_rat_seq(w);
        let back = decode_rat_seq(&code.num, w.len());
        rep.case(back.as_deref() == Some(w), || {
            format!("rational sequence {w:?}: got {back:?}")
        });
        for (k, x) in w.iter().enumerate() {
            let at = State::new()
                .with(&num, Rat::from_biguint(code.num.clone()))
                .with(&i, Rat::from_int(k as u64));
            for y in w {
                let holds = ev.formula(&relem, &at.with(&r, y.clone()));
                rep.case(holds == (x == y), || {
                    format!("RElem({}, {k}, {y}) is {holds} for {w:?}", code.num)
                });
            }
        }
    }
    for len in 1..=2 {
        for seq in sequences(len, 3) {
            let best = least_code(&seq);
            let code = encode_seq(&seq);
            rep.case(code.num == best && code.minimal, || {
                format!(
                    "least code of {seq:?} is {best}, encoder gave {} ({})",
                    code.num, code.minimal
                )
            });
        }
    }
    rep
}

fn harmonic(n: u64) -> Rat {
    (1..=n).fold(Rat::zero(), |acc, j| {
        &acc + &Rat::ratio(1, j).expect("non-zero denominator")
    })
}

fn factorial(n: u64) -> Rat {
    (1..=n).fold(Rat::one(), |acc, j| &acc * &Rat::from_int(j))
}

/// Sums and products: harmonic numbers and factorials against direct
/// arithmetic, the unrestricted product against pointwise products, and
/// the Dedekind-cut product against the unrestricted product and against
/// its finite-domain value.
pub fn series(cfg: &CheckConfig, odot_pairs: usize, cut_pairs: usize) -> Report {
    let mut rep = Report::new("series");
    if let Err(e) = series_fixed(&mut rep) {
        rep.error(e);
    }
    let mut g = Gen::new(cfg.seed);
    let ev = Evaluator::oracle(QDomain::naturals(2));
    for i in 0..odot_pairs.max(cut_pairs) {
        let (f, h) = (g.qf_exp(2), g.qf_exp(2));
        let s = g.state();
        let (a, b) = (ev.exp(&f, &s), ev.exp(&h, &s));
        let prod = &a * &b;
        let o = match odot(&f, &h) {
            Ok(o) => o,
            Err(e) => {
                rep.error(format!("odot({f}, {h}): {e}"));
                continue;
            }
        };
        let got = ev.exp(&o, &s);
        if i < odot_pairs {
            rep.case(got == prod, || {
                format!("({f}) (.) ({h}) at {s}: got {got}, want {prod}")
            });
        }
        if i < cut_pairs {
            let dp = match dedekind_product(&f, &h) {
                Ok(dp) => dp,
                Err(e) => {
                    rep.error(format!("dedekind_product({f}, {h}): {e}"));
                    continue;
                }
            };
            let cut = ev.exp(&dp, &s);
            rep.case(cut == got, || {
                format!("cut product of {f} and {h} at {s}: {cut} vs {got}")
            });
            let dom = calkin_wilf(5, s.values().cloned());
            let below = |x: &XReal| -> Vec<Rat> {
                dom.values()
                    .iter()
                    .filter(|r| XReal::Fin((*r).clone()) < *x)
                    .cloned()
                    .collect()
            };
            let want = below(&a)
                .iter()
                .flat_map(|r1| below(&b).into_iter().map(move |r2| r1 * &r2))
                .max()
                .unwrap_or_else(Rat::zero);
            let fin = Evaluator::restricted(dom).exp(&dp, &s);
            rep.case(fin == XReal::Fin(want.clone()), || {
                format!("restricted cut product of {f} and {h} at {s}: got {fin}, want {want}")
            });
        }
    }
    rep
}

fn series_fixed(rep: &mut Report) -> Result<()> {
    let ev = Evaluator::oracle(QDomain::naturals(2));
    let x = Var::new("x")?;
    let body = crate::ast::parse_exp("1 / $s")?;
    let h = make_sum(&body, &AExpr::var(&x))?;
    for n in 1..=8 {
        let got = ev.exp(&h.exp, &State::new().with(&x, Rat::from_int(n)));
        let want = harmonic(n);
        rep.case(got == XReal::Fin(want.clone()), || {
            format!("H_{n}: got {got}, want {want}")
        });
    }
    let body = crate::ast::parse_exp("[$p = 0] * 1 + [1 <= $p] * $p")?;
    let p = make_product(&body, &AExpr::var(&x))?;
    for n in 0..=6 {
        let got = ev.exp(&p.exp, &State::new().with(&x, Rat::from_int(n)));
        let want = factorial(n);
        rep.case(got == XReal::Fin(want.clone()), || {
            format!("{n}!: got {got}, want {want}")
        });
    }
    Ok(())
}

/// The first-order embeddings: Iverson brackets of random formulas are
/// {0,1}-valued and agree with the formula's truth; the embedding of a
/// formula over the naturals evaluates like the original on the natural
/// part of the domain and is false at non-natural free values.
pub fn fo(cfg: &CheckConfig, formulas: usize) -> Report {
    let mut rep = Report::new("fo");
    let mut g = Gen::new(cfg.seed);
    let half = Rat::ratio(1, 2).expect("non-zero denominator");
    let dom = QDomain::from_values([0, 1, 2, 3].map(Rat::from_int).into_iter().chain([
        half.clone(),
        Rat::ratio(3, 2).expect("non-zero denominator"),
    ]));
    let nats = QDomain::naturals(4);
    for _ in 0..formulas {
        let p = g.formula(3);
        let e = iverson(&p);
        let ev = Evaluator::restricted(dom.clone());
        let s = g.state();
        let val = ev.exp(&e, &s);
        let truth = ev.formula(&p, &s);
        rep.case(val == XReal::one() || val == XReal::zero(), || {
            format!("[{p}] at {s} = {val}")
        });
        rep.case((val == XReal::one()) == truth, || {
            format!("[{p}] at {s} = {val}, formula is {truth}")
        });

        let emb = match fo_nat_to_rat(&formula_to_prenex(&p)) {
            Ok(emb) => emb,
            Err(e) => {
                rep.error(format!("{p}: {e}"));
                continue;
            }
        };
        let oracle = Evaluator::oracle(dom.clone());
        let mut ns = State::new();
        for v in &g.cfg.vars.clone() {
            let r = Rat::from_int(g.rng().gen_range(0..4));
            ns.set(v, r);
        }
        let over_nats = Evaluator::restricted(nats.clone()).formula(&p, &ns);
        let embedded = oracle.formula(&emb, &ns);
        rep.case(over_nats == embedded, || {
            format!("{p} at {ns}: {over_nats} over the naturals, embedding gives {embedded}")
        });
        if let Some(x) = p.free_vars().into_iter().next() {
            let off = ns.with(&x, half.clone());
            rep.case(!oracle.formula(&emb, &off), || {
                format!("embedding of {p} holds at non-natural {off}")
            });
        }
    }
    rep
}

/// Random loops: `k` Kleene iterations, the path sum, the loop encoding's
/// plan and the evaluated `k`-fold characteristic function all agree.
pub fn loops(cfg: &CheckConfig, count: usize) -> Report {
    let mut rep = Report::new("loop");
    let mut g = Gen::new(cfg.seed);
    let ev = qf_eval();
    let vars = g.var_set();
    for _ in 0..count {
        let prog = g.loop_program();
        let post = g.qf_exp(2);
        let lp = Loop::from_program(&prog).expect("generated a loop");
        let enc = match encode_loop(&prog, &post, &vars, &cfg.limits) {
            Ok(enc) => enc,
            Err(e) => {
                rep.error(format!("{prog}: {e}"));
                continue;
            }
        };
        let states: Vec<State> = (0..3).map(|_| g.loop_state()).collect();
        let mut phi = Exp::zero();
        for k in 1..=cfg.depth {
            phi = match char_apply(&lp, &post, &phi) {
                Ok(phi) => phi,
                Err(e) => {
                    rep.error(format!("{prog}: {e}"));
                    break;
                }
            };
            for s in &states {
                let routes = (|| -> Result<[XReal; 3]> {
                    Ok([
                        kleene_iterate(&lp, &post, s, &vars, k, &ev, &cfg.limits)?,
                        path_sum(&lp, &post, s, &vars, k, &ev, &cfg.limits)?,
                        enc.eval(s, k, &ev)?,
                    ])
                })();
                match routes {
                    Ok([kl, ps, plan]) => {
                        let syn = ev.exp(&phi, s);
                        rep.case(kl == ps && ps == plan && plan == syn, || {
                            format!(
                                "{prog}, f = {post}, s = {s}, k = {k}: Kleene {kl}, paths {ps}, \
                                 plan {plan}, Phi^k(0) {syn}"
                            )
                        });
                    }
                    Err(e) => rep.error(format!("{prog} at {s}, k = {k}: {e}")),
                }
            }
        }
    }
    rep
}
