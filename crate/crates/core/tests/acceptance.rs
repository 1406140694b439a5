//! Acceptance criteria. Prints one pass/fail line per criterion and exits
//! non-zero when any criterion fails.

use std::time::{Duration, Instant};

use wpengine::ast::{parse_exp, parse_program, Var};
use wpengine::checks::{self, CheckConfig, Report};
use wpengine::expressiveness::encode_loop;
use wpengine::semantics::{Evaluator, QDomain, Rat, State, XReal};
use wpengine::wp::{kleene_iterate, Limits, Loop};

struct Outcome {
    ok: bool,
    detail: String,
}

impl From<Report> for Outcome {
    fn from(r: Report) -> Outcome {
        let mut detail = format!("{} cases", r.cases);
        if let Some(first) = r.failures.first() {
            detail = format!("{detail}, {} failures, first: {first}", r.failures.len());
        }
        Outcome {
            ok: r.passed(),
            detail,
        }
    }
}

fn v(s: &str) -> Var {
    Var::new(s).unwrap()
}

fn r(s: &str) -> Rat {
    s.parse().unwrap()
}

/// `2 - (k + 1) / 2^(k - 1) + x`, summed by hand over the paths of the
/// geometric loop that stop after exactly `j < k` heads.
fn geometric_closed_form(k: u32, x: &Rat) -> Rat {
    let mut total = Rat::zero();
    for j in 1..k {
        // Stop at the j-th step: probability 2^-j, final x is x + j.
        let p = Rat::ratio(1, 2u64.pow(j)).unwrap();
        total = &total + &(&p * &(x + &Rat::from_int(j as u64)));
    }
    total
}

fn geometric() -> Outcome {
    let prog = parse_program("while (c = 1) { {c := 0} [1/2] {c := 1}; x := x + 1 }").unwrap();
    let lp = Loop::from_program(&prog).unwrap();
    let post = parse_exp("x").unwrap();
    let vars = [v("c"), v("x")].into_iter().collect();
    let ev = Evaluator::restricted(QDomain::default());
    let lim = Limits::default();
    let mut problems = vec![];
    for x in ["0", "3", "5/2"].map(r) {
        let s = State::new()
            .with(&v("c"), Rat::one())
            .with(&v("x"), x.clone());
        let mut prev = XReal::zero();
        for k in 1..=30u32 {
            let got = kleene_iterate(&lp, &post, &s, &vars, k as usize, &ev, &lim).unwrap();
            if got < prev {
                problems.push(format!("not monotone at k = {k}, x = {x}"));
            }
            if k <= 12 {
                let hand = geometric_closed_form(k, &x);
                // The same value in closed form: 2 - (k + 1) 2^-(k-1) + x (1 - 2^-(k-1)).
                let p = Rat::ratio(1, 2u64.pow(k - 1)).unwrap();
                let closed = (&Rat::from_int(2) + &(&x * &(Rat::one().checked_sub(&p).unwrap())))
                    .checked_sub(&(&Rat::from_int(k as u64 + 1) * &p))
                    .unwrap();
                if got != XReal::Fin(hand.clone()) || hand != closed {
                    problems.push(format!(
                        "k = {k}, x = {x}: got {got}, paths {hand}, closed {closed}"
                    ));
                }
            }
            prev = got;
        }
        let limit = x.to_f64() + 2.0;
        if (prev.to_f64() - limit).abs() > 1e-6 {
            problems.push(format!(
                "k = 30, x = {x}: {prev} is not within 1e-6 of {limit}"
            ));
        }
        let enc = encode_loop(&prog, &post, &vars, &lim).unwrap();
        let plan = enc.eval(&s, 30, &ev).unwrap();
        if plan != prev {
            problems.push(format!("plan at k = 30, x = {x}: {plan} vs {prev}"));
        }
        for c in ["0", "2", "1/2"].map(r) {
            let off = s.with(&v("c"), c.clone());
            for k in 1..=12 {
                let got = kleene_iterate(&lp, &post, &off, &vars, k, &ev, &lim).unwrap();
                if got != XReal::Fin(x.clone()) {
                    problems.push(format!("c = {c}, x = {x}, k = {k}: got {got}"));
                }
            }
        }
    }
    Outcome {
        ok: problems.is_empty(),
        detail: problems
            .first()
            .cloned()
            .unwrap_or_else(|| "3 start values, k <= 30".into()),
    }
}

type Criterion<'a> = (&'static str, Duration, Box<dyn Fn() -> Outcome + 'a>);

fn main() {
    let cfg = CheckConfig::default();
    let criteria: Vec<Criterion> = vec![
        (
            "1 loop-free duality",
            Duration::from_secs(30),
            Box::new(|| checks::duality(&cfg, 200, 20).into()),
        ),
        (
            "2 geometric loop",
            Duration::from_secs(1),
            Box::new(geometric),
        ),
        (
            "3 three-way loop identity",
            Duration::from_secs(60),
            Box::new(|| checks::loops(&cfg, 20).into()),
        ),
        (
            "4 prenex rules",
            Duration::MAX,
            Box::new(|| checks::prenex(&cfg, 100).into()),
        ),
        (
            "5 Dedekind normal form",
            Duration::MAX,
            Box::new(|| checks::dnf(&cfg, 100).into()),
        ),
        (
            "6 sequence coding",
            Duration::from_secs(60),
            Box::new(|| checks::goedel().into()),
        ),
        (
            "7 sums and products",
            Duration::MAX,
            Box::new(|| checks::series(&cfg, 200, 100).into()),
        ),
        (
            "8 first-order embedding",
            Duration::MAX,
            Box::new(|| checks::fo(&cfg, 200).into()),
        ),
    ];
    let mut all = true;
    for (name, budget, run) in criteria {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let verdict = if out.ok { "PASS" } else { "FAIL" };
        let slow = if took > budget {
            format!(" (over the {budget:?} budget)")
        } else {
            String::new()
        };
        println!(
            "criterion {name}: {verdict} in {took:.2?}{slow}: {}",
            out.detail
        );
        all &= out.ok;
    }
    if !all {
        std::process::exit(1);
    }
}
