use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde_json::{json, Value};

use wpengine::ast::{parse_exp, parse_program, Exp, Program, Var, VarSet};
use wpengine::checks::{self, CheckConfig, Report};
use wpengine::expressiveness::encode_loop;
use wpengine::goedel::{decode_seq, decode_state, encode_seq, encode_state};
use wpengine::normalform::{dnf_recover, to_dnf, to_prenex, to_snf, DEFAULT_SUMMAND_CAP};
use wpengine::semantics::{default_domain, Evaluator, Rat, State, XReal};
use wpengine::series::{make_series, product_index, sum_index, Aggregate};
use wpengine::wp::{kleene_iterate, wp_loop_free, Limits, Loop};
use wpengine::Error;

const DEFAULT_DEPTH: usize = 32;
const DEFAULT_CHECK_DEPTH: usize = 8;

#[derive(Parser)]
#[command(
    name = "wpengine",
    version,
    about = "Weakest preexpectations for probabilistic programs"
)]
struct Cli {
    #[command(flatten)]
    run: RunConfig,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct RunConfig {
    /// Quantifier domain size for evaluation; path length for encode-loop;
    /// largest iteration count for `check loop` (default 8 there).
    #[arg(long, global = true, env = "WPENGINE_DEPTH")]
    depth: Option<usize>,
    /// Kleene iterations when no count is given.
    #[arg(long, global = true, default_value_t = 30)]
    iters: usize,
    /// Largest number of states or state sequences held at once.
    #[arg(long, global = true, default_value_t = 100_000)]
    state_cap: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Seed for the randomized check suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

impl RunConfig {
    fn depth(&self) -> usize {
        self.depth.unwrap_or(DEFAULT_DEPTH)
    }

    fn limits(&self) -> Limits {
        Limits {
            fuel: self.iters,
            state_cap: self.state_cap,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Weakest preexpectation of a program.
    Wp(WpArgs),
    /// Run a property suite.
    Check {
        #[arg(value_parser = suite_names())]
        suite: String,
    },
    /// Prenex, summation or Dedekind normal form of an expectation.
    Normalize(NormalizeArgs),
    /// Sequence and state codes.
    #[command(subcommand)]
    Goedel(GoedelCmd),
    /// Sums and products over an index running from 0 to n.
    Series(SeriesArgs),
    /// Encode a loop as an expectation and evaluate its truncations.
    EncodeLoop(EncodeLoopArgs),
}

fn suite_names() -> Vec<&'static str> {
    let mut names = checks::SUITES.to_vec();
    names.push("all");
    names
}

#[derive(Args)]
struct ProgramSource {
    /// Program file.
    #[arg(short = 'p', long = "program", conflicts_with = "program_text")]
    program: Option<PathBuf>,
    /// Program text.
    #[arg(short = 'e', long = "program-text")]
    program_text: Option<String>,
}

impl ProgramSource {
    fn load(&self) -> Result<Program, Failure> {
        let src = match (&self.program, &self.program_text) {
            (Some(path), _) => fs::read_to_string(path)
                .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
            (None, Some(text)) => text.clone(),
            (None, None) => return Err(Failure::usage("give a program with -p or -e")),
        };
        Ok(parse_program(&src)?)
    }
}

#[derive(Args)]
struct WpArgs {
    #[command(flatten)]
    source: ProgramSource,
    /// Postexpectation.
    #[arg(short = 'f', long = "post")]
    post: String,
    /// Print the syntactic preexpectation (loop-free programs only).
    #[arg(long)]
    syntactic: bool,
    /// Iterate the characteristic function of a loop this many times
    /// (`--iters` when given without a count).
    #[arg(long, num_args = 0..=1, default_missing_value = "0")]
    kleene: Option<usize>,
    /// States to evaluate at, as `x=1,y=3/2`; repeatable.
    #[arg(long)]
    at: Vec<String>,
}

#[derive(Args)]
struct NormalizeArgs {
    #[arg(short = 'f', long = "exp")]
    exp: String,
    #[arg(long, value_enum, default_value_t = NormalForm::Prenex, group = "form")]
    to: NormalForm,
    #[arg(long, group = "form")]
    prenex: bool,
    #[arg(long, group = "form")]
    snf: bool,
    #[arg(long, group = "form")]
    dnf: bool,
    /// The expectation recovered from the Dedekind normal form.
    #[arg(long, group = "form")]
    recover: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum NormalForm {
    Prenex,
    Snf,
    Dnf,
    Recover,
}

impl NormalizeArgs {
    fn form(&self) -> NormalForm {
        match (self.prenex, self.snf, self.dnf, self.recover) {
            (_, true, _, _) => NormalForm::Snf,
            (_, _, true, _) => NormalForm::Dnf,
            (_, _, _, true) => NormalForm::Recover,
            (true, _, _, _) => NormalForm::Prenex,
            _ => self.to,
        }
    }
}

#[derive(Subcommand)]
enum GoedelCmd {
    /// Code of a sequence of naturals, e.g. `3,1,4`.
    EncodeSeq { seq: String },
    /// The first `len` elements coded by `num`.
    DecodeSeq { num: String, len: usize },
    /// Code of a state over the given variables (default: its own).
    EncodeState {
        state: String,
        #[arg(long, value_delimiter = ',')]
        vars: Vec<String>,
    },
    /// The state over `vars` coded by `num`.
    DecodeState {
        num: String,
        #[arg(long, value_delimiter = ',', required = true)]
        vars: Vec<String>,
    },
}

#[derive(Args)]
struct SeriesArgs {
    kind: SeriesKind,
    /// Summand over the index `$s` (sums) or factor over `$p` (products).
    #[arg(long)]
    body: String,
    /// Last index.
    #[arg(long)]
    n: String,
    #[arg(long, default_value = "")]
    at: String,
    /// Also print the written-out expectation.
    #[arg(long)]
    emit_pure: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeriesKind {
    Sum,
    Product,
}

#[derive(Args)]
struct EncodeLoopArgs {
    #[command(flatten)]
    source: ProgramSource,
    #[arg(short = 'f', long = "post")]
    post: String,
    /// Also build and print the written-out expectation.
    #[arg(long)]
    emit_pure: bool,
    /// State to evaluate at.
    #[arg(long, default_value = "")]
    eval_at: String,
}

/// A failed command with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match e {
            Error::ContainsLoop => 3,
            Error::FuelExceeded(_) | Error::SummandBlowup { .. } | Error::TermTooLarge { .. } => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<Output, Failure>;

/// What a command prints, in both formats, and whether it succeeded.
struct Output {
    text: String,
    json: Value,
    ok: bool,
}

impl Output {
    fn ok(text: String, json: Value) -> Output {
        Output {
            text,
            json,
            ok: true,
        }
    }
}

fn frac(x: &XReal) -> String {
    x.to_fraction_string()
}

fn vars_of(names: &[String]) -> Result<VarSet, Failure> {
    Ok(names
        .iter()
        .map(|n| Var::parse_any(n.trim()))
        .collect::<Result<_, _>>()?)
}

fn nat_arg(s: &str) -> Result<BigUint, Failure> {
    s.trim()
        .parse()
        .map_err(|_| Failure::usage(format!("`{s}` is not a natural number")))
}

fn evaluator(run: &RunConfig, f: &Exp, s: &State) -> Evaluator {
    Evaluator::oracle(default_domain(f, s, run.depth()))
}

fn cmd_wp(run: &RunConfig, a: &WpArgs) -> CmdResult {
    let prog = a.source.load()?;
    let post = parse_exp(&a.post)?;
    let states: Vec<State> = if a.at.is_empty() {
        vec![]
    } else {
        a.at.iter()
            .map(|s| State::parse(s))
            .collect::<Result<_, _>>()?
    };
    let syntactic = a.syntactic || (a.kleene.is_none() && !prog.contains_loop());
    let mut text = vec![];
    let mut values = vec![];
    let mut out = json!({});
    if syntactic {
        let pre = wp_loop_free(&prog, &post)?;
        text.push(pre.to_string());
        out["pre"] = json!(pre.to_string());
        for s in &states {
            let v = evaluator(run, &pre, s).exp(&pre, s);
            text.push(format!("{s}: {v}"));
            values.push(json!({"state": s.to_string(), "value": frac(&v)}));
        }
    } else {
        let lp = Loop::from_program(&prog).ok_or(Error::NotALoop)?;
        let k = match a.kleene {
            Some(0) | None => run.iters,
            Some(k) => k,
        };
        let states = if states.is_empty() {
            vec![State::new()]
        } else {
            states
        };
        for s in &states {
            let ev = evaluator(run, &post, s);
            let v = kleene_iterate(&lp, &post, s, &VarSet::new(), k, &ev, &run.limits())?;
            text.push(if a.at.is_empty() {
                v.to_string()
            } else {
                format!("{s}: {v}")
            });
            values.push(json!({"state": s.to_string(), "value": frac(&v), "k": k}));
        }
    }
    out["values"] = Value::Array(values);
    Ok(Output::ok(text.join("\n"), out))
}

fn report_json(r: &Report) -> Value {
    json!({"suite": r.suite, "passed": r.passed(), "cases": r.cases, "failures": r.failures})
}

fn cmd_check(run: &RunConfig, suite: &str) -> CmdResult {
    let cfg = CheckConfig {
        seed: run.seed,
        depth: run.depth.unwrap_or(DEFAULT_CHECK_DEPTH),
        limits: run.limits(),
    };
    let names: Vec<&str> = if suite == "all" {
        checks::SUITES.to_vec()
    } else {
        vec![suite]
    };
    let reports: Vec<Report> = names
        .iter()
        .map(|n| checks::run(n, &cfg).expect("suite names are validated"))
        .collect();
    let mut text = vec![];
    for r in &reports {
        text.push(r.to_string());
        text.extend(r.failures.iter().map(|f| format!("  {f}")));
    }
    let ok = reports.iter().all(Report::passed);
    let json = Value::Array(reports.iter().map(report_json).collect());
    Ok(Output {
        text: text.join("\n"),
        json,
        ok,
    })
}

fn cmd_normalize(a: &NormalizeArgs) -> CmdResult {
    let f = parse_exp(&a.exp)?;
    let (term, extra) = match a.form() {
        NormalForm::Prenex => (to_prenex(&f).to_exp(), json!({})),
        NormalForm::Snf => {
            let snf = to_snf(&f);
            (snf.to_exp(), json!({"summands": snf.summands.len()}))
        }
        NormalForm::Dnf => {
            let d = to_dnf(&f, DEFAULT_SUMMAND_CAP)?;
            (d.to_exp(), json!({"cut": d.cut.to_string()}))
        }
        NormalForm::Recover => (dnf_recover(&to_dnf(&f, DEFAULT_SUMMAND_CAP)?), json!({})),
    };
    let mut json = extra;
    json["term"] = json!(term.to_string());
    Ok(Output::ok(term.to_string(), json))
}

fn cmd_goedel(g: &GoedelCmd) -> CmdResult {
    match g {
        GoedelCmd::EncodeSeq { seq } => {
            let elems: Vec<BigUint> = seq
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(nat_arg)
                .collect::<Result<_, _>>()?;
            let code = encode_seq(&elems);
            Ok(Output::ok(
                code.num.to_string(),
                json!({"code": code.num.to_string(), "length": code.length, "minimal": code.minimal}),
            ))
        }
        GoedelCmd::DecodeSeq { num, len } => {
            let seq = decode_seq(&nat_arg(num)?, *len);
            let strs: Vec<String> = seq.iter().map(BigUint::to_string).collect();
            Ok(Output::ok(strs.join(","), json!({"seq": strs})))
        }
        GoedelCmd::EncodeState { state, vars } => {
            let s = State::parse(state)?;
            let vars = if vars.is_empty() {
                s.iter().map(|(v, _)| v.clone()).collect()
            } else {
                vars_of(vars)?
            };
            let code = encode_state(&s, &vars);
            let names: Vec<String> = vars.iter().map(Var::to_string).collect();
            Ok(Output::ok(
                code.num.to_string(),
                json!({"code": code.num.to_string(), "vars": names, "minimal": code.minimal}),
            ))
        }
        GoedelCmd::DecodeState { num, vars } => {
            let s = decode_state(&nat_arg(num)?, &vars_of(vars)?)?;
            let bindings: serde_json::Map<String, Value> = s
                .iter()
                .map(|(v, r)| (v.to_string(), json!(r.to_fraction_string())))
                .collect();
            Ok(Output::ok(s.to_string(), json!({"state": bindings})))
        }
    }
}

fn cmd_series(run: &RunConfig, a: &SeriesArgs) -> CmdResult {
    let body = parse_exp(&a.body)?;
    let n: Rat = a.n.trim().parse()?;
    let (kind, index) = match a.kind {
        SeriesKind::Sum => (Aggregate::Sum, sum_index()),
        SeriesKind::Product => (Aggregate::Product, product_index()),
    };
    let s = State::parse(&a.at)?;
    let series = make_series(kind, &body, &index, &wpengine::ast::AExpr::rat(n))?;
    let v = series.eval(&evaluator(run, &body, &s), &s);
    let mut text = v.to_string();
    let mut json = json!({"value": frac(&v)});
    if a.emit_pure {
        let pure = series.exp.to_string();
        text = format!("{text}\n{pure}");
        json["pure"] = json!(pure);
    }
    Ok(Output::ok(text, json))
}

fn cmd_encode_loop(run: &RunConfig, a: &EncodeLoopArgs) -> CmdResult {
    let prog = a.source.load()?;
    let post = parse_exp(&a.post)?;
    let s = State::parse(&a.eval_at)?;
    let enc = encode_loop(&prog, &post, &VarSet::new(), &run.limits())?;
    let ev = evaluator(run, &post, &s);
    let mut text = vec![];
    let mut values = vec![];
    for k in 1..=run.depth() {
        let v = enc.eval(&s, k, &ev)?;
        text.push(format!("k = {k}: {v}"));
        values.push(json!({"k": k, "value": frac(&v)}));
    }
    let mut json = json!({"values": values});
    if a.emit_pure {
        let pure = enc.pure()?.to_string();
        text.insert(0, pure.clone());
        json["pure"] = json!(pure);
    }
    Ok(Output::ok(text.join("\n"), json))
}

fn dispatch(cli: &Cli) -> CmdResult {
    let run = &cli.run;
    match &cli.command {
        Command::Wp(a) => cmd_wp(run, a),
        Command::Check { suite } => cmd_check(run, suite),
        Command::Normalize(a) => cmd_normalize(a),
        Command::Goedel(g) => cmd_goedel(g),
        Command::Series(a) => cmd_series(run, a),
        Command::EncodeLoop(a) => cmd_encode_loop(run, a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Written-out encodings nest thousands of quantifiers deep.
    let result = std::thread::Builder::new()
        .stack_size(1 << 30)
        .spawn(move || {
            let format = cli.run.format;
            (dispatch(&cli), format)
        })
        .expect("spawn worker thread")
        .join()
        .expect("worker thread panicked");
    match result {
        (Ok(out), format) => {
            match format {
                Format::Text => println!("{}", out.text),
                Format::Json => println!("{}", out.json),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        (Err(f), format) => {
            match format {
                Format::Text => eprintln!("error: {}", f.message),
                Format::Json => println!("{}", json!({"error": f.message, "exit": f.code})),
            }
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn error_classes_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::ContainsLoop).code, 3);
        assert_eq!(Failure::from(Error::TermTooLarge { cap: 1 }).code, 4);
        assert_eq!(Failure::from(Error::FuelExceeded("x".into())).code, 4);
        assert_eq!(Failure::from(Error::NotALoop).code, 2);
    }
}
