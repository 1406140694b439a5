use std::process::{Command, Output};

use serde_json::Value;

const GEOMETRIC: &str = "while (c = 1) { {c := 0} [1/2] {x := x + 1} }";

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wpengine"))
        .args(args)
        .env_remove("WPENGINE_DEPTH")
        .output()
        .expect("run wpengine")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).trim().to_string()
}

fn json(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--format", "json"]);
    let out = run(&all);
    assert!(out.status.success(), "{:?}", out);
    serde_json::from_str(&stdout(&out)).expect("json output")
}

#[test]
fn wp_loop_free_prints_syntactic_preexpectation() {
    let v = json(&[
        "wp",
        "-e",
        "{x := x + 1} [1/2] {x := 0}",
        "-f",
        "x",
        "--at",
        "x=3",
    ]);
    assert_eq!(v["pre"], "1/2 * (x + 1) + 1/2 * 0");
    assert_eq!(v["values"][0]["value"], "2/1");
}

#[test]
fn wp_kleene_iterates_loops() {
    // Hand-computed truncations at c = 1, x = 0: 0, 0, 1/4, 1/2.
    for (k, want) in [("2", "0/1"), ("3", "1/4"), ("4", "1/2")] {
        let v = json(&[
            "wp", "-e", GEOMETRIC, "-f", "x", "--kleene", k, "--at", "c=1,x=0",
        ]);
        assert_eq!(v["values"][0]["value"], want, "k = {k}");
    }
}

#[test]
fn wp_kleene_on_counting_loop() {
    let prog = "while (c = 1) { {c := 0} [1/2] {c := 1}; x := x + 1 }";
    let out = run(&[
        "wp", "--kleene", "4", "-e", prog, "-f", "x", "--at", "c=1,x=0",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).ends_with(": 11/8"), "{}", stdout(&out));
}

#[test]
fn wp_reads_program_files() {
    let dir = std::env::temp_dir().join(format!("wpengine-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("geo.pgcl");
    std::fs::write(&file, GEOMETRIC).unwrap();
    let out = run(&[
        "wp",
        "-p",
        file.to_str().unwrap(),
        "-f",
        "x",
        "--kleene",
        "4",
        "--at",
        "c=1",
    ]);
    assert!(out.status.success());
    assert!(stdout(&out).ends_with("1/2"));
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn exit_codes() {
    let syntactic_loop = run(&["wp", "-e", GEOMETRIC, "-f", "x", "--syntactic"]);
    assert_eq!(syntactic_loop.status.code(), Some(3));
    let parse = run(&["wp", "-e", "x :=", "-f", "x"]);
    assert_eq!(parse.status.code(), Some(2));
    let not_loop = run(&["encode-loop", "-e", "skip", "-f", "x"]);
    assert_eq!(not_loop.status.code(), Some(2));
    let too_large = run(&[
        "encode-loop",
        "-e",
        GEOMETRIC,
        "-f",
        "x",
        "--emit-pure",
        "--depth",
        "1",
    ]);
    assert_eq!(too_large.status.code(), Some(4));
    let no_program = run(&["wp", "-f", "x"]);
    assert_eq!(no_program.status.code(), Some(2));
}

#[test]
fn json_errors_carry_exit_code() {
    let out = run(&[
        "wp",
        "-e",
        GEOMETRIC,
        "-f",
        "x",
        "--syntactic",
        "--format",
        "json",
    ]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["exit"], 3);
}

#[test]
fn series_sums_and_products() {
    let h3 = json(&["series", "sum", "--body", "1/$s", "--n", "3"]);
    assert_eq!(h3["value"], "11/6");
    let fact = json(&["series", "product", "--body", "$p + 1", "--n", "3"]);
    assert_eq!(fact["value"], "24/1");
    let at = json(&[
        "series",
        "sum",
        "--body",
        "x",
        "--n",
        "4",
        "--at",
        "x=1/2",
        "--emit-pure",
    ]);
    assert_eq!(at["value"], "5/2");
    assert!(at["pure"].as_str().unwrap().contains("x"));
}

#[test]
fn goedel_roundtrips() {
    let enc = json(&["goedel", "encode-seq", "3,1,4"]);
    let code = enc["code"].as_str().unwrap().to_string();
    let dec = json(&["goedel", "decode-seq", &code, "3"]);
    assert_eq!(dec["seq"], serde_json::json!(["3", "1", "4"]));

    let st = json(&["goedel", "encode-state", "x=1/2,y=2", "--vars", "x,y"]);
    let code = st["code"].as_str().unwrap().to_string();
    let back = json(&["goedel", "decode-state", &code, "--vars", "x,y"]);
    assert_eq!(back["state"]["x"], "1/2");
    assert_eq!(back["state"]["y"], "2/1");
}

#[test]
fn normalize_forms() {
    let f = "x + sup v: [v < 1] * v";
    let prenex = json(&["normalize", "-f", f, "--prenex"]);
    assert!(prenex["term"].as_str().unwrap().starts_with("sup "));
    let dnf = json(&["normalize", "-f", f, "--dnf"]);
    assert_eq!(dnf["cut"], "$cut");
    let snf = json(&["normalize", "-f", f, "--snf"]);
    assert_eq!(snf["summands"], 2);
    let rec = json(&["normalize", "-f", f, "--recover"]);
    assert!(rec["term"].as_str().unwrap().contains("$cut"));
}

#[test]
fn encode_loop_values_agree_with_kleene() {
    let enc = json(&[
        "encode-loop",
        "-e",
        GEOMETRIC,
        "-f",
        "x",
        "--eval-at",
        "c=1,x=0",
        "--depth",
        "5",
    ]);
    let values = enc["values"].as_array().unwrap();
    assert_eq!(values.len(), 5);
    for entry in values {
        let k = entry["k"].as_u64().unwrap().to_string();
        let kl = json(&[
            "wp", "-e", GEOMETRIC, "-f", "x", "--kleene", &k, "--at", "c=1,x=0",
        ]);
        assert_eq!(entry["value"], kl["values"][0]["value"], "k = {k}");
    }
}

#[test]
fn check_suites_report() {
    let v = json(&["check", "series", "--seed", "3"]);
    assert_eq!(v[0]["suite"], "series");
    assert_eq!(v[0]["passed"], true);
    let out = run(&["check", "loop", "--depth", "3"]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("loop: pass"));
    let bad = run(&["check", "nonsense"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn depth_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_wpengine"))
        .args([
            "encode-loop",
            "-e",
            GEOMETRIC,
            "-f",
            "x",
            "--eval-at",
            "c=1",
        ])
        .env("WPENGINE_DEPTH", "2")
        .output()
        .unwrap();
    assert_eq!(stdout(&out).lines().count(), 2);
}
