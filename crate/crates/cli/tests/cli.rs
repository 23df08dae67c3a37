use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn run(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_endomorph"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("binary starts");
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json report")
}

fn corpus(family: &str, params: &[&str]) -> String {
    let mut args = vec!["corpus", family];
    args.extend_from_slice(params);
    let o = run(&args, "");
    assert_eq!(o.status.code(), Some(0));
    stdout(&o)
}

#[test]
fn corpus_pipes_into_monoid_end() {
    let eq2 = corpus("EQ2", &["1", "1"]);
    let o = run(&["monoid", "end", "--json"], &eq2);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["results"]["size"], 15);
}

#[test]
fn json_reports_pipe_as_structures() {
    let o = run(&["corpus", "EQ2", "1", "1", "--json"], "");
    let o = run(&["monoid", "aut", "--json"], &stdout(&o));
    assert_eq!(o.status.code(), Some(0));
    // Swapping the two elements of the doubleton.
    assert_eq!(json(&o)["results"]["size"], 2);
}

#[test]
fn six_idempotent_central_elements() {
    let m1p = corpus("M1P", &["4", "3"]);
    let o = run(&["special", "--json"], &m1p);
    assert_eq!(json(&o)["results"]["idempotent_central"]["count"], 6);
    let m2tc = corpus("M2TC", &["3", "2"]);
    let o = run(&["special", "--json"], &m2tc);
    assert_eq!(json(&o)["results"]["idempotent_central"]["count"], 3);
}

#[test]
fn define_negative_exits_one_with_witness() {
    let eq2 = corpus("EQ2", &["1", "1"]);
    let o = run(&["define", "PEX", "--set", "{(1),(2)}", "--json"], &eq2);
    assert_eq!(o.status.code(), Some(1));
    let r = json(&o);
    assert_eq!(r["results"]["definable"], false);
    assert_eq!(r["negative"], true);
    let w = &r["results"]["witness"];
    assert_eq!(w["class"], "endomorphisms");
    assert!(w["map"].as_str().unwrap().starts_with("map ["));
}

#[test]
fn define_positive_prints_certificate() {
    let eq2 = corpus("EQ2", &["1", "1"]);
    let o = run(&["define", "EXIST", "--set", "{(1),(2)}"], &eq2);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("is EXIST-definable"));
    assert!(text.contains("certificate:"));
    assert!(text.contains("note: finite structure"));
}

#[test]
fn input_errors_exit_two() {
    let o = run(&["show"], "structure X\ndomain two\n");
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["corpus", "NOPE", "1"], "");
    assert_eq!(o.status.code(), Some(2));
    let eq2 = corpus("EQ2", &["1", "1"]);
    let o = run(&["define", "PEX", "--set", "{(7)}"], &eq2);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["interp", "apply", "NO_SUCH_INTERP"], &eq2);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn guard_exits_three() {
    let eq2 = corpus("EQ2", &["2", "3"]);
    let o = run(&["--guard", "100", "monoid", "end", "--json"], &eq2);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(json(&o)["error"]["kind"], "guard");
}

#[test]
fn results_are_reproducible() {
    let m1p = corpus("M1P", &["2", "1"]);
    let a = json(&run(&["monoid", "end", "--list", "--json"], &m1p));
    let b = json(&run(&["monoid", "end", "--list", "--json"], &m1p));
    assert_eq!(a["results"], b["results"]);
    assert_eq!(a["inputs_digest"], b["inputs_digest"]);
    assert!(a["timing"]["seconds"].is_number());
}

#[test]
fn interp_apply_and_verify() {
    let eq2 = corpus("EQ2", &["2", "2"]);
    let o = run(&["interp", "apply", "QUOT", "--json"], &eq2);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["results"]["structure"]["domain"], 4);
    let o = run(&["interp", "verify", "QUOT", "--fragment", "EXIST"], &eq2);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["interp", "verify", "QUOT", "--fragment", "PEX"], &eq2);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn interp_from_file() {
    let dir = std::env::temp_dir().join(format!("endomorph-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("rev.interp");
    std::fs::write(
        &path,
        "interpret REV dim 1\ndomain (= x0 x0)\nkernel (= x0 x1)\nrel R/2 (R x1 x0)\n",
    )
    .unwrap();
    let arrow = corpus("ARROW", &[]);
    let o = run(&["interp", "apply", path.to_str().unwrap()], &arrow);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("(1 0)"));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn homotopy_verdicts() {
    let cyc = corpus("CYCLE", &["3"]);
    let o = run(&["interp", "homotopy", "ID", "REVERSE"], &cyc);
    assert_eq!(o.status.code(), Some(1));
    let arrow = corpus("ARROW", &[]);
    let o = run(&["interp", "homotopy", "ID", "DIAG"], &arrow);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn contractible_and_sandwich() {
    let eq2 = corpus("EQ2", &["1", "1"]);
    assert_eq!(run(&["contractible"], &eq2).status.code(), Some(0));
    let m1pp = corpus("M1PP", &["2", "1"]);
    let o = run(&["contractible", "--json"], &m1pp);
    assert_eq!(o.status.code(), Some(1));
    assert!(json(&o)["results"]["zus"]["separating"].is_array());
    assert_eq!(run(&["sandwich"], &m1pp).status.code(), Some(0));
}

#[test]
fn cosets_of_pureset() {
    let p = corpus("PURESET", &["2"]);
    let o = run(&["cosets", "--json"], &p);
    assert_eq!(json(&o)["results"]["count"], 2);
}

#[test]
fn orbit_and_closed() {
    let arrow = corpus("ARROW", &[]);
    let o = run(&["orbit", "(0 1)", "--json"], &arrow);
    assert_eq!(json(&o)["results"]["size"], 1);
    let o = run(&["closed", "--set", "{(0)}", "--class", "end"], &arrow);
    assert_eq!(o.status.code(), Some(0));
    let p = corpus("PURESET", &["2"]);
    let o = run(&["closed", "--set", "{(0 1)}", "--class", "end"], &p);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csp_solve_and_reduce() {
    let arrow = corpus("ARROW", &[]);
    let o = run(&["csp", "solve", "(exists x0 (exists x1 (R x0 x1)))"], &arrow);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&["csp", "solve", "(exists x0 (R x0 x0))"], &arrow);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["csp", "reduce", "REVERSE", "(exists x0 (exists x1 (R x0 x1)))", "--json"], &arrow);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["results"]["constant"].as_u64().unwrap() >= 1);
}

#[test]
fn synth_gives_a_formula() {
    let arrow = corpus("ARROW", &[]);
    let o = run(&["synth", "PP", "--set", "{(0)}"], &arrow);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).trim_start().starts_with('('));
}

#[test]
fn demos_pass() {
    for name in ["bsp2", "bsp3", "bsp4", "bsp5", "isocontr", "nsat"] {
        let o = run(&["demo", name, "--json"], "");
        assert_eq!(o.status.code(), Some(0), "demo {name}");
        assert_eq!(json(&o)["results"]["passed"], true);
    }
}

#[test]
fn reconstruct_refuses_trivial_hom_over_a_pure_set() {
    let dir = std::env::temp_dir().join(format!("endomorph-recon-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("arrow.txt");
    std::fs::write(&target, corpus("ARROW", &[])).unwrap();
    let p = corpus("PURESET", &["3"]);
    let o = run(&["interp", "reconstruct", "--trivial", target.to_str().unwrap()], &p);
    assert_eq!(o.status.code(), Some(1));
    let _ = std::fs::remove_dir_all(&dir);
}

#[test]
fn selftest_single_criterion() {
    let o = run(&["selftest", "small", "--only", "9", "--json"], "");
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!(r["results"]["criteria"][0]["passed"], true);
    assert!(r["timing"]["phases"]["criterion 9"].is_number());
}

#[test]
fn listings() {
    assert!(stdout(&run(&["corpus", "--list"], "")).contains("M2TC p q"));
    assert!(stdout(&run(&["demo", "--list"], "")).contains("isocontr"));
    assert!(stdout(&run(&["interp", "list"], "")).contains("QUOT_PE"));
}
