use std::io::Write;
use std::process::{Command, Output, Stdio};

fn vecr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vecr")).args(args).env_remove("VECR_SEED").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn repl(input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_vecr"))
        .args(["--ascii", "repl"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

const FROZEN_H: &str = r"let H = \b.(((b) (\f.1/sqrt2 * true + 1/sqrt2 * false)) (\f.1/sqrt2 * true + -1/sqrt2 * false)) id";

#[test]
fn hadamard_trace_ends_in_true_plus_zero_false() {
    let o = vecr(&["--ascii", "reduce", "(H) (1/sqrt2*true + 1/sqrt2*false)", "--trace"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert!(lines.len() > 1);
    for l in &lines {
        let (rule, rest) = l.split_once("] @").unwrap();
        assert!(rule.starts_with('['));
        assert!(rest.contains("  "));
    }
    assert!(lines.last().unwrap().ends_with("  true + 0 * false"));
}

#[test]
fn reduce_prints_unicode_by_default() {
    let o = vecr(&["reduce", "(H) (1/√2·true + 1/√2·false)"]);
    assert_eq!(stdout(&o), "true + 0·false\n");
}

#[test]
fn reduce_json_is_one_object_per_step() {
    let o = vecr(&["--ascii", "reduce", "(H) true", "--json"]);
    let out = stdout(&o);
    for (k, line) in out.lines().enumerate() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["step"], k + 1);
    }
    let last: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert_eq!(last["term"], "1/sqrt2 * true + 1/sqrt2 * false");
}

#[test]
fn identity_checks_at_its_polymorphic_type() {
    let o = vecr(&["--ascii", "check", r"\x:X.x", "forall X. X -> X"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("OK : forall X. X -> X\n"));
    assert!(out.contains("forall-I"));
}

#[test]
fn check_without_a_type_synthesizes_one() {
    let o = vecr(&["--ascii", "check", "(H) true"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("OK : 1/sqrt2 * "));
}

#[test]
fn check_reads_a_file() {
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("sum_of_ids.vecr");
    std::fs::write(&path, "-- the same function twice\n(\\x.x) + (\\x.x)\n").unwrap();
    let o = vecr(&["--ascii", "check", path.to_str().unwrap(), "(X -> X) + (Y -> Y)"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("+I"));
}

#[test]
fn type_errors_exit_with_one() {
    let o = vecr(&["check", "true", "F"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).is_empty());
    assert!(stderr(&o).starts_with("error: no derivation"));
}

#[test]
fn parse_errors_exit_with_two_and_a_position() {
    let o = vecr(&["check", r"\x."]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("<expr>:1:4:"), "{}", stderr(&o));
    assert_eq!(vecr(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(vecr(&["apply", "[1, 2", "(1, 2)"]).status.code(), Some(2));
}

#[test]
fn fuel_exhaustion_exits_with_one() {
    let o = vecr(&["reduce", r"(\x.(x) x) (\x.(x) x)", "--fuel", "30"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("fuel"));
}

#[test]
fn hadamard_applied_to_plus() {
    let o = vecr(&["apply", "[1/sqrt2,1/sqrt2;1/sqrt2,-1/sqrt2]", "(1/sqrt2,1/sqrt2)"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "(1, 0)\n");
}

#[test]
fn apply_rejects_mismatched_dimensions() {
    let o = vecr(&["apply", "[1, 0; 0, 1]", "(1, 2, 3)"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn encode_prints_term_and_type() {
    let o = vecr(&["--ascii", "encode", "(1, 0)"]);
    assert_eq!(stdout(&o), "1 * true + 0 * false : 1 * (forall X1 X2. X1 -> X2 -> X1) + 0 * forall X1 X2. X1 -> X2 -> X2\n");
}

#[test]
fn weight_of_terms_and_types() {
    assert_eq!(stdout(&vecr(&["weight", "(H) (1/sqrt2*true + 1/sqrt2*false)"])), "1\n");
    assert_eq!(stdout(&vecr(&["--ascii", "weight", "1/sqrt2 * T + 1/sqrt2 * F"])), "sqrt2\n");
    assert_eq!(vecr(&["weight", "%X"]).status.code(), Some(1));
}

#[test]
fn repl_definitions_and_commands() {
    let input = format!("{FROZEN_H}\n:r (H) true\n:w true + 0*false\n:t true\n:q\n:r false\n");
    let o = repl(&input);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "H defined\n1/sqrt2 * true + 1/sqrt2 * false\n1\nforall X Y. X -> Y -> X\n"
    );
}

#[test]
fn repl_errors_do_not_end_the_session() {
    let o = repl(":r \\x.\n:nope\n:w %X\nlet 1x = true\n:r id id\n");
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "id\n");
    assert_eq!(stderr(&o).matches("error:").count(), 4);
}

#[test]
fn repl_trace_matches_batch_trace() {
    let batch = stdout(&vecr(&["--ascii", "reduce", "(H) false", "--trace"]));
    let o = repl(":trace (H) false\n");
    assert_eq!(stdout(&o), batch);
}

#[test]
fn prop_output_is_deterministic_and_seeded_from_the_environment() {
    let run = |seed: &str| {
        Command::new(env!("CARGO_BIN_EXE_vecr"))
            .args(["prop", "progress", "--cases", "30"])
            .env("VECR_SEED", seed)
            .output()
            .unwrap()
    };
    let (a, b, c) = (run("11"), run("11"), run("12"));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let out = stdout(&a);
    let json: serde_json::Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
    assert_eq!(json["seed"], 11);
    assert_eq!(json["cases"], 30);
    assert!(out.lines().next().unwrap().starts_with("suite"));
}

#[test]
fn prop_rejects_unknown_suites() {
    assert_eq!(vecr(&["prop", "nonsense"]).status.code(), Some(2));
}
