//! End-to-end checks of the binary: exit codes, JSON schema, table layout.

use std::process::Command;

fn dkcsp(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dkcsp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &std::process::Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8")
}

#[test]
fn bound_command_prints_known_value() {
    let out = dkcsp(&["bound", "--d", "2", "--k", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("G(2,3) = 0.666667"), "got: {text}");
    assert!(text.contains("base 1.5874"), "got: {text}");
}

#[test]
fn table_layout_reproduces_reference_columns() {
    let out = dkcsp(&["table", "--pairs", "2:3,3:3,5:4,6:4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].contains("(d,k)"));
    assert!(lines[1].contains("(2,3)") && lines[1].contains("1.334") && lines[1].contains("1.588"));
    assert!(lines[2].contains("(3,3)") && lines[2].contains("2"));
    assert!(lines[3].contains("(5,4)") && lines[3].contains("3.75"));
    assert!(lines[4].contains("(6,4)") && lines[4].contains("4.5"));
}

#[test]
fn gen_solve_pipeline_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("planted.csp");
    let path_str = path.to_str().unwrap();

    let out = dkcsp(&[
        "gen",
        "--family",
        "planted",
        "--d",
        "3",
        "--k",
        "3",
        "--n",
        "6",
        "--seed",
        "2",
        "--output",
        path_str,
    ]);
    assert_eq!(out.status.code(), Some(0));

    let out = dkcsp(&[
        "--format",
        "json",
        "solve",
        "--trials",
        "2000",
        "--seed",
        "1",
        "--stop-early",
        path_str,
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {:?}", out.stderr);
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(value["schema"], 1);
    assert_eq!(value["command"], "solve");
    assert!(value["found"].is_array());

    // Unknown: a contradiction is never solved by the randomized solver.
    let unsat = dir.path().join("unsat.csp");
    std::fs::write(&unsat, "p csp 2 2 1\n0\n").unwrap();
    let out = dkcsp(&["solve", "--trials", "10", unsat.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(10));

    // Usage errors.
    let out = dkcsp(&["solve", "--no-such-flag", path_str]);
    assert_eq!(out.status.code(), Some(2));
    let out = dkcsp(&["solve", "/does/not/exist.csp"]);
    assert_eq!(out.status.code(), Some(2));
    let bad = dir.path().join("bad.csp");
    std::fs::write(&bad, "p csp 3 2 1\n1!=4 0\n").unwrap();
    let out = dkcsp(&["solve", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 2"), "parse errors name the line: {err}");
}

#[test]
fn verify_suites_exit_zero_and_print_status_lines() {
    let out = dkcsp(&["verify", "--suite", "worstcase", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("PASS worstcase/")));
    assert!(!text.contains("FAIL"));

    let out = dkcsp(&["--format", "json", "verify", "--suite", "bounds", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    for line in stdout(&out).lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(value["schema"], 1);
        assert_eq!(value["pass"], true);
    }
}

#[test]
fn estimate_json_contains_schema_and_error_bars() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.csp");
    let gen = dkcsp(&[
        "gen",
        "--family",
        "chain",
        "--n",
        "4",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let out = dkcsp(&[
        "--format",
        "json",
        "estimate",
        "--trials",
        "50000",
        "--seed",
        "2",
        "--exact",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(stdout(&out).trim()).unwrap();
    assert_eq!(value["schema"], 1);
    assert!((value["exact"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let estimate = value["estimate"].as_f64().unwrap();
    let std_error = value["std_error"].as_f64().unwrap();
    assert!((estimate - 0.25).abs() <= 5.0 * std_error);
}
