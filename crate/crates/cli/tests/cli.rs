use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn hopfkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopfkit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn code(output: &Output) -> i32 {
    output.status.code().expect("exit code")
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::write(&path, contents).expect("temp file is writable");
    path
}

#[test]
fn analyze_reports_the_degenerate_braiding() {
    let out = hopfkit(&["datum", "analyze", "--preset", "A1xA1-G-counterexample"]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Nli: false"), "missing Nli line: {text}");
    assert!(text.contains("reductive: true"), "missing verdict: {text}");
}

#[test]
fn analyze_reports_the_rank_one_index() {
    let out = hopfkit(&["datum", "analyze", "--preset", "A1"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("Gamma^2 index: 2"), "{text}");
    assert!(text.contains("Nli: true"), "{text}");
    assert!(text.contains("regular: true"), "{text}");
}

#[test]
fn tensor_prints_the_rank_one_clebsch_gordan_split() {
    let out = hopfkit(&[
        "module", "tensor", "--preset", "A1", "--m1", "1", "--m2", "1", "--decompose",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("L(2) ⊕ L(0)"), "unexpected decomposition: {text}");
}

#[test]
fn validate_rejects_a_malformed_file() {
    let path = temp_file("nonsense.json", "this is not a datum\n");
    let out = hopfkit(&["datum", "validate", path.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("error"), "{}", stderr(&out));
}

#[test]
fn validate_rejects_an_unknown_preset() {
    let out = hopfkit(&["datum", "validate", "--preset", "E8"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("available presets"), "{}", stderr(&out));
}

#[test]
fn json_output_is_stable_across_runs() {
    let args = [
        "module", "tensor", "--preset", "A2", "--m1", "1,0", "--m2", "0,1", "--decompose",
        "--json",
    ];
    let first = hopfkit(&args);
    let second = hopfkit(&args);
    assert_eq!(code(&first), 0, "stderr: {}", stderr(&first));
    assert_eq!(first.stdout, second.stdout, "output drifted between runs");
    let value: serde_json::Value = serde_json::from_str(&stdout(&first)).expect("valid JSON");
    assert_eq!(value["dim"], 9);
    assert_eq!(value["covered"], 9);
    assert_eq!(value["summands"].as_array().map(Vec::len), Some(2));
}

#[test]
fn export_round_trips_through_validate() {
    let out = hopfkit(&["datum", "export", "--preset", "B2"]);
    assert_eq!(code(&out), 0);
    let path = temp_file("b2.json", &stdout(&out));
    let check = hopfkit(&["datum", "validate", path.to_str().unwrap()]);
    assert_eq!(code(&check), 0, "stderr: {}", stderr(&check));
    assert!(stdout(&check).contains("valid reduced datum"));
}

#[test]
fn analyze_reduces_a_perfectly_linked_general_datum() {
    let path = temp_file(
        "a1-tilde.json",
        r#"{
            "parameters": ["q"],
            "group_rank": 1,
            "theta": 2,
            "g": [[1], [1]],
            "chi": [["q^-2"], ["q^2"]],
            "lambda": [[2, 1, "-1"]]
        }"#,
    );
    let out = hopfkit(&["datum", "analyze", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("perfect linking: true"), "{text}");
    assert!(text.contains("reduces to: 1 vertices"), "{text}");
    assert!(text.contains("reductive: true"), "{text}");
}

#[test]
fn analyze_flags_an_unlinked_general_datum() {
    let path = temp_file(
        "a1-unlinked.json",
        r#"{
            "parameters": ["q"],
            "group_rank": 1,
            "theta": 2,
            "g": [[1], [1]],
            "chi": [["q^-2"], ["q^2"]]
        }"#,
    );
    let out = hopfkit(&["datum", "analyze", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("perfect linking: false"), "{text}");
    assert!(text.contains("unlinked vertices: 1, 2"), "{text}");
    assert!(text.contains("does not reduce"), "{text}");
}

#[test]
fn gcheck_requires_the_degenerate_flag() {
    let gated = hopfkit(&[
        "gcheck", "--preset", "A1xA1-G-counterexample", "--counterexample",
    ]);
    assert_eq!(code(&gated), 1);
    assert!(stderr(&gated).contains("--allow-degenerate-g"), "{}", stderr(&gated));

    let out = hopfkit(&[
        "gcheck", "--preset", "A1xA1-G-counterexample", "--counterexample",
        "--allow-degenerate-g",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("Nli: false"), "{text}");
    assert!(text.contains("m = (2, 2)"), "{text}");
    assert!(text.contains("m = (4, 4)"), "{text}");
    assert!(text.contains("chi' <= chi: true"), "{text}");
    assert!(text.contains("does not separate"), "{text}");
}

#[test]
fn gcheck_separates_weights_on_a_regular_braiding() {
    let out = hopfkit(&[
        "gcheck", "--preset", "A1", "--anchor-m", "0", "--m", "2",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("verdict: G separates"), "{}", stdout(&out));
}

#[test]
fn dims_table_counts_root_multiplicities() {
    let out = hopfkit(&[
        "algebra", "dims", "--preset", "A2", "--max-degree", "3", "--tsv",
    ]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("0,0\t1"), "{text}");
    assert!(text.contains("1,1\t2"), "{text}");
    assert!(text.contains("2,1\t2"), "{text}");
}

#[test]
fn gram_prints_an_invertible_matrix() {
    let out = hopfkit(&["algebra", "gram", "--preset", "A1", "--degree", "2"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("determinant"), "{text}");
    assert!(!text.contains("determinant: 0"), "{text}");
}

#[test]
fn identity_battery_passes_on_presets() {
    for preset in ["A1", "A2-two-parameter"] {
        let out = hopfkit(&["algebra", "check-identities", "--preset", preset]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
        let text = stdout(&out);
        assert!(!text.contains("fail"), "{text}");
    }
}

#[test]
fn simple_module_tables_match_the_classical_weights() {
    let out = hopfkit(&[
        "module", "simple", "--preset", "B2", "--m", "1,0", "--tsv",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{lines:?}");
    assert!(lines[0].starts_with("0,0\t1"), "{lines:?}");
}

#[test]
fn simple_module_rejects_a_non_dominant_weight() {
    let out = hopfkit(&["module", "simple", "--preset", "A1", "--chi", "q^-2"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("not dominant"), "{}", stderr(&out));
}

#[test]
fn casimir_separates_rank_one_summands() {
    let out = hopfkit(&[
        "module", "casimir", "--preset", "A1", "--m", "1", "--m2", "1",
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("annihilates: true"), "{text}");
    assert!(text.contains("distinct: true"), "{text}");
}

#[test]
fn oracle_commands_match_classical_values() {
    let kostant = hopfkit(&[
        "oracle", "kostant", "--cartan", "2,-1;-1,2", "--degree", "2,2",
    ]);
    assert_eq!(stdout(&kostant).trim(), "3");

    let weyl = hopfkit(&[
        "oracle", "weyl", "--cartan", "2,-1;-1,2", "--symmetrizer", "1,1",
        "--labels", "1,1",
    ]);
    assert_eq!(stdout(&weyl).trim(), "8");

    let clebsch = hopfkit(&["oracle", "clebsch", "--m", "2", "--n", "3"]);
    assert_eq!(stdout(&clebsch).trim(), "L(5) ⊕ L(3) ⊕ L(1)");

    let mult = hopfkit(&[
        "oracle", "multiplicities", "--cartan", "2,-1;-1,2", "--symmetrizer", "1,1",
        "--labels", "1,1",
    ]);
    assert!(stdout(&mult).contains("1,1\t2"), "{}", stdout(&mult));
}

#[test]
fn max_degree_cap_is_reported_when_exceeded() {
    let out = hopfkit(&["module", "simple", "--preset", "A1", "--m", "11"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("HOPFKIT_MAX_DEGREE"), "{}", stderr(&out));

    let raised = hopfkit(&[
        "module", "simple", "--preset", "A1", "--m", "11", "--max-degree", "12",
    ]);
    assert_eq!(code(&raised), 0, "stderr: {}", stderr(&raised));
    assert!(stdout(&raised).contains("dimension 12"), "{}", stdout(&raised));
}

#[test]
fn max_degree_env_override_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_hopfkit"))
        .args(["module", "simple", "--preset", "A1", "--m", "11"])
        .env("HOPFKIT_MAX_DEGREE", "12")
        .output()
        .expect("binary runs");
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    assert!(stdout(&out).contains("dimension 12"), "{}", stdout(&out));
}
