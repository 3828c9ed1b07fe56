use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;
use ybsim_core::linalg::{ComplexMatrix, C64};
use ybsim_core::perm::Permutation;
use ybsim_core::solutions::{SwapFlag, YbNormalForm};

fn ybsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ybsim")).args(args).output().expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn complex(v: &Value) -> (f64, f64) {
    (v[0].as_f64().unwrap(), v[1].as_f64().unwrap())
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn instance(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/instance").join(name)
}

const R1_SPEC: &str = r#"{"family": "r1", "a": [1, 0], "b": [0.5, 0.2], "d_entry": [1.2, -0.3], "p": [0, 1], "q": [0.6, 0.8], "k": [1, 0]}"#;

fn build_gate(dir: &Path, spec: &str, name: &str) -> (PathBuf, Value) {
    let spec_path = write(dir, &format!("{name}.spec.json"), spec);
    let gate = dir.join(format!("{name}.json"));
    let report = json_of(&ybsim(&["gate", "build", s(&spec_path), "--out", s(&gate)]));
    (gate, report)
}

#[test]
fn build_family_one_reports_small_residual() {
    let dir = TempDir::new().unwrap();
    let (gate, report) = build_gate(dir.path(), R1_SPEC, "r1");
    assert!(report["qybe_residual"].as_f64().unwrap() < 1e-9);
    assert_eq!(report["qybe_holds"], Value::Bool(true));
    assert_eq!(report["property_g"]["holds"], Value::Bool(true));
    let stored: Value = serde_json::from_str(&fs::read_to_string(gate).unwrap()).unwrap();
    assert_eq!(stored["kind"], "normal_form");
}

#[test]
fn degenerate_family_two_exits_with_input_error() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "r2.json", r#"{"family": "r2", "c": [0, 0]}"#);
    let out = ybsim(&["gate", "build", s(&spec)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("degenerate denominator"));
}

#[test]
fn unknown_spec_fields_are_rejected() {
    let dir = TempDir::new().unwrap();
    let spec = write(dir.path(), "bad.json", r#"{"family": "r1", "d": [1, 0]}"#);
    assert_eq!(ybsim(&["gate", "build", s(&spec)]).status.code(), Some(2));
}

#[test]
fn family_four_identity_q_emits_printed_matrix() {
    let dir = TempDir::new().unwrap();
    let (_, report) = build_gate(dir.path(), r#"{"family": "r4"}"#, "r4");
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let printed = [[h, 0.0, 0.0, h], [0.0, h, h, 0.0], [0.0, -h, h, 0.0], [-h, 0.0, 0.0, h]];
    let m = &report["gate"]["matrix"];
    for (i, row) in printed.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let (re, im) = complex(&m[i][j]);
            assert!((re - v).abs() < 1e-12 && im.abs() < 1e-12);
        }
    }
}

#[test]
fn check_swap_cnot_and_unitary_q() {
    let dir = TempDir::new().unwrap();
    let swap = write(
        dir.path(),
        "swap.json",
        "[[[1,0],[0,0],[0,0],[0,0]],[[0,0],[0,0],[1,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]]",
    );
    let report = json_of(&ybsim(&["gate", "check", s(&swap)]));
    assert_eq!(report["qybe_holds"], Value::Bool(true));
    assert_eq!(report["qybe_residual"].as_f64(), Some(0.0));

    let cnot = write(
        dir.path(),
        "cnot.json",
        r#"{"kind": "matrix", "matrix": [[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]],[[0,0],[0,0],[1,0],[0,0]]]}"#,
    );
    assert_eq!(json_of(&ybsim(&["gate", "check", s(&cnot)]))["qybe_holds"], Value::Bool(false));

    // the 3x3 DFT matrix is unitary
    let w = 2.0 * std::f64::consts::PI / 3.0;
    let r = 1.0 / 3f64.sqrt();
    let rows: Vec<Vec<[f64; 2]>> = (0..3)
        .map(|j| (0..3).map(|k| [r * (w * (j * k) as f64).cos(), r * (w * (j * k) as f64).sin()]).collect())
        .collect();
    let q = write(dir.path(), "q.json", &serde_json::to_string(&rows).unwrap());
    let report = json_of(&ybsim(&["gate", "check", s(&q), "--property-g", "full"]));
    assert_eq!(report["property_g"]["group_order"], 6);
    assert_eq!(report["property_g"]["holds"], Value::Bool(true));
}

#[test]
fn malformed_check_input_is_an_input_error() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{not json");
    assert_eq!(ybsim(&["gate", "check", s(&bad)]).status.code(), Some(2));
}

#[test]
fn braid_parse_and_compile() {
    let parsed = json_of(&ybsim(&["braid", "parse", "n=4 s3^-1 s2^-1 s3 s1^-1"]));
    assert_eq!(parsed["n_strands"], 4);
    assert_eq!(parsed["word"], "n=4 s3^-1 s2^-1 s3 s1^-1");
    let compiled = json_of(&ybsim(&["braid", "compile", "s1 s2^-1", "--gate-id", "G"]));
    assert_eq!(compiled["circuit"], "wires 3\nG 0,1\nG 1,2 inv\n");
    let out = ybsim(&["braid", "parse", "s1 x"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("position 3"));
}

#[test]
fn simulate_exact_and_sampled_agree() {
    let dir = TempDir::new().unwrap();
    let (gate, _) = build_gate(dir.path(), R1_SPEC, "r1");
    let base = ["simulate", "--gate", s(&gate), "--braid", "n=4 s1 s2^-1 s3 s1", "--x", "0101", "--z", "1001"];
    let exact = json_of(&ybsim(&[&base[..], &["--exact"]].concat()));
    let sampled = json_of(&ybsim(&[&base[..], &["--epsilon", "0.1", "--seed", "3"]].concat()));
    let (a, b) = (complex(&exact["value"]), complex(&sampled["value"]));
    assert!(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() < 0.1);
    assert_eq!(sampled["n_samples"], 32_000);
    assert!(sampled["wall_time_ms"].is_number());
}

#[test]
fn empty_braid_is_exactly_one() {
    let dir = TempDir::new().unwrap();
    let (gate, _) = build_gate(dir.path(), R1_SPEC, "r1");
    let out =
        json_of(&ybsim(&["simulate", "--gate", s(&gate), "--braid", "n=3", "--x", "010", "--z", "010", "--exact"]));
    assert_eq!(complex(&out["value"]), (1.0, 0.0));
}

#[test]
fn exact_beyond_oracle_cap() {
    let dir = TempDir::new().unwrap();
    let (gate, _) = build_gate(dir.path(), R1_SPEC, "r1");
    let x = "0".repeat(13);
    let out = ybsim(&["simulate", "--gate", s(&gate), "--braid", "n=13 s1", "--x", &x, "--z", &x, "--exact"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("oracle cap exceeded"));
}

#[test]
fn property_g_violation_exits_three() {
    let dir = TempDir::new().unwrap();
    // Q = [[1, 1], [0, 1]] with C = X fails property (G)
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let q = ComplexMatrix::from_rows(vec![vec![one, one], vec![zero, one]]).unwrap();
    let nf = YbNormalForm::new(2, one, q.clone(), vec![one; 4], SwapFlag::Swap, Permutation::transposition(2, 0, 1))
        .unwrap();
    let doc = serde_json::json!({
        "kind": "normal_form", "d": 2, "k": one, "q": q, "diag": nf.diag, "swap": "swap", "perm": [1, 0],
        "matrix": nf.reconstruct().unwrap(),
    });
    let gate = write(dir.path(), "bad_g.json", &doc.to_string());
    let check = json_of(&ybsim(&["gate", "check", s(&gate)]));
    assert_eq!(check["property_g"]["holds"], Value::Bool(false));
    let out = ybsim(&["simulate", "--gate", s(&gate), "--braid", "s1", "--x", "00", "--z", "00"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn simulate_is_byte_identical_across_runs_and_threads() {
    let dir = TempDir::new().unwrap();
    let (gate, _) = build_gate(dir.path(), R1_SPEC, "r1");
    let args = [
        "simulate",
        "--gate",
        s(&gate),
        "--braid",
        "n=5 s1 s2 s4^-1 s3",
        "--x",
        "01100",
        "--z",
        "10100",
        "--no-timing",
    ];
    let one = ybsim(&[&args[..], &["--threads", "1"]].concat());
    let two = ybsim(&[&args[..], &["--threads", "3"]].concat());
    let again = ybsim(&[&args[..], &["--threads", "1"]].concat());
    assert!(one.status.success());
    assert_eq!(one.stdout, again.stdout);
    assert_eq!(one.stdout, two.stdout);
}

#[test]
fn bad_ditstrings_and_epsilon() {
    let dir = TempDir::new().unwrap();
    let (gate, _) = build_gate(dir.path(), R1_SPEC, "r1");
    for (x, eps) in [("012", "0.1"), ("01", "0.1"), ("010", "1.5")] {
        let out =
            ybsim(&["simulate", "--gate", s(&gate), "--braid", "n=3 s1", "--x", x, "--z", "010", "--epsilon", eps]);
        assert_eq!(out.status.code(), Some(2), "{x} {eps}");
    }
}

#[test]
fn expectation_identity_circuit_z0() {
    let dir = TempDir::new().unwrap();
    let (gate, _) = build_gate(dir.path(), r#"{"family": "r4"}"#, "r4");
    let obs = write(dir.path(), "z0.json", r#"{"wires": [0], "matrix": [[[1,0],[0,0]],[[0,0],[-1,0]]]}"#);
    let out = json_of(&ybsim(&[
        "expectation",
        "--gate",
        s(&gate),
        "--braid",
        "n=4",
        "--observable",
        s(&obs),
        "--psi-bits",
        "0000",
    ]));
    assert_eq!(complex(&out["value"]), (1.0, 0.0));
}

#[test]
fn expectation_rejects_non_family_four() {
    let dir = TempDir::new().unwrap();
    let (gate, _) = build_gate(dir.path(), R1_SPEC, "r1");
    let obs = write(dir.path(), "z0.json", r#"{"wires": [0], "matrix": [[[1,0],[0,0]],[[0,0],[-1,0]]]}"#);
    let out = ybsim(&["expectation", "--gate", s(&gate), "--braid", "s1", "--observable", s(&obs), "--psi-bits", "00"]);
    assert_eq!(out.status.code(), Some(5));
    assert!(stderr(&out).contains("expectation requires family-four gates"));
}

#[test]
fn sample_instance_matches_checked_in_oracle() {
    let out = json_of(&ybsim(&[
        "expectation",
        "--gate",
        s(&instance("gate.json")),
        "--circuit",
        s(&instance("circuit.txt")),
        "--observable",
        s(&instance("observable.json")),
        "--psi",
        s(&instance("psi.json")),
        "--phi",
        s(&instance("phi.json")),
    ]));
    let expected: Value = serde_json::from_str(&fs::read_to_string(instance("expected.json")).unwrap()).unwrap();
    let (a, b) = (complex(&out["value"]), complex(&expected["value"]));
    assert!(((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() < 1e-9);
}

#[test]
fn text_output_is_flat() {
    let out = ybsim(&["braid", "parse", "s1 s2", "--output", "text"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("n_strands: 3\n"));
    assert!(text.contains("word: n=3 s1 s2\n"));
}
