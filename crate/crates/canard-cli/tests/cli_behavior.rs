//! Black-box tests of the `canard` binary: exit codes, error wording,
//! deterministic reruns, and partial-failure semantics.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

/// Temp directory removed on drop, unique per test.
struct Scratch(PathBuf);

impl Scratch {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!(
            "canard-cli-{tag}-{}-{}",
            std::process::id(),
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_nanos())
                .unwrap_or(0)
        ));
        std::fs::create_dir_all(&dir).expect("create scratch dir");
        Scratch(dir)
    }

    fn path(&self) -> &Path {
        &self.0
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.0);
    }
}

fn canard(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_canard"))
        .args(args)
        .output()
        .expect("spawn canard binary")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A valid custom model whose first slow equation blows up in finite time
/// once `a` is large: ẋ = a(x+1)² + 1.
const BLOWUP_MODEL: &str = r#"
name = "blowup"
slow_vars = ["x", "y"]
fast_var = "z"
f = ["a*(x + 1)^2 + 1", "0"]
g = "-x - (z^3/3 - z)"
eliminate_x1 = "z - z^3/3"
epsilon = 0.05

[params]
a = 0.0
"#;

#[test]
fn analyze_with_builtin_succeeds_with_json_on_stdout() {
    let out = canard(&["analyze", "--builtin", "chua3", "--grid", "6"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let report: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("stdout is a JSON report");
    assert_eq!(report["schema_version"], serde_json::json!("1"));
    assert!(report["agreement"]["verdict_conflict"].is_boolean());
}

#[test]
fn unknown_builtin_exits_2_and_lists_available_models() {
    let out = canard(&["analyze", "--builtin", "chua5"]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(
        err.contains("chua5") && err.contains("chua3") && err.contains("chua4"),
        "stderr should name the bad model and the available ones: {err}"
    );
}

#[test]
fn missing_model_selection_exits_2() {
    let out = canard(&["analyze"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr_of(&out).contains("no model selected"),
        "stderr: {}",
        stderr_of(&out)
    );
}

#[test]
fn malformed_model_file_exits_2_with_position() {
    let scratch = Scratch::new("badmodel");

    // Syntactically valid TOML holding a truncated expression: the
    // expression parser reports the 1-based error position.
    let bad_expr = scratch.path().join("bad_expr.toml");
    std::fs::write(
        &bad_expr,
        "slow_vars = [\"x\", \"y\"]\nfast_var = \"z\"\nf = [\"x + \", \"0\"]\n\
         g = \"-x - z\"\nepsilon = 0.05\n",
    )
    .expect("write model");
    let out = canard(&["analyze", "--model", bad_expr.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(
        err.contains("line 1, column 4"),
        "parse errors must carry the source position: {err}"
    );

    // Broken TOML syntax: the decoder's position is passed through.
    let bad_toml = scratch.path().join("bad_toml.toml");
    std::fs::write(&bad_toml, "slow_vars = [\"x\"\nfast_var = \"z\"\n").expect("write model");
    let out = canard(&["analyze", "--model", bad_toml.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(
        err.contains("model file") && err.contains("line"),
        "TOML errors must carry a position: {err}"
    );
}

#[test]
fn simulate_fixed_step_reruns_are_byte_identical() {
    let scratch = Scratch::new("fixedstep");
    let stem = scratch.path().join("traj");
    let args = [
        "simulate",
        "--builtin",
        "chua3",
        "--t-span",
        "3",
        "--transient",
        "1",
        "--fixed-step",
        "1e-3",
        "--out",
    ];
    let run = || {
        let out = canard(
            &args
                .iter()
                .copied()
                .chain([stem.to_str().unwrap()])
                .collect::<Vec<_>>(),
        );
        assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
        let csv = std::fs::read(stem.with_extension("csv")).expect("csv written");
        (out.stdout, csv)
    };
    let (stdout_a, csv_a) = run();
    let (stdout_b, csv_b) = run();
    assert_eq!(stdout_a, stdout_b, "summary JSON must be byte-identical");
    assert_eq!(csv_a, csv_b, "trajectory CSV must be byte-identical");
    assert!(!csv_a.is_empty());
}

#[test]
fn simulate_finite_time_blowup_exits_1_with_diagnostic() {
    let scratch = Scratch::new("blowup");
    let model = scratch.path().join("blowup.toml");
    std::fs::write(&model, BLOWUP_MODEL).expect("write model");
    let out = canard(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--param",
        "a=100",
        "--x0",
        "0,0,0",
        "--t-span",
        "2",
        "--transient",
        "0",
        "--m-point",
        "0,0,1",
        "--out",
        scratch.path().join("traj").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("outside desk scale"),
        "blow-up should surface the step-underflow diagnostic: {}",
        stderr_of(&out)
    );
}

#[test]
fn sweep_records_per_value_failure_and_exits_1() {
    let scratch = Scratch::new("sweepfail");
    let model = scratch.path().join("blowup.toml");
    std::fs::write(&model, BLOWUP_MODEL).expect("write model");
    let out_dir = scratch.path().join("sweep");
    let out = canard(&[
        "sweep",
        "--model",
        model.to_str().unwrap(),
        "--sweep",
        "a",
        "--values",
        "0,100",
        "--mode",
        "simulate",
        "--x0",
        "0,0,0",
        "--t-span",
        "2",
        "--transient",
        "0",
        "--m-point",
        "0,0,1",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(
        out.status.code(),
        Some(1),
        "a failing value must surface as exit 1; stderr: {}",
        stderr_of(&out)
    );

    // The summary is still written, with per-value outcomes in value order.
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("summary.json")).expect("summary.json written"),
    )
    .expect("summary parses");
    let rows = summary["results"].as_array().expect("results array");
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0]["value"], serde_json::json!("0"));
    assert_eq!(rows[0]["ok"], serde_json::json!(true));
    assert_eq!(rows[1]["value"], serde_json::json!("100"));
    assert_eq!(rows[1]["ok"], serde_json::json!(false));
    assert!(
        rows[1]["error"]
            .as_str()
            .unwrap_or_default()
            .contains("step size underflow"),
        "failure row should carry the solver diagnostic: {}",
        rows[1]["error"]
    );

    // The healthy value still produced its trajectory outputs.
    assert!(out_dir.join("0").join("trajectory.csv").exists());
}

#[test]
fn sweep_with_empty_value_list_writes_empty_summary_and_exits_0() {
    let scratch = Scratch::new("sweepempty");
    let out_dir = scratch.path().join("sweep");
    let out = canard(&[
        "sweep",
        "--builtin",
        "chua3",
        "--sweep",
        "alpha",
        "--values",
        "",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(out_dir.join("summary.json")).expect("summary.json written"),
    )
    .expect("summary parses");
    assert_eq!(summary["results"], serde_json::json!([]));
}

#[test]
fn x0_auto_is_rejected_for_custom_models() {
    let scratch = Scratch::new("autox0");
    let model = scratch.path().join("blowup.toml");
    std::fs::write(&model, BLOWUP_MODEL).expect("write model");
    let out = canard(&[
        "simulate",
        "--model",
        model.to_str().unwrap(),
        "--t-span",
        "1",
        "--out",
        scratch.path().join("traj").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("--x0"),
        "the error should point at --x0: {}",
        stderr_of(&out)
    );
}
