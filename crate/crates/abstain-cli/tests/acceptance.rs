//! Drives the compiled binary end to end: the determinism criterion (every
//! subcommand, fixed seed, two consecutive runs, byte-identical primary
//! outputs) plus the exit-code contract.

use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

const BIN: &str = env!("CARGO_BIN_EXE_abstain");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("binary launches")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

/// Runs the command twice and checks stdout plus every listed output file
/// is byte-identical between runs.
fn assert_deterministic(label: &str, args: &[&str], files: &[&Path]) {
    let first = run(args);
    assert_eq!(
        code(&first),
        0,
        "{label}: first run failed: {}",
        String::from_utf8_lossy(&first.stderr)
    );
    let first_files: Vec<Vec<u8>> = files
        .iter()
        .map(|p| std::fs::read(p).unwrap_or_else(|e| panic!("{label}: read {p:?}: {e}")))
        .collect();
    let second = run(args);
    assert_eq!(code(&second), 0, "{label}: second run failed");
    assert_eq!(
        first.stdout, second.stdout,
        "{label}: stdout differs between runs"
    );
    for (p, before) in files.iter().zip(&first_files) {
        let after = std::fs::read(p).unwrap();
        assert_eq!(&after, before, "{label}: {p:?} differs between runs");
    }
}

#[test]
fn criterion_10_determinism() {
    let start = Instant::now();
    let dir = tempfile::tempdir().expect("temp dir");
    let p = |name: &str| dir.path().join(name);
    let s = |name: &str| p(name).display().to_string();

    let data = s("data.jsonl");
    assert_deterministic(
        "gen",
        &[
            "gen",
            "--task",
            "near-limit",
            "--n",
            "400",
            "--seed",
            "11",
            "--c",
            "0.33",
            "--out",
            &data,
        ],
        &[&p("data.jsonl"), &p("data.config.json")],
    );

    let report = s("report.json");
    let rejector = s("rej.json");
    assert_deterministic(
        "train",
        &[
            "train",
            "--dataset",
            &data,
            "--method",
            "surrogate",
            "--c",
            "0.33",
            "--alpha",
            "2",
            "--model",
            "mlp1",
            "--width",
            "8",
            "--lr",
            "0.05",
            "--epochs",
            "30",
            "--batch",
            "128",
            "--seed",
            "3",
            "--out",
            &report,
            "--rejector-out",
            &rejector,
        ],
        &[&p("report.json"), &p("rej.json"), &p("report.config.json")],
    );

    let point = s("point.json");
    assert_deterministic(
        "eval",
        &[
            "eval",
            "--dataset",
            &data,
            "--rejector",
            &rejector,
            "--out",
            &point,
        ],
        &[&p("point.json")],
    );

    let curve = s("curve.csv");
    assert_deterministic(
        "sweep maxprob",
        &[
            "sweep",
            "--dataset",
            &data,
            "--method",
            "maxprob",
            "--grid",
            "0.9,0.95",
            "--k",
            "3",
            "--seed",
            "2",
            "--out",
            &curve,
            "--json-out",
            &s("curve.json"),
            "--dat-out",
            &s("curve.dat"),
        ],
        &[
            &p("curve.csv"),
            &p("curve.json"),
            &p("curve.dat"),
            &p("curve.config.json"),
        ],
    );

    // Constant rejector keeps the surrogate's stiff reject term bounded
    // from its zero start, so the demo grid trains without divergence.
    assert_deterministic(
        "sweep surrogate",
        &[
            "sweep",
            "--dataset",
            &data,
            "--method",
            "surrogate",
            "--grid",
            "0.2,0.4",
            "--model",
            "constant",
            "--alpha",
            "2",
            "--lr",
            "0.01",
            "--epochs",
            "40",
            "--k",
            "2",
            "--seed",
            "4",
        ],
        &[],
    );

    assert_deterministic(
        "sweep cross_entropy",
        &[
            "sweep",
            "--dataset",
            &data,
            "--method",
            "cross_entropy",
            "--grid",
            "0.9",
            "--k",
            "2",
            "--epochs",
            "30",
            "--seed",
            "6",
        ],
        &[],
    );

    assert_deterministic("verify", &["verify", "--quick"], &[]);
    assert_deterministic("limit", &["limit", "--b", "0.89", "--p", "0.95"], &[]);

    println!(
        "criterion 10 (determinism): pass in {:.1} ms",
        start.elapsed().as_secs_f64() * 1e3
    );
}

#[test]
fn limit_prints_the_reference_coverage() {
    let out = run(&["limit", "--b", "0.89", "--p", "0.95"]);
    assert_eq!(code(&out), 0);
    assert_eq!(String::from_utf8_lossy(&out.stdout), "0.9368\n");
}

#[test]
fn quick_verify_exits_zero_with_all_passes() {
    let out = run(&["verify", "--quick"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("property,cells,violations,max_violation,status\n"));
    assert_eq!(text.matches(",pass").count(), 5);
}

#[test]
fn invalid_cost_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let gen = run(&[
        "gen",
        "--task",
        "const-0.8",
        "--n",
        "50",
        "--seed",
        "1",
        "--out",
        &data.display().to_string(),
    ]);
    assert_eq!(code(&gen), 0);
    let out = run(&[
        "train",
        "--dataset",
        &data.display().to_string(),
        "--c",
        "1.5",
    ]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("c"));
}

#[test]
fn missing_input_is_an_io_error() {
    let out = run(&[
        "eval",
        "--dataset",
        "/nonexistent/nowhere.jsonl",
        "--rejector",
        "/nonexistent/r.json",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn help_and_parse_errors() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(String::from_utf8_lossy(&help.stdout).contains("abstain"));

    let sub_help = run(&["sweep", "--help"]);
    assert_eq!(code(&sub_help), 0);

    let bad = run(&["train", "--no-such-flag"]);
    assert_eq!(code(&bad), 1);
    assert!(!bad.stderr.is_empty());

    let missing_out = run(&["gen", "--task", "const-0.8"]);
    assert_eq!(code(&missing_out), 1);

    let bad_limit = run(&["limit", "--b", "0.0", "--p", "0.95"]);
    assert_eq!(code(&bad_limit), 1);
}

#[test]
fn config_file_applies_under_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.toml");
    let data = dir.path().join("cfg-data.jsonl");
    std::fs::write(
        &cfg_path,
        concat!(
            "n = 100\n",
            "seed = 9\n",
            "c = 0.2\n",
            "\n",
            "[task]\n",
            "kind = \"piecewise\"\n",
            "breakpoints = [0.0]\n",
            "levels = [0.6, 0.98]\n",
            "c = 0.1\n",
            "\n",
            "[task.x_law]\n",
            "law = \"uniform-box\"\n",
            "dim = 1\n",
        ),
    )
    .unwrap();

    // Flag --n outranks the config's n; the config's top-level c outranks
    // the task table's own cost.
    let out = run(&[
        "gen",
        "--config",
        &cfg_path.display().to_string(),
        "--n",
        "60",
        "--out",
        &data.display().to_string(),
    ]);
    assert_eq!(
        code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = std::fs::read_to_string(&data).unwrap();
    assert_eq!(text.lines().filter(|l| !l.trim().is_empty()).count(), 60);
    let echo: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("cfg-data.config.json")).unwrap())
            .unwrap();
    assert_eq!(echo["n"], 60);
    assert_eq!(echo["seed"], 9);
    assert_eq!(echo["task"]["c"], 0.2);

    // A task known by name also works from config files.
    let named = dir.path().join("named.toml");
    std::fs::write(&named, "task = \"logistic-1d\"\nn = 25\nout = \"ignored\"\n").unwrap();
    let data2 = dir.path().join("named.jsonl");
    let out2 = run(&[
        "gen",
        "--config",
        &named.display().to_string(),
        "--out",
        &data2.display().to_string(),
    ]);
    assert_eq!(code(&out2), 0);
    assert_eq!(
        std::fs::read_to_string(&data2).unwrap().lines().count(),
        25
    );

    // Unknown keys are rejected rather than silently ignored.
    let typo = dir.path().join("typo.toml");
    std::fs::write(&typo, "sede = 3\n").unwrap();
    let out3 = run(&[
        "gen",
        "--config",
        &typo.display().to_string(),
        "--task",
        "const-0.8",
        "--out",
        &dir.path().join("x.jsonl").display().to_string(),
    ]);
    assert_eq!(code(&out3), 1);
}

#[test]
fn single_fold_sweep_trains_and_tests_on_everything() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.jsonl");
    let gen = run(&[
        "gen",
        "--task",
        "two-level",
        "--n",
        "200",
        "--seed",
        "5",
        "--score-noise",
        "0.1",
        "--out",
        &data.display().to_string(),
    ]);
    assert_eq!(code(&gen), 0);
    let out = run(&[
        "sweep",
        "--dataset",
        &data.display().to_string(),
        "--method",
        "maxprob",
        "--grid",
        "0.9",
        "--k",
        "1",
        "--seed",
        "0",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    let row = text.lines().nth(1).expect("one data row");
    assert!(row.starts_with("maxprob,0.9,"));
    assert!(row.ends_with(",1"), "fold count should be 1: {row}");
}
