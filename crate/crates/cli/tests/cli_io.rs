//! CLI behavior: exit codes, file-format contracts, determinism, and
//! cross-command consistency.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_splitci"))
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_owned()
}

fn temp(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("splitci-cli-io-{}-{name}", std::process::id()))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn optimize_missing_input_exits_2() {
    let out = run(&["optimize", "/nonexistent/input.json", "/tmp/whatever.json"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
}

#[test]
fn optimize_malformed_json_exits_2_naming_field() {
    let path = temp("malformed.json");
    std::fs::write(
        &path,
        r#"{"n": 1, "P1d": [1.0], "P1i": [1.0], "P2d": [1.0]}"#,
    )
    .unwrap();
    let out = run(&[
        "optimize",
        path.to_str().unwrap(),
        temp("malformed-out.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("P2i"), "{}", stderr_of(&out));
}

#[test]
fn optimize_indefinite_input_exits_2_naming_field() {
    let path = temp("indefinite.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "P1d": [1.0, 2.0, 2.0, 1.0], "P1i": [1.0, 0.0, 0.0, 1.0],
            "P2d": [1.0, 0.0, 0.0, 1.0], "P2i": [1.0, 0.0, 0.0, 1.0]}"#,
    )
    .unwrap();
    let out = run(&[
        "optimize",
        path.to_str().unwrap(),
        temp("indefinite-out.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("P1d"), "{}", stderr_of(&out));
}

#[test]
fn optimize_overflowing_scenario_exits_3() {
    // passes validation, overflows to infinity once divided by the clamp
    let out = run(&[
        "optimize",
        &fixture("overflow.json"),
        temp("overflow-out.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
}

#[test]
fn optimize_bad_flags_exit_2() {
    let out = run(&[
        "optimize",
        &fixture("scalar_symmetric.json"),
        temp("badflag-out.json").to_str().unwrap(),
        "--delta",
        "0.7",
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["optimize"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn optimize_output_round_trips_exactly() {
    let out_path = temp("roundtrip.json");
    let out = run(&[
        "optimize",
        &fixture("pair_n2_seed7.json"),
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let w = parsed["w"].as_f64().unwrap();
    let reformatted = format!("{w:.16e}");
    assert!(
        text.contains(&format!("\"w\": {reformatted}")),
        "serialized w is not reproduced by its parsed value: {text}"
    );
}

#[test]
fn repeated_runs_are_byte_identical() {
    let a = temp("det-a.json");
    let b = temp("det-b.json");
    for path in [&a, &b] {
        let out = run(&[
            "optimize",
            &fixture("pair_n2_seed7.json"),
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn fuse_and_optimize_agree_on_weight() {
    let opt_path = temp("agree-opt.json");
    let fuse_path = temp("agree-fuse.json");
    assert_eq!(
        run(&[
            "optimize",
            &fixture("pair_n2_seed7.json"),
            opt_path.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        run(&[
            "fuse",
            &fixture("pair_n2_seed7.json"),
            fuse_path.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let opt: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&opt_path).unwrap()).unwrap();
    let fuse: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&fuse_path).unwrap()).unwrap();
    let dw = (opt["w"].as_f64().unwrap() - fuse["w"].as_f64().unwrap()).abs();
    assert!(dw <= 1e-12, "dw = {dw:e}");
}

#[test]
fn fuse_without_means_exits_2() {
    let out = run(&[
        "fuse",
        &fixture("lower_boundary.json"),
        temp("fuse-nomeans.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("x1"), "{}", stderr_of(&out));
}

#[test]
fn fuse_kalman_scalar_case() {
    let out_path = temp("fuse-kalman.json");
    let out = run(&[
        "fuse",
        &fixture("kalman_scalar.json"),
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!((parsed["x"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((parsed["P"][0].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(parsed["status"].as_str().unwrap(), "flat");
}

#[test]
fn fuse_identical_pure_ci_does_not_shrink() {
    let path = temp("pure-ci-identical.json");
    std::fs::write(
        &path,
        r#"{"n": 1, "P1d": [2.0], "P1i": [0.0], "P2d": [2.0], "P2i": [0.0],
            "x1": [3.0], "x2": [3.0]}"#,
    )
    .unwrap();
    let out_path = temp("pure-ci-identical-out.json");
    assert_eq!(
        run(&["fuse", path.to_str().unwrap(), out_path.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!((parsed["x"][0].as_f64().unwrap() - 3.0).abs() < 1e-10);
    assert!((parsed["P"][0].as_f64().unwrap() - 2.0).abs() < 1e-10);
}

#[test]
fn sweep_header_is_exact_and_flat_case_is_flat() {
    let out_path = temp("sweep-flat.csv");
    // a wider clamp keeps boundary cancellation noise out of the derivative
    // columns for this assertion-based (non-golden) sweep
    let out = run(&[
        "sweep",
        &fixture("flat_pure_ci.json"),
        out_path.to_str().unwrap(),
        "--samples",
        "5",
        "--delta",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "w,det,logdet,d1,d2_direct,d2_decomposed,lower_bound,T1,T2,T3"
    );
    let mut rows = 0;
    for line in lines {
        let cells: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cells.len(), 10);
        assert!((cells[1] - 1.0).abs() <= 1e-12, "det: {}", cells[1]);
        for (k, label) in [
            (3, "d1"),
            (4, "d2_direct"),
            (5, "d2_decomposed"),
            (6, "lower_bound"),
        ] {
            assert!(cells[k].abs() <= 1e-9, "{label}: {}", cells[k]);
        }
        rows += 1;
    }
    assert_eq!(rows, 5);
}

#[test]
fn sweep_symmetric_det_minimized_at_center() {
    let out_path = temp("sweep-sym.csv");
    let out = run(&[
        "sweep",
        &fixture("scalar_symmetric.json"),
        out_path.to_str().unwrap(),
        "--samples",
        "101",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&out_path).unwrap();
    let dets: Vec<f64> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(dets.len(), 101);
    let (argmin, _) = dets
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    assert_eq!(
        argmin, 50,
        "symmetric objective must bottom at the center row"
    );
}

#[test]
fn sweep_rejects_too_few_samples() {
    let out = run(&[
        "sweep",
        &fixture("scalar_symmetric.json"),
        temp("sweep-bad.csv").to_str().unwrap(),
        "--samples",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_single_trial_counts_and_determinism() {
    let a = temp("verify-a.json");
    let b = temp("verify-b.json");
    for path in [&a, &b] {
        let out = run(&[
            "verify",
            "--seed",
            "5",
            "--trials",
            "1",
            "--dims",
            "1",
            "--report",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{}", stderr_of(&out));
    }
    let parse = |p: &PathBuf| -> serde_json::Value {
        serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
    };
    let (mut ra, mut rb) = (parse(&a), parse(&b));
    for check in ra["checks"].as_array().unwrap() {
        assert_eq!(check["trials"].as_u64().unwrap(), 1);
    }
    assert!(ra["overall_pass"].as_bool().unwrap());
    // byte-identical apart from the timestamp field
    ra["timestamp_unix_ms"] = 0.into();
    rb["timestamp_unix_ms"] = 0.into();
    assert_eq!(ra, rb);
}

#[test]
fn verify_bad_flags_exit_2() {
    let out = run(&[
        "verify",
        "--trials",
        "0",
        "--report",
        temp("verify-bad.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&[
        "verify",
        "--dims",
        "0,2",
        "--report",
        temp("verify-bad2.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn demo_single_step_matches_optimize() {
    // the demo's covariances are fixed, so its weight must equal optimize's
    // on the equivalent scenario
    let (qc, r1, r2) = splitci_cli::commands::demo_matrices();
    let scenario = temp("demo-scenario.json");
    let arr = |m: &splitci::SymMatrix| {
        let cells: Vec<String> = m.to_row_major().iter().map(|x| format!("{x:?}")).collect();
        format!("[{}]", cells.join(", "))
    };
    std::fs::write(
        &scenario,
        format!(
            "{{\"n\": 2, \"P1d\": {}, \"P1i\": {}, \"P2d\": {}, \"P2i\": {}}}",
            arr(&qc),
            arr(&r1),
            arr(&qc),
            arr(&r2)
        ),
    )
    .unwrap();
    let opt_path = temp("demo-opt.json");
    assert_eq!(
        run(&[
            "optimize",
            scenario.to_str().unwrap(),
            opt_path.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let opt: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&opt_path).unwrap()).unwrap();

    let demo_path = temp("demo-one.csv");
    assert_eq!(
        run(&[
            "demo",
            "--steps",
            "1",
            "--seed",
            "3",
            "--output",
            demo_path.to_str().unwrap()
        ])
        .status
        .code(),
        Some(0)
    );
    let text = std::fs::read_to_string(&demo_path).unwrap();
    let row = text.lines().nth(1).unwrap();
    let w_demo: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((w_demo - opt["w"].as_f64().unwrap()).abs() <= 1e-12);
}

#[test]
fn demo_same_seed_is_byte_identical() {
    let a = temp("demo-det-a.csv");
    let b = temp("demo-det-b.csv");
    for path in [&a, &b] {
        assert_eq!(
            run(&[
                "demo",
                "--steps",
                "10",
                "--seed",
                "99",
                "--output",
                path.to_str().unwrap()
            ])
            .status
            .code(),
            Some(0)
        );
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}
