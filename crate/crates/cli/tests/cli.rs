//! End-to-end tests of the `satrep` binary: exit codes, report payloads,
//! determinism, and problem-file round-trips.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

use satrep::problem::ProblemFile;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_satrep"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn run_json(args: &[&str]) -> (Value, i32) {
    let output = run(args);
    let code = output.status.code().expect("exit code");
    let report: Value = serde_json::from_slice(&output.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout not JSON ({e}); stderr: {}",
            String::from_utf8_lossy(&output.stderr)
        )
    });
    (report, code)
}

#[test]
fn saturation_of_ladder_is_dimension_minus_one() {
    let path = fixture("ladder4.json");
    let (report, code) = run_json(&["saturation", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["verdict"]["finite"], 3);
    assert_eq!(report["command"], "saturation");
}

#[test]
fn saturation_of_projection_measurement_is_one() {
    let path = fixture("effect_projection.json");
    let (report, code) = run_json(&["saturation", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["verdict"]["finite"], 1);
}

#[test]
fn saturation_of_unsharp_effect_exceeds_cap() {
    let path = fixture("effect_unsharp.json");
    let (report, code) = run_json(&["saturation", path.to_str().unwrap(), "--n-max", "6"]);
    assert_eq!(code, 2);
    assert_eq!(report["result"]["verdict"]["exceeded_cap"], 6);
    let chain = report["result"]["chain"].as_array().unwrap();
    assert_eq!(chain.len(), 6);
    for level in chain {
        assert_eq!(level["holds"], false);
        assert!(level["gap"].as_f64().unwrap() > 1e-3);
    }
}

#[test]
fn saturation_of_preparative_and_mixture_is_one() {
    for name in ["preparative_qubit.json", "mixture.json"] {
        let path = fixture(name);
        let (report, code) = run_json(&["saturation", path.to_str().unwrap()]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(report["result"]["verdict"]["finite"], 1, "{name}");
    }
}

#[test]
fn preorder_binary_below_spectral_with_expected_kernel() {
    let a = fixture("povm_binary_unsharp.json");
    let b = fixture("spectral_unsharp.json");
    let (report, code) = run_json(&["preorder", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code, 0);
    let result = &report["result"];
    assert_eq!(result["holds"], true);
    assert!(result["residual"].as_f64().unwrap() <= 1e-7);
    // Kernel columns are (1-lambda, lambda) over the spectral atoms.
    let kernel = &result["kernel"];
    let sources: Vec<f64> = kernel["source_labels"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let entries = kernel["entries"].as_array().unwrap();
    let row = |i: usize| -> Vec<f64> {
        entries[i].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect()
    };
    let targets = kernel["target_labels"].as_array().unwrap();
    let one_row = targets.iter().position(|l| l == 1).unwrap();
    let zero_row = targets.iter().position(|l| l == 0).unwrap();
    for (j, lambda) in sources.iter().enumerate() {
        assert!((row(one_row)[j] - lambda).abs() <= 1e-6);
        assert!((row(zero_row)[j] - (1.0 - lambda)).abs() <= 1e-6);
    }
}

#[test]
fn preorder_spectral_not_below_binary() {
    let a = fixture("spectral_unsharp.json");
    let b = fixture("povm_binary_unsharp.json");
    let (report, code) = run_json(&["preorder", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(report["result"]["holds"], false);
    assert!(report["result"]["gap"].as_f64().unwrap() > 1e-2);
}

#[test]
fn preorder_is_reflexive_on_files() {
    let a = fixture("povm_binary_unsharp.json");
    let (report, code) =
        run_json(&["preorder", a.to_str().unwrap(), a.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["holds"], true);
}

#[test]
fn simulate_eigenstate_concentrates_near_its_eigenvalue() {
    let path = fixture("simulate_eigenstate.json");
    let args = [
        "simulate",
        path.to_str().unwrap(),
        "--seed",
        "7",
        "--n-steps",
        "200",
        "--n-traj",
        "400",
        "--bins",
        "5",
    ];
    let (report, code) = run_json(&args);
    assert_eq!(code, 0);
    let masses: Vec<f64> = report["result"]["histogram"]["masses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    // 0.7 sits in the middle of bin 3 of five uniform bins, [0.6, 0.8),
    // three standard deviations wide at 200 steps.
    let mode = masses
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    assert_eq!(mode, 3);
    assert!(masses[3] > 0.98, "mode mass {}", masses[3]);
}

#[test]
fn simulate_is_deterministic_per_seed_and_superposition_is_bimodal() {
    let path = fixture("simulate_superposition.json");
    let args = [
        "simulate",
        path.to_str().unwrap(),
        "--seed",
        "123",
        "--n-steps",
        "64",
        "--n-traj",
        "128",
        "--bins",
        "2",
    ];
    let (first, _) = run_json(&args);
    let (second, _) = run_json(&args);
    assert_eq!(first["result"], second["result"]);
    assert_eq!(first["config"], second["config"]);
    // Equal-weight superposition: half of the trajectories lock onto each
    // eigenvalue branch.
    let masses: Vec<f64> = first["result"]["histogram"]["masses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!((masses[0] - 0.5).abs() < 0.15, "low branch {}", masses[0]);
    assert!((masses[1] - 0.5).abs() < 0.15, "high branch {}", masses[1]);
}

#[test]
fn simulate_with_no_trajectories_is_valid_and_csv_is_empty() {
    let path = fixture("simulate_eigenstate.json");
    let csv_path = std::env::temp_dir().join("satrep_test_empty.csv");
    let args = [
        "simulate",
        path.to_str().unwrap(),
        "--seed",
        "1",
        "--n-traj",
        "0",
        "--csv",
        csv_path.to_str().unwrap(),
    ];
    let (report, code) = run_json(&args);
    assert_eq!(code, 0);
    assert_eq!(report["result"]["underflow_events"], 0);
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv, "trajectory,frequency\n");
}

#[test]
fn hellinger_table_matches_closed_form_and_increases() {
    let path = fixture("effect_unsharp.json");
    let (report, code) =
        run_json(&["hellinger", path.to_str().unwrap(), "--n-max", "6"]);
    assert_eq!(code, 0);
    let rows = report["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let mut previous = -1.0;
    for row in rows {
        let enumerated = row["enumerated"].as_f64().unwrap();
        let closed = row["closed_form"].as_f64().unwrap();
        assert!((enumerated - closed).abs() <= 1e-9);
        assert!(enumerated > previous);
        assert!(enumerated < 1.0);
        previous = enumerated;
        if row["n"] == 2 {
            assert!((enumerated - 0.16).abs() <= 1e-12);
        }
    }
}

#[test]
fn hellinger_on_explicit_instrument_omits_closed_form() {
    // The same measurement written as an explicit instrument gives the same
    // enumerated column but no closed-form values.
    let dir = std::env::temp_dir().join("satrep_test_explicit");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("instrument.json");
    let s03 = 0.3f64.sqrt();
    let s07 = 0.7f64.sqrt();
    let problem = serde_json::json!({
        "version": 1,
        "instrument": {
            "outcomes": [
                { "label": 0, "kraus": [[[[s07, 0.0], [0.0, 0.0]], [[0.0, 0.0], [s03, 0.0]]]] },
                { "label": 1, "kraus": [[[[s03, 0.0], [0.0, 0.0]], [[0.0, 0.0], [s07, 0.0]]]] }
            ]
        },
        "witness_states": [
            { "vector": [[1.0, 0.0], [0.0, 0.0]] },
            { "vector": [[0.0, 0.0], [1.0, 0.0]] }
        ]
    });
    std::fs::write(&path, serde_json::to_string_pretty(&problem).unwrap()).unwrap();
    let (report, code) = run_json(&["hellinger", path.to_str().unwrap(), "--n-max", "3"]);
    assert_eq!(code, 0);
    let rows = report["result"]["rows"].as_array().unwrap();
    for row in rows {
        assert!(row["closed_form"].is_null());
    }
    assert!((rows[1]["enumerated"].as_f64().unwrap() - 0.16).abs() <= 1e-9);
}

#[test]
fn malformed_problem_reports_position_and_exits_one() {
    let dir = std::env::temp_dir().join("satrep_test_bad");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("broken.json");
    std::fs::write(&path, "{ \"version\": 1, \"effect\": [[[0.3,").unwrap();
    let output = run(&["saturation", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line"), "stderr was: {stderr}");
}

#[test]
fn unknown_builder_exits_one() {
    let dir = std::env::temp_dir().join("satrep_test_bad2");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("unknown.json");
    std::fs::write(&path, "{ \"version\": 1, \"builder\": \"nope\" }").unwrap();
    let output = run(&["saturation", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown builder"));
}

#[test]
fn tolerance_overrides_are_applied_and_echoed() {
    let dir = std::env::temp_dir().join("satrep_test_tol");
    std::fs::create_dir_all(&dir).unwrap();
    let tol_path = dir.join("tol.json");
    std::fs::write(&tol_path, "{ \"feas\": 1e-6 }").unwrap();
    let path = fixture("ladder4.json");
    let (report, code) = run_json(&[
        "saturation",
        path.to_str().unwrap(),
        "--tol-file",
        tol_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["config"]["tolerances"]["feas"], 1e-6);
    assert_eq!(report["config"]["tolerances"]["psd"], 1e-10);
}

#[test]
fn every_fixture_round_trips_through_canonical_form() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut checked = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("json") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        let parsed = ProblemFile::parse(&text).unwrap();
        let canonical = parsed.to_canonical_json();
        let reparsed = ProblemFile::parse(&canonical).unwrap();
        assert_eq!(parsed, reparsed, "round trip failed for {}", path.display());
        assert_eq!(
            canonical,
            reparsed.to_canonical_json(),
            "canonical form not a fixed point for {}",
            path.display()
        );
        checked += 1;
    }
    assert!(checked >= 9, "expected all fixtures, saw {checked}");
}

#[test]
fn reports_reproduce_their_runs() {
    // Same config in, same result out, for a command of each kind.
    let cases: Vec<Vec<String>> = vec![
        vec![
            "saturation".into(),
            fixture("ladder4.json").to_str().unwrap().into(),
            "--n-max".into(),
            "4".into(),
        ],
        vec![
            "preorder".into(),
            fixture("povm_binary_unsharp.json").to_str().unwrap().into(),
            fixture("spectral_unsharp.json").to_str().unwrap().into(),
        ],
        vec![
            "hellinger".into(),
            fixture("effect_unsharp.json").to_str().unwrap().into(),
            "--n-max".into(),
            "4".into(),
        ],
    ];
    for case in cases {
        let args: Vec<&str> = case.iter().map(String::as_str).collect();
        let (first, _) = run_json(&args);
        let (second, _) = run_json(&args);
        assert_eq!(first["result"], second["result"], "case {case:?}");
    }
}
