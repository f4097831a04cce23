//! Behavior of the command-line front end: output values, file handling,
//! and the exit-code contract (0 success, 2 usage, 3 data or model errors).

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use plmix::io::read_profile_file;
use plmix::types::StructureId;

fn plmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_plmix")).args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(out.status.success(), "expected success: {out:?}");
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// The documented parameter schema, written by hand rather than through
/// the library, so the file format itself is under test.
fn worked_example_json(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("worked.json");
    fs::write(
        &path,
        r#"{
  "m": 4,
  "k": 2,
  "alpha": [0.2, 0.8],
  "components": [[0.1, 0.2, 0.3, 0.4], [0.2, 0.2, 0.3, 0.3]],
  "phi": {
    "entries": [
      {"kind": "top", "l": 2, "prob": 0.1},
      {"kind": "top", "l": 3, "prob": 0.2},
      {"kind": "way", "subset": [1, 3, 4], "prob": 0.3},
      {"kind": "choice", "subset": [1, 2, 3], "prob": 0.4}
    ]
  }
}
"#,
    )
    .expect("writable");
    path
}

#[test]
fn prob_reports_marginal_and_model_values() {
    let dir = tempfile::tempdir().expect("tempdir");
    let params = worked_example_json(dir.path());
    let cases = [
        (r#"{"kind":"top","m":4,"ranked":[2,3,4]}"#, 0.048, Some(0.0096)),
        (r#"{"kind":"top","m":4,"ranked":[4,3]}"#, 1.0 / 7.0, Some(1.0 / 70.0)),
        (r#"{"kind":"way","m":4,"ranked":[3,4,1]}"#, 0.24, Some(0.072)),
        (r#"{"kind":"choice","m":4,"subset":[1,2,3],"chosen":3}"#, 31.0 / 70.0, Some(31.0 / 175.0)),
        // Valid order, but its structure has no weight in the model.
        (r#"{"kind":"top","m":4,"ranked":[2]}"#, 0.2, None),
    ];
    for (order, marginal, model) in cases {
        let out = stdout_json(&plmix(&["prob", "--params-file", params.to_str().unwrap(), "--order", order]));
        let got = out["marginal"].as_f64().expect("marginal present");
        assert!((got - marginal).abs() < 1e-12, "{order}: marginal {got} vs {marginal}");
        match model {
            Some(want) => {
                let got = out["model"].as_f64().expect("model present");
                assert!((got - want).abs() < 1e-12, "{order}: model {got} vs {want}");
            }
            None => assert!(out.get("model").is_none(), "{order}: expected no model value"),
        }
    }
}

#[test]
fn sample_uses_the_structure_distribution_from_the_params_file() {
    let dir = tempfile::tempdir().expect("tempdir");
    let params = worked_example_json(dir.path());
    let profile_path = dir.path().join("profile.jsonl");
    let out = plmix(&[
        "sample",
        "--params-file",
        params.to_str().unwrap(),
        "--n",
        "400",
        "--seed",
        "3",
        "--out",
        profile_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{out:?}");

    let profile = read_profile_file(&profile_path).expect("readable");
    assert_eq!(profile.len(), 400);
    let allowed = [
        StructureId::Top { l: 2 },
        StructureId::Top { l: 3 },
        StructureId::way(vec![1, 3, 4]).unwrap(),
        StructureId::choice(vec![1, 2, 3]).unwrap(),
    ];
    for o in profile.orders() {
        assert!(allowed.contains(&o.structure()), "unexpected structure {}", o.structure());
    }
}

#[test]
fn sample_linear_setting_emits_full_rankings() {
    let out = plmix(&["sample", "--m", "4", "--n", "5", "--seed", "1", "--setting", "linear"]);
    assert!(out.status.success(), "{out:?}");
    let text = String::from_utf8(out.stdout).expect("utf8");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(r#"{"m":4}"#));
    for line in lines {
        let doc: serde_json::Value = serde_json::from_str(line).expect("order line");
        assert_eq!(doc["kind"], "way");
        assert_eq!(doc["ranked"].as_array().expect("ranked").len(), 4);
    }
}

#[test]
fn witness_command_reports_the_frozen_combination() {
    let out = stdout_json(&plmix(&[
        "witness", "--m", "4", "--k", "2", "--l1", "1", "--l2", "2", "--e", "0.1", "0.2", "0.3",
        "0.4",
    ]));
    let beta: Vec<f64> =
        out["beta"].as_array().expect("beta").iter().map(|v| v.as_f64().unwrap()).collect();
    let want = [-200.0, 700.0, -800.0, 300.0];
    for (got, want) in beta.iter().zip(want) {
        assert!((got - want).abs() < 1e-9, "beta {beta:?} vs {want:?}");
    }
    assert!(out["agreement_gap"].as_f64().expect("gap") <= 1e-10);
    assert!(out["separation"]["gap"].as_f64().expect("separation") > 1e-6);
}

#[test]
fn validate_accepts_a_clean_model() {
    let dir = tempfile::tempdir().expect("tempdir");
    let params = worked_example_json(dir.path());
    let out = plmix(&["validate", "--params-file", params.to_str().unwrap()]);
    assert!(out.status.success(), "{out:?}");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json");
    assert_eq!(doc["ok"], true);
    assert!(doc["violations"].as_array().unwrap().is_empty());
}

#[test]
fn validate_rejects_redundant_structure_pairs() {
    // A ranked prefix of m-1 alternatives determines the full ranking, so
    // it may not coexist with the m-way structure; a pair ranking may not
    // coexist with the choice over the same pair.
    let dir = tempfile::tempdir().expect("tempdir");
    let path = dir.path().join("overlap.json");
    fs::write(
        &path,
        r#"{
  "m": 4,
  "k": 1,
  "alpha": [1.0],
  "components": [[0.1, 0.2, 0.3, 0.4]],
  "phi": {
    "entries": [
      {"kind": "top", "l": 3, "prob": 0.25},
      {"kind": "way", "subset": [1, 2, 3, 4], "prob": 0.25},
      {"kind": "way", "subset": [1, 2], "prob": 0.25},
      {"kind": "choice", "subset": [1, 2], "prob": 0.25}
    ]
  }
}
"#,
    )
    .expect("writable");
    let out = plmix(&["validate", "--params-file", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).expect("json");
    assert_eq!(doc["ok"], false);
    assert_eq!(doc["violations"].as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_with_code_2() {
    let missing = plmix(&["prob"]);
    assert_eq!(missing.status.code(), Some(2), "{missing:?}");
    let unknown = plmix(&["fit", "--no-such-flag"]);
    assert_eq!(unknown.status.code(), Some(2), "{unknown:?}");
}

#[test]
fn data_errors_exit_with_code_3() {
    let dir = tempfile::tempdir().expect("tempdir");

    let absent = plmix(&["fit", "--in", dir.path().join("absent.jsonl").to_str().unwrap()]);
    assert_eq!(absent.status.code(), Some(3), "{absent:?}");

    // A profile whose observations never land on any selected event leaves
    // nothing to fit.
    let path = dir.path().join("off_selector.jsonl");
    let mut text = String::from("{\"m\":4}\n");
    for _ in 0..10 {
        text.push_str("{\"kind\":\"choice\",\"m\":4,\"subset\":[1,2,3],\"chosen\":1}\n");
    }
    fs::write(&path, text).expect("writable");
    let out = plmix(&["fit", "--in", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
    let err = String::from_utf8(out.stderr).expect("utf8");
    assert!(err.starts_with("error: "), "unexpected stderr: {err}");

    let bad_line = dir.path().join("bad_line.jsonl");
    fs::write(&bad_line, "{\"m\":4}\n{\"kind\":\"top\",\"m\":4,\"ranked\":[2,9]}\n").expect("writable");
    let out = plmix(&["validate", "--profile", bad_line.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{out:?}");
}
