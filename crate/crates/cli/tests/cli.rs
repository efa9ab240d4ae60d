use std::fs;
use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_weylspec");

fn run(dir: &Path, config: &str, args: &[&str]) -> (i32, String) {
    let cfg = dir.join("run.json");
    fs::write(&cfg, config).unwrap();
    let out = Command::new(BIN)
        .arg("--config")
        .arg(&cfg)
        .arg("--quiet")
        .args(args)
        .env("WEYLSPEC_THREADS", "2")
        .output()
        .unwrap();
    (out.status.code().unwrap_or(-1), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(i).unwrap().parse().unwrap()).collect()
}

const FREE: &str = r#"{"version":1,"potential":{"kind":"builtin","name":"free"},
  "lambdas":{"kind":"log","lo":0.01,"hi":100.0,"n":25},"verify":{"samples":40}}"#;

#[test]
fn free_density_matches_closed_form() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (code, err) = run(tmp.path(), FREE, &["--task", "density", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(out.join("density.csv")).unwrap();
    assert!(csv.starts_with("# density/v1\n"));
    let lambdas = column(&csv, "lambda");
    let rho = column(&csv, "density");
    assert_eq!(lambdas.len(), 25);
    for (l, r) in lambdas.iter().zip(&rho) {
        let exact = l.sqrt() / std::f64::consts::PI;
        assert!((r - exact).abs() <= 1e-8 * exact, "{l}: {r} vs {exact}");
    }
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "ok");
    assert_eq!(manifest["task"], "density");
    assert!(manifest["files"].as_array().unwrap().iter().any(|f| f == "density.csv"));
}

#[test]
fn verify_passes_on_free() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let (code, err) = run(tmp.path(), FREE, &["--task", "verify", "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(out.join("verify.csv")).unwrap();
    assert!(!csv.contains(",fail,"), "{csv}");
    assert!(!out.join("diagnostic.json").exists());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let checks = manifest["estimates"]["checks"].as_array().unwrap();
    assert_eq!(checks.len(), csv.lines().count() - 2);
    assert!(checks.iter().all(|c| c["status"] == "pass" || c["status"] == "skipped"));
}

#[test]
fn verify_passes_on_capped_well() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let cfg = r#"{"version":1,"potential":{"kind":"builtin","name":"capped_well","params":[1.0,5.0,0.1]},
      "task":"verify","verify":{"samples":40}}"#;
    let (code, err) = run(tmp.path(), cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    let csv = fs::read_to_string(out.join("verify.csv")).unwrap();
    assert!(csv.contains("bound_state_orthogonality,pass"), "{csv}");
}

#[test]
fn invalid_input_exits_2_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let cases = [
        // grid touching λ_min
        r#"{"version":1,"potential":{"kind":"builtin","name":"free"},"task":"density",
            "lambdas":{"kind":"list","values":[0.0,1.0]}}"#,
        r#"{"version":1,"potential":{"kind":"builtin","name":"free"},"task":"density","bogus":1}"#,
        r#"{"version":7,"potential":{"kind":"builtin","name":"free"},"task":"density"}"#,
        r#"{"version":1,"potential":{"kind":"builtin","name":"nope"},"task":"density"}"#,
        r#"{"version":1,"potential":{"kind":"builtin","name":"free"}}"#,
    ];
    for (i, cfg) in cases.iter().enumerate() {
        let out = tmp.path().join(format!("out{i}"));
        let (code, _) = run(tmp.path(), cfg, &["--out", out.to_str().unwrap()]);
        assert_eq!(code, 2, "case {i}");
        assert!(!out.exists(), "case {i} created output");
    }
}

#[test]
fn data_files_are_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"version":1,"potential":{"kind":"builtin","name":"capped_well","params":[1.0,5.0,0.1]},
      "verify":{"samples":20},"seed":7}"#;
    for task in ["cfunction", "bound_states", "verify"] {
        let mut seen = Vec::new();
        for (run_id, threads) in [(0, "1"), (1, "4")] {
            let out = tmp.path().join(format!("{task}{run_id}"));
            let (code, err) = run(tmp.path(), cfg, &["--task", task, "--out", out.to_str().unwrap(), "--threads", threads]);
            assert_eq!(code, 0, "{task}: {err}");
            let mut files: Vec<_> = fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| p.extension().is_some_and(|e| e == "csv"))
                .collect();
            files.sort();
            seen.push(files.iter().map(|p| (p.file_name().unwrap().to_owned(), fs::read(p).unwrap())).collect::<Vec<_>>());
        }
        assert!(!seen[0].is_empty());
        assert_eq!(seen[0], seen[1], "{task} differs between runs");
    }
}

#[test]
fn numerical_failure_exits_1_with_diagnostic() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    // the cap forbids raising λ_max far enough to meet the tail target
    let cfg = r#"{"version":1,"potential":{"kind":"builtin","name":"free"},"task":"reconstruct",
      "spectral":{"lambda_max":2.0,"lambda_max_cap":2.0,"tail_tol":1e-12}}"#;
    let (code, err) = run(tmp.path(), cfg, &["--out", out.to_str().unwrap()]);
    assert_eq!(code, 1, "{err}");
    let diag: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("diagnostic.json")).unwrap()).unwrap();
    assert_eq!(diag["status"], "numerical_error");
    assert!(diag["error"].is_string());
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["status"], "numerical_error");
}
