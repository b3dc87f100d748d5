use std::path::Path;

use serde_json::Value;

use super::main_with_args;

fn run_in(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = dir.join("out.json");
    let _ = std::fs::remove_file(&out);
    let mut full = vec!["ncgeom".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.extend(["--out".to_string(), out.display().to_string()]);
    let code = main_with_args(full);
    (code, std::fs::read_to_string(&out).unwrap_or_default())
}

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap()
}

#[test]
fn build_then_distance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_in(dir.path(), &["build", "npoint", "--n", "2", "--x", "2"]);
    assert_eq!(code, 0);
    let triple = dir.path().join("f2.json");
    std::fs::write(&triple, &text).unwrap();
    assert_eq!(json(&text)["hilbert_dim"], 2);

    let t = triple.to_str().unwrap();
    let (code, text) = run_in(dir.path(), &["distance", t, "--rho", "0", "--sigma", "1"]);
    assert_eq!(code, 0);
    let v = json(&text)["value"].as_f64().unwrap();
    assert!((v - 0.5).abs() < 1e-6);

    let (_, text) = run_in(dir.path(), &["distance", t, "--rho", "1", "--sigma", "1"]);
    assert_eq!(json(&text)["value"].as_f64(), Some(0.0));

    let (_, zero) = run_in(dir.path(), &["build", "npoint", "--n", "2", "--x", "0"]);
    std::fs::write(&triple, zero).unwrap();
    let (code, text) = run_in(dir.path(), &["distance", t, "--rho", "0", "--sigma", "1"]);
    assert_eq!(code, 0);
    assert_eq!(json(&text)["value"], "inf");
}

#[test]
fn build_sizes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, text) = run_in(dir.path(), &["build", "npoint", "--n", "3", "--x", "1"]);
    assert_eq!(json(&text)["hilbert_dim"], 6);
    let (_, text) = run_in(dir.path(), &["build", "f-ed", "--d", "1"]);
    assert_eq!(json(&text)["hilbert_dim"], 4);
    let (code, text) = run_in(dir.path(), &["build", "circle", "--n", "64"]);
    assert_eq!(code, 0);
    assert_eq!(json(&text)["hilbert_dim"], 128);
    let (code, _) = run_in(dir.path(), &["build", "circle", "--n", "2"]);
    assert_eq!(code, 2);
}

#[test]
fn classify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let (code, text) = run_in(dir.path(), &["build", "morphism", "chain", "--n", "3"]);
    assert_eq!(code, 0);
    let file = dir.path().join("m.json");
    std::fs::write(&file, &text).unwrap();
    let f = file.to_str().unwrap();
    let (code, text) = run_in(dir.path(), &["classify", f, "--require", "riemannian,totally-geodesic"]);
    assert_eq!(code, 0, "{text}");
    let report = json(&text);
    assert_eq!(report["riemannian"]["pass"], true);
    assert_eq!(report["isometric"]["pass"], true);

    // swap the two rows of u: point 0 and point 1 trade places
    let mut doc = json(&std::fs::read_to_string(&file).unwrap());
    let rows = doc["u"].as_array_mut().unwrap();
    rows.swap(0, 1);
    std::fs::write(&file, doc.to_string()).unwrap();
    let (code, text) = run_in(dir.path(), &["classify", f]);
    assert_eq!(code, 1);
    assert_eq!(json(&text)["smooth_morphism"]["pass"], false);

    let (code, _) = run_in(dir.path(), &["classify", "/nonexistent/m.json"]);
    assert_eq!(code, 2);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["verify", ""]).0, 2);
    assert_eq!(run_in(dir.path(), &["verify", "nonsense"]).0, 2);
    assert_eq!(run_in(dir.path(), &["--tol=-1", "build", "f-ed"]).0, 2);
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a) = run_in(dir.path(), &["build", "morphism", "circle-fed", "--n", "6"]);
    let (_, b) = run_in(dir.path(), &["build", "morphism", "circle-fed", "--n", "6"]);
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let file = dir.path().join("m.json");
    std::fs::write(&file, &a).unwrap();
    let f = file.to_str().unwrap();
    let (c1, x) = run_in(dir.path(), &["--seed", "7", "classify", f, "--eps", "1e-3", "--require", "isometric"]);
    let (c2, y) = run_in(dir.path(), &["--seed", "7", "classify", f, "--eps", "1e-3", "--require", "isometric"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(x, y);
    let (code, _) = run_in(dir.path(), &["classify", f, "--eps", "1e-3", "--require", "totally-geodesic"]);
    assert_eq!(code, 1);
}

#[test]
fn explicit_state_sets() {
    let dir = tempfile::tempdir().unwrap();
    let (_, text) = run_in(dir.path(), &["build", "morphism", "chain", "--n", "4", "--x", "2"]);
    let file = dir.path().join("m.json");
    std::fs::write(&file, text).unwrap();
    let f = file.to_str().unwrap();
    let (code, text) = run_in(dir.path(), &["classify", f, "--states", r#"[{"block": 0}, {"block": 2}]"#]);
    assert_eq!(code, 0);
    assert_eq!(json(&text)["states"].as_array().unwrap().len(), 2);
    let (code, _) = run_in(dir.path(), &["classify", f, "--states", r#"[{"block": 0}]"#]);
    assert_eq!(code, 2);
}
