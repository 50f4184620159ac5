use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_noisyor")).current_dir(dir).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "fixtures", "identical_pair", name].iter().collect();
    p.display().to_string()
}

fn generate(dir: &Path, out: &str, seed: &str) -> Output {
    run(dir, &["generate", "--inputs", "6", "--outputs", "4", "--fanin", "2", "--weights", "1/2", "--seed", seed, "--out", out])
}

#[test]
fn generate_is_deterministic_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    assert!(generate(dir.path(), "a.json", "3").status.success());
    assert!(generate(dir.path(), "b.json", "3").status.success());
    let a = std::fs::read(dir.path().join("a.json")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.json")).unwrap());
    let manifest = std::fs::read_to_string(dir.path().join("a.json.manifest.json")).unwrap();
    assert!(manifest.contains("\"sha256\""));
}

#[test]
fn generate_rejects_weight_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["generate", "--inputs", "3", "--outputs", "2", "--fanin", "2", "--weights", "1", "--seed", "1", "--out", "x.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: "));
}

#[test]
fn sample_writes_requested_count() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "n.json", "5");
    let o = run(dir.path(), &["sample", "--net", "n.json", "--bias", "1/3", "--count", "500", "--seed", "2", "--out", "s.txt"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("count: 500"));
    let text = std::fs::read_to_string(dir.path().join("s.txt")).unwrap();
    assert_eq!(text.lines().count(), 501);
}

#[test]
fn reconstruct_in_simulation_recovers_the_target() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "n.json", "7");
    for oracle in ["structural", "distributional"] {
        let o = run(
            dir.path(),
            &["reconstruct", "--target", "n.json", "--m", "6", "--fanin", "2", "--weights", "1/2", "--bias", "1/3", "--oracle", oracle, "--out", "r.json", "--report", "r.report.json"],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let text = stdout(&o);
        assert!(text.contains("equivalent: true"), "{text}");
        assert!(text.contains("within_bound: true"));
    }
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.report.json")).unwrap()).unwrap();
    assert!(report.get("seq_count").is_some());
}

#[test]
fn reconstruct_from_samples_at_bias_one_is_degenerate() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "n.json", "9");
    let o = run(
        dir.path(),
        &["reconstruct", "--net", "n.json", "--seed", "1", "--m", "6", "--fanin", "2", "--weights", "1/2", "--bias", "1", "--alpha", "0.1", "--oracle", "statistical", "--out", "r.json"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate"));
}

#[test]
fn analyze_commands_print_expected_values() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["analyze", "bound", "--d", "1", "--r", "1", "--c", "1", "--alpha", "0.1"]);
    assert!(stdout(&o).contains("measure_bound: 0.4"));
    generate(dir.path(), "n.json", "1");
    let o = run(dir.path(), &["analyze", "poly", "--net", "n.json", "--outputs", ""]);
    assert!(stdout(&o).contains("polynomial: 1\n"));
    let o = run(dir.path(), &["analyze", "unique", "--inputs", "4", "--outputs", "2", "--fanin", "2", "--weights", "1/2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("verdict: holds"));
}

#[test]
fn counterexample_search_finds_an_identical_pair() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["analyze", "counterexample", "--weights", "3", "--inputs", "4", "--outputs", "2", "--out-dir", "pair"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("found: true"));
    assert!(text.contains("identical_polynomials: true"));
    let o = run(dir.path(), &["verify", "equiv", "pair/a.json", "pair/b.json"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn fixture_pair_is_inequivalent_but_indistinguishable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (fixture("a.json"), fixture("b.json"));
    let o = run(dir.path(), &["verify", "equiv", &a, &b]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("equivalent: false"));
    let o = run(dir.path(), &["verify", "dist", &a, &b, "--bias", "2/7"]);
    assert!(stdout(&o).contains("separation: 0\n"));
}

#[test]
fn replay_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    generate(dir.path(), "n.json", "11");
    let o = run(dir.path(), &["sample", "--net", "n.json", "--bias", "1/2", "--count", "200", "--seed", "4", "--out", "s.txt"]);
    assert!(o.status.success());
    let o = run(dir.path(), &["replay", "s.txt.manifest.json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("replay_identical: true"));
}
