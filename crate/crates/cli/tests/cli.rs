use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_meandim"));
    c.env_remove("MEANDIM_BUDGET_POINTS");
    c
}

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap()
}

#[test]
fn malformed_json_exits_2_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"epsilon\": [0.5,,]\n}").unwrap();
    let o = run(&["covering-profile", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("cli/config") && err.contains("bad.json:2:"), "{err}");
}

#[test]
fn missing_config_and_wrong_subcommand_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["tiling", "--config", "/nonexistent/x.json", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["tiling", "--config", example("covering_binary.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("covering-profile"));
}

#[test]
fn budget_override_exits_3_naming_the_knob() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .args(["dim-profile", "--config", example("dim_profile_ternary.json").to_str().unwrap()])
        .args(["--out", dir.path().to_str().unwrap()])
        .env("MEANDIM_BUDGET_POINTS", "5")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("enumeration_points") && err.starts_with("meandim: hausdorff/"), "{err}");
    assert!(!dir.path().join("results.json").exists());
}

#[test]
fn outputs_are_deterministic_across_job_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = example("covering_binary.json");
    for (dir, jobs) in [(&a, "1"), (&b, "3")] {
        let o = run(&["covering-profile", "--config", cfg.to_str().unwrap(), "--jobs", jobs, "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["results.json", "results.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
    }
    let m = read_json(&a.path().join("manifest.json"));
    assert_eq!(m["experiment"], "covering-profile");
    assert_eq!(m["config_sha256"].as_str().unwrap().len(), 64);
    assert!(m["wall_time_secs"].as_f64().unwrap() >= 0.0);
    assert!(m["versions"]["meandim-core"].is_string());
    assert_eq!(m["outputs"].as_object().unwrap().len(), 2);
}

#[test]
fn hilbert_cube_rd_curve_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["rd-curve", "--config", example("hilbert_cube.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.starts_with("epsilon,N,rate,lower,distortion,converged,iterations\n"));
    assert_eq!(csv.lines().count(), 1 + 5 * 3);
    let r = read_json(&dir.path().join("results.json"));
    assert!(r["report"]["estimate"]["slope"].as_f64().unwrap() > 0.0);
    assert_eq!(r["tolerances"]["diameter"], 1e-12);
    assert_eq!(r["budget"]["exact_points"], 20);
}

#[test]
fn tiling_emits_plot_ready_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["tiling", "--config", example("tiling_lemma.json").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.starts_with("a,height,left,right\n"));
    let r = read_json(&dir.path().join("results.json"));
    // Sites more than n = 5 apart.
    assert!(r["report"]["density"]["density"].as_f64().unwrap() < 0.2);
}

#[test]
fn small_examples_run() {
    for (kind, cfg) in [
        ("frostman", "frostman_path.json"),
        ("dim-profile", "dim_profile_ternary.json"),
        ("algebraic", "algebraic_linked.json"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let o = run(&[kind, "--config", example(cfg).to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
        assert!(o.status.success(), "{kind}: {}", stderr(&o));
        assert!(dir.path().join("manifest.json").exists());
    }
}

#[test]
fn formats_select_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"trace": {"explicit": {"start": -5, "values": [1,0,0.5,0,1,0,0,1,0,0,1]}}, "formats": ["csv"]}"#).unwrap();
    let out = dir.path().join("out");
    let o = run(&["tiling", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(out.join("results.csv").exists() && !out.join("results.json").exists());
}

#[test]
fn shipped_configs_use_schema_keys() {
    let schema = read_json(&Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/config.schema.json"));
    let keys = schema["properties"].as_object().unwrap();
    for entry in std::fs::read_dir(example("")).unwrap() {
        let cfg = read_json(&entry.unwrap().path());
        for k in cfg.as_object().unwrap().keys() {
            assert!(keys.contains_key(k), "{k}");
        }
    }
}
