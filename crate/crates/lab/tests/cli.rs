use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_meanfield-lab");

fn lab(args: &[&str]) -> i32 {
    Command::new(BIN).args(args).output().unwrap().status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const DEFINETTI: &str =
    r#"{"experiment": "definetti", "parameters": {"modes": 2, "particles": 4, "samples": 2000, "state": "random"}}"#;

#[test]
fn reruns_are_byte_identical_with_one_thread() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.json", DEFINETTI);
    let outs: Vec<_> = ["a", "b"].iter().map(|s| dir.path().join(s)).collect();
    for out in &outs {
        let code = lab(&["definetti", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", "9", "--threads", "1"]);
        assert_eq!(code, 0);
    }
    for file in ["report.json", "definetti.csv"] {
        let a = std::fs::read(outs[0].join(file)).unwrap();
        let b = std::fs::read(outs[1].join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(outs[0].join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["parameters"]["seed"], 9);
    assert!(report.get("wall_time_seconds").is_none());
    assert!(outs[0].join("timing.json").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "d.json", DEFINETTI);
    // stochastic experiment without a seed
    assert_eq!(lab(&["definetti", "--config", &cfg]), 3);
    // subcommand and config disagree
    assert_eq!(lab(&["converge", "--config", &cfg, "--seed", "1"]), 3);
    let missing = dir.path().join("missing.json");
    assert_eq!(lab(&["definetti", "--config", missing.to_str().unwrap()]), 3);
    // a product state misses the 3·mc_error criterion: verdict failure, not a crash
    let product = write(
        dir.path(),
        "p.json",
        r#"{"experiment": "definetti", "parameters": {"modes": 3, "particles": 6, "samples": 4000, "state": "product", "seed": 1}}"#,
    );
    assert_eq!(lab(&["definetti", "--config", &product]), 2);
    let free = write(
        dir.path(),
        "e.json",
        r#"{"experiment": "energy-check", "parameters": {"cutoff_energy": 4.0, "alpha": 0.5,
            "potential": {"kind": "zero"}, "beta": 0.1, "n_list": [2, 3], "checks": ["prop23", "main_energy_k1"]}}"#,
    );
    let out = dir.path().join("e");
    assert_eq!(lab(&["energy-check", "--config", &free, "--out", out.to_str().unwrap()]), 0);
    let csv = std::fs::read_to_string(out.join("prop23.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("N,k,alpha,epsilon,M,min_eigenvalue,certificate"));
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn manybody_snapshots_reload() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "m.json",
        r#"{"experiment": "manybody-evolve", "parameters": {"cutoff_energy": 4.0,
            "potential": {"kind": "gaussian", "lambda": 1.0}, "beta": 0.1, "n": 2,
            "times": [0.0, 0.25], "initial": [[1.0, 0.0], [0.5, 0.0], [0.0, 0.5]], "snapshots": true}}"#,
    );
    let out = dir.path().join("m");
    assert_eq!(lab(&["manybody-evolve", "--config", &cfg, "--out", out.to_str().unwrap()]), 0);
    let state = meanfield_core::io::read_state(&out.join("state_t0.25")).unwrap();
    assert_eq!(state.basis.modes(), 3);
    assert!((state.norm() - 1.0).abs() < 1e-12);
    for name in ["state_t0.json", "state_t0.bin", "state_t0.25.json", "state_t0.25.bin"] {
        assert!(out.join(name).exists(), "{name}");
    }
}
