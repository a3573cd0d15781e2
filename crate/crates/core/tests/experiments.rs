use std::process::Command;

use cvteleport::experiments::{run_experiment, ExperimentConfig, Format, EXPERIMENTS};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cvteleport"))
}

fn write_config(name: &str, text: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("cvteleport-tests-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn sigma_table_values() {
    let (_, t) = run_experiment(&ExperimentConfig::new("sigma-table")).unwrap();
    let sig: Vec<f64> = t.find("sigma").map(|r| r.mean).collect();
    assert_eq!(sig.len(), 3);
    assert_eq!(sig[0], 1.0);
    assert_eq!(sig[1], 0.5);
    assert!((sig[2] - 0.1 / 1.9).abs() < 1e-15);
    let f: Vec<f64> = t.find("fidelity_unit_gain").map(|r| r.mean).collect();
    assert!((f[1] - 2.0 / 3.0).abs() < 1e-15 && (f[2] - 0.95).abs() < 1e-12);
}

#[test]
fn hierarchy_matches_expectations() {
    let (_, t) = run_experiment(&ExperimentConfig::new("hierarchy-classify")).unwrap();
    assert!(t.rows.len() >= 9);
    for r in &t.rows {
        assert!(r.note.ends_with("; match"), "{:?}", r);
    }
}

#[test]
fn output_is_reproducible_per_seed() {
    let mut cfg = ExperimentConfig::new("noise-model-equivalence");
    cfg.trials = Some(200);
    cfg.seed = 17;
    let (c1, a) = run_experiment(&cfg).unwrap();
    let (_, b) = run_experiment(&cfg).unwrap();
    assert_eq!(a.render(&c1), b.render(&c1));
    cfg.seed = 18;
    let (c3, c) = run_experiment(&cfg).unwrap();
    assert_ne!(a.render(&c1), c.render(&c3));
}

#[test]
fn csv_and_json_layout() {
    let mut cfg = ExperimentConfig::new("sigma-table");
    cfg.seed = 4;
    let (cfg, t) = run_experiment(&cfg).unwrap();
    let csv = t.to_csv();
    let mut lines = csv.lines();
    let head = lines.next().unwrap();
    assert!(head.starts_with("# cvteleport sigma-table config-sha256="));
    assert!(head.ends_with(" seed=4"));
    assert_eq!(head.split("config-sha256=").nth(1).unwrap().split(' ').next().unwrap(), cfg.hash());
    assert_eq!(lines.next().unwrap(), "eta,nu,statistic,mean,stderr,trials,converged,note");
    assert_eq!(lines.count(), t.rows.len());

    let mut jcfg = cfg.clone();
    jcfg.format = Format::Json;
    let v: serde_json::Value = serde_json::from_str(&t.render(&jcfg)).unwrap();
    assert_eq!(v["experiment"], "sigma-table");
    assert_eq!(v["config_hash"], cfg.hash());
    assert_eq!(v["rows"].as_array().unwrap().len(), t.rows.len());
}

#[test]
fn config_files_are_validated() {
    assert!(ExperimentConfig::from_toml_str("experiment = \"sigma-table\"\nbogus = 1\n").is_err());
    let c = ExperimentConfig::from_toml_str("experiment = \"sigma-table\"\neta = 0.5\n").unwrap();
    assert_eq!(c.eta, vec![0.5]);
    let mut bad = ExperimentConfig::new("sigma-table");
    bad.eta = vec![1.0];
    assert!(run_experiment(&bad).is_err());
    assert!(run_experiment(&ExperimentConfig::new("no-such-thing")).is_err());
    // every registered experiment resolves its defaults
    for e in EXPERIMENTS {
        ExperimentConfig::new(e).resolve().unwrap();
    }
}

#[test]
fn cli_version_and_classify() {
    let out = bin().arg("version").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("cvteleport ") && text.contains("hbar = 1"));

    let out = bin().args(["classify", "(exp (poly \"q^3\") 0.1)"]).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("level 3"));

    let out = bin().args(["classify", "(kerr 0.1)"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("NonTerminatingAdjoint"));
}

#[test]
fn cli_run_writes_files_and_reports_errors() {
    let cfg = write_config("sigma.toml", "eta = [0.5]\nnu = [1.0]\n");
    let out_path = cfg.with_extension("json");
    let st = bin()
        .args(["run", "sigma-table", "--config"])
        .arg(&cfg)
        .args(["--seed", "3", "--format", "json", "--out"])
        .arg(&out_path)
        .status()
        .unwrap();
    assert!(st.success());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(v["seed"], 3);

    let out = bin().args(["run", "warp-drive"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("known experiments"));

    let bad = write_config("bad.toml", "eta = [1.5]\n");
    let out = bin().args(["run", "sigma-table", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn cli_flags_non_converged_rows() {
    let cfg = write_config("cubic.toml", "gamma = [0.1]\ndisplacement = [1.0]\ncutoff = [40]\nmax_cutoff = 60\n");
    let out = bin().args(["run", "cubic-correction-verify", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains(",false,"));
}
