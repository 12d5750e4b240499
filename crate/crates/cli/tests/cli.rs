use std::path::Path;
use std::process::{Command, Output};

use epsdyadic::{GridFunction, GridHeader};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_epsdyadic"))
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn check_conditions_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["check-conditions"], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let eps = read(&out.join("eps_diening.csv"));
    assert!(eps.starts_with("cube,p_minus,p_plus,eps,value\n"));
    let row = |token: &str| -> f64 {
        let line = eps.lines().find(|l| l.starts_with(&format!("{token},"))).unwrap();
        line.rsplit(',').next().unwrap().parse().unwrap()
    };
    for n in 0..=40 {
        assert!((row(&format!("{n}:0")) - 1.2).abs() < 1e-9);
    }
    assert!((row("1:1") - 1.2922939).abs() < 1e-6);
    let summary = read(&out.join("summary.csv"));
    assert!(summary.contains("eps_diening,1.29229"));
}

#[test]
fn oracle_suite_passes_and_detects_faults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"instances": 30}"#);
    let o = run(&["oracle-suite", "--config", cfg.to_str().unwrap()], &dir.path().join("ok"));
    assert_eq!(o.status.code(), Some(0));

    let cfg = write_config(dir.path(), r#"{"instances": 30, "fault": true}"#);
    let o = run(&["oracle-suite", "--config", cfg.to_str().unwrap()], &dir.path().join("bad"));
    assert_eq!(o.status.code(), Some(1));
    let table = read(&dir.path().join("bad/oracle_suite.csv"));
    let cz = table.lines().find(|l| l.starts_with("cz,")).unwrap();
    assert_ne!(cz.split(',').nth(2).unwrap(), "0");

    let cfg = write_config(
        dir.path(),
        r#"{"instances": 12, "exponent": {"kind": "constant", "p": 2.5},
            "epsilon": {"kind": "level_rule", "base": "sqrt_side"}}"#,
    );
    let o = bin()
        .args(["oracle-suite", "--dim", "2", "--depth", "4", "--config", cfg.to_str().unwrap(), "--out"])
        .arg(dir.path().join("2d"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"exponent": {"kind": "constant", "p": 0.5}}"#);
    let o = run(&["opnorm", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let cfg = write_config(dir.path(), "not json");
    assert_eq!(run(&["cz", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
    let o = run(&["cz", "--config", "/nonexistent/config.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    // a threshold at or below the root value is not localizable
    let cfg = write_config(dir.path(), r#"{"lambda": 0.0}"#);
    assert_eq!(run(&["cz", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn opnorm_identity_and_maximal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"operator": "identity", "bank": {"kind": "random_cells", "count": 5, "seed": 3}}"#,
    );
    assert_eq!(run(&["opnorm", "--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(0));

    let cfg = write_config(
        dir.path(),
        r#"{"operator": "md", "exponent": {"kind": "constant", "p": 2.0}, "sweep_depths": [6, 10]}"#,
    );
    let out = dir.path().join("md");
    assert_eq!(run(&["opnorm", "--config", cfg.to_str().unwrap()], &out).status.code(), Some(0));
    let sweep = read(&out.join("opnorm_sweep.csv"));
    assert_eq!(sweep.lines().count(), 4);
    for line in sweep.lines().skip(1) {
        let r: f64 = line.rsplit(',').next().unwrap().parse().unwrap();
        assert!(r <= 2.0 + 1e-9);
    }
}

#[test]
fn compactness_ends_at_zero() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"epsilon": {"kind": "level_rule", "base": "sqrt_side"}}"#);
    let o = run(&["compactness", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let table = read(&dir.path().join("compactness.csv"));
    assert!(table.lines().last().unwrap().starts_with("8,0.0,"));
    assert_eq!(read(&dir.path().join("compactness_summary.csv")).lines().nth(1), Some("true,true,false"));
}

#[test]
fn cz_haar_sparse_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let f = GridFunction::indicator(epsdyadic::Layout::unit(1, 3).unwrap(), &"1:0".parse().unwrap()).unwrap();
    f.save(&dir.path().join("half")).unwrap();
    let cfg = write_config(
        dir.path(),
        &format!(
            r#"{{"depth": 3, "lambda": 0.6, "epsilon": {{"kind": "constant", "c": 1.0}}, "input": {:?}}}"#,
            dir.path().join("half")
        ),
    );
    let o = run(&["cz", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let cz: serde_json::Value = serde_json::from_str(&read(&out.join("cz.json"))).unwrap();
    assert_eq!(cz["cubes"][0]["cube"], "1:0");
    assert_eq!(cz["cubes"].as_array().unwrap().len(), 1);

    let o = run(&["haar", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0));
    let header: GridHeader = serde_json::from_str(&read(&out.join("haar.json"))).unwrap();
    assert_eq!((header.dimension, header.depth), (1, 3));
    let t = GridFunction::load(&out.join("haar")).unwrap();
    assert!(read(&out.join("haar.csv")).starts_with("cell_index,value\n"));
    assert_eq!(t.values(), &[0.5, 0.5, 0.5, 0.5, -0.5, -0.5, -0.5, -0.5]);

    let o = run(&["sparse", "--config", cfg.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0));
    let sparse: serde_json::Value = serde_json::from_str(&read(&out.join("sparse.json"))).unwrap();
    assert_eq!(sparse[0]["collection"]["root"], "0:0");
    assert_eq!(sparse[0]["check"]["packing"], true);
}
