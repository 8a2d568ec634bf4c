use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nsto_dfo::RunConfig;

const PSF_NM: &str = "\
run.label = psf-nm
method.name = nelder-mead
method.eps = 1e-12
objective.kind = psf
psf.dim = 4
bounds.lower = -4, -4, -4, -4
bounds.upper = 5, 5, 5, 5
start = standard
";

const HE_NM: &str = "\
run.label = he-nm
method.name = nelder-mead
method.eps = 1e-8
objective.kind = atom
atom.z = 2
atom.electrons = 2
basis.kind = noninteger
basis.shells = 1
bounds.reference = 0.95505735, 1.6117248872
";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_nsto-dfo"));
    c.env_remove("NSTO_DFO_OUT");
    c
}

fn run_config(dir: &Path, name: &str, text: &str) -> Output {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    bin().arg("--out").arg(dir.join("out")).arg("run").arg(&path).output().unwrap()
}

fn read_report(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_rows(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn psf_run_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "psf.cfg", PSF_NM);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = read_report(&dir.path().join("out/psf-nm.json"));
    for key in ["schema_version", "config", "best_x", "best_f", "n_evals", "n_iterations", "termination", "wall_seconds"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert!(report["best_f"].as_f64().unwrap() <= 1e-6);

    let (header, rows) = csv_rows(&dir.path().join("out/psf-nm.csv"));
    assert_eq!(header, ["eval_index", "f", "best_f", "x_1", "x_2", "x_3", "x_4"]);
    assert_eq!(rows.len() as u64, report["n_evals"].as_u64().unwrap());
    for w in rows.windows(2) {
        assert!(w[1][0] > w[0][0]);
        assert!(w[1][2] <= w[0][2]);
    }
}

#[test]
fn report_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_config(dir.path(), "he.cfg", HE_NM).status.success());
    let report = read_report(&dir.path().join("out/he-nm.json"));
    let echoed: BTreeMap<String, String> = serde_json::from_value(report["config"].clone()).unwrap();
    assert_eq!(RunConfig::from_pairs(echoed).unwrap(), RunConfig::parse(HE_NM).unwrap());
    let e = report["best_f"].as_f64().unwrap();
    assert!((e + 2.85420849703).abs() < 1e-8, "{e}");
    assert!(report["n_evals"].as_u64().unwrap() <= 600);
}

#[test]
fn malformed_config_exits_2_naming_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "bad.cfg", &HE_NM.replace("atom.z = 2", "atom.z = helium"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("atom.z"));

    let out = run_config(dir.path(), "bad2.cfg", &format!("{HE_NM}basis.colour = red\n"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("basis.colour"));

    let missing = bin().args(["run", "/nonexistent/config.cfg"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn invalid_atom_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "odd.cfg", &HE_NM.replace("atom.electrons = 2", "atom.electrons = 3"));
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn unknown_suite_exits_2() {
    let out = bin().args(["suite", "table9"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["suite", "table3", "--method", "gradient-descent"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn listings() {
    let out = bin().arg("list-methods").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().collect::<Vec<_>>(), ["powell-cd", "nelder-mead", "pattern-search", "rbf"]);
    let out = bin().arg("list-suites").output().unwrap();
    let names: Vec<String> = String::from_utf8(out.stdout)
        .unwrap()
        .lines()
        .map(|l| l.split_whitespace().next().unwrap().to_string())
        .collect();
    assert_eq!(names, ["table1", "table2", "table3", "table4", "table5", "be8"]);
}

#[test]
fn suite_table3_nm_and_env_out() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("NSTO_DFO_OUT", dir.path())
        .args(["suite", "table3", "--method", "nelder-mead", "--jobs", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("nelder-mead")).collect();
    assert_eq!(rows.len(), 5);
    for r in rows {
        let de: f64 = r.split_whitespace().last().unwrap().parse().unwrap();
        assert!(de < 1e-8, "{r}");
    }
    assert!(dir.path().join("table3/table3_He_nelder-mead.csv").exists());
}

#[test]
fn repeated_rbf_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = PSF_NM.replace("nelder-mead", "rbf").replace("psf-nm", "psf-rbf") + "method.budget = 200\nmethod.seed = 3\n";
    assert!(run_config(dir.path(), "a.cfg", &cfg).status.success());
    let first = fs::read(dir.path().join("out/psf-rbf.csv")).unwrap();
    assert!(run_config(dir.path(), "b.cfg", &cfg).status.success());
    assert_eq!(first, fs::read(dir.path().join("out/psf-rbf.csv")).unwrap());
}
