use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn wqed(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wqed"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const SMALL: &str = r#"{
  "name": "small",
  "system": {"canonical": {"gamma": 0.1, "d": 0.25}},
  "drive": {"delta": {"linspace": [-2, 2, 5]}, "delta_unit": "coupling", "epsilon": [1e-3], "epsilon_unit": "gamma"},
  "tau": [0, 1, 5],
  "outputs": ["g2_zero", "g2_tau", "oracle"]
}"#;

fn write_small(dir: &TempDir) -> String {
    let p = dir.path().join("small.json");
    fs::write(&p, SMALL).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn list_scenarios_names_every_builtin() {
    let tmp = TempDir::new().unwrap();
    let o = wqed(&["list-scenarios"], tmp.path());
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for name in ["fig2", "fig3a", "fig3b", "fig3c", "fig3d_gamma0.01_d0.25", "n-atom"] {
        assert!(text.contains(name), "{name} missing from\n{text}");
    }
}

#[test]
fn run_file_writes_tables_and_manifest() {
    let tmp = TempDir::new().unwrap();
    let file = write_small(&tmp);
    let out = tmp.path().join("out");
    let o = wqed(&["run", &file], &out);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let g2 = fs::read_to_string(out.join("small_g2_zero.csv")).unwrap();
    assert!(g2.starts_with("epsilon,delta,g1,g2_regression,g2_analytic"));
    assert_eq!(g2.lines().count(), 6);
    let tau = fs::read_to_string(out.join("small_g2_tau.csv")).unwrap();
    assert_eq!(tau.lines().count(), 16);
    let oracle = fs::read_to_string(out.join("small_oracle.jsonl")).unwrap();
    for line in oracle.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["pass"], true, "{line}");
    }
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("small_manifest.json")).unwrap()).unwrap();
    assert_eq!(m["command"], "run");
    assert_eq!(m["input_sha256"].as_str().unwrap().len(), 64);
    assert_eq!(m["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let file = write_small(&tmp);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&wqed(&["run", &file, "--threads", "1"], &a)), 0);
    assert_eq!(code(&wqed(&["run", &file, "--seed", "9"], &b)), 0);
    for name in ["small_g2_zero.csv", "small_g2_tau.csv", "small_oracle.jsonl"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn env_var_sets_output_directory() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("from-env");
    let o = Command::new(env!("CARGO_BIN_EXE_wqed"))
        .args(["run", "n-atom"])
        .env("WQED_OUT", &out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("n-atom_census.csv").exists());
    assert!(out.join("n-atom_modes.csv").exists());
}

#[test]
fn builtin_spectrum_records_the_exceptional_point() {
    let tmp = TempDir::new().unwrap();
    let o = wqed(&["run", "fig2"], tmp.path());
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(tmp.path().join("fig2_spectrum.csv")).unwrap();
    assert_eq!(text.lines().count(), 201);
    let last = text.lines().last().unwrap();
    assert!(last.contains("defective"), "{last}");
}

#[test]
fn sweep_over_mirror_size() {
    let tmp = TempDir::new().unwrap();
    let o = wqed(&["sweep", "n-atom", "--axis", "N", "--values", "1,2,3"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let census = fs::read_to_string(tmp.path().join("n-atom_sweep_N_census.csv")).unwrap();
    assert_eq!(
        census.lines().next().unwrap(),
        "N,kind,n_states,bright,dark,delta_numeric"
    );
    assert_eq!(census.lines().count(), 7);
}

#[test]
fn sweep_with_negative_values() {
    let tmp = TempDir::new().unwrap();
    let file = write_small(&tmp);
    let o = wqed(&["sweep", &file, "--axis", "delta", "--values", "-0.3,0.3"], tmp.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn config_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let file = write_small(&tmp);
    let bad_json = tmp.path().join("bad.json");
    fs::write(&bad_json, "{ not json").unwrap();
    let unknown = tmp.path().join("unknown.json");
    fs::write(&unknown, SMALL.replace("\"tau\"", "\"tua\"")).unwrap();
    let cases: Vec<Vec<String>> = vec![
        vec![
            "sweep".into(),
            file.clone(),
            "--axis".into(),
            "gamma".into(),
            "--values".into(),
            "".into(),
        ],
        vec![
            "sweep".into(),
            file.clone(),
            "--axis".into(),
            "colour".into(),
            "--values".into(),
            "1".into(),
        ],
        vec![
            "sweep".into(),
            file,
            "--axis".into(),
            "gamma".into(),
            "--values".into(),
            "0.1,x".into(),
        ],
        vec!["run".into(), bad_json.to_string_lossy().into()],
        vec!["run".into(), unknown.to_string_lossy().into()],
        vec!["run".into(), "no-such-scenario".into()],
    ];
    for args in cases {
        let a: Vec<&str> = args.iter().map(String::as_str).collect();
        let o = wqed(&a, tmp.path());
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn output_needing_another_geometry_is_a_config_error() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path().join("n.json");
    fs::write(
        &p,
        r#"{"name": "n", "system": {"n_atom": {"n": 2, "gamma": 0.01}}, "gamma_grid": [0.1], "outputs": ["spectrum"]}"#,
    )
    .unwrap();
    let o = wqed(&["run", &p.to_string_lossy()], tmp.path());
    assert_eq!(code(&o), 1);
}

#[test]
fn failed_sweep_point_exits_two() {
    let tmp = TempDir::new().unwrap();
    let file = write_small(&tmp);
    let o = wqed(&["sweep", &file, "--axis", "d", "--values", "0.25,0.7"], tmp.path());
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("small_sweep_d_manifest.json")).unwrap()).unwrap();
    assert_eq!(m["failures"].as_array().unwrap().len(), 1);
}
