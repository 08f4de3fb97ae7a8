//! Scenario files: parse one, run it and sweep it over the medium decay rate.
//! Output goes to a temporary directory unless WQED_OUT is set.

use std::path::PathBuf;

use wqed::scenario::{self, Axis, RunOptions};

const SCENARIO: &str = r#"{
  "name": "demo",
  "system": {"canonical": {"gamma": 0.02, "d": 0.25}},
  "drive": {"delta": {"linspace": [-2, 2, 9]}, "delta_unit": "polariton", "epsilon": [1e-3], "epsilon_unit": "gamma"},
  "outputs": ["g2_zero", "oracle"]
}"#;

fn main() -> wqed::Result<()> {
    for (name, description) in scenario::list_scenarios() {
        println!("{name:<24} {description}");
    }
    let default = std::env::temp_dir().join("wqed-example");
    let out_dir = RunOptions::resolve_out_dir(None);
    let out_dir = if std::env::var_os(scenario::OUT_ENV).is_some() {
        out_dir
    } else {
        default
    };
    std::fs::create_dir_all(&out_dir)?;
    let file: PathBuf = out_dir.join("demo.json");
    std::fs::write(&file, SCENARIO)?;
    let opts = RunOptions {
        out_dir: out_dir.clone(),
        seed: None,
    };
    let path = file.to_string_lossy();
    let m = scenario::run(&path, &opts)?;
    println!("run: {:?}, {} oracle failures", m.files, m.oracle_failures);
    let m = scenario::sweep(&path, Axis::Gamma, &[0.01, 0.02, 0.05], &opts)?;
    println!("sweep: {:?}, {} failures", m.files, m.failures.len());
    println!("written to {}", out_dir.display());
    Ok(())
}
