//! Scenario files, built-in figure scenarios, runs and parameter sweeps.
//!
//! A scenario file holds one scenario object or `{"scenarios": [...]}`.
//! Outputs are CSV tables (17 significant digits) plus a JSON run manifest.

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::collective::{collective_modes, polariton_census, two_excitation_census};
use crate::correlations::{emission_operator, g1, g2_regression, g2_zero_analytic, polariton_detunings};
use crate::error::{Error, Result};
use crate::lindblad::{build_liouvillian, default_truncation, steady_or_stationary};
use crate::model::{canonical_three_atom, n_atom_mirror_config, AtomSpec, DriveSpec, SystemConfig, ValidatedSystem};
use crate::oracle::{eq4_reduction_check, g2_cross_validation, steady_state_check, OracleReport};
use crate::spectral::spectrum_report;
use crate::subspace::Basis;

/// Environment variable that sets the output directory when `--out-dir` is
/// not given.
pub const OUT_ENV: &str = "WQED_OUT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    Values(Vec<f64>),
    Linspace { linspace: (f64, f64, usize) },
    Logspace { logspace: (f64, f64, usize) },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::Values(ref v) => v.clone(),
            Grid::Linspace { linspace: (a, b, n) } => match n {
                0 => vec![],
                1 => vec![a],
                _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
            },
            Grid::Logspace { logspace: (a, b, n) } => Grid::Linspace {
                linspace: (a.ln(), b.ln(), n),
            }
            .values()
            .into_iter()
            .map(f64::exp)
            .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemSpec {
    /// Medium atom between two mirrors half a wavelength apart.
    Canonical {
        gamma: f64,
        #[serde(rename = "Gamma", default = "one")]
        big_gamma: f64,
        #[serde(default = "quarter")]
        d: f64,
    },
    /// Two mirrors of `n` atoms each.
    NAtom {
        n: usize,
        gamma: f64,
        #[serde(rename = "Gamma", default = "one")]
        big_gamma: f64,
    },
    Atoms(Vec<AtomSpec>),
}

fn one() -> f64 {
    1.0
}

fn quarter() -> f64 {
    0.25
}

impl SystemSpec {
    pub fn build(&self) -> Result<ValidatedSystem> {
        match *self {
            SystemSpec::Canonical { gamma, big_gamma, d } => canonical_three_atom(gamma, big_gamma, d)?.validate(),
            SystemSpec::NAtom { n, gamma, big_gamma } => n_atom_mirror_config(n, gamma, big_gamma)?.validate(),
            SystemSpec::Atoms(ref a) => SystemConfig { atoms: a.clone() }.validate(),
        }
    }
}

/// Unit in which detunings are given.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaUnit {
    #[default]
    Absolute,
    /// Multiples of √(2Γγ).
    Coupling,
    /// Multiples of |Re λ| of the lowest single-excitation polariton, so that
    /// −1 sits exactly on it.
    Polariton,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonUnit {
    #[default]
    Absolute,
    /// Multiples of the medium decay rate γ.
    Gamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveGrid {
    pub delta: Grid,
    #[serde(default)]
    pub delta_unit: DeltaUnit,
    pub epsilon: Grid,
    #[serde(default)]
    pub epsilon_unit: EpsilonUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Spectrum,
    G2Zero,
    G2Tau,
    Modes,
    Census,
    Oracle,
}

impl Output {
    fn stem(self) -> &'static str {
        match self {
            Output::Spectrum => "spectrum",
            Output::G2Zero => "g2_zero",
            Output::G2Tau => "g2_tau",
            Output::Modes => "modes",
            Output::Census => "census",
            Output::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum G2Method {
    Regression,
    Analytic,
}

fn both_methods() -> Vec<G2Method> {
    vec![G2Method::Regression, G2Method::Analytic]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub system: SystemSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<Grid>,
    /// Medium decay rates for the spectrum output.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_grid: Option<Grid>,
    pub outputs: Vec<Output>,
    #[serde(default = "both_methods")]
    pub g2_methods: Vec<G2Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_excitations: Option<usize>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScenarioFile {
    Many { scenarios: Vec<Scenario> },
    One(Scenario),
}

fn nonempty(name: &str, what: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Config(format!("scenario {name}: {what} grid is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config(format!(
            "scenario {name}: {what} grid has non-finite values"
        )));
    }
    Ok(())
}

impl Scenario {
    /// Check grids and output requirements without running anything.
    pub fn check(&self) -> Result<()> {
        let n = &self.name;
        if n.is_empty() {
            return Err(Error::Config("scenario name is empty".into()));
        }
        if self.outputs.is_empty() {
            return Err(Error::Config(format!("scenario {n}: no outputs requested")));
        }
        self.system.build()?;
        let needs_drive = self
            .outputs
            .iter()
            .any(|o| matches!(o, Output::G2Zero | Output::G2Tau | Output::Oracle));
        if needs_drive {
            let d = self
                .drive
                .as_ref()
                .ok_or_else(|| Error::Config(format!("scenario {n}: drive grid required")))?;
            nonempty(n, "delta", &d.delta.values())?;
            nonempty(n, "epsilon", &d.epsilon.values())?;
        }
        if self.outputs.contains(&Output::G2Tau) {
            let t = self
                .tau
                .as_ref()
                .ok_or_else(|| Error::Config(format!("scenario {n}: tau grid required")))?;
            let t = t.values();
            nonempty(n, "tau", &t)?;
            if t[0] < 0.0 || t.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::Config(format!("scenario {n}: tau grid must ascend from >= 0")));
            }
        }
        if self.outputs.contains(&Output::Spectrum) {
            let g = self
                .gamma_grid
                .as_ref()
                .ok_or_else(|| Error::Config(format!("scenario {n}: gamma_grid required")))?;
            nonempty(n, "gamma", &g.values())?;
        }
        if self.g2_methods.is_empty() {
            return Err(Error::Config(format!("scenario {n}: no g2 methods")));
        }
        Ok(())
    }

    /// Requested excitation cap, else the default for the system size.
    pub fn truncation(&self, sys: &ValidatedSystem) -> Option<usize> {
        self.max_excitations.or_else(|| default_truncation(sys.n_atoms()))
    }

    /// Absolute detunings of the drive grid for `sys`.
    pub fn deltas(&self, sys: &ValidatedSystem) -> Result<Vec<f64>> {
        let Some(d) = self.drive.as_ref() else {
            return Ok(Vec::new());
        };
        let scale = match d.delta_unit {
            DeltaUnit::Absolute => 1.0,
            DeltaUnit::Coupling => (2.0 * sys.rate_unit() * sys.medium_rate()).sqrt(),
            DeltaUnit::Polariton => polariton_detunings(sys)?
                .first()
                .map(|x| x.abs())
                .ok_or_else(|| Error::Domain("no polariton detuning".into()))?,
        };
        Ok(d.delta.values().into_iter().map(|x| x * scale).collect())
    }

    /// Absolute drive amplitudes of the drive grid for `sys`.
    pub fn epsilons(&self, sys: &ValidatedSystem) -> Vec<f64> {
        let Some(d) = self.drive.as_ref() else {
            return Vec::new();
        };
        let scale = match d.epsilon_unit {
            EpsilonUnit::Absolute => 1.0,
            EpsilonUnit::Gamma => sys.medium_rate(),
        };
        d.epsilon.values().into_iter().map(|x| x * scale).collect()
    }
}

/// Parse a scenario file (one scenario or a `scenarios` list).
pub fn parse_scenarios(text: &str) -> Result<Vec<Scenario>> {
    let list = match serde_json::from_str::<ScenarioFile>(text) {
        Ok(ScenarioFile::Many { scenarios }) => scenarios,
        Ok(ScenarioFile::One(s)) => vec![s],
        Err(_) => {
            // re-parse as a single scenario for a precise message
            vec![serde_json::from_str::<Scenario>(text).map_err(|e| Error::Config(e.to_string()))?]
        }
    };
    check_all(&list)?;
    Ok(list)
}

fn check_all(list: &[Scenario]) -> Result<()> {
    if list.is_empty() {
        return Err(Error::Config("no scenarios".into()));
    }
    let mut seen = HashSet::new();
    for s in list {
        if !seen.insert(&s.name) {
            return Err(Error::Config(format!("duplicate scenario name {}", s.name)));
        }
        s.check()?;
    }
    Ok(())
}

fn canonical(gamma: f64, d: f64) -> SystemSpec {
    SystemSpec::Canonical {
        gamma,
        big_gamma: 1.0,
        d,
    }
}

fn lin(a: f64, b: f64, n: usize) -> Grid {
    Grid::Linspace { linspace: (a, b, n) }
}

fn blank(name: &str, description: &str, system: SystemSpec, outputs: Vec<Output>) -> Scenario {
    Scenario {
        name: name.into(),
        description: description.into(),
        system,
        drive: None,
        tau: None,
        gamma_grid: None,
        outputs,
        g2_methods: both_methods(),
        max_excitations: None,
    }
}

fn fig3ab(name: &str, description: &str, gamma: f64) -> Scenario {
    Scenario {
        drive: Some(DriveGrid {
            delta: lin(-3.0, 3.0, 121),
            delta_unit: DeltaUnit::Coupling,
            epsilon: Grid::Values(vec![0.1, 1.0, 10.0]),
            epsilon_unit: EpsilonUnit::Gamma,
        }),
        ..blank(name, description, canonical(gamma, 0.25), vec![Output::G2Zero])
    }
}

/// Named scenarios pinned to the figure parameters.
pub fn builtin(name: &str) -> Option<Vec<Scenario>> {
    let one = |s: Scenario| Some(vec![s]);
    match name {
        "fig2" => one(Scenario {
            gamma_grid: Some(lin(0.001, 8.0, 200)),
            ..blank(
                "fig2",
                "single- and two-excitation eigenvalues vs gamma in [0.001, 8] Gamma",
                canonical(0.01, 0.25),
                vec![Output::Spectrum],
            )
        }),
        "fig3a" => one(fig3ab(
            "fig3a",
            "g2(0) vs detuning, gamma = 0.01, eps in {0.1, 1, 10} gamma",
            0.01,
        )),
        "fig3b" => one(fig3ab(
            "fig3b",
            "g2(0) vs detuning, gamma = Gamma, eps in {0.1, 1, 10} gamma",
            1.0,
        )),
        "fig3c" => one(Scenario {
            drive: Some(DriveGrid {
                delta: lin(-3.0, 3.0, 41),
                delta_unit: DeltaUnit::Polariton,
                epsilon: Grid::Values(vec![1e-3]),
                epsilon_unit: EpsilonUnit::Gamma,
            }),
            ..blank(
                "fig3c",
                "analytic vs master-equation g2(0), gamma = 0.01 (sweep gamma for the other curves)",
                canonical(0.01, 0.25),
                vec![Output::G2Zero, Output::Oracle],
            )
        }),
        "fig3d" => Some(
            [(0.01, 0.25), (0.01, 0.1), (0.02, 0.25), (0.02, 0.1)]
                .iter()
                .map(|&(g, d)| Scenario {
                    drive: Some(DriveGrid {
                        delta: Grid::Values(vec![-1.0]),
                        delta_unit: DeltaUnit::Polariton,
                        epsilon: Grid::Values(vec![1e-3]),
                        epsilon_unit: EpsilonUnit::Gamma,
                    }),
                    tau: Some(lin(0.0, 3000.0, 3001)),
                    ..blank(
                        &format!("fig3d_gamma{g}_d{d}"),
                        "g2(tau) at the lower polariton",
                        canonical(g, d),
                        vec![Output::G2Tau],
                    )
                })
                .collect(),
        ),
        "n-atom" => one(Scenario {
            drive: Some(DriveGrid {
                delta: lin(-3.0, 3.0, 241),
                delta_unit: DeltaUnit::Polariton,
                epsilon: Grid::Values(vec![1e-3]),
                epsilon_unit: EpsilonUnit::Gamma,
            }),
            g2_methods: vec![G2Method::Analytic],
            ..blank(
                "n-atom",
                "two mirrors of N = 2 atoms: modes, census and analytic g2(0) (sweep N)",
                SystemSpec::NAtom {
                    n: 2,
                    gamma: 0.01,
                    big_gamma: 1.0,
                },
                vec![Output::Modes, Output::Census, Output::G2Zero],
            )
        }),
        _ => None,
    }
}

pub fn builtin_names() -> &'static [&'static str] {
    &["fig2", "fig3a", "fig3b", "fig3c", "fig3d", "n-atom"]
}

/// One line per built-in scenario: name and description.
pub fn list_scenarios() -> Vec<(String, String)> {
    builtin_names()
        .iter()
        .flat_map(|n| builtin(n).unwrap())
        .map(|s| (s.name, s.description))
        .collect()
}

/// Load scenarios from a file path, or by built-in name when no such file
/// exists. Returns the scenarios, a label for output files and the bytes
/// hashed into the manifest.
pub fn load(source: &str) -> Result<(Vec<Scenario>, String, Vec<u8>)> {
    let path = Path::new(source);
    if path.is_file() {
        let bytes = std::fs::read(path)?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Config(e.to_string()))?;
        let list = parse_scenarios(&text)?;
        let label = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run").to_string();
        return Ok((list, label, bytes));
    }
    match builtin(source) {
        Some(list) => {
            check_all(&list)?;
            let bytes = serde_json::to_vec(&list)?;
            Ok((list, source.to_string(), bytes))
        }
        None => Err(Error::Config(format!("no scenario file or built-in named {source}"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "NaN".into(),
            Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) => t.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))?;
        }
        w.flush()?;
        Ok(())
    }

    fn prefixed(&self, column: &str, value: Cell) -> Table {
        let mut header = vec![column.to_string()];
        header.extend(self.header.iter().cloned());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut row = vec![value.clone()];
                row.extend(r.iter().cloned());
                row
            })
            .collect();
        Table { header, rows }
    }
}

/// Everything a scenario produces, before it is written to disk.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub name: String,
    pub tables: Vec<(Output, Table)>,
    pub oracle: Vec<OracleReport>,
}

fn num(x: f64) -> Cell {
    Cell::Num(x)
}

fn spectrum_table(sys: &ValidatedSystem, grid: &[f64]) -> Result<Table> {
    let mut t = Table::new(&[
        "gamma",
        "re_lp",
        "im_lp",
        "re_lm",
        "im_lm",
        "re_l3",
        "im_l3",
        "re_bp",
        "im_bp",
        "re_bm",
        "im_bm",
        "re_b3",
        "im_b3",
        "max_dev",
        "beta_disc_sign_change",
        "error",
    ]);
    for r in spectrum_report(sys, grid)? {
        let mut row = vec![num(r.gamma)];
        for z in r.lambda.iter().chain(r.beta.iter()) {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        row.push(num(r.max_dev));
        row.push(Cell::Int(r.beta_sign_change as i64));
        row.push(Cell::Text(r.error.unwrap_or_default()));
        t.rows.push(row);
    }
    Ok(t)
}

struct DrivePoint {
    epsilon: f64,
    delta: f64,
}

fn drive_points(s: &Scenario, sys: &ValidatedSystem) -> Result<Vec<DrivePoint>> {
    let deltas = s.deltas(sys)?;
    Ok(s.epsilons(sys)
        .into_iter()
        .flat_map(|epsilon| deltas.iter().map(move |&delta| DrivePoint { epsilon, delta }))
        .collect())
}

fn g2_zero_table(s: &Scenario, sys: &ValidatedSystem) -> Result<Table> {
    let points = drive_points(s, sys)?;
    let regression = s.g2_methods.contains(&G2Method::Regression);
    let analytic = s.g2_methods.contains(&G2Method::Analytic);
    let basis = Basis::enumerate(sys.n_atoms(), s.truncation(sys))?;
    let sig = emission_operator(sys, &basis)?;
    let rows: Vec<Result<Vec<Cell>>> = points
        .par_iter()
        .map(|p| {
            let (mut g1v, mut reg) = (f64::NAN, f64::NAN);
            if regression {
                let l = build_liouvillian(sys, &DriveSpec::new(p.epsilon, p.delta)?, &basis)?;
                let rho = steady_or_stationary(&l)?;
                g1v = g1(&rho, &sig);
                reg = g2_regression(&l, &rho, &sig, &[0.0])?.values[0];
            }
            let an = if analytic {
                match g2_zero_analytic(sys, p.delta) {
                    Ok(v) => v,
                    Err(Error::DivisionUnderflow { .. }) => f64::INFINITY,
                    Err(e) => return Err(e),
                }
            } else {
                f64::NAN
            };
            Ok(vec![num(p.epsilon), num(p.delta), num(g1v), num(reg), num(an)])
        })
        .collect();
    let mut t = Table::new(&["epsilon", "delta", "g1", "g2_regression", "g2_analytic"]);
    for r in rows {
        t.rows.push(r?);
    }
    Ok(t)
}

fn g2_tau_table(s: &Scenario, sys: &ValidatedSystem) -> Result<Table> {
    let points = drive_points(s, sys)?;
    let taus = s.tau.as_ref().expect("checked").values();
    let basis = Basis::enumerate(sys.n_atoms(), s.truncation(sys))?;
    let sig = emission_operator(sys, &basis)?;
    let curves: Vec<Result<Vec<Vec<Cell>>>> = points
        .par_iter()
        .map(|p| {
            let l = build_liouvillian(sys, &DriveSpec::new(p.epsilon, p.delta)?, &basis)?;
            let rho = steady_or_stationary(&l)?;
            let c = g2_regression(&l, &rho, &sig, &taus)?;
            Ok(c.tau
                .iter()
                .zip(&c.values)
                .map(|(&t, &g)| vec![num(p.epsilon), num(p.delta), num(t), num(g)])
                .collect())
        })
        .collect();
    let mut t = Table::new(&["epsilon", "delta", "tau", "g2"]);
    for c in curves {
        t.rows.extend(c?);
    }
    Ok(t)
}

fn modes_table(sys: &ValidatedSystem) -> Result<Table> {
    let m = collective_modes(sys)?;
    let mut t = Table::new(&["index", "label", "re_eigenvalue", "im_eigenvalue", "coupling"]);
    for (i, mode) in m.modes.iter().enumerate() {
        let label = serde_json::to_value(mode.label)?
            .as_str()
            .unwrap_or_default()
            .to_string();
        t.rows.push(vec![
            Cell::Int(i as i64),
            Cell::Text(label),
            num(mode.eigenvalue.0),
            num(mode.eigenvalue.1),
            num(mode.coupling),
        ]);
    }
    Ok(t)
}

fn census_table(sys: &ValidatedSystem) -> Result<Table> {
    let mut t = Table::new(&["kind", "n_states", "bright", "dark", "delta_numeric"]);
    let m = two_excitation_census(sys)?;
    t.rows.push(vec![
        Cell::Text("mirror".into()),
        Cell::Int(m.n_states as i64),
        Cell::Int(m.bright as i64),
        Cell::Int(m.dark as i64),
        num(f64::NAN),
    ]);
    let p = polariton_census(sys)?;
    t.rows.push(vec![
        Cell::Text("polariton".into()),
        Cell::Int(p.n_states as i64),
        Cell::Int(
            p.eigenvalues
                .iter()
                .filter(|z| z.1.abs() > 1e-10 * sys.rate_unit())
                .count() as i64,
        ),
        Cell::Int(
            p.eigenvalues
                .iter()
                .filter(|z| z.1.abs() <= 1e-10 * sys.rate_unit())
                .count() as i64,
        ),
        num(p.delta_numeric.unwrap_or(f64::NAN)),
    ]);
    Ok(t)
}

fn oracle_reports(s: &Scenario, sys: &ValidatedSystem) -> Result<Vec<OracleReport>> {
    let mut out = Vec::new();
    if let SystemSpec::Canonical { gamma, big_gamma, d } = s.system {
        out.push(eq4_reduction_check(gamma, big_gamma, d)?);
    }
    let deltas = s.deltas(sys)?;
    for eps in s.epsilons(sys) {
        if sys.n_atoms() == 3 {
            for &delta in &deltas {
                let label = format!("{} eps={eps:.6e} delta={delta:.6e}", s.name);
                out.push(steady_state_check(&label, sys, &DriveSpec::new(eps, delta)?)?);
            }
        }
        out.extend(g2_cross_validation(
            &format!("{} eps={eps:.6e}", s.name),
            sys,
            &deltas,
            eps,
        )?);
    }
    Ok(out)
}

/// Compute every requested output of one scenario.
pub fn execute(s: &Scenario) -> Result<ScenarioResult> {
    s.check()?;
    let sys = s.system.build()?;
    let mut tables = Vec::new();
    let mut oracle = Vec::new();
    for &o in &s.outputs {
        match o {
            Output::Spectrum => tables.push((o, spectrum_table(&sys, &s.gamma_grid.as_ref().unwrap().values())?)),
            Output::G2Zero => tables.push((o, g2_zero_table(s, &sys)?)),
            Output::G2Tau => tables.push((o, g2_tau_table(s, &sys)?)),
            Output::Modes => tables.push((o, modes_table(&sys)?)),
            Output::Census => tables.push((o, census_table(&sys)?)),
            Output::Oracle => oracle = oracle_reports(s, &sys)?,
        }
    }
    Ok(ScenarioResult {
        name: s.name.clone(),
        tables,
        oracle,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub scenario: String,
    pub error: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub label: String,
    pub command: String,
    pub input_sha256: String,
    pub version: String,
    pub threads: usize,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub files: Vec<String>,
    pub failures: Vec<Failure>,
    pub oracle_failures: usize,
}

impl Manifest {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.oracle_failures == 0
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
}

impl RunOptions {
    /// `--out-dir` if given, else `$WQED_OUT`, else `./wqed-out`.
    pub fn resolve_out_dir(flag: Option<PathBuf>) -> PathBuf {
        flag.or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("wqed-out"))
    }
}

fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn write_result(dir: &Path, prefix: &str, r: &ScenarioResult, files: &mut Vec<String>) -> Result<usize> {
    for (o, t) in &r.tables {
        let name = format!("{prefix}_{}.csv", o.stem());
        t.write_csv(&dir.join(&name))?;
        files.push(name);
    }
    if !r.oracle.is_empty() {
        let name = format!("{prefix}_oracle.jsonl");
        let body: String = r.oracle.iter().map(|x| x.to_json_line() + "\n").collect();
        std::fs::write(dir.join(&name), body)?;
        files.push(name);
    }
    Ok(r.oracle.iter().filter(|x| !x.pass).count())
}

fn write_manifest(dir: &Path, m: &Manifest) -> Result<()> {
    std::fs::write(
        dir.join(format!("{}_manifest.json", m.label)),
        serde_json::to_string_pretty(m)? + "\n",
    )?;
    Ok(())
}

/// Run every scenario from a file or built-in name. Numerical failures are
/// recorded in the manifest rather than returned.
pub fn run(source: &str, opts: &RunOptions) -> Result<Manifest> {
    let start = Instant::now();
    let (list, label, bytes) = load(source)?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let results: Vec<Result<ScenarioResult>> = list.par_iter().map(execute).collect();
    let mut files = Vec::new();
    let mut failures = Vec::new();
    let mut oracle_failures = 0;
    for (s, r) in list.iter().zip(results) {
        match r {
            Ok(r) => oracle_failures += write_result(&opts.out_dir, &r.name, &r, &mut files)?,
            Err(e) if e.is_config() => return Err(e),
            Err(e) => failures.push(Failure {
                scenario: s.name.clone(),
                error: e.to_string(),
            }),
        }
    }
    let m = Manifest {
        label,
        command: "run".into(),
        input_sha256: sha256_hex(&[&bytes]),
        version: env!("CARGO_PKG_VERSION").into(),
        threads: rayon::current_num_threads(),
        seed: opts.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        files,
        failures,
        oracle_failures,
    };
    write_manifest(&opts.out_dir, &m)?;
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Gamma,
    Epsilon,
    Delta,
    D,
    N,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gamma" => Axis::Gamma,
            "epsilon" => Axis::Epsilon,
            "delta" => Axis::Delta,
            "d" => Axis::D,
            "N" | "n" => Axis::N,
            _ => {
                return Err(Error::Config(format!(
                    "unknown sweep axis {s} (gamma, epsilon, delta, d, N)"
                )))
            }
        })
    }
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::Gamma => "gamma",
            Axis::Epsilon => "epsilon",
            Axis::Delta => "delta",
            Axis::D => "d",
            Axis::N => "N",
        }
    }
}

/// Parse a comma-separated list of numbers.
pub fn parse_values(csv_list: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = csv_list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Config(format!("bad sweep value {s:?}")))
        })
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    Ok(v)
}

/// Copy of `base` with one parameter replaced. Epsilon and delta values are
/// in the scenario's own units.
pub fn with_axis(base: &Scenario, axis: Axis, value: f64) -> Result<Scenario> {
    let mut s = base.clone();
    let bad = |what: &str| Error::Config(format!("axis {} does not apply to {what} system", axis.name()));
    match axis {
        Axis::Gamma => match &mut s.system {
            SystemSpec::Canonical { gamma, .. } | SystemSpec::NAtom { gamma, .. } => *gamma = value,
            SystemSpec::Atoms(atoms) => {
                for a in atoms.iter_mut().filter(|a| a.role == crate::model::Role::Medium) {
                    a.rate = value;
                }
            }
        },
        Axis::Epsilon | Axis::Delta => {
            let d = s
                .drive
                .as_mut()
                .ok_or_else(|| Error::Config(format!("{}: no drive grid", base.name)))?;
            let g = Grid::Values(vec![value]);
            if axis == Axis::Epsilon {
                d.epsilon = g;
            } else {
                d.delta = g;
            }
        }
        Axis::D => match &mut s.system {
            SystemSpec::Canonical { d, .. } => *d = value,
            _ => return Err(bad("a non-canonical")),
        },
        Axis::N => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(Error::Config(format!("N must be a positive integer, got {value}")));
            }
            let n = value as usize;
            s.system = match s.system {
                SystemSpec::Canonical { gamma, big_gamma, .. } | SystemSpec::NAtom { gamma, big_gamma, .. } => {
                    SystemSpec::NAtom { n, gamma, big_gamma }
                }
                SystemSpec::Atoms(_) => return Err(bad("an explicit-atom")),
            };
        }
    }
    Ok(s)
}

/// Run every base scenario once per axis value, in parallel, and write one
/// table per output with a leading column holding the swept value.
pub fn sweep(source: &str, axis: Axis, values: &[f64], opts: &RunOptions) -> Result<Manifest> {
    let start = Instant::now();
    if values.is_empty() {
        return Err(Error::Config("sweep needs at least one value".into()));
    }
    let (list, label, bytes) = load(source)?;
    let label = format!("{label}_sweep_{}", axis.name());
    std::fs::create_dir_all(&opts.out_dir)?;
    let mut files = Vec::new();
    let mut failures = Vec::new();
    let mut oracle_failures = 0;
    for base in &list {
        let variants: Vec<Scenario> = values
            .iter()
            .map(|&v| with_axis(base, axis, v))
            .collect::<Result<_>>()?;
        let results: Vec<Result<ScenarioResult>> = variants.par_iter().map(execute).collect();
        let mut merged: Vec<(Output, Table)> = Vec::new();
        let mut reports = Vec::new();
        for ((&v, variant), r) in values.iter().zip(&variants).zip(results) {
            match r {
                Ok(r) => {
                    for (o, t) in r.tables {
                        let t = t.prefixed(axis.name(), num(v));
                        match merged.iter_mut().find(|(m, _)| *m == o) {
                            Some((_, acc)) => acc.rows.extend(t.rows),
                            None => merged.push((o, t)),
                        }
                    }
                    reports.extend(r.oracle);
                }
                Err(e) => failures.push(Failure {
                    scenario: format!("{} {}={v}", variant.name, axis.name()),
                    error: e.to_string(),
                }),
            }
        }
        let prefix = format!("{}_sweep_{}", base.name, axis.name());
        let r = ScenarioResult {
            name: prefix.clone(),
            tables: merged,
            oracle: reports,
        };
        oracle_failures += write_result(&opts.out_dir, &prefix, &r, &mut files)?;
    }
    let args = format!(
        "{}:{}",
        axis.name(),
        values.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",")
    );
    let m = Manifest {
        label,
        command: "sweep".into(),
        input_sha256: sha256_hex(&[&bytes, args.as_bytes()]),
        version: env!("CARGO_PKG_VERSION").into(),
        threads: rayon::current_num_threads(),
        seed: opts.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
        files,
        failures,
        oracle_failures,
    };
    write_manifest(&opts.out_dir, &m)?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(lin(0.0, 1.0, 3).values(), vec![0.0, 0.5, 1.0]);
        let g: Grid = serde_json::from_str(r#"{"logspace": [0.01, 1.0, 3]}"#).unwrap();
        let v = g.values();
        assert!((v[1] - 0.1).abs() < 1e-15);
        let g: Grid = serde_json::from_str("[1, 2]").unwrap();
        assert_eq!(g.values(), vec![1.0, 2.0]);
    }

    #[test]
    fn builtins_are_valid() {
        for n in builtin_names() {
            let list = builtin(n).unwrap();
            check_all(&list).unwrap();
            let text = serde_json::to_string(&list[0]).unwrap();
            assert_eq!(parse_scenarios(&text).unwrap()[0], list[0]);
        }
        assert_eq!(list_scenarios().len(), 9);
    }

    #[test]
    fn config_errors() {
        assert!(parse_scenarios("{").unwrap_err().is_config());
        let mut s = builtin("fig3a").unwrap().remove(0);
        s.drive.as_mut().unwrap().epsilon = Grid::Values(vec![]);
        assert!(matches!(s.check(), Err(Error::Config(_))));
        let dup = serde_json::json!({"scenarios": [builtin("fig2").unwrap()[0], builtin("fig2").unwrap()[0]]});
        assert!(parse_scenarios(&dup.to_string()).is_err());
        assert!(parse_values("").is_err());
        assert!(parse_values("1, 2,x").is_err());
        assert!("theta".parse::<Axis>().is_err());
    }

    #[test]
    fn axis_substitution() {
        let base = builtin("fig3c").unwrap().remove(0);
        let s = with_axis(&base, Axis::N, 3.0).unwrap();
        assert_eq!(
            s.system,
            SystemSpec::NAtom {
                n: 3,
                gamma: 0.01,
                big_gamma: 1.0
            }
        );
        assert!(with_axis(&base, Axis::N, 1.5).is_err());
        let s = with_axis(&base, Axis::Gamma, 0.1).unwrap();
        assert!(matches!(s.system, SystemSpec::Canonical { gamma, .. } if gamma == 0.1));
    }

    #[test]
    fn csv_formatting() {
        assert_eq!(num(0.01).render(), "1.0000000000000000e-2");
        assert_eq!(num(f64::INFINITY).render(), "inf");
    }
}
