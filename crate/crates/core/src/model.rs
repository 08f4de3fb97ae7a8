//! System geometry and drive parameters.
//!
//! Units: positions in resonant wavelengths λ0 (so `k0·x = 2π·x`), rates in
//! units of the mirror decay rate Γ, ħ = v_g = 1.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Medium,
    Mirror,
}

/// One two-level atom side-coupled to the waveguide.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomSpec {
    /// Position along the waveguide in units of λ0.
    pub position: f64,
    /// Decay rate into the waveguide, Γ_n.
    pub rate: f64,
    pub role: Role,
}

impl AtomSpec {
    pub fn mirror(position: f64, rate: f64) -> Self {
        AtomSpec {
            position,
            rate,
            role: Role::Mirror,
        }
    }

    pub fn medium(position: f64, rate: f64) -> Self {
        AtomSpec {
            position,
            rate,
            role: Role::Medium,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub atoms: Vec<AtomSpec>,
}

/// Coherent probe on the medium atom: amplitude ε and detuning Δ = ω_d − ω_0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub epsilon: f64,
    pub delta: f64,
}

impl DriveSpec {
    pub fn new(epsilon: f64, delta: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::Domain(format!("drive amplitude must be >= 0, got {epsilon}")));
        }
        if !delta.is_finite() {
            return Err(Error::Domain(format!("detuning must be finite, got {delta}")));
        }
        Ok(DriveSpec { epsilon, delta })
    }

    pub fn undriven() -> Self {
        DriveSpec {
            epsilon: 0.0,
            delta: 0.0,
        }
    }
}

/// A configuration that passed validation. Atoms are sorted by position and
/// the medium atom is located by role.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedSystem {
    atoms: Vec<AtomSpec>,
    medium: usize,
    rate_unit: f64,
}

impl ValidatedSystem {
    pub fn atoms(&self) -> &[AtomSpec] {
        &self.atoms
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
    }

    /// Index of the medium atom in position order.
    pub fn medium(&self) -> usize {
        self.medium
    }

    pub fn medium_rate(&self) -> f64 {
        self.atoms[self.medium].rate
    }

    pub fn positions(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.position).collect()
    }

    pub fn rates(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.rate).collect()
    }

    pub fn mirror_indices(&self) -> Vec<usize> {
        (0..self.atoms.len()).filter(|&i| i != self.medium).collect()
    }

    /// Reference rate for tolerances: the largest mirror rate, or the medium
    /// rate when there are no mirrors.
    pub fn rate_unit(&self) -> f64 {
        self.rate_unit
    }

    /// Same geometry with the medium decay rate replaced.
    pub fn with_medium_rate(&self, gamma: f64) -> Result<ValidatedSystem> {
        let mut cfg = self.to_config();
        cfg.atoms[self.medium].rate = gamma;
        validate(&cfg)
    }

    pub fn to_config(&self) -> SystemConfig {
        SystemConfig {
            atoms: self.atoms.clone(),
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<ValidatedSystem> {
        validate(self)
    }
}

/// Check every invariant and collect all violations.
pub fn validate(config: &SystemConfig) -> Result<ValidatedSystem> {
    let mut problems = Vec::new();
    if config.atoms.is_empty() {
        problems.push("system has no atoms".to_string());
    }
    let n_medium = config.atoms.iter().filter(|a| a.role == Role::Medium).count();
    if n_medium != 1 {
        problems.push(format!("exactly one medium atom required, found {n_medium}"));
    }
    for (i, a) in config.atoms.iter().enumerate() {
        if !(a.rate > 0.0) || !a.rate.is_finite() {
            problems.push(format!("atom {i}: rate must be positive and finite, got {}", a.rate));
        }
        if !a.position.is_finite() {
            problems.push(format!("atom {i}: position must be finite, got {}", a.position));
        }
    }
    let mut atoms = config.atoms.clone();
    atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
    for w in atoms.windows(2) {
        if w[0].position == w[1].position {
            problems.push(format!("duplicate atom position {}", w[0].position));
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let medium = atoms.iter().position(|a| a.role == Role::Medium).unwrap();
    let rate_unit = atoms
        .iter()
        .filter(|a| a.role == Role::Mirror)
        .map(|a| a.rate)
        .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))))
        .unwrap_or(atoms[medium].rate);
    Ok(ValidatedSystem {
        atoms,
        medium,
        rate_unit,
    })
}

/// Medium atom at the origin between two mirror atoms half a wavelength
/// apart, the left mirror a distance `d` from the medium atom.
pub fn canonical_three_atom(gamma: f64, big_gamma: f64, d: f64) -> Result<SystemConfig> {
    if !(gamma > 0.0) || !(big_gamma > 0.0) {
        return Err(Error::Domain(format!(
            "rates must be positive (gamma = {gamma}, Gamma = {big_gamma})"
        )));
    }
    if !(d > 0.0 && d < 0.5) {
        return Err(Error::Domain(format!("mirror offset d must lie in (0, 1/2), got {d}")));
    }
    Ok(SystemConfig {
        atoms: vec![
            AtomSpec::mirror(-d, big_gamma),
            AtomSpec::medium(0.0, gamma),
            AtomSpec::mirror(0.5 - d, big_gamma),
        ],
    })
}

/// Two mirrors of `n` atoms each at ±(2k+1)/4, k = 0..n, medium at the
/// origin. Every mirror-medium distance is an odd multiple of λ0/4 and every
/// mirror-mirror distance a multiple of λ0/2.
pub fn n_atom_mirror_config(n: usize, gamma: f64, big_gamma: f64) -> Result<SystemConfig> {
    if n < 1 {
        return Err(Error::Domain("each mirror needs at least one atom".into()));
    }
    if !(gamma > 0.0) || !(big_gamma > 0.0) {
        return Err(Error::Domain(format!(
            "rates must be positive (gamma = {gamma}, Gamma = {big_gamma})"
        )));
    }
    let mut atoms = Vec::with_capacity(2 * n + 1);
    for k in (0..n).rev() {
        atoms.push(AtomSpec::mirror(-((2 * k + 1) as f64) / 4.0, big_gamma));
    }
    atoms.push(AtomSpec::medium(0.0, gamma));
    for k in 0..n {
        atoms.push(AtomSpec::mirror((2 * k + 1) as f64 / 4.0, big_gamma));
    }
    Ok(SystemConfig { atoms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_quarter_wave() {
        let s = canonical_three_atom(0.01, 1.0, 0.25).unwrap().validate().unwrap();
        assert_eq!(s.positions(), vec![-0.25, 0.0, 0.25]);
        assert_eq!(s.medium(), 1);
        assert_eq!(s.rates(), vec![1.0, 0.01, 1.0]);
    }

    #[test]
    fn canonical_offset_medium() {
        let s = canonical_three_atom(0.01, 1.0, 0.10).unwrap().validate().unwrap();
        let p = s.positions();
        assert!((p[0] + 0.10).abs() < 1e-15 && p[1] == 0.0 && (p[2] - 0.40).abs() < 1e-15);
        assert!((p[2] - p[0] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn canonical_rejects_boundary() {
        assert!(matches!(canonical_three_atom(1.0, 1.0, 0.5), Err(Error::Domain(_))));
        assert!(matches!(canonical_three_atom(1.0, 1.0, 0.0), Err(Error::Domain(_))));
        assert!(canonical_three_atom(0.0, 1.0, 0.25).is_err());
    }

    #[test]
    fn n_atom_reduces_to_canonical() {
        let a = n_atom_mirror_config(1, 0.01, 1.0).unwrap().validate().unwrap();
        let b = canonical_three_atom(0.01, 1.0, 0.25).unwrap().validate().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn n_atom_positions() {
        let s = n_atom_mirror_config(2, 0.01, 1.0).unwrap().validate().unwrap();
        assert_eq!(s.positions(), vec![-0.75, -0.25, 0.0, 0.25, 0.75]);
        assert_eq!(s.medium(), 2);
        assert!(matches!(n_atom_mirror_config(0, 0.01, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn canonical_is_mirror_symmetric() {
        let cfg = canonical_three_atom(0.3, 1.0, 0.25).unwrap();
        let mut reflected = cfg.clone();
        for a in &mut reflected.atoms {
            a.position = -a.position;
        }
        assert_eq!(cfg.validate().unwrap(), reflected.validate().unwrap());
    }

    #[test]
    fn validation_collects_every_problem() {
        let cfg = SystemConfig {
            atoms: vec![
                AtomSpec::medium(0.0, 1.0),
                AtomSpec::medium(0.3, 0.0),
                AtomSpec::mirror(0.3, 1.0),
            ],
        };
        match cfg.validate() {
            Err(Error::Validation(p)) => {
                assert!(p.iter().any(|m| m.contains("exactly one medium atom")));
                assert!(p.iter().any(|m| m.contains("rate must be positive")));
                assert!(p.iter().any(|m| m.contains("duplicate")));
            }
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn drive_rejects_negative_amplitude() {
        assert!(DriveSpec::new(-1e-3, 0.0).is_err());
        assert!(DriveSpec::new(0.0, 0.2).is_ok());
    }

    #[test]
    fn config_json_schema() {
        let json = r#"{"atoms":[{"position":-0.25,"rate":1.0,"role":"mirror"},
                                {"position":0.0,"rate":0.01,"role":"medium"},
                                {"position":0.25,"rate":1.0,"role":"mirror"}]}"#;
        let cfg: SystemConfig = serde_json::from_str(json).unwrap();
        assert_eq!(cfg, canonical_three_atom(0.01, 1.0, 0.25).unwrap());
    }
}
