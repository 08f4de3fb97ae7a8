//! Bright and dark collective modes of the mirror atoms.

use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, QR};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::effective_coefficients;
use crate::linalg::{binomial, c, inner, norm2};
use crate::model::ValidatedSystem;
use crate::spectral::eigen_pairs;
use crate::subspace::{quadratic_form, restrict, Basis};

/// |Im λ| or coupling (in units of the mirror rate) below which a mode is
/// dark or decoupled.
pub const DARK_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeLabel {
    Bright,
    DarkCoupled,
    DarkDecoupled,
}

#[derive(Debug, Clone, Serialize)]
pub struct Mode {
    /// Amplitudes over the mirror atoms, in position order.
    #[serde(skip)]
    pub coefficients: Array1<C64>,
    /// Eigenvalue of the mirror-only single-excitation Hamiltonian.
    pub eigenvalue: (f64, f64),
    /// Strength of the medium-atom exchange term with this mode.
    pub coupling: f64,
    pub label: ModeLabel,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModeSet {
    /// Atom indices (position order) of the mirrors.
    pub mirrors: Vec<usize>,
    pub modes: Vec<Mode>,
}

impl ModeSet {
    pub fn count(&self, label: ModeLabel) -> usize {
        self.modes.iter().filter(|m| m.label == label).count()
    }

    pub fn coupled_dark(&self) -> Option<&Mode> {
        self.modes.iter().find(|m| m.label == ModeLabel::DarkCoupled)
    }

    /// Σ coupling²
    pub fn coupling_sum_sq(&self) -> f64 {
        self.modes.iter().map(|m| m.coupling * m.coupling).sum()
    }

    /// Largest |⟨u_i|u_j⟩ − δ_ij| among the mode coefficient vectors.
    pub fn orthonormality_error(&self) -> f64 {
        let mut e = 0.0f64;
        for (i, a) in self.modes.iter().enumerate() {
            for (j, b) in self.modes.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                e = e.max((inner(a.coefficients.view(), b.coefficients.view()) - c(want)).norm());
            }
        }
        e
    }
}

fn submatrix(m: &Array2<C64>, idx: &[usize]) -> Array2<C64> {
    m.select(Axis(0), idx).select(Axis(1), idx)
}

/// Unitary matrix whose first column is the unit vector `a` (up to phase).
fn unitary_with_first(a: &Array1<C64>) -> Result<Array2<C64>> {
    let g = a.len();
    let k = (0..g).max_by(|&i, &j| a[i].norm().total_cmp(&a[j].norm())).unwrap();
    let mut m = Array2::zeros((g, g));
    m.column_mut(0).assign(a);
    let mut col = 1;
    for j in (0..g).filter(|&j| j != k) {
        m[[j, col]] = c(1.0);
        col += 1;
    }
    orthonormal_columns(&m)
}

fn orthonormal_columns(v: &Array2<C64>) -> Result<Array2<C64>> {
    let (q, _) = v.qr()?;
    Ok(q)
}

/// Diagonalise the mirror-only single-excitation Hamiltonian and measure
/// each mode's exchange coupling with the medium atom.
///
/// Degenerate eigenvalues are grouped and orthonormalised; inside the dark
/// group the basis is rotated so that a single mode carries the whole medium
/// coupling.
pub fn collective_modes(system: &ValidatedSystem) -> Result<ModeSet> {
    let mirrors = system.mirror_indices();
    if mirrors.len() < 2 {
        return Err(Error::Domain("collective modes need at least two mirror atoms".into()));
    }
    let unit = system.rate_unit();
    let full = effective_coefficients(system);
    let hm = submatrix(&full, &mirrors);
    let row: Array1<C64> = mirrors.iter().map(|&j| full[[system.medium(), j]]).collect();
    let (vals, vecs) = hm.eig()?;

    // group eigenvalues that coincide to the labelling tolerance
    let tol = DARK_THRESHOLD * unit;
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for k in 0..vals.len() {
        match groups.iter_mut().find(|g| (vals[g[0]] - vals[k]).norm() <= 1e3 * tol) {
            Some(g) => g.push(k),
            None => groups.push(vec![k]),
        }
    }
    let mut modes = Vec::new();
    for g in groups {
        let lambda = g.iter().map(|&k| vals[k]).sum::<C64>() / g.len() as f64;
        let lambda = C64::new(
            if lambda.re.abs() <= tol { 0.0 } else { lambda.re },
            if lambda.im.abs() <= tol { 0.0 } else { lambda.im },
        );
        let q = orthonormal_columns(&vecs.select(Axis(1), &g))?;
        // couplings of the orthonormal group basis, c_k = Σ_j row_j q_jk
        let cvec = row.dot(&q);
        let cnorm = norm2(cvec.view());
        let bright = lambda.im.abs() > tol;
        let rotated = if !bright && cnorm > tol && g.len() > 1 {
            q.dot(&unitary_with_first(&cvec.mapv(|z| z.conj() / cnorm))?)
        } else {
            q
        };
        let basis_cols: Vec<Array1<C64>> = rotated.columns().into_iter().map(|u| u.to_owned()).collect();
        for u in basis_cols {
            let mut coupling = row.dot(&u).norm();
            if coupling <= tol {
                coupling = 0.0;
            }
            let label = if bright {
                ModeLabel::Bright
            } else if coupling > tol {
                ModeLabel::DarkCoupled
            } else {
                ModeLabel::DarkDecoupled
            };
            modes.push(Mode {
                coefficients: u,
                eigenvalue: (lambda.re, lambda.im),
                coupling,
                label,
            });
        }
    }
    Ok(ModeSet { mirrors, modes })
}

#[derive(Debug, Clone, Serialize)]
pub struct MirrorCensus {
    pub n_states: usize,
    pub bright: usize,
    pub dark: usize,
    pub eigenvalues: Vec<(f64, f64)>,
}

fn two_excitation_block(coeff: &Array2<C64>) -> Result<Array2<C64>> {
    let n = coeff.nrows();
    let basis: Arc<Basis> = Basis::enumerate(n, Some(2.min(n)))?;
    restrict(&quadratic_form(&basis, coeff), 2)
}

/// Bright/dark count of the two-excitation eigenstates of the mirror atoms
/// alone (medium atom removed).
pub fn two_excitation_census(system: &ValidatedSystem) -> Result<MirrorCensus> {
    let mirrors = system.mirror_indices();
    if mirrors.len() < 2 {
        return Err(Error::Domain(
            "two-excitation census needs at least two mirror atoms".into(),
        ));
    }
    let hm = submatrix(&effective_coefficients(system), &mirrors);
    let h2 = two_excitation_block(&hm)?;
    let vals = eigen_pairs(&h2)?.eigenvalues;
    let tol = DARK_THRESHOLD * system.rate_unit();
    let bright = vals.iter().filter(|z| z.im.abs() > tol).count();
    Ok(MirrorCensus {
        n_states: vals.len(),
        bright,
        dark: vals.len() - bright,
        eigenvalues: vals.iter().map(|z| (z.re, z.im)).collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct PolaritonCensus {
    pub n_states: usize,
    pub eigenvalues: Vec<(f64, f64)>,
    /// Probability that the medium atom is excited, per eigenstate.
    pub medium_weight: Vec<f64>,
    /// The narrow pair `±δ − iκ`: the shifted states with the smallest
    /// linewidth.
    pub narrow_pair: Option<[(f64, f64); 2]>,
    pub delta_numeric: Option<f64>,
    /// Unshifted state with the largest linewidth.
    pub broad_state: Option<(f64, f64)>,
}

/// Full two-excitation spectrum of mirrors plus medium atom.
pub fn polariton_census(system: &ValidatedSystem) -> Result<PolaritonCensus> {
    let n = system.n_atoms();
    if n < 2 {
        return Err(Error::Domain("polariton census needs at least two atoms".into()));
    }
    let basis = Basis::enumerate(n, Some(2))?;
    let h2 = restrict(&quadratic_form(&basis, &effective_coefficients(system)), 2)?;
    let raw = eigen_pairs(&h2)?;
    let off = basis.block(2)?.start;
    let pbit = 1u64 << system.medium();
    let weight: Vec<f64> = (0..raw.eigenvalues.len())
        .map(|k| {
            raw.right
                .column(k)
                .iter()
                .enumerate()
                .filter(|(i, _)| basis.states()[off + i] & pbit != 0)
                .map(|(_, z)| z.norm_sqr())
                .sum()
        })
        .collect();
    let tol = 1e-8 * system.rate_unit();
    let vals = &raw.eigenvalues;
    let shifted: Vec<usize> = (0..vals.len()).filter(|&k| vals[k].re.abs() > tol).collect();
    let narrow = shifted
        .iter()
        .copied()
        .min_by(|&a, &b| vals[a].im.abs().total_cmp(&vals[b].im.abs()));
    let (narrow_pair, delta_numeric) = match narrow {
        Some(k) => {
            let partner = shifted.iter().copied().filter(|&j| j != k).min_by(|&a, &b| {
                (vals[a] + vals[k].conj())
                    .norm()
                    .total_cmp(&(vals[b] + vals[k].conj()).norm())
            });
            let z = vals[k];
            let pair = partner.map(|j| {
                let (lo, hi) = if vals[j].re < z.re { (vals[j], z) } else { (z, vals[j]) };
                [(lo.re, lo.im), (hi.re, hi.im)]
            });
            (pair, Some(z.re.abs()))
        }
        None => (None, None),
    };
    let broad_state = (0..vals.len())
        .filter(|&k| vals[k].re.abs() <= tol)
        .max_by(|&a, &b| vals[a].im.abs().total_cmp(&vals[b].im.abs()))
        .map(|k| (vals[k].re, vals[k].im));
    Ok(PolaritonCensus {
        n_states: vals.len(),
        eigenvalues: vals.iter().map(|z| (z.re, z.im)).collect(),
        medium_weight: weight,
        narrow_pair,
        delta_numeric,
        broad_state,
    })
}

/// Expected mirror-only census `(bright, dark)` for two mirrors of `n`
/// atoms each.
pub fn expected_mirror_census(n: usize) -> (usize, usize) {
    if n == 1 {
        return (1, 0);
    }
    (2 * n, binomial(2 * n, 2) - 2 * n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{canonical_three_atom, n_atom_mirror_config};
    use crate::spectral::closed_form_two;

    fn mirrors(n: usize, g: f64) -> ValidatedSystem {
        n_atom_mirror_config(n, g, 1.0).unwrap().validate().unwrap()
    }

    #[test]
    fn single_pair_of_mirrors() {
        let g = 0.01;
        let m = collective_modes(&mirrors(1, g)).unwrap();
        assert_eq!(m.modes.len(), 2);
        let b = m.modes.iter().find(|x| x.label == ModeLabel::Bright).unwrap();
        assert!((b.eigenvalue.1 + 2.0).abs() < 1e-14 && b.coupling == 0.0);
        assert!((b.coefficients[0] + b.coefficients[1]).norm() < 1e-14);
        let d = m.coupled_dark().unwrap();
        assert!((d.coupling - (2.0 * g).sqrt()).abs() < 1e-14);
        assert!((d.coefficients[0] - d.coefficients[1]).norm() < 1e-14);
        assert!(m.orthonormality_error() < 1e-14);
    }

    #[test]
    fn coupled_dark_strength_grows_with_n() {
        let g = 0.01;
        for n in 1..=3 {
            let m = collective_modes(&mirrors(n, g)).unwrap();
            assert_eq!(m.count(ModeLabel::Bright), 1);
            assert_eq!(m.count(ModeLabel::DarkCoupled), 1);
            assert_eq!(m.count(ModeLabel::DarkDecoupled), 2 * n - 2);
            let want = (2.0 * n as f64 * g).sqrt();
            assert!((m.coupled_dark().unwrap().coupling - want).abs() < 1e-10 * want);
            assert!((m.coupling_sum_sq() - want * want).abs() < 1e-10 * want * want);
            assert!(m.orthonormality_error() < 1e-12);
            for mode in m.modes.iter().filter(|x| x.label != ModeLabel::Bright) {
                assert!(mode.eigenvalue.0.abs() < 1e-12 && mode.eigenvalue.1.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn mirror_census_counts() {
        for n in 1..=3 {
            let c = two_excitation_census(&mirrors(n, 0.01)).unwrap();
            assert_eq!(c.n_states, binomial(2 * n, 2));
            assert_eq!((c.bright, c.dark), expected_mirror_census(n), "n = {n}");
        }
        let c = two_excitation_census(&mirrors(1, 0.01)).unwrap();
        assert!((c.eigenvalues[0].1 + 2.0).abs() < 1e-14);
    }

    #[test]
    fn polariton_census_counts() {
        let g = 0.01;
        let one = polariton_census(&canonical_three_atom(g, 1.0, 0.25).unwrap().validate().unwrap()).unwrap();
        assert_eq!(one.n_states, 3);
        let (bp, bm, b3) = closed_form_two(g, 1.0);
        for want in [bp, bm, b3] {
            assert!(one
                .eigenvalues
                .iter()
                .any(|&(r, i)| (C64::new(r, i) - want).norm() < 1e-12));
        }
        let two = polariton_census(&mirrors(2, g)).unwrap();
        assert_eq!(two.n_states, 10);
        let delta = two.delta_numeric.unwrap();
        assert!(delta > 0.0);
        let pair = two.narrow_pair.unwrap();
        assert!((pair[0].0 + pair[1].0).abs() < 1e-10);
        assert!(two.broad_state.unwrap().1 < -1.0);
        assert_eq!(polariton_census(&mirrors(3, g)).unwrap().n_states, 21);
    }
}
