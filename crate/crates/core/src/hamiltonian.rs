//! Waveguide-mediated couplings and the atomic Hamiltonians.
//!
//! After eliminating the waveguide photons, atoms m and n exchange
//! excitations coherently with strength `J_mn = √(Γ_mΓ_n) sin(k0|x_m − x_n|)`
//! and dissipatively with `γ_mn = √(Γ_mΓ_n) cos(k0(x_m − x_n))`. The
//! non-Hermitian effective Hamiltonian combines both:
//! `H_eff = −i Σ_mn √(Γ_mΓ_n) e^{ik0|x_m − x_n|} σ_m†σ_n = H_c − i D̂`.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::linalg::{c, unit_phase, I};
use crate::model::{DriveSpec, ValidatedSystem};
use crate::subspace::{ladder_operator, number_operator, quadratic_form, Basis, OperatorRep};

/// Coherent (`J_mn`) and dissipative (`γ_mn`) coupling matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrices {
    pub coherent: Array2<f64>,
    pub dissipative: Array2<f64>,
}

impl CouplingMatrices {
    pub fn n_atoms(&self) -> usize {
        self.coherent.nrows()
    }

    /// Copy with every off-diagonal dissipative element zeroed, leaving only
    /// independent atomic decay.
    pub fn without_collective_dissipation(&self) -> CouplingMatrices {
        let mut d = self.dissipative.clone();
        for ((i, j), v) in d.indexed_iter_mut() {
            if i != j {
                *v = 0.0;
            }
        }
        CouplingMatrices {
            coherent: self.coherent.clone(),
            dissipative: d,
        }
    }
}

fn pair_scale(rates: &[f64], m: usize, n: usize) -> f64 {
    (rates[m] * rates[n]).sqrt()
}

pub fn coupling_matrices(system: &ValidatedSystem) -> CouplingMatrices {
    let x = system.positions();
    let r = system.rates();
    let n = x.len();
    let mut coherent = Array2::zeros((n, n));
    let mut dissipative = Array2::zeros((n, n));
    for m in 0..n {
        for k in m..n {
            let g = pair_scale(&r, m, k);
            // sin is odd in the separation, cos even: both fixed by |Δx|.
            let ph = unit_phase((x[m] - x[k]).abs());
            let j = if m == k { 0.0 } else { g * ph.im };
            coherent[[m, k]] = j;
            coherent[[k, m]] = j;
            dissipative[[m, k]] = g * ph.re;
            dissipative[[k, m]] = g * ph.re;
        }
    }
    CouplingMatrices { coherent, dissipative }
}

/// Single-particle coefficient matrix of H_eff:
/// `−i √(Γ_mΓ_n) e^{ik0|x_n − x_m|}`.
pub fn effective_coefficients(system: &ValidatedSystem) -> Array2<C64> {
    let x = system.positions();
    let r = system.rates();
    let n = x.len();
    Array2::from_shape_fn((n, n), |(m, k)| {
        -I * pair_scale(&r, m, k) * unit_phase((x[k] - x[m]).abs())
    })
}

pub fn effective_hamiltonian(system: &ValidatedSystem, basis: &Arc<Basis>) -> OperatorRep {
    quadratic_form(basis, &effective_coefficients(system))
}

/// H_c = Σ J_mn σ_m†σ_n.
pub fn coherent_hamiltonian(couplings: &CouplingMatrices, basis: &Arc<Basis>) -> OperatorRep {
    quadratic_form(basis, &couplings.coherent.mapv(c))
}

/// D̂ = Σ γ_mn σ_m†σ_n.
pub fn dissipation_form(couplings: &CouplingMatrices, basis: &Arc<Basis>) -> OperatorRep {
    quadratic_form(basis, &couplings.dissipative.mapv(c))
}

/// Hermitian Hamiltonian in the frame rotating at the drive frequency:
/// `−Δ N + H_c + ε(σ_p + σ_p†)`.
pub fn driven_hamiltonian(system: &ValidatedSystem, drive: &DriveSpec, basis: &Arc<Basis>) -> OperatorRep {
    driven_hamiltonian_with(&coupling_matrices(system), system.medium(), drive, basis)
}

pub(crate) fn driven_hamiltonian_with(
    couplings: &CouplingMatrices,
    medium: usize,
    drive: &DriveSpec,
    basis: &Arc<Basis>,
) -> OperatorRep {
    let mut h = coherent_hamiltonian(couplings, basis).matrix;
    if drive.delta != 0.0 {
        h = h - number_operator(basis).matrix.mapv(|z| z * drive.delta);
    }
    if drive.epsilon != 0.0 {
        let sp = ladder_operator(basis, medium).expect("medium index is valid");
        let x = &sp.matrix + &sp.dagger().matrix;
        h = h + x.mapv(|z| z * drive.epsilon);
    }
    OperatorRep {
        matrix: h,
        basis: basis.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dagger, max_abs, max_abs_real};
    use crate::model::{canonical_three_atom, validate, AtomSpec, SystemConfig};
    use crate::subspace::restrict;
    use ndarray::array;
    use rand::{Rng, SeedableRng};

    fn canonical(g: f64) -> ValidatedSystem {
        canonical_three_atom(g, 1.0, 0.25).unwrap().validate().unwrap()
    }

    #[test]
    fn canonical_couplings() {
        let g = 0.01;
        let cm = coupling_matrices(&canonical(g));
        // atoms in position order: mirror(−1/4), medium(0), mirror(1/4)
        assert!((cm.coherent[[0, 1]] - g.sqrt()).abs() < 1e-15);
        assert!((cm.coherent[[1, 2]] - g.sqrt()).abs() < 1e-15);
        assert_eq!(cm.dissipative[[0, 2]], -1.0);
        assert_eq!(cm.dissipative[[0, 1]], 0.0);
        assert_eq!(cm.dissipative[[1, 1]], g);
        for i in 0..3 {
            assert_eq!(cm.coherent[[i, i]], 0.0);
        }
    }

    #[test]
    fn single_atom_heff() {
        let sys = validate(&SystemConfig {
            atoms: vec![AtomSpec::medium(0.3, 0.7)],
        })
        .unwrap();
        let b = Basis::enumerate(1, None).unwrap();
        let h = effective_hamiltonian(&sys, &b);
        assert_eq!(h.matrix, array![[c(0.0), c(0.0)], [c(0.0), -I * 0.7]]);
    }

    #[test]
    fn single_excitation_block_matches_mode_form() {
        let (g, gg) = (0.01, 1.0);
        let sys = canonical(g);
        let b = Basis::enumerate(3, None).unwrap();
        let h1 = restrict(&effective_hamiltonian(&sys, &b), 1).unwrap();
        // bitmask order 001 (mirror 1), 010 (medium), 100 (mirror 2)
        // transform to {e_p, D, B} with D = (e1+e2)/√2, B = (e1−e2)/√2
        let r = 0.5f64.sqrt();
        let u = array![[c(0.0), c(r), c(r)], [c(1.0), c(0.0), c(0.0)], [c(0.0), c(r), c(-r)]];
        let hm = dagger(&u).dot(&h1).dot(&u);
        let j = (2.0 * gg * g).sqrt();
        let want = array![
            [-I * g, c(j), c(0.0)],
            [c(j), c(0.0), c(0.0)],
            [c(0.0), c(0.0), -I * 2.0 * gg]
        ];
        assert!(max_abs((&hm - &want).view()) < 1e-14);
    }

    #[test]
    fn driven_hamiltonian_properties() {
        let sys = canonical(0.2);
        let b = Basis::enumerate(3, None).unwrap();
        let hc = coherent_hamiltonian(&coupling_matrices(&sys), &b);
        let h0 = driven_hamiltonian(&sys, &DriveSpec::undriven(), &b);
        assert_eq!(h0.matrix, hc.matrix);
        let hd = driven_hamiltonian(&sys, &DriveSpec::new(0.0, 0.37).unwrap(), &b);
        assert!(restrict(&hd, 1).is_ok());
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..10 {
            let d = DriveSpec::new(rng.random_range(0.0..2.0), rng.random_range(-3.0..3.0)).unwrap();
            let h = driven_hamiltonian(&sys, &d, &b).matrix;
            assert!(max_abs((&h - &dagger(&h)).view()) < 1e-15);
        }
    }

    #[test]
    fn dissipative_matrix_is_psd() {
        use ndarray_linalg::{Eigh, UPLO};
        let mut rng = rand::rngs::StdRng::seed_from_u64(5);
        for _ in 0..50 {
            let n = rng.random_range(2..6);
            let atoms = (0..n)
                .map(|i| AtomSpec {
                    position: rng.random_range(-1.0..1.0),
                    rate: rng.random_range(0.01..10.0),
                    role: if i == 0 {
                        crate::model::Role::Medium
                    } else {
                        crate::model::Role::Mirror
                    },
                })
                .collect();
            let sys = validate(&SystemConfig { atoms }).unwrap();
            let cm = coupling_matrices(&sys);
            let (ev, _) = cm.dissipative.eigh(UPLO::Lower).unwrap();
            let scale = max_abs_real(cm.dissipative.view());
            assert!(ev.iter().all(|&e| e > -1e-12 * scale), "{ev}");
            assert_eq!(cm.coherent, cm.coherent.t());
        }
    }
}
