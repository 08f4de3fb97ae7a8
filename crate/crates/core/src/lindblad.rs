//! Driven master equation on the atomic basis.
//!
//! `L ρ = −i[H, ρ] + Σ_mn γ_mn (2 σ_m ρ σ_n† − σ_n†σ_m ρ − ρ σ_n†σ_m)` acting on
//! column-stacked density matrices, `vec(ρ)[i + j·d] = ρ[i, j]`.

use std::sync::Arc;

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eigh, Inverse, SVD, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::{coupling_matrices, dissipation_form, driven_hamiltonian_with, CouplingMatrices};
use crate::linalg::{c, dagger, max_abs, max_abs1, solve_refined, trace, unvec_cols, vec_cols, I};
use crate::model::{DriveSpec, ValidatedSystem};
use crate::subspace::Basis;

/// Second-smallest over largest singular value below which the steady state
/// is considered non-unique.
pub const UNIQUENESS_THRESHOLD: f64 = 1e-8;

/// Relative singular-value cutoff defining the numerical null space.
pub const NULL_SPACE_THRESHOLD: f64 = 1e-10;

/// Per-step relative tolerance of [`propagate`].
pub const PROPAGATION_RTOL: f64 = 1e-10;

/// Excitation cap for driven systems with more than three atoms.
pub const DEFAULT_MAX_EXCITATIONS: usize = 3;

/// Truncation used when none is requested: the full space up to three
/// atoms, [`DEFAULT_MAX_EXCITATIONS`] beyond.
pub fn default_truncation(n_atoms: usize) -> Option<usize> {
    (n_atoms > DEFAULT_MAX_EXCITATIONS).then_some(DEFAULT_MAX_EXCITATIONS)
}

#[derive(Debug, Clone)]
pub struct Superoperator {
    pub matrix: Array2<C64>,
    pub basis: Arc<Basis>,
    pub drive: DriveSpec,
}

impl Superoperator {
    /// Hilbert-space dimension `d` (the matrix is `d² × d²`).
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        unvec_cols(&self.matrix.dot(&vec_cols(rho)), self.dim())
    }

    /// Row functional `tr(L ·)`; zero for a trace-preserving generator.
    pub fn trace_functional(&self) -> Array1<C64> {
        let d = self.dim();
        let mut f = Array1::zeros(d * d);
        for i in 0..d {
            f = f + &self.matrix.row(i + i * d);
        }
        f
    }
}

pub fn build_liouvillian(system: &ValidatedSystem, drive: &DriveSpec, basis: &Arc<Basis>) -> Result<Superoperator> {
    build_liouvillian_with(&coupling_matrices(system), system.medium(), drive, basis)
}

/// Liouvillian from explicit coupling matrices, e.g. with collective
/// dissipation switched off.
pub fn build_liouvillian_with(
    couplings: &CouplingMatrices,
    medium: usize,
    drive: &DriveSpec,
    basis: &Arc<Basis>,
) -> Result<Superoperator> {
    if couplings.n_atoms() != basis.n_atoms() {
        return Err(Error::Domain(format!(
            "coupling matrices for {} atoms, basis for {}",
            couplings.n_atoms(),
            basis.n_atoms()
        )));
    }
    if medium >= basis.n_atoms() {
        return Err(Error::Domain(format!("medium index {medium} out of range")));
    }
    if basis.is_truncated() && drive.epsilon > 0.0 {
        log::warn!(
            "driving a basis truncated at {} excitations; error grows like (epsilon/gamma)^2",
            basis.max_excitations()
        );
    }
    let d = basis.dim();
    let h = driven_hamiltonian_with(couplings, medium, drive, basis).matrix;
    let k = &h - &dissipation_form(couplings, basis).matrix.mapv(|z| z * I);
    let mut l = Array2::<C64>::zeros((d * d, d * d));
    // −i K ρ  and  +i ρ K†
    for ((a, i), &kai) in k.indexed_iter() {
        if kai == c(0.0) {
            continue;
        }
        for b in 0..d {
            l[[a + b * d, i + b * d]] += -I * kai;
        }
        // (ρK†)[b, a] = Σ_i ρ[b, i] conj(K[a, i])
        for b in 0..d {
            l[[b + a * d, b + i * d]] += I * kai.conj();
        }
    }
    // 2 Σ γ_mn σ_m ρ σ_n†
    let pairs: Vec<Vec<(usize, usize)>> = (0..basis.n_atoms()).map(|n| basis.lowering_pairs(n)).collect();
    for (m, pm) in pairs.iter().enumerate() {
        for (n, pn) in pairs.iter().enumerate() {
            let g = couplings.dissipative[[m, n]];
            if g == 0.0 {
                continue;
            }
            for &(a, i) in pm {
                for &(b, j) in pn {
                    l[[a + b * d, i + j * d]] += c(2.0 * g);
                }
            }
        }
    }
    Ok(Superoperator {
        matrix: l,
        basis: basis.clone(),
        drive: *drive,
    })
}

#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub matrix: Array2<C64>,
    pub basis: Arc<Basis>,
}

impl DensityMatrix {
    /// `|g⟩⟨g|`
    pub fn ground(basis: &Arc<Basis>) -> Self {
        let mut m = Array2::zeros((basis.dim(), basis.dim()));
        m[[basis.ground(), basis.ground()]] = c(1.0);
        DensityMatrix {
            matrix: m,
            basis: basis.clone(),
        }
    }

    pub fn trace(&self) -> C64 {
        trace(&self.matrix)
    }

    /// `tr(A ρ)`
    pub fn expectation(&self, op: &Array2<C64>) -> C64 {
        op.dot(&self.matrix).diag().sum()
    }

    /// Excited-state population of one atom.
    pub fn excited_population(&self, atom: usize) -> f64 {
        let bit = 1u64 << atom;
        self.basis
            .states()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s & bit != 0)
            .map(|(i, _)| self.matrix[[i, i]].re)
            .sum()
    }

    /// Diagonal of ρ.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diag().iter().map(|z| z.re).collect()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = (&self.matrix + &dagger(&self.matrix)).mapv(|z| z * 0.5);
        let (ev, _) = herm.eigh(UPLO::Lower)?;
        Ok(ev.iter().copied().fold(f64::INFINITY, f64::min))
    }

    /// Hermitian within 1e-12, unit trace within 1e-10, eigenvalues above
    /// `-1e-10`.
    pub fn check(&self) -> Result<()> {
        let herm = max_abs((&self.matrix - &dagger(&self.matrix)).view());
        if herm > 1e-12 {
            return Err(Error::Domain(format!("density matrix not Hermitian ({herm:.3e})")));
        }
        let tr = self.trace();
        if (tr - c(1.0)).norm() > 1e-10 {
            return Err(Error::Domain(format!("density matrix trace {tr}")));
        }
        let min = self.min_eigenvalue()?;
        if min < -1e-10 {
            return Err(Error::Domain(format!("density matrix eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    fn normalised(matrix: Array2<C64>, basis: Arc<Basis>) -> Self {
        let mut m = (&matrix + &dagger(&matrix)).mapv(|z| z * 0.5);
        let tr = trace(&m).re;
        m.mapv_inplace(|z| z / tr);
        DensityMatrix { matrix: m, basis }
    }
}

fn singular_values(m: &Array2<C64>) -> Result<Array1<f64>> {
    let (_, s, _) = m.svd(false, false)?;
    Ok(s)
}

/// Unique steady state `L ρ = 0`, `tr ρ = 1`.
///
/// The singular values of L certify a one-dimensional null space; the state
/// itself comes from an LU solve with the trace condition replacing one
/// population equation, refined iteratively so the `O(ε⁴)` entries of weakly
/// driven states keep their relative accuracy.
pub fn steady_state(l: &Superoperator) -> Result<DensityMatrix> {
    let s = singular_values(&l.matrix)?;
    let n = s.len();
    let ratio = if n < 2 { f64::INFINITY } else { s[n - 2] / s[0] };
    if !(ratio > UNIQUENESS_THRESHOLD) {
        return Err(Error::DegenerateSteadyState { ratio });
    }
    let d = l.dim();
    let mut a = l.matrix.clone();
    let mut b = Array1::zeros(d * d);
    a.row_mut(0).fill(c(0.0));
    for i in 0..d {
        a[[0, i + i * d]] = c(1.0);
    }
    b[0] = c(1.0);
    let x = solve_refined(&a, &b, 3)?;
    Ok(DensityMatrix::normalised(unvec_cols(&x, d), l.basis.clone()))
}

/// Long-time limit of `e^{Lt} ρ0` for a generator whose null space may be
/// degenerate (e.g. decoupled dark modes).
///
/// With right and left null bases R and F, the spectral projector onto the
/// null space is `P0 = R (F†R)⁻¹ F†`; its image of ρ0 is refined by solving
/// `(L − P0) x = −P0 ρ0`.
pub fn stationary_state_from(l: &Superoperator, rho0: &DensityMatrix) -> Result<DensityMatrix> {
    let (u, s, vt) = l.matrix.svd(true, true)?;
    let (u, vt) = (u.expect("requested U"), vt.expect("requested Vt"));
    let cut = NULL_SPACE_THRESHOLD * s[0];
    let null: Vec<usize> = (0..s.len()).filter(|&k| s[k] <= cut).collect();
    if null.is_empty() {
        return Err(Error::Domain("generator has no stationary state".into()));
    }
    let r = vt.select(Axis(0), &null).t().mapv(|z| z.conj());
    let fh = u.select(Axis(1), &null).t().mapv(|z| z.conj());
    let p0 = r.dot(&fh.dot(&r).inv()?).dot(&fh);
    let target = p0.dot(&vec_cols(&rho0.matrix));
    let a = &l.matrix - &p0;
    let x = solve_refined(&a, &target.mapv(|z| -z), 2)?;
    Ok(DensityMatrix::normalised(unvec_cols(&x, l.dim()), l.basis.clone()))
}

/// Steady state, falling back to the long-time limit from the ground state
/// when dark modes make the null space degenerate.
pub fn steady_or_stationary(l: &Superoperator) -> Result<DensityMatrix> {
    match steady_state(l) {
        Err(Error::DegenerateSteadyState { .. }) => stationary_state_from(l, &DensityMatrix::ground(&l.basis)),
        other => other,
    }
}

// Dormand–Prince 5(4) tableau; the generator is autonomous so the nodes are unused.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy(y: &Array1<C64>, terms: &[(f64, &Array1<C64>)], h: f64) -> Array1<C64> {
    let mut out = y.clone();
    for &(a, k) in terms {
        out.scaled_add(c(a * h), k);
    }
    out
}

/// Integrate `ẏ = M y` with adaptive Dormand–Prince steps, returning `y` at
/// each time in `t_grid` (ascending, from ≥ 0; `y0` is taken at t = 0).
pub fn propagate_vec(m: &Array2<C64>, y0: &Array1<C64>, t_grid: &[f64], rtol: f64) -> Result<Vec<Array1<C64>>> {
    if t_grid.iter().any(|t| !t.is_finite() || *t < 0.0) || t_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Domain("time grid must be ascending and non-negative".into()));
    }
    let f = |y: &Array1<C64>| m.dot(y);
    let scale = max_abs(m.view()).max(f64::MIN_POSITIVE);
    let mut h = 0.1 / scale;
    let h_min = 1e-14 / scale;
    let mut t = 0.0;
    let mut y = y0.clone();
    let mut k1 = f(&y);
    let mut out = Vec::with_capacity(t_grid.len());
    for &target in t_grid {
        while t < target {
            let last = target - t <= h;
            let step = if last { target - t } else { h };
            let k2 = f(&axpy(&y, &[(A21, &k1)], step));
            let k3 = f(&axpy(&y, &[(A31, &k1), (A32, &k2)], step));
            let k4 = f(&axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step));
            let k5 = f(&axpy(&y, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)], step));
            let k6 = f(&axpy(
                &y,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                step,
            ));
            let y_new = axpy(&y, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)], step);
            let k7 = f(&y_new);
            let err = axpy(
                &Array1::zeros(y.len()),
                &[(E1, &k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)],
                step,
            );
            let tol = rtol * max_abs1(y.view()).max(max_abs1(y_new.view())).max(f64::MIN_POSITIVE);
            let ratio = max_abs1(err.view()) / tol;
            if ratio <= 1.0 {
                t = if last { target } else { t + step };
                y = y_new;
                k1 = k7;
            }
            let factor = if ratio == 0.0 {
                5.0
            } else {
                (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0)
            };
            if !(last && ratio <= 1.0) {
                h = step * factor;
            }
            if h < h_min {
                return Err(Error::StepUnderflow { t, h });
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// `ρ(t_k) = e^{L t_k} ρ0`.
pub fn propagate(l: &Superoperator, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
    let ys = propagate_vec(&l.matrix, &vec_cols(&rho0.matrix), t_grid, PROPAGATION_RTOL)?;
    Ok(ys
        .into_iter()
        .map(|y| DensityMatrix {
            matrix: unvec_cols(&y, l.dim()),
            basis: l.basis.clone(),
        })
        .collect())
}

/// Convenience wrapper: `L` for a system and drive on the full basis,
/// or truncated at `max_excitations`.
pub fn liouvillian_for(
    system: &ValidatedSystem,
    drive: &DriveSpec,
    max_excitations: Option<usize>,
) -> Result<Superoperator> {
    let basis = Basis::enumerate(system.n_atoms(), max_excitations)?;
    build_liouvillian(system, drive, &basis)
}
