//! Photon statistics of the output field.
//!
//! With vacuum input, normal-ordered output correlations reduce to those of
//! the collective emission operator `σ̃ = Σ_n √Γ_n e^{ik0 x_n} σ_n`.

use std::sync::Arc;

use ndarray::{s, Array1, Array2};
use ndarray_linalg::Solve;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::effective_hamiltonian;
use crate::linalg::{c, dagger, inner, max_abs, norm2, trace, unit_phase, unvec_cols, vec_cols};
use crate::lindblad::{propagate_vec, DensityMatrix, Superoperator, PROPAGATION_RTOL};
use crate::model::ValidatedSystem;
use crate::spectral::{biorthogonal_decompose, closed_form_two, match_eigenvalues};
use crate::subspace::{ladder_operator, restrict, Basis, OperatorRep};

/// G⁽¹⁾ below which g² is not normalisable.
pub const G1_FLOOR: f64 = 1e-30;

/// Relative size of the one-photon amplitude below which the analytic g²(0)
/// is treated as sitting on its pole.
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EmissionOperator {
    pub op: OperatorRep,
}

impl EmissionOperator {
    pub fn matrix(&self) -> &Array2<C64> {
        &self.op.matrix
    }

    /// `σ̃†σ̃`
    pub fn intensity(&self) -> Array2<C64> {
        dagger(&self.op.matrix).dot(&self.op.matrix)
    }

    /// Same operator multiplied by a constant.
    pub fn scaled(&self, z: C64) -> EmissionOperator {
        EmissionOperator {
            op: OperatorRep {
                matrix: self.op.matrix.mapv(|x| x * z),
                basis: self.op.basis.clone(),
            },
        }
    }

    /// Matrix element block from the `k`-excitation block to the `k−1` block.
    pub fn lowering_block(&self, k: usize) -> Result<Array2<C64>> {
        if k == 0 {
            return Err(Error::Domain("cannot lower the ground block".into()));
        }
        let to = self.op.basis.block(k - 1)?;
        let from = self.op.basis.block(k)?;
        Ok(self.op.matrix.slice(s![to, from]).to_owned())
    }
}

pub fn emission_operator(system: &ValidatedSystem, basis: &Arc<Basis>) -> Result<EmissionOperator> {
    if basis.n_atoms() != system.n_atoms() {
        return Err(Error::Domain("basis does not match system".into()));
    }
    let d = basis.dim();
    let mut m = Array2::<C64>::zeros((d, d));
    for (n, atom) in system.atoms().iter().enumerate() {
        let w = unit_phase(atom.position) * atom.rate.sqrt();
        m = m + ladder_operator(basis, n)?.matrix.mapv(|z| z * w);
    }
    Ok(EmissionOperator {
        op: OperatorRep::new(m, basis.clone())?,
    })
}

/// `G⁽¹⁾(0) = tr(σ̃†σ̃ ρ)`.
pub fn g1(rho: &DensityMatrix, sig: &EmissionOperator) -> f64 {
    rho.expectation(&sig.intensity()).re.max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Regression,
    Analytic,
}

#[derive(Debug, Clone, Serialize)]
pub struct G2Curve {
    /// Delays in units of 1/Γ.
    pub tau: Vec<f64>,
    pub values: Vec<f64>,
    pub delta: f64,
    pub epsilon: f64,
    pub geometry: String,
    pub method: Method,
}

impl G2Curve {
    pub fn with_geometry(mut self, id: impl Into<String>) -> Self {
        self.geometry = id.into();
        self
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// First delay at which g² reaches `level`, if any.
    pub fn first_crossing(&self, level: f64) -> Option<f64> {
        self.tau
            .iter()
            .zip(&self.values)
            .find(|(_, &g)| g >= level)
            .map(|(&t, _)| t)
    }
}

/// `g²(τ) = tr(σ̃†σ̃ e^{Lτ}[σ̃ρσ̃†]) / tr(σ̃†σ̃ρ)²` by propagating the
/// conditional state.
pub fn g2_regression(
    l: &Superoperator,
    rho_ss: &DensityMatrix,
    sig: &EmissionOperator,
    tau_grid: &[f64],
) -> Result<G2Curve> {
    let n = g1(rho_ss, sig);
    if !(n >= G1_FLOOR) {
        return Err(Error::DivisionUnderflow { intensity: n });
    }
    let s = sig.matrix();
    let cond = s.dot(&rho_ss.matrix).dot(&dagger(s));
    // normalise the conditional state to keep the integrator tolerance meaningful
    let norm = trace(&cond).re;
    let y0 = vec_cols(&cond.mapv(|z| z / norm));
    let ys = propagate_vec(&l.matrix, &y0, tau_grid, PROPAGATION_RTOL)?;
    let intensity = sig.intensity();
    let d = l.dim();
    let values = ys
        .iter()
        .map(|y| {
            let x = unvec_cols(y, d);
            (intensity.dot(&x).diag().sum().re * norm / (n * n)).max(0.0)
        })
        .collect();
    Ok(G2Curve {
        tau: tau_grid.to_vec(),
        values,
        delta: l.drive.delta,
        epsilon: l.drive.epsilon,
        geometry: String::new(),
        method: Method::Regression,
    })
}

/// Weak-drive amplitudes on the excitation ladder of the medium atom.
#[derive(Debug, Clone)]
pub struct DriveLadder {
    pub basis: Arc<Basis>,
    /// `Ĝ1 σ_p†|g⟩` in the one-excitation block.
    pub one: Array1<C64>,
    /// `σ_p† Ĝ1 σ_p†|g⟩` in the two-excitation block.
    pub two_in: Array1<C64>,
    /// `Ĝ2 σ_p† Ĝ1 σ_p†|g⟩`.
    pub two: Array1<C64>,
    pub h2: Array2<C64>,
}

/// Orthonormal basis of the Krylov space of `h` generated by `v`.
fn krylov_basis(h: &Array2<C64>, v: &Array1<C64>) -> Array2<C64> {
    let n = h.nrows();
    let scale = max_abs(h.view()).max(f64::MIN_POSITIVE);
    let mut q: Vec<Array1<C64>> = Vec::new();
    let mut w = v.clone();
    while q.len() < n {
        // two Gram-Schmidt passes keep the basis orthonormal to rounding
        for _ in 0..2 {
            for b in &q {
                let proj = inner(b.view(), w.view());
                w.scaled_add(-proj, b);
            }
        }
        let nrm = norm2(w.view());
        let reference = if q.is_empty() { norm2(v.view()) } else { scale };
        if !(nrm > 1e-12 * reference) {
            break;
        }
        let b = w.mapv(|z| z / nrm);
        w = h.dot(&b);
        q.push(b);
    }
    let mut m = Array2::zeros((n, q.len()));
    for (k, b) in q.iter().enumerate() {
        m.column_mut(k).assign(b);
    }
    m
}

/// `(E − H)⁻¹ v` evaluated on the Krylov space reachable from `v`.
///
/// Eigenmodes that `v` never reaches (decoupled dark states) drop out, so
/// the resolvent stays finite when `E` coincides with their energy.
fn resolvent_solve(h: &Array2<C64>, energy: f64, v: &Array1<C64>) -> Result<Array1<C64>> {
    if norm2(v.view()) == 0.0 {
        return Ok(v.clone());
    }
    let q = krylov_basis(h, v);
    let qh = dagger(&q);
    let hp = qh.dot(h).dot(&q);
    let k = hp.nrows();
    let a = Array2::from_diag(&Array1::from_elem(k, c(energy))) - hp;
    let y = a.solve(&qh.dot(v)).map_err(|_| Error::SingularResolvent { energy })?;
    let x = q.dot(&y);
    if x.iter().any(|z| !z.is_finite()) {
        return Err(Error::SingularResolvent { energy });
    }
    Ok(x)
}

/// Off-shell propagation `Ĝ2 σ_p† Ĝ1 σ_p†|g⟩` with `Ĝk = (kΔ − H⁽ᵏ⁾)⁻¹`.
pub fn drive_ladder(system: &ValidatedSystem, delta: f64) -> Result<DriveLadder> {
    if !delta.is_finite() {
        return Err(Error::Domain(format!("detuning must be finite, got {delta}")));
    }
    let n = system.n_atoms();
    let basis = Basis::enumerate(n, Some(2.min(n)))?;
    let h = effective_hamiltonian(system, &basis);
    let h1 = restrict(&h, 1)?;
    let sp_dag = ladder_operator(&basis, system.medium())?.dagger().matrix;
    let r0 = basis.block(0)?;
    let r1 = basis.block(1)?;
    let v0 = sp_dag.slice(s![r1.clone(), r0]).column(0).to_owned();
    let one = resolvent_solve(&h1, delta, &v0)?;
    if n < 2 {
        let empty = Array1::zeros(0);
        return Ok(DriveLadder {
            basis,
            one,
            two_in: empty.clone(),
            two: empty,
            h2: Array2::zeros((0, 0)),
        });
    }
    let r2 = basis.block(2)?;
    let two_in = sp_dag.slice(s![r2, r1]).dot(&one);
    let h2 = restrict(&h, 2)?;
    let two = resolvent_solve(&h2, 2.0 * delta, &two_in)?;
    Ok(DriveLadder {
        basis,
        one,
        two_in,
        two,
        h2,
    })
}

/// Weak-drive `g²(0) = |⟨g|σ̃² Ĝ2 σ_p† Ĝ1 σ_p†|g⟩|² / |⟨g|σ̃ Ĝ1 σ_p†|g⟩|⁴`.
///
/// Fails with [`Error::DivisionUnderflow`] where the one-photon amplitude
/// vanishes (the pole at Δ = 0 of the symmetric geometry).
pub fn g2_zero_analytic(system: &ValidatedSystem, delta: f64) -> Result<f64> {
    let ladder = drive_ladder(system, delta)?;
    let sig = emission_operator(system, &ladder.basis)?;
    let s10 = sig.lowering_block(1)?;
    let den = s10.dot(&ladder.one)[0];
    let scale = norm2(s10.row(0)) * norm2(ladder.one.view());
    if !(den.norm() > AMPLITUDE_FLOOR * scale) {
        return Err(Error::DivisionUnderflow {
            intensity: den.norm_sqr(),
        });
    }
    if system.n_atoms() < 2 {
        return Ok(0.0);
    }
    let s21 = sig.lowering_block(2)?;
    let num = s10.dot(&s21.dot(&ladder.two))[0];
    Ok(num.norm_sqr() / den.norm_sqr().powi(2))
}

/// Real parts of the single-excitation polariton energies, i.e. the
/// detunings of the transmission peaks, in ascending order. Modes with
/// vanishing medium weight are skipped.
pub fn polariton_detunings(system: &ValidatedSystem) -> Result<Vec<f64>> {
    let basis = Basis::enumerate(system.n_atoms(), Some(1))?;
    let h1 = restrict(&effective_hamiltonian(system, &basis), 1)?;
    let spec = biorthogonal_decompose(&h1)?;
    let p = basis.block(1)?.start;
    let medium = basis.index_of(1 << system.medium()).unwrap() - p;
    let mut out: Vec<f64> = (0..spec.len())
        .filter(|&k| spec.right[[medium, k]].norm() > 1e-8)
        .map(|k| spec.eigenvalues[k].re)
        .collect();
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Minimum of the analytic g²(0) over `[lo, hi]`: a grid of `n` points
/// followed by golden-section refinement around the best one. Points on the
/// pole are skipped. Returns `(Δ, g²(0))`.
pub fn min_g2_zero(system: &ValidatedSystem, lo: f64, hi: f64, n: usize) -> Result<(f64, f64)> {
    if !(hi > lo) || n < 3 {
        return Err(Error::Domain(format!(
            "need lo < hi and n >= 3 (lo = {lo}, hi = {hi}, n = {n})"
        )));
    }
    let f = |d: f64| match g2_zero_analytic(system, d) {
        Ok(v) => Ok(v),
        Err(Error::DivisionUnderflow { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    };
    let step = (hi - lo) / (n - 1) as f64;
    let mut best = (lo, f64::INFINITY);
    for k in 0..n {
        let d = lo + step * k as f64;
        let v = f(d)?;
        if v < best.1 {
            best = (d, v);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(lo), (best.0 + step).min(hi));
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (b - r * (b - a), a + r * (b - a));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    for _ in 0..80 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2)?;
        }
    }
    for cand in [(x1, f1), (x2, f2)] {
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

#[derive(Debug, Clone, Serialize)]
pub struct ZenoState {
    pub eigenvalue: (f64, f64),
    /// `|⟨β^L|σ_p† Ĝ1 σ_p†|g⟩|`
    pub drive_in: f64,
    /// `drive_in / |Im β|`
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ZenoReport {
    pub delta: f64,
    /// Two-excitation eigenstates matched to (β+, β−, β3).
    pub states: Vec<ZenoState>,
    /// Amplitude of `|e_p, B⟩` in `σ_p† Ĝ1 σ_p†|g⟩`, relative to its norm.
    pub ep_bright_amplitude: f64,
}

impl ZenoReport {
    pub fn beta_plus(&self) -> &ZenoState {
        &self.states[0]
    }

    /// Ratio including the drive amplitude: the physical two-excitation
    /// feeding rate `ε²|⟨β^L|…⟩|` against `|Im β|`.
    pub fn drive_scaled_ratio(&self, epsilon: f64) -> f64 {
        epsilon * epsilon * self.beta_plus().ratio
    }
}

/// Two-excitation feeding amplitudes against decay rates for the three-atom
/// geometry.
pub fn zeno_diagnostics(system: &ValidatedSystem, delta: f64) -> Result<ZenoReport> {
    if system.n_atoms() != 3 {
        return Err(Error::Domain("zeno diagnostics need the three-atom geometry".into()));
    }
    let ladder = drive_ladder(system, delta)?;
    let spec = biorthogonal_decompose(&ladder.h2)?;
    let reference = {
        let (bp, bm, b3) = closed_form_two(system.medium_rate(), system.rate_unit());
        [bp, bm, b3]
    };
    let values = spec.eigenvalues.to_vec();
    let (matched, _) = match_eigenvalues(&values, &reference);
    let states = matched
        .iter()
        .map(|z| {
            let k = values.iter().position(|v| v == z).unwrap();
            let amp = spec.left.row(k).dot(&ladder.two_in).norm();
            ZenoState {
                eigenvalue: (z.re, z.im),
                drive_in: amp,
                ratio: amp / z.im.abs(),
            }
        })
        .collect();
    let b = &ladder.basis;
    let off = b.block(2)?.start;
    let mirrors = system.mirror_indices();
    let p = 1u64 << system.medium();
    let i1 = b.index_of(p | (1 << mirrors[0])).unwrap() - off;
    let i2 = b.index_of(p | (1 << mirrors[1])).unwrap() - off;
    let bright = (ladder.two_in[i1] - ladder.two_in[i2]) / 2f64.sqrt();
    let norm = norm2(ladder.two_in.view()).max(f64::MIN_POSITIVE);
    Ok(ZenoReport {
        delta,
        states,
        ep_bright_amplitude: bright.norm() / norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lindblad::{build_liouvillian, steady_state};
    use crate::model::{canonical_three_atom, validate, AtomSpec, DriveSpec, SystemConfig};
    use crate::subspace::Basis;

    fn canonical(g: f64, d: f64) -> ValidatedSystem {
        canonical_three_atom(g, 1.0, d).unwrap().validate().unwrap()
    }

    #[test]
    fn emission_operator_structure() {
        let sys = canonical(0.01, 0.25);
        let b = Basis::enumerate(3, None).unwrap();
        let sig = emission_operator(&sys, &b).unwrap();
        for ((i, j), z) in sig.matrix().indexed_iter() {
            if z.norm() > 0.0 {
                assert_eq!(b.excitations(j), b.excitations(i) + 1);
            }
        }
        // |g_p, B⟩ with B = (e1 − e2)/√2 emits with weight √(2Γ)
        let mut v = Array1::<C64>::zeros(b.dim());
        v[b.index_of(0b001).unwrap()] = c(0.5f64.sqrt());
        v[b.index_of(0b100).unwrap()] = c(-(0.5f64.sqrt()));
        let out = sig.matrix().dot(&v);
        assert!((norm2(out.view()) - 2f64.sqrt()).abs() < 1e-14);

        let one = validate(&SystemConfig {
            atoms: vec![AtomSpec::medium(0.0, 0.3)],
        })
        .unwrap();
        let b1 = Basis::enumerate(1, None).unwrap();
        let s1 = emission_operator(&one, &b1).unwrap();
        assert_eq!(s1.matrix()[[0, 1]], c(0.3f64.sqrt()));
    }

    #[test]
    fn single_atom_is_perfectly_antibunched() {
        let one = validate(&SystemConfig {
            atoms: vec![AtomSpec::medium(0.0, 0.7)],
        })
        .unwrap();
        for d in [-1.0, 0.0, 0.3] {
            assert_eq!(g2_zero_analytic(&one, d).unwrap(), 0.0);
        }
        let b = Basis::enumerate(1, None).unwrap();
        let l = build_liouvillian(&one, &DriveSpec::new(1e-3, 0.2).unwrap(), &b).unwrap();
        let rho = steady_state(&l).unwrap();
        let g = g2_regression(&l, &rho, &emission_operator(&one, &b).unwrap(), &[0.0]).unwrap();
        assert!(g.values[0] < 1e-8);
    }

    #[test]
    fn undriven_g2_is_not_normalisable() {
        let sys = canonical(0.01, 0.25);
        let b = Basis::enumerate(3, None).unwrap();
        let l = build_liouvillian(&sys, &DriveSpec::undriven(), &b).unwrap();
        let rho = steady_state(&l).unwrap();
        let sig = emission_operator(&sys, &b).unwrap();
        assert_eq!(g1(&rho, &sig), 0.0);
        assert!(matches!(
            g2_regression(&l, &rho, &sig, &[0.0]),
            Err(Error::DivisionUnderflow { .. })
        ));
    }

    #[test]
    fn analytic_pole_at_zero_detuning() {
        let sys = canonical(0.01, 0.25);
        assert!(matches!(
            g2_zero_analytic(&sys, 0.0),
            Err(Error::DivisionUnderflow { .. })
        ));
    }

    #[test]
    fn detuning_symmetry() {
        let sys = canonical(0.1, 0.25);
        for d in [0.05, 0.3, 0.7, 2.0] {
            let a = g2_zero_analytic(&sys, d).unwrap();
            let b = g2_zero_analytic(&sys, -d).unwrap();
            assert!((a - b).abs() < 1e-10 * a.max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn regression_matches_analytic_at_weak_drive() {
        let g = 0.1;
        let sys = canonical(g, 0.25);
        let b = Basis::enumerate(3, None).unwrap();
        let sig = emission_operator(&sys, &b).unwrap();
        for delta in [-0.6, 0.2, 0.45] {
            let an = g2_zero_analytic(&sys, delta).unwrap();
            let l = build_liouvillian(&sys, &DriveSpec::new(1e-3 * g, delta).unwrap(), &b).unwrap();
            let rho = steady_state(&l).unwrap();
            let re = g2_regression(&l, &rho, &sig, &[0.0]).unwrap().values[0];
            assert!((re - an).abs() / an < 0.02, "Δ={delta}: {re} vs {an}");
        }
    }

    #[test]
    fn gauge_invariance() {
        let sys = canonical(0.05, 0.25);
        let b = Basis::enumerate(3, None).unwrap();
        let l = build_liouvillian(&sys, &DriveSpec::new(5e-5, 0.3).unwrap(), &b).unwrap();
        let rho = steady_state(&l).unwrap();
        let sig = emission_operator(&sys, &b).unwrap();
        let taus = [0.0, 1.0, 5.0];
        let a = g2_regression(&l, &rho, &sig, &taus).unwrap();
        let z = C64::from_polar(3.7, 1.1);
        let bb = g2_regression(&l, &rho, &sig.scaled(z), &taus).unwrap();
        for (x, y) in a.values.iter().zip(&bb.values) {
            assert!((x - y).abs() < 1e-12 * x.abs().max(1e-300));
        }
    }

    #[test]
    fn long_delay_factorises() {
        let g = 0.1;
        let sys = canonical(g, 0.25);
        let b = Basis::enumerate(3, None).unwrap();
        let l = build_liouvillian(&sys, &DriveSpec::new(1e-3 * g, 0.4).unwrap(), &b).unwrap();
        let rho = steady_state(&l).unwrap();
        let sig = emission_operator(&sys, &b).unwrap();
        let c = g2_regression(&l, &rho, &sig, &[0.0, 50.0 / g, 80.0 / g]).unwrap();
        assert!((c.values[1] - 1.0).abs() < 1e-3);
        assert!((c.values[2] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn dark_modes_do_not_block_the_resolvent() {
        let sys = crate::model::n_atom_mirror_config(2, 0.01, 1.0)
            .unwrap()
            .validate()
            .unwrap();
        assert!(matches!(
            g2_zero_analytic(&sys, 0.0),
            Err(Error::DivisionUnderflow { .. })
        ));
        let near = g2_zero_analytic(&sys, 1e-6).unwrap();
        assert!(near.is_finite() && near > 1.0);
        // agrees with a direct solve away from the dark energy
        let l = drive_ladder(&sys, 0.05).unwrap();
        let b = &l.basis;
        let h1 = restrict(&effective_hamiltonian(&sys, b), 1).unwrap();
        let v0 = ladder_operator(b, sys.medium())
            .unwrap()
            .dagger()
            .matrix
            .slice(s![b.block(1).unwrap(), 0..1])
            .column(0)
            .to_owned();
        let direct = (Array2::from_diag(&Array1::from_elem(5, c(0.05))) - &h1)
            .solve(&v0)
            .unwrap();
        assert!(norm2((&direct - &l.one).view()) < 1e-12 * norm2(direct.view()));
    }

    #[test]
    fn minimiser_finds_the_dip() {
        let g = 0.01;
        let sys = canonical(g, 0.25);
        let s = (2.0 * g).sqrt();
        let (d, v) = min_g2_zero(&sys, -3.0 * s, 0.0, 61).unwrap();
        assert!(v < 1.0 && d < 0.0);
        for probe in [d - 1e-4, d + 1e-4] {
            assert!(g2_zero_analytic(&sys, probe).unwrap() >= v);
        }
    }

    #[test]
    fn polariton_detunings_canonical() {
        let g = 0.01;
        let d = polariton_detunings(&canonical(g, 0.25)).unwrap();
        let want = (g * (8.0 - g)).sqrt() / 2.0;
        assert_eq!(d.len(), 2);
        assert!((d[0] + want).abs() < 1e-12 && (d[1] - want).abs() < 1e-12);
    }

    #[test]
    fn zeno_selection_rule() {
        let g = 0.01;
        let sys = canonical(g, 0.25);
        let delta = polariton_detunings(&sys).unwrap()[0];
        let z = zeno_diagnostics(&sys, delta).unwrap();
        assert_eq!(z.states.len(), 3);
        assert!(z.ep_bright_amplitude < 1e-12);
        assert!(z.states[2].drive_in < 1e-12);
        assert!(z.beta_plus().eigenvalue.1 < z.states[1].eigenvalue.1);
        let small = zeno_diagnostics(&canonical(1e-5, 0.25), delta).unwrap();
        let tiny = zeno_diagnostics(&canonical(1e-9, 0.25), delta).unwrap();
        let total = |r: &ZenoReport| r.states.iter().map(|s| s.drive_in).sum::<f64>();
        assert!(
            total(&tiny) < 0.02 * total(&small),
            "{} {}",
            total(&tiny),
            total(&small)
        );
    }
}
