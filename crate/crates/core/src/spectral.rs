//! Biorthogonal eigendecomposition of non-Hermitian excitation blocks and the
//! closed-form spectra of the three-atom geometry.

use std::cmp::Ordering;

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, Inverse};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hamiltonian::effective_hamiltonian;
use crate::linalg::{max_abs, min_cost_matching, norm2, I};
use crate::model::ValidatedSystem;
use crate::subspace::{restrict, Basis};

/// Left/right overlap below which a matrix is treated as defective.
///
/// At an exact exceptional point, rounding splits the degenerate pair by
/// about √ε_mach and the computed overlap only falls to ~1e-8, so the cutoff
/// sits above that floor. Overlaps scale as the square root of the distance
/// to the exceptional point, so this flags a relative band of ~1e-12.
pub const NEAR_DEFECTIVE_THRESHOLD: f64 = 1e-6;

/// Eigenvalues with right eigenvectors as columns and left eigenvectors as
/// rows, normalised so that `left · right = 1`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Array1<C64>,
    pub right: Array2<C64>,
    pub left: Array2<C64>,
}

/// Eigenpairs before biorthonormalisation, with the overlap
/// `|⟨L_n|R_n⟩|` of unit-norm left and right vectors (the inverse eigenvalue
/// condition number).
#[derive(Debug, Clone)]
pub struct RawEigen {
    pub eigenvalues: Array1<C64>,
    pub right: Array2<C64>,
    pub left: Array2<C64>,
    pub overlaps: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Σ_n λ_n |R_n⟩⟨L_n|
    pub fn reconstruct(&self) -> Array2<C64> {
        let mut scaled = self.right.clone();
        for (mut col, &l) in scaled.axis_iter_mut(Axis(1)).zip(self.eigenvalues.iter()) {
            col.mapv_inplace(|z| z * l);
        }
        scaled.dot(&self.left)
    }

    /// max |L·R − 1|
    pub fn biorthogonality_error(&self) -> f64 {
        let n = self.len();
        let lr = self.left.dot(&self.right);
        max_abs((&lr - &Array2::<C64>::eye(n)).view())
    }

    /// max |M·R − R·Λ| relative to max |M|.
    pub fn residual(&self, m: &Array2<C64>) -> f64 {
        let mr = m.dot(&self.right);
        let mut rl = self.right.clone();
        for (mut col, &l) in rl.axis_iter_mut(Axis(1)).zip(self.eigenvalues.iter()) {
            col.mapv_inplace(|z| z * l);
        }
        max_abs((&mr - &rl).view()) / max_abs(m.view()).max(f64::MIN_POSITIVE)
    }
}

/// Descending imaginary part, ties (within `tol`) broken by ascending real part.
fn spectral_order(a: C64, b: C64, tol: f64) -> Ordering {
    if (a.im - b.im).abs() > tol {
        b.im.total_cmp(&a.im)
    } else {
        a.re.total_cmp(&b.re)
    }
}

fn order_tolerance(m: &Array2<C64>) -> f64 {
    1e-10 * max_abs(m.view()).max(1.0)
}

/// Eigenpairs with unit-norm vectors, sorted, without failing near
/// exceptional points.
pub fn eigen_pairs(m: &Array2<C64>) -> Result<RawEigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Domain(format!("matrix is not square: {:?}", m.shape())));
    }
    if n == 0 {
        return Err(Error::Domain("empty matrix".into()));
    }
    // fresh contiguous copy: LAPACK rejects the zero strides ndarray may give
    // length-one axes
    let owned = Array2::from_shape_vec((n, n), m.iter().copied().collect()).expect("square shape");
    let (vals, mut vecs) = owned.eig()?;
    for mut col in vecs.axis_iter_mut(Axis(1)) {
        let nrm = norm2(col.view());
        if nrm > 0.0 {
            col.mapv_inplace(|z| z / nrm);
        }
    }
    let tol = order_tolerance(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| spectral_order(vals[a], vals[b], tol));
    let eigenvalues: Array1<C64> = order.iter().map(|&k| vals[k]).collect();
    let right = vecs.select(Axis(1), &order);
    let (left, overlaps) = match right.inv() {
        Ok(inv) => {
            let overlaps = inv.axis_iter(Axis(0)).map(|row| 1.0 / norm2(row)).collect();
            (inv, overlaps)
        }
        Err(_) => (Array2::zeros((n, n)), vec![0.0; n]),
    };
    Ok(RawEigen {
        eigenvalues,
        right,
        left,
        overlaps,
    })
}

/// Biorthonormal decomposition `M = Σ λ_n |R_n⟩⟨L_n|`.
///
/// Fails with [`Error::NearDefective`] when any unit-vector overlap
/// `|⟨L_n|R_n⟩|` drops below [`NEAR_DEFECTIVE_THRESHOLD`]; use
/// [`eigen_pairs`] to inspect such matrices anyway.
pub fn biorthogonal_decompose(m: &Array2<C64>) -> Result<Spectrum> {
    let raw = eigen_pairs(m)?;
    let min_overlap = raw.overlaps.iter().copied().fold(f64::INFINITY, f64::min);
    if !(min_overlap >= NEAR_DEFECTIVE_THRESHOLD) {
        return Err(Error::NearDefective {
            min_overlap,
            threshold: NEAR_DEFECTIVE_THRESHOLD,
        });
    }
    Ok(Spectrum {
        eigenvalues: raw.eigenvalues,
        right: raw.right,
        left: raw.left,
    })
}

/// Principal square root of a real discriminant: `√x` or `i√|x|`.
pub fn sqrt_discriminant(x: f64) -> C64 {
    if x >= 0.0 {
        C64::new(x.sqrt(), 0.0)
    } else {
        C64::new(0.0, (-x).sqrt())
    }
}

/// Single-excitation eigenvalues `(λ+, λ−, λ3)` of the quarter-wave
/// three-atom geometry.
pub fn closed_form_single(gamma: f64, big_gamma: f64) -> (C64, C64, C64) {
    let s = sqrt_discriminant(gamma * (8.0 * big_gamma - gamma));
    let base = -I * gamma;
    ((base + s) * 0.5, (base - s) * 0.5, -I * 2.0 * big_gamma)
}

/// Discriminant `4Γ² − 12γΓ + γ²` of the two-excitation polariton pair.
pub fn two_excitation_discriminant(gamma: f64, big_gamma: f64) -> f64 {
    4.0 * big_gamma * big_gamma - 12.0 * gamma * big_gamma + gamma * gamma
}

/// Two-excitation eigenvalues `(β+, β−, β3)` of the quarter-wave geometry.
pub fn closed_form_two(gamma: f64, big_gamma: f64) -> (C64, C64, C64) {
    let s = sqrt_discriminant(two_excitation_discriminant(gamma, big_gamma));
    let a = 2.0 * big_gamma + gamma;
    let half = -I * 0.5;
    (half * (a + s), half * (a - s), -I * (2.0 * big_gamma + gamma))
}

/// Reorder `numeric` to best match `reference` (minimum total |Δλ|). Returns
/// the reordered values and the largest pairwise deviation.
pub fn match_eigenvalues(numeric: &[C64], reference: &[C64]) -> (Vec<C64>, f64) {
    let n = reference.len();
    assert_eq!(numeric.len(), n);
    let cost = Array2::from_shape_fn((n, n), |(i, j)| (reference[i] - numeric[j]).norm());
    let assign = min_cost_matching(&cost);
    let matched: Vec<C64> = assign.iter().map(|&j| numeric[j]).collect();
    let dev = matched
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    (matched, dev)
}

/// One γ point of a canonical-geometry spectrum sweep.
#[derive(Debug, Clone)]
pub struct SpectrumRow {
    pub gamma: f64,
    /// Numerical single-excitation eigenvalues matched to (λ+, λ−, λ3).
    pub lambda: [C64; 3],
    /// Numerical two-excitation eigenvalues matched to (β+, β−, β3).
    pub beta: [C64; 3],
    pub closed_lambda: [C64; 3],
    pub closed_beta: [C64; 3],
    /// Largest |numerical − closed form| over all six eigenvalues.
    pub max_dev: f64,
    pub beta_discriminant: f64,
    /// The β discriminant changed sign relative to the previous row.
    pub beta_sign_change: bool,
    /// Decomposition failure for this row, if any.
    pub error: Option<String>,
}

fn block_eigenvalues(m: &Array2<C64>) -> Result<Vec<C64>> {
    Ok(biorthogonal_decompose(m)?.eigenvalues.to_vec())
}

/// Single- and two-excitation spectra over a grid of medium decay rates,
/// compared with the closed forms. Failures are recorded per row.
pub fn spectrum_report(system: &ValidatedSystem, gamma_grid: &[f64]) -> Result<Vec<SpectrumRow>> {
    if system.n_atoms() != 3 {
        return Err(Error::Domain("spectrum report needs the three-atom geometry".into()));
    }
    let big_gamma = system.rate_unit();
    let basis = Basis::enumerate(3, None)?;
    let mut rows = Vec::with_capacity(gamma_grid.len());
    let mut prev_sign: Option<bool> = None;
    for &gamma in gamma_grid {
        let (lp, lm, l3) = closed_form_single(gamma, big_gamma);
        let (bp, bm, b3) = closed_form_two(gamma, big_gamma);
        let disc = two_excitation_discriminant(gamma, big_gamma);
        let sign = disc >= 0.0;
        let mut row = SpectrumRow {
            gamma,
            lambda: [C64::new(f64::NAN, f64::NAN); 3],
            beta: [C64::new(f64::NAN, f64::NAN); 3],
            closed_lambda: [lp, lm, l3],
            closed_beta: [bp, bm, b3],
            max_dev: f64::NAN,
            beta_discriminant: disc,
            beta_sign_change: prev_sign.is_some_and(|p| p != sign),
            error: None,
        };
        prev_sign = Some(sign);
        let computed = (|| -> Result<(Vec<C64>, Vec<C64>)> {
            let sys = system.with_medium_rate(gamma)?;
            let h = effective_hamiltonian(&sys, &basis);
            Ok((
                block_eigenvalues(&restrict(&h, 1)?)?,
                block_eigenvalues(&restrict(&h, 2)?)?,
            ))
        })();
        match computed {
            Ok((one, two)) => {
                let (l, dl) = match_eigenvalues(&one, &row.closed_lambda);
                let (b, db) = match_eigenvalues(&two, &row.closed_beta);
                row.lambda.copy_from_slice(&l);
                row.beta.copy_from_slice(&b);
                row.max_dev = dl.max(db);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, dagger};
    use crate::model::canonical_three_atom;
    use ndarray::array;

    fn canonical_blocks(g: f64) -> (Array2<C64>, Array2<C64>) {
        let sys = canonical_three_atom(g, 1.0, 0.25).unwrap().validate().unwrap();
        let b = Basis::enumerate(3, None).unwrap();
        let h = effective_hamiltonian(&sys, &b);
        (restrict(&h, 1).unwrap(), restrict(&h, 2).unwrap())
    }

    #[test]
    fn hermitian_input() {
        let m = array![[c(2.0), C64::new(1.0, 1.0)], [C64::new(1.0, -1.0), c(-1.0)]];
        let s = biorthogonal_decompose(&m).unwrap();
        assert!(s.eigenvalues.iter().all(|z| z.im.abs() < 1e-14));
        assert!(crate::linalg::max_abs((&s.left - &dagger(&s.right)).view()) < 1e-12);
    }

    #[test]
    fn canonical_single_excitation_gamma_equal() {
        let (h1, _) = canonical_blocks(1.0);
        let s = biorthogonal_decompose(&h1).unwrap();
        let r7 = 7f64.sqrt();
        let want = [C64::new(-r7 / 2.0, -0.5), C64::new(r7 / 2.0, -0.5), C64::new(0.0, -2.0)];
        for (got, want) in s.eigenvalues.iter().zip(want) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
        assert!(s.biorthogonality_error() < 1e-10);
        assert!(s.residual(&h1) < 1e-10);
        assert!(crate::linalg::max_abs((&s.reconstruct() - &h1).view()) < 1e-10);
    }

    #[test]
    fn exceptional_point_is_reported() {
        let (h1, _) = canonical_blocks(8.0);
        match biorthogonal_decompose(&h1) {
            Err(Error::NearDefective { min_overlap, .. }) => assert!(min_overlap < NEAR_DEFECTIVE_THRESHOLD),
            other => panic!("expected near-defective error, got {other:?}"),
        }
        assert!(eigen_pairs(&h1).is_ok());
    }

    #[test]
    fn closed_forms() {
        let r7 = 7f64.sqrt();
        let (lp, lm, l3) = closed_form_single(1.0, 1.0);
        assert!((lp - C64::new(r7 / 2.0, -0.5)).norm() < 1e-15);
        assert!((lm - C64::new(-r7 / 2.0, -0.5)).norm() < 1e-15);
        assert_eq!(l3, C64::new(0.0, -2.0));
        let (lp, lm, _) = closed_form_single(1e-12, 1.0);
        assert!(lp.norm() < 1e-5 && lm.norm() < 1e-5);
        let (_, lm, _) = closed_form_single(0.01, 1.0);
        assert!((lm.re + 0.02f64.sqrt()).abs() < 2e-4);

        let (bp, bm, b3) = closed_form_two(1.0, 1.0);
        assert!((bp - C64::new(r7 / 2.0, -1.5)).norm() < 1e-15);
        assert!((bm - C64::new(-r7 / 2.0, -1.5)).norm() < 1e-15);
        assert_eq!(b3, C64::new(0.0, -3.0));
        let gep = 2.0 * (3.0 - 2.0 * 2f64.sqrt());
        let (bp, bm, _) = closed_form_two(gep, 1.0);
        assert!((bp - bm).norm() < 1e-6);
        assert!((bp.im + (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-6);
        let (bp, bm, b3) = closed_form_two(1e-12, 1.0);
        assert!((bp - C64::new(0.0, -2.0)).norm() < 1e-9);
        assert!(bm.norm() < 1e-9);
        assert!((b3 - C64::new(0.0, -2.0)).norm() < 1e-9);
    }

    #[test]
    fn beta_branch_labels_larger_decay() {
        for g in [0.01, 0.1, 0.3] {
            let (bp, bm, _) = closed_form_two(g, 1.0);
            assert!(bp.im < bm.im && bm.im < 0.0);
            assert_eq!(bp.re, 0.0);
        }
    }

    #[test]
    fn fixed_decoupled_eigenvalues() {
        for g in [0.01, 0.3, 2.0, 5.0] {
            let (h1, h2) = canonical_blocks(g);
            let e1 = biorthogonal_decompose(&h1).unwrap().eigenvalues;
            assert!(e1.iter().any(|z| (z - C64::new(0.0, -2.0)).norm() < 1e-13));
            let e2 = eigen_pairs(&h2).unwrap().eigenvalues;
            assert!(e2.iter().any(|z| (z - C64::new(0.0, -(2.0 + g))).norm() < 1e-13));
        }
    }

    #[test]
    fn matching_is_permutation_proof() {
        let refs = [C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(-1.0, 0.0)];
        let num = [refs[2], refs[0], refs[1] + C64::new(1e-9, 0.0)];
        let (m, dev) = match_eigenvalues(&num, &refs);
        assert_eq!(m[0], refs[0]);
        assert_eq!(m[2], refs[2]);
        assert!(dev < 2e-9);
    }

    #[test]
    fn sorting_convention() {
        let m = Array2::from_diag(&array![C64::new(1.0, -1.0), C64::new(-2.0, 0.0), C64::new(-1.0, -1.0)]);
        let s = biorthogonal_decompose(&m).unwrap();
        assert_eq!(
            s.eigenvalues.to_vec(),
            vec![C64::new(-2.0, 0.0), C64::new(-1.0, -1.0), C64::new(1.0, -1.0)]
        );
    }

    #[test]
    fn report_flags_beta_transition() {
        let sys = canonical_three_atom(0.01, 1.0, 0.25).unwrap().validate().unwrap();
        let grid: Vec<f64> = (0..=40).map(|k| 0.3 + 0.002 * k as f64).collect();
        let rows = spectrum_report(&sys, &grid).unwrap();
        let flagged: Vec<f64> = rows.iter().filter(|r| r.beta_sign_change).map(|r| r.gamma).collect();
        assert_eq!(flagged.len(), 1);
        assert!((flagged[0] - 0.344).abs() < 1e-9, "{flagged:?}");
        for r in &rows {
            assert!(r.error.is_none());
            assert!((r.lambda[0].im + r.gamma / 2.0).abs() < 1e-12);
            assert!((r.lambda[1].im + r.gamma / 2.0).abs() < 1e-12);
        }
    }
}
