//! Small dense helpers shared by the physics modules.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use ndarray_linalg::{Factorize, Solve};
use num_complex::Complex64 as C64;

use crate::error::Result;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `e^{i 2π x}` with exact values when `x` is a multiple of 1/4.
///
/// Positions are stored in units of the resonant wavelength, so quarter- and
/// half-wavelength spacings are the common case; returning exact zeros there
/// keeps dark modes exactly decoupled.
pub fn unit_phase(x: f64) -> C64 {
    let r = x.rem_euclid(1.0);
    let q = r * 4.0;
    if q == q.round() {
        return match q as i64 % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
    }
    let (s, co) = (std::f64::consts::TAU * r).sin_cos();
    C64::new(co, s)
}

pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

pub fn max_abs(m: ArrayView2<C64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn max_abs1(v: ArrayView1<C64>) -> f64 {
    v.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn max_abs_real(m: ArrayView2<f64>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.abs()))
}

pub fn trace(m: &Array2<C64>) -> C64 {
    m.diag().sum()
}

/// `Σ_i conj(a_i) b_i`
pub fn inner(a: ArrayView1<C64>, b: ArrayView1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm2(v: ArrayView1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Column-stacked vectorisation of a square matrix.
pub fn vec_cols(m: &Array2<C64>) -> Array1<C64> {
    m.t().iter().copied().collect()
}

pub fn unvec_cols(v: &Array1<C64>, dim: usize) -> Array2<C64> {
    let mut m = Array2::zeros((dim, dim));
    for j in 0..dim {
        for i in 0..dim {
            m[[i, j]] = v[i + j * dim];
        }
    }
    m
}

/// Solve `a x = b` by LU with a few sweeps of iterative refinement.
///
/// Refinement restores componentwise accuracy for the tiny entries of
/// weakly driven steady states, which a single backward-stable solve does
/// not guarantee.
pub fn solve_refined(a: &Array2<C64>, b: &Array1<C64>, sweeps: usize) -> Result<Array1<C64>> {
    let lu = a.factorize()?;
    let mut x = lu.solve(b)?;
    for _ in 0..sweeps {
        let r = b - &a.dot(&x);
        if max_abs1(r.view()) == 0.0 {
            break;
        }
        let dx = lu.solve(&r)?;
        x += &dx;
    }
    Ok(x)
}

/// Minimum-weight perfect matching on a square cost matrix (Hungarian
/// algorithm, O(n³)). Returns `assign[row] = col`.
pub fn min_cost_matching(cost: &Array2<f64>) -> Vec<usize> {
    let n = cost.nrows();
    assert_eq!(n, cost.ncols(), "matching needs a square cost matrix");
    // 1-based potentials formulation
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[[i0 - 1, j - 1]] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

/// Binomial coefficient for small arguments.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
