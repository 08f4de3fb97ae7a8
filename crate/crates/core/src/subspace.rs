//! Atomic product basis organised by excitation number.
//!
//! Basis states are bitmasks: bit `n` set means atom `n` (in position order)
//! is excited. States are grouped into contiguous blocks of fixed excitation
//! number, blocks in ascending order, states within a block ascending.

use std::collections::HashMap;
use std::ops::Range;
use std::sync::Arc;

use ndarray::{s, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{binomial, max_abs};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    n_atoms: usize,
    states: Vec<u64>,
    blocks: Vec<Range<usize>>,
    index: HashMap<u64, usize>,
}

impl Basis {
    /// Enumerate all states with at most `max_excitations` excited atoms
    /// (all `2^n` states when `None`).
    pub fn enumerate(n_atoms: usize, max_excitations: Option<usize>) -> Result<Arc<Basis>> {
        if n_atoms == 0 || n_atoms > 20 {
            return Err(Error::Domain(format!("n_atoms must be in 1..=20, got {n_atoms}")));
        }
        let kmax = match max_excitations {
            Some(k) if k > n_atoms => {
                return Err(Error::Domain(format!(
                    "max_excitations {k} exceeds atom count {n_atoms}"
                )))
            }
            Some(k) => k,
            None => n_atoms,
        };
        let mut by_k: Vec<Vec<u64>> = vec![Vec::new(); kmax + 1];
        for s in 0..(1u64 << n_atoms) {
            let k = s.count_ones() as usize;
            if k <= kmax {
                by_k[k].push(s);
            }
        }
        let mut states = Vec::new();
        let mut blocks = Vec::with_capacity(kmax + 1);
        for block in by_k {
            let start = states.len();
            states.extend(block);
            blocks.push(start..states.len());
        }
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        Ok(Arc::new(Basis {
            n_atoms,
            states,
            blocks,
            index,
        }))
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        self.index.get(&state).copied()
    }

    /// Highest excitation number kept.
    pub fn max_excitations(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn is_truncated(&self) -> bool {
        self.max_excitations() < self.n_atoms
    }

    /// Index range of the `k`-excitation block.
    pub fn block(&self, k: usize) -> Result<Range<usize>> {
        self.blocks
            .get(k)
            .cloned()
            .ok_or_else(|| Error::Domain(format!("no {k}-excitation block in basis")))
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|r| r.len()).collect()
    }

    pub fn excitations(&self, i: usize) -> usize {
        self.states[i].count_ones() as usize
    }

    /// Index of the all-ground state.
    pub fn ground(&self) -> usize {
        0
    }

    /// Expected dimension from binomial counting; used by tests.
    pub fn expected_dim(n_atoms: usize, max_excitations: Option<usize>) -> usize {
        let k = max_excitations.unwrap_or(n_atoms);
        (0..=k).map(|j| binomial(n_atoms, j)).sum()
    }

    /// Nonzero entries `(row, col)` of the lowering operator σ_atom; all
    /// amplitudes are 1.
    pub fn lowering_pairs(&self, atom: usize) -> Vec<(usize, usize)> {
        let bit = 1u64 << atom;
        self.states
            .iter()
            .enumerate()
            .filter(|(_, &s)| s & bit != 0)
            .filter_map(|(col, &s)| self.index_of(s & !bit).map(|row| (row, col)))
            .collect()
    }
}

/// Dense operator tagged with the basis it is written in.
#[derive(Debug, Clone)]
pub struct OperatorRep {
    pub matrix: Array2<C64>,
    pub basis: Arc<Basis>,
}

impl OperatorRep {
    pub fn new(matrix: Array2<C64>, basis: Arc<Basis>) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::Domain(format!(
                "operator shape {:?} does not match basis dimension {}",
                matrix.shape(),
                basis.dim()
            )));
        }
        Ok(OperatorRep { matrix, basis })
    }

    pub fn dagger(&self) -> OperatorRep {
        OperatorRep {
            matrix: crate::linalg::dagger(&self.matrix),
            basis: self.basis.clone(),
        }
    }

    pub fn dot(&self, other: &OperatorRep) -> OperatorRep {
        OperatorRep {
            matrix: self.matrix.dot(&other.matrix),
            basis: self.basis.clone(),
        }
    }

    /// Largest element outside the excitation-number diagonal blocks.
    pub fn off_block_max(&self) -> f64 {
        let b = &self.basis;
        let mut m = 0.0f64;
        for i in 0..b.dim() {
            for j in 0..b.dim() {
                if b.excitations(i) != b.excitations(j) {
                    m = m.max(self.matrix[[i, j]].norm());
                }
            }
        }
        m
    }
}

/// The `k`-excitation diagonal block of an excitation-conserving operator.
pub fn restrict(op: &OperatorRep, k: usize) -> Result<Array2<C64>> {
    let range = op.basis.block(k)?;
    let scale = max_abs(op.matrix.view());
    let tolerance = 1e-12 * scale;
    let off = op.off_block_max();
    if off > tolerance {
        return Err(Error::BlockStructure {
            off_block: off,
            tolerance,
        });
    }
    Ok(op.matrix.slice(s![range.clone(), range]).to_owned())
}

/// Place a block matrix into an otherwise zero operator.
pub fn embed(block: &Array2<C64>, k: usize, basis: &Arc<Basis>) -> Result<OperatorRep> {
    let range = basis.block(k)?;
    if block.nrows() != range.len() || block.ncols() != range.len() {
        return Err(Error::Domain(format!(
            "block shape {:?} does not match {k}-excitation block size {}",
            block.shape(),
            range.len()
        )));
    }
    let mut m = Array2::zeros((basis.dim(), basis.dim()));
    m.slice_mut(s![range.clone(), range]).assign(block);
    OperatorRep::new(m, basis.clone())
}

/// σ_n = |g_n⟩⟨e_n| for the atom at position index `atom`.
pub fn ladder_operator(basis: &Arc<Basis>, atom: usize) -> Result<OperatorRep> {
    if atom >= basis.n_atoms() {
        return Err(Error::Domain(format!(
            "atom index {atom} out of range for {} atoms",
            basis.n_atoms()
        )));
    }
    let mut m = Array2::zeros((basis.dim(), basis.dim()));
    for (r, c) in basis.lowering_pairs(atom) {
        m[[r, c]] = C64::new(1.0, 0.0);
    }
    OperatorRep::new(m, basis.clone())
}

/// Total excitation number N = Σ σ_n†σ_n (diagonal).
pub fn number_operator(basis: &Arc<Basis>) -> OperatorRep {
    let n = basis.dim();
    let mut m = Array2::zeros((n, n));
    for i in 0..n {
        m[[i, i]] = C64::new(basis.excitations(i) as f64, 0.0);
    }
    OperatorRep {
        matrix: m,
        basis: basis.clone(),
    }
}

/// Σ_mn c_mn σ_m†σ_n built directly on bitmasks.
pub fn quadratic_form(basis: &Arc<Basis>, coeff: &Array2<C64>) -> OperatorRep {
    let n_atoms = basis.n_atoms();
    assert_eq!(coeff.shape(), &[n_atoms, n_atoms]);
    let dim = basis.dim();
    let mut m = Array2::zeros((dim, dim));
    for (col, &s) in basis.states().iter().enumerate() {
        for n in 0..n_atoms {
            if s & (1 << n) == 0 {
                continue;
            }
            let lowered = s & !(1 << n);
            for mm in 0..n_atoms {
                if lowered & (1 << mm) != 0 {
                    continue;
                }
                let c = coeff[[mm, n]];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                if let Some(row) = basis.index_of(lowered | (1 << mm)) {
                    m[[row, col]] += c;
                }
            }
        }
    }
    OperatorRep {
        matrix: m,
        basis: basis.clone(),
    }
}
