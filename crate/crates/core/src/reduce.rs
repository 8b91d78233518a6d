//! Shrinking a converged POVM to the fewest outcomes: outcomes whose
//! conditional letter distributions coincide are merged, null outcomes are
//! dropped.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{sqrt_psd, CMatrix};
use crate::model::{Povm, ProbTable};
use crate::optimizer::renormalize;

/// Outcomes with column marginal below this are left to [`drop_null_outcomes`].
pub const NULL_MARGINAL: f64 = 1e-12;

fn equivalent(t: &ProbTable, k1: usize, k2: usize, rel_tol: f64) -> bool {
    let (m1, m2) = (t.col_marginal(k1), t.col_marginal(k2));
    if m1 < NULL_MARGINAL || m2 < NULL_MARGINAL {
        return false;
    }
    let bound = rel_tol * m1 * m2;
    (0..t.num_letters()).all(|j| (t.p(j, k1) * m2 - m1 * t.p(j, k2)).abs() <= bound)
}

fn find_pair(t: &ProbTable, rel_tol: f64) -> Option<(usize, usize)> {
    let n = t.num_outcomes();
    (0..n)
        .flat_map(|k1| (k1 + 1..n).map(move |k2| (k1, k2)))
        .find(|&(k1, k2)| equivalent(t, k1, k2, rel_tol))
}

/// Replaces pairs `(k₁, k₂)` with `p_jk₁ p_·k₂ ≈ p_·k₁ p_jk₂` for all `j` by a
/// single outcome `Π_k₁ + Π_k₂`, lowest-index pair first, until no pair
/// qualifies. The merged outcome takes slot `k₁`; its factor is the PSD
/// square root of the sum.
pub fn merge_equivalent_outcomes(p: &Povm, t: &ProbTable, rel_tol: f64) -> Povm {
    let mut factors: Vec<CMatrix> = p.factors().to_vec();
    let mut table = t.clone();
    while let Some((k1, k2)) = find_pair(&table, rel_tol) {
        let merged = &(&factors[k1].adjoint() * &factors[k1]) + &(&factors[k2].adjoint() * &factors[k2]);
        match sqrt_psd(&merged.symmetrized()) {
            Ok(root) => factors[k1] = root,
            Err(_) => break,
        }
        factors.remove(k2);
        table = merge_columns(&table, k1, k2);
    }
    Povm::from_factors_unchecked(factors)
}

fn merge_columns(t: &ProbTable, k1: usize, k2: usize) -> ProbTable {
    let (rows, cols) = (t.num_letters(), t.num_outcomes());
    let mut joint = Vec::with_capacity(rows * (cols - 1));
    for j in 0..rows {
        for k in 0..cols {
            if k == k2 {
                continue;
            }
            let v = if k == k1 { t.p(j, k1) + t.p(j, k2) } else { t.p(j, k) };
            joint.push(v);
        }
    }
    ProbTable::from_joint(rows, cols - 1, joint)
}

/// Removes outcomes with `tr Π_k ≤ abs_tol` and restores completeness with
/// the `S^{-1/2}` renormalization. A POVM without null outcomes is returned
/// unchanged.
pub fn drop_null_outcomes(p: &Povm, abs_tol: f64) -> Result<Povm> {
    let keep: Vec<CMatrix> = p
        .factors()
        .iter()
        .filter(|a| (&a.adjoint() * *a).trace().re > abs_tol)
        .cloned()
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyPovm);
    }
    if keep.len() == p.len() {
        return Ok(p.clone());
    }
    renormalize(keep)
}
