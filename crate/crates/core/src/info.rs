//! Mutual information of a measurement, its gradient operators, and the
//! Holevo quantity. All logarithms are base 2.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{canonical_sum, hermitian_eig, CMatrix};
use crate::model::{Ensemble, ProbTable};

/// Probability floor used inside logarithms of the gradient.
pub const GRADIENT_PROB_FLOOR: f64 = 1e-15;

/// Letters with weight at or below this are skipped by [`holevo_bound`].
pub const HOLEVO_WEIGHT_FLOOR: f64 = 1e-15;

/// `Σ_jk p_jk log₂(p_jk / (p_j· p_·k))` over entries with `p_jk > 0`.
///
/// Terms are summed in a canonical order, so the value is bit-for-bit
/// invariant under permutations of letters or outcomes.
pub fn mutual_information(t: &ProbTable) -> f64 {
    let mut terms = Vec::with_capacity(t.joint().len());
    for j in 0..t.num_letters() {
        let pj = t.row_marginal(j);
        for k in 0..t.num_outcomes() {
            let p = t.p(j, k);
            if p > 0.0 {
                terms.push(p * libm::log2(p / (pj * t.col_marginal(k))));
            }
        }
    }
    canonical_sum(&mut terms)
}

/// Gradient operators `R_k = Σ_j c_jk ρ_j`, one per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSet {
    pub rks: Vec<CMatrix>,
}

impl GradientSet {
    pub fn len(&self) -> usize {
        self.rks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rks.is_empty()
    }
}

/// `R_k = Σ_j ρ_j log₂(p_jk / (p_j· p_·k))`.
///
/// Entries with `p_jk ≤ GRADIENT_PROB_FLOOR` use the floor in the
/// numerator; marginals are floored the same way so vanishing outcomes give
/// a finite pull.
pub fn gradient_operators(e: &Ensemble, t: &ProbTable) -> Result<GradientSet> {
    if t.num_letters() != e.len() {
        return Err(Error::DimensionMismatch {
            expected: e.len(),
            found: t.num_letters(),
        });
    }
    let dim = e.dim();
    let mut rks = Vec::with_capacity(t.num_outcomes());
    for k in 0..t.num_outcomes() {
        let pk = t.col_marginal(k).max(GRADIENT_PROB_FLOOR);
        let mut r = CMatrix::zeros(dim);
        for (j, rho) in e.ops().iter().enumerate() {
            let pj = t.row_marginal(j).max(GRADIENT_PROB_FLOOR);
            let num = t.p(j, k).max(GRADIENT_PROB_FLOOR);
            let coeff = libm::log2(num / (pj * pk));
            r += &rho.scale(coeff);
        }
        rks.push(r.symmetrized());
    }
    Ok(GradientSet { rks })
}

/// Von Neumann entropy in bits, `0 log 0 = 0`.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    let eig = hermitian_eig(rho)?;
    let mut terms: Vec<f64> = eig
        .values
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * libm::log2(l))
        .collect();
    Ok(canonical_sum(&mut terms))
}

/// Holevo quantity `S(Σ_j ρ_j) − Σ_j w_j S(ρ_j / w_j)`, an upper bound on
/// the accessible information.
pub fn holevo_bound(e: &Ensemble) -> Result<f64> {
    let report = e.validate();
    if !report.is_valid() {
        return Err(Error::InvalidEnsemble(report));
    }
    let total = von_neumann_entropy(&e.average_state())?;
    let mut conditional = Vec::with_capacity(e.len());
    for rho in e.ops() {
        let w = rho.trace().re;
        if w <= HOLEVO_WEIGHT_FLOOR {
            continue;
        }
        conditional.push(w * von_neumann_entropy(&rho.scale(1.0 / w))?);
    }
    Ok(total - canonical_sum(&mut conditional))
}

/// Binary entropy `h₂(x)` in bits.
pub fn binary_entropy(x: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * libm::log2(p) } else { 0.0 };
    term(x) + term(1.0 - x)
}
