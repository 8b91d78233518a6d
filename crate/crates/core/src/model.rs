//! Ensembles of weighted statistical operators, POVMs in factor form, and the
//! joint probability table `p_jk = tr(ρ_j Π_k)` that links them.

use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{canonical_sum, hermitian_eig, sqrt_psd, CMatrix, HERMITIAN_TOL, PSD_TOL};

/// Tolerance on `Σ_j tr ρ_j = 1`.
pub const TRACE_SUM_TOL: f64 = 1e-8;

/// Tolerance on `‖Σ_k Π_k − 1‖` (spectral norm).
pub const COMPLETENESS_TOL: f64 = 1e-9;

/// A single violated ensemble constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    Empty,
    DimensionMismatch { index: usize, expected: usize, found: usize },
    NotHermitian { index: usize, defect: f64 },
    NegativeEigenvalue { index: usize, eigenvalue: f64 },
    TraceSum { sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Empty => write!(f, "ensemble has no statistical operators"),
            Violation::DimensionMismatch {
                index,
                expected,
                found,
            } => write!(
                f,
                "operator {} has dimension {found}, expected {expected}",
                index + 1
            ),
            Violation::NotHermitian { index, defect } => write!(
                f,
                "operator {} must be hermitian (max |rho - rho^dagger| = {defect:e})",
                index + 1
            ),
            Violation::NegativeEigenvalue { index, eigenvalue } => write!(
                f,
                "operator {} must have nonnegative eigenvalues (found {eigenvalue:.6})",
                index + 1
            ),
            Violation::TraceSum { sum } => write!(
                f,
                "traces are the statistical weights and must add to unity (sum of traces = {sum})"
            ),
        }
    }
}

/// Every constraint an ensemble violates; empty means valid.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Statistical operators `ρ_j`, each carrying its prior weight as its trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl Ensemble {
    /// Wraps operators without checking them; see [`Ensemble::validate`].
    pub fn from_ops(dim: usize, ops: Vec<CMatrix>) -> Self {
        Self { dim, ops }
    }

    /// Builds a validated ensemble.
    pub fn new(dim: usize, ops: Vec<CMatrix>) -> Result<Self> {
        let e = Self::from_ops(dim, ops);
        let report = e.validate();
        if report.is_valid() {
            Ok(e)
        } else {
            Err(Error::InvalidEnsemble(report))
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    /// `w_j = tr ρ_j`.
    pub fn weights(&self) -> Vec<f64> {
        self.ops.iter().map(|r| r.trace().re).collect()
    }

    /// `Σ_j ρ_j`.
    pub fn average_state(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim);
        for r in &self.ops {
            acc += r;
        }
        acc
    }

    /// Collects every violated constraint: dimension, hermiticity,
    /// nonnegative spectrum, and unit total trace.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        if self.ops.is_empty() {
            violations.push(Violation::Empty);
        }
        let mut traces = Vec::with_capacity(self.ops.len());
        for (index, rho) in self.ops.iter().enumerate() {
            if rho.dim() != self.dim {
                violations.push(Violation::DimensionMismatch {
                    index,
                    expected: self.dim,
                    found: rho.dim(),
                });
                continue;
            }
            traces.push(rho.trace().re);
            let defect = rho.hermiticity_defect();
            if !(defect <= HERMITIAN_TOL) {
                violations.push(Violation::NotHermitian { index, defect });
                continue;
            }
            if let Ok(eig) = hermitian_eig(rho) {
                if eig.min() < -PSD_TOL {
                    violations.push(Violation::NegativeEigenvalue {
                        index,
                        eigenvalue: eig.min(),
                    });
                }
            }
        }
        if !self.ops.is_empty() {
            let sum = canonical_sum(&mut traces);
            if !((sum - 1.0).abs() <= TRACE_SUM_TOL) {
                violations.push(Violation::TraceSum { sum });
            }
        }
        ValidationReport { violations }
    }
}

/// POVM stored as factors `A_k` with outcomes `Π_k = A_k† A_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    factors: Vec<CMatrix>,
}

impl Povm {
    /// Wraps factors without checking completeness.
    pub fn from_factors_unchecked(factors: Vec<CMatrix>) -> Self {
        let dim = factors.first().map_or(0, CMatrix::dim);
        Self { dim, factors }
    }

    /// Wraps factors, requiring `Σ A_k†A_k = 1` within [`COMPLETENESS_TOL`].
    pub fn from_factors(factors: Vec<CMatrix>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyPovm);
        }
        let dim = factors[0].dim();
        if let Some(bad) = factors.iter().find(|a| a.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        let p = Self { dim, factors };
        let residual = p.completeness_residual();
        if !(residual <= COMPLETENESS_TOL) {
            return Err(Error::IncompletePovm { residual });
        }
        Ok(p)
    }

    /// Builds factors from hermitian PSD outcomes via their square roots.
    pub fn from_outcomes(outcomes: &[CMatrix]) -> Result<Self> {
        let factors = outcomes.iter().map(sqrt_psd).collect::<Result<Vec<_>>>()?;
        Self::from_factors(factors)
    }

    /// The trivial one-outcome measurement.
    pub fn trivial(dim: usize) -> Self {
        Self {
            dim,
            factors: alloc::vec![CMatrix::identity(dim)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[CMatrix] {
        &self.factors
    }

    pub fn outcome(&self, k: usize) -> CMatrix {
        let a = &self.factors[k];
        (&a.adjoint() * a).symmetrized()
    }

    pub fn outcomes(&self) -> Vec<CMatrix> {
        (0..self.len()).map(|k| self.outcome(k)).collect()
    }

    /// `Σ_k Π_k`.
    pub fn outcome_sum(&self) -> CMatrix {
        let mut acc = CMatrix::zeros(self.dim);
        for k in 0..self.len() {
            acc += &self.outcome(k);
        }
        acc
    }

    /// Spectral norm of `Σ_k Π_k − 1`.
    pub fn completeness_residual(&self) -> f64 {
        let diff = &self.outcome_sum() - &CMatrix::identity(self.dim);
        match hermitian_eig(&diff) {
            Ok(eig) => eig.min().abs().max(eig.max().abs()),
            Err(_) => f64::INFINITY,
        }
    }

    /// Smallest eigenvalue over all outcomes.
    pub fn min_outcome_eigenvalue(&self) -> f64 {
        self.outcomes()
            .iter()
            .map(|p| hermitian_eig(p).map_or(f64::NEG_INFINITY, |e| e.min()))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Joint distribution of letter `j` and outcome `k`, with marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTable {
    letters: usize,
    outcomes: usize,
    joint: Vec<f64>,
    row_marginals: Vec<f64>,
    col_marginals: Vec<f64>,
}

impl ProbTable {
    /// Builds a table from row-major joint probabilities (`letters × outcomes`).
    /// Entries are clamped to `[0, 1]`.
    pub fn from_joint(letters: usize, outcomes: usize, joint: Vec<f64>) -> Self {
        assert_eq!(joint.len(), letters * outcomes, "joint table shape");
        let joint: Vec<f64> = joint.into_iter().map(|p| p.clamp(0.0, 1.0)).collect();
        let row_marginals = (0..letters)
            .map(|j| canonical_sum(&mut joint[j * outcomes..(j + 1) * outcomes].to_vec()))
            .collect();
        let col_marginals = (0..outcomes)
            .map(|k| {
                let mut col: Vec<f64> = (0..letters).map(|j| joint[j * outcomes + k]).collect();
                canonical_sum(&mut col)
            })
            .collect();
        Self {
            letters,
            outcomes,
            joint,
            row_marginals,
            col_marginals,
        }
    }

    pub fn num_letters(&self) -> usize {
        self.letters
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn p(&self, j: usize, k: usize) -> f64 {
        self.joint[j * self.outcomes + k]
    }

    pub fn joint(&self) -> &[f64] {
        &self.joint
    }

    pub fn row_marginal(&self, j: usize) -> f64 {
        self.row_marginals[j]
    }

    pub fn col_marginal(&self, k: usize) -> f64 {
        self.col_marginals[k]
    }

    pub fn row_marginals(&self) -> &[f64] {
        &self.row_marginals
    }

    pub fn col_marginals(&self) -> &[f64] {
        &self.col_marginals
    }

    pub fn total(&self) -> f64 {
        canonical_sum(&mut self.joint.clone())
    }

    /// Outcome `k` column as a vector over letters.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.letters).map(|j| self.p(j, k)).collect()
    }
}

/// `p_jk = Re tr(ρ_j Π_k)`, clamped to `[0, 1]`.
pub fn probability_table(e: &Ensemble, m: &Povm) -> Result<ProbTable> {
    if e.dim() != m.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: m.dim(),
        });
    }
    let outcomes = m.outcomes();
    let mut joint = Vec::with_capacity(e.len() * outcomes.len());
    for rho in e.ops() {
        if rho.dim() != e.dim() {
            return Err(Error::DimensionMismatch {
                expected: e.dim(),
                found: rho.dim(),
            });
        }
        for pi in &outcomes {
            joint.push(rho.trace_of_product(pi).re);
        }
    }
    Ok(ProbTable::from_joint(e.len(), outcomes.len(), joint))
}

/// Pure state `|ψ⟩⟨ψ|` with `ψ` normalized, scaled to trace `weight`.
pub fn weighted_pure_state(amplitudes: &[Complex64], weight: f64) -> CMatrix {
    let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
    CMatrix::projector(amplitudes).scale(weight / norm)
}
