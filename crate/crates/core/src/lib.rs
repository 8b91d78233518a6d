//! Accessible information of a quantum ensemble.
//!
//! Given weighted statistical operators `ρ_j` (traces summing to one), the
//! optimizer searches for the POVM `{Π_k}` maximizing the mutual information
//! between letter and outcome. The search is a steepest ascent in the space
//! of POVM factors, accelerated by Polak–Ribière conjugate directions, with a
//! golden-section line search along a completeness-preserving path.
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
// `!(x <= tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod error;
pub mod info;
pub mod linalg;
pub mod model;
pub mod optimizer;
pub mod reduce;

pub use error::{Error, Result};
pub use info::{gradient_operators, holevo_bound, mutual_information, GradientSet};
pub use linalg::{CMatrix, RngState};
pub use model::{probability_table, Ensemble, Povm, ProbTable, ValidationReport, Violation};
pub use num_complex::Complex64;
pub use optimizer::{
    run, run_with_observer, Iterate, LineSearchConfig, OptimizerConfig, ReductionConfig,
    RunReport,
};
