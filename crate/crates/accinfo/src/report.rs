//! Machine-readable (JSON) form of a run. Schema `accinfo-report/1`:
//!
//! ```text
//! {
//!   "format": "accinfo-report/1",
//!   "rng": "chacha20",
//!   "dimension": N, "letters": J, "k_init": K,
//!   "config": { "steepest_prob", "tolerance", "seed", "max_iterations",
//!               "restarts", "line_search": { "bracket_max", "shrink_tol", "max_evals" },
//!               "reduction": { "null_tol", "merge_rel_tol" } },
//!   "iterations": n, "converged": bool,
//!   "accessible_information": final MI in bits,
//!   "holevo_bound": bits,
//!   "mi_trace": [n numbers],
//!   "best_restart": r, "restart_final_mi": [numbers],
//!   "final_povm": [matrix], "reduced_povm": [matrix]
//! }
//! ```
//!
//! A matrix is a list of rows, each row a list of `[re, im]` pairs. POVM
//! entries are the outcomes `Π_k`.

use accinfo_core::linalg::{CMatrix, RNG_ALGORITHM};
use accinfo_core::{Ensemble, OptimizerConfig, RunReport};
use serde::Serialize;

pub const FORMAT: &str = "accinfo-report/1";

type JsonMatrix = Vec<Vec<[f64; 2]>>;

fn matrix(m: &CMatrix) -> JsonMatrix {
    m.rows()
        .iter()
        .map(|row| row.iter().map(|z| [z.re, z.im]).collect())
        .collect()
}

#[derive(Debug, Serialize)]
pub struct LineSearchJson {
    pub bracket_max: f64,
    pub shrink_tol: f64,
    pub max_evals: usize,
}

#[derive(Debug, Serialize)]
pub struct ReductionJson {
    pub null_tol: f64,
    pub merge_rel_tol: f64,
}

#[derive(Debug, Serialize)]
pub struct ConfigJson {
    pub steepest_prob: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub max_iterations: usize,
    pub restarts: usize,
    pub line_search: LineSearchJson,
    pub reduction: ReductionJson,
}

impl From<&OptimizerConfig> for ConfigJson {
    fn from(c: &OptimizerConfig) -> Self {
        Self {
            steepest_prob: c.steepest_prob,
            tolerance: c.tolerance,
            seed: c.seed,
            max_iterations: c.max_iterations,
            restarts: c.restarts,
            line_search: LineSearchJson {
                bracket_max: c.line_search.bracket_max,
                shrink_tol: c.line_search.shrink_tol,
                max_evals: c.line_search.max_evals,
            },
            reduction: ReductionJson {
                null_tol: c.reduction.null_tol,
                merge_rel_tol: c.reduction.merge_rel_tol,
            },
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ReportJson {
    pub format: &'static str,
    pub rng: &'static str,
    pub dimension: usize,
    pub letters: usize,
    pub k_init: usize,
    pub config: ConfigJson,
    pub iterations: usize,
    pub converged: bool,
    pub accessible_information: f64,
    pub holevo_bound: Option<f64>,
    pub mi_trace: Vec<f64>,
    pub best_restart: usize,
    pub restart_final_mi: Vec<f64>,
    pub final_povm: Vec<JsonMatrix>,
    pub reduced_povm: Vec<JsonMatrix>,
}

impl ReportJson {
    pub fn new(report: &RunReport, e: &Ensemble) -> Self {
        Self {
            format: FORMAT,
            rng: RNG_ALGORITHM,
            dimension: e.dim(),
            letters: e.len(),
            k_init: report.k_init,
            config: ConfigJson::from(&report.config_echo),
            iterations: report.iterations,
            converged: report.converged,
            accessible_information: report.final_mi(),
            holevo_bound: accinfo_core::holevo_bound(e).ok(),
            mi_trace: report.mi_trace.clone(),
            best_restart: report.best_restart,
            restart_final_mi: report.restart_final_mi.clone(),
            final_povm: report.final_povm.outcomes().iter().map(matrix).collect(),
            reduced_povm: report.reduced_povm.outcomes().iter().map(matrix).collect(),
        }
    }
}

pub fn to_json(report: &RunReport, e: &Ensemble) -> String {
    // only finite floats and plain structs; serialization cannot fail
    let mut s = serde_json::to_string_pretty(&ReportJson::new(report, e)).expect("serializable report");
    s.push('\n');
    s
}
