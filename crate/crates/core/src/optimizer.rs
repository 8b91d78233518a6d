//! Steepest-ascent search for the POVM of maximal mutual information.
//!
//! Each iteration computes the gradient operators `R_k`, forms the factor
//! space gradient `Γ_k = A_k R_k`, optionally mixes in the previous direction
//! (Polak–Ribière), normalizes it to unit spectral norm, and line-searches the
//! renormalized path
//!
//! ```text
//! B_k = A_k + ε D_k,   S = Σ_k B_k† B_k,   A_k' = B_k S^{-1/2}
//! ```
//!
//! over `ε ∈ [0, bracket_max]` by golden section. The renormalization keeps
//! every iterate a valid POVM. A step is only taken if it strictly improves
//! the mutual information, so the per-iteration trace never decreases.
//!
//! Random stream order, per restart `r` seeded with `seed + r`: the `K`
//! initial factors (see [`random_gaussian_matrix`]), then one uniform draw
//! per iteration deciding between the plain and the conjugate direction.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::info::{gradient_operators, mutual_information, GradientSet};
use crate::linalg::{hermitian_eig, random_gaussian_matrix, CMatrix, RngState, PSEUDO_INVERSE_REL_FLOOR};
use crate::model::{probability_table, Ensemble, Povm};
use crate::reduce::{drop_null_outcomes, merge_equivalent_outcomes};

/// Inverse golden ratio `(√5 − 1)/2`.
pub const INV_GOLDEN: f64 = 0.618_033_988_749_894_9;

const INIT_ATTEMPTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearchConfig {
    /// Upper end of the step bracket `[0, bracket_max]`.
    pub bracket_max: f64,
    /// Stop once the bracket is narrower than `shrink_tol * bracket_max`.
    pub shrink_tol: f64,
    pub max_evals: usize,
}

impl Default for LineSearchConfig {
    fn default() -> Self {
        Self {
            bracket_max: 1.0,
            shrink_tol: 1e-6,
            max_evals: 100,
        }
    }
}

/// Tolerances for post-processing the converged POVM.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionConfig {
    /// Outcomes with `tr Π_k` at or below this are removed.
    pub null_tol: f64,
    /// Relative tolerance for treating two outcomes as equivalent.
    pub merge_rel_tol: f64,
}

impl Default for ReductionConfig {
    fn default() -> Self {
        Self {
            null_tol: 1e-10,
            merge_rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    /// Probability of using the plain gradient in an iteration.
    pub steepest_prob: f64,
    /// Relative tolerance of the stopping rule, see [`is_converged`].
    pub tolerance: f64,
    pub seed: u64,
    pub max_iterations: usize,
    pub line_search: LineSearchConfig,
    pub restarts: usize,
    pub reduction: ReductionConfig,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            steepest_prob: 0.02,
            tolerance: 1e-9,
            seed: 0,
            max_iterations: 10_000,
            line_search: LineSearchConfig::default(),
            restarts: 1,
            reduction: ReductionConfig::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.steepest_prob) {
            return Err(Error::InvalidConfig("steepest_prob must lie in [0, 1]"));
        }
        if !(self.tolerance >= 0.0) || !self.tolerance.is_finite() {
            return Err(Error::InvalidConfig("tolerance must be a nonnegative number"));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1"));
        }
        let ls = &self.line_search;
        if !(ls.bracket_max > 0.0) || !(ls.shrink_tol > 0.0) || ls.max_evals < 3 {
            return Err(Error::InvalidConfig(
                "line search needs bracket_max > 0, shrink_tol > 0 and max_evals >= 3",
            ));
        }
        Ok(())
    }
}

/// `N²` outcomes always suffice for an optimal POVM in dimension `N`.
pub fn default_k_init(dim: usize) -> usize {
    dim * dim
}

/// Outcome of [`run`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    /// Mutual information after each iteration of the best restart.
    pub mi_trace: Vec<f64>,
    pub final_povm: Povm,
    /// `final_povm` with null outcomes dropped and equivalent ones merged.
    pub reduced_povm: Povm,
    pub iterations: usize,
    pub converged: bool,
    pub config_echo: OptimizerConfig,
    pub k_init: usize,
    /// Index of the restart whose result is reported.
    pub best_restart: usize,
    /// Final mutual information of every restart, in restart order.
    pub restart_final_mi: Vec<f64>,
}

impl RunReport {
    /// Final mutual information, i.e. the accessible-information estimate.
    pub fn final_mi(&self) -> f64 {
        self.mi_trace.last().copied().unwrap_or(0.0)
    }
}

/// Per-iteration snapshot handed to observers.
#[derive(Debug)]
pub struct Iterate<'a> {
    pub restart: usize,
    pub iteration: usize,
    pub mi: f64,
    pub povm: &'a Povm,
    pub used_steepest: bool,
    pub step: f64,
}

/// Search direction in factor space, one matrix per outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    pub components: Vec<CMatrix>,
}

impl DirectionSet {
    /// `⟨X, Y⟩ = Σ_k Re tr(X_k† Y_k)`.
    pub fn inner(&self, other: &DirectionSet) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(x, y)| x.inner(y))
            .sum()
    }

    pub fn max_spectral_norm(&self) -> f64 {
        self.components
            .iter()
            .map(CMatrix::spectral_norm)
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: f64) -> DirectionSet {
        DirectionSet {
            components: self.components.iter().map(|d| d.scale(factor)).collect(),
        }
    }

    /// Rescaled so the largest component has unit spectral norm; `None` if
    /// the direction vanishes.
    pub fn normalized(&self) -> Option<DirectionSet> {
        let norm = self.max_spectral_norm();
        if norm > 0.0 && norm.is_finite() {
            Some(self.scaled(1.0 / norm))
        } else {
            None
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|d| d.max_abs_diff(&CMatrix::zeros(d.dim())) == 0.0)
    }
}

/// Conjugate-gradient memory: the previous raw gradient and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct CgMemory {
    pub gradient: DirectionSet,
    pub direction: DirectionSet,
}

/// Draws `K` Gaussian factors and renormalizes them to a complete POVM.
pub fn init_random_povm(dim: usize, k: usize, rng: &mut RngState) -> Result<Povm> {
    if dim == 0 || k == 0 {
        return Err(Error::InvalidConfig("POVM needs dim >= 1 and k >= 1"));
    }
    let mut last = Error::RankDeficient { min_eigenvalue: 0.0 };
    for _ in 0..INIT_ATTEMPTS {
        let raw: Vec<CMatrix> = (0..k).map(|_| random_gaussian_matrix(dim, rng)).collect();
        match renormalize(raw) {
            Ok(p) => return Ok(p),
            Err(e @ Error::RankDeficient { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// `A_k = B_k S^{-1/2}` with `S = Σ B_k† B_k`; fails if `S` is singular
/// beyond the pseudo-inverse floor.
pub(crate) fn renormalize(raw: Vec<CMatrix>) -> Result<Povm> {
    let dim = raw[0].dim();
    let mut s = CMatrix::zeros(dim);
    for b in &raw {
        s += &(&b.adjoint() * b);
    }
    let eig = hermitian_eig(&s)?;
    let floor = PSEUDO_INVERSE_REL_FLOOR * eig.max();
    if !(eig.min() > floor) {
        return Err(Error::RankDeficient {
            min_eigenvalue: eig.min(),
        });
    }
    let w = eig.map_spectrum(|l| 1.0 / libm::sqrt(l));
    Ok(Povm::from_factors_unchecked(raw.iter().map(|b| b * &w).collect()))
}

/// Polak–Ribière coefficient `max(0, ⟨Γ − Γ_prev, Γ⟩ / ⟨Γ_prev, Γ_prev⟩)`.
pub fn polak_ribiere_beta(previous: &DirectionSet, current: &DirectionSet) -> f64 {
    let denom = previous.inner(previous);
    if !(denom > 0.0) {
        return 0.0;
    }
    let beta = (current.inner(current) - previous.inner(current)) / denom;
    if beta.is_finite() {
        beta.max(0.0)
    } else {
        0.0
    }
}

/// Factor space gradient `Γ_k = A_k R_k`, combined with the previous direction
/// unless `use_steepest` is set or there is no memory.
pub fn ascent_direction(
    p: &Povm,
    g: &GradientSet,
    memory: Option<&CgMemory>,
    use_steepest: bool,
) -> Result<(DirectionSet, CgMemory)> {
    if g.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: g.len(),
        });
    }
    let gradient = DirectionSet {
        components: p.factors().iter().zip(&g.rks).map(|(a, r)| a * r).collect(),
    };
    let direction = match memory {
        Some(mem) if !use_steepest && mem.gradient.components.len() == gradient.components.len() => {
            let beta = polak_ribiere_beta(&mem.gradient, &gradient);
            DirectionSet {
                components: gradient
                    .components
                    .iter()
                    .zip(&mem.direction.components)
                    .map(|(gk, dk)| gk + &dk.scale(beta))
                    .collect(),
            }
        }
        _ => gradient.clone(),
    };
    let memory = CgMemory {
        gradient,
        direction: direction.clone(),
    };
    Ok((direction, memory))
}

/// One renormalized step of length `eps` along `d`.
pub fn apply_step(p: &Povm, d: &DirectionSet, eps: f64) -> Result<Povm> {
    if d.components.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: d.components.len(),
        });
    }
    let raw = p
        .factors()
        .iter()
        .zip(&d.components)
        .map(|(a, dk)| a + &dk.scale(eps))
        .collect();
    renormalize(raw)
}

/// Golden-section maximization of `f` on `[0, upper]`.
///
/// Returns the best sampled point; `f(0)` and `f(upper)` are always among the
/// samples, and ties keep the earliest sample. Non-finite values never win.
pub fn golden_section_max(
    mut f: impl FnMut(f64) -> f64,
    upper: f64,
    shrink_tol: f64,
    max_evals: usize,
) -> (f64, f64) {
    let mut best = (0.0, f(0.0));
    let mut evals = 1;
    let consider = |x: f64, fx: f64, best: &mut (f64, f64)| {
        if fx > best.1 || (best.1.is_nan() && !fx.is_nan()) {
            *best = (x, fx);
        }
    };
    let f_upper = f(upper);
    evals += 1;
    consider(upper, f_upper, &mut best);

    let (mut a, mut b) = (0.0, upper);
    let mut x1 = b - INV_GOLDEN * (b - a);
    let mut x2 = a + INV_GOLDEN * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    evals += 2;
    consider(x1, f1, &mut best);
    consider(x2, f2, &mut best);

    while b - a > shrink_tol * upper && evals < max_evals {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_GOLDEN * (b - a);
            f2 = f(x2);
            consider(x2, f2, &mut best);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_GOLDEN * (b - a);
            f1 = f(x1);
            consider(x1, f1, &mut best);
        }
        evals += 1;
    }
    best
}

/// Stopping rule: `2 (current − previous) ≤ tolerance (current + previous) + 1e-25`.
pub fn is_converged(previous_mi: f64, current_mi: f64, tolerance: f64) -> bool {
    2.0 * (current_mi - previous_mi) <= tolerance * (current_mi + previous_mi) + 1.0e-25
}

struct SingleRun {
    mi_trace: Vec<f64>,
    povm: Povm,
    converged: bool,
}

fn mi_of(e: &Ensemble, p: &Povm) -> Result<f64> {
    Ok(mutual_information(&probability_table(e, p)?))
}

fn run_single(
    e: &Ensemble,
    cfg: &OptimizerConfig,
    k_init: usize,
    restart: usize,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<SingleRun> {
    let mut rng = RngState::from_seed(cfg.seed.wrapping_add(restart as u64));
    let mut povm = init_random_povm(e.dim(), k_init, &mut rng)?;
    let mut table = probability_table(e, &povm)?;
    let mut mi = mutual_information(&table);
    let mut memory: Option<CgMemory> = None;
    let mut mi_trace = Vec::new();
    let mut converged = false;
    let ls = cfg.line_search;

    for iteration in 0..cfg.max_iterations {
        let grads = gradient_operators(e, &table)?;
        let use_steepest = rng.uniform() < cfg.steepest_prob;
        let (direction, mem) = ascent_direction(&povm, &grads, memory.as_ref(), use_steepest)?;
        memory = Some(mem);

        let mut step = 0.0;
        let mut new_mi = mi;
        if let Some(unit) = direction.normalized() {
            let (eps, best) = golden_section_max(
                |eps| {
                    apply_step(&povm, &unit, eps)
                        .and_then(|p| mi_of(e, &p))
                        .unwrap_or(f64::NEG_INFINITY)
                },
                ls.bracket_max,
                ls.shrink_tol,
                ls.max_evals,
            );
            if eps > 0.0 && best > mi {
                povm = apply_step(&povm, &unit, eps)?;
                table = probability_table(e, &povm)?;
                new_mi = mutual_information(&table);
                step = eps;
            }
        }
        mi_trace.push(new_mi);
        observer(&Iterate {
            restart,
            iteration,
            mi: new_mi,
            povm: &povm,
            used_steepest: use_steepest,
            step,
        });
        let done = is_converged(mi, new_mi, cfg.tolerance);
        mi = new_mi;
        if done {
            converged = true;
            break;
        }
    }
    Ok(SingleRun {
        mi_trace,
        povm,
        converged,
    })
}

/// [`run_with_observer`] without an observer.
pub fn run(e: &Ensemble, cfg: &OptimizerConfig, k_init: usize) -> Result<RunReport> {
    run_with_observer(e, cfg, k_init, &mut |_| {})
}

/// Runs `cfg.restarts` independent ascents and reports the one with the best
/// final mutual information (lowest restart index on ties). The observer sees
/// every iteration of every restart.
pub fn run_with_observer(
    e: &Ensemble,
    cfg: &OptimizerConfig,
    k_init: usize,
    observer: &mut dyn FnMut(&Iterate<'_>),
) -> Result<RunReport> {
    let report = e.validate();
    if !report.is_valid() {
        return Err(Error::InvalidEnsemble(report));
    }
    cfg.validate()?;
    if k_init == 0 {
        return Err(Error::InvalidConfig("k_init must be at least 1"));
    }

    let mut best: Option<(usize, SingleRun)> = None;
    let mut restart_final_mi = Vec::with_capacity(cfg.restarts);
    for restart in 0..cfg.restarts {
        let single = run_single(e, cfg, k_init, restart, observer)?;
        let final_mi = single.mi_trace.last().copied().unwrap_or(f64::NEG_INFINITY);
        restart_final_mi.push(final_mi);
        let better = match &best {
            None => true,
            Some((_, b)) => final_mi > b.mi_trace.last().copied().unwrap_or(f64::NEG_INFINITY),
        };
        if better {
            best = Some((restart, single));
        }
    }
    let (best_restart, single) = best.expect("at least one restart");
    let reduced_povm = reduce_povm(e, &single.povm, &cfg.reduction)?;
    Ok(RunReport {
        iterations: single.mi_trace.len(),
        mi_trace: single.mi_trace,
        final_povm: single.povm,
        reduced_povm,
        converged: single.converged,
        config_echo: *cfg,
        k_init,
        best_restart,
        restart_final_mi,
    })
}

/// Drops null outcomes, then merges equivalent ones.
pub fn reduce_povm(e: &Ensemble, p: &Povm, cfg: &ReductionConfig) -> Result<Povm> {
    let dropped = drop_null_outcomes(p, cfg.null_tol)?;
    let table = probability_table(e, &dropped)?;
    Ok(merge_equivalent_outcomes(&dropped, &table, cfg.merge_rel_tol))
}
