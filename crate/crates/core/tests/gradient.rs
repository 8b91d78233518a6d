//! Finite-difference check of the gradient operators along the optimizer's
//! renormalized step path.

use accinfo_core::linalg::{random_gaussian_matrix, random_hermitian, CMatrix, RngState};
use accinfo_core::optimizer::{apply_step, ascent_direction, init_random_povm, DirectionSet};
use accinfo_core::{gradient_operators, mutual_information, probability_table, Ensemble, Povm};

const STEP: f64 = 1e-6;

pub fn random_ensemble(dim: usize, letters: usize, rng: &mut RngState) -> Ensemble {
    let ops: Vec<CMatrix> = (0..letters)
        .map(|_| {
            let a = random_gaussian_matrix(dim, rng);
            &a.adjoint() * &a
        })
        .collect();
    let total: f64 = ops.iter().map(|r| r.trace().re).sum();
    Ensemble::new(dim, ops.iter().map(|r| r.scale(1.0 / total)).collect()).unwrap()
}

/// First-order change of `Π_k` along `A_k → (A_k + ε D_k) S^{-1/2}`:
/// `dΠ_k = D_k†A_k + A_k†D_k − ½(G Π_k + Π_k G)`, `G = Σ_l (A_l†D_l + D_l†A_l)`.
fn outcome_derivatives(p: &Povm, d: &DirectionSet) -> Vec<CMatrix> {
    let dim = p.dim();
    let mut g = CMatrix::zeros(dim);
    let sym: Vec<CMatrix> = p
        .factors()
        .iter()
        .zip(&d.components)
        .map(|(a, dk)| &(&dk.adjoint() * a) + &(&a.adjoint() * dk))
        .collect();
    for s in &sym {
        g += s;
    }
    sym.iter()
        .enumerate()
        .map(|(k, s)| {
            let pi = p.outcome(k);
            let anti = &(&g * &pi) + &(&pi * &g);
            s - &anti.scale(0.5)
        })
        .collect()
}

fn slopes(e: &Ensemble, p: &Povm, d: &DirectionSet) -> (f64, f64) {
    let t = probability_table(e, p).unwrap();
    let base = mutual_information(&t);
    let g = gradient_operators(e, &t).unwrap();
    let analytic: f64 = outcome_derivatives(p, d)
        .iter()
        .zip(&g.rks)
        .map(|(dpi, r)| dpi.trace_of_product(r).re)
        .sum();
    let moved = apply_step(p, d, STEP).unwrap();
    let fd = (mutual_information(&probability_table(e, &moved).unwrap()) - base) / STEP;
    (analytic, fd)
}

#[test]
fn finite_difference_matches_gradient_along_ascent_path() {
    let mut rng = RngState::from_seed(0x5eed);
    let mut worst = 0.0f64;
    for i in 0..50 {
        let dim = 2 + i % 3;
        let letters = 2 + i % 4;
        let e = random_ensemble(dim, letters, &mut rng);
        let k = 2 + i % 5;
        let p = init_random_povm(dim, k, &mut rng).unwrap();
        let t = probability_table(&e, &p).unwrap();
        let g = gradient_operators(&e, &t).unwrap();
        let (d, _) = ascent_direction(&p, &g, None, true).unwrap();
        let d = d.normalized().unwrap();
        let (analytic, fd) = slopes(&e, &p, &d);
        assert!(analytic > 0.0);
        let rel = (fd - analytic).abs() / analytic.abs();
        worst = worst.max(rel);
        assert!(rel <= 1e-4, "point {i}: analytic {analytic:e} fd {fd:e} rel {rel:e}");
    }
    println!("worst relative error {worst:e}");
}

#[test]
fn finite_difference_matches_gradient_along_random_directions() {
    let mut rng = RngState::from_seed(77);
    for i in 0..50 {
        let dim = 2 + i % 3;
        let e = random_ensemble(dim, 2 + i % 4, &mut rng);
        let k = 2 + i % 5;
        let p = init_random_povm(dim, k, &mut rng).unwrap();
        let d = DirectionSet {
            components: p.factors().iter().map(|a| a * &random_hermitian(dim, &mut rng)).collect(),
        }
        .normalized()
        .unwrap();
        let (analytic, fd) = slopes(&e, &p, &d);
        // forward-difference truncation is O(STEP), so small slopes need an
        // absolute allowance
        assert!(
            (fd - analytic).abs() <= 1e-4 * analytic.abs() + 1e-6,
            "point {i}: analytic {analytic:e} fd {fd:e}"
        );
    }
}

#[test]
fn gradient_slope_is_gauge_free() {
    // a common hermitian factor on every A_k leaves the outcomes unchanged
    let mut rng = RngState::from_seed(3);
    let e = random_ensemble(3, 3, &mut rng);
    let p = init_random_povm(3, 4, &mut rng).unwrap();
    let h = random_hermitian(3, &mut rng);
    let d = DirectionSet {
        components: p.factors().iter().map(|a| a * &h).collect(),
    };
    let (analytic, fd) = slopes(&e, &p, &d);
    assert!(analytic.abs() < 1e-12);
    assert!(fd.abs() < 1e-8);
}
