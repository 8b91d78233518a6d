//! Dense complex matrices and the handful of spectral routines the optimizer
//! needs: hermitian eigendecomposition, PSD (inverse) square roots, and seeded
//! Gaussian sampling.

use alloc::vec::Vec;
use core::ops::{Add, AddAssign, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Entrywise tolerance on `|m - m†|` for a matrix to count as hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Smallest eigenvalue still accepted as "non-negative".
pub const PSD_TOL: f64 = 1e-10;

/// Default pseudo-inverse floor, relative to the largest eigenvalue.
pub const PSEUDO_INVERSE_REL_FLOOR: f64 = 1e-12;

/// Square complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix(DMatrix<Complex64>);

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(DMatrix::identity(dim, dim))
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize, usize) -> Complex64) -> Self {
        Self(DMatrix::from_fn(dim, dim, f))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Builds a matrix from row vectors. Rows must all have length equal to
    /// the number of rows.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }
        Ok(Self::from_fn(n, |i, j| rows[i][j]))
    }

    /// Outer product `|v⟩⟨v|`.
    pub fn projector(v: &[Complex64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn rows(&self) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn as_inner(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    /// `tr(self · other)` without forming the product.
    pub fn trace_of_product(&self, other: &CMatrix) -> Complex64 {
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                acc += self.0[(a, b)] * other.0[(b, a)];
            }
        }
        acc
    }

    /// Real Frobenius inner product `Re tr(self† other)`.
    pub fn inner(&self, other: &CMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(x, y)| (x.conj() * y).re)
            .sum()
    }

    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise deviation from hermiticity.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(m + m†) / 2`.
    pub fn symmetrized(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * Complex64::new(0.5, 0.0))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        let gram = self.adjoint().mul(self);
        // gram is hermitian by construction
        match hermitian_eig(&gram) {
            Ok(eig) => libm::sqrt(eig.values.last().copied().unwrap_or(0.0).max(0.0)),
            Err(_) => f64::NAN,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Add<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl Sub<&CMatrix> for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.0 += &rhs.0;
    }
}

impl From<DMatrix<Complex64>> for CMatrix {
    fn from(m: DMatrix<Complex64>) -> Self {
        assert!(m.is_square(), "CMatrix must be square");
        Self(m)
    }
}

/// Spectral decomposition `m = V diag(values) V†`, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// `V diag(f(λ)) V†`.
    pub fn map_spectrum(&self, mut f: impl FnMut(f64) -> f64) -> CMatrix {
        let v = self.vectors.as_inner();
        let n = self.values.len();
        let scaled: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        CMatrix::from_fn(n, |i, j| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, s) in scaled.iter().enumerate() {
                if *s != 0.0 {
                    acc += v[(i, k)] * v[(j, k)].conj() * *s;
                }
            }
            acc
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|l| l)
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }
}

/// Eigendecomposition of a hermitian matrix. The input is symmetrized first,
/// so defects up to [`HERMITIAN_TOL`] are absorbed.
pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEigen> {
    let defect = m.hermiticity_defect();
    if !(defect <= HERMITIAN_TOL) {
        return Err(Error::NotHermitian { defect });
    }
    let eig = m.symmetrized().0.symmetric_eigen();
    let n = m.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

fn check_psd(eig: &HermitianEigen) -> Result<()> {
    let lowest = eig.min();
    if lowest < -PSD_TOL {
        return Err(Error::NotPsd { eigenvalue: lowest });
    }
    Ok(())
}

/// Pseudo-inverse square root: `1/√λ` on eigenvalues above `floor`, zero at
/// or below it.
pub fn inv_sqrt_psd(m: &CMatrix, floor: f64) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    check_psd(&eig)?;
    Ok(eig.map_spectrum(|l| if l > floor { 1.0 / libm::sqrt(l) } else { 0.0 }))
}

/// [`inv_sqrt_psd`] with the floor at [`PSEUDO_INVERSE_REL_FLOOR`] times the
/// largest eigenvalue.
pub fn inv_sqrt_psd_default(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    check_psd(&eig)?;
    let floor = PSEUDO_INVERSE_REL_FLOOR * eig.max().max(0.0);
    Ok(eig.map_spectrum(|l| if l > floor { 1.0 / libm::sqrt(l) } else { 0.0 }))
}

/// Hermitian PSD square root; eigenvalues in `[-PSD_TOL, 0)` are treated as 0.
pub fn sqrt_psd(m: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(m)?;
    check_psd(&eig)?;
    Ok(eig.map_spectrum(|l| libm::sqrt(l.max(0.0))))
}

/// Name of the generator behind [`RngState`], recorded in output headers.
pub const RNG_ALGORITHM: &str = "chacha20";

/// Seeded deterministic random stream (ChaCha20, seeded via
/// `seed_from_u64`). Single owner; clone to fork an identical stream.
#[derive(Clone, Debug)]
pub struct RngState(ChaCha20Rng);

impl RngState {
    pub fn from_seed(seed: u64) -> Self {
        Self(ChaCha20Rng::seed_from_u64(seed))
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }
}

/// Matrix with independent standard-normal real and imaginary parts, drawn
/// row-major, real part before imaginary part.
pub fn random_gaussian_matrix(dim: usize, rng: &mut RngState) -> CMatrix {
    let mut entries = Vec::with_capacity(dim * dim);
    for _ in 0..dim * dim {
        let re = rng.standard_normal();
        let im = rng.standard_normal();
        entries.push(Complex64::new(re, im));
    }
    CMatrix(DMatrix::from_row_slice(dim, dim, &entries))
}

/// Random hermitian matrix `(G + G†)/2`.
pub fn random_hermitian(dim: usize, rng: &mut RngState) -> CMatrix {
    random_gaussian_matrix(dim, rng).symmetrized()
}

/// Sum of values in a fixed, order-independent sequence (ascending), so that
/// permuting the inputs cannot change the rounded result.
pub fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_eigen() {
        let eig = hermitian_eig(&CMatrix::identity(2)).unwrap();
        assert_eq!(eig.values.len(), 2);
        for v in &eig.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let v = &eig.vectors;
        let vv = &v.adjoint() * v;
        assert!(vv.max_abs_diff(&CMatrix::identity(2)) < 1e-12);
    }

    #[test]
    fn diagonal_eigen_ascending() {
        let eig = hermitian_eig(&CMatrix::from_real_diagonal(&[3.0, -1.0])).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn eigen_reconstructs_random_hermitian() {
        let mut rng = RngState::from_seed(7);
        for dim in 1..=6 {
            let h = random_hermitian(dim, &mut rng);
            let eig = hermitian_eig(&h).unwrap();
            assert!(eig.reconstruct().max_abs_diff(&h) <= 1e-10);
            assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]])
            .unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn inv_sqrt_examples() {
        let id = inv_sqrt_psd(&CMatrix::identity(3), 0.0).unwrap();
        assert!(id.max_abs_diff(&CMatrix::identity(3)) < 1e-14);
        let d = inv_sqrt_psd(&CMatrix::from_real_diagonal(&[4.0, 9.0]), 0.0).unwrap();
        let expected = CMatrix::from_real_diagonal(&[0.5, 1.0 / 3.0]);
        assert!(d.max_abs_diff(&expected) < 1e-14);
    }

    #[test]
    fn inv_sqrt_defining_property() {
        let mut rng = RngState::from_seed(11);
        for dim in 1..=5 {
            let a = random_gaussian_matrix(dim, &mut rng);
            let s = &(&a.adjoint() * &a) + &CMatrix::identity(dim).scale(1e-3);
            let w = inv_sqrt_psd_default(&s).unwrap();
            let check = &(&w * &s) * &w;
            assert!(check.max_abs_diff(&CMatrix::identity(dim)) < 1e-8);
            assert!(w.hermiticity_defect() < 1e-12);
            assert!(hermitian_eig(&w).unwrap().min() > 0.0);
        }
    }

    #[test]
    fn inv_sqrt_is_pseudo_inverse_on_singular_input() {
        let m = CMatrix::from_real_diagonal(&[4.0, 0.0]);
        let w = inv_sqrt_psd_default(&m).unwrap();
        assert!(w.max_abs_diff(&CMatrix::from_real_diagonal(&[0.5, 0.0])) < 1e-14);
    }

    #[test]
    fn inv_sqrt_rejects_negative() {
        let m = CMatrix::from_real_diagonal(&[1.0, -0.5]);
        assert!(matches!(inv_sqrt_psd(&m, 0.0), Err(Error::NotPsd { .. })));
    }

    #[test]
    fn sqrt_psd_squares_back() {
        let mut rng = RngState::from_seed(3);
        let a = random_gaussian_matrix(3, &mut rng);
        let p = &a.adjoint() * &a;
        let r = sqrt_psd(&p).unwrap();
        assert!((&r * &r).max_abs_diff(&p) < 1e-10);
    }

    #[test]
    fn gaussian_draws_advance_and_replay() {
        let mut rng = RngState::from_seed(42);
        let a = random_gaussian_matrix(2, &mut rng);
        let b = random_gaussian_matrix(2, &mut rng);
        assert_ne!(a, b);
        let mut replay = RngState::from_seed(42);
        assert_eq!(random_gaussian_matrix(2, &mut replay), a);
    }

    #[test]
    fn gaussian_second_moment() {
        let mut rng = RngState::from_seed(2024);
        let mut total = 0.0;
        let draws = 10_000;
        for _ in 0..draws {
            total += random_gaussian_matrix(1, &mut rng).get(0, 0).norm_sqr();
        }
        let mean = total / draws as f64;
        assert!((mean - 2.0).abs() < 0.1, "mean |z|^2 = {mean}");
    }

    #[test]
    fn spectral_norm_of_diagonal() {
        let m = CMatrix::from_real_diagonal(&[-3.0, 2.0]);
        assert!((m.spectral_norm() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn canonical_sum_ignores_order() {
        let mut a = [0.1, 1e-17, 0.7, 0.2, 3e-16];
        let mut b = [3e-16, 0.2, 0.7, 1e-17, 0.1];
        assert_eq!(canonical_sum(&mut a).to_bits(), canonical_sum(&mut b).to_bits());
    }
}
