//! Dense complex linear-algebra helpers shared by every module.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub use nalgebra::Complex;

pub type C64 = Complex<f64>;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative eigenvalue floor below which a covariance is rejected rather
/// than clipped: `-PSD_CLIP_TOLERANCE * tr(R) / M`.
pub const PSD_CLIP_TOLERANCE: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(m: usize) -> CMat {
    CMat::identity(m, m)
}

/// `R + s I`.
pub fn add_scaled_identity(r: &CMat, s: f64) -> CMat {
    let mut out = r.clone();
    for i in 0..out.nrows() {
        out[(i, i)] += s;
    }
    out
}

/// Replaces `A` by `(A + A^H) / 2`.
pub fn hermitize(a: &mut CMat) {
    let n = a.nrows();
    for j in 0..n {
        a[(j, j)].im = 0.0;
        for i in (j + 1)..n {
            let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
            a[(i, j)] = avg;
            a[(j, i)] = avg.conj();
        }
    }
}

/// `tr(A B)` in `O(M^2)` without forming the product.
pub fn trace_of_product(a: &CMat, b: &CMat) -> C64 {
    debug_assert_eq!(a.ncols(), b.nrows());
    debug_assert_eq!(a.nrows(), b.ncols());
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

pub fn trace(a: &CMat) -> C64 {
    a.diagonal().iter().copied().sum()
}

/// `||A||_F^2`.
pub fn frobenius_sq(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// `||A - A^H||_F`.
pub fn hermitian_deviation(a: &CMat) -> f64 {
    (a - a.adjoint()).norm()
}

/// Smallest eigenvalue of the Hermitian part of `a`.
pub fn min_eigenvalue(a: &CMat) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let mut h = a.clone();
    hermitize(&mut h);
    SymmetricEigen::new(h).eigenvalues.min()
}

/// Column-major `vec(A)`.
pub fn vectorize(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

/// Inverse of [`vectorize`] for an `rows x cols` matrix.
pub fn unvectorize(v: &CVec, rows: usize, cols: usize) -> Result<CMat> {
    if v.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "cannot reshape length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMat::from_column_slice(rows, cols, v.as_slice()))
}

/// `z^H A z` for Hermitian `A`, returned as a real number.
pub fn quadratic_form(a: &CMat, z: &CVec) -> f64 {
    z.dotc(&(a * z)).re
}

/// Cholesky-backed solver for a Hermitian positive definite matrix.
#[derive(Clone, Debug)]
pub struct HpdSolver {
    chol: Cholesky<C64, Dyn>,
}

impl HpdSolver {
    pub fn new(a: &CMat) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!(
                "expected a square matrix, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        let mut h = a.clone();
        hermitize(&mut h);
        hermitian_cholesky(h)
            .map(|chol| Self { chol })
            .ok_or(Error::NotPositiveDefinite)
    }

    pub fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    pub fn solve_vec(&self, b: &CVec) -> CVec {
        self.chol.solve(b)
    }

    pub fn solve_mat(&self, b: &CMat) -> CMat {
        self.chol.solve(b)
    }

    /// `B A^{-1}` for the factored `A`.
    pub fn right_solve(&self, b: &CMat) -> CMat {
        // B A^{-1} = (A^{-1} B^H)^H since A is Hermitian.
        self.chol.solve(&b.adjoint()).adjoint()
    }

    pub fn inverse(&self) -> CMat {
        self.chol.inverse()
    }
}

/// Cholesky that also rejects indefinite input: the complex factorization
/// happily takes square roots of negative pivots, so the diagonal of `L` is
/// checked to be real and positive.
fn hermitian_cholesky(h: CMat) -> Option<Cholesky<C64, nalgebra::Dyn>> {
    let chol = Cholesky::new(h)?;
    let ok = chol
        .l_dirty()
        .diagonal()
        .iter()
        .all(|d| d.re > 0.0 && d.im.abs() <= 1e-12 * d.re && d.re.is_finite());
    ok.then_some(chol)
}

/// Whether the Hermitian matrix `h` admits a Cholesky factorization.
pub fn is_positive_definite(h: &CMat) -> bool {
    h.is_square() && hermitian_cholesky(h.clone()).is_some()
}

/// A factor `L` with `L L^H = R` for a PSD matrix `R`.
///
/// Tries Cholesky first and falls back to an eigen-decomposition for
/// singular matrices, clipping eigenvalues in `[-tol, 0)` to zero.
pub fn psd_factor(r: &CMat) -> Result<CMat> {
    let m = r.nrows();
    if !r.is_square() {
        return Err(Error::Dimension(format!(
            "expected a square matrix, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let mut h = r.clone();
    hermitize(&mut h);
    if let Some(chol) = hermitian_cholesky(h.clone()) {
        return Ok(chol.unpack());
    }
    let scale = trace(&h).re / m.max(1) as f64;
    let eig = SymmetricEigen::new(h);
    let floor = -PSD_CLIP_TOLERANCE * scale.abs().max(f64::MIN_POSITIVE);
    let min = eig.eigenvalues.min();
    if min < floor {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    let mut factor = eig.eigenvectors.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let s = lambda.max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    Ok(factor)
}

/// Draws `len` i.i.d. `CN(0, 1)` entries.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CVec::from_fn(len, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * s, im * s)
    })
}

/// `A^T ⊗ B`, the matrix acting on `vec(X)` as `vec(B X A)`.
///
/// Only meant for small dimensions; the result is `(mn) x (mn)`.
pub fn kron_transpose_left(a: &CMat, b: &CMat) -> CMat {
    a.transpose().kronecker(b)
}

/// `max |a_ij - b_ij| / max(|b|_max, tiny)`; handy for dual-path checks.
pub fn relative_difference(a: &CMat, b: &CMat) -> f64 {
    let denom = b.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / denom
}

pub fn relative_difference_vec(a: &CVec, b: &CVec) -> f64 {
    let denom = b.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / denom
}
