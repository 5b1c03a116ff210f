//! Optimal bilinear equalizer: the deterministic `W_k^n` applied to the LS
//! estimate that maximizes the use-and-then-forget SINR.
//!
//! Two routes produce `W`. The explicit route uses the alpha coefficients
//! directly. The vectorized route solves the generalized Rayleigh quotient
//! in `C^{N M^2}` with `w = (r_o r_o^H + U)^{-1} r_k`, where
//! `U = blockdiag((Q_tr^n)^T ⊗ Q^n)` and `r_k = vec(R_k)`. Both routes give
//! the same matrices, so the vectorized one serves as a cross-check.

use super::{other_ue, CoefficientTable};
use crate::error::{Error, Result};
use crate::estimation::{LinkStatistics, StatMatrices};
use crate::linalg::{self, c64, CMat, CVec, HpdSolver, C64};
use crate::model::CovarianceSet;

/// Upper bound on `N M^2` for the vectorized route.
pub const VECTORIZED_GUARD: usize = 1 << 24;

/// Up to this `M` the vectorized route factors the dense `M^2 x M^2`
/// Kronecker block; above it the block is applied through
/// `(A^T ⊗ B)^{-1} vec(X) = vec(B^{-1} X A^{-1})`.
pub const DENSE_KRONECKER_MAX_ANTENNAS: usize = 16;

/// `c'_k = sum_i alpha_{k,o}^i / (1/M + sum_i alpha_{o,o}^i)`.
pub fn obe_coefficient(alpha: &CoefficientTable, ue: usize) -> C64 {
    let o = other_ue(ue);
    let m = alpha.antennas() as f64;
    alpha.sum(ue, o) / (c64(1.0 / m, 0.0) + alpha.sum(o, o))
}

/// `W_k^n = (Q^n)^{-1}(R_k^n - c'_k R_o^n)(Q_tr^n)^{-1}`.
pub fn obe_matrices_explicit(
    stats: &LinkStatistics,
    alpha: &CoefficientTable,
    ue: usize,
) -> Result<Vec<CMat>> {
    if stats.num_ue() != 2 {
        return Err(Error::UnsupportedUeCount {
            scheme: "OBE".into(),
            num_ue: stats.num_ue(),
        });
    }
    let c = obe_coefficient(alpha, ue);
    let o = other_ue(ue);
    Ok((0..stats.num_bs())
        .map(|n| {
            let inner = stats.filter(ue, n) - stats.filter(o, n) * c;
            stats.q_solver(n).solve_mat(&inner)
        })
        .collect())
}

/// Output of the vectorized route.
#[derive(Debug, Clone)]
pub struct VectorizedObe {
    /// Stacked `w_k` of length `N M^2`.
    pub w: CVec,
    /// `vec^{-1}` of each per-BS slice of `w`.
    pub blocks: Vec<CMat>,
    /// `r_k^H (r_o r_o^H + U)^{-1} r_k`, the optimal use-and-then-forget SINR.
    pub sinr: f64,
}

enum KroneckerBlock {
    Dense(HpdSolver),
    Structured { q: HpdSolver, q_tr: HpdSolver },
}

impl KroneckerBlock {
    fn new(q_tr: &CMat, q: &CMat) -> Result<Self> {
        if q.nrows() <= DENSE_KRONECKER_MAX_ANTENNAS {
            let u = linalg::kron_transpose_left(q_tr, q);
            Ok(Self::Dense(HpdSolver::new(&u)?))
        } else {
            Ok(Self::Structured {
                q: HpdSolver::new(q)?,
                q_tr: HpdSolver::new(q_tr)?,
            })
        }
    }

    /// `U^{-1} vec(X)` with `U = Q_tr^T ⊗ Q`.
    fn solve(&self, x: &CMat) -> CVec {
        match self {
            Self::Dense(solver) => solver.solve_vec(&linalg::vectorize(x)),
            Self::Structured { q, q_tr } => {
                let left = q.solve_mat(x);
                linalg::vectorize(&q_tr.right_solve(&left))
            }
        }
    }
}

/// Solves the vectorized Rayleigh-quotient problem for UE `ue` of a pair.
pub fn obe_matrices_vectorized(
    cov: &CovarianceSet,
    stat: &StatMatrices,
    ue: usize,
    guard: usize,
) -> Result<VectorizedObe> {
    if cov.num_ue() != 2 {
        return Err(Error::UnsupportedUeCount {
            scheme: "OBE".into(),
            num_ue: cov.num_ue(),
        });
    }
    let m = cov.antennas();
    let n_bs = cov.num_bs();
    let required = n_bs * m * m;
    if required > guard {
        return Err(Error::VectorizedGuard {
            required,
            limit: guard,
        });
    }
    let o = other_ue(ue);
    // Per-BS U^{-1} r_k and U^{-1} r_o.
    let mut s_k = Vec::with_capacity(n_bs);
    let mut s_o = Vec::with_capacity(n_bs);
    for n in 0..n_bs {
        let block = KroneckerBlock::new(&stat.q_tr[n], &stat.q[n])?;
        s_k.push(block.solve(cov.block(ue, n)));
        s_o.push(block.solve(cov.block(o, n)));
    }
    let r = |k: usize, n: usize| linalg::vectorize(cov.block(k, n));
    let mut o_dot_k = C64::new(0.0, 0.0);
    let mut o_dot_o = C64::new(0.0, 0.0);
    for n in 0..n_bs {
        let r_o = r(o, n);
        o_dot_k += r_o.dotc(&s_k[n]);
        o_dot_o += r_o.dotc(&s_o[n]);
    }
    // Sherman-Morrison on the rank-one term r_o r_o^H.
    let coeff = o_dot_k / (c64(1.0, 0.0) + o_dot_o);
    let mut w = CVec::zeros(required);
    let mut blocks = Vec::with_capacity(n_bs);
    let mut sinr = C64::new(0.0, 0.0);
    for n in 0..n_bs {
        let w_n = &s_k[n] - &s_o[n] * coeff;
        sinr += r(ue, n).dotc(&w_n);
        w.rows_mut(n * m * m, m * m).copy_from(&w_n);
        blocks.push(linalg::unvectorize(&w_n, m, m)?);
    }
    Ok(VectorizedObe {
        w,
        blocks,
        sinr: sinr.re,
    })
}

/// The two weights `a` combining `R_k` and `R_o` in the OBE matrix of UE `ue`,
/// `a = (1/M) / det * (1/M + alpha_oo, -alpha_ko)` with
/// `det = (1/M + alpha_kk)(1/M + alpha_oo) - |alpha_ko|^2`.
///
/// `W_k = Q^{-1}(a_0 R_k + a_1 R_o) Q_tr^{-1}` is a positive multiple of the
/// explicit OBE matrices.
pub fn obe_pair_weights(alpha: &CoefficientTable, ue: usize) -> [C64; 2] {
    let o = other_ue(ue);
    let inv_m = 1.0 / alpha.antennas() as f64;
    let a_kk = alpha.sum(ue, ue).re;
    let a_oo = alpha.sum(o, o).re;
    let a_ko = alpha.sum(ue, o);
    let det = (inv_m + a_kk) * (inv_m + a_oo) - a_ko.norm_sqr();
    let scale = inv_m / det;
    [c64(scale * (inv_m + a_oo), 0.0), -a_ko * scale]
}

/// `v^n = W^n ls^n`.
pub fn obe_combiner(w: &[CMat], ls: &[CVec]) -> Vec<CVec> {
    w.iter().zip(ls).map(|(w, l)| w * l).collect()
}

/// The same combiner written on the MMSE estimates,
/// `v_k^n = (Q^n)^{-1}(hhat_k^n - c'_k hhat_o^n)`.
pub fn obe_combiner_from_estimates(
    stats: &LinkStatistics,
    estimates: &[Vec<CVec>],
    alpha: &CoefficientTable,
    ue: usize,
) -> Vec<CVec> {
    let c = obe_coefficient(alpha, ue);
    let o = other_ue(ue);
    (0..stats.num_bs())
        .map(|n| {
            stats
                .q_solver(n)
                .solve_vec(&(&estimates[ue][n] - &estimates[o][n] * c))
        })
        .collect()
}
