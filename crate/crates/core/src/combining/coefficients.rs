use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::estimation::{LinkStatistics, StatMatrices};
use crate::linalg::{self, CMat, HpdSolver, C64};
use crate::model::CovarianceSet;

/// Per-BS `K x K` tables of normalized statistical traces and their sums
/// over BSs.
///
/// Diagonal entries are real and nonnegative; off-diagonal entries are
/// complex in general and satisfy `x_kj = conj(x_jk)`.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    antennas: usize,
    per_bs: Vec<DMatrix<C64>>,
    sums: DMatrix<C64>,
}

impl CoefficientTable {
    fn from_per_bs(antennas: usize, per_bs: Vec<DMatrix<C64>>) -> Self {
        let k = per_bs[0].nrows();
        let sums = per_bs.iter().fold(DMatrix::zeros(k, k), |acc, t| acc + t);
        Self {
            antennas,
            per_bs,
            sums,
        }
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn num_bs(&self) -> usize {
        self.per_bs.len()
    }

    pub fn num_ue(&self) -> usize {
        self.sums.nrows()
    }

    /// Entry `(j, k)` at BS `n`.
    pub fn get(&self, j: usize, k: usize, bs: usize) -> C64 {
        self.per_bs[bs][(j, k)]
    }

    /// `sum_n x_jk^n`.
    pub fn sum(&self, j: usize, k: usize) -> C64 {
        self.sums[(j, k)]
    }

    pub fn sums(&self) -> &DMatrix<C64> {
        &self.sums
    }

    pub fn bs_table(&self, bs: usize) -> &DMatrix<C64> {
        &self.per_bs[bs]
    }
}

/// Which matrices sit between the covariances in `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AlphaVariant {
    /// `(1/M) tr(R_j Q_tr^{-1} R_k Q^{-1})`, the combination that the
    /// use-and-then-forget bound produces.
    #[default]
    PilotAndData,
    /// `(1/M) tr(R_j Q^{-1} R_k Q^{-1})`, i.e. pilot and data SNR taken equal.
    DataOnly,
}

/// `(1/M) tr(R_j^n A^n R_k^n B^n)` for every `(j, k, n)`, given the cached
/// products `left[j][n] = R_j^n A^n` and `right[k][n] = R_k^n B^n`.
fn trace_table(antennas: usize, left: &[Vec<CMat>], right: &[Vec<CMat>]) -> CoefficientTable {
    let k = left.len();
    let n_bs = left[0].len();
    let scale = 1.0 / antennas as f64;
    let per_bs = (0..n_bs)
        .map(|n| {
            DMatrix::from_fn(k, k, |j, l| {
                linalg::trace_of_product(&left[j][n], &right[l][n]) * scale
            })
        })
        .collect();
    CoefficientTable::from_per_bs(antennas, per_bs)
}

fn right_products(cov: &CovarianceSet, solvers: &[HpdSolver]) -> Vec<Vec<CMat>> {
    (0..cov.num_ue())
        .map(|k| {
            (0..cov.num_bs())
                .map(|n| solvers[n].right_solve(cov.block(k, n)))
                .collect()
        })
        .collect()
}

fn check_shapes(cov: &CovarianceSet, stat: &StatMatrices) -> Result<()> {
    if stat.q_tr.len() != cov.num_bs()
        || stat.z.len() != cov.num_bs()
        || stat.q.len() != cov.num_bs()
    {
        return Err(Error::Dimension(
            "statistical matrices do not match the covariance set".into(),
        ));
    }
    Ok(())
}

/// `beta_jk^n = (1/M) tr(R_j^n (Q_tr^n)^{-1} R_k^n (Z^n)^{-1})`.
pub fn compute_beta_table(cov: &CovarianceSet, stat: &StatMatrices) -> Result<CoefficientTable> {
    check_shapes(cov, stat)?;
    let q_tr = stat
        .q_tr
        .iter()
        .map(HpdSolver::new)
        .collect::<Result<Vec<_>>>()?;
    let z = stat
        .z
        .iter()
        .map(HpdSolver::new)
        .collect::<Result<Vec<_>>>()?;
    let left = right_products(cov, &q_tr);
    let right = right_products(cov, &z);
    Ok(trace_table(cov.antennas(), &left, &right))
}

/// [`compute_beta_table`] reusing the factorizations and filters cached in
/// `stats`.
pub fn beta_table_from_stats(stats: &LinkStatistics) -> Result<CoefficientTable> {
    let right = cached_right_products(stats, |n| stats.z_solver(n));
    Ok(trace_table(stats.antennas(), stats.filters(), &right))
}

/// [`compute_alpha_table`] reusing the cached factorizations and filters.
pub fn alpha_table_from_stats(
    stats: &LinkStatistics,
    variant: AlphaVariant,
) -> Result<CoefficientTable> {
    let right = cached_right_products(stats, |n| stats.q_solver(n));
    Ok(match variant {
        AlphaVariant::PilotAndData => trace_table(stats.antennas(), stats.filters(), &right),
        AlphaVariant::DataOnly => trace_table(stats.antennas(), &right, &right),
    })
}

fn cached_right_products<'a>(
    stats: &'a LinkStatistics,
    solver: impl Fn(usize) -> &'a HpdSolver,
) -> Vec<Vec<CMat>> {
    let cov = stats.covariances();
    (0..cov.num_ue())
        .map(|k| {
            (0..cov.num_bs())
                .map(|n| solver(n).right_solve(cov.block(k, n)))
                .collect()
        })
        .collect()
}

/// `alpha_jk^n`, see [`AlphaVariant`].
pub fn compute_alpha_table(
    cov: &CovarianceSet,
    stat: &StatMatrices,
    variant: AlphaVariant,
) -> Result<CoefficientTable> {
    check_shapes(cov, stat)?;
    let q = stat
        .q
        .iter()
        .map(HpdSolver::new)
        .collect::<Result<Vec<_>>>()?;
    let right = right_products(cov, &q);
    let left = match variant {
        AlphaVariant::PilotAndData => {
            let q_tr = stat
                .q_tr
                .iter()
                .map(HpdSolver::new)
                .collect::<Result<Vec<_>>>()?;
            right_products(cov, &q_tr)
        }
        AlphaVariant::DataOnly => right.clone(),
    };
    Ok(trace_table(cov.antennas(), &left, &right))
}
