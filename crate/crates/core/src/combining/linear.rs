//! MR, centralized MMSE and distributed MMSE combining.

use nalgebra::{DMatrix, DVector};

use super::{other_ue, CoefficientTable, CombinerBank};
use crate::error::{Error, Result};
use crate::estimation::LinkStatistics;
use crate::linalg::{c64, CMat, CVec, C64};

fn require_pair(num_ue: usize, what: &str) -> Result<()> {
    if num_ue != 2 {
        return Err(Error::UnsupportedUeCount {
            scheme: what.to_string(),
            num_ue,
        });
    }
    Ok(())
}

/// `v_k^n = hhat_k^n`.
pub fn mr_combiner(estimates: &[Vec<CVec>]) -> CombinerBank {
    CombinerBank {
        scheme: "MR".into(),
        vectors: estimates.to_vec(),
        transforms: None,
    }
}

/// `(Z^n)^{-1} hhat_k^n` for every UE and BS.
pub fn whiten_estimates(stats: &LinkStatistics, estimates: &[Vec<CVec>]) -> Vec<Vec<CVec>> {
    estimates
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(n, h)| stats.z_solver(n).solve_vec(h))
                .collect()
        })
        .collect()
}

fn inner_sum(a: &[CVec], b: &[CVec]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.dotc(y)).sum()
}

/// Centralized MMSE vector for UE `ue`:
/// `(sum_{i != ue} hhat_i hhat_i^H + Z)^{-1} hhat_ue`, evaluated with the
/// matrix inversion lemma over the block-diagonal `Z`. Only per-BS solves
/// (`whitened = Z^{-1} hhat`) and a `(K-1) x (K-1)` system are needed.
pub(crate) fn mmse_vector(estimates: &[Vec<CVec>], whitened: &[Vec<CVec>], ue: usize) -> Vec<CVec> {
    let interferers: Vec<usize> = (0..estimates.len()).filter(|&i| i != ue).collect();
    let mut out = whitened[ue].clone();
    if interferers.is_empty() {
        return out;
    }
    let k = interferers.len();
    let mut gram = DMatrix::<C64>::identity(k, k);
    let mut rhs = DVector::<C64>::zeros(k);
    for (a, &ia) in interferers.iter().enumerate() {
        rhs[a] = inner_sum(&estimates[ia], &whitened[ue]);
        for (b, &ib) in interferers.iter().enumerate() {
            gram[(a, b)] += inner_sum(&estimates[ia], &whitened[ib]);
        }
    }
    let coeffs = if k == 1 {
        DVector::from_element(1, rhs[0] / gram[(0, 0)])
    } else {
        gram.lu()
            .solve(&rhs)
            .expect("I + H^H Z^{-1} H is positive definite")
    };
    for (a, &ia) in interferers.iter().enumerate() {
        for (v, x) in out.iter_mut().zip(&whitened[ia]) {
            *v -= x * coeffs[a];
        }
    }
    out
}

/// Centralized MMSE combining for every UE.
pub fn mmse_combiner_global(estimates: &[Vec<CVec>], whitened: &[Vec<CVec>]) -> CombinerBank {
    CombinerBank {
        scheme: "MMSE".into(),
        vectors: (0..estimates.len())
            .map(|k| mmse_vector(estimates, whitened, k))
            .collect(),
        transforms: None,
    }
}

/// `sum_i beta_{k,o}^i / (1/M + sum_i beta_{o,o}^i)` with `o` the other UE.
pub fn dmmse_coefficient(beta: &CoefficientTable, ue: usize) -> C64 {
    let o = other_ue(ue);
    let m = beta.antennas() as f64;
    beta.sum(ue, o) / (c64(1.0 / m, 0.0) + beta.sum(o, o))
}

/// Two-UE D-MMSE, `v_k^n = (Z^n)^{-1}(hhat_k^n - c_k hhat_o^n)`.
pub fn dmmse_combiner(whitened: &[Vec<CVec>], beta: &CoefficientTable) -> Result<CombinerBank> {
    require_pair(whitened.len(), "DMMSE")?;
    let vectors = (0..2)
        .map(|k| {
            let c = dmmse_coefficient(beta, k);
            let o = other_ue(k);
            whitened[k]
                .iter()
                .zip(&whitened[o])
                .map(|(a, b)| a - b * c)
                .collect()
        })
        .collect();
    Ok(CombinerBank {
        scheme: "DMMSE".into(),
        vectors,
        transforms: None,
    })
}

/// `Sigma_k^n = (Z^n)^{-1}(R_k^n - c_k R_o^n)(Q_tr^n)^{-1}`, `[ue][bs]`.
pub fn dmmse_sigma_matrices(
    stats: &LinkStatistics,
    beta: &CoefficientTable,
) -> Result<Vec<Vec<CMat>>> {
    require_pair(stats.num_ue(), "DMMSE")?;
    Ok((0..2)
        .map(|k| {
            let c = dmmse_coefficient(beta, k);
            let o = other_ue(k);
            (0..stats.num_bs())
                .map(|n| {
                    // R_k Q_tr^{-1} - c R_o Q_tr^{-1} from the cached filters.
                    let inner = stats.filter(k, n) - stats.filter(o, n) * c;
                    stats.z_solver(n).solve_mat(&inner)
                })
                .collect()
        })
        .collect())
}

/// D-MMSE applied to the LS estimate, `v_k^n = Sigma_k^n ls^n`.
pub fn dmmse_combiner_ls_form(sigma: &[Vec<CMat>], ls: &[CVec]) -> CombinerBank {
    CombinerBank {
        scheme: "DMMSE".into(),
        vectors: sigma
            .iter()
            .map(|row| row.iter().zip(ls).map(|(s, l)| s * l).collect())
            .collect(),
        transforms: Some(sigma.to_vec()),
    }
}

/// `(B + I/M)^{-1}` with `[B]_{l,j} = sum_n beta_{j,l}^n`; column `k` is the
/// coefficient vector of UE `k`.
pub fn dmmse_multiuser_coefficients(beta: &CoefficientTable) -> Result<DMatrix<C64>> {
    let k = beta.num_ue();
    let m = beta.antennas() as f64;
    let b = beta.sums().transpose() + DMatrix::<C64>::identity(k, k) * c64(1.0 / m, 0.0);
    b.try_inverse()
        .ok_or_else(|| Error::Numerical("B + I/M is singular".into()))
}

/// Multi-UE D-MMSE, `v_k^n = (Z^n)^{-1} sum_i s_{k,i} hhat_i^n`.
pub fn dmmse_multiuser(whitened: &[Vec<CVec>], beta: &CoefficientTable) -> Result<CombinerBank> {
    let coeffs = dmmse_multiuser_coefficients(beta)?;
    let k = whitened.len();
    let n_bs = whitened[0].len();
    let vectors = (0..k)
        .map(|target| {
            (0..n_bs)
                .map(|n| {
                    let mut v = CVec::zeros(whitened[0][n].len());
                    for (i, row) in whitened.iter().enumerate() {
                        v += &row[n] * coeffs[(i, target)];
                    }
                    v
                })
                .collect()
        })
        .collect();
    Ok(CombinerBank {
        scheme: "DMMSE".into(),
        vectors,
        transforms: None,
    })
}
