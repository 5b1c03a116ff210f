//! SINR expressions and spectral-efficiency bounds.

use std::sync::Arc;

use rayon::prelude::*;

use crate::combining::{
    whiten_estimates, BlockView, Bound, CoefficientTable, CombiningScheme, Prepared, SchemeContext,
};
use crate::error::{Error, Result};
use crate::estimation::StatMatrices;
use crate::linalg::{self, CMat, CVec, C64};
use crate::model::CovarianceSet;
use crate::rng::{self, Domain};

/// Instantaneous SINR of UE `ue` for combining vector `v` (one entry per BS):
///
/// `|sum_n v^H hhat_ue|^2 / (sum_{i != ue} |sum_n v^H hhat_i|^2 + sum_n v^H Z v)`.
pub fn instantaneous_sinr(
    v: &[CVec],
    estimates: &[Vec<CVec>],
    z: &[CMat],
    ue: usize,
) -> Result<f64> {
    let project = |k: usize| -> C64 { v.iter().zip(&estimates[k]).map(|(a, b)| a.dotc(b)).sum() };
    let signal = project(ue).norm_sqr();
    let mut denom: f64 = v
        .iter()
        .zip(z)
        .map(|(a, zn)| linalg::quadratic_form(zn, a))
        .sum();
    for i in (0..estimates.len()).filter(|&i| i != ue) {
        denom += project(i).norm_sqr();
    }
    if !(denom > 0.0) {
        return Err(Error::Numerical(
            "SINR denominator vanished (zero combiner?)".into(),
        ));
    }
    Ok(signal / denom)
}

/// Spectral efficiency with its Monte-Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeEstimate {
    pub se: f64,
    pub stderr: f64,
    pub count: usize,
}

/// `(1 - tau_p/tau_c) * mean(log2(1 + gamma))`.
pub fn se_from_sinr_samples(
    samples: &[f64],
    pilot_length: usize,
    coherence_block: usize,
) -> Result<SeEstimate> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    if coherence_block == 0 || pilot_length > coherence_block {
        return Err(Error::param(
            "pilot_length",
            "must not exceed a positive coherence_block",
        ));
    }
    let prelog = 1.0 - pilot_length as f64 / coherence_block as f64;
    let n = samples.len() as f64;
    let logs: Vec<f64> = samples.iter().map(|g| (1.0 + g).log2()).collect();
    let mean = logs.iter().sum::<f64>() / n;
    let stderr = if samples.len() > 1 {
        let var = logs.iter().map(|l| (l - mean).powi(2)).sum::<f64>() / (n - 1.0);
        prelog * (var / n).sqrt()
    } else {
        0.0
    };
    Ok(SeEstimate {
        se: prelog * mean,
        stderr,
        count: samples.len(),
    })
}

/// `(1 - tau_p/tau_c) log2(1 + gamma)`.
pub fn se_from_sinr(sinr: f64, pilot_length: usize, coherence_block: usize) -> f64 {
    (1.0 - pilot_length as f64 / coherence_block as f64) * (1.0 + sinr).log2()
}

/// Use-and-then-forget SINR of UE `ue` for deterministic per-BS matrices `W`
/// applied to the LS estimate:
///
/// `|sum_n tr(W^H R_ue)|^2 / (sum_{i != ue} |sum_n tr(W^H R_i)|^2 + sum_n tr(W^H Q W Q_tr))`.
pub fn uatf_sinr_general(
    w: &[CMat],
    cov: &CovarianceSet,
    stat: &StatMatrices,
    ue: usize,
) -> Result<f64> {
    if w.len() != cov.num_bs() {
        return Err(Error::Dimension(format!(
            "expected {} W blocks, got {}",
            cov.num_bs(),
            w.len()
        )));
    }
    if w.iter().all(|b| b.norm() == 0.0) {
        return Err(Error::param("W", "all blocks are zero"));
    }
    let gain = |k: usize| -> C64 {
        w.iter()
            .zip(cov.ue_blocks(k))
            .map(|(wn, r)| linalg::vectorize(wn).dotc(&linalg::vectorize(r)))
            .sum()
    };
    let signal = gain(ue).norm_sqr();
    let mut denom = 0.0;
    for i in (0..cov.num_ue()).filter(|&i| i != ue) {
        denom += gain(i).norm_sqr();
    }
    for (n, wn) in w.iter().enumerate() {
        let left = wn.adjoint() * &stat.q[n];
        let right = wn * &stat.q_tr[n];
        denom += linalg::trace_of_product(&left, &right).re;
    }
    Ok(signal / denom)
}

/// Closed-form optimum of the use-and-then-forget SINR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UatfOptimal {
    /// `M * delta`.
    pub sinr: f64,
    /// `sum alpha_kk - |sum alpha_ko|^2 / (1/M + sum alpha_oo)`.
    pub delta: f64,
    /// `(M/N) sum_n (alpha_kk^n - |alpha_ko^n|^2 / alpha_oo^n)`; `None` when
    /// some `alpha_oo^n` vanishes.
    pub normalized_per_bs: Option<f64>,
}

pub fn uatf_sinr_optimal(alpha: &CoefficientTable, ue: usize) -> UatfOptimal {
    let o = 1 - ue;
    let m = alpha.antennas() as f64;
    let delta = alpha.sum(ue, ue).re - alpha.sum(ue, o).norm_sqr() / (1.0 / m + alpha.sum(o, o).re);
    let normalized_per_bs = crate::asymptotics::per_bs_gap_sinr(alpha, ue)
        .ok()
        .map(|r| r.value);
    UatfOptimal {
        sinr: m * delta,
        delta,
        normalized_per_bs,
    }
}

/// Spectral efficiency of one scheme for one UE over a set of blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SeReport {
    pub scheme: String,
    pub ue: usize,
    pub bound: Bound,
    /// Per-block SINRs; a single entry for deterministic bounds.
    pub sinr_samples: Vec<f64>,
    /// SE under the instantaneous-SINR bound.
    pub se_mmse_bound: Option<f64>,
    /// SE under the use-and-then-forget bound.
    pub se_uatf: Option<f64>,
    pub sample_count: usize,
    pub stderr: f64,
    pub asymptotic_prediction: Option<f64>,
}

impl SeReport {
    pub fn se(&self) -> f64 {
        self.se_mmse_bound.or(self.se_uatf).unwrap_or(0.0)
    }

    pub fn mean_sinr(&self) -> f64 {
        self.sinr_samples.iter().sum::<f64>() / self.sinr_samples.len().max(1) as f64
    }

    pub fn max_sinr(&self) -> f64 {
        self.sinr_samples.iter().copied().fold(0.0, f64::max)
    }
}

/// Block count and stream coordinates of one Monte Carlo run.
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloPlan {
    pub blocks: usize,
    pub pilot_length: usize,
    pub coherence_block: usize,
    pub seed: u64,
    /// Prefix of every block stream, e.g. `[drop, M]`.
    pub stream_prefix: Vec<u64>,
}

/// Evaluates every scheme for every UE on the same channel blocks.
///
/// Block `b` at BS `n` draws from stream `(seed, prefix.., b, n)`, so the
/// result does not depend on how blocks are spread over threads.
pub fn monte_carlo_se(
    ctx: &SchemeContext,
    schemes: &[Arc<dyn CombiningScheme>],
    plan: &MonteCarloPlan,
) -> Result<Vec<SeReport>> {
    if plan.blocks == 0 {
        return Err(Error::param("blocks_per_drop", "must be at least 1"));
    }
    let k = ctx.num_ue();
    let mut prepared = Vec::with_capacity(schemes.len() * k);
    for scheme in schemes {
        for ue in 0..k {
            prepared.push((scheme.clone(), ue, scheme.prepare(ctx, ue)?));
        }
    }
    let per_block: Vec<Result<Vec<f64>>> = (0..plan.blocks)
        .into_par_iter()
        .map(|b| {
            let block = ctx.stats.draw_block(|n| {
                let mut coords = plan.stream_prefix.clone();
                coords.extend([b as u64, n as u64]);
                rng::stream(plan.seed, Domain::Channel, &coords)
            });
            let whitened = whiten_estimates(&ctx.stats, &block.estimates);
            let view = BlockView {
                ls: &block.ls,
                estimates: &block.estimates,
                whitened: &whitened,
            };
            prepared
                .iter()
                .filter_map(|(_, ue, p)| match p {
                    Prepared::PerBlock(c) => {
                        let v = c.combine(&view);
                        Some(instantaneous_sinr(
                            &v,
                            &block.estimates,
                            &ctx.stats.stat().z,
                            *ue,
                        ))
                    }
                    Prepared::Deterministic { .. } => None,
                })
                .collect()
        })
        .collect();
    let per_block = per_block.into_iter().collect::<Result<Vec<_>>>()?;

    let mut reports = Vec::with_capacity(prepared.len());
    let mut column = 0;
    for (scheme, ue, p) in &prepared {
        let prediction = scheme.asymptotic_prediction(ctx, *ue);
        let report = match p {
            Prepared::PerBlock(_) => {
                let samples: Vec<f64> = per_block.iter().map(|row| row[column]).collect();
                column += 1;
                let est = se_from_sinr_samples(&samples, plan.pilot_length, plan.coherence_block)?;
                SeReport {
                    scheme: scheme.name().to_string(),
                    ue: *ue,
                    bound: scheme.bound(),
                    sinr_samples: samples,
                    se_mmse_bound: Some(est.se),
                    se_uatf: None,
                    sample_count: est.count,
                    stderr: est.stderr,
                    asymptotic_prediction: prediction,
                }
            }
            Prepared::Deterministic { sinr } => SeReport {
                scheme: scheme.name().to_string(),
                ue: *ue,
                bound: scheme.bound(),
                sinr_samples: vec![*sinr],
                se_mmse_bound: None,
                se_uatf: Some(se_from_sinr(*sinr, plan.pilot_length, plan.coherence_block)),
                sample_count: 1,
                stderr: 0.0,
                asymptotic_prediction: prediction,
            },
        };
        reports.push(report);
    }
    Ok(reports)
}
