//! Finite-`M` diagnostics for the large-array behaviour of the combiners,
//! plus the per-block complex-multiplication counts of each scheme.

use std::fmt;

use crate::combining::CoefficientTable;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::model::CovarianceSet;

/// Which coefficient of `lambda_1 R_1 + lambda_2 R_2` is held at one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pinned {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssumptionScope {
    /// Block-diagonal stacking over all BSs.
    Global,
    /// A single BS.
    PerBs(usize),
}

/// `min_{lambda: lambda_i = 1} (1/M) ||lambda_1 R_1 + lambda_2 R_2||_F^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionMetric {
    pub scope: AssumptionScope,
    pub pinned: Pinned,
    pub value: f64,
    /// Minimizing `(lambda_1, lambda_2)`.
    pub lambda: [f64; 2],
}

/// Closed-form 1-D minimization over the free coefficient. `r_a` and `r_b`
/// are lists of blocks that are stacked block-diagonally; `antennas` is the
/// per-BS normalization `M`.
pub fn assumption_metric(
    r_a: &[CMat],
    r_b: &[CMat],
    pinned: Pinned,
    antennas: usize,
    scope: AssumptionScope,
) -> Result<AssumptionMetric> {
    if r_a.len() != r_b.len() {
        return Err(Error::Dimension("covariance lists differ in length".into()));
    }
    if r_a.iter().zip(r_b).any(|(a, b)| a.shape() != b.shape()) {
        return Err(Error::Dimension("covariance blocks differ in shape".into()));
    }
    let (fixed, free) = match pinned {
        Pinned::First => (r_a, r_b),
        Pinned::Second => (r_b, r_a),
    };
    let free_sq: f64 = free.iter().map(linalg::frobenius_sq).sum();
    let cross: f64 = fixed
        .iter()
        .zip(free)
        .map(|(i, j)| linalg::trace_of_product(i, j).re)
        .sum();
    let lambda_free = if free_sq == 0.0 {
        0.0
    } else {
        -cross / free_sq
    };
    // The residual is formed explicitly: `||R_i||^2 - cross^2 / ||R_j||^2`
    // cancels catastrophically for nearly collinear pairs.
    let value: f64 = fixed
        .iter()
        .zip(free)
        .map(|(i, j)| (i + j * linalg::c64(lambda_free, 0.0)).norm_squared())
        .sum();
    let lambda = match pinned {
        Pinned::First => [1.0, lambda_free],
        Pinned::Second => [lambda_free, 1.0],
    };
    Ok(AssumptionMetric {
        scope,
        pinned,
        value: value / antennas as f64,
        lambda,
    })
}

/// Global (block-diagonal) metric for UEs `0` and `1` of a covariance set.
pub fn global_assumption_metric(cov: &CovarianceSet, pinned: Pinned) -> Result<AssumptionMetric> {
    assumption_metric(
        cov.ue_blocks(0),
        cov.ue_blocks(1),
        pinned,
        cov.antennas(),
        AssumptionScope::Global,
    )
}

/// Metric restricted to BS `bs`.
pub fn per_bs_assumption_metric(
    cov: &CovarianceSet,
    bs: usize,
    pinned: Pinned,
) -> Result<AssumptionMetric> {
    assumption_metric(
        std::slice::from_ref(cov.block(0, bs)),
        std::slice::from_ref(cov.block(1, bs)),
        pinned,
        cov.antennas(),
        AssumptionScope::PerBs(bs),
    )
}

/// Limit of `gamma_k / M` for MMSE combining:
/// `sum beta_kk - |sum beta_ko|^2 / sum beta_oo`.
pub fn asymptotic_sinr_mmse(beta: &CoefficientTable, ue: usize) -> f64 {
    let o = 1 - ue;
    let b_kk = beta.sum(ue, ue).re;
    let b_oo = beta.sum(o, o).re;
    if b_oo == 0.0 {
        return b_kk;
    }
    b_kk - beta.sum(ue, o).norm_sqr() / b_oo
}

/// Minimum SE slope, in bit/s/Hz per doubling of `M`, counted as growth.
pub const GROWTH_THRESHOLD_PER_DOUBLING: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthClass {
    Growing,
    Saturating,
}

impl fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GrowthClass::Growing => "growing",
            GrowthClass::Saturating => "saturating",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    /// Least-squares slope of SE against `log2 M`.
    pub se_slope_per_doubling: f64,
    /// Least-squares slope of mean SINR against `M`, if SINRs were given.
    pub sinr_slope_per_antenna: Option<f64>,
    pub class: GrowthClass,
}

fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Classifies an SE-vs-`M` curve as growing or saturating. `sinr` may be
/// empty.
pub fn growth_diagnostic(antennas: &[usize], se: &[f64], sinr: &[f64]) -> Result<GrowthReport> {
    if antennas.len() < 3 {
        return Err(Error::param(
            "antennas",
            "at least three M values are needed",
        ));
    }
    if se.len() != antennas.len() || !(sinr.is_empty() || sinr.len() == antennas.len()) {
        return Err(Error::Dimension(
            "series lengths differ from the M grid".into(),
        ));
    }
    if antennas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param(
            "antennas",
            "M grid must be strictly increasing",
        ));
    }
    let log_m: Vec<f64> = antennas.iter().map(|&m| (m as f64).log2()).collect();
    let se_slope = ls_slope(&log_m, se);
    let sinr_slope = (!sinr.is_empty()).then(|| {
        let m: Vec<f64> = antennas.iter().map(|&m| m as f64).collect();
        ls_slope(&m, sinr)
    });
    Ok(GrowthReport {
        se_slope_per_doubling: se_slope,
        sinr_slope_per_antenna: sinr_slope,
        class: if se_slope > GROWTH_THRESHOLD_PER_DOUBLING {
            GrowthClass::Growing
        } else {
            GrowthClass::Saturating
        },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerBsGapReport {
    /// `(M/N) sum_n gap_n`.
    pub value: f64,
    /// `alpha_kk^n - |alpha_ko^n|^2 / alpha_oo^n` per BS.
    pub gaps: Vec<f64>,
}

/// Per-BS gap sum normalized by the number of BSs. Feed it the alpha table
/// variant under study (see [`crate::combining::AlphaVariant`]).
pub fn per_bs_gap_sinr(alpha: &CoefficientTable, ue: usize) -> Result<PerBsGapReport> {
    let o = 1 - ue;
    let m = alpha.antennas() as f64;
    let n_bs = alpha.num_bs();
    let mut gaps = Vec::with_capacity(n_bs);
    for n in 0..n_bs {
        let a_kk = alpha.get(ue, ue, n).re;
        let a_oo = alpha.get(o, o, n).re;
        let a_ko = alpha.get(ue, o, n);
        let gap = if a_oo == 0.0 {
            if a_ko.norm() != 0.0 {
                return Err(Error::Numerical(format!(
                    "inconsistent statistics at BS {n}: alpha_oo = 0 but alpha_ko != 0"
                )));
            }
            a_kk
        } else {
            a_kk - a_ko.norm_sqr() / a_oo
        };
        gaps.push(gap);
    }
    Ok(PerBsGapReport {
        value: m / n_bs as f64 * gaps.iter().sum::<f64>(),
        gaps,
    })
}

/// Scheme families with distinct complexity rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ComplexityScheme {
    Mr,
    Mmse,
    Dmmse,
    Obe,
}

impl ComplexityScheme {
    pub const ALL: [ComplexityScheme; 4] = [Self::Mr, Self::Mmse, Self::Dmmse, Self::Obe];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Mr => "MR",
            Self::Mmse => "MMSE",
            Self::Dmmse => "DMMSE",
            Self::Obe => "OBE",
        }
    }
}

/// Complex multiplications per coherence block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ComplexityCount {
    pub scheme: ComplexityScheme,
    pub estimation_mults: u64,
    pub combiner_mults: u64,
}

/// MR is charged the LS correlation `N M tau_p` and nothing for the combiner.
pub fn complexity_count(
    scheme: ComplexityScheme,
    num_bs: u64,
    antennas: u64,
    pilot_length: u64,
) -> ComplexityCount {
    let nm = num_bs * antennas;
    let (estimation_mults, combiner_mults) = match scheme {
        ComplexityScheme::Mmse => (
            nm * pilot_length + 2 * nm * nm,
            3 * nm * nm + nm + (nm * nm * nm - nm) / 3,
        ),
        ComplexityScheme::Dmmse | ComplexityScheme::Obe => {
            (nm * pilot_length, 2 * num_bs * antennas * antennas)
        }
        ComplexityScheme::Mr => (nm * pilot_length, 0),
    };
    ComplexityCount {
        scheme,
        estimation_mults,
        combiner_mults,
    }
}
