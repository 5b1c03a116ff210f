//! The M-sweep over UE drops and its aggregation into result rows.

use std::collections::BTreeMap;
use std::sync::Arc;

use rayon::prelude::*;

use super::config::ExperimentConfig;
use super::drop::{reference_gains, DropSetup};
use crate::asymptotics::{complexity_count, growth_diagnostic, ComplexityCount, GrowthReport};
use crate::combining::{CombiningScheme, SchemeContext, SchemeRegistry};
use crate::error::Result;
use crate::estimation::{LinkStatistics, Pilot};
use crate::se::{monte_carlo_se, MonteCarloPlan, SeReport};

/// Outcome of one `(drop, M, scheme, UE)` evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct DropRecord {
    pub drop: usize,
    pub antennas: usize,
    pub scheme: String,
    pub ue: usize,
    pub se: f64,
    /// Monte Carlo standard error within the drop.
    pub se_stderr: f64,
    pub mean_sinr: f64,
    pub max_sinr: f64,
    pub prediction: Option<f64>,
}

/// One CSV row: a scheme, an `M` and a UE, averaged over drops.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scheme: String,
    pub antennas: usize,
    pub ue: usize,
    pub se_mean: f64,
    /// Standard error of `se_mean`: across drops when there are several,
    /// otherwise the within-drop Monte Carlo error.
    pub se_stderr: f64,
    pub sinr_mean: f64,
    /// Largest SINR sampled in any drop.
    pub sinr_max: f64,
    /// Drop-averaged large-array SINR prediction, where one exists.
    pub asym_pred: Option<f64>,
    pub complexity: ComplexityCount,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    /// Reference gain per value of the antenna grid.
    pub reference_gains: Vec<f64>,
    pub rows: Vec<ResultRow>,
    pub records: Vec<DropRecord>,
}

impl ExperimentResult {
    pub fn row(&self, scheme: &str, antennas: usize, ue: usize) -> Option<&ResultRow> {
        self.rows
            .iter()
            .find(|r| r.scheme.eq_ignore_ascii_case(scheme) && r.antennas == antennas && r.ue == ue)
    }

    /// SE averaged over UEs.
    pub fn mean_se(&self, scheme: &str, antennas: usize) -> Option<f64> {
        let rows: Vec<&ResultRow> = self
            .rows
            .iter()
            .filter(|r| r.scheme.eq_ignore_ascii_case(scheme) && r.antennas == antennas)
            .collect();
        (!rows.is_empty()).then(|| rows.iter().map(|r| r.se_mean).sum::<f64>() / rows.len() as f64)
    }

    /// Standard error of [`Self::mean_se`], treating UEs as independent.
    pub fn mean_se_stderr(&self, scheme: &str, antennas: usize) -> Option<f64> {
        let rows: Vec<&ResultRow> = self
            .rows
            .iter()
            .filter(|r| r.scheme.eq_ignore_ascii_case(scheme) && r.antennas == antennas)
            .collect();
        (!rows.is_empty()).then(|| {
            rows.iter().map(|r| r.se_stderr.powi(2)).sum::<f64>().sqrt() / rows.len() as f64
        })
    }

    /// Growth classification of the UE-averaged SE curve of one scheme.
    pub fn growth(&self, scheme: &str) -> Result<GrowthReport> {
        let grid = &self.config.antenna_grid;
        let se: Vec<f64> = grid
            .iter()
            .map(|&m| self.mean_se(scheme, m).unwrap_or(f64::NAN))
            .collect();
        growth_diagnostic(grid, &se, &[])
    }
}

/// Evaluates one drop at one `M` for every scheme.
pub fn evaluate_point(
    cfg: &ExperimentConfig,
    schemes: &[Arc<dyn CombiningScheme>],
    drop: &DropSetup,
    antennas: usize,
    reference_gain: f64,
) -> Result<Vec<SeReport>> {
    let net = &cfg.network;
    let cov = drop.covariances(antennas, reference_gain, net.correlation_factor)?;
    let stats = LinkStatistics::new(cov, Pilot::new(net.pilot_length, net.data_snr)?)?;
    let ctx = SchemeContext::new(stats)?;
    let plan = MonteCarloPlan {
        blocks: cfg.blocks_per_drop,
        pilot_length: net.pilot_length,
        coherence_block: net.coherence_block,
        seed: cfg.seed(),
        stream_prefix: vec![drop.index as u64, antennas as u64],
    };
    monte_carlo_se(&ctx, schemes, &plan)
}

fn mean(xs: impl Iterator<Item = f64>) -> (f64, usize) {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (sum / n.max(1) as f64, n)
}

/// Runs the full sweep. Work items `(drop, M)` run in parallel; every item
/// draws from its own streams and results are sorted before aggregation,
/// so the output does not depend on the thread count.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    registry: &SchemeRegistry,
) -> Result<ExperimentResult> {
    cfg.validate()?;
    let schemes = registry.select(&cfg.schemes)?;
    let gains = reference_gains(cfg)?;
    let drops = (0..cfg.drops)
        .into_par_iter()
        .map(|d| DropSetup::new(cfg, d))
        .collect::<Result<Vec<_>>>()?;

    let items: Vec<(usize, usize)> = (0..cfg.drops)
        .flat_map(|d| (0..cfg.antenna_grid.len()).map(move |i| (d, i)))
        .collect();
    let evaluated = items
        .par_iter()
        .map(|&(d, i)| {
            let m = cfg.antenna_grid[i];
            evaluate_point(cfg, &schemes, &drops[d], m, gains[i]).map(|reports| {
                reports
                    .into_iter()
                    .map(|r| DropRecord {
                        drop: d,
                        antennas: m,
                        se: r.se(),
                        se_stderr: r.stderr,
                        mean_sinr: r.mean_sinr(),
                        max_sinr: r.max_sinr(),
                        prediction: r.asymptotic_prediction,
                        scheme: r.scheme,
                        ue: r.ue,
                    })
                    .collect::<Vec<_>>()
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let records: Vec<DropRecord> = evaluated.into_iter().flatten().collect();
    let rows = aggregate(cfg, &schemes, &records);
    Ok(ExperimentResult {
        config: cfg.clone(),
        reference_gains: gains,
        rows,
        records,
    })
}

fn aggregate(
    cfg: &ExperimentConfig,
    schemes: &[Arc<dyn CombiningScheme>],
    records: &[DropRecord],
) -> Vec<ResultRow> {
    let order: BTreeMap<&str, usize> = schemes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name(), i))
        .collect();
    let mut groups: BTreeMap<(usize, usize, usize), Vec<&DropRecord>> = BTreeMap::new();
    for r in records {
        groups
            .entry((order[r.scheme.as_str()], r.antennas, r.ue))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((s, m, ue), mut group)| {
            group.sort_by_key(|r| r.drop);
            let scheme = &schemes[s];
            let (se_mean, n) = mean(group.iter().map(|r| r.se));
            let se_stderr = if n > 1 {
                let var =
                    group.iter().map(|r| (r.se - se_mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (var / n as f64).sqrt()
            } else {
                group[0].se_stderr
            };
            let asym_pred = group
                .iter()
                .map(|r| r.prediction)
                .collect::<Option<Vec<f64>>>()
                .map(|p| mean(p.into_iter()).0);
            ResultRow {
                scheme: scheme.name().to_string(),
                antennas: m,
                ue,
                se_mean,
                se_stderr,
                sinr_mean: mean(group.iter().map(|r| r.mean_sinr)).0,
                sinr_max: group.iter().map(|r| r.max_sinr).fold(0.0, f64::max),
                asym_pred,
                complexity: complexity_count(
                    scheme.complexity(),
                    cfg.network.num_bs as u64,
                    m as u64,
                    cfg.network.pilot_length as u64,
                ),
            }
        })
        .collect()
}
