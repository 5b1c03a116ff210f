//! Invariant suite on random instances, run by the `check` subcommand.
//!
//! Each check compares two independent routes to the same quantity, or a
//! claimed optimum against perturbations of it.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::Rng;

use crate::asymptotics::{
    assumption_metric, complexity_count, AssumptionScope, ComplexityScheme, Pinned,
};
use crate::combining::{
    compute_alpha_table, compute_beta_table, dmmse_combiner, dmmse_multiuser,
    dmmse_multiuser_coefficients, mmse_combiner_global, obe_matrices_explicit,
    obe_matrices_vectorized, whiten_estimates, AlphaVariant, VECTORIZED_GUARD,
};
use crate::error::Result;
use crate::estimation::{LinkStatistics, Pilot};
use crate::linalg::{self, c64, CMat, CVec, C64};
use crate::model::{exponential_covariance, CovarianceSet};
use crate::rng::{self, Domain, StreamRng};
use crate::se::{instantaneous_sinr, uatf_sinr_general, uatf_sinr_optimal};

/// A random full-rank covariance: an exponential-model matrix plus a
/// Wishart-like term, scaled to a log-uniform gain in `[0.1, 10]`.
pub fn random_covariance<R: Rng + ?Sized>(rng: &mut R, antennas: usize) -> Result<CMat> {
    let r = rng.random::<f64>() * 0.9;
    let theta = (rng.random::<f64>() * 2.0 - 1.0) * PI;
    let gain = 10f64.powf(rng.random::<f64>() * 2.0 - 1.0);
    let g = linalg::complex_gaussian(rng, antennas);
    let mut mix = exponential_covariance(antennas, 1.0, r, theta)?
        + (&g * g.adjoint()) * c64(0.5 / antennas as f64, 0.0);
    let tr = linalg::trace(&mix).re;
    mix *= c64(gain * antennas as f64 / tr, 0.0);
    linalg::hermitize(&mut mix);
    Ok(mix)
}

/// `[ue][bs]` table of [`random_covariance`] blocks.
pub fn random_covariance_set<R: Rng + ?Sized>(
    rng: &mut R,
    num_ue: usize,
    num_bs: usize,
    antennas: usize,
) -> Result<CovarianceSet> {
    let blocks = (0..num_ue)
        .map(|_| {
            (0..num_bs)
                .map(|_| random_covariance(rng, antennas))
                .collect()
        })
        .collect::<Result<Vec<Vec<CMat>>>>()?;
    CovarianceSet::new(blocks)
}

/// Random small instance: `N` in `1..=4`, `M` in `2..=max_antennas`,
/// `tau_p` in `1..=10`, `rho` log-uniform in `[0.1, 10]`.
pub fn random_link<R: Rng + ?Sized>(rng: &mut R, max_antennas: usize) -> Result<LinkStatistics> {
    let n = rng.random_range(1..=4);
    let m = rng.random_range(2..=max_antennas);
    let cov = random_covariance_set(rng, 2, n, m)?;
    let tau = rng.random_range(1..=10);
    let rho = 10f64.powf(rng.random::<f64>() * 2.0 - 1.0);
    LinkStatistics::new(cov, Pilot::new(tau, rho)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }
}

fn outcome(name: &'static str, worst: f64, tol: f64, what: &str) -> CheckOutcome {
    CheckOutcome {
        name,
        passed: worst <= tol,
        detail: format!("worst {what} {worst:.3e} (tolerance {tol:.0e})"),
    }
}

fn stacked(blocks: &[CMat]) -> CVec {
    let parts: Vec<CVec> = blocks.iter().map(linalg::vectorize).collect();
    let len = parts.iter().map(|p| p.len()).sum();
    CVec::from_iterator(len, parts.iter().flat_map(|p| p.iter().copied()))
}

/// Relative spread of the three use-and-then-forget SINRs of the OBE:
/// the general formula at the explicit `W`, the vectorized solve and the
/// closed form.
pub fn uatf_three_way_error(stats: &LinkStatistics, ue: usize) -> Result<f64> {
    let alpha = compute_alpha_table(
        stats.covariances(),
        stats.stat(),
        AlphaVariant::PilotAndData,
    )?;
    let w = obe_matrices_explicit(stats, &alpha, ue)?;
    let general = uatf_sinr_general(&w, stats.covariances(), stats.stat(), ue)?;
    let vectorized =
        obe_matrices_vectorized(stats.covariances(), stats.stat(), ue, VECTORIZED_GUARD)?.sinr;
    let closed = uatf_sinr_optimal(&alpha, ue).sinr;
    let scale = general.abs().max(f64::MIN_POSITIVE);
    Ok(
        [general - vectorized, general - closed, vectorized - closed]
            .iter()
            .map(|d| d.abs() / scale)
            .fold(0.0, f64::max),
    )
}

/// `(1 - |cos|, Re <w_explicit, w_vectorized>)` between the two OBE routes.
pub fn obe_alignment(stats: &LinkStatistics, ue: usize) -> Result<(f64, f64)> {
    let alpha = compute_alpha_table(
        stats.covariances(),
        stats.stat(),
        AlphaVariant::PilotAndData,
    )?;
    let a = stacked(&obe_matrices_explicit(stats, &alpha, ue)?);
    let b = obe_matrices_vectorized(stats.covariances(), stats.stat(), ue, VECTORIZED_GUARD)?.w;
    let inner = a.dotc(&b);
    Ok((1.0 - inner.norm() / (a.norm() * b.norm()), inner.re))
}

/// Stacks per-BS vectors into one `N M` vector.
pub fn stack_vectors(parts: &[CVec]) -> CVec {
    let len = parts.iter().map(|p| p.len()).sum();
    CVec::from_iterator(len, parts.iter().flat_map(|p| p.iter().copied()))
}

/// `hhat_ue^H (sum_{i != ue} hhat_i hhat_i^H + Z)^{-1} hhat_ue` with a
/// dense solve over the stacked `N M` dimension.
pub fn mmse_sinr_dense(estimates: &[Vec<CVec>], z: &[CMat], ue: usize) -> f64 {
    let m = z[0].nrows();
    let nm = m * z.len();
    let mut a = DMatrix::<C64>::zeros(nm, nm);
    for (n, zn) in z.iter().enumerate() {
        a.view_mut((n * m, n * m), (m, m)).copy_from(zn);
    }
    for (i, row) in estimates.iter().enumerate() {
        if i != ue {
            let h = stack_vectors(row);
            a += &h * h.adjoint();
        }
    }
    let h = stack_vectors(&estimates[ue]);
    let x = a
        .lu()
        .solve(&h)
        .expect("interference-plus-noise matrix is nonsingular");
    h.dotc(&x).re
}

/// Largest relative SINR gain of random perturbations of the MMSE vector,
/// and the relative gap between its SINR and the closed form.
pub fn mmse_optimality(
    stats: &LinkStatistics,
    rng: &mut StreamRng,
    perturbations: usize,
    magnitude: f64,
) -> Result<(f64, f64)> {
    let block = stats.draw_block(|n| rng::stream(rng.random(), Domain::Check, &[n as u64]));
    let whitened = whiten_estimates(stats, &block.estimates);
    let z = &stats.stat().z;
    let v = mmse_combiner_global(&block.estimates, &whitened)
        .vectors
        .swap_remove(0);
    let best = instantaneous_sinr(&v, &block.estimates, z, 0)?;
    let closed = mmse_sinr_dense(&block.estimates, z, 0);
    let v_norm = stack_vectors(&v).norm();
    let mut worst_gain = f64::NEG_INFINITY;
    for _ in 0..perturbations {
        let delta: Vec<CVec> = v
            .iter()
            .map(|b| {
                linalg::complex_gaussian(rng, b.len())
                    .column(0)
                    .into_owned()
            })
            .collect();
        let scale = magnitude * v_norm / stack_vectors(&delta).norm();
        let perturbed: Vec<CVec> = v
            .iter()
            .zip(&delta)
            .map(|(a, d)| a + d * c64(scale, 0.0))
            .collect();
        let g = instantaneous_sinr(&perturbed, &block.estimates, z, 0)?;
        worst_gain = worst_gain.max((g - best) / best);
    }
    Ok((worst_gain, (best - closed).abs() / closed))
}

/// `max_n ||hhat_2^n - R_2^n (R_1^n)^{-1} hhat_1^n|| / ||hhat_2^n||` on one block.
pub fn estimate_cross_relation_error(stats: &LinkStatistics, rng: &mut StreamRng) -> Result<f64> {
    let block = stats.draw_block(|n| rng::stream(rng.random(), Domain::Check, &[n as u64]));
    let mut worst: f64 = 0.0;
    for n in 0..stats.num_bs() {
        let r1 = linalg::HpdSolver::new(stats.covariances().block(0, n))?;
        let predicted = stats.covariances().block(1, n) * r1.solve_vec(&block.estimates[0][n]);
        let actual = &block.estimates[1][n];
        worst = worst.max((actual - predicted).norm() / actual.norm().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

/// Brute-force minimum of `||R_i + lambda R_j||^2 / M` over a lambda grid.
pub fn assumption_grid_search(r_i: &CMat, r_j: &CMat, lo: f64, hi: f64, step: f64) -> (f64, f64) {
    let m = r_i.nrows() as f64;
    let steps = ((hi - lo) / step).round() as usize;
    (0..=steps)
        .map(|s| {
            let l = lo + s as f64 * step;
            ((r_i + r_j * c64(l, 0.0)).norm_squared() / m, l)
        })
        .fold((f64::INFINITY, 0.0), |best, cur| {
            if cur.0 < best.0 {
                cur
            } else {
                best
            }
        })
}

/// `max_k ||v_k^{K=3} / s_kk - v_k^{K=2}|| / ||v_k^{K=2}||` for D-MMSE when a
/// third UE with zero covariance is appended.
pub fn three_ue_reduction_error(stats: &LinkStatistics, rng: &mut StreamRng) -> Result<f64> {
    let cov2 = stats.covariances();
    let mut blocks: Vec<Vec<CMat>> = (0..2).map(|k| cov2.ue_blocks(k).to_vec()).collect();
    blocks.push(vec![
        CMat::zeros(cov2.antennas(), cov2.antennas());
        cov2.num_bs()
    ]);
    let stats3 = LinkStatistics::new(CovarianceSet::new(blocks)?, *stats.pilot())?;

    // The third estimate is R_3 Q_tr^{-1} ls = 0, so both runs share one block.
    let block = stats.draw_block(|n| rng::stream(rng.random(), Domain::Check, &[n as u64]));
    let mut estimates3 = block.estimates.clone();
    estimates3.push(
        block.estimates[0]
            .iter()
            .map(|h| CVec::zeros(h.len()))
            .collect(),
    );
    let beta2 = compute_beta_table(cov2, stats.stat())?;
    let beta3 = compute_beta_table(stats3.covariances(), stats3.stat())?;
    let v2 = dmmse_combiner(&whiten_estimates(stats, &block.estimates), &beta2)?;
    let v3 = dmmse_multiuser(&whiten_estimates(&stats3, &estimates3), &beta3)?;
    // The multiuser weights carry a positive scale, the own-estimate weight
    // [(B + I/M)^{-1}]_kk; the pair formula fixes that weight to one.
    let coeffs = dmmse_multiuser_coefficients(&beta3)?;
    let mut worst: f64 = 0.0;
    for k in 0..2 {
        let a = stack_vectors(v2.ue(k));
        let b = stack_vectors(v3.ue(k)) / coeffs[(k, k)];
        worst = worst.max((a - b).norm() / stack_vectors(v2.ue(k)).norm());
    }
    Ok(worst)
}

/// Runs every check on `instances` random instances.
pub fn run_checks(seed: u64, instances: usize) -> Result<CheckReport> {
    let mut report = CheckReport::default();
    let mut rng = rng::stream(seed, Domain::Check, &[0]);

    let mut uatf: f64 = 0.0;
    let mut cos: f64 = 0.0;
    let mut min_inner = f64::INFINITY;
    let mut mmse_gain = f64::NEG_INFINITY;
    let mut mmse_closed: f64 = 0.0;
    let mut cross: f64 = 0.0;
    let mut reduction: f64 = 0.0;
    let mut metric: f64 = 0.0;
    for _ in 0..instances {
        let stats = random_link(&mut rng, 8)?;
        for ue in 0..2 {
            uatf = uatf.max(uatf_three_way_error(&stats, ue)?);
            let (c, inner) = obe_alignment(&stats, ue)?;
            cos = cos.max(c);
            min_inner = min_inner.min(inner);
        }
        let (g, closed) = mmse_optimality(&stats, &mut rng, 20, 1e-3)?;
        mmse_gain = mmse_gain.max(g);
        mmse_closed = mmse_closed.max(closed);
        cross = cross.max(estimate_cross_relation_error(&stats, &mut rng)?);
        reduction = reduction.max(three_ue_reduction_error(&stats, &mut rng)?);

        let cov = stats.covariances();
        let (ra, rb) = (cov.block(0, 0), cov.block(1, 0));
        let closed = assumption_metric(
            std::slice::from_ref(ra),
            std::slice::from_ref(rb),
            Pinned::First,
            cov.antennas(),
            AssumptionScope::PerBs(0),
        )?;
        let step = 1e-2;
        if closed.lambda[1].abs() <= 10.0 {
            let (grid, _) = assumption_grid_search(ra, rb, -10.0, 10.0, step);
            // The grid overshoots the minimum by at most ||R_b||^2 (step/2)^2 / M.
            let slack = linalg::frobenius_sq(rb) * (step / 2.0).powi(2) / cov.antennas() as f64;
            metric = metric
                .max(closed.value - grid)
                .max(grid - closed.value - slack);
        }
    }
    report.outcomes.push(outcome(
        "uatf_three_way",
        uatf,
        1e-10,
        "relative difference",
    ));
    report.outcomes.push(CheckOutcome {
        name: "obe_collinearity",
        passed: cos <= 1e-9 && min_inner > 0.0,
        detail: format!("worst 1-|cos| {cos:.3e}, smallest Re<w,w'> {min_inner:.3e}"),
    });
    report.outcomes.push(outcome(
        "mmse_optimality",
        mmse_gain.max(0.0),
        1e-8,
        "relative perturbation gain",
    ));
    report.outcomes.push(outcome(
        "mmse_closed_form",
        mmse_closed,
        1e-10,
        "relative difference",
    ));
    report.outcomes.push(outcome(
        "estimate_cross_relation",
        cross,
        1e-8,
        "relative residual",
    ));
    report.outcomes.push(outcome(
        "three_ue_reduction",
        reduction,
        1e-10,
        "relative difference",
    ));
    report.outcomes.push(outcome(
        "assumption_metric_grid",
        metric.max(0.0),
        1e-12,
        "closed-form vs grid excess",
    ));

    let mut complexity_ok = true;
    for _ in 0..instances {
        let (n, m, t) = (
            rng.random_range(1..=16u64),
            rng.random_range(1..=256u64),
            rng.random_range(1..=64u64),
        );
        let nm = (n * m) as u128;
        let mmse = complexity_count(ComplexityScheme::Mmse, n, m, t);
        let d = complexity_count(ComplexityScheme::Dmmse, n, m, t);
        complexity_ok &= mmse.estimation_mults as u128 == nm * t as u128 + 2 * nm * nm
            && 3 * mmse.combiner_mults as u128 == 9 * nm * nm + 3 * nm + nm * nm * nm - nm
            && d.combiner_mults as u128 == 2 * n as u128 * (m as u128).pow(2)
            && complexity_count(ComplexityScheme::Obe, n, m, t).combiner_mults == d.combiner_mults;
    }
    report.outcomes.push(CheckOutcome {
        name: "complexity_counts",
        passed: complexity_ok,
        detail: format!("{instances} random (N, M, tau_p) triples"),
    });
    Ok(report)
}
