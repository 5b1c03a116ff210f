//! Correlated Rayleigh channel sampling, the shared-pilot observation, and
//! LS / MMSE channel estimation.
//!
//! All UEs transmit the same pilot `phi` (all ones, `||phi||^2 = tau_p`) at
//! per-symbol SNR `rho`, so the pilot energy is `rho_tr = rho * tau_p`. The
//! LS estimate is normalized to `ls = sum_k h_k + n` with `n ~ CN(0, I/rho_tr)`,
//! which makes `Q_tr = sum_k R_k + I/rho_tr` its covariance and
//! `R_k Q_tr^{-1} ls` the MMSE estimate of `h_k`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMat, CVec, HpdSolver};
use crate::model::CovarianceSet;

/// Shared pilot of length `tau_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pilot {
    pub length: usize,
    pub data_snr: f64,
}

impl Pilot {
    pub fn new(length: usize, data_snr: f64) -> Result<Self> {
        if length == 0 {
            return Err(Error::param("pilot_length", "must be positive"));
        }
        if !(data_snr > 0.0 && data_snr.is_finite()) {
            return Err(Error::param("data_snr", "must be positive and finite"));
        }
        Ok(Self { length, data_snr })
    }

    /// `phi = (1, ..., 1)`.
    pub fn sequence(&self) -> CVec {
        CVec::from_element(self.length, c64(1.0, 0.0))
    }

    pub fn pilot_snr(&self) -> f64 {
        self.data_snr * self.length as f64
    }
}

/// Per-BS statistical matrices.
#[derive(Debug, Clone)]
pub struct StatMatrices {
    /// `Q_tr^n = sum_k R_k^n + I / rho_tr`.
    pub q_tr: Vec<CMat>,
    /// `Q^n = sum_k R_k^n + I / rho`.
    pub q: Vec<CMat>,
    /// `Z^n = sum_k (R_k^n - R_k^n (Q_tr^n)^{-1} R_k^n) + I / rho`.
    pub z: Vec<CMat>,
}

pub fn compute_stat_matrices(
    cov: &CovarianceSet,
    data_snr: f64,
    pilot_snr: f64,
) -> Result<StatMatrices> {
    stat_with_filters(cov, data_snr, pilot_snr).map(|(stat, _, _)| stat)
}

/// The statistical matrices together with the factored `Q_tr^n` and the
/// filters `R_k^n (Q_tr^n)^{-1}` `[ue][bs]` they are built from.
fn stat_with_filters(
    cov: &CovarianceSet,
    data_snr: f64,
    pilot_snr: f64,
) -> Result<(StatMatrices, Vec<HpdSolver>, Vec<Vec<CMat>>)> {
    let m = cov.antennas();
    let mut q_tr = Vec::with_capacity(cov.num_bs());
    let mut q = Vec::with_capacity(cov.num_bs());
    let mut z = Vec::with_capacity(cov.num_bs());
    let mut solvers = Vec::with_capacity(cov.num_bs());
    let mut per_bs_filters = Vec::with_capacity(cov.num_bs());
    for n in 0..cov.num_bs() {
        let mut sum = CMat::zeros(m, m);
        for k in 0..cov.num_ue() {
            sum += cov.block(k, n);
        }
        let qtr_n = linalg::add_scaled_identity(&sum, 1.0 / pilot_snr);
        let solver = HpdSolver::new(&qtr_n)?;
        let mut z_n = linalg::add_scaled_identity(&CMat::zeros(m, m), 1.0 / data_snr);
        let mut filters = Vec::with_capacity(cov.num_ue());
        for k in 0..cov.num_ue() {
            let r = cov.block(k, n);
            let f = solver.right_solve(r);
            z_n += r - &f * r;
            filters.push(f);
        }
        linalg::hermitize(&mut z_n);
        q.push(linalg::add_scaled_identity(&sum, 1.0 / data_snr));
        q_tr.push(qtr_n);
        z.push(z_n);
        solvers.push(solver);
        per_bs_filters.push(filters);
    }
    Ok((
        StatMatrices { q_tr, q, z },
        solvers,
        transpose_table(per_bs_filters),
    ))
}

/// PSD factors `L_k^n` with `L L^H = R_k^n`.
#[derive(Debug, Clone)]
pub struct ChannelSampler {
    factors: Vec<Vec<CMat>>,
}

impl ChannelSampler {
    pub fn new(cov: &CovarianceSet) -> Result<Self> {
        let factors = (0..cov.num_ue())
            .map(|k| {
                cov.ue_blocks(k)
                    .iter()
                    .map(linalg::psd_factor)
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { factors })
    }

    pub fn num_ue(&self) -> usize {
        self.factors.len()
    }

    pub fn num_bs(&self) -> usize {
        self.factors[0].len()
    }

    /// Channels of every UE to BS `bs`.
    pub fn sample_bs<R: Rng + ?Sized>(&self, bs: usize, rng: &mut R) -> Vec<CVec> {
        self.factors
            .iter()
            .map(|row| {
                let l = &row[bs];
                l * linalg::complex_gaussian(rng, l.ncols())
            })
            .collect()
    }

    /// Channel table `[ue][bs]` drawn from a single stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<CVec>> {
        let per_bs: Vec<Vec<CVec>> = (0..self.num_bs()).map(|n| self.sample_bs(n, rng)).collect();
        transpose_table(per_bs)
    }
}

/// Draws `h_k^n ~ CN(0, R_k^n)` for all UEs and BSs.
pub fn sample_channels<R: Rng + ?Sized>(
    cov: &CovarianceSet,
    rng: &mut R,
) -> Result<Vec<Vec<CVec>>> {
    Ok(ChannelSampler::new(cov)?.sample(rng))
}

/// `Y = sqrt(rho) sum_k h_k phi^T + N` at one BS for a given noise matrix.
pub fn pilot_observation_with_noise(channels: &[CVec], pilot: &Pilot, noise: &CMat) -> CMat {
    let m = noise.nrows();
    let mut sum = CVec::zeros(m);
    for h in channels {
        sum += h;
    }
    let phi = pilot.sequence();
    let amp = pilot.data_snr.sqrt();
    sum * phi.transpose() * c64(amp, 0.0) + noise
}

/// Pilot observation with i.i.d. `CN(0, 1)` noise.
pub fn pilot_observation<R: Rng + ?Sized>(channels: &[CVec], pilot: &Pilot, rng: &mut R) -> CMat {
    let m = channels.first().map_or(0, |h| h.len());
    let noise = linalg::complex_gaussian(rng, m * pilot.length);
    let noise = CMat::from_column_slice(m, pilot.length, noise.as_slice());
    pilot_observation_with_noise(channels, pilot, &noise)
}

/// `ls = Y phi^* / (sqrt(rho) tau_p)`.
pub fn ls_estimate(y: &CMat, pilot: &Pilot) -> CVec {
    let phi_conj = pilot.sequence().conjugate();
    let scale = 1.0 / (pilot.data_snr.sqrt() * pilot.length as f64);
    (y * phi_conj) * c64(scale, 0.0)
}

/// `hhat_k^n = R_k^n (Q_tr^n)^{-1} ls^n` from precomputed filters `[ue][bs]`.
pub fn mmse_estimate(ls: &[CVec], filters: &[Vec<CMat>]) -> Vec<Vec<CVec>> {
    filters
        .iter()
        .map(|row| row.iter().zip(ls).map(|(f, l)| f * l).collect())
        .collect()
}

/// One coherence block.
#[derive(Debug, Clone)]
pub struct ChannelBlock {
    /// True channels `[ue][bs]`.
    pub channels: Vec<Vec<CVec>>,
    /// Pilot observations per BS.
    pub observations: Vec<CMat>,
    /// LS estimate per BS; identical for every UE sharing the pilot.
    pub ls: Vec<CVec>,
    /// MMSE estimates `[ue][bs]`.
    pub estimates: Vec<Vec<CVec>>,
}

/// Everything about one covariance set that stays fixed across blocks:
/// statistical matrices, their factorizations, the estimation filters and
/// the channel sampler.
#[derive(Debug, Clone)]
pub struct LinkStatistics {
    cov: CovarianceSet,
    stat: StatMatrices,
    pilot: Pilot,
    q_tr_solvers: Vec<HpdSolver>,
    q_solvers: Vec<HpdSolver>,
    z_solvers: Vec<HpdSolver>,
    filters: Vec<Vec<CMat>>,
    sampler: ChannelSampler,
}

impl LinkStatistics {
    pub fn new(cov: CovarianceSet, pilot: Pilot) -> Result<Self> {
        let (stat, q_tr_solvers, filters) =
            stat_with_filters(&cov, pilot.data_snr, pilot.pilot_snr())?;
        let q_solvers = stat
            .q
            .iter()
            .map(HpdSolver::new)
            .collect::<Result<Vec<_>>>()?;
        let z_solvers = stat
            .z
            .iter()
            .map(HpdSolver::new)
            .collect::<Result<Vec<_>>>()?;
        let sampler = ChannelSampler::new(&cov)?;
        Ok(Self {
            cov,
            stat,
            pilot,
            q_tr_solvers,
            q_solvers,
            z_solvers,
            filters,
            sampler,
        })
    }

    pub fn covariances(&self) -> &CovarianceSet {
        &self.cov
    }

    pub fn stat(&self) -> &StatMatrices {
        &self.stat
    }

    pub fn pilot(&self) -> &Pilot {
        &self.pilot
    }

    pub fn antennas(&self) -> usize {
        self.cov.antennas()
    }

    pub fn num_bs(&self) -> usize {
        self.cov.num_bs()
    }

    pub fn num_ue(&self) -> usize {
        self.cov.num_ue()
    }

    pub fn q_tr_solver(&self, bs: usize) -> &HpdSolver {
        &self.q_tr_solvers[bs]
    }

    pub fn q_solver(&self, bs: usize) -> &HpdSolver {
        &self.q_solvers[bs]
    }

    pub fn z_solver(&self, bs: usize) -> &HpdSolver {
        &self.z_solvers[bs]
    }

    /// Cached `R_k^n (Q_tr^n)^{-1}`.
    pub fn filter(&self, ue: usize, bs: usize) -> &CMat {
        &self.filters[ue][bs]
    }

    pub fn filters(&self) -> &[Vec<CMat>] {
        &self.filters
    }

    pub fn sampler(&self) -> &ChannelSampler {
        &self.sampler
    }

    /// Draws one block. `rng_for_bs(n)` supplies the stream for BS `n`,
    /// which is used first for the channels and then for the pilot noise.
    pub fn draw_block<R, F>(&self, mut rng_for_bs: F) -> ChannelBlock
    where
        R: Rng,
        F: FnMut(usize) -> R,
    {
        let n_bs = self.num_bs();
        let mut per_bs_channels = Vec::with_capacity(n_bs);
        let mut observations = Vec::with_capacity(n_bs);
        let mut ls = Vec::with_capacity(n_bs);
        for n in 0..n_bs {
            let mut rng = rng_for_bs(n);
            let h = self.sampler.sample_bs(n, &mut rng);
            let y = pilot_observation(&h, &self.pilot, &mut rng);
            ls.push(ls_estimate(&y, &self.pilot));
            observations.push(y);
            per_bs_channels.push(h);
        }
        let estimates = mmse_estimate(&ls, &self.filters);
        ChannelBlock {
            channels: transpose_table(per_bs_channels),
            observations,
            ls,
            estimates,
        }
    }
}

/// `[bs][ue]` to `[ue][bs]`.
pub(crate) fn transpose_table<T>(table: Vec<Vec<T>>) -> Vec<Vec<T>> {
    let cols = table.first().map_or(0, Vec::len);
    let mut out: Vec<Vec<T>> = (0..cols).map(|_| Vec::with_capacity(table.len())).collect();
    for row in table {
        for (j, item) in row.into_iter().enumerate() {
            out[j].push(item);
        }
    }
    out
}
