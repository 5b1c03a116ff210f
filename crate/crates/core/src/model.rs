//! Network configuration, geometry and channel covariance construction.

use std::f64::consts::PI;

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, CMat, CVec, C64, PSD_CLIP_TOLERANCE};

/// Static parameters of one simulated network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub num_bs: usize,
    pub antennas_per_bs: usize,
    pub num_ue: usize,
    /// Linear data SNR `rho`.
    pub data_snr: f64,
    pub pilot_length: usize,
    pub coherence_block: usize,
    pub correlation_factor: f64,
    pub rng_seed: u64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        Self {
            num_bs: 4,
            antennas_per_bs: 100,
            num_ue: 2,
            data_snr: 1.0,
            pilot_length: 10,
            coherence_block: 200,
            correlation_factor: 0.5,
            rng_seed: 0,
        }
    }
}

impl NetworkConfig {
    /// Pilot SNR `rho_tr = rho * tau_p`.
    pub fn pilot_snr(&self) -> f64 {
        self.data_snr * self.pilot_length as f64
    }

    /// Fraction of the coherence block left for data, `1 - tau_p / tau_c`.
    pub fn prelog(&self) -> f64 {
        1.0 - self.pilot_length as f64 / self.coherence_block as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_bs == 0 {
            return Err(Error::param("num_bs", "must be positive"));
        }
        if self.antennas_per_bs == 0 {
            return Err(Error::param("antennas_per_bs", "must be positive"));
        }
        if self.num_ue < 2 {
            return Err(Error::param("num_ue", "at least two UEs are required"));
        }
        if !(self.data_snr.is_finite() && self.data_snr > 0.0) {
            return Err(Error::param("data_snr", "must be a positive finite ratio"));
        }
        if self.pilot_length == 0 {
            return Err(Error::param("pilot_length", "must be positive"));
        }
        if self.pilot_length > self.coherence_block {
            return Err(Error::param(
                "pilot_length",
                format!(
                    "pilot_length ({}) exceeds coherence_block ({})",
                    self.pilot_length, self.coherence_block
                ),
            ));
        }
        if !(0.0..1.0).contains(&self.correlation_factor) {
            return Err(Error::param("correlation_factor", "must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// BS and UE positions in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub bs_positions: Vec<Point>,
    pub ue_positions: Vec<Point>,
    pub min_distance: f64,
}

impl Geometry {
    pub fn new(
        bs_positions: Vec<Point>,
        ue_positions: Vec<Point>,
        min_distance: f64,
    ) -> Result<Self> {
        let geo = Self {
            bs_positions,
            ue_positions,
            min_distance,
        };
        for (k, ue) in geo.ue_positions.iter().enumerate() {
            for (n, bs) in geo.bs_positions.iter().enumerate() {
                let d = ue.distance(bs);
                if d < min_distance {
                    return Err(Error::Geometry(format!(
                        "UE {k} is {d:.3} m from BS {n}, below the minimum {min_distance} m"
                    )));
                }
            }
        }
        Ok(geo)
    }

    pub fn num_bs(&self) -> usize {
        self.bs_positions.len()
    }

    pub fn num_ue(&self) -> usize {
        self.ue_positions.len()
    }

    pub fn distance(&self, ue: usize, bs: usize) -> f64 {
        self.ue_positions[ue].distance(&self.bs_positions[bs])
    }
}

/// Exponential-correlation ULA covariance,
/// `[R]_{a,b} = s r^{|b-a|} exp(i (b-a) theta)`.
pub fn exponential_covariance(m: usize, large_scale: f64, r: f64, theta: f64) -> Result<CMat> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::param("correlation_factor", "must lie in [0, 1)"));
    }
    if !(large_scale > 0.0 && large_scale.is_finite()) {
        return Err(Error::param("large_scale", "must be positive and finite"));
    }
    let theta = theta.rem_euclid(2.0 * PI);
    let mut out = CMat::zeros(m, m);
    for a in 0..m {
        out[(a, a)] = c64(large_scale, 0.0);
        for b in (a + 1)..m {
            let lag = (b - a) as i32;
            let mag = large_scale * r.powi(lag);
            let phase = lag as f64 * theta;
            let entry = C64::from_polar(mag, phase);
            out[(a, b)] = entry;
            out[(b, a)] = entry.conj();
        }
    }
    Ok(out)
}

/// Power-law large-scale fading `gain * d^{-exponent}`, indexed `[ue][bs]`.
pub fn large_scale_from_geometry(
    geometry: &Geometry,
    pathloss_exponent: f64,
    reference_gain: f64,
) -> Vec<Vec<f64>> {
    (0..geometry.num_ue())
        .map(|k| {
            (0..geometry.num_bs())
                .map(|n| reference_gain * geometry.distance(k, n).powf(-pathloss_exponent))
                .collect()
        })
        .collect()
}

/// Angle of arrival of each UE at each BS, relative to an x-axis broadside,
/// in `(-pi, pi]`. Indexed `[ue][bs]`.
pub fn aoa_from_geometry(geometry: &Geometry) -> Result<Vec<Vec<f64>>> {
    let mut table = Vec::with_capacity(geometry.num_ue());
    for (k, ue) in geometry.ue_positions.iter().enumerate() {
        let mut row = Vec::with_capacity(geometry.num_bs());
        for (n, bs) in geometry.bs_positions.iter().enumerate() {
            let (dx, dy) = (ue.x - bs.x, ue.y - bs.y);
            if dx == 0.0 && dy == 0.0 {
                return Err(Error::Geometry(format!("UE {k} coincides with BS {n}")));
            }
            row.push(dy.atan2(dx));
        }
        table.push(row);
    }
    Ok(table)
}

/// How the average-SNR target is normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrNormalization {
    /// `rho * tr(R) / M`, i.e. the per-antenna SNR.
    #[default]
    PerAntenna,
    /// `rho * tr(R) / N`.
    PerBsCount,
}

/// Reference gain that makes the average of `rho * tr(R)/divisor` equal to
/// `target_db`, given the mean of `d^{-exponent}` over the calibration drops.
pub fn calibrate_reference_gain(
    mean_path_gain: f64,
    data_snr: f64,
    target_db: f64,
    normalization: SnrNormalization,
    antennas: usize,
    num_bs: usize,
) -> Result<f64> {
    if !(mean_path_gain > 0.0 && mean_path_gain.is_finite()) {
        return Err(Error::param(
            "mean_path_gain",
            "must be positive and finite",
        ));
    }
    let target = 10f64.powf(target_db / 10.0);
    let divisor_ratio = match normalization {
        SnrNormalization::PerAntenna => 1.0,
        SnrNormalization::PerBsCount => antennas as f64 / num_bs as f64,
    };
    Ok(target / (data_snr * mean_path_gain * divisor_ratio))
}

/// Diagnostics of a candidate covariance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceDiagnostics {
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    pub violations: Vec<String>,
}

impl CovarianceDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn validate_covariance(r: &CMat) -> Result<CovarianceDiagnostics> {
    if !r.is_square() {
        return Err(Error::Dimension(format!(
            "covariance must be square, got {}x{}",
            r.nrows(),
            r.ncols()
        )));
    }
    let m = r.nrows().max(1) as f64;
    let hermitian_deviation = linalg::hermitian_deviation(r);
    let min_eigenvalue = linalg::min_eigenvalue(r);
    let trace = linalg::trace(r).re;
    let mut violations = Vec::new();
    let scale = r.norm().max(f64::MIN_POSITIVE);
    if hermitian_deviation > 1e-12 * scale {
        violations.push(format!(
            "not Hermitian (||R - R^H||_F = {hermitian_deviation:e})"
        ));
    }
    if min_eigenvalue < -PSD_CLIP_TOLERANCE * trace.abs() / m {
        violations.push(format!("negative eigenvalue {min_eigenvalue:e}"));
    }
    if trace <= 0.0 {
        violations.push(format!("non-positive trace {trace:e}"));
    }
    Ok(CovarianceDiagnostics {
        hermitian_deviation,
        min_eigenvalue,
        trace,
        violations,
    })
}

/// Per-UE, per-BS spatial covariances `R_k^n`, indexed `[ue][bs]`.
///
/// The global block-diagonal matrix is never stored; every consumer iterates
/// over the per-BS blocks.
#[derive(Debug, Clone)]
pub struct CovarianceSet {
    antennas: usize,
    blocks: Vec<Vec<CMat>>,
    large_scale: Vec<Vec<f64>>,
    aoa: Option<Vec<Vec<f64>>>,
}

impl CovarianceSet {
    /// Validates and stores arbitrary blocks.
    ///
    /// Blocks must be Hermitian and PSD; tiny negative eigenvalues are
    /// clipped. An all-zero block is accepted and means the UE is not heard
    /// at that BS.
    pub fn new(blocks: Vec<Vec<CMat>>) -> Result<Self> {
        let num_ue = blocks.len();
        if num_ue == 0 || blocks[0].is_empty() {
            return Err(Error::Dimension(
                "covariance set needs at least one UE and one BS".into(),
            ));
        }
        let num_bs = blocks[0].len();
        let antennas = blocks[0][0].nrows();
        if antennas == 0 {
            return Err(Error::Dimension(
                "covariance blocks must be non-empty".into(),
            ));
        }
        let mut repaired = Vec::with_capacity(num_ue);
        for row in blocks {
            if row.len() != num_bs {
                return Err(Error::Dimension("every UE needs one block per BS".into()));
            }
            let mut out_row = Vec::with_capacity(num_bs);
            for r in row {
                if r.nrows() != antennas || r.ncols() != antennas {
                    return Err(Error::Dimension(format!(
                        "expected {antennas}x{antennas} block, got {}x{}",
                        r.nrows(),
                        r.ncols()
                    )));
                }
                out_row.push(repair_psd(r)?);
            }
            repaired.push(out_row);
        }
        let large_scale = repaired
            .iter()
            .map(|row| {
                row.iter()
                    .map(|r| linalg::trace(r).re / antennas as f64)
                    .collect()
            })
            .collect();
        Ok(Self {
            antennas,
            blocks: repaired,
            large_scale,
            aoa: None,
        })
    }

    /// Builds the exponential-model covariances for the given large-scale
    /// gains and angles (both `[ue][bs]`).
    pub fn exponential(
        antennas: usize,
        correlation_factor: f64,
        large_scale: &[Vec<f64>],
        aoa: &[Vec<f64>],
    ) -> Result<Self> {
        let mut blocks = Vec::with_capacity(large_scale.len());
        for (gains, angles) in large_scale.iter().zip(aoa) {
            let row = gains
                .iter()
                .zip(angles)
                .map(|(&g, &theta)| exponential_covariance(antennas, g, correlation_factor, theta))
                .collect::<Result<Vec<_>>>()?;
            blocks.push(row);
        }
        let mut set = Self::new(blocks)?;
        set.aoa = Some(aoa.to_vec());
        Ok(set)
    }

    pub fn antennas(&self) -> usize {
        self.antennas
    }

    pub fn num_ue(&self) -> usize {
        self.blocks.len()
    }

    pub fn num_bs(&self) -> usize {
        self.blocks[0].len()
    }

    pub fn block(&self, ue: usize, bs: usize) -> &CMat {
        &self.blocks[ue][bs]
    }

    /// All per-BS blocks of one UE.
    pub fn ue_blocks(&self, ue: usize) -> &[CMat] {
        &self.blocks[ue]
    }

    /// `tr(R_k^n) / M`.
    pub fn large_scale(&self, ue: usize, bs: usize) -> f64 {
        self.large_scale[ue][bs]
    }

    pub fn aoa(&self) -> Option<&[Vec<f64>]> {
        self.aoa.as_deref()
    }

    /// Restricts the set to two UEs, in the given order.
    pub fn pair(&self, first: usize, second: usize) -> Result<Self> {
        Self::new(vec![
            self.blocks[first].clone(),
            self.blocks[second].clone(),
        ])
    }
}

fn repair_psd(mut r: CMat) -> Result<CMat> {
    let m = r.nrows() as f64;
    let scale = r.norm().max(f64::MIN_POSITIVE);
    if linalg::hermitian_deviation(&r) > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "covariance block is not Hermitian (deviation {:e})",
            linalg::hermitian_deviation(&r)
        )));
    }
    linalg::hermitize(&mut r);
    let trace = linalg::trace(&r).re;
    if trace < 0.0 {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: trace,
        });
    }
    if r.iter().all(|z| *z == C64::new(0.0, 0.0)) || linalg::is_positive_definite(&r) {
        return Ok(r);
    }
    let eig = SymmetricEigen::new(r.clone());
    let min = eig.eigenvalues.min();
    if min >= 0.0 {
        return Ok(r);
    }
    if min < -PSD_CLIP_TOLERANCE * trace / m {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min,
        });
    }
    let clipped = CVec::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| c64(l.max(0.0), 0.0)),
    );
    let u = &eig.eigenvectors;
    let mut out = u * CMat::from_diagonal(&clipped) * u.adjoint();
    linalg::hermitize(&mut out);
    Ok(out)
}
