//! BS layout, UE drops and the per-drop covariance construction.

use rand::Rng;

use super::config::{ExperimentConfig, GeometrySpec, SnrAveraging};
use crate::error::{ConfigIssue, Error, Result};
use crate::model::{
    aoa_from_geometry, calibrate_reference_gain, large_scale_from_geometry, CovarianceSet,
    Geometry, Point,
};
use crate::rng::{self, Domain};

/// Rejection-sampling budget per UE.
pub const MAX_DROP_ATTEMPTS: usize = 100_000;

/// `num_bs` positions at the cell centers of a `cols x rows` grid over the
/// square, filled row by row, with `cols = ceil(sqrt(num_bs))`.
pub fn bs_grid(num_bs: usize, area_side: f64) -> Vec<Point> {
    if num_bs == 0 {
        return Vec::new();
    }
    let cols = (num_bs as f64).sqrt().ceil() as usize;
    let rows = num_bs.div_ceil(cols);
    let (w, h) = (area_side / cols as f64, area_side / rows as f64);
    (0..num_bs)
        .map(|i| {
            Point::new(
                (i % cols) as f64 * w + w / 2.0,
                (i / cols) as f64 * h + h / 2.0,
            )
        })
        .collect()
}

/// Drops `num_ue` UEs uniformly in the square, rejecting positions closer
/// than `min_distance` to any BS.
pub fn drop_ues<R: Rng + ?Sized>(
    spec: &GeometrySpec,
    bs_positions: &[Point],
    num_ue: usize,
    rng: &mut R,
) -> Result<Geometry> {
    let mut ues = Vec::with_capacity(num_ue);
    for _ in 0..num_ue {
        let accepted = (0..MAX_DROP_ATTEMPTS).find_map(|_| {
            let p = Point::new(
                rng.random::<f64>() * spec.area_side,
                rng.random::<f64>() * spec.area_side,
            );
            bs_positions
                .iter()
                .all(|b| p.distance(b) >= spec.min_distance)
                .then_some(p)
        });
        match accepted {
            Some(p) => ues.push(p),
            None => {
                return Err(Error::Config(vec![ConfigIssue::new(
                    "min_distance",
                    format!("no valid UE position found in {MAX_DROP_ATTEMPTS} attempts"),
                )]))
            }
        }
    }
    Geometry::new(bs_positions.to_vec(), ues, spec.min_distance)
}

/// Mean of `d^{-exponent}` over every UE-BS link of the calibration drops,
/// arithmetic or geometric according to [`SnrAveraging`].
pub fn mean_path_gain(cfg: &ExperimentConfig) -> Result<f64> {
    let spec = &cfg.geometry;
    let bs = bs_grid(cfg.network.num_bs, spec.area_side);
    let mut total = 0.0;
    let mut count = 0usize;
    for d in 0..spec.calibration_drops {
        let mut rng = rng::stream(cfg.seed(), Domain::Calibration, &[d as u64]);
        let geo = drop_ues(spec, &bs, cfg.network.num_ue, &mut rng)?;
        for row in large_scale_from_geometry(&geo, spec.pathloss_exponent, 1.0) {
            total += match spec.snr_averaging {
                SnrAveraging::Linear => row.iter().sum::<f64>(),
                SnrAveraging::Decibel => row.iter().map(|g| g.ln()).sum::<f64>(),
            };
            count += row.len();
        }
    }
    let mean = total / count as f64;
    Ok(match spec.snr_averaging {
        SnrAveraging::Linear => mean,
        SnrAveraging::Decibel => mean.exp(),
    })
}

/// One UE drop: positions, gains and angles. Covariances are built per `M`.
#[derive(Debug, Clone)]
pub struct DropSetup {
    pub index: usize,
    pub geometry: Geometry,
    /// Path gain `d^{-exponent}` without the reference gain, `[ue][bs]`.
    pub path_gain: Vec<Vec<f64>>,
    pub aoa: Vec<Vec<f64>>,
}

impl DropSetup {
    pub fn new(cfg: &ExperimentConfig, index: usize) -> Result<Self> {
        let spec = &cfg.geometry;
        let bs = bs_grid(cfg.network.num_bs, spec.area_side);
        let mut rng = rng::stream(cfg.seed(), Domain::Geometry, &[index as u64]);
        let geometry = drop_ues(spec, &bs, cfg.network.num_ue, &mut rng)?;
        let path_gain = large_scale_from_geometry(&geometry, spec.pathloss_exponent, 1.0);
        let aoa = aoa_from_geometry(&geometry)?;
        Ok(Self {
            index,
            geometry,
            path_gain,
            aoa,
        })
    }

    pub fn covariances(
        &self,
        antennas: usize,
        reference_gain: f64,
        correlation_factor: f64,
    ) -> Result<CovarianceSet> {
        let large_scale: Vec<Vec<f64>> = self
            .path_gain
            .iter()
            .map(|row| row.iter().map(|g| g * reference_gain).collect())
            .collect();
        CovarianceSet::exponential(antennas, correlation_factor, &large_scale, &self.aoa)
    }
}

/// Reference gains per value of the antenna grid.
pub fn reference_gains(cfg: &ExperimentConfig) -> Result<Vec<f64>> {
    let mean = mean_path_gain(cfg)?;
    cfg.antenna_grid
        .iter()
        .map(|&m| {
            calibrate_reference_gain(
                mean,
                cfg.network.data_snr,
                cfg.geometry.snr_target_db,
                cfg.geometry.snr_normalization,
                m,
                cfg.network.num_bs,
            )
        })
        .collect()
}
