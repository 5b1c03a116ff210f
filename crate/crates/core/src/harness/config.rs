//! Experiment configuration: a flat key-value file (TOML syntax) with
//! defaults for every key.

use std::path::PathBuf;

use toml::{Table, Value};

use crate::combining::SchemeRegistry;
use crate::error::{ConfigIssue, Error, Result};
use crate::model::{NetworkConfig, SnrNormalization};

/// How per-link SNRs are averaged when calibrating the reference gain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnrAveraging {
    /// Arithmetic mean of the linear SNR.
    Linear,
    /// Mean of the SNR in dB, i.e. the geometric mean of the linear SNR.
    #[default]
    Decibel,
}

/// Where BSs sit and how UEs are dropped around them.
///
/// BSs are placed at the cell centers of a near-square grid covering the
/// area (`N = 4` gives the quadrant centers).
#[derive(Debug, Clone, PartialEq)]
pub struct GeometrySpec {
    /// Side of the square area in meters.
    pub area_side: f64,
    /// Minimum UE-BS distance in meters.
    pub min_distance: f64,
    pub pathloss_exponent: f64,
    /// Drop-averaged data SNR the reference gain is calibrated to.
    pub snr_target_db: f64,
    pub snr_normalization: SnrNormalization,
    pub snr_averaging: SnrAveraging,
    /// Drops used to calibrate the reference gain.
    pub calibration_drops: usize,
}

impl Default for GeometrySpec {
    fn default() -> Self {
        Self {
            area_side: 400.0,
            min_distance: 20.0,
            pathloss_exponent: 3.7,
            snr_target_db: 6.6,
            snr_normalization: SnrNormalization::PerAntenna,
            snr_averaging: SnrAveraging::default(),
            calibration_drops: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// `antennas_per_bs` holds the largest value of the sweep and
    /// `rng_seed` the master seed.
    pub network: NetworkConfig,
    pub geometry: GeometrySpec,
    /// Values of `M` to sweep, strictly increasing.
    pub antenna_grid: Vec<usize>,
    pub schemes: Vec<String>,
    pub drops: usize,
    pub blocks_per_drop: usize,
    pub output: Option<PathBuf>,
}

pub const DEFAULT_ANTENNA_GRID: [usize; 5] = [20, 40, 60, 80, 100];
pub const DEFAULT_SCHEMES: [&str; 5] = ["MR", "MMSE", "DMMSE", "OBE_EQ6", "OBE_UATF"];
/// Schemes that handle any number of UEs.
pub const MULTIUSER_SCHEMES: [&str; 3] = ["MR", "MMSE", "DMMSE"];
const REL_TOL_PILOT_SNR: f64 = 1e-9;

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            network: NetworkConfig {
                antennas_per_bs: *DEFAULT_ANTENNA_GRID.last().unwrap(),
                ..NetworkConfig::default()
            },
            geometry: GeometrySpec::default(),
            antenna_grid: DEFAULT_ANTENNA_GRID.to_vec(),
            schemes: DEFAULT_SCHEMES.iter().map(|s| s.to_string()).collect(),
            drops: 100,
            blocks_per_drop: 200,
            output: None,
        }
    }
}

impl ExperimentConfig {
    pub fn seed(&self) -> u64 {
        self.network.rng_seed
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.network.rng_seed = seed;
    }

    /// Replaces the sweep and keeps `antennas_per_bs` in step.
    pub fn set_antenna_grid(&mut self, grid: Vec<usize>) {
        self.network.antennas_per_bs = grid.last().copied().unwrap_or(0);
        self.antenna_grid = grid;
    }

    /// All invariant violations, each tied to its key.
    pub fn issues(&self) -> Vec<ConfigIssue> {
        let mut issues = Vec::new();
        let net = &self.network;
        let mut push = |key: &str, reason: String| issues.push(ConfigIssue::new(key, reason));
        if net.num_bs == 0 {
            push("num_bs", "must be positive".into());
        }
        if net.num_ue < 2 {
            push("num_ue", "at least two UEs are required".into());
        }
        if !(net.data_snr.is_finite() && net.data_snr > 0.0) {
            push("data_snr", "must be a positive finite ratio".into());
        }
        if net.pilot_length == 0 {
            push("pilot_length", "must be positive".into());
        }
        if net.coherence_block == 0 {
            push("coherence_block", "must be positive".into());
        }
        if net.pilot_length > net.coherence_block {
            push(
                "pilot_length, coherence_block",
                format!(
                    "pilot_length ({}) must not exceed coherence_block ({})",
                    net.pilot_length, net.coherence_block
                ),
            );
        }
        if !(0.0..1.0).contains(&net.correlation_factor) {
            push("correlation_factor", "must lie in [0, 1)".into());
        }
        if self.antenna_grid.is_empty() {
            push("antennas", "at least one M value is required".into());
        } else if self.antenna_grid[0] == 0 {
            push("antennas", "M values must be positive".into());
        } else if self.antenna_grid.windows(2).any(|w| w[1] <= w[0]) {
            push("antennas", "M grid must be strictly increasing".into());
        }
        if self.schemes.is_empty() {
            push("schemes", "at least one scheme is required".into());
        }
        let registry = SchemeRegistry::builtin();
        for name in &self.schemes {
            match registry.get(name) {
                Err(_) => push(
                    "schemes",
                    format!(
                        "unknown scheme `{name}` (known: {})",
                        registry.names().join(", ")
                    ),
                ),
                Ok(s) if !s.supports(net.num_ue) => push(
                    "schemes",
                    format!(
                        "`{}` only supports two UEs, but num_ue = {}",
                        s.name(),
                        net.num_ue
                    ),
                ),
                Ok(_) => {}
            }
        }
        if self.drops == 0 {
            push("drops", "must be positive".into());
        }
        if self.blocks_per_drop == 0 {
            push("blocks_per_drop", "must be positive".into());
        }
        let g = &self.geometry;
        if !(g.area_side.is_finite() && g.area_side > 0.0) {
            push("area_side", "must be positive".into());
        }
        if !(g.min_distance.is_finite() && g.min_distance >= 0.0) {
            push("min_distance", "must be nonnegative".into());
        } else if g.area_side > 0.0 && 2.0 * g.min_distance >= g.area_side {
            push(
                "min_distance",
                "exclusion disks cover the whole area".into(),
            );
        }
        if !(g.pathloss_exponent.is_finite() && g.pathloss_exponent > 0.0) {
            push("pathloss_exponent", "must be positive".into());
        }
        if !g.snr_target_db.is_finite() {
            push("snr_target_db", "must be finite".into());
        }
        if g.calibration_drops == 0 {
            push("calibration_drops", "must be positive".into());
        }
        issues
    }

    pub fn validate(&self) -> Result<()> {
        let issues = self.issues();
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(issues))
        }
    }
}

/// Every key the parser accepts.
pub const KNOWN_KEYS: [&str; 21] = [
    "num_bs",
    "antennas_per_bs",
    "antennas",
    "num_ue",
    "data_snr",
    "pilot_snr",
    "pilot_length",
    "coherence_block",
    "correlation_factor",
    "seed",
    "area_side",
    "min_distance",
    "pathloss_exponent",
    "snr_target_db",
    "snr_normalization",
    "snr_averaging",
    "calibration_drops",
    "schemes",
    "drops",
    "blocks_per_drop",
    "output",
];

struct Reader<'a> {
    table: &'a Table,
    issues: Vec<ConfigIssue>,
}

impl Reader<'_> {
    fn issue(&mut self, key: &str, reason: impl Into<String>) {
        self.issues.push(ConfigIssue::new(key, reason));
    }

    fn uint(&mut self, key: &str) -> Option<u64> {
        match self.table.get(key)? {
            Value::Integer(i) if *i >= 0 => Some(*i as u64),
            Value::Integer(_) => {
                self.issue(key, "must be nonnegative");
                None
            }
            other => {
                self.issue(
                    key,
                    format!("expected an integer, got {}", other.type_str()),
                );
                None
            }
        }
    }

    fn usize(&mut self, key: &str, into: &mut usize) {
        if let Some(v) = self.uint(key) {
            *into = v as usize;
        }
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        match self.table.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            other => {
                self.issue(key, format!("expected a number, got {}", other.type_str()));
                None
            }
        }
    }

    fn f64(&mut self, key: &str, into: &mut f64) {
        if let Some(v) = self.float(key) {
            *into = v;
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.table.get(key)? {
            Value::String(s) => Some(s.clone()),
            other => {
                self.issue(key, format!("expected a string, got {}", other.type_str()));
                None
            }
        }
    }

    fn array<T>(
        &mut self,
        key: &str,
        item: impl Fn(&Value) -> Option<T>,
        what: &str,
    ) -> Option<Vec<T>> {
        match self.table.get(key)? {
            Value::Array(items) => {
                let parsed: Option<Vec<T>> = items.iter().map(item).collect();
                if parsed.is_none() {
                    self.issue(key, format!("every entry must be {what}"));
                }
                parsed
            }
            other => {
                self.issue(key, format!("expected an array, got {}", other.type_str()));
                None
            }
        }
    }
}

/// Parses a config file, applies defaults and checks every invariant.
///
/// All problems are collected and returned together in
/// [`Error::Config`].
pub fn validate_config(text: &str) -> Result<ExperimentConfig> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Config(vec![ConfigIssue::new("<syntax>", e.message().to_string())])
    })?;
    let mut r = Reader {
        table: &table,
        issues: Vec::new(),
    };
    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            r.issue(key, "unknown key");
        }
    }

    let mut cfg = ExperimentConfig::default();
    let net = &mut cfg.network;
    r.usize("num_bs", &mut net.num_bs);
    r.usize("num_ue", &mut net.num_ue);
    r.f64("data_snr", &mut net.data_snr);
    r.usize("pilot_length", &mut net.pilot_length);
    r.usize("coherence_block", &mut net.coherence_block);
    r.f64("correlation_factor", &mut net.correlation_factor);
    if let Some(seed) = r.uint("seed") {
        net.rng_seed = seed;
    }
    if let Some(rho_tr) = r.float("pilot_snr") {
        let expected = net.pilot_snr();
        if (rho_tr - expected).abs() > REL_TOL_PILOT_SNR * expected.abs() {
            r.issue(
                "pilot_snr",
                format!("must equal data_snr * pilot_length = {expected}, got {rho_tr}"),
            );
        }
    }

    let single = r.uint("antennas_per_bs");
    let grid = r.array(
        "antennas",
        |v| v.as_integer().filter(|&i| i > 0).map(|i| i as usize),
        "a positive integer",
    );
    match (single, grid) {
        (Some(_), Some(_)) => r.issue(
            "antennas_per_bs, antennas",
            "give either a single M or a grid, not both",
        ),
        (Some(m), None) => cfg.set_antenna_grid(vec![m as usize]),
        (None, Some(g)) => cfg.set_antenna_grid(g),
        (None, None) => {}
    }

    let g = &mut cfg.geometry;
    r.f64("area_side", &mut g.area_side);
    r.f64("min_distance", &mut g.min_distance);
    r.f64("pathloss_exponent", &mut g.pathloss_exponent);
    r.f64("snr_target_db", &mut g.snr_target_db);
    r.usize("calibration_drops", &mut g.calibration_drops);
    if let Some(s) = r.string("snr_normalization") {
        match s.as_str() {
            "per_antenna" => g.snr_normalization = SnrNormalization::PerAntenna,
            "per_bs_count" => g.snr_normalization = SnrNormalization::PerBsCount,
            other => r.issue(
                "snr_normalization",
                format!("expected `per_antenna` or `per_bs_count`, got `{other}`"),
            ),
        }
    }

    if let Some(s) = r.string("snr_averaging") {
        match s.as_str() {
            "linear" => g.snr_averaging = SnrAveraging::Linear,
            "db" => g.snr_averaging = SnrAveraging::Decibel,
            other => r.issue(
                "snr_averaging",
                format!("expected `linear` or `db`, got `{other}`"),
            ),
        }
    }

    match r.array("schemes", |v| v.as_str().map(str::to_string), "a string") {
        Some(s) => cfg.schemes = s,
        None if cfg.network.num_ue > 2 && !table.contains_key("schemes") => {
            cfg.schemes = MULTIUSER_SCHEMES.iter().map(|s| s.to_string()).collect();
        }
        None => {}
    }
    r.usize("drops", &mut cfg.drops);
    r.usize("blocks_per_drop", &mut cfg.blocks_per_drop);
    if let Some(path) = r.string("output") {
        cfg.output = Some(PathBuf::from(path));
    }

    let mut issues = r.issues;
    issues.extend(cfg.issues());
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(issues))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn issues(text: &str) -> Vec<ConfigIssue> {
        match validate_config(text) {
            Err(Error::Config(i)) => i,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = validate_config("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.network.pilot_snr(), 10.0);
    }

    #[test]
    fn pilot_snr_follows_pilot_length() {
        let cfg =
            validate_config("data_snr = 2.5\npilot_length = 10\ncoherence_block = 200").unwrap();
        assert_eq!(cfg.network.pilot_snr(), 25.0);
        assert!(validate_config("data_snr = 2.5\npilot_snr = 25").is_ok());
        let i = issues("data_snr = 2.5\npilot_snr = 2.5");
        assert_eq!(i[0].key, "pilot_snr");
    }

    #[test]
    fn pilot_longer_than_block_names_both_keys() {
        let i = issues("pilot_length = 30\ncoherence_block = 20");
        assert!(i
            .iter()
            .any(|x| x.key.contains("pilot_length") && x.key.contains("coherence_block")));
    }

    #[test]
    fn empty_scheme_list_is_rejected() {
        let i = issues("schemes = []");
        assert_eq!(i.len(), 1);
        assert_eq!(i[0].key, "schemes");
    }

    #[test]
    fn every_problem_is_reported() {
        let i = issues("bogus = 1\nantennas = [40, 20]\nschemes = [\"ZF\"]\ndrops = \"many\"");
        let keys: Vec<&str> = i.iter().map(|x| x.key.as_str()).collect();
        assert!(keys.contains(&"bogus"));
        assert!(keys.contains(&"antennas"));
        assert!(keys.contains(&"schemes"));
        assert!(keys.contains(&"drops"));
    }

    #[test]
    fn obe_needs_two_ues() {
        let i = issues("num_ue = 3\nschemes = [\"MR\", \"OBE_UATF\"]");
        assert!(i
            .iter()
            .any(|x| x.key == "schemes" && x.reason.contains("two UEs")));
        let cfg = validate_config("num_ue = 3").unwrap();
        assert_eq!(cfg.schemes, MULTIUSER_SCHEMES);
    }

    #[test]
    fn single_antenna_count() {
        let cfg = validate_config("antennas_per_bs = 8").unwrap();
        assert_eq!(cfg.antenna_grid, [8]);
        assert_eq!(cfg.network.antennas_per_bs, 8);
        assert!(validate_config("antennas_per_bs = 8\nantennas = [8]").is_err());
    }

    #[test]
    fn syntax_error_is_a_config_error() {
        let err = validate_config("num_bs = ").unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}
