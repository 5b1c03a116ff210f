//! Uplink combining for distributed Massive MIMO under pilot contamination.
//!
//! `N` base stations with `M` antennas each jointly decode two UEs that share
//! one pilot sequence. The crate provides
//!
//! - covariance construction for the exponential ULA model ([`model`]),
//! - pilot-phase simulation with LS and MMSE estimation ([`estimation`]),
//! - MR, centralized MMSE, distributed MMSE and the optimal bilinear
//!   equalizer, all behind a common [`combining::CombiningScheme`] trait and a
//!   name-keyed [`combining::SchemeRegistry`] ([`combining`]),
//! - instantaneous and use-and-then-forget SINR / spectral-efficiency
//!   evaluation ([`se`]),
//! - finite-`M` diagnostics of the large-array behaviour ([`asymptotics`]),
//! - a seeded experiment driver with CSV output ([`harness`]).
//!
//! Per-UE tables are indexed `[ue][bs]` with zero-based indices throughout.

pub mod asymptotics;
pub mod combining;
pub mod error;
pub mod estimation;
pub mod harness;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod se;

pub use error::{Error, Result};
pub use linalg::{CMat, CVec, C64};
