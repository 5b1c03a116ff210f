//! Deterministic random streams.
//!
//! Every unit of Monte Carlo work draws from its own ChaCha8 stream whose
//! seed is a hash of the run seed and the work coordinates. Results are
//! therefore independent of thread count and scheduling order, and a sweep
//! restarted at any `(drop, M)` point reproduces the same numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Purpose tags so that, e.g., geometry and channel streams never collide.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Geometry = 1,
    Channel = 2,
    Calibration = 3,
    Check = 4,
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Opens the stream identified by `(seed, domain, coords...)`.
pub fn stream(seed: u64, domain: Domain, coords: &[u64]) -> StreamRng {
    let mut state = seed ^ (domain as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93);
    let mut acc = splitmix64(&mut state);
    for &c in coords {
        state ^= c.wrapping_add(acc);
        acc = splitmix64(&mut state);
    }
    let mut bytes = [0u8; 32];
    for chunk in bytes.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(bytes)
}
