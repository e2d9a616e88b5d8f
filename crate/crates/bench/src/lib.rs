//! Shared fixtures for the benchmark targets.

use aircache_core::{Instance, SimConfig};

/// Instance at the convergence-study scale (4 UAVs, 12 locations, 10 users).
pub fn small_instance(seed: u64) -> Instance {
    let mut cfg = SimConfig::default();
    cfg.network.user_count = 10;
    Instance::generate(&cfg, seed).expect("valid config")
}

/// Instance at the full experiment scale (100 users).
pub fn full_instance(seed: u64) -> Instance {
    Instance::generate(&SimConfig::default(), seed).expect("valid config")
}
