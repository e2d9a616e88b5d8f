//! Run configuration: the TOML schema and its validation.
//!
//! All units are SI: meters, bits, Hz, seconds; powers in dBm, noise density
//! in dBm/Hz. Every section and key has a default matching the reference
//! parameter set, so a config file only needs the keys it overrides.

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, MAX_UAV_ALTITUDE_M, MIN_UAV_ALTITUDE_M};
use crate::error::{Error, Result};
use crate::qoe::MosParams;

/// Top-level configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub network: NetworkConfig,
    pub region: RegionConfig,
    pub channel: ChannelParams,
    pub mos: MosParams,
    pub solver: SolverConfig,
}

/// Population counts and the content model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    /// Number of UAVs (M).
    pub uav_count: usize,
    /// Number of candidate deployment locations (N), one per grid sub-area.
    pub candidate_count: usize,
    /// Number of users (K).
    pub user_count: usize,
    /// Number of contents in the library (F).
    pub content_count: usize,
    /// Per-UAV cache capacity in bits (H).
    pub cache_bits: f64,
    /// Size of one content in bits (s).
    pub content_bits: f64,
    /// Zipf skewness of the content popularity.
    pub zipf_gamma: f64,
    /// Default replication seed; the harness may override it per run.
    pub seed: u64,
}

/// Geometry of the served cell and the backhaul macro site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegionConfig {
    pub width_m: f64,
    pub depth_m: f64,
    /// Candidate altitude interval; candidates draw uniformly within it.
    pub uav_height_min_m: f64,
    pub uav_height_max_m: f64,
    /// Macro-site distance from the region center along +x.
    pub mbs_distance_m: f64,
    pub mbs_height_m: f64,
}

/// Knobs of the three block solvers and the outer loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Outer-loop stop threshold on |score(l) - score(l-1)|.
    pub convergence_gap: f64,
    pub max_outer_iterations: usize,
    /// Executed-swap cap factor; the cap is `factor * M * N`.
    pub swap_cap_factor: usize,
    /// Dual-association iteration cap.
    pub dual_max_iterations: usize,
    /// Relative dual-value change treated as converged.
    pub dual_rel_tol: f64,
    /// Subgradient step scale, kept in (0, 2).
    pub dual_lambda: f64,
    /// Aspiration decay on a worsening dual step, in (0, 1).
    pub dual_beta: f64,
    /// Aspiration growth on an improving dual step, > 1.
    pub dual_rho: f64,
    /// Initial aspiration offset.
    pub dual_eps_init: f64,
    /// Aspiration offset floor, > 0.
    pub dual_eps_floor: f64,
    /// Cap on brute-force association enumeration (M^K).
    pub association_enumeration_cap: f64,
    /// Cap on exhaustive joint enumeration (placements x associations).
    pub oracle_enumeration_cap: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            uav_count: 4,
            candidate_count: 12,
            user_count: 100,
            content_count: 200,
            cache_bits: 100e6,
            content_bits: 10e6,
            zipf_gamma: 1.0,
            seed: 42,
        }
    }
}

impl Default for RegionConfig {
    fn default() -> Self {
        RegionConfig {
            width_m: 400.0,
            depth_m: 300.0,
            uav_height_min_m: 45.0,
            uav_height_max_m: 60.0,
            mbs_distance_m: 1000.0,
            mbs_height_m: 25.0,
        }
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            convergence_gap: 1e-3,
            max_outer_iterations: 50,
            swap_cap_factor: 10,
            dual_max_iterations: 500,
            dual_rel_tol: 1e-6,
            dual_lambda: 1.0,
            dual_beta: 0.5,
            dual_rho: 1.5,
            dual_eps_init: 0.1,
            dual_eps_floor: 1e-3,
            association_enumeration_cap: 2e7,
            oracle_enumeration_cap: 1e8,
        }
    }
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            network: NetworkConfig::default(),
            region: RegionConfig::default(),
            channel: ChannelParams::default(),
            mos: MosParams::default(),
            solver: SolverConfig::default(),
        }
    }
}

impl SimConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SimConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Canonical serialized form, used for config hashing in run manifests.
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.network;
        if n.uav_count == 0 || n.candidate_count == 0 || n.user_count == 0 || n.content_count == 0
        {
            return Err(Error::Config("counts must be positive".into()));
        }
        if n.uav_count > n.candidate_count {
            return Err(Error::Config(format!(
                "uav_count {} exceeds candidate_count {}",
                n.uav_count, n.candidate_count
            )));
        }
        if !(n.cache_bits >= 0.0) || !(n.content_bits > 0.0) {
            return Err(Error::Config("cache_bits must be >= 0, content_bits > 0".into()));
        }
        if !(n.zipf_gamma >= 0.0) {
            return Err(Error::Config("zipf_gamma must be >= 0".into()));
        }
        let r = &self.region;
        if !(r.width_m > 0.0) || !(r.depth_m > 0.0) {
            return Err(Error::Config("region dimensions must be positive".into()));
        }
        if !(r.uav_height_min_m <= r.uav_height_max_m)
            || r.uav_height_min_m < MIN_UAV_ALTITUDE_M
            || r.uav_height_max_m > MAX_UAV_ALTITUDE_M
        {
            return Err(Error::Config(format!(
                "UAV height interval [{}, {}] must lie within [{}, {}]",
                r.uav_height_min_m, r.uav_height_max_m, MIN_UAV_ALTITUDE_M, MAX_UAV_ALTITUDE_M
            )));
        }
        if !(r.mbs_distance_m > 0.0) || !(r.mbs_height_m >= 0.0) {
            return Err(Error::Config("MBS distance must be positive, height >= 0".into()));
        }
        self.channel.validate()?;
        self.mos.validate()?;
        let s = &self.solver;
        if !(s.convergence_gap > 0.0) {
            return Err(Error::Config("convergence_gap must be > 0".into()));
        }
        if s.max_outer_iterations == 0 || s.dual_max_iterations == 0 || s.swap_cap_factor == 0 {
            return Err(Error::Config("iteration caps must be positive".into()));
        }
        if !(s.dual_lambda > 0.0 && s.dual_lambda < 2.0) {
            return Err(Error::Config("dual_lambda must lie in (0, 2)".into()));
        }
        if !(s.dual_beta > 0.0 && s.dual_beta < 1.0) || !(s.dual_rho > 1.0) {
            return Err(Error::Config("need 0 < dual_beta < 1 and dual_rho > 1".into()));
        }
        if !(s.dual_eps_init > 0.0) || !(s.dual_eps_floor > 0.0) {
            return Err(Error::Config("aspiration offsets must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        SimConfig::default().validate().unwrap();
    }

    #[test]
    fn empty_toml_yields_defaults() {
        let cfg = SimConfig::from_toml_str("").unwrap();
        assert_eq!(cfg, SimConfig::default());
    }

    #[test]
    fn partial_override_keeps_other_defaults() {
        let cfg = SimConfig::from_toml_str(
            "[network]\nuser_count = 10\n\n[region]\nuav_height_min_m = 50.0\n",
        )
        .unwrap();
        assert_eq!(cfg.network.user_count, 10);
        assert_eq!(cfg.network.uav_count, 4);
        assert_eq!(cfg.region.uav_height_min_m, 50.0);
    }

    #[test]
    fn more_uavs_than_candidates_rejected() {
        let mut cfg = SimConfig::default();
        cfg.network.uav_count = 13;
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(SimConfig::from_toml_str("[network]\nuavs = 3\n").is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        let cfg = SimConfig::default();
        let text = cfg.to_canonical_toml();
        assert_eq!(SimConfig::from_toml_str(&text).unwrap(), cfg);
    }
}
