//! Experiment plans: a base configuration, an optional sweep axis, the
//! algorithms to compare and the replication count.

use std::fmt;
use std::str::FromStr;

use aircache_core::rng::mix64;
use aircache_core::{Error, Result, SimConfig};

/// Which configuration knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    CacheBits,
    UserCount,
    UavHeight,
    ZipfGamma,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::CacheBits => "cache_bits",
            SweepAxis::UserCount => "user_count",
            SweepAxis::UavHeight => "uav_height",
            SweepAxis::ZipfGamma => "zipf_gamma",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cache_bits" => Ok(SweepAxis::CacheBits),
            "user_count" => Ok(SweepAxis::UserCount),
            "uav_height" => Ok(SweepAxis::UavHeight),
            "zipf_gamma" => Ok(SweepAxis::ZipfGamma),
            other => Err(Error::Config(format!(
                "unknown sweep axis '{other}' (expected cache_bits, user_count, uav_height or zipf_gamma)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl Sweep {
    /// Parse `axis=v1,v2,...` as given on the command line.
    pub fn parse(spec: &str) -> Result<Self> {
        let (axis, list) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("sweep '{spec}' must look like axis=v1,v2")))?;
        let axis: SweepAxis = axis.trim().parse()?;
        let values = list
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("sweep value '{v}': {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.is_empty() {
            return Err(Error::Config("sweep needs at least one value".into()));
        }
        Ok(Sweep { axis, values })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Algorithm {
    Proposed,
    Classic,
    Random,
    Oracle,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Proposed,
        Algorithm::Classic,
        Algorithm::Random,
        Algorithm::Oracle,
    ];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algorithm::Proposed => "proposed",
            Algorithm::Classic => "classic",
            Algorithm::Random => "random",
            Algorithm::Oracle => "oracle",
        };
        f.write_str(name)
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Algorithm::Proposed),
            "classic" => Ok(Algorithm::Classic),
            "random" => Ok(Algorithm::Random),
            "oracle" => Ok(Algorithm::Oracle),
            other => Err(Error::Config(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// One sweep point: the axis label and value applied to the base config.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub axis: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub base: SimConfig,
    pub sweep: Option<Sweep>,
    pub algorithms: Vec<Algorithm>,
    pub replications: u32,
    pub base_seed: u64,
}

impl ExperimentPlan {
    pub fn new(base: SimConfig) -> Self {
        let base_seed = base.network.seed;
        ExperimentPlan {
            base,
            sweep: None,
            algorithms: vec![Algorithm::Proposed, Algorithm::Classic, Algorithm::Random],
            replications: 1,
            base_seed,
        }
    }

    /// The sweep points, or a single `none` point when no sweep is set.
    pub fn points(&self) -> Vec<SweepPoint> {
        match &self.sweep {
            Some(sweep) => sweep
                .values
                .iter()
                .map(|&value| SweepPoint {
                    axis: sweep.axis.name(),
                    value,
                })
                .collect(),
            None => vec![SweepPoint {
                axis: "none",
                value: 0.0,
            }],
        }
    }

    /// Configuration at one sweep point.
    pub fn config_at(&self, point_index: usize) -> Result<SimConfig> {
        let mut cfg = self.base.clone();
        if let Some(sweep) = &self.sweep {
            let value = *sweep.values.get(point_index).ok_or_else(|| {
                Error::Config(format!("sweep point {point_index} out of range"))
            })?;
            match sweep.axis {
                SweepAxis::CacheBits => cfg.network.cache_bits = value,
                SweepAxis::UserCount => {
                    if value < 1.0 || value.fract() != 0.0 {
                        return Err(Error::Config(format!(
                            "user_count sweep value {value} must be a positive integer"
                        )));
                    }
                    cfg.network.user_count = value as usize;
                }
                SweepAxis::UavHeight => {
                    cfg.region.uav_height_min_m = value;
                    cfg.region.uav_height_max_m = value;
                }
                SweepAxis::ZipfGamma => cfg.network.zipf_gamma = value,
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Seed of replication `r`. Identical across sweep points and algorithms
    /// so comparisons are paired; distinct across replications.
    pub fn replication_seed(&self, replication: u32) -> u64 {
        self.base_seed ^ mix64(u64::from(replication).wrapping_add(1))
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("need at least one replication".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("need at least one algorithm".into()));
        }
        let mut seen = self.algorithms.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.algorithms.len() {
            return Err(Error::Config("duplicate algorithm in the plan".into()));
        }
        for idx in 0..self.points().len() {
            let cfg = self.config_at(idx)?;
            if self.algorithms.contains(&Algorithm::Oracle) {
                let n = cfg.network.candidate_count;
                let m = cfg.network.uav_count;
                let k = cfg.network.user_count;
                let placements: f64 = (0..m).map(|i| (n - i) as f64).product();
                let configs = placements * (m as f64).powi(k as i32);
                if !(configs <= cfg.solver.oracle_enumeration_cap) {
                    return Err(Error::Capacity(format!(
                        "oracle requested but point {idx} needs {configs:.3e} configurations \
                         (cap {:.1e})",
                        cfg.solver.oracle_enumeration_cap
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing_round_trips() {
        let sweep = Sweep::parse("cache_bits=60e6,80e6,100e6").unwrap();
        assert_eq!(sweep.axis, SweepAxis::CacheBits);
        assert_eq!(sweep.values, vec![60e6, 80e6, 100e6]);
        assert!(Sweep::parse("altitude=1,2").is_err());
        assert!(Sweep::parse("cache_bits=").is_err());
        assert!(Sweep::parse("user_count=40,abc").is_err());
    }

    #[test]
    fn height_sweep_pins_both_bounds() {
        let mut plan = ExperimentPlan::new(SimConfig::default());
        plan.sweep = Some(Sweep {
            axis: SweepAxis::UavHeight,
            values: vec![60.0, 120.0],
        });
        let cfg = plan.config_at(1).unwrap();
        assert_eq!(cfg.region.uav_height_min_m, 120.0);
        assert_eq!(cfg.region.uav_height_max_m, 120.0);
    }

    #[test]
    fn replication_seeds_are_paired_and_distinct() {
        let mut plan = ExperimentPlan::new(SimConfig::default());
        plan.base_seed = 9;
        let s0 = plan.replication_seed(0);
        let s1 = plan.replication_seed(1);
        assert_ne!(s0, s1);
        // independent of the sweep
        plan.sweep = Some(Sweep {
            axis: SweepAxis::CacheBits,
            values: vec![60e6],
        });
        assert_eq!(plan.replication_seed(0), s0);
    }

    #[test]
    fn oracle_capacity_checked_at_validation() {
        let mut plan = ExperimentPlan::new(SimConfig::default());
        plan.algorithms = vec![Algorithm::Oracle];
        assert!(matches!(
            plan.validate(),
            Err(aircache_core::Error::Capacity(_))
        ));
        let mut small = SimConfig::default();
        small.network.uav_count = 2;
        small.network.candidate_count = 4;
        small.network.user_count = 6;
        let mut plan = ExperimentPlan::new(small);
        plan.algorithms = vec![Algorithm::Oracle];
        plan.validate().unwrap();
    }

    #[test]
    fn fractional_user_count_rejected() {
        let mut plan = ExperimentPlan::new(SimConfig::default());
        plan.sweep = Some(Sweep {
            axis: SweepAxis::UserCount,
            values: vec![40.5],
        });
        assert!(plan.config_at(0).is_err());
    }
}
