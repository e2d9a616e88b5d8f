//! World geometry: users on the ground, candidate hover locations on a grid,
//! and the macro site providing backhaul.

use rand::Rng;

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

pub type Point3 = [f64; 3];

pub fn dist3(a: Point3, b: Point3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

/// Immutable world state for one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    /// User positions, all at ground level (z = 0).
    pub users: Vec<Point3>,
    /// Candidate hover locations, one per grid sub-area.
    pub candidates: Vec<Point3>,
    pub mbs_position: Point3,
    /// Served rectangle as (width, depth), origin at (0, 0).
    pub region: (f64, f64),
    pub rng_seed: u64,
}

impl Scenario {
    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }
}

/// Split `n` into a (columns, rows) grid, as square as possible, with the
/// larger factor along the longer region side.
fn grid_shape(n: usize, width: f64, depth: f64) -> (usize, usize) {
    let mut pair = (n, 1);
    let mut a = 1;
    while a * a <= n {
        if n % a == 0 {
            pair = (n / a, a);
        }
        a += 1;
    }
    let (hi, lo) = pair;
    if width >= depth {
        (hi, lo)
    } else {
        (lo, hi)
    }
}

/// Generate the world for `(config, seed)`.
///
/// Users are i.i.d. uniform over the region. The region is partitioned into
/// a near-square grid of `candidate_count` sub-areas; each sub-area holds one
/// candidate, horizontally uniform within the sub-area, with altitude uniform
/// in the configured interval. The macro site sits `mbs_distance_m` from the
/// region center along +x.
pub fn generate_scenario(cfg: &SimConfig, seed: u64) -> Result<Scenario> {
    cfg.validate()?;
    let n = cfg.network.candidate_count;
    let k = cfg.network.user_count;
    let (width, depth) = (cfg.region.width_m, cfg.region.depth_m);

    let mut user_rng = stream_rng(seed, Stream::UserPositions);
    let users: Vec<Point3> = (0..k)
        .map(|_| {
            let x = user_rng.random_range(0.0..width);
            let y = user_rng.random_range(0.0..depth);
            [x, y, 0.0]
        })
        .collect();

    let (cols, rows) = grid_shape(n, width, depth);
    let (cell_w, cell_h) = (width / cols as f64, depth / rows as f64);
    let (h_lo, h_hi) = (cfg.region.uav_height_min_m, cfg.region.uav_height_max_m);
    let mut cand_rng = stream_rng(seed, Stream::CandidatePositions);
    let mut candidates = Vec::with_capacity(n);
    for row in 0..rows {
        for col in 0..cols {
            let x = cand_rng.random_range(col as f64 * cell_w..(col + 1) as f64 * cell_w);
            let y = cand_rng.random_range(row as f64 * cell_h..(row + 1) as f64 * cell_h);
            let z = if h_lo == h_hi {
                h_lo
            } else {
                cand_rng.random_range(h_lo..h_hi)
            };
            candidates.push([x, y, z]);
        }
    }
    debug_assert_eq!(candidates.len(), n);

    let mbs_position = [
        width / 2.0 + cfg.region.mbs_distance_m,
        depth / 2.0,
        cfg.region.mbs_height_m,
    ];

    Ok(Scenario {
        users,
        candidates,
        mbs_position,
        region: (width, depth),
        rng_seed: seed,
    })
}

/// Reject scenarios that drifted outside the model contracts. Generation
/// upholds these by construction; external callers feeding hand-built
/// scenarios get the same checks.
pub fn validate_scenario(s: &Scenario, uav_count: usize) -> Result<()> {
    if s.candidates.len() < uav_count {
        return Err(Error::Config(format!(
            "{} candidates cannot host {} UAVs",
            s.candidates.len(),
            uav_count
        )));
    }
    if s.users.iter().any(|u| u[2] != 0.0) {
        return Err(Error::Config("users must sit at ground level".into()));
    }
    use crate::channel::{MAX_UAV_ALTITUDE_M, MIN_UAV_ALTITUDE_M};
    if s.candidates
        .iter()
        .any(|c| c[2] < MIN_UAV_ALTITUDE_M || c[2] > MAX_UAV_ALTITUDE_M)
    {
        return Err(Error::Config("candidate altitude outside model validity".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_cfg() -> SimConfig {
        let mut cfg = SimConfig::default();
        cfg.network.user_count = 100;
        cfg.network.candidate_count = 12;
        cfg.network.uav_count = 4;
        cfg
    }

    #[test]
    fn counts_and_altitudes_match_config() {
        let s = generate_scenario(&base_cfg(), 1).unwrap();
        assert_eq!(s.users.len(), 100);
        assert_eq!(s.candidates.len(), 12);
        assert!(s.candidates.iter().all(|c| (45.0..=60.0).contains(&c[2])));
        validate_scenario(&s, 4).unwrap();
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = base_cfg();
        let a = generate_scenario(&cfg, 5).unwrap();
        let b = generate_scenario(&cfg, 5).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(&cfg, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn degenerate_single_everything() {
        let mut cfg = base_cfg();
        cfg.network.user_count = 1;
        cfg.network.candidate_count = 1;
        cfg.network.uav_count = 1;
        let s = generate_scenario(&cfg, 0).unwrap();
        assert_eq!(s.users.len(), 1);
        assert_eq!(s.candidates.len(), 1);
    }

    #[test]
    fn grid_prefers_wide_side() {
        assert_eq!(grid_shape(12, 400.0, 300.0), (4, 3));
        assert_eq!(grid_shape(12, 300.0, 400.0), (3, 4));
        assert_eq!(grid_shape(6, 400.0, 300.0), (3, 2));
        assert_eq!(grid_shape(7, 400.0, 300.0), (7, 1));
        assert_eq!(grid_shape(1, 400.0, 300.0), (1, 1));
    }

    #[test]
    fn candidates_stay_inside_their_sub_area() {
        let cfg = base_cfg();
        let s = generate_scenario(&cfg, 11).unwrap();
        let (cell_w, cell_h) = (400.0 / 4.0, 300.0 / 3.0);
        for (i, c) in s.candidates.iter().enumerate() {
            let (col, row) = (i % 4, i / 4);
            assert!(c[0] >= col as f64 * cell_w && c[0] <= (col + 1) as f64 * cell_w);
            assert!(c[1] >= row as f64 * cell_h && c[1] <= (row + 1) as f64 * cell_h);
        }
    }

    #[test]
    fn mbs_is_offset_from_center() {
        let s = generate_scenario(&base_cfg(), 2).unwrap();
        let center = [200.0, 150.0, s.mbs_position[2]];
        let d = dist3(s.mbs_position, center);
        assert!((d - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn invalid_config_rejected() {
        let mut cfg = base_cfg();
        cfg.network.uav_count = 20;
        assert!(generate_scenario(&cfg, 0).is_err());
    }
}
