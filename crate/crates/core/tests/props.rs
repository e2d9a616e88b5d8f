//! Property tests over the generators, the channel and the state validator.

use aircache_core::channel::{
    self, db_to_linear, linear_to_db, los_probability, pathloss_mean_db,
};
use aircache_core::content::zipf_popularity;
use aircache_core::scenario::generate_scenario;
use aircache_core::solution::{Dims, SolutionState};
use aircache_core::{Instance, SimConfig};
use proptest::prelude::*;

proptest! {
    #[test]
    fn zipf_is_a_sorted_distribution(f in 1usize..300, gamma in 0.0f64..3.0) {
        let p = zipf_popularity(f, gamma).unwrap();
        let total: f64 = p.iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(p.windows(2).all(|w| w[0] >= w[1]));
        // closed form per rank
        let norm: f64 = (1..=f).map(|i| (i as f64).powf(-gamma)).sum();
        for (i, &pi) in p.iter().enumerate() {
            let expect = ((i + 1) as f64).powf(-gamma) / norm;
            prop_assert!((pi - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn db_conversions_round_trip(db in -250.0f64..250.0) {
        let x = db_to_linear(db);
        prop_assert!((linear_to_db(x) - db).abs() < 1e-9 * db.abs().max(1.0));
    }

    #[test]
    fn los_probability_is_valid_and_monotone(
        h in 22.5f64..300.0,
        base in 0.0f64..800.0,
        extra in 0.0f64..500.0,
    ) {
        let d_near = (base * base + h * h).sqrt();
        let d_far = ((base + extra) * (base + extra) + h * h).sqrt();
        let p_near = los_probability(d_near, h).unwrap();
        let p_far = los_probability(d_far, h).unwrap();
        prop_assert!((0.0..=1.0).contains(&p_near));
        prop_assert!(p_far <= p_near + 1e-12);
    }

    #[test]
    fn pathloss_branches_ordered_and_monotone(
        h in 22.5f64..300.0,
        base in 1.0f64..800.0,
        extra in 0.0f64..500.0,
    ) {
        let d_near = (base * base + h * h).sqrt();
        let d_far = ((base + extra) * (base + extra) + h * h).sqrt();
        for los in [true, false] {
            let pl_near = pathloss_mean_db(d_near, h, 2.0, los);
            let pl_far = pathloss_mean_db(d_far, h, 2.0, los);
            prop_assert!(pl_near > 0.0);
            prop_assert!(pl_far >= pl_near - 1e-12);
        }
        prop_assert!(
            pathloss_mean_db(d_near, h, 2.0, false) >= pathloss_mean_db(d_near, h, 2.0, true)
        );
    }

    #[test]
    fn scenario_generation_is_pure(seed in any::<u64>()) {
        let mut cfg = SimConfig::default();
        cfg.network.user_count = 20;
        let a = generate_scenario(&cfg, seed).unwrap();
        let b = generate_scenario(&cfg, seed).unwrap();
        prop_assert_eq!(&a, &b);
        let (w, d) = a.region;
        prop_assert!(a.users.iter().all(|u| u[0] >= 0.0 && u[0] <= w && u[1] >= 0.0 && u[1] <= d));
    }
}

/// Random decision matrices are accepted exactly when they satisfy the
/// structural constraints, checked by an independent predicate.
#[test]
fn validator_accepts_exactly_the_feasible_matrices() {
    let dims = Dims {
        uavs: 2,
        candidates: 3,
        users: 3,
        contents: 3,
        capacity_items: 1,
    };
    let mut accepted = 0usize;
    let mut rejected = 0usize;
    // enumerate a dense sample of all 0/1 matrix triples via bit patterns
    for bits in 0u32..(1 << 15) {
        let x: Vec<Vec<bool>> = (0..2)
            .map(|m| (0..3).map(|n| bits >> (m * 3 + n) & 1 == 1).collect())
            .collect();
        let u: Vec<Vec<bool>> = (0..2)
            .map(|m| (0..3).map(|f| bits >> (6 + m * 3 + f) & 1 == 1).collect())
            .collect();
        // association from the remaining bits: 3 users x 2 UAVs, one bit each
        // plus one "none" pattern when both bits of a user are set/unset
        let a: Vec<Vec<bool>> = (0..2)
            .map(|m| (0..3).map(|k| bits >> (12 + k) & 1 == m as u32).collect())
            .collect();

        let feasible = {
            let rows_ok = x.iter().all(|row| row.iter().filter(|&&b| b).count() == 1);
            let cols_ok = (0..3).all(|n| x.iter().filter(|row| row[n]).count() <= 1);
            let cache_ok = u.iter().all(|row| row.iter().filter(|&&b| b).count() <= 1);
            let assoc_ok =
                (0..3).all(|k| (0..2).filter(|&m| a[m][k]).count() == 1);
            rows_ok && cols_ok && cache_ok && assoc_ok
        };
        match SolutionState::from_matrices(&x, &u, &a, dims) {
            Ok(_) => {
                assert!(feasible, "accepted an infeasible triple: {bits:b}");
                accepted += 1;
            }
            Err(_) => {
                assert!(!feasible, "rejected a feasible triple: {bits:b}");
                rejected += 1;
            }
        }
    }
    assert!(accepted > 0 && rejected > 0);
}

/// Frozen links reproduce bit-for-bit from the same seed and differ across
/// seeds.
#[test]
fn link_realizations_are_deterministic() {
    let mut cfg = SimConfig::default();
    cfg.network.user_count = 15;
    cfg.channel.shadowing = channel::ShadowingMode::Random;
    let a = Instance::generate(&cfg, 42).unwrap();
    let b = Instance::generate(&cfg, 42).unwrap();
    let c = Instance::generate(&cfg, 43).unwrap();
    for n in 0..a.candidate_count() {
        assert_eq!(a.links.backhaul[n], b.links.backhaul[n]);
        for k in 0..a.user_count() {
            assert_eq!(a.links.access[n][k], b.links.access[n][k]);
        }
    }
    let same = (0..a.candidate_count()).all(|n| {
        (0..a.user_count()).all(|k| a.links.access[n][k] == c.links.access[n][k])
    });
    assert!(!same);
}
