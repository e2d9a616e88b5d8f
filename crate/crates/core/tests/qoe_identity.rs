//! Cross-checks between independent evaluation routes: the per-stage delay
//! composition, its load-substituted closed form, the affine objective
//! rearrangement and the unit-load utility matrix must all agree.

use aircache_core::association;
use aircache_core::channel;
use aircache_core::qoe;
use aircache_core::{Instance, SimConfig};
use approx::assert_relative_eq;
use std::collections::BTreeSet;

fn fixture(seed: u64) -> (Instance, aircache_core::SolutionState) {
    let mut cfg = SimConfig::default();
    cfg.network.uav_count = 3;
    cfg.network.candidate_count = 6;
    cfg.network.user_count = 10;
    cfg.network.content_count = 8;
    cfg.network.cache_bits = 30e6;
    let inst = Instance::generate(&cfg, seed).unwrap();
    let caches: Vec<BTreeSet<usize>> = (0..3)
        .map(|m| BTreeSet::from_iter([m, m + 3]))
        .collect();
    let assoc: Vec<usize> = (0..10).map(|k| (k * 7 + seed as usize) % 3).collect();
    let state = inst.solution(vec![1, 3, 5], caches, assoc).unwrap();
    (inst, state)
}

/// The staged delay (content over access rate, plus content over backhaul
/// rate on a miss) must equal the closed form with the load substituted
/// into both denominators.
#[test]
fn delay_matches_load_substituted_form() {
    for seed in 0..6 {
        let (inst, state) = fixture(seed);
        let s = inst.library.size_bits;
        for k in 0..inst.user_count() {
            let d = qoe::delay(&inst, &state, k).unwrap();
            let m = state.serving_uav(k);
            let n = state.candidate_of(m);
            let w = state.load()[m] as f64;
            let sinr_a = channel::sinr_user(&inst.links, state.deployment(), m, k).unwrap();
            let sinr_b = channel::sinr_backhaul(&inst.links, n);
            let miss = if state.is_cached(m, inst.requests.requested(k)) {
                0.0
            } else {
                1.0
            };
            let closed = w * s / (inst.links.access_bandwidth_hz * (1.0 + sinr_a).log2())
                + miss * w * s / (inst.links.backhaul_bandwidth_hz * (1.0 + sinr_b).log2());
            assert_relative_eq!(d.total_s, closed, max_relative = 1e-9);
            assert_relative_eq!(d.total_s, d.access_s + d.backhaul_s, max_relative = 1e-12);
        }
    }
}

#[test]
fn cached_content_needs_no_backhaul() {
    let (inst, state) = fixture(1);
    let mut hit = false;
    for k in 0..inst.user_count() {
        let m = state.serving_uav(k);
        let d = qoe::delay(&inst, &state, k).unwrap();
        if state.is_cached(m, inst.requests.requested(k)) {
            assert_eq!(d.backhaul_s, 0.0);
            hit = true;
        } else {
            assert!(d.backhaul_s > 0.0);
        }
    }
    assert!(hit, "fixture should produce at least one cache hit");
}

/// Total score must equal the sum of per-user scores and the affine
/// rearrangement `K*C2 + C1 * sum ln(1/D)`.
#[test]
fn objective_decomposes_both_ways() {
    for seed in 0..6 {
        let (inst, state) = fixture(seed);
        let objective = qoe::objective(&inst, &state).unwrap();

        let mut per_user = 0.0;
        let mut q_sum = 0.0;
        let unclamped = aircache_core::qoe::MosParams {
            clamp: false,
            ..inst.mos.clone()
        };
        for k in 0..inst.user_count() {
            let d = qoe::delay(&inst, &state, k).unwrap();
            per_user += qoe::mos(&d, &unclamped).unwrap();
            q_sum += (1.0 / d.total_s).ln();
        }
        assert_relative_eq!(objective, per_user, max_relative = 1e-9);
        let affine = inst.user_count() as f64 * inst.mos.c2 + inst.mos.c1 * q_sum;
        assert_relative_eq!(objective, affine, max_relative = 1e-9);
    }
}

/// `T[m][k] * D[m][k] / w_m = 1` for the serving UAV of every user: the
/// unit-load utility matrix must invert the staged delay exactly.
#[test]
fn utility_matrix_inverts_the_delay() {
    for seed in 0..6 {
        let (inst, base) = fixture(seed);
        // rotate users over all UAVs so every (m, k) pair with every cache
        // combination gets exercised across seeds
        for shift in 0..3usize {
            let assoc: Vec<usize> = (0..inst.user_count()).map(|k| (k + shift) % 3).collect();
            let state = base.with_association(assoc);
            let t = association::utility_matrix(&inst, &state).unwrap();
            for k in 0..inst.user_count() {
                let m = state.serving_uav(k);
                let d = qoe::delay(&inst, &state, k).unwrap();
                let w = state.load()[m] as f64;
                assert_relative_eq!(t.get(m, k) * d.total_s / w, 1.0, max_relative = 1e-9);
            }
        }
    }
}

/// With the content cached, the utility reduces to the pure access form;
/// widening the backhaul toward infinity approaches the same value.
#[test]
fn utility_matrix_limits() {
    let (inst, state) = fixture(2);
    let t = association::utility_matrix(&inst, &state).unwrap();
    let s = inst.library.size_bits;
    for k in 0..inst.user_count() {
        for m in 0..inst.uav_count() {
            if state.is_cached(m, inst.requests.requested(k)) {
                let sinr = channel::sinr_user(&inst.links, state.deployment(), m, k).unwrap();
                let expect = inst.links.access_bandwidth_hz * (1.0 + sinr).log2() / s;
                assert_relative_eq!(t.get(m, k), expect, max_relative = 1e-9);
            }
        }
    }

    let mut cfg = SimConfig::default();
    cfg.network.uav_count = 3;
    cfg.network.candidate_count = 6;
    cfg.network.user_count = 10;
    cfg.network.content_count = 8;
    // room to cache the whole library, so the hit matrix is total
    cfg.network.cache_bits = 80e6;
    // widen the backhaul by 1e8 while lowering the noise density in
    // lockstep, which holds every SINR fixed and isolates the bandwidth
    // limit itself
    cfg.channel.backhaul_bandwidth_hz = 10e6 * 1e8;
    cfg.channel.noise_dbm_per_hz = -174.0 - 80.0;
    let wide = Instance::generate(&cfg, 2).unwrap();
    let assoc: Vec<usize> = (0..10).map(|k| (k * 7 + 2) % 3).collect();

    // miss-vs-hit utility gap of every (UAV, user) pair on an instance
    let gaps = |inst: &Instance| -> Vec<f64> {
        let empty = inst
            .solution(vec![1, 3, 5], vec![BTreeSet::new(); 3], assoc.clone())
            .unwrap();
        let t_miss = association::utility_matrix(inst, &empty).unwrap();
        let full: Vec<BTreeSet<usize>> = vec![(0..8).collect(); 3];
        let cached = empty.with_caches(full);
        let t_hit = association::utility_matrix(inst, &cached).unwrap();
        let mut out = Vec::new();
        for k in 0..inst.user_count() {
            for m in 0..inst.uav_count() {
                let hit = t_hit.get(m, k);
                out.push((hit - t_miss.get(m, k)) / hit);
            }
        }
        out
    };

    let mut narrow_cfg = cfg.clone();
    narrow_cfg.channel.backhaul_bandwidth_hz = 10e6;
    narrow_cfg.channel.noise_dbm_per_hz = -174.0;
    let narrow = Instance::generate(&narrow_cfg, 2).unwrap();
    for (wide_gap, narrow_gap) in gaps(&wide).into_iter().zip(gaps(&narrow)) {
        assert!(wide_gap >= 0.0 && narrow_gap >= 0.0);
        assert!(wide_gap < 1e-6, "residual miss penalty {wide_gap}");
        assert!(wide_gap < narrow_gap / 100.0);
    }
}
