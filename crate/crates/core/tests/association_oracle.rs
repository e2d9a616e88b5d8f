//! Association verification against brute force: near-optimality of the dual
//! solver, weak duality of the relaxation, and the aspiration-level bound.

use aircache_core::association::{self, StepParams};
use aircache_core::{Instance, SimConfig, SolutionState};
use std::collections::BTreeSet;

fn fixture(seed: u64, uavs: usize, users: usize) -> (Instance, SolutionState) {
    let mut cfg = SimConfig::default();
    cfg.network.uav_count = uavs;
    cfg.network.candidate_count = uavs * 2;
    cfg.network.user_count = users;
    cfg.network.content_count = 10;
    cfg.network.cache_bits = 30e6;
    let inst = Instance::generate(&cfg, seed).unwrap();
    let caches: Vec<BTreeSet<usize>> = (0..uavs)
        .map(|m| BTreeSet::from_iter([m % 10, (m + 3) % 10]))
        .collect();
    let assoc: Vec<usize> = (0..users).map(|k| k % uavs).collect();
    let deployment: Vec<usize> = (0..uavs).map(|m| m * 2).collect();
    let state = inst.solution(deployment, caches, assoc).unwrap();
    (inst, state)
}

#[test]
fn single_uav_solves_immediately() {
    let (inst, state) = fixture(3, 1, 5);
    let out = association::solve(&inst, &state, &StepParams::default()).unwrap();
    assert!(out.association.iter().all(|&m| m == 0));
    assert!(out.converged);
    // the first primal iterate already is the unique feasible association
    assert_eq!(out.trace[0].primal, out.trace.last().unwrap().primal);
}

#[test]
fn dual_solver_is_near_optimal_on_m2_k6() {
    for seed in 0..10 {
        let (inst, state) = fixture(seed, 2, 6);
        let t = association::utility_matrix(&inst, &state).unwrap();
        let best = association::brute_force_association(&inst, &state, 2e7).unwrap();
        let best_obj = association::primal_objective(&t, &best);
        let out = association::solve(&inst, &state, &StepParams::default()).unwrap();
        let got = association::primal_objective(&t, &out.association);
        assert!(
            best_obj - got <= 0.02 * best_obj.abs(),
            "seed {seed}: {got} vs optimum {best_obj}"
        );
    }
}

/// Every dual value dominates every feasible primal value.
#[test]
fn weak_duality_holds_along_the_trace() {
    for seed in 0..5 {
        let (inst, state) = fixture(seed, 2, 6);
        let t = association::utility_matrix(&inst, &state).unwrap();
        // enumerate all feasible associations
        let mut primal_best = f64::NEG_INFINITY;
        for code in 0..(1u32 << 6) {
            let assoc: Vec<usize> = (0..6).map(|k| ((code >> k) & 1) as usize).collect();
            primal_best = primal_best.max(association::primal_objective(&t, &assoc));
        }
        let out = association::solve(&inst, &state, &StepParams::default()).unwrap();
        for row in &out.trace {
            assert!(
                row.dual >= primal_best - 1e-9,
                "seed {seed}: dual {} below primal optimum {primal_best}",
                row.dual
            );
        }
    }
}

/// The running aspiration level dips under the optimum plus the offset
/// floor at some iteration.
#[test]
fn aspiration_bound_reaches_the_optimum() {
    let params = StepParams::default();
    for seed in 0..10 {
        let (inst, state) = fixture(seed, 3, 7);
        let t = association::utility_matrix(&inst, &state).unwrap();
        let best = association::brute_force_association(&inst, &state, 2e7).unwrap();
        let best_obj = association::primal_objective(&t, &best);
        let out = association::solve(&inst, &state, &params).unwrap();
        let inf_level = out
            .trace
            .iter()
            .map(|r| r.aspiration)
            .fold(f64::INFINITY, f64::min);
        assert!(
            inf_level <= best_obj + params.eps_floor,
            "seed {seed}: inf level {inf_level} vs optimum {best_obj}"
        );
    }
}

/// The solver never returns anything below the association it was seeded
/// with, and the returned association is feasible.
#[test]
fn solve_never_degrades_the_input() {
    for seed in 0..8 {
        let (inst, state) = fixture(seed, 3, 9);
        let t = association::utility_matrix(&inst, &state).unwrap();
        let incoming = association::primal_objective(&t, state.association());
        let out = association::solve(&inst, &state, &StepParams::default()).unwrap();
        let got = association::primal_objective(&t, &out.association);
        assert!(got >= incoming - 1e-12);
        assert_eq!(out.association.len(), inst.user_count());
        assert!(out.association.iter().all(|&m| m < inst.uav_count()));
    }
}

/// Brute force on M=3, K=8 must agree with an independent re-evaluation of
/// the returned association.
#[test]
fn brute_force_result_re_evaluates_cleanly() {
    let (inst, state) = fixture(11, 3, 8);
    let t = association::utility_matrix(&inst, &state).unwrap();
    let best = association::brute_force_association(&inst, &state, 2e7).unwrap();
    let reported = association::primal_objective(&t, &best);
    // independent: loads by hand, sum of ln(T/w)
    let mut loads = [0u32; 3];
    for &m in &best {
        loads[m] += 1;
    }
    let mut expect = 0.0;
    for (k, &m) in best.iter().enumerate() {
        expect += (t.get(m, k) / loads[m] as f64).ln();
    }
    assert!((reported - expect).abs() < 1e-9);
    // and nothing beats it in a fresh enumeration
    let mut assoc = vec![0usize; 8];
    loop {
        assert!(association::primal_objective(&t, &assoc) <= reported + 1e-9);
        let mut d = 0;
        loop {
            if d == 8 {
                return;
            }
            assoc[d] += 1;
            if assoc[d] < 3 {
                break;
            }
            assoc[d] = 0;
            d += 1;
        }
    }
}

/// The dual trace is usable for diagnostics: the running best dual is
/// non-increasing and finite everywhere.
#[test]
fn trace_is_finite_with_monotone_best() {
    let (inst, state) = fixture(4, 3, 9);
    let out = association::solve(&inst, &state, &StepParams::default()).unwrap();
    let mut best = f64::INFINITY;
    for row in &out.trace {
        assert!(row.dual.is_finite());
        assert!(row.eps > 0.0);
        best = best.min(row.dual);
        assert!(row.aspiration <= best - 0.0 + 1e-12);
    }
}
