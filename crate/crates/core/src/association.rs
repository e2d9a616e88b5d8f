//! User association by Lagrange dual decomposition, plus the brute-force
//! oracle used to verify it on small instances.
//!
//! With placement and caches fixed, the association objective is
//! `sum_k ln(T[m_k][k] / w_{m_k})` where `T[m][k]` is the load-independent
//! inverse of user k's delay on UAV m at unit load and `w_m` counts the UAV's
//! users. Relaxing the load-coupling constraint with one multiplier per UAV
//! decomposes the inner maximization: each user independently picks
//! `argmax_m (ln T[m][k] - alpha_m)` and the optimal continuous load is
//! `w_m = exp(alpha_m - 1)`. The multipliers follow a subgradient step whose
//! size adapts to an aspiration level tracking the best dual value seen.
//!
//! Dual iterates may oscillate between associations, so the solver returns
//! the feasible association with the best true primal objective seen,
//! seeded with the incoming association (the result never degrades it).

use crate::channel;
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::solution::{loads_of, SolutionState};

/// `T[m][k]`: inverse delay of user k on UAV m at unit load; strictly
/// positive and independent of the loads.
#[derive(Debug, Clone)]
pub struct UtilityMatrix {
    t: Vec<Vec<f64>>,
}

impl UtilityMatrix {
    pub fn get(&self, m: usize, k: usize) -> f64 {
        self.t[m][k]
    }

    pub fn uav_count(&self) -> usize {
        self.t.len()
    }

    pub fn user_count(&self) -> usize {
        self.t.first().map_or(0, Vec::len)
    }

    pub fn from_rows(t: Vec<Vec<f64>>) -> Self {
        UtilityMatrix { t }
    }
}

/// Build the utility matrix for the current placement and caches:
/// `1 / (s / r_unit + miss * s / b_unit)` with unit-load access and backhaul
/// rates, where `miss` is 1 unless user k's content is cached at UAV m.
pub fn utility_matrix(inst: &Instance, state: &SolutionState) -> Result<UtilityMatrix> {
    let s = inst.library.size_bits;
    let locations = state.deployment();
    let mut t = vec![vec![0.0; inst.user_count()]; inst.uav_count()];
    for (m, row) in t.iter_mut().enumerate() {
        let backhaul_unit =
            inst.links.backhaul_bandwidth_hz * (1.0 + channel::sinr_backhaul(&inst.links, locations[m])).log2();
        for (k, cell) in row.iter_mut().enumerate() {
            let sinr = channel::sinr_user(&inst.links, locations, m, k)?;
            let access_unit = inst.links.access_bandwidth_hz * (1.0 + sinr).log2();
            if !(access_unit > 0.0) || !(backhaul_unit > 0.0) {
                return Err(Error::Evaluation(format!(
                    "zero unit rate for user {k} on UAV {m}"
                )));
            }
            let mut inverse = s / access_unit;
            if !state.is_cached(m, inst.requests.requested(k)) {
                inverse += s / backhaul_unit;
            }
            *cell = 1.0 / inverse;
        }
    }
    Ok(UtilityMatrix { t })
}

/// Per-user inner maximization: pick `argmax_m (ln T[m][k] - alpha_m)`,
/// ties to the lowest UAV index.
pub fn assign_step(t: &UtilityMatrix, alpha: &[f64]) -> Vec<usize> {
    let users = t.user_count();
    (0..users)
        .map(|k| {
            let mut best = 0usize;
            let mut best_v = f64::NEG_INFINITY;
            for (m, &a) in alpha.iter().enumerate() {
                let v = t.get(m, k).ln() - a;
                if v > best_v {
                    best_v = v;
                    best = m;
                }
            }
            best
        })
        .collect()
}

/// Lagrangian value at `(association, w, alpha)`:
/// `sum_k ln T - sum_m w ln w - sum_m alpha (load - w)`.
pub fn dual_value(t: &UtilityMatrix, alpha: &[f64], association: &[usize], w: &[f64]) -> f64 {
    let loads = loads_of(association, alpha.len());
    let mut value = 0.0;
    for (k, &m) in association.iter().enumerate() {
        value += t.get(m, k).ln();
    }
    for m in 0..alpha.len() {
        value -= w[m] * w[m].ln();
        value -= alpha[m] * (loads[m] as f64 - w[m]);
    }
    value
}

/// True (integer-load) objective of a feasible association.
pub fn primal_objective(t: &UtilityMatrix, association: &[usize]) -> f64 {
    let loads = loads_of(association, t.uav_count());
    let mut value = 0.0;
    for (k, &m) in association.iter().enumerate() {
        value += t.get(m, k).ln();
    }
    for &w in &loads {
        if w > 0 {
            let w = w as f64;
            value -= w * w.ln();
        }
    }
    value
}

/// Subgradient controller knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct StepParams {
    /// Step scale, kept in (0, 2).
    pub lambda: f64,
    /// Aspiration decay on worsening steps, in (0, 1).
    pub beta: f64,
    /// Aspiration growth on improving steps, > 1.
    pub rho: f64,
    pub eps_init: f64,
    pub eps_floor: f64,
    pub max_iterations: usize,
    pub rel_tol: f64,
}

impl Default for StepParams {
    fn default() -> Self {
        StepParams {
            lambda: 1.0,
            beta: 0.5,
            rho: 1.5,
            eps_init: 0.1,
            eps_floor: 1e-3,
            max_iterations: 500,
            rel_tol: 1e-6,
        }
    }
}

impl From<&SolverConfig> for StepParams {
    fn from(s: &SolverConfig) -> Self {
        StepParams {
            lambda: s.dual_lambda,
            beta: s.dual_beta,
            rho: s.dual_rho,
            eps_init: s.dual_eps_init,
            eps_floor: s.dual_eps_floor,
            max_iterations: s.dual_max_iterations,
            rel_tol: s.dual_rel_tol,
        }
    }
}

/// Multiplier-side state of the dual iteration.
#[derive(Debug, Clone)]
pub struct DualState {
    pub alpha: Vec<f64>,
    /// Continuous load surrogate, `exp(alpha - 1)` after each update.
    pub w: Vec<f64>,
    /// Iteration counter.
    pub t: usize,
    /// Current aspiration offset.
    pub eps_t: f64,
    /// Running minimum of the dual values.
    pub best_dual: f64,
    prev_dual: Option<f64>,
    params: StepParams,
}

/// What a multiplier update reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepOutcome {
    Stepped,
    /// Zero subgradient: the continuous loads match the integer loads, the
    /// iterate is optimal and iteration should stop.
    Converged,
}

impl DualState {
    pub fn new(uavs: usize, params: StepParams) -> Self {
        let alpha = vec![0.0f64; uavs];
        let w = alpha.iter().map(|a| (a - 1.0).exp()).collect();
        DualState {
            alpha,
            w,
            t: 0,
            eps_t: params.eps_init,
            best_dual: f64::INFINITY,
            prev_dual: None,
            params,
        }
    }

    /// Refresh the continuous loads from the current multipliers.
    pub fn update_loads(&mut self) {
        for (w, &a) in self.w.iter_mut().zip(&self.alpha) {
            *w = (a - 1.0).exp();
        }
    }

    /// Aspiration level: best dual seen minus the current offset.
    pub fn aspiration(&self) -> f64 {
        self.best_dual - self.eps_t
    }

    /// One multiplier update given the association chosen at the current
    /// multipliers and the dual value there. Adjusts the aspiration offset,
    /// takes the adaptive subgradient step and projects the multipliers.
    ///
    /// Projection is onto `[0, 1 + ln K + 5]` rather than just onto the
    /// non-negative half-line: the dual optimum satisfies
    /// `alpha_m = 1 + ln(load_m) <= 1 + ln K`, so the box contains it, and
    /// the upper edge stops `exp(alpha)` from overflowing when an improving
    /// streak has inflated the aspiration offset and with it the step.
    pub fn update_multipliers(&mut self, association: &[usize], dual: f64) -> StepOutcome {
        // grow the offset while the dual keeps improving, shrink toward the
        // floor otherwise
        if let Some(prev) = self.prev_dual {
            if dual <= prev {
                self.eps_t *= self.params.rho;
            } else {
                self.eps_t = (self.params.beta * self.eps_t).max(self.params.eps_floor);
            }
        }
        self.prev_dual = Some(dual);
        self.best_dual = self.best_dual.min(dual);

        let loads = loads_of(association, self.alpha.len());
        let g: Vec<f64> = self
            .w
            .iter()
            .zip(&loads)
            .map(|(&w, &l)| w - l as f64)
            .collect();
        let g_norm2: f64 = g.iter().map(|x| x * x).sum();
        if g_norm2 == 0.0 {
            return StepOutcome::Converged;
        }
        let alpha_hi = 1.0 + (association.len().max(1) as f64).ln() + 5.0;
        let delta = self.params.lambda * (dual - self.aspiration()) / g_norm2;
        for (a, gi) in self.alpha.iter_mut().zip(&g) {
            *a = (*a - delta * gi).clamp(0.0, alpha_hi);
        }
        self.t += 1;
        StepOutcome::Stepped
    }
}

/// One row of the dual-iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualTraceRow {
    pub t: usize,
    /// Dual value at the iterate.
    pub dual: f64,
    /// Aspiration level used for the step.
    pub aspiration: f64,
    pub eps: f64,
    /// True objective of the primal iterate.
    pub primal: f64,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub association: Vec<usize>,
    pub trace: Vec<DualTraceRow>,
    /// False when the iteration cap ended the loop.
    pub converged: bool,
}

/// Run the dual iteration and return the best feasible association seen.
pub fn solve(inst: &Instance, state: &SolutionState, params: &StepParams) -> Result<SolveOutcome> {
    let t_matrix = utility_matrix(inst, state)?;
    let mut ds = DualState::new(inst.uav_count(), params.clone());
    let mut best_assoc = state.association().to_vec();
    let mut best_primal = primal_objective(&t_matrix, &best_assoc);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut feasible_streak = 0usize;
    // the raw dual values jitter under the aspiration dynamics, so settle on
    // the running best instead: stop once it has not improved by a relative
    // rel_tol for a full stall window
    let mut stall = 0usize;
    const STALL_WINDOW: usize = 20;

    for t in 0..params.max_iterations {
        let assoc = assign_step(&t_matrix, &ds.alpha);
        ds.update_loads();
        let dual = dual_value(&t_matrix, &ds.alpha, &assoc, &ds.w);
        let primal = primal_objective(&t_matrix, &assoc);
        if primal > best_primal {
            best_primal = primal;
            best_assoc = assoc.clone();
        }

        let loads = loads_of(&assoc, inst.uav_count());
        let gap_l1: f64 = ds
            .w
            .iter()
            .zip(&loads)
            .map(|(&w, &l)| (w - l as f64).abs())
            .sum();
        feasible_streak = if gap_l1 == 0.0 { feasible_streak + 1 } else { 0 };

        let best_before = ds.best_dual;
        let outcome = ds.update_multipliers(&assoc, dual);
        let improvement = (best_before - ds.best_dual) / ds.best_dual.abs().max(1.0);
        stall = if improvement >= params.rel_tol { 0 } else { stall + 1 };

        trace.push(DualTraceRow {
            t,
            dual,
            aspiration: ds.aspiration(),
            eps: ds.eps_t,
            primal,
        });

        if outcome == StepOutcome::Converged || feasible_streak >= 2 || stall >= STALL_WINDOW {
            converged = true;
            break;
        }
    }

    Ok(SolveOutcome {
        association: best_assoc,
        trace,
        converged,
    })
}

/// Exact association by enumeration of all M^K assignments, scoring each with
/// the true integer-load objective. First maximizer in lexicographic order
/// wins ties.
pub fn brute_force_association(
    inst: &Instance,
    state: &SolutionState,
    cap: f64,
) -> Result<Vec<usize>> {
    let t_matrix = utility_matrix(inst, state)?;
    brute_force_over(&t_matrix, cap)
}

pub fn brute_force_over(t: &UtilityMatrix, cap: f64) -> Result<Vec<usize>> {
    let m_count = t.uav_count();
    let k_count = t.user_count();
    let configs = (m_count as f64).powi(k_count as i32);
    if configs > cap {
        return Err(Error::Capacity(format!(
            "{m_count}^{k_count} associations exceed the enumeration cap {cap}"
        )));
    }
    let mut assoc = vec![0usize; k_count];
    let mut best = assoc.clone();
    let mut best_v = primal_objective(t, &assoc);
    loop {
        // base-M increment
        let mut digit = 0;
        loop {
            if digit == k_count {
                return Ok(best);
            }
            assoc[digit] += 1;
            if assoc[digit] < m_count {
                break;
            }
            assoc[digit] = 0;
            digit += 1;
        }
        let v = primal_objective(t, &assoc);
        if v > best_v {
            best_v = v;
            best = assoc.clone();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn matrix(rows: Vec<Vec<f64>>) -> UtilityMatrix {
        UtilityMatrix::from_rows(rows)
    }

    #[test]
    fn single_uav_takes_everyone() {
        let t = matrix(vec![vec![2.0, 3.0, 4.0]]);
        assert_eq!(assign_step(&t, &[0.0]), vec![0, 0, 0]);
    }

    #[test]
    fn equal_multipliers_reduce_to_max_utility() {
        let t = matrix(vec![vec![2.0, 5.0], vec![3.0, 4.0]]);
        assert_eq!(assign_step(&t, &[0.7, 0.7]), vec![1, 0]);
    }

    #[test]
    fn assignment_invariant_to_common_shift() {
        let t = matrix(vec![vec![2.0, 5.0, 1.0], vec![3.0, 4.0, 1.5]]);
        let base = assign_step(&t, &[0.3, 0.9]);
        let shifted = assign_step(&t, &[0.3 + 11.0, 0.9 + 11.0]);
        assert_eq!(base, shifted);
    }

    #[test]
    fn raising_a_price_never_attracts_users() {
        let t = matrix(vec![vec![4.0, 2.0, 3.0, 5.0], vec![3.0, 3.0, 2.0, 4.0]]);
        let mut prev = usize::MAX;
        for step in 0..30 {
            let alpha0 = step as f64 * 0.1;
            let count = assign_step(&t, &[alpha0, 0.5])
                .iter()
                .filter(|&&m| m == 0)
                .count();
            assert!(count <= prev);
            prev = count;
        }
    }

    #[test]
    fn dual_value_hand_case() {
        // one UAV, one user, T = e, w = 1, alpha = 0
        let t = matrix(vec![vec![std::f64::consts::E]]);
        assert_abs_diff_eq!(dual_value(&t, &[0.0], &[0], &[1.0]), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn feasible_point_kills_the_penalty() {
        let t = matrix(vec![vec![2.0, 3.0], vec![4.0, 5.0]]);
        let assoc = vec![0, 1];
        let w = vec![1.0, 1.0];
        for &alpha0 in &[0.0, 0.4, 2.0] {
            let v = dual_value(&t, &[alpha0, alpha0 * 0.5], &assoc, &w);
            // matches the Lagrangian with a zero constraint term
            let expect = 2.0f64.ln() + 5.0f64.ln();
            assert_abs_diff_eq!(v, expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn unit_multiplier_gives_unit_load() {
        let mut ds = DualState::new(2, StepParams::default());
        ds.alpha = vec![1.0, 1.0];
        ds.update_loads();
        assert_abs_diff_eq!(ds.w[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ds.w[1], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_subgradient_signals_convergence() {
        let mut ds = DualState::new(1, StepParams::default());
        ds.alpha = vec![1.0 + (2.0f64).ln()];
        ds.update_loads(); // w = 2 exactly
        let assoc = vec![0, 0];
        let alpha_before = ds.alpha.clone();
        let outcome = ds.update_multipliers(&assoc, -1.0);
        assert_eq!(outcome, StepOutcome::Converged);
        assert_eq!(ds.alpha, alpha_before);
    }

    #[test]
    fn aspiration_offset_follows_the_dual() {
        let mut ds = DualState::new(1, StepParams::default());
        ds.update_loads();
        let assoc = vec![0, 0, 0];
        ds.update_multipliers(&assoc, 10.0);
        let eps0 = ds.eps_t;
        // an improving step multiplies the offset by rho
        ds.update_loads();
        ds.update_multipliers(&assoc, 9.0);
        assert_abs_diff_eq!(ds.eps_t, eps0 * 1.5, epsilon = 1e-12);
        // a worsening step halves it (floor far below)
        ds.update_loads();
        ds.update_multipliers(&assoc, 11.0);
        assert_abs_diff_eq!(ds.eps_t, eps0 * 1.5 * 0.5, epsilon = 1e-12);
    }

    #[test]
    fn brute_force_splits_symmetric_pairs() {
        // two UAVs, two users, identical utilities: splitting beats stacking
        let t = matrix(vec![vec![2.0, 2.0], vec![2.0, 2.0]]);
        let best = brute_force_over(&t, 1e6).unwrap();
        assert_ne!(best[0], best[1]);
    }

    #[test]
    fn brute_force_single_user_picks_max_utility() {
        let t = matrix(vec![vec![2.0], vec![5.0], vec![3.0]]);
        assert_eq!(brute_force_over(&t, 1e6).unwrap(), vec![1]);
    }

    #[test]
    fn brute_force_respects_cap() {
        let t = matrix(vec![vec![1.0; 30]; 4]);
        assert!(matches!(
            brute_force_over(&t, 1e6),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn primal_objective_matches_direct_recomputation() {
        let t = matrix(vec![
            vec![4.0, 2.0, 3.0, 5.0, 1.7, 2.2, 0.8, 3.3],
            vec![3.0, 3.0, 2.0, 4.0, 2.5, 1.1, 1.9, 2.8],
            vec![1.0, 4.0, 1.5, 2.0, 3.5, 2.9, 2.4, 1.2],
        ]);
        let best = brute_force_over(&t, 1e6).unwrap();
        let loads = loads_of(&best, 3);
        let mut expect = 0.0;
        for (k, &m) in best.iter().enumerate() {
            expect += (t.get(m, k) / loads[m] as f64).ln();
        }
        assert_relative_eq!(primal_objective(&t, &best), expect, max_relative = 1e-12);
    }
}
