//! Delay and opinion-score evaluation, the optimization objective and the
//! reported metrics.
//!
//! The score of a delivery is logarithmic in the content access delay:
//! `C1 * ln(1/D) + C2`. Optimizers work on the unclamped score (so the
//! objective stays an exact sum of logs); reported metrics clamp each user's
//! score to [1, 5].

use serde::{Deserialize, Serialize};

use crate::channel;
use crate::content::RequestAssignment;
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::solution::SolutionState;

/// Score-model constants; the `[mos]` config section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MosParams {
    pub c1: f64,
    pub c2: f64,
    /// Clamp reported per-user scores to [1, 5].
    pub clamp: bool,
}

impl Default for MosParams {
    fn default() -> Self {
        MosParams {
            c1: 1.120,
            c2: 4.6746,
            clamp: true,
        }
    }
}

impl MosParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c1 > 0.0) {
            return Err(Error::Config("score slope c1 must be positive".into()));
        }
        if !self.c2.is_finite() {
            return Err(Error::Config("score offset c2 must be finite".into()));
        }
        Ok(())
    }
}

/// Access and backhaul parts of one user's content delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayBreakdown {
    pub access_s: f64,
    pub backhaul_s: f64,
    pub total_s: f64,
}

/// Delay of user `k` under the current state. The backhaul part is zero
/// exactly when the requested content is cached at the serving UAV.
pub fn delay(inst: &Instance, state: &SolutionState, k: usize) -> Result<DelayBreakdown> {
    delay_with(inst, state, state.deployment(), k, true)
}

/// Delay with the deployment overridden by `locations` (used while probing
/// swaps) and optionally without co-channel interference (used by the
/// interference-free bootstrap).
pub(crate) fn delay_with(
    inst: &Instance,
    state: &SolutionState,
    locations: &[usize],
    k: usize,
    interference: bool,
) -> Result<DelayBreakdown> {
    let m = state.serving_uav(k);
    let w = state.load()[m];
    debug_assert!(w >= 1, "serving UAV always carries its own user");
    let s = inst.library.size_bits;

    let sinr = channel::sinr_user_inner(&inst.links, locations, m, k, interference);
    let rate = inst.links.access_bandwidth_hz / w as f64 * (1.0 + sinr).log2();
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(Error::Evaluation(format!("access rate degenerate for user {k}")));
    }
    let access_s = s / rate;

    let backhaul_s = if state.is_cached(m, inst.requests.requested(k)) {
        0.0
    } else {
        let b = channel::rate_backhaul(&inst.links, locations, state.load(), m)?;
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Evaluation(format!("backhaul rate degenerate for UAV {m}")));
        }
        s / b
    };

    Ok(DelayBreakdown {
        access_s,
        backhaul_s,
        total_s: access_s + backhaul_s,
    })
}

/// Opinion score of one delivery.
pub fn mos(d: &DelayBreakdown, p: &MosParams) -> Result<f64> {
    if !(d.total_s > 0.0) {
        return Err(Error::Domain(format!("non-positive delay {}", d.total_s)));
    }
    let raw = p.c1 * (1.0 / d.total_s).ln() + p.c2;
    Ok(if p.clamp { raw.clamp(1.0, 5.0) } else { raw })
}

/// Log-inverse-delay of user `k`; the optimizer currency.
pub fn user_q(inst: &Instance, state: &SolutionState, k: usize) -> Result<f64> {
    Ok((1.0 / delay(inst, state, k)?.total_s).ln())
}

/// `(access_s, backhaul_s_on_miss)` for user `k` on UAV `m`, independent of
/// what is currently cached. The cache-gain computation compares the two.
pub(crate) fn delay_parts_ignoring_cache(
    inst: &Instance,
    state: &SolutionState,
    m: usize,
    k: usize,
) -> Result<(f64, f64)> {
    let w = state.load()[m];
    if w == 0 {
        return Err(Error::Evaluation(format!("UAV {m} has no associated users")));
    }
    let s = inst.library.size_bits;
    let sinr = channel::sinr_user_inner(&inst.links, state.deployment(), m, k, true);
    let rate = inst.links.access_bandwidth_hz / w as f64 * (1.0 + sinr).log2();
    let b = channel::rate_backhaul(&inst.links, state.deployment(), state.load(), m)?;
    if !(rate > 0.0) || !(b > 0.0) || !rate.is_finite() || !b.is_finite() {
        return Err(Error::Evaluation(format!("degenerate rates for user {k} on UAV {m}")));
    }
    Ok((s / rate, s / b))
}

pub(crate) fn user_q_with(
    inst: &Instance,
    state: &SolutionState,
    locations: &[usize],
    k: usize,
    interference: bool,
) -> Result<f64> {
    Ok((1.0 / delay_with(inst, state, locations, k, interference)?.total_s).ln())
}

/// Total unclamped score over all users; the quantity every solver maximizes.
pub fn objective(inst: &Instance, state: &SolutionState) -> Result<f64> {
    objective_with(inst, state, state.deployment(), true)
}

pub(crate) fn objective_with(
    inst: &Instance,
    state: &SolutionState,
    locations: &[usize],
    interference: bool,
) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..inst.user_count() {
        total += inst.mos.c1 * user_q_with(inst, state, locations, k, interference)? + inst.mos.c2;
    }
    Ok(total)
}

/// Mean per-user score, clamped according to the instance's score params.
pub fn average_mos(inst: &Instance, state: &SolutionState) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..inst.user_count() {
        total += mos(&delay(inst, state, k)?, &inst.mos)?;
    }
    Ok(total / inst.user_count() as f64)
}

/// Fraction of users whose request is served from their serving UAV's cache.
pub fn offloading_ratio(state: &SolutionState, requests: &RequestAssignment) -> f64 {
    let k_total = requests.user_count();
    let hits = (0..k_total)
        .filter(|&k| state.is_cached(state.serving_uav(k), requests.requested(k)))
        .count();
    hits as f64 / k_total as f64
}
