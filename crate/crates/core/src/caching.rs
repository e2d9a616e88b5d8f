//! Per-UAV content placement: greedy maximization of the cache gain plus the
//! exact top-k oracle used to verify it.
//!
//! With placement and association fixed, caching content f at UAV m improves
//! each of m's users requesting f by the same load-independent amount (the
//! backhaul term of their delay disappears). Under one request per user those
//! per-content gains are additive and independent, so picking the
//! highest-gain contents up to capacity is exactly optimal and greedy
//! selection matches it.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::qoe;
use crate::solution::SolutionState;

/// Per-UAV cache space in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CacheBudget {
    pub bits: f64,
}

impl CacheBudget {
    /// Whole contents that fit: floor(bits / content_bits).
    pub fn capacity_items(&self, content_bits: f64) -> usize {
        if content_bits <= 0.0 || self.bits <= 0.0 {
            return 0;
        }
        (self.bits / content_bits).floor() as usize
    }
}

/// Marginal score gain of caching content f at UAV m, per (m, f) pair.
/// Zero whenever no associated user requests f; never negative.
#[derive(Debug, Clone)]
pub struct GainTable {
    gains: Vec<Vec<f64>>,
}

impl GainTable {
    pub fn gain(&self, m: usize, f: usize) -> f64 {
        self.gains[m][f]
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.gains[m]
    }
}

/// Compute every (UAV, content) gain for the current placement and
/// association. Gains ignore the current cache contents: under one request
/// per user the benefit of a content does not depend on what else is cached.
pub fn gain_table(inst: &Instance, state: &SolutionState) -> Result<GainTable> {
    let mut gains = vec![vec![0.0; inst.content_count()]; inst.uav_count()];
    for k in 0..inst.user_count() {
        let m = state.serving_uav(k);
        let f = inst.requests.requested(k);
        gains[m][f] += user_gain(inst, state, k)?;
    }
    Ok(GainTable { gains })
}

/// Score delta for user k between a cache hit and a miss at its serving UAV:
/// ln(access + backhaul) - ln(access).
fn user_gain(inst: &Instance, state: &SolutionState, k: usize) -> Result<f64> {
    let m = state.serving_uav(k);
    let d = qoe::delay_parts_ignoring_cache(inst, state, m, k)?;
    Ok((d.0 + d.1).ln() - d.0.ln())
}

/// Exact score change from adding content `f` to UAV `m`'s cache now.
pub fn marginal_gain(inst: &Instance, state: &SolutionState, m: usize, f: usize) -> Result<f64> {
    if state.is_cached(m, f) {
        return Err(Error::State(format!("content {f} already cached at UAV {m}")));
    }
    let mut total = 0.0;
    for k in 0..inst.user_count() {
        if state.serving_uav(k) == m && inst.requests.requested(k) == f {
            total += user_gain(inst, state, k)?;
        }
    }
    Ok(total)
}

/// Greedy placement: per UAV, repeatedly cache the highest-gain remaining
/// content (ties to the lower content index) until capacity is reached or no
/// remaining content has positive gain.
pub fn greedy_place(inst: &Instance, state: &SolutionState) -> Result<Vec<BTreeSet<usize>>> {
    let table = gain_table(inst, state)?;
    let capacity = inst.capacity_items();
    let mut placement = Vec::with_capacity(inst.uav_count());
    for m in 0..inst.uav_count() {
        let mut chosen = BTreeSet::new();
        let row = table.row(m);
        while chosen.len() < capacity {
            let mut best: Option<(usize, f64)> = None;
            for (f, &g) in row.iter().enumerate() {
                if chosen.contains(&f) {
                    continue;
                }
                // strict comparison keeps the lowest index on ties
                if best.map_or(true, |(_, bg)| g > bg) {
                    best = Some((f, g));
                }
            }
            match best {
                Some((f, g)) if g > 0.0 => {
                    chosen.insert(f);
                }
                _ => break,
            }
        }
        placement.push(chosen);
    }
    Ok(placement)
}

/// Exact placement: per UAV, the `capacity` positive-gain contents with the
/// largest gains, ties to the lower content index. Optimal given placement
/// and association because per-content gains are independent.
pub fn exact_place(inst: &Instance, state: &SolutionState) -> Result<Vec<BTreeSet<usize>>> {
    let table = gain_table(inst, state)?;
    let capacity = inst.capacity_items();
    Ok((0..inst.uav_count())
        .map(|m| top_gains(table.row(m), capacity))
        .collect())
}

pub(crate) fn top_gains(row: &[f64], capacity: usize) -> BTreeSet<usize> {
    let mut ranked: Vec<usize> = (0..row.len()).filter(|&f| row[f] > 0.0).collect();
    ranked.sort_by(|&a, &b| row[b].partial_cmp(&row[a]).unwrap().then(a.cmp(&b)));
    ranked.into_iter().take(capacity).collect()
}

/// Total gain of a placement relative to the empty cache, in score units.
pub fn placement_gain(table: &GainTable, placement: &[BTreeSet<usize>]) -> f64 {
    placement
        .iter()
        .enumerate()
        .map(|(m, set)| set.iter().map(|&f| table.gain(m, f)).sum::<f64>())
        .sum()
}
