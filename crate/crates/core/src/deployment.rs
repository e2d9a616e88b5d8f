//! UAV placement by two-sided exchange-stable swap matching, bootstrapped
//! with a propose-and-accept matching over interference-free preferences.
//!
//! Placement is a one-to-one matching between UAVs and candidate locations
//! with externalities: moving one UAV changes the interference seen by every
//! user. A swap of two UAVs keeps the set of occupied locations, so only the
//! two movers' user groups change score; a move into a vacant location also
//! shifts interference for everyone else, which the accept rule deliberately
//! ignores (the mover alone must improve). The joint loop guards the global
//! objective across the stage boundary.

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::qoe;
use crate::solution::SolutionState;

/// One-to-one matching of UAVs to candidate locations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    to_candidate: Vec<usize>,
    occupant: Vec<Option<usize>>,
}

impl Matching {
    pub fn new(to_candidate: Vec<usize>, candidate_count: usize) -> Result<Self> {
        let mut occupant = vec![None; candidate_count];
        for (m, &n) in to_candidate.iter().enumerate() {
            if n >= candidate_count {
                return Err(Error::State(format!("UAV {m} matched to unknown location {n}")));
            }
            if occupant[n].is_some() {
                return Err(Error::State(format!("location {n} matched twice")));
            }
            occupant[n] = Some(m);
        }
        Ok(Matching {
            to_candidate,
            occupant,
        })
    }

    pub fn locations(&self) -> &[usize] {
        &self.to_candidate
    }

    pub fn occupant_of(&self, n: usize) -> Option<usize> {
        self.occupant[n]
    }

    fn swap_pair(&mut self, m: usize, m2: usize) {
        let (n, n2) = (self.to_candidate[m], self.to_candidate[m2]);
        self.to_candidate[m] = n2;
        self.to_candidate[m2] = n;
        self.occupant[n] = Some(m2);
        self.occupant[n2] = Some(m);
    }

    fn move_to_vacant(&mut self, m: usize, n2: usize) {
        debug_assert!(self.occupant[n2].is_none());
        let n = self.to_candidate[m];
        self.occupant[n] = None;
        self.occupant[n2] = Some(m);
        self.to_candidate[m] = n2;
    }
}

/// The other side of an attempted swap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwapPartner {
    Uav(usize),
    Vacant(usize),
}

/// One executed swap: who moved, participant utilities around the swap, and
/// the global objective afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapRecord {
    pub step: usize,
    pub uav: usize,
    pub partner: SwapPartner,
    pub utility_before: (f64, f64),
    pub utility_after: (f64, f64),
    pub objective_after: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SwapLog(pub Vec<SwapRecord>);

/// Utility of UAV `m` under `locations`: summed unclamped score of its
/// associated users, full-interference evaluation.
pub fn utility_of(
    inst: &Instance,
    state: &SolutionState,
    locations: &[usize],
    m: usize,
) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..inst.user_count() {
        if state.serving_uav(k) == m {
            total += inst.mos.c1 * qoe::user_q_with(inst, state, locations, k, true)? + inst.mos.c2;
        }
    }
    Ok(total)
}

/// Utility of a candidate location: its occupant's utility, zero if vacant.
pub fn utility_location(
    inst: &Instance,
    state: &SolutionState,
    matching: &Matching,
    n: usize,
) -> Result<f64> {
    match matching.occupant_of(n) {
        Some(m) => utility_of(inst, state, matching.locations(), m),
        None => Ok(0.0),
    }
}

fn global_objective(inst: &Instance, state: &SolutionState, locations: &[usize]) -> Result<f64> {
    qoe::objective_with(inst, state, locations, true)
}

/// Would swapping `m` with `partner` be approved?
///
/// For a UAV pair: the four agents (both UAVs and both locations) may not
/// lose and at least one must strictly gain. A location's utility is its
/// occupant's, so the four comparisons reduce to the two movers' utilities
/// before and after, crossed. Exchanging two UAVs keeps the occupied set, so
/// no other user's interference changes and the approved swap cannot lower
/// the global score.
///
/// For a vacant target the mover alone must strictly improve (ties rejected
/// so moves cannot oscillate) and the global score may not drop: a lone
/// move shifts interference for every other user, and an unguarded move
/// would break the monotone objective the outer loop relies on.
pub fn is_blocking_pair(
    inst: &Instance,
    state: &SolutionState,
    matching: &Matching,
    m: usize,
    partner: SwapPartner,
) -> Result<bool> {
    let before = matching.locations();
    match partner {
        SwapPartner::Uav(m2) => {
            debug_assert_ne!(m, m2);
            let u_m = utility_of(inst, state, before, m)?;
            let u_m2 = utility_of(inst, state, before, m2)?;
            let mut probe = matching.clone();
            probe.swap_pair(m, m2);
            let after = probe.locations();
            let v_m = utility_of(inst, state, after, m)?;
            let v_m2 = utility_of(inst, state, after, m2)?;
            let no_loss = v_m >= u_m && v_m2 >= u_m2 && v_m2 >= u_m && v_m >= u_m2;
            let strict = v_m > u_m || v_m2 > u_m2 || v_m2 > u_m || v_m > u_m2;
            Ok(no_loss && strict)
        }
        SwapPartner::Vacant(n2) => {
            if matching.occupant_of(n2).is_some() {
                return Ok(false);
            }
            let u_m = utility_of(inst, state, before, m)?;
            let mut probe = matching.clone();
            probe.move_to_vacant(m, n2);
            let v_m = utility_of(inst, state, probe.locations(), m)?;
            if v_m <= u_m {
                return Ok(false);
            }
            let g_before = global_objective(inst, state, before)?;
            let g_after = global_objective(inst, state, probe.locations())?;
            Ok(g_after >= g_before)
        }
    }
}

/// Propose-and-accept bootstrap over interference-free preferences.
///
/// Both sides rank pairs by the same value: the summed score of the UAV's
/// users if it sat at the location, evaluated without co-channel
/// interference. Locations propose in descending value order; a UAV keeps
/// the best proposal seen. Ends when every UAV is matched or every unmatched
/// location has exhausted its list; the result carries no blocking pair
/// under these static preferences.
pub fn gs_initialize(inst: &Instance, state: &SolutionState) -> Result<Matching> {
    let m_count = inst.uav_count();
    let n_count = inst.candidate_count();
    // value[m][n]: utility of UAV m at location n, interference-free
    let mut value = vec![vec![0.0f64; n_count]; m_count];
    let mut probe = state.deployment().to_vec();
    for m in 0..m_count {
        let original = probe[m];
        for n in 0..n_count {
            probe[m] = n;
            let mut total = 0.0;
            for k in 0..inst.user_count() {
                if state.serving_uav(k) == m {
                    total +=
                        inst.mos.c1 * qoe::user_q_with(inst, state, &probe, k, false)? + inst.mos.c2;
                }
            }
            value[m][n] = total;
        }
        probe[m] = original;
    }

    // each location's proposal order: UAVs by descending value, ties low index
    let proposal_order: Vec<Vec<usize>> = (0..n_count)
        .map(|n| {
            let mut uavs: Vec<usize> = (0..m_count).collect();
            uavs.sort_by(|&a, &b| value[b][n].partial_cmp(&value[a][n]).unwrap().then(a.cmp(&b)));
            uavs
        })
        .collect();

    // deferred acceptance: run until every unmatched location has proposed
    // to (and been rejected by) every UAV; late proposals may displace
    // earlier matches
    let mut next_choice = vec![0usize; n_count];
    let mut matched_to: Vec<Option<usize>> = vec![None; m_count]; // UAV -> location
    let mut queue: std::collections::VecDeque<usize> = (0..n_count).collect();
    while let Some(n) = queue.pop_front() {
        if next_choice[n] >= m_count {
            continue; // every UAV rejected this location
        }
        let m = proposal_order[n][next_choice[n]];
        next_choice[n] += 1;
        match matched_to[m] {
            None => matched_to[m] = Some(n),
            Some(current) => {
                if value[m][n] > value[m][current] {
                    matched_to[m] = Some(n);
                    queue.push_back(current);
                } else {
                    queue.push_back(n);
                }
            }
        }
    }

    let to_candidate: Vec<usize> = matched_to
        .into_iter()
        .enumerate()
        .map(|(m, slot)| slot.ok_or_else(|| Error::State(format!("UAV {m} left unmatched"))))
        .collect::<Result<_>>()?;
    Matching::new(to_candidate, n_count)
}

/// Anti-cycling key: an unordered UAV pair or a (UAV, vacant location) move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum SwapId {
    Pair(usize, usize),
    Vacant(usize, usize),
}

fn pair_id(m: usize, m2: usize) -> SwapId {
    SwapId::Pair(m.min(m2), m.max(m2))
}

/// Swap-matching loop. Scans UAVs in index order (pair partners first, then
/// vacant locations, both ascending), executes the first approved swap and
/// moves on. A swap id may execute at most once between strict global
/// improvements; the loop ends when a full pass executes nothing. Errors
/// with the log attached if the executed-swap cap is exceeded.
pub fn swap_match(
    inst: &Instance,
    state: &SolutionState,
    swap_cap: usize,
) -> Result<(Matching, SwapLog)> {
    let m_count = inst.uav_count();
    let n_count = inst.candidate_count();
    let mut matching = Matching::new(state.deployment().to_vec(), n_count)?;
    let mut attempted: HashSet<SwapId> = HashSet::new();
    let mut log = SwapLog::default();
    let mut executed = 0usize;
    let mut global = global_objective(inst, state, matching.locations())?;

    loop {
        let mut progressed = false;
        'uavs: for m in 0..m_count {
            for m2 in (m + 1)..m_count {
                let id = pair_id(m, m2);
                if attempted.contains(&id) {
                    continue;
                }
                if is_blocking_pair(inst, state, &matching, m, SwapPartner::Uav(m2))? {
                    let u_before = (
                        utility_of(inst, state, matching.locations(), m)?,
                        utility_of(inst, state, matching.locations(), m2)?,
                    );
                    matching.swap_pair(m, m2);
                    executed += 1;
                    if executed > swap_cap {
                        return Err(Error::SwapCap { executed, log });
                    }
                    let u_after = (
                        utility_of(inst, state, matching.locations(), m)?,
                        utility_of(inst, state, matching.locations(), m2)?,
                    );
                    let new_global = global_objective(inst, state, matching.locations())?;
                    if new_global > global {
                        attempted.clear();
                    }
                    attempted.insert(id);
                    global = new_global;
                    log.0.push(SwapRecord {
                        step: executed,
                        uav: m,
                        partner: SwapPartner::Uav(m2),
                        utility_before: u_before,
                        utility_after: u_after,
                        objective_after: new_global,
                    });
                    progressed = true;
                    continue 'uavs;
                }
            }
            for n2 in 0..n_count {
                if matching.occupant_of(n2).is_some() {
                    continue;
                }
                let id = SwapId::Vacant(m, n2);
                if attempted.contains(&id) {
                    continue;
                }
                if is_blocking_pair(inst, state, &matching, m, SwapPartner::Vacant(n2))? {
                    let u_before = (utility_of(inst, state, matching.locations(), m)?, 0.0);
                    matching.move_to_vacant(m, n2);
                    executed += 1;
                    if executed > swap_cap {
                        return Err(Error::SwapCap { executed, log });
                    }
                    let u_after = (utility_of(inst, state, matching.locations(), m)?, 0.0);
                    let new_global = global_objective(inst, state, matching.locations())?;
                    if new_global > global {
                        attempted.clear();
                    }
                    attempted.insert(id);
                    global = new_global;
                    log.0.push(SwapRecord {
                        step: executed,
                        uav: m,
                        partner: SwapPartner::Vacant(n2),
                        utility_before: u_before,
                        utility_after: u_after,
                        objective_after: new_global,
                    });
                    progressed = true;
                    continue 'uavs;
                }
            }
        }
        if !progressed {
            break;
        }
    }
    Ok((matching, log))
}

/// Scan every pair and every vacant move for a blocking pair. Used by tests
/// and diagnostics to certify stability of a finished matching.
pub fn find_blocking_pair(
    inst: &Instance,
    state: &SolutionState,
    matching: &Matching,
) -> Result<Option<(usize, SwapPartner)>> {
    let m_count = inst.uav_count();
    for m in 0..m_count {
        for m2 in (m + 1)..m_count {
            if is_blocking_pair(inst, state, matching, m, SwapPartner::Uav(m2))? {
                return Ok(Some((m, SwapPartner::Uav(m2))));
            }
        }
        for n2 in 0..inst.candidate_count() {
            if matching.occupant_of(n2).is_none()
                && is_blocking_pair(inst, state, matching, m, SwapPartner::Vacant(n2))?
            {
                return Ok(Some((m, SwapPartner::Vacant(n2))));
            }
        }
    }
    Ok(None)
}
