//! CSV dumps of one optimized run: final decision state with coordinates,
//! convergence traces and the realized pathloss matrix.

use std::fmt::Write as _;

use aircache_core::association::{self, StepParams};
use aircache_core::deployment::{self, SwapPartner};
use aircache_core::joint::JointTrace;
use aircache_core::{Instance, Result, SolutionState};

use crate::report::{sig9, SCHEMA_LINE};

fn csv_header(columns: &str) -> String {
    format!("{SCHEMA_LINE}\n{columns}\n")
}

pub fn deployment_csv(inst: &Instance, state: &SolutionState) -> String {
    let mut out = csv_header("uav_id,candidate_id,x_m,y_m,z_m");
    for (m, &n) in state.deployment().iter().enumerate() {
        let c = inst.scenario.candidates[n];
        let _ = writeln!(out, "{m},{n},{},{},{}", sig9(c[0]), sig9(c[1]), sig9(c[2]));
    }
    out
}

pub fn caches_csv(state: &SolutionState) -> String {
    let mut out = csv_header("uav_id,content_id");
    for (m, cache) in state.caches().iter().enumerate() {
        for f in cache {
            let _ = writeln!(out, "{m},{f}");
        }
    }
    out
}

pub fn association_csv(inst: &Instance, state: &SolutionState) -> String {
    let mut out = csv_header("user_id,uav_id,user_x_m,user_y_m,uav_x_m,uav_y_m,uav_z_m");
    for (k, &m) in state.association().iter().enumerate() {
        let u = inst.scenario.users[k];
        let c = inst.scenario.candidates[state.candidate_of(m)];
        let _ = writeln!(
            out,
            "{k},{m},{},{},{},{},{}",
            sig9(u[0]),
            sig9(u[1]),
            sig9(c[0]),
            sig9(c[1]),
            sig9(c[2])
        );
    }
    out
}

pub fn joint_trace_csv(trace: &JointTrace) -> String {
    let mut out = csv_header("iteration,after_deployment,after_caching,after_association");
    for it in &trace.iterations {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            it.iteration,
            sig9(it.after_deployment),
            sig9(it.after_caching),
            sig9(it.after_association)
        );
    }
    out
}

pub fn pathloss_csv(inst: &Instance) -> String {
    let mut out = csv_header("candidate_id,receiver,los,pathloss_db");
    for (n, row) in inst.links.access.iter().enumerate() {
        for (k, link) in row.iter().enumerate() {
            let _ = writeln!(
                out,
                "{n},user_{k},{},{}",
                u8::from(link.los),
                sig9(link.pathloss_db)
            );
        }
    }
    for (n, link) in inst.links.backhaul.iter().enumerate() {
        let _ = writeln!(
            out,
            "{n},mbs,{},{}",
            u8::from(link.los),
            sig9(link.pathloss_db)
        );
    }
    out
}

/// Dual-iteration trace of a fresh association solve at the final state.
pub fn dual_trace_csv(inst: &Instance, state: &SolutionState, step: &StepParams) -> Result<String> {
    let outcome = association::solve(inst, state, step)?;
    let mut out = csv_header("t,dual_value,aspiration_level,eps,primal_objective");
    for row in &outcome.trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.t,
            sig9(row.dual),
            sig9(row.aspiration),
            sig9(row.eps),
            sig9(row.primal)
        );
    }
    Ok(out)
}

/// Swap log of a fresh matching pass at the final state. An already stable
/// state yields the header only, certifying stability.
pub fn swap_log_csv(inst: &Instance, state: &SolutionState, swap_cap: usize) -> Result<String> {
    let (_, log) = deployment::swap_match(inst, state, swap_cap)?;
    let mut out = csv_header(
        "step,uav_id,partner_kind,partner_id,uav_utility_before,uav_utility_after,partner_utility_before,partner_utility_after,objective_after",
    );
    for rec in &log.0 {
        let (kind, id) = match rec.partner {
            SwapPartner::Uav(m) => ("uav", m),
            SwapPartner::Vacant(n) => ("vacant", n),
        };
        let _ = writeln!(
            out,
            "{},{},{kind},{id},{},{},{},{},{}",
            rec.step,
            rec.uav,
            sig9(rec.utility_before.0),
            sig9(rec.utility_after.0),
            sig9(rec.utility_before.1),
            sig9(rec.utility_after.1),
            sig9(rec.objective_after)
        );
    }
    Ok(out)
}
