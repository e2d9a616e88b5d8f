//! Cell execution and aggregation. Cells (point x algorithm x replication)
//! run in a work pool; results merge deterministically by sort key, so a
//! rerun of the same plan yields byte-identical output.

use std::time::Instant;

use rayon::prelude::*;

use aircache_core::joint::{self, JointParams};
use aircache_core::{qoe, Instance, Result};

use crate::plan::{Algorithm, ExperimentPlan};

/// Metrics of one successful cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellMetrics {
    pub avg_mos: f64,
    pub offload_ratio: f64,
    pub objective: f64,
    pub outer_iterations: u32,
    /// Wall-clock of the cell. Reported in the run manifest, never in the
    /// CSVs, which must be reproducible byte for byte.
    pub runtime_s: f64,
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub point_index: usize,
    pub axis: &'static str,
    pub value: f64,
    pub algorithm: Algorithm,
    pub replication: u32,
    pub outcome: std::result::Result<CellMetrics, String>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub cells: Vec<CellResult>,
    pub failures: usize,
}

fn run_algorithm(inst: &Instance, params: &JointParams, algorithm: Algorithm, seed: u64) -> Result<CellMetrics> {
    let started = Instant::now();
    let (state, outer_iterations) = match algorithm {
        Algorithm::Proposed => {
            let (state, trace) = joint::optimize(inst, params)?;
            (state, trace.outer_iterations() as u32)
        }
        Algorithm::Classic => (joint::baseline_classic(inst)?, 0),
        Algorithm::Random => (joint::baseline_random(inst, seed)?, 0),
        Algorithm::Oracle => (joint::exhaustive_oracle(inst, params.oracle_cap)?, 0),
    };
    Ok(CellMetrics {
        avg_mos: qoe::average_mos(inst, &state)?,
        offload_ratio: qoe::offloading_ratio(&state, &inst.requests),
        objective: qoe::objective(inst, &state)?,
        outer_iterations,
        runtime_s: started.elapsed().as_secs_f64(),
    })
}

/// Execute every cell of the plan. Cell failures are recorded, not fatal.
pub fn run(plan: &ExperimentPlan) -> Result<RunOutput> {
    plan.validate()?;
    let points = plan.points();

    // one task per (point, replication); the algorithms inside share the
    // generated instance
    let tasks: Vec<(usize, u32)> = (0..points.len())
        .flat_map(|p| (0..plan.replications).map(move |r| (p, r)))
        .collect();

    let mut cells: Vec<CellResult> = tasks
        .par_iter()
        .flat_map_iter(|&(point_index, replication)| {
            let point = points[point_index].clone();
            let seed = plan.replication_seed(replication);
            let prepared = plan.config_at(point_index).and_then(|cfg| {
                let params = JointParams::from(&cfg.solver);
                Instance::generate(&cfg, seed).map(|inst| (inst, params))
            });
            plan.algorithms
                .iter()
                .map(move |&algorithm| {
                    let outcome = match &prepared {
                        Ok((inst, params)) => run_algorithm(inst, params, algorithm, seed)
                            .map_err(|e| e.to_string()),
                        Err(e) => Err(e.to_string()),
                    };
                    CellResult {
                        point_index,
                        axis: point.axis,
                        value: point.value,
                        algorithm,
                        replication,
                        outcome,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();

    cells.sort_by(|a, b| {
        (a.point_index, a.algorithm, a.replication)
            .cmp(&(b.point_index, b.algorithm, b.replication))
    });
    let failures = cells.iter().filter(|c| c.outcome.is_err()).count();
    Ok(RunOutput { cells, failures })
}

/// Aggregate row of `summarize`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub axis: String,
    pub value: f64,
    pub algorithm: Algorithm,
    pub n: usize,
    pub avg_mos_mean: f64,
    pub avg_mos_std: f64,
    pub offload_mean: f64,
    pub offload_std: f64,
    pub objective_mean: f64,
    pub objective_std: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

/// Mean and sample deviation per (point, algorithm) over the successful
/// replications. Order follows the cell sort key.
pub fn summarize(cells: &[CellResult]) -> Result<Vec<SummaryRow>> {
    if cells.is_empty() {
        return Err(aircache_core::Error::Config(
            "nothing to summarize: no result rows".into(),
        ));
    }
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut key: Option<(usize, Algorithm)> = None;
    let mut bucket: Vec<&CellResult> = Vec::new();
    let flush = |bucket: &mut Vec<&CellResult>, rows: &mut Vec<SummaryRow>| {
        if bucket.is_empty() {
            return;
        }
        let ok: Vec<&CellMetrics> = bucket
            .iter()
            .filter_map(|c| c.outcome.as_ref().ok())
            .collect();
        let (avg_mos_mean, avg_mos_std) =
            mean_std(&ok.iter().map(|m| m.avg_mos).collect::<Vec<_>>());
        let (offload_mean, offload_std) =
            mean_std(&ok.iter().map(|m| m.offload_ratio).collect::<Vec<_>>());
        let (objective_mean, objective_std) =
            mean_std(&ok.iter().map(|m| m.objective).collect::<Vec<_>>());
        let first = bucket[0];
        rows.push(SummaryRow {
            axis: first.axis.to_string(),
            value: first.value,
            algorithm: first.algorithm,
            n: ok.len(),
            avg_mos_mean,
            avg_mos_std,
            offload_mean,
            offload_std,
            objective_mean,
            objective_std,
        });
        bucket.clear();
    };
    for cell in cells {
        let cell_key = (cell.point_index, cell.algorithm);
        if key != Some(cell_key) {
            flush(&mut bucket, &mut rows);
            key = Some(cell_key);
        }
        bucket.push(cell);
    }
    flush(&mut bucket, &mut rows);
    Ok(rows)
}
