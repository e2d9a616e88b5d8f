//! CSV and manifest serialization. Every CSV starts with a schema line and
//! prints floats with nine significant digits; rows are fully determined by
//! the plan, so reruns produce identical bytes. Wall-clock timing lives in
//! the JSON manifest only.

use sha2::{Digest, Sha256};

use aircache_core::SimConfig;

use crate::plan::ExperimentPlan;
use crate::runner::{CellResult, SummaryRow};

pub const SCHEMA_LINE: &str = "schema_version=1";

/// Nine significant digits, scientific notation.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

pub fn results_csv(cells: &[CellResult]) -> String {
    let mut out = String::new();
    out.push_str(SCHEMA_LINE);
    out.push('\n');
    out.push_str(
        "sweep_axis,sweep_value,algorithm,replication,avg_mos,offload_ratio,objective,outer_iterations,status\n",
    );
    for cell in cells {
        match &cell.outcome {
            Ok(m) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{},ok\n",
                cell.axis,
                sig9(cell.value),
                cell.algorithm,
                cell.replication,
                sig9(m.avg_mos),
                sig9(m.offload_ratio),
                sig9(m.objective),
                m.outer_iterations,
            )),
            Err(e) => out.push_str(&format!(
                "{},{},{},{},,,,,error:{}\n",
                cell.axis,
                sig9(cell.value),
                cell.algorithm,
                cell.replication,
                e.replace([',', '\n'], ";"),
            )),
        }
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::new();
    out.push_str(SCHEMA_LINE);
    out.push('\n');
    out.push_str(
        "sweep_axis,sweep_value,algorithm,n,avg_mos_mean,avg_mos_std,offload_ratio_mean,offload_ratio_std,objective_mean,objective_std\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.axis,
            sig9(r.value),
            r.algorithm,
            r.n,
            sig9(r.avg_mos_mean),
            sig9(r.avg_mos_std),
            sig9(r.offload_mean),
            sig9(r.offload_std),
            sig9(r.objective_mean),
            sig9(r.objective_std),
        ));
    }
    out
}

/// Parse a results CSV produced by [`results_csv`] back into cells. Used by
/// the standalone summarize verb.
pub fn parse_results_csv(text: &str) -> aircache_core::Result<Vec<CellResult>> {
    use aircache_core::Error;
    let mut lines = text.lines();
    match lines.next() {
        Some(line) if line == SCHEMA_LINE => {}
        other => {
            return Err(Error::Config(format!(
                "expected '{SCHEMA_LINE}' as the first line, found {other:?}"
            )))
        }
    }
    let _header = lines
        .next()
        .ok_or_else(|| Error::Config("missing header row".into()))?;
    let mut cells = Vec::new();
    let mut point_index = usize::MAX;
    let mut last_point: Option<(String, String)> = None;
    for (row_no, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 9 {
            return Err(Error::Config(format!(
                "row {row_no}: expected 9 fields, found {}",
                fields.len()
            )));
        }
        let parse_f = |s: &str, what: &str| -> aircache_core::Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Config(format!("row {row_no}: bad {what} '{s}': {e}")))
        };
        let point = (fields[0].to_string(), fields[1].to_string());
        if last_point.as_ref() != Some(&point) {
            point_index = point_index.wrapping_add(1);
            last_point = Some(point);
        }
        let algorithm: crate::plan::Algorithm = fields[2]
            .parse()
            .map_err(|e| Error::Config(format!("row {row_no}: {e}")))?;
        let replication: u32 = fields[3]
            .parse()
            .map_err(|e| Error::Config(format!("row {row_no}: bad replication: {e}")))?;
        let outcome = if fields[8] == "ok" {
            Ok(crate::runner::CellMetrics {
                avg_mos: parse_f(fields[4], "avg_mos")?,
                offload_ratio: parse_f(fields[5], "offload_ratio")?,
                objective: parse_f(fields[6], "objective")?,
                outer_iterations: fields[7]
                    .parse()
                    .map_err(|e| Error::Config(format!("row {row_no}: bad iterations: {e}")))?,
                runtime_s: 0.0,
            })
        } else {
            Err(fields[8].to_string())
        };
        // the axis string lives for the program's duration; results files
        // only contain the known axis names plus "none"
        let axis: &'static str = match fields[0] {
            "cache_bits" => "cache_bits",
            "user_count" => "user_count",
            "uav_height" => "uav_height",
            "zipf_gamma" => "zipf_gamma",
            "none" => "none",
            other => return Err(Error::Config(format!("row {row_no}: unknown axis '{other}'"))),
        };
        cells.push(CellResult {
            point_index,
            axis,
            value: parse_f(fields[1], "sweep_value")?,
            algorithm,
            replication,
            outcome,
        });
    }
    Ok(cells)
}

/// SHA-256 of the canonical configuration serialization.
pub fn config_hash(cfg: &SimConfig) -> String {
    let mut hasher = Sha256::new();
    hasher.update(cfg.to_canonical_toml().as_bytes());
    let digest = hasher.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Machine-readable run manifest. Timing is recorded here, outside the
/// deterministic CSVs.
pub fn manifest_json(plan: &ExperimentPlan, cells: &[CellResult], total_wall_s: f64) -> String {
    let seeds: Vec<u64> = (0..plan.replications)
        .map(|r| plan.replication_seed(r))
        .collect();
    let algorithms: Vec<String> = plan.algorithms.iter().map(|a| a.to_string()).collect();
    let sweep = plan.sweep.as_ref().map(|s| {
        serde_json::json!({
            "axis": s.axis.name(),
            "values": s.values,
        })
    });
    let per_algorithm_runtime: serde_json::Map<String, serde_json::Value> = plan
        .algorithms
        .iter()
        .map(|&a| {
            let total: f64 = cells
                .iter()
                .filter(|c| c.algorithm == a)
                .filter_map(|c| c.outcome.as_ref().ok().map(|m| m.runtime_s))
                .sum();
            (a.to_string(), serde_json::json!(total))
        })
        .collect();
    let manifest = serde_json::json!({
        "schema_version": 1,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config_sha256": config_hash(&plan.base),
        "base_seed": plan.base_seed,
        "replications": plan.replications,
        "replication_seeds": seeds,
        "algorithms": algorithms,
        "sweep": sweep,
        "cells": cells.len(),
        "failures": cells.iter().filter(|c| c.outcome.is_err()).count(),
        "wall_clock_s": {
            "total": total_wall_s,
            "per_algorithm_cells": per_algorithm_runtime,
        },
    });
    serde_json::to_string_pretty(&manifest).expect("manifest serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(sig9(60e6), "6.00000000e7");
        assert_eq!(sig9(0.123456789123), "1.23456789e-1");
        assert_eq!(sig9(-2.5), "-2.50000000e0");
    }

    #[test]
    fn hash_tracks_config_changes() {
        let a = config_hash(&SimConfig::default());
        let mut cfg = SimConfig::default();
        cfg.network.user_count += 1;
        let b = config_hash(&cfg);
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
        assert_eq!(a, config_hash(&SimConfig::default()));
    }
}
