use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use aircache_cli::plan::{Algorithm, ExperimentPlan, Sweep};
use aircache_cli::{dump, report, runner};
use aircache_core::association::StepParams;
use aircache_core::joint::{self, JointParams};
use aircache_core::{qoe, Instance, SimConfig};

/// Simulation and optimization harness for cache-equipped aerial base
/// stations: placement, content caching and user association.
#[derive(Parser)]
#[command(name = "aircache", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment plan and write results, summary and manifest CSVs.
    Run(RunArgs),
    /// Aggregate a results CSV into per-point means and deviations.
    Summarize(SummarizeArgs),
    /// Compare the iterative solver against the exhaustive oracle per seed.
    OracleCheck(OracleArgs),
    /// Optimize one instance and dump its state and traces as CSVs.
    DumpState(DumpArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (TOML). Defaults apply for missing keys.
    #[arg(long, env = "AIRCACHE_CONFIG")]
    config: Option<PathBuf>,
    /// Base seed; defaults to the configured seed.
    #[arg(long, env = "AIRCACHE_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "AIRCACHE_OUT", default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Sweep specification, e.g. `cache_bits=60e6,80e6,100e6`.
    #[arg(long, env = "AIRCACHE_SWEEP")]
    sweep: Option<String>,
    /// Comma-separated algorithms: proposed, classic, random, oracle.
    #[arg(long, env = "AIRCACHE_ALGOS", default_value = "proposed,classic,random")]
    algos: String,
    /// Replications per sweep point.
    #[arg(long, env = "AIRCACHE_REPS", default_value_t = 1)]
    reps: u32,
}

#[derive(Args)]
struct SummarizeArgs {
    /// Results CSV produced by `run`.
    results: PathBuf,
    /// Output directory; prints to stdout when omitted.
    #[arg(long, env = "AIRCACHE_OUT")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Seeds to check.
    #[arg(long, env = "AIRCACHE_REPS", default_value_t = 5)]
    reps: u32,
}

#[derive(Args)]
struct DumpArgs {
    #[command(flatten)]
    common: CommonArgs,
}

fn load_config(path: &Option<PathBuf>) -> Result<SimConfig> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))?;
            Ok(SimConfig::from_toml_str(&text)?)
        }
        None => Ok(SimConfig::default()),
    }
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn cmd_run(args: RunArgs) -> Result<i32> {
    let started = Instant::now();
    let cfg = load_config(&args.common.config)?;
    let mut plan = ExperimentPlan::new(cfg);
    if let Some(seed) = args.common.seed {
        plan.base_seed = seed;
    }
    plan.replications = args.reps;
    if let Some(spec) = &args.sweep {
        plan.sweep = Some(Sweep::parse(spec)?);
    }
    plan.algorithms = args
        .algos
        .split(',')
        .map(|s| s.trim().parse::<Algorithm>())
        .collect::<aircache_core::Result<Vec<_>>>()?;

    let output = runner::run(&plan)?;
    let summary = runner::summarize(&output.cells)?;
    let dir = &args.common.out;
    write_out(dir, "results.csv", &report::results_csv(&output.cells))?;
    write_out(dir, "summary.csv", &report::summary_csv(&summary))?;
    write_out(
        dir,
        "manifest.json",
        &report::manifest_json(&plan, &output.cells, started.elapsed().as_secs_f64()),
    )?;

    if output.failures > 0 {
        eprintln!(
            "{} of {} cells failed; see the status column",
            output.failures,
            output.cells.len()
        );
        return Ok(1);
    }
    Ok(0)
}

fn cmd_summarize(args: SummarizeArgs) -> Result<i32> {
    let text = fs::read_to_string(&args.results)
        .with_context(|| format!("reading {}", args.results.display()))?;
    let cells = report::parse_results_csv(&text)?;
    let summary = report::summary_csv(&runner::summarize(&cells)?);
    match args.out {
        Some(dir) => write_out(&dir, "summary.csv", &summary)?,
        None => print!("{summary}"),
    }
    Ok(0)
}

fn cmd_oracle_check(args: OracleArgs) -> Result<i32> {
    let cfg = load_config(&args.common.config)?;
    let base_seed = args.common.seed.unwrap_or(cfg.network.seed);
    let params = JointParams::from(&cfg.solver);
    let mut worst: f64 = 0.0;
    let mut rows = String::from("seed,proposed_avg_mos,oracle_avg_mos,gap\n");
    println!("{:>6} {:>14} {:>14} {:>10}", "seed", "proposed", "oracle", "gap");
    for r in 0..args.reps {
        let seed = base_seed ^ aircache_core::rng::mix64(u64::from(r).wrapping_add(1));
        let inst = Instance::generate(&cfg, seed)?;
        let (state, _) = joint::optimize(&inst, &params)?;
        let oracle = joint::exhaustive_oracle(&inst, params.oracle_cap)?;
        let proposed_mos = qoe::average_mos(&inst, &state)?;
        let oracle_mos = qoe::average_mos(&inst, &oracle)?;
        let gap = oracle_mos - proposed_mos;
        worst = worst.max(gap);
        println!("{seed:>6} {proposed_mos:>14.6} {oracle_mos:>14.6} {gap:>10.6}");
        rows.push_str(&format!(
            "{seed},{},{},{}\n",
            report::sig9(proposed_mos),
            report::sig9(oracle_mos),
            report::sig9(gap)
        ));
    }
    println!("worst gap over {} seeds: {worst:.6}", args.reps);
    write_out(&args.common.out, "oracle_check.csv", &rows)?;
    Ok(0)
}

fn cmd_dump_state(args: DumpArgs) -> Result<i32> {
    let cfg = load_config(&args.common.config)?;
    let seed = args.common.seed.unwrap_or(cfg.network.seed);
    let inst = Instance::generate(&cfg, seed)?;
    let params = JointParams::from(&cfg.solver);
    let (state, trace) = joint::optimize(&inst, &params)?;

    let dir = &args.common.out;
    write_out(dir, "deployment.csv", &dump::deployment_csv(&inst, &state))?;
    write_out(dir, "caches.csv", &dump::caches_csv(&state))?;
    write_out(dir, "association.csv", &dump::association_csv(&inst, &state))?;
    write_out(dir, "joint_trace.csv", &dump::joint_trace_csv(&trace))?;
    write_out(dir, "pathloss.csv", &dump::pathloss_csv(&inst))?;
    let step = StepParams::from(&cfg.solver);
    write_out(dir, "dual_trace.csv", &dump::dual_trace_csv(&inst, &state, &step)?)?;
    let swap_cap = cfg.solver.swap_cap_factor * inst.uav_count() * inst.candidate_count();
    write_out(dir, "swap_log.csv", &dump::swap_log_csv(&inst, &state, swap_cap)?)?;
    println!(
        "final score {:.6}, average opinion score {:.6}, offloading {:.6}, {} outer iterations",
        qoe::objective(&inst, &state)?,
        qoe::average_mos(&inst, &state)?,
        qoe::offloading_ratio(&state, &inst.requests),
        trace.outer_iterations()
    );
    Ok(0)
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Summarize(args) => cmd_summarize(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
        Command::DumpState(args) => cmd_dump_state(args),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(2);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }
}
