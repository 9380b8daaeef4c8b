//! Command-line runner: value-bound sweeps over MDP ensembles, the chain
//! benchmark experiment, and single-shot posterior planning.
//!
//! Every command is deterministic given its `--seed`. Worker-thread count
//! can be pinned with the `BAYESMDP_THREADS` environment variable
//! (equivalently `RAYON_NUM_THREADS`).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use bayesmdp::{
    bound_sweep, experiment, msbi, random_ensemble, write_bound_sweep_csv, write_histogram_csv,
    write_runs_csv, write_summary_json, AgentName, Belief64, ExperimentConfig, FiniteMdp64,
};

#[derive(Parser)]
#[command(
    name = "bayesmdp",
    about = "Bayesian planning over ensembles of finite MDPs",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the expected-MDP / set-plan lower bounds and the expected-max
    /// upper bound over an 8-MDP ensemble, from uncertain to certain weights.
    Bounds(BoundsArgs),
    /// Run the chain benchmark experiment and write per-run CSV, a JSON
    /// summary, and per-cell histograms.
    Chain(ChainArgs),
    /// Plan from a serialized belief by sampled backwards induction and
    /// print the plan with its root values as JSON.
    Plan(PlanArgs),
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// MDP source: a JSON file with exactly 8 MDPs, or `random:SEED`.
    #[arg(long)]
    mdps: Option<String>,
    /// Interpolation grid size (>= 2).
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    horizon: Option<usize>,
    /// States per random-ensemble MDP.
    #[arg(long)]
    states: Option<usize>,
    /// Actions per random-ensemble MDP.
    #[arg(long)]
    actions: Option<usize>,
    /// Reward bound for random ensembles.
    #[arg(long)]
    r_max: Option<f64>,
    /// Dirichlet concentration per transition entry for random ensembles.
    #[arg(long)]
    concentration: Option<f64>,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying any of the above keys; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct BoundsFileConfig {
    mdps: Option<String>,
    grid: Option<usize>,
    gamma: Option<f64>,
    horizon: Option<usize>,
    states: Option<usize>,
    actions: Option<usize>,
    r_max: Option<f64>,
    concentration: Option<f64>,
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ChainArgs {
    /// Comma-separated agents: exploit, mcbrl, oracle.
    #[arg(long, value_delimiter = ',')]
    agents: Option<Vec<String>>,
    /// Comma-separated sample counts for the sampling agent.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    runs: Option<u64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    /// Steps between replans for the sampling agent.
    #[arg(long = "B")]
    replan_interval: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Bootstrap resample count.
    #[arg(long)]
    resamples: Option<usize>,
    /// Run the full-scale study (10^4 runs) unless --runs is given.
    #[arg(long, default_value_t = false)]
    paper_scale: bool,
    /// Output directory for runs.csv, summary.json, hist_<cell>.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying any of the above keys; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct ChainFileConfig {
    agents: Option<Vec<String>>,
    n: Option<Vec<usize>>,
    runs: Option<u64>,
    steps: Option<usize>,
    gamma: Option<f64>,
    #[serde(rename = "B")]
    replan_interval: Option<usize>,
    seed: Option<u64>,
    resamples: Option<usize>,
    paper_scale: Option<bool>,
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlanArgs {
    /// Serialized belief (JSON).
    #[arg(long)]
    belief: Option<PathBuf>,
    /// Posterior sample count; when omitted it is derived from --epsilon.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON file supplying any of the above keys; explicit flags win.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct PlanFileConfig {
    belief: Option<PathBuf>,
    n: Option<u64>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
}

fn load_config<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text =
                fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
            serde_json::from_str(&text).with_context(|| format!("parsing config {}", p.display()))
        }
    }
}

fn write_or_stdout(path: &Option<PathBuf>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, bytes).with_context(|| format!("writing {}", p.display()))?;
        }
        None => {
            std::io::stdout().write_all(bytes)?;
        }
    }
    Ok(())
}

fn load_ensemble(
    spec: &str,
    states: usize,
    actions: usize,
    r_max: f64,
    concentration: f64,
) -> Result<Vec<FiniteMdp64>> {
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .with_context(|| format!("invalid seed in `{spec}`"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        return Ok(random_ensemble(
            8,
            states,
            actions,
            r_max,
            concentration,
            &mut rng,
        ));
    }
    let text =
        fs::read_to_string(Path::new(spec)).with_context(|| format!("reading MDP file {spec}"))?;
    let mdps: Vec<FiniteMdp64> =
        serde_json::from_str(&text).with_context(|| format!("parsing MDP file {spec}"))?;
    Ok(mdps)
}

fn cmd_bounds(args: BoundsArgs) -> Result<()> {
    let file: BoundsFileConfig = load_config(&args.config)?;
    let mdps_spec = args
        .mdps
        .or(file.mdps)
        .context("--mdps <file|random:SEED> is required")?;
    let grid = args.grid.or(file.grid).unwrap_or(21);
    let gamma = args.gamma.or(file.gamma).unwrap_or(0.95);
    let horizon = args.horizon.or(file.horizon).unwrap_or(50);
    let states = args.states.or(file.states).unwrap_or(5);
    let actions = args.actions.or(file.actions).unwrap_or(4);
    let r_max = args.r_max.or(file.r_max).unwrap_or(1.0);
    let concentration = args
        .concentration
        .or(file.concentration)
        .unwrap_or(bayesmdp::bounds::ENSEMBLE_CONCENTRATION);
    let out = args.out.or(file.out);

    let mdps = load_ensemble(&mdps_spec, states, actions, r_max, concentration)?;
    let rows = bound_sweep(&mdps, grid, gamma, horizon)?;
    let mut buf = Vec::new();
    write_bound_sweep_csv(&rows, &mut buf)?;
    write_or_stdout(&out, &buf)
}

fn cmd_chain(args: ChainArgs) -> Result<()> {
    let file: ChainFileConfig = load_config(&args.config)?;
    let agent_names = args
        .agents
        .or(file.agents)
        .unwrap_or_else(|| vec!["exploit".into(), "mcbrl".into()]);
    let agents = agent_names
        .iter()
        .map(|name| name.parse::<AgentName>().map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    let paper_scale = args.paper_scale || file.paper_scale.unwrap_or(false);
    let runs = args
        .runs
        .or(file.runs)
        .unwrap_or(if paper_scale { 10_000 } else { 1000 });
    let config = ExperimentConfig::<f64> {
        agents,
        n_values: args.n.or(file.n).unwrap_or_else(|| vec![1, 8, 16]),
        runs,
        steps: args.steps.or(file.steps).unwrap_or(1000),
        gamma: args.gamma.or(file.gamma).unwrap_or(0.95),
        replan_interval: args.replan_interval.or(file.replan_interval).unwrap_or(20),
        seed: args.seed.or(file.seed).unwrap_or(42),
        resamples: args.resamples.or(file.resamples).unwrap_or(10_000),
        ci_level: 0.95,
        histogram_bins: 25,
        vi_tolerance: 1e-6,
        plan_horizon: None,
    };
    let out_dir = args.out.or(file.out).context("--out DIR is required")?;
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;

    let result = experiment(&bayesmdp::chain_task(), &bayesmdp::chain_prior(), &config)?;

    let mut runs_csv = Vec::new();
    write_runs_csv(&result, &mut runs_csv)?;
    fs::write(out_dir.join("runs.csv"), &runs_csv)?;

    let mut summary = Vec::new();
    write_summary_json(&result, &mut summary)?;
    fs::write(out_dir.join("summary.json"), &summary)?;

    for cell in &result.cells {
        let mut hist = Vec::new();
        write_histogram_csv(cell, &mut hist)?;
        fs::write(out_dir.join(format!("hist_{}.csv", cell.name)), &hist)?;
    }

    eprintln!(
        "wrote {} cells x {} runs to {}",
        result.cells.len(),
        config.runs,
        out_dir.display()
    );
    Ok(())
}

fn cmd_plan(args: PlanArgs) -> Result<()> {
    let file: PlanFileConfig = load_config(&args.config)?;
    let belief_path = args
        .belief
        .or(file.belief)
        .context("--belief <file> is required")?;
    let n = args.n.or(file.n);
    let gamma = args.gamma.or(file.gamma).unwrap_or(0.95);
    let epsilon = args.epsilon.or(file.epsilon).unwrap_or(0.1);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let out = args.out.or(file.out);

    let text = fs::read_to_string(&belief_path)
        .with_context(|| format!("reading belief {}", belief_path.display()))?;
    let belief: Belief64 = serde_json::from_str(&text)
        .with_context(|| format!("parsing belief {}", belief_path.display()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let result = msbi(&belief, gamma, epsilon, &mut rng, n)?;
    let mut doc = serde_json::to_vec_pretty(&result.to_json())?;
    doc.push(b'\n');
    write_or_stdout(&out, &doc)
}

fn run() -> Result<()> {
    if let Ok(threads) = std::env::var("BAYESMDP_THREADS") {
        if !threads.is_empty() && std::env::var_os("RAYON_NUM_THREADS").is_none() {
            std::env::set_var("RAYON_NUM_THREADS", threads);
        }
    }
    let cli = Cli::parse();
    match cli.command {
        Command::Bounds(args) => cmd_bounds(args),
        Command::Chain(args) => cmd_chain(args),
        Command::Plan(args) => cmd_plan(args),
    }
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ensemble_spec_parsing() {
        let random = load_ensemble("random:7", 4, 2, 1.0, 0.5).unwrap();
        assert_eq!(random.len(), 8);
        assert!(load_ensemble("random:x", 4, 2, 1.0, 0.5).is_err());
        assert!(load_ensemble("/nonexistent/mdps.json", 4, 2, 1.0, 0.5).is_err());
    }
}
