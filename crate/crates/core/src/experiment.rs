//! The benchmark experiment: grids of (agent, sample-count) cells over
//! shared seeds, reduced to regret reports, bootstrap intervals, percentile
//! intervals, and histograms, with CSV/JSON emission.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agents::AgentConfig;
use crate::belief::DirichletBetaBelief;
use crate::dp::solve_discounted;
use crate::error::{Error, Result};
use crate::mdp::FiniteMdp;
use crate::rng::{derive_seed, STREAM_BOOTSTRAP};
use crate::scalar::Scalar;
use crate::sim::{oracle_total_reward, run_episode, EpisodeAgent};
use crate::stats::{bootstrap_ci, histogram, percentile_interval, Histogram};

/// Agents the experiment can field. `Oracle` plays the true MDP's optimal
/// stationary policy and anchors regret near zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentName {
    Exploit,
    Mcbrl,
    Oracle,
}

impl std::str::FromStr for AgentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exploit" => Ok(AgentName::Exploit),
            "mcbrl" => Ok(AgentName::Mcbrl),
            "oracle" => Ok(AgentName::Oracle),
            other => Err(Error::InvalidWeights(format!(
                "unknown agent name `{other}` (expected exploit, mcbrl, or oracle)"
            ))),
        }
    }
}

impl std::fmt::Display for AgentName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AgentName::Exploit => write!(f, "exploit"),
            AgentName::Mcbrl => write!(f, "mcbrl"),
            AgentName::Oracle => write!(f, "oracle"),
        }
    }
}

fn default_n_values() -> Vec<usize> {
    vec![1, 8, 16]
}

fn default_runs() -> u64 {
    1000
}

fn default_steps() -> usize {
    1000
}

fn default_replan_interval() -> usize {
    20
}

fn default_seed() -> u64 {
    42
}

fn default_resamples() -> usize {
    10_000
}

fn default_ci_level<S: Scalar>() -> S {
    S::of_f64(0.95)
}

fn default_histogram_bins() -> usize {
    25
}

fn default_vi_tolerance<S: Scalar>() -> S {
    S::of_f64(1e-6)
}

/// Experiment configuration; mirrors the CLI flags one to one.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct ExperimentConfig<S> {
    pub agents: Vec<AgentName>,
    /// Sample counts; one cell per value for the sampling agent.
    #[serde(default = "default_n_values")]
    pub n_values: Vec<usize>,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    pub gamma: S,
    #[serde(default = "default_replan_interval")]
    pub replan_interval: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_resamples")]
    pub resamples: usize,
    #[serde(default = "default_ci_level")]
    pub ci_level: S,
    #[serde(default = "default_histogram_bins")]
    pub histogram_bins: usize,
    #[serde(default = "default_vi_tolerance")]
    pub vi_tolerance: S,
    #[serde(default)]
    pub plan_horizon: Option<usize>,
}

impl<S: Scalar> ExperimentConfig<S> {
    pub fn validate(&self) -> Result<()> {
        if self.agents.is_empty() {
            return Err(Error::InvalidWeights("no agents configured".into()));
        }
        if self.runs == 0 {
            return Err(Error::InvalidParameter {
                name: "runs",
                requirement: "at least 1",
                value: 0.0,
            });
        }
        if self.steps == 0 {
            return Err(Error::InvalidHorizon(0));
        }
        if self.agents.contains(&AgentName::Mcbrl)
            && (self.n_values.is_empty() || self.n_values.contains(&0))
        {
            return Err(Error::InvalidParameter {
                name: "n_values",
                requirement: "nonempty, all at least 1",
                value: 0.0,
            });
        }
        if !(self.gamma > S::zero() && self.gamma < S::one()) {
            return Err(Error::InvalidDiscount {
                gamma: self.gamma.as_f64(),
                expected: "(0,1)",
            });
        }
        Ok(())
    }
}

/// Regret of one cell against the oracle total reward.
#[derive(Clone, Debug, Serialize)]
pub struct RegretReport<S> {
    pub oracle_total: S,
    pub mean_total: S,
    pub regret: S,
    pub ci_low: S,
    pub ci_high: S,
}

/// Reduced results for one (agent, n) cell.
#[derive(Clone, Debug)]
pub struct CellResult<S> {
    /// Cell label, e.g. `exploit` or `mcbrl_n8`.
    pub name: String,
    pub agent: AgentName,
    /// Sample count for sampling-agent cells.
    pub n_samples: Option<usize>,
    pub regret: RegretReport<S>,
    pub mean_utility: S,
    pub utility_ci: (S, S),
    /// Trimmed interval containing at least 80% of the runs.
    pub percentile_80: (S, S),
    pub histogram: Histogram<S>,
    /// Per-run totals, utilities, and seeds in run order.
    pub totals: Vec<S>,
    pub utilities: Vec<S>,
    pub seeds: Vec<u64>,
}

#[derive(Clone, Debug)]
pub struct ExperimentResult<S> {
    pub oracle_total: S,
    pub cells: Vec<CellResult<S>>,
}

impl<S: Scalar> ExperimentResult<S> {
    pub fn cell(&self, name: &str) -> Option<&CellResult<S>> {
        self.cells.iter().find(|c| c.name == name)
    }
}

/// Label, agent kind, sample count, and episode driver for one cell.
type CellSpec<S> = (String, AgentName, Option<usize>, EpisodeAgent<S>);

fn cell_specs<S: Scalar>(
    true_mdp: &FiniteMdp<S>,
    config: &ExperimentConfig<S>,
) -> Result<Vec<CellSpec<S>>> {
    let mut cells = Vec::new();
    for agent in &config.agents {
        match agent {
            AgentName::Exploit => {
                let mut cfg = AgentConfig::exploit(config.gamma);
                cfg.vi_tolerance = config.vi_tolerance;
                cells.push((
                    "exploit".to_string(),
                    *agent,
                    None,
                    EpisodeAgent::Learning(cfg),
                ));
            }
            AgentName::Mcbrl => {
                for &n in &config.n_values {
                    let mut cfg = AgentConfig::mcbrl(n, config.replan_interval, config.gamma);
                    cfg.plan_horizon = config.plan_horizon;
                    cells.push((
                        format!("mcbrl_n{n}"),
                        *agent,
                        Some(n),
                        EpisodeAgent::Learning(cfg),
                    ));
                }
            }
            AgentName::Oracle => {
                let (_, policy) = solve_discounted(true_mdp, config.gamma, S::of_f64(1e-9))?;
                cells.push((
                    "oracle".to_string(),
                    *agent,
                    None,
                    EpisodeAgent::Fixed {
                        policy,
                        gamma: config.gamma,
                    },
                ));
            }
        }
    }
    Ok(cells)
}

/// Runs every configured cell over shared per-run seeds (common random
/// numbers: the environment stream for run `i` is identical in every cell)
/// and reduces to summary statistics in run-index order.
pub fn experiment<S: Scalar>(
    true_mdp: &FiniteMdp<S>,
    prior: &DirichletBetaBelief<S>,
    config: &ExperimentConfig<S>,
) -> Result<ExperimentResult<S>> {
    config.validate()?;
    let oracle_total = oracle_total_reward(true_mdp, config.steps)?;
    let run_seeds: Vec<u64> = (0..config.runs)
        .map(|i| derive_seed(config.seed, &[i]))
        .collect();
    let mut cells = Vec::new();
    for (cell_idx, (name, agent, n_samples, spec)) in
        cell_specs(true_mdp, config)?.into_iter().enumerate()
    {
        let records: Vec<(S, S)> = run_seeds
            .par_iter()
            .enumerate()
            .map(|(i, &seed)| {
                run_episode(true_mdp, &spec, prior, config.steps, i as u64, seed)
                    .map(|r| (r.total_reward, r.discounted_utility))
            })
            .collect::<Result<_>>()?;
        let totals: Vec<S> = records.iter().map(|&(t, _)| t).collect();
        let utilities: Vec<S> = records.iter().map(|&(_, u)| u).collect();
        let inv_runs = S::one() / S::of_usize(totals.len());
        let mean_total: S = totals.iter().copied().sum::<S>() * inv_runs;
        let mean_utility: S = utilities.iter().copied().sum::<S>() * inv_runs;
        let ci_seed = derive_seed(config.seed, &[STREAM_BOOTSTRAP, cell_idx as u64]);
        let (ci_low, ci_high) = bootstrap_ci(&totals, config.resamples, config.ci_level, ci_seed)?;
        let utility_ci = bootstrap_ci(
            &utilities,
            config.resamples,
            config.ci_level,
            derive_seed(ci_seed, &[1]),
        )?;
        let percentile_80 = percentile_interval(&totals, S::of_f64(0.10))?;
        let hist = histogram(&totals, config.histogram_bins)?;
        cells.push(CellResult {
            name,
            agent,
            n_samples,
            regret: RegretReport {
                oracle_total,
                mean_total,
                regret: oracle_total - mean_total,
                ci_low,
                ci_high,
            },
            mean_utility,
            utility_ci,
            percentile_80,
            histogram: hist,
            totals,
            utilities,
            seeds: run_seeds.clone(),
        });
    }
    Ok(ExperimentResult {
        oracle_total,
        cells,
    })
}

/// CSV with one row per run: `agent,n,seed,total_reward,utility`.
pub fn write_runs_csv<S: Scalar, W: std::io::Write>(
    result: &ExperimentResult<S>,
    out: &mut W,
) -> Result<()> {
    writeln!(out, "agent,n,seed,total_reward,utility")?;
    for cell in &result.cells {
        let n = cell.n_samples.map(|n| n.to_string()).unwrap_or_default();
        for i in 0..cell.totals.len() {
            writeln!(
                out,
                "{},{},{},{},{}",
                cell.agent, n, cell.seeds[i], cell.totals[i], cell.utilities[i]
            )?;
        }
    }
    Ok(())
}

/// Histogram CSV for one cell: `bin_low,bin_high,count`.
pub fn write_histogram_csv<S: Scalar, W: std::io::Write>(
    cell: &CellResult<S>,
    out: &mut W,
) -> Result<()> {
    writeln!(out, "bin_low,bin_high,count")?;
    for &(low, high, count) in &cell.histogram.bins {
        writeln!(out, "{low},{high},{count}")?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CellSummary<'a, S> {
    name: &'a str,
    agent: String,
    n: Option<usize>,
    runs: usize,
    mean_total_reward: S,
    mean_discounted_utility: S,
    regret: S,
    total_reward_ci: [S; 2],
    utility_ci: [S; 2],
    percentile_80: [S; 2],
}

#[derive(Serialize)]
struct SummaryDoc<'a, S> {
    oracle_total: S,
    cells: Vec<CellSummary<'a, S>>,
}

/// JSON summary: oracle total plus per-cell means, regret, and intervals.
pub fn write_summary_json<S: Scalar, W: std::io::Write>(
    result: &ExperimentResult<S>,
    out: &mut W,
) -> Result<()> {
    let doc = SummaryDoc {
        oracle_total: result.oracle_total,
        cells: result
            .cells
            .iter()
            .map(|cell| CellSummary {
                name: &cell.name,
                agent: cell.agent.to_string(),
                n: cell.n_samples,
                runs: cell.totals.len(),
                mean_total_reward: cell.regret.mean_total,
                mean_discounted_utility: cell.mean_utility,
                regret: cell.regret.regret,
                total_reward_ci: [cell.regret.ci_low, cell.regret.ci_high],
                utility_ci: [cell.utility_ci.0, cell.utility_ci.1],
                percentile_80: [cell.percentile_80.0, cell.percentile_80.1],
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut *out, &doc)?;
    writeln!(out)?;
    Ok(())
}
