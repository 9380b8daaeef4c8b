//! Bayesian planning and exploration over weighted ensembles of finite MDPs.
//!
//! The core pieces:
//!
//! - [`mdp`]: finite MDPs, plans, policies, and value containers.
//! - [`dp`]: single-MDP backwards induction and discounted value iteration.
//! - [`belief`]: conjugate Dirichlet/Beta posterior over MDPs with sampling.
//! - [`planner`]: greedy backwards induction over a weighted MDP set (the
//!   plan it returns is exactly evaluated, so its stage-0 value is a true
//!   lower bound on the Bayes-optimal value), plus the sampled variant.
//! - [`belief_tree`]: exact Bayes-optimal oracle for tiny instances.
//! - [`bounds`]: the expected-MDP and set-plan lower bounds against the
//!   expected-max upper bound, swept along an uncertainty interpolation.
//! - [`agents`]: online posterior-sampling and expected-MDP-greedy agents.
//! - [`chain`], [`sim`], [`stats`], [`experiment`]: the chain benchmark and
//!   the seeded evaluation harness (regret, bootstrap intervals,
//!   histograms).
//!
//! Everything numerical is generic over [`scalar::Scalar`] (`f32`/`f64`);
//! concrete aliases live at the crate root.

pub mod agents;
pub mod belief;
pub mod belief_tree;
pub mod bounds;
pub mod chain;
pub mod dp;
mod error;
pub mod experiment;
pub mod mdp;
pub mod planner;
pub mod rng;
pub mod scalar;
pub mod sim;
pub mod stats;

pub use agents::{Agent, AgentConfig, AgentKind};
pub use belief::{weight_l1_distance, DirichletBetaBelief};
pub use belief_tree::{bayes_optimal_tiny, BayesOptimalResult, BeliefTreeNode};
pub use bounds::{
    bound_sweep, lower_bound_emdp, lower_bound_mmbi, random_ensemble, upper_bound_expected_max,
    write_bound_sweep_csv, BoundSweepRow,
};
pub use chain::{chain_prior, chain_task};
pub use dp::{evaluate_plan_exact, horizon_for_epsilon, solve_discounted, solve_finite_horizon};
pub use error::{Error, Result};
pub use experiment::{
    experiment, write_histogram_csv, write_runs_csv, write_summary_json, AgentName, CellResult,
    ExperimentConfig, ExperimentResult, RegretReport,
};
pub use mdp::{FiniteMdp, MdpViolation, MemorylessPlan, QMatrix, QTable, StationaryPolicy, VTable};
pub use planner::{
    bayes_gap_bound, mixture_plan_value, mmbi, msbi, sample_count, sample_mdp_set, MmbiResult,
    WeightedMdpSet,
};
pub use scalar::Scalar;
pub use sim::{oracle_total_reward, run_episode, EpisodeAgent, RunRecord, StepRecord};
pub use stats::{bootstrap_ci, histogram, percentile_interval, Histogram};

pub type FiniteMdp32 = FiniteMdp<f32>;
pub type FiniteMdp64 = FiniteMdp<f64>;
pub type Belief32 = DirichletBetaBelief<f32>;
pub type Belief64 = DirichletBetaBelief<f64>;
pub type WeightedMdpSet32 = WeightedMdpSet<f32>;
pub type WeightedMdpSet64 = WeightedMdpSet<f64>;
pub type MmbiResult32 = MmbiResult<f32>;
pub type MmbiResult64 = MmbiResult<f64>;
