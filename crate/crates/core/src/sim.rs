//! Episode simulation with common random numbers: the environment stream for
//! a given (seed, run) is fixed no matter which agent is playing, so agent
//! comparisons share every environment draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::agents::{Agent, AgentConfig};
use crate::belief::DirichletBetaBelief;
use crate::dp::finite_horizon_backup;
use crate::error::{Error, Result};
use crate::mdp::{FiniteMdp, StationaryPolicy};
use crate::rng::{derive_seed, STREAM_AGENT, STREAM_ENV};
use crate::scalar::Scalar;

/// What plays the episode: a learning agent built from a config, or a fixed
/// stationary policy (the oracle reference).
#[derive(Clone, Debug)]
pub enum EpisodeAgent<S> {
    Learning(AgentConfig<S>),
    Fixed { policy: StationaryPolicy, gamma: S },
}

impl<S: Scalar> EpisodeAgent<S> {
    pub fn gamma(&self) -> S {
        match self {
            EpisodeAgent::Learning(config) => config.gamma,
            EpisodeAgent::Fixed { gamma, .. } => *gamma,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord<S> {
    pub state: usize,
    pub action: usize,
    pub reward: S,
}

/// Full trace of one simulated run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord<S> {
    pub run_index: u64,
    pub seed: u64,
    pub steps: Vec<StepRecord<S>>,
    /// Sum of rewards over the horizon.
    pub total_reward: S,
    /// Sum of `gamma^(t-1) r_t` with steps counted from 1.
    pub discounted_utility: S,
}

/// Samples a successor from a probability row using one uniform draw.
pub(crate) fn sample_categorical<S: Scalar>(row: &[S], rng: &mut ChaCha8Rng) -> usize {
    let u = S::sample_unit(rng);
    let mut acc = S::zero();
    let mut fallback = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > S::zero() {
            fallback = i;
            acc = acc + p;
            if u < acc {
                return i;
            }
        }
    }
    fallback
}

/// Simulates `horizon` steps of the true MDP against the given agent,
/// starting from state 0.
///
/// All environment stochasticity comes from a stream derived from `seed`
/// alone (one draw per step); the agent's internal randomness uses a second,
/// independent stream. Rewards emitted are the true MDP's mean rewards.
pub fn run_episode<S: Scalar>(
    true_mdp: &FiniteMdp<S>,
    agent_spec: &EpisodeAgent<S>,
    prior: &DirichletBetaBelief<S>,
    horizon: usize,
    run_index: u64,
    seed: u64,
) -> Result<RunRecord<S>> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon(0));
    }
    if prior.n_states() != true_mdp.n_states() || prior.n_actions() != true_mdp.n_actions() {
        return Err(Error::DimensionMismatch(
            "prior and true MDP shapes disagree".into(),
        ));
    }
    let mut env_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[STREAM_ENV]));
    let mut learner = match agent_spec {
        EpisodeAgent::Learning(config) => Some(Agent::new(
            config.clone(),
            prior.clone(),
            derive_seed(seed, &[STREAM_AGENT]),
        )?),
        EpisodeAgent::Fixed { policy, .. } => {
            if policy.n_states() != true_mdp.n_states() || policy.n_actions() > true_mdp.n_actions()
            {
                return Err(Error::DimensionMismatch(
                    "fixed policy does not fit the MDP's state/action spaces".into(),
                ));
            }
            None
        }
    };
    let gamma = agent_spec.gamma();
    let mut steps = Vec::with_capacity(horizon);
    let mut total = S::zero();
    let mut utility = S::zero();
    let mut discount = S::one();
    let mut state = 0usize;
    for _ in 0..horizon {
        let action = match (&mut learner, agent_spec) {
            (Some(agent), _) => agent.act(state)?,
            (None, EpisodeAgent::Fixed { policy, .. }) => policy.action(state),
            _ => unreachable!(),
        };
        let reward = true_mdp.mean_reward(state, action);
        let next = sample_categorical(true_mdp.transition_row(state, action), &mut env_rng);
        if let Some(agent) = &mut learner {
            agent.observe(state, action, reward, next)?;
        }
        steps.push(StepRecord {
            state,
            action,
            reward,
        });
        total = total + reward;
        utility = utility + discount * reward;
        discount = discount * gamma;
        state = next;
    }
    Ok(RunRecord {
        run_index,
        seed,
        steps,
        total_reward: total,
        discounted_utility: utility,
    })
}

/// Optimal expected total reward over exactly `horizon` undiscounted steps
/// from state 0. The reference value regret is measured against.
pub fn oracle_total_reward<S: Scalar>(mdp: &FiniteMdp<S>, horizon: usize) -> Result<S> {
    if horizon == 0 {
        return Err(Error::InvalidHorizon(0));
    }
    let (q, plan) = finite_horizon_backup(mdp, S::one(), horizon);
    Ok(q.q(0, 0, plan.action(0, 0)))
}
