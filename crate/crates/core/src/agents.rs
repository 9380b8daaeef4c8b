//! Online decision-makers over an evolving posterior: a sampling planner
//! that redraws a stationary policy from the posterior every `B` steps, and
//! the greedy expected-MDP baseline that replans every step.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::DirichletBetaBelief;
use crate::dp::{horizon_for_epsilon, value_iteration_sweeps};
use crate::error::{Error, Result};
use crate::mdp::{QMatrix, StationaryPolicy};
use crate::planner::{mmbi, sample_mdp_set};
use crate::scalar::Scalar;

/// Tolerance driving the default planning horizon of the sampling agent.
const DEFAULT_PLAN_EPSILON: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    /// Posterior-sampling planner: every `replan_interval` steps, draw
    /// `n_samples` MDPs from the posterior, plan over them, and act by the
    /// first step of the resulting plan until the next replan.
    Mcbrl,
    /// Greedy baseline: each step, solve the expected MDP under the current
    /// posterior and act greedily.
    Exploit,
}

impl std::fmt::Display for AgentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AgentKind::Mcbrl => write!(f, "mcbrl"),
            AgentKind::Exploit => write!(f, "exploit"),
        }
    }
}

fn default_n_samples() -> usize {
    1
}

fn default_replan_interval() -> usize {
    20
}

fn default_vi_tolerance<S: Scalar>() -> S {
    S::of_f64(1e-6)
}

/// Configuration for [`Agent`].
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "S: Scalar", deserialize = "S: Scalar"))]
pub struct AgentConfig<S> {
    pub kind: AgentKind,
    /// Posterior draws per replan (sampling agent only).
    #[serde(default = "default_n_samples")]
    pub n_samples: usize,
    /// Steps between replans (sampling agent only). The default of 20 is one
    /// effective horizon at gamma = 0.95.
    #[serde(default = "default_replan_interval")]
    pub replan_interval: usize,
    pub gamma: S,
    /// Planning horizon for the sampling agent; when absent it is derived
    /// from a fixed truncation tolerance of 0.01.
    #[serde(default)]
    pub plan_horizon: Option<usize>,
    /// Value-iteration accuracy for the greedy baseline.
    #[serde(default = "default_vi_tolerance")]
    pub vi_tolerance: S,
}

impl<S: Scalar> AgentConfig<S> {
    pub fn mcbrl(n_samples: usize, replan_interval: usize, gamma: S) -> Self {
        Self {
            kind: AgentKind::Mcbrl,
            n_samples,
            replan_interval,
            gamma,
            plan_horizon: None,
            vi_tolerance: default_vi_tolerance(),
        }
    }

    pub fn exploit(gamma: S) -> Self {
        Self {
            kind: AgentKind::Exploit,
            n_samples: default_n_samples(),
            replan_interval: default_replan_interval(),
            gamma,
            plan_horizon: None,
            vi_tolerance: default_vi_tolerance(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::InvalidParameter {
                name: "n_samples",
                requirement: "at least 1",
                value: 0.0,
            });
        }
        if self.replan_interval == 0 {
            return Err(Error::InvalidParameter {
                name: "replan_interval",
                requirement: "at least 1",
                value: 0.0,
            });
        }
        if !(self.gamma > S::zero() && self.gamma < S::one()) {
            return Err(Error::InvalidDiscount {
                gamma: self.gamma.as_f64(),
                expected: "(0,1)",
            });
        }
        if self.vi_tolerance <= S::zero() {
            return Err(Error::InvalidParameter {
                name: "vi_tolerance",
                requirement: "positive",
                value: self.vi_tolerance.as_f64(),
            });
        }
        Ok(())
    }
}

/// An online agent: owns its posterior, its policy state, and a private
/// random stream (environment randomness lives elsewhere, so swapping the
/// agent never perturbs environment draws).
#[derive(Clone, Debug)]
pub struct Agent<S> {
    config: AgentConfig<S>,
    belief: DirichletBetaBelief<S>,
    rng: ChaCha8Rng,
    policy: Option<StationaryPolicy>,
    warm_q: Option<QMatrix<S>>,
    steps_since_replan: usize,
    replan_count: usize,
}

impl<S: Scalar> Agent<S> {
    pub fn new(config: AgentConfig<S>, prior: DirichletBetaBelief<S>, seed: u64) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            belief: prior,
            rng: ChaCha8Rng::seed_from_u64(seed),
            policy: None,
            warm_q: None,
            steps_since_replan: 0,
            replan_count: 0,
        })
    }

    pub fn config(&self) -> &AgentConfig<S> {
        &self.config
    }

    pub fn belief(&self) -> &DirichletBetaBelief<S> {
        &self.belief
    }

    /// Number of replans performed so far (sampling agent).
    pub fn replan_count(&self) -> usize {
        self.replan_count
    }

    /// The stationary policy currently in force, if any.
    pub fn current_policy(&self) -> Option<&StationaryPolicy> {
        self.policy.as_ref()
    }

    fn plan_horizon(&self) -> Result<usize> {
        match self.config.plan_horizon {
            Some(t) => {
                if t == 0 {
                    Err(Error::InvalidHorizon(0))
                } else {
                    Ok(t)
                }
            }
            None => horizon_for_epsilon(
                S::of_f64(DEFAULT_PLAN_EPSILON),
                self.config.gamma,
                self.belief.r_max(),
            ),
        }
    }

    fn replan(&mut self) -> Result<()> {
        let horizon = self.plan_horizon()?;
        let set = sample_mdp_set(&self.belief, self.config.n_samples, &mut self.rng)?;
        let result = mmbi(&set, self.config.gamma, horizon)?;
        // Stationary extraction: the plan's first step, accepted loss.
        self.policy = Some(result.plan.first_step_policy());
        self.steps_since_replan = 0;
        self.replan_count += 1;
        Ok(())
    }

    /// Chooses the action for `state`.
    pub fn act(&mut self, state: usize) -> Result<usize> {
        if state >= self.belief.n_states() {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: state,
                bound: self.belief.n_states(),
            });
        }
        match self.config.kind {
            AgentKind::Mcbrl => {
                if self.policy.is_none() || self.steps_since_replan >= self.config.replan_interval {
                    self.replan()?;
                }
                Ok(self
                    .policy
                    .as_ref()
                    .expect("replan installs a policy")
                    .action(state))
            }
            AgentKind::Exploit => {
                let expected = self.belief.expected_mdp();
                let gamma = self.config.gamma;
                // Warm-started value iteration to the configured accuracy:
                // stop once the sweep delta guarantees the Q error is below
                // vi_tolerance.
                let stop = self.config.vi_tolerance * (S::one() - gamma) / gamma;
                let max_sweeps =
                    horizon_for_epsilon(self.config.vi_tolerance, gamma, expected.r_max())?;
                let q = value_iteration_sweeps(
                    &expected,
                    gamma,
                    self.warm_q.as_ref(),
                    max_sweeps,
                    Some(stop),
                );
                let action = q.greedy_action(state);
                self.warm_q = Some(q);
                Ok(action)
            }
        }
    }

    /// Records a transition: updates the posterior and advances the replan
    /// counter.
    pub fn observe(&mut self, s: usize, a: usize, reward: S, next: usize) -> Result<()> {
        self.belief = self.belief.update(s, a, reward, next)?;
        self.steps_since_replan += 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{chain_prior, chain_task};
    use crate::dp::solve_discounted;
    use crate::mdp::FiniteMdp;

    fn concentrated_belief(mdp: &FiniteMdp<f64>) -> DirichletBetaBelief<f64> {
        let (ns, na) = (mdp.n_states(), mdp.n_actions());
        let mut counts = vec![1e-9; ns * na * ns];
        let mut alpha = vec![1e-9; ns * na];
        let mut beta = vec![1e-9; ns * na];
        let scale = 1e9;
        for s in 0..ns {
            for a in 0..na {
                for next in 0..ns {
                    let p = mdp.transition(s, a, next);
                    if p > 0.0 {
                        counts[(s * na + a) * ns + next] = scale * p;
                    }
                }
                let frac = mdp.mean_reward(s, a) / mdp.r_max();
                alpha[s * na + a] = (scale * frac).max(1e-9);
                beta[s * na + a] = (scale * (1.0 - frac)).max(1e-9);
            }
        }
        DirichletBetaBelief::from_parts(ns, na, mdp.r_max(), counts, alpha, beta).unwrap()
    }

    #[test]
    fn exploit_with_point_mass_belief_acts_optimally() {
        let mdp = chain_task::<f64>();
        let belief = concentrated_belief(&mdp);
        let (_, optimal) = solve_discounted(&mdp, 0.95, 1e-9).unwrap();
        let mut agent = Agent::new(AgentConfig::exploit(0.95), belief, 0).unwrap();
        for s in 0..5 {
            assert_eq!(agent.act(s).unwrap(), optimal.action(s));
        }
    }

    #[test]
    fn mcbrl_with_point_mass_belief_acts_optimally() {
        let mdp = chain_task::<f64>();
        let belief = concentrated_belief(&mdp);
        let (_, optimal) = solve_discounted(&mdp, 0.95, 1e-9).unwrap();
        let mut agent = Agent::new(AgentConfig::mcbrl(2, 10, 0.95), belief, 3).unwrap();
        for s in 0..5 {
            assert_eq!(agent.act(s).unwrap(), optimal.action(s));
        }
    }

    #[test]
    fn replan_schedule_counts_exactly() {
        // B = 10 and 25 act/observe steps: replans fire at steps 1, 11, 21.
        let mut agent = Agent::new(AgentConfig::mcbrl(1, 10, 0.95), chain_prior(), 7).unwrap();
        let mdp = chain_task::<f64>();
        let mut s = 0usize;
        for _ in 0..25 {
            let a = agent.act(s).unwrap();
            let next = (s + 1) % 5;
            agent.observe(s, a, mdp.mean_reward(s, a), next).unwrap();
            s = next;
        }
        assert_eq!(agent.replan_count(), 3);
    }

    #[test]
    fn policy_is_constant_within_a_replan_window() {
        let mut agent = Agent::new(AgentConfig::mcbrl(2, 5, 0.95), chain_prior(), 9).unwrap();
        let mdp = chain_task::<f64>();
        let mut s = 0usize;
        let mut window_policy: Option<StationaryPolicy> = None;
        for step in 0..20 {
            let a = agent.act(s).unwrap();
            let policy = agent.current_policy().unwrap().clone();
            if step % 5 == 0 {
                window_policy = Some(policy);
            } else {
                assert_eq!(&policy, window_policy.as_ref().unwrap());
            }
            let next = (s + a) % 5;
            agent.observe(s, a, mdp.mean_reward(s, a), next).unwrap();
            s = next;
        }
    }

    #[test]
    fn identical_seeds_and_observations_give_identical_agents() {
        let mk = || Agent::new(AgentConfig::mcbrl(4, 5, 0.95), chain_prior(), 42).unwrap();
        let mut a = mk();
        let mut b = mk();
        let mdp = chain_task::<f64>();
        let mut s = 0usize;
        for _ in 0..30 {
            let act_a = a.act(s).unwrap();
            let act_b = b.act(s).unwrap();
            assert_eq!(act_a, act_b);
            let next = (s + act_a) % 5;
            let r = mdp.mean_reward(s, act_a);
            a.observe(s, act_a, r, next).unwrap();
            b.observe(s, act_b, r, next).unwrap();
            s = next;
        }
        assert_eq!(a.belief(), b.belief());
    }

    #[test]
    fn observe_increments_the_matching_dirichlet_count() {
        let mut agent = Agent::new(AgentConfig::exploit(0.95), chain_prior::<f64>(), 0).unwrap();
        let before = agent.belief().dirichlet_row(2, 1).to_vec();
        agent.observe(2, 1, 2.0, 0).unwrap();
        let after = agent.belief().dirichlet_row(2, 1);
        assert!((after[0] - (before[0] + 1.0)).abs() <= 1e-12);
        for next in 1..5 {
            assert_eq!(after[next], before[next]);
        }
    }

    #[test]
    fn observe_rejects_out_of_range_rewards() {
        let mut agent = Agent::new(AgentConfig::exploit(0.95), chain_prior(), 0).unwrap();
        assert!(matches!(
            agent.observe(0, 0, 11.0, 1),
            Err(Error::RewardOutOfRange { .. })
        ));
    }

    #[test]
    fn exploit_warm_start_matches_cold_solves_along_a_trajectory() {
        let mdp = chain_task::<f64>();
        let mut agent = Agent::new(AgentConfig::exploit(0.95), chain_prior(), 1).unwrap();
        let mut s = 0usize;
        for step in 0..60 {
            let a = agent.act(s).unwrap();
            let expected = agent.belief().expected_mdp();
            let (q_cold, _) = solve_discounted(&expected, 0.95, 1e-6).unwrap();
            assert_eq!(
                a,
                q_cold.greedy_action(s),
                "warm and cold greedy actions diverged at step {step}"
            );
            let next = (s + a + 1) % 5;
            agent.observe(s, a, mdp.mean_reward(s, a), next).unwrap();
            s = next;
        }
    }

    #[test]
    fn config_parses_from_json_with_defaults() {
        let config: AgentConfig<f64> =
            serde_json::from_str(r#"{"kind": "mcbrl", "gamma": 0.95}"#).unwrap();
        assert_eq!(config.kind, AgentKind::Mcbrl);
        assert_eq!(config.n_samples, 1);
        assert_eq!(config.replan_interval, 20);
        assert_eq!(config.plan_horizon, None);
        assert_eq!(config.vi_tolerance, 1e-6);
        let full: AgentConfig<f64> = serde_json::from_str(
            r#"{"kind": "exploit", "gamma": 0.9, "vi_tolerance": 1e-8, "n_samples": 4}"#,
        )
        .unwrap();
        assert_eq!(full.kind, AgentKind::Exploit);
        assert_eq!(full.vi_tolerance, 1e-8);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(Agent::new(AgentConfig::mcbrl(0, 10, 0.9), chain_prior::<f64>(), 0).is_err());
        assert!(Agent::new(AgentConfig::mcbrl(1, 0, 0.9), chain_prior::<f64>(), 0).is_err());
        assert!(Agent::new(AgentConfig::exploit(1.0), chain_prior::<f64>(), 0).is_err());
    }
}
