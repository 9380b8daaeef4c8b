//! Planning over a weighted set of MDPs: backwards induction that greedily
//! maximises the weight-averaged state-action value at every stage (MMBI),
//! its Monte-Carlo sampled variant over posterior draws (MSBI), and the
//! accompanying sample-count and gap-bound formulas.

use rand::Rng;
use serde::Serialize;

use crate::belief::DirichletBetaBelief;
use crate::dp::{check_discount, horizon_for_epsilon};
use crate::error::{Error, Result};
use crate::mdp::{argmax, FiniteMdp, MemorylessPlan, QTable, VTable};
use crate::scalar::{weight_sum_tolerance, Scalar};

/// Too many posterior samples to materialise; callers hitting this should
/// pass `n_override` (the tolerance-derived count grows cubically).
pub const MAX_SAMPLED_MDPS: u64 = 10_000_000;

/// A finite set of MDPs sharing dimensions and reward bound, with a
/// probability weight per member.
#[derive(Clone, Debug)]
pub struct WeightedMdpSet<S> {
    mdps: Vec<FiniteMdp<S>>,
    weights: Vec<S>,
}

impl<S: Scalar> WeightedMdpSet<S> {
    pub fn new(mdps: Vec<FiniteMdp<S>>, weights: Vec<S>) -> Result<Self> {
        let first = mdps.first().ok_or(Error::EmptySet)?;
        if let Some(bad) = mdps.iter().position(|m| !first.same_shape(m)) {
            return Err(Error::DimensionMismatch(format!(
                "MDP {bad} does not share the set's dimensions or r_max"
            )));
        }
        if weights.len() != mdps.len() {
            return Err(Error::InvalidWeights(format!(
                "{} weights for {} MDPs",
                weights.len(),
                mdps.len()
            )));
        }
        if weights.iter().any(|&w| w < S::zero() || !w.is_finite()) {
            return Err(Error::InvalidWeights(
                "weights must be nonnegative and finite".into(),
            ));
        }
        let total: S = weights.iter().copied().sum();
        if (total - S::one()).abs() > weight_sum_tolerance::<S>(weights.len()) {
            return Err(Error::InvalidWeights(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        Ok(Self { mdps, weights })
    }

    /// Uniform weights `1/n`.
    pub fn uniform(mdps: Vec<FiniteMdp<S>>) -> Result<Self> {
        let n = mdps.len();
        if n == 0 {
            return Err(Error::EmptySet);
        }
        let w = S::one() / S::of_usize(n);
        WeightedMdpSet::new(mdps, vec![w; n])
    }

    pub fn singleton(mdp: FiniteMdp<S>) -> Self {
        Self {
            mdps: vec![mdp],
            weights: vec![S::one()],
        }
    }

    pub fn len(&self) -> usize {
        self.mdps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mdps.is_empty()
    }

    pub fn mdp(&self, i: usize) -> &FiniteMdp<S> {
        &self.mdps[i]
    }

    pub fn mdps(&self) -> &[FiniteMdp<S>] {
        &self.mdps
    }

    pub fn weight(&self, i: usize) -> S {
        self.weights[i]
    }

    pub fn weights(&self) -> &[S] {
        &self.weights
    }

    pub fn n_states(&self) -> usize {
        self.mdps[0].n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.mdps[0].n_actions()
    }

    pub fn r_max(&self) -> S {
        self.mdps[0].r_max()
    }

    /// The single MDP whose transitions and rewards are the weight-averages
    /// of the members'.
    pub fn expected_mdp(&self) -> FiniteMdp<S> {
        let (n_states, n_actions) = (self.n_states(), self.n_actions());
        let mut transitions = vec![S::zero(); n_states * n_actions * n_states];
        let mut rewards = vec![S::zero(); n_states * n_actions];
        for (mdp, &w) in self.mdps.iter().zip(&self.weights) {
            for s in 0..n_states {
                for a in 0..n_actions {
                    let base = (s * n_actions + a) * n_states;
                    for (next, &p) in mdp.transition_row(s, a).iter().enumerate() {
                        transitions[base + next] = transitions[base + next] + w * p;
                    }
                    rewards[s * n_actions + a] =
                        rewards[s * n_actions + a] + w * mdp.mean_reward(s, a);
                }
            }
        }
        let mdp = FiniteMdp::new_unchecked(n_states, n_actions, self.r_max(), transitions, rewards)
            .expect("set dimensions are valid");
        debug_assert!(mdp.validate().is_empty());
        mdp
    }
}

/// Output of [`mmbi`]: the greedy plan, the weight-averaged state-action
/// values it maximised, and each member MDP's value table under the plan.
#[derive(Clone, Debug)]
pub struct MmbiResult<S> {
    pub plan: MemorylessPlan,
    /// `Q_t(s,a)` averaged over the set by weight, for `t` in `0..horizon`.
    pub belief_q: QTable<S>,
    /// Per-member `V_t(s)` under the returned plan, `t` in `0..=horizon`.
    pub per_mdp_v: Vec<VTable<S>>,
}

impl<S: Scalar> MmbiResult<S> {
    /// Stage-0 value per state of the returned plan under the set.
    pub fn root_values(&self) -> Vec<S> {
        (0..self.plan.n_states())
            .map(|s| self.belief_q.q(0, s, self.plan.action(0, s)))
            .collect()
    }

    /// JSON document with the plan and its stage-0 values per state.
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Doc<'a, S> {
            plan: &'a MemorylessPlan,
            root_values: Vec<S>,
        }
        serde_json::to_value(Doc {
            plan: &self.plan,
            root_values: self.root_values(),
        })
        .expect("result serialises")
    }
}

/// Backwards induction over a weighted MDP set.
///
/// Stage by stage (terminal values zero): every member backs up its own
/// `Q_t(s,a)` against its own `V_{t+1}`; the set-level value is the weight
/// average; the greedy action per state maximises that average with
/// lowest-index tie-break; then every member locally adopts
/// `V_t(s) = Q_t(s, a*(s))`. The resulting stage-0 values are the exact
/// expected utility of the returned plan under the set's weights.
pub fn mmbi<S: Scalar>(set: &WeightedMdpSet<S>, gamma: S, horizon: usize) -> Result<MmbiResult<S>> {
    check_discount(gamma, true)?;
    if horizon == 0 {
        return Err(Error::InvalidHorizon(0));
    }
    let (n_states, n_actions, n_mdps) = (set.n_states(), set.n_actions(), set.len());
    let mut belief_q = QTable::zeros(horizon, n_states, n_actions, gamma);
    let mut per_mdp_v: Vec<VTable<S>> = (0..n_mdps)
        .map(|_| VTable::zeros(horizon, n_states, gamma))
        .collect();
    let mut plan_actions = vec![0usize; horizon * n_states];
    // Scratch per-stage member values, laid out [m][s][a].
    let mut member_q = vec![S::zero(); n_mdps * n_states * n_actions];

    for t in (0..horizon).rev() {
        for (m, mdp) in set.mdps().iter().enumerate() {
            let v_next = &per_mdp_v[m];
            for s in 0..n_states {
                for a in 0..n_actions {
                    let mut future = S::zero();
                    for (next, &p) in mdp.transition_row(s, a).iter().enumerate() {
                        future = future + p * v_next.v(t + 1, next);
                    }
                    member_q[(m * n_states + s) * n_actions + a] =
                        mdp.mean_reward(s, a) + gamma * future;
                }
            }
        }
        for s in 0..n_states {
            for a in 0..n_actions {
                // Fixed reduction order over members keeps the result
                // schedule-independent.
                let mut avg = S::zero();
                for m in 0..n_mdps {
                    avg = avg + set.weight(m) * member_q[(m * n_states + s) * n_actions + a];
                }
                belief_q.set(t, s, a, avg);
            }
            let best = argmax((0..n_actions).map(|a| belief_q.q(t, s, a)));
            plan_actions[t * n_states + s] = best;
            for m in 0..n_mdps {
                per_mdp_v[m].set(t, s, member_q[(m * n_states + s) * n_actions + best]);
            }
        }
    }

    let plan = MemorylessPlan::new(horizon, n_states, n_actions, plan_actions)
        .expect("planner produces a well-formed plan");
    Ok(MmbiResult {
        plan,
        belief_q,
        per_mdp_v,
    })
}

/// Exact expected utility of a fixed plan under the set: the weight average
/// of each member's exact plan evaluation. Returns stage-0 values per state.
pub fn mixture_plan_value<S: Scalar>(
    set: &WeightedMdpSet<S>,
    plan: &MemorylessPlan,
    gamma: S,
) -> Result<Vec<S>> {
    let mut out = vec![S::zero(); set.n_states()];
    for (mdp, &w) in set.mdps().iter().zip(set.weights()) {
        let values = crate::dp::evaluate_plan_exact(mdp, plan, gamma)?;
        for (slot, v) in out.iter_mut().zip(values) {
            *slot = *slot + w * v;
        }
    }
    Ok(out)
}

/// Posterior sample count sufficient for expected loss `epsilon` relative to
/// planning on the full posterior: `ceil((3 r_max / (epsilon (1-gamma)))^3)`,
/// floored at 1.
pub fn sample_count<S: Scalar>(epsilon: S, gamma: S, r_max: S) -> Result<u64> {
    if epsilon <= S::zero() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            requirement: "positive",
            value: epsilon.as_f64(),
        });
    }
    check_discount(gamma, false)?;
    if r_max <= S::zero() {
        return Err(Error::InvalidParameter {
            name: "r_max",
            requirement: "positive",
            value: r_max.as_f64(),
        });
    }
    let base = (S::of_f64(3.0) * r_max / (epsilon * (S::one() - gamma))).as_f64();
    let n = base.powi(3).ceil();
    if !n.is_finite() || n >= u64::MAX as f64 {
        return Ok(u64::MAX);
    }
    Ok((n as u64).max(1))
}

/// Gap bound between the greedy set-plan and the Bayes-optimal policy when
/// the posterior drifts by at most `epsilon` in L1: `r_max * epsilon /
/// (1 - gamma)^2`.
pub fn bayes_gap_bound<S: Scalar>(epsilon: S, gamma: S, r_max: S) -> Result<S> {
    if epsilon < S::zero() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            requirement: "nonnegative",
            value: epsilon.as_f64(),
        });
    }
    check_discount(gamma, false)?;
    let one_minus = S::one() - gamma;
    Ok(r_max * epsilon / (one_minus * one_minus))
}

/// Draws `n` MDPs from the posterior into a uniformly weighted set.
pub fn sample_mdp_set<S: Scalar, R: Rng + ?Sized>(
    belief: &DirichletBetaBelief<S>,
    n: usize,
    rng: &mut R,
) -> Result<WeightedMdpSet<S>> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            requirement: "at least 1",
            value: 0.0,
        });
    }
    let mdps = (0..n).map(|_| belief.sample_mdp(rng)).collect();
    WeightedMdpSet::uniform(mdps)
}

/// Sampled backwards induction: draws `n` MDPs from the posterior (the
/// tolerance-derived count unless `n_override` is given), weights them
/// uniformly, and plans over them with the tolerance-derived horizon.
pub fn msbi<S: Scalar, R: Rng + ?Sized>(
    belief: &DirichletBetaBelief<S>,
    gamma: S,
    epsilon: S,
    rng: &mut R,
    n_override: Option<u64>,
) -> Result<MmbiResult<S>> {
    let n = match n_override {
        Some(n) => n,
        None => sample_count(epsilon, gamma, belief.r_max())?,
    };
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n_override",
            requirement: "at least 1",
            value: 0.0,
        });
    }
    if n > MAX_SAMPLED_MDPS {
        return Err(Error::InstanceTooLarge {
            estimated: n,
            limit: MAX_SAMPLED_MDPS,
        });
    }
    let horizon = horizon_for_epsilon(epsilon, gamma, belief.r_max())?;
    let set = sample_mdp_set(belief, n as usize, rng)?;
    mmbi(&set, gamma, horizon)
}
