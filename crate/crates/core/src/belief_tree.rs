//! Exact Bayes-optimal planning on tiny instances by backward induction over
//! the belief tree: each node carries the current state and the posterior
//! weights over the member MDPs, updated by Bayes rule on observed
//! transitions. Exponential in the horizon; guarded by a node-count estimate.
//! Used as the oracle that the greedy set-planner is measured against.

use crate::belief::weight_l1_distance;
use crate::dp::check_discount;
use crate::error::{Error, Result};
use crate::mdp::argmax;
use crate::planner::WeightedMdpSet;
use crate::scalar::Scalar;

/// Reject instances whose estimated belief-tree size exceeds this.
pub const MAX_TREE_NODES: u64 = 1_000_000;

/// One decision node of the optimal policy tree. Children follow the chosen
/// action only, keyed by the observed next state.
#[derive(Clone, Debug)]
pub struct BeliefTreeNode<S> {
    pub state: usize,
    pub weights: Vec<S>,
    pub action: usize,
    pub value: S,
    pub children: Vec<(usize, BeliefTreeNode<S>)>,
}

/// Result of [`bayes_optimal_tiny`].
#[derive(Clone, Debug)]
pub struct BayesOptimalResult<S> {
    /// Optimal expected utility per start state.
    pub start_values: Vec<S>,
    /// Optimal history-dependent policy, one tree per start state.
    pub roots: Vec<BeliefTreeNode<S>>,
    /// Largest L1 distance between the root weights and any posterior
    /// reachable within the horizon (over all actions, not just optimal
    /// ones). This is the tightest drift bound the gap theorem accepts.
    pub max_weight_drift: S,
}

struct TreeSolver<'a, S> {
    set: &'a WeightedMdpSet<S>,
    gamma: S,
    horizon: usize,
    max_drift: S,
}

impl<S: Scalar> TreeSolver<'_, S> {
    fn solve(&mut self, state: usize, weights: &[S], t: usize) -> (S, Option<BeliefTreeNode<S>>) {
        if t == self.horizon {
            return (S::zero(), None);
        }
        let n_states = self.set.n_states();
        let n_actions = self.set.n_actions();
        let mut q_values = Vec::with_capacity(n_actions);
        let mut subtrees: Vec<Vec<(usize, BeliefTreeNode<S>)>> = Vec::with_capacity(n_actions);
        for a in 0..n_actions {
            let mut reward = S::zero();
            for (m, &w) in weights.iter().enumerate() {
                reward = reward + w * self.set.mdp(m).mean_reward(state, a);
            }
            let mut future = S::zero();
            let mut children = Vec::new();
            for next in 0..n_states {
                // Predictive probability of observing `next`.
                let mut p_next = S::zero();
                for (m, &w) in weights.iter().enumerate() {
                    p_next = p_next + w * self.set.mdp(m).transition(state, a, next);
                }
                if p_next <= S::zero() {
                    continue;
                }
                // Bayes rule on the observed transition.
                let posterior: Vec<S> = weights
                    .iter()
                    .enumerate()
                    .map(|(m, &w)| w * self.set.mdp(m).transition(state, a, next) / p_next)
                    .collect();
                let drift = weight_l1_distance(self.set.weights(), &posterior)
                    .expect("posterior keeps the set's length");
                self.max_drift = self.max_drift.max(drift);
                let (child_value, child) = self.solve(next, &posterior, t + 1);
                future = future + p_next * child_value;
                if let Some(node) = child {
                    children.push((next, node));
                }
            }
            q_values.push(reward + self.gamma * future);
            subtrees.push(children);
        }
        let best = argmax(q_values.iter().copied());
        let value = q_values[best];
        let node = BeliefTreeNode {
            state,
            weights: weights.to_vec(),
            action: best,
            value,
            children: std::mem::take(&mut subtrees[best]),
        };
        (value, Some(node))
    }
}

/// Exact Bayes-optimal value (over history-dependent policies) for a belief
/// with finite support, per start state, with the optimal policy tree and
/// the maximum posterior drift encountered.
pub fn bayes_optimal_tiny<S: Scalar>(
    set: &WeightedMdpSet<S>,
    gamma: S,
    horizon: usize,
) -> Result<BayesOptimalResult<S>> {
    check_discount(gamma, true)?;
    if horizon == 0 {
        return Err(Error::InvalidHorizon(0));
    }
    let branches = (set.n_states() * set.n_actions()) as f64;
    let estimated = set.len() as f64 * branches.powi(horizon as i32);
    if !estimated.is_finite() || estimated > MAX_TREE_NODES as f64 {
        return Err(Error::InstanceTooLarge {
            estimated: if estimated.is_finite() {
                estimated as u64
            } else {
                u64::MAX
            },
            limit: MAX_TREE_NODES,
        });
    }
    let mut solver = TreeSolver {
        set,
        gamma,
        horizon,
        max_drift: S::zero(),
    };
    let mut start_values = Vec::with_capacity(set.n_states());
    let mut roots = Vec::with_capacity(set.n_states());
    for s in 0..set.n_states() {
        let (value, node) = solver.solve(s, set.weights(), 0);
        start_values.push(value);
        roots.push(node.expect("horizon >= 1 always yields a root"));
    }
    Ok(BayesOptimalResult {
        start_values,
        roots,
        max_weight_drift: solver.max_drift,
    })
}
