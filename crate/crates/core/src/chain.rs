//! The 5-state chain exploration benchmark and its standard prior.
//!
//! Action FORWARD from state `i` moves one step up the chain (staying at the
//! end), paying 10 only from the last state; action RETURN jumps back to the
//! first state for an immediate 2. With probability 0.2 the agent slips and
//! the other action's effect (transition and reward) occurs. The recorded
//! mean rewards fold the slip in.

use crate::belief::DirichletBetaBelief;
use crate::mdp::FiniteMdp;
use crate::scalar::Scalar;

pub const CHAIN_STATES: usize = 5;
pub const CHAIN_ACTIONS: usize = 2;
pub const CHAIN_FORWARD: usize = 0;
pub const CHAIN_RETURN: usize = 1;
pub const CHAIN_SLIP: f64 = 0.2;
pub const CHAIN_R_MAX: f64 = 10.0;
/// Episodes start at the bottom of the chain.
pub const CHAIN_START_STATE: usize = 0;

/// Effect (successor, reward) of executing an action without slip.
fn effect(state: usize, action: usize) -> (usize, f64) {
    if action == CHAIN_FORWARD {
        let next = (state + 1).min(CHAIN_STATES - 1);
        let reward = if state == CHAIN_STATES - 1 { 10.0 } else { 0.0 };
        (next, reward)
    } else {
        (0, 2.0)
    }
}

/// The chain benchmark MDP.
pub fn chain_task<S: Scalar>() -> FiniteMdp<S> {
    let mut transitions = vec![S::zero(); CHAIN_STATES * CHAIN_ACTIONS * CHAIN_STATES];
    let mut rewards = vec![S::zero(); CHAIN_STATES * CHAIN_ACTIONS];
    let success = S::of_f64(1.0 - CHAIN_SLIP);
    let slip = S::of_f64(CHAIN_SLIP);
    for s in 0..CHAIN_STATES {
        for a in 0..CHAIN_ACTIONS {
            let (next, reward) = effect(s, a);
            let (slip_next, slip_reward) = effect(s, 1 - a);
            let base = (s * CHAIN_ACTIONS + a) * CHAIN_STATES;
            transitions[base + next] = transitions[base + next] + success;
            transitions[base + slip_next] = transitions[base + slip_next] + slip;
            rewards[s * CHAIN_ACTIONS + a] =
                success * S::of_f64(reward) + slip * S::of_f64(slip_reward);
        }
    }
    FiniteMdp::new(
        CHAIN_STATES,
        CHAIN_ACTIONS,
        S::of_f64(CHAIN_R_MAX),
        transitions,
        rewards,
    )
    .expect("chain construction is stochastic by construction")
}

/// The standard prior for learning the chain: Dirichlet mass `1/|S|` on every
/// transition entry and Beta(1, 1) on every normalised reward.
pub fn chain_prior<S: Scalar>() -> DirichletBetaBelief<S> {
    DirichletBetaBelief::new_prior(
        CHAIN_STATES,
        CHAIN_ACTIONS,
        S::one() / S::of_usize(CHAIN_STATES),
        S::one(),
        S::one(),
        S::of_f64(CHAIN_R_MAX),
    )
    .expect("chain prior parameters are positive")
}

#[cfg(test)]
#[allow(clippy::needless_range_loop)]
mod tests {
    use super::*;
    use crate::dp::solve_discounted;

    #[test]
    fn chain_is_a_valid_mdp() {
        assert!(chain_task::<f64>().validate().is_empty());
    }

    #[test]
    fn chain_rewards_fold_in_the_slip() {
        let chain = chain_task::<f64>();
        // Bottom state: FORWARD earns only the slipped RETURN reward.
        assert!((chain.mean_reward(0, CHAIN_FORWARD) - 0.4).abs() <= 1e-12);
        assert!((chain.mean_reward(0, CHAIN_RETURN) - 1.6).abs() <= 1e-12);
        // Top state: FORWARD pays 10 on success.
        assert!((chain.mean_reward(4, CHAIN_FORWARD) - 8.4).abs() <= 1e-12);
        assert!((chain.mean_reward(4, CHAIN_RETURN) - 3.6).abs() <= 1e-12);
    }

    /// Exact discounted evaluation of a stationary policy via Gaussian
    /// elimination on (I - gamma P) v = r; independent of the solvers.
    fn policy_value_linear(chain: &FiniteMdp<f64>, actions: &[usize], gamma: f64) -> Vec<f64> {
        let n = chain.n_states();
        let mut m = vec![vec![0.0f64; n + 1]; n];
        for s in 0..n {
            for next in 0..n {
                m[s][next] = -gamma * chain.transition(s, actions[s], next);
            }
            m[s][s] += 1.0;
            m[s][n] = chain.mean_reward(s, actions[s]);
        }
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).unwrap())
                .unwrap();
            m.swap(col, pivot);
            let diag = m[col][col];
            for entry in m[col].iter_mut() {
                *entry /= diag;
            }
            for row in 0..n {
                if row != col {
                    let factor = m[row][col];
                    for k in 0..=n {
                        m[row][k] -= factor * m[col][k];
                    }
                }
            }
        }
        (0..n).map(|s| m[s][n]).collect()
    }

    #[test]
    fn discounted_chain_policy_is_forward_everywhere() {
        let chain = chain_task::<f64>();
        let (q, policy) = solve_discounted(&chain, 0.95, 1e-6).unwrap();
        for s in 0..CHAIN_STATES {
            assert_eq!(policy.action(s), CHAIN_FORWARD);
        }
        // The returned Q is within the tolerance of the true Q*, computed
        // from the linear solve of the optimal policy's values.
        let v_star = policy_value_linear(&chain, &[CHAIN_FORWARD; 5], 0.95);
        for s in 0..CHAIN_STATES {
            for a in 0..CHAIN_ACTIONS {
                let mut backup = chain.mean_reward(s, a);
                for next in 0..CHAIN_STATES {
                    backup += 0.95 * chain.transition(s, a, next) * v_star[next];
                }
                assert!(
                    (q.q(s, a) - backup).abs() <= 1e-6,
                    "Q({s},{a}) = {} vs exact {backup}",
                    q.q(s, a)
                );
            }
        }
        // Oracle: exhaustive evaluation of all 2^5 stationary policies shows
        // all-FORWARD dominates pointwise.
        let forward_value = policy_value_linear(&chain, &[CHAIN_FORWARD; 5], 0.95);
        for code in 0..32usize {
            let actions: Vec<usize> = (0..5).map(|s| (code >> s) & 1).collect();
            let value = policy_value_linear(&chain, &actions, 0.95);
            for s in 0..5 {
                assert!(
                    forward_value[s] >= value[s] - 1e-9,
                    "policy {actions:?} beats FORWARD at state {s}"
                );
            }
        }
    }

    #[test]
    fn chain_prior_matches_the_standard_parameters() {
        let prior = chain_prior::<f64>();
        assert_eq!(prior.n_states(), 5);
        assert_eq!(prior.n_actions(), 2);
        assert_eq!(prior.r_max(), 10.0);
        for s in 0..5 {
            for a in 0..2 {
                for &c in prior.dirichlet_row(s, a) {
                    assert!((c - 0.2).abs() <= 1e-12);
                }
                assert_eq!(prior.beta(s, a), (1.0, 1.0));
            }
        }
    }
}
