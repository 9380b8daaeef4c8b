//! Single-MDP dynamic programming: finite-horizon backwards induction,
//! discounted value iteration with a truncation-derived sweep count, and
//! exact evaluation of a fixed plan.

use crate::error::{Error, Result};
use crate::mdp::{argmax, FiniteMdp, MemorylessPlan, QMatrix, QTable, StationaryPolicy};
use crate::scalar::Scalar;

pub(crate) fn check_discount<S: Scalar>(gamma: S, allow_zero: bool) -> Result<()> {
    let ok = if allow_zero {
        gamma >= S::zero() && gamma < S::one()
    } else {
        gamma > S::zero() && gamma < S::one()
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidDiscount {
            gamma: gamma.as_f64(),
            expected: if allow_zero { "[0,1)" } else { "(0,1)" },
        })
    }
}

#[inline]
fn dot<S: Scalar>(row: &[S], values: &[S]) -> S {
    let mut acc = S::zero();
    for (p, v) in row.iter().zip(values) {
        acc = acc + *p * *v;
    }
    acc
}

/// Backwards induction without the `gamma < 1` guard; `gamma = 1` is used
/// internally for undiscounted total-reward horizons.
pub(crate) fn finite_horizon_backup<S: Scalar>(
    mdp: &FiniteMdp<S>,
    gamma: S,
    horizon: usize,
) -> (QTable<S>, MemorylessPlan) {
    let (n_states, n_actions) = (mdp.n_states(), mdp.n_actions());
    let mut q = QTable::zeros(horizon, n_states, n_actions, gamma);
    let mut plan_actions = vec![0usize; horizon * n_states];
    let mut v_next = vec![S::zero(); n_states];
    let mut v_now = vec![S::zero(); n_states];
    for t in (0..horizon).rev() {
        for s in 0..n_states {
            for a in 0..n_actions {
                let backup = mdp.mean_reward(s, a) + gamma * dot(mdp.transition_row(s, a), &v_next);
                q.set(t, s, a, backup);
            }
            let best = argmax((0..n_actions).map(|a| q.q(t, s, a)));
            plan_actions[t * n_states + s] = best;
            v_now[s] = q.q(t, s, best);
        }
        std::mem::swap(&mut v_next, &mut v_now);
    }
    let plan = MemorylessPlan::new(horizon, n_states, n_actions, plan_actions)
        .expect("solver produces a well-formed plan");
    (q, plan)
}

/// Finite-horizon optimal values and the greedy deterministic plan.
///
/// Terminal value is zero; ties in the argmax break towards the lowest
/// action index. The returned table satisfies
/// `Q_t(s,a) = r(s,a) + gamma * sum_s' P(s'|s,a) * max_a' Q_{t+1}(s',a')`.
pub fn solve_finite_horizon<S: Scalar>(
    mdp: &FiniteMdp<S>,
    gamma: S,
    horizon: usize,
) -> Result<(QTable<S>, MemorylessPlan)> {
    check_discount(gamma, true)?;
    if horizon == 0 {
        return Err(Error::InvalidHorizon(0));
    }
    Ok(finite_horizon_backup(mdp, gamma, horizon))
}

/// Sweep count sufficient for value-iteration truncation error `<= epsilon`:
/// the smallest `T` with `gamma^T * r_max / (1 - gamma) <= epsilon`, floored
/// at 1.
pub fn horizon_for_epsilon<S: Scalar>(epsilon: S, gamma: S, r_max: S) -> Result<usize> {
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
    let threshold = epsilon * (S::one() - gamma) / r_max;
    if threshold >= S::one() {
        return Ok(1);
    }
    let t = (threshold.ln() / gamma.ln()).ceil();
    Ok(t.to_usize().unwrap_or(usize::MAX).max(1))
}

/// Value iteration state shared with the warm-started variant used by the
/// online agents.
pub(crate) fn value_iteration_sweeps<S: Scalar>(
    mdp: &FiniteMdp<S>,
    gamma: S,
    init: Option<&QMatrix<S>>,
    max_sweeps: usize,
    stop_delta: Option<S>,
) -> QMatrix<S> {
    let (n_states, n_actions) = (mdp.n_states(), mdp.n_actions());
    let mut q = match init {
        Some(q0) => q0.clone(),
        None => QMatrix::zeros(n_states, n_actions),
    };
    let mut v: Vec<S> = (0..n_states).map(|s| q.v(s)).collect();
    for _ in 0..max_sweeps {
        let mut delta = S::zero();
        for s in 0..n_states {
            for a in 0..n_actions {
                let backup = mdp.mean_reward(s, a) + gamma * dot(mdp.transition_row(s, a), &v);
                delta = delta.max((backup - q.q(s, a)).abs());
                q.set(s, a, backup);
            }
        }
        for (s, slot) in v.iter_mut().enumerate() {
            *slot = q.v(s);
        }
        if let Some(bound) = stop_delta {
            if delta <= bound {
                break;
            }
        }
    }
    q
}

/// Discounted optimal values within `epsilon` (sup norm) and the greedy
/// stationary policy. Runs exactly `horizon_for_epsilon` sweeps from a zero
/// initial table.
pub fn solve_discounted<S: Scalar>(
    mdp: &FiniteMdp<S>,
    gamma: S,
    epsilon: S,
) -> Result<(QMatrix<S>, StationaryPolicy)> {
    check_discount(gamma, false)?;
    if epsilon <= S::zero() {
        return Err(Error::InvalidParameter {
            name: "epsilon",
            requirement: "positive",
            value: epsilon.as_f64(),
        });
    }
    let sweeps = horizon_for_epsilon(epsilon, gamma, mdp.r_max())?;
    let q = value_iteration_sweeps(mdp, gamma, None, sweeps, None);
    let policy = q.greedy_policy();
    Ok((q, policy))
}

/// Exact value of a fixed plan: `V_t(s) = r(s, pi_t(s)) + gamma * E V_{t+1}`
/// with zero terminal value; no maximisation. Returns the stage-0 values per
/// state. `gamma = 1` is accepted (plain expected total reward).
pub fn evaluate_plan_exact<S: Scalar>(
    mdp: &FiniteMdp<S>,
    plan: &MemorylessPlan,
    gamma: S,
) -> Result<Vec<S>> {
    if gamma < S::zero() || gamma > S::one() {
        return Err(Error::InvalidDiscount {
            gamma: gamma.as_f64(),
            expected: "[0,1]",
        });
    }
    if plan.n_states() != mdp.n_states() {
        return Err(Error::DimensionMismatch(format!(
            "plan is over {} states, MDP has {}",
            plan.n_states(),
            mdp.n_states()
        )));
    }
    if plan.n_actions() > mdp.n_actions() {
        return Err(Error::DimensionMismatch(format!(
            "plan allows {} actions, MDP has {}",
            plan.n_actions(),
            mdp.n_actions()
        )));
    }
    let n_states = mdp.n_states();
    let mut v_next = vec![S::zero(); n_states];
    let mut v_now = vec![S::zero(); n_states];
    for t in (0..plan.horizon()).rev() {
        for (s, slot) in v_now.iter_mut().enumerate() {
            let a = plan.action(t, s);
            *slot = mdp.mean_reward(s, a) + gamma * dot(mdp.transition_row(s, a), &v_next);
        }
        std::mem::swap(&mut v_next, &mut v_now);
    }
    Ok(v_next)
}
