//! Finite MDP representation and the policy/value containers used by the
//! dynamic-programming solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{prob_sum_tolerance, Scalar};

/// A finite MDP: dense transition tensor, mean immediate rewards, and the
/// reward-scale bound `r_max`. Rewards are represented by their means only;
/// every backup implemented here consumes nothing else.
///
/// Immutable after construction; all solver operations are pure functions.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMdp<S> {
    n_states: usize,
    n_actions: usize,
    r_max: S,
    /// P(s' | s, a), laid out `[s][a][s']`.
    transitions: Vec<S>,
    /// Expected immediate reward, laid out `[s][a]`.
    mean_rewards: Vec<S>,
}

/// One violated invariant found by [`FiniteMdp::validate`].
#[derive(Clone, Debug, PartialEq)]
pub enum MdpViolation {
    /// Transition row does not sum to 1 within tolerance.
    RowSum {
        state: usize,
        action: usize,
        sum: f64,
    },
    /// Negative transition probability.
    NegativeTransition {
        state: usize,
        action: usize,
        next: usize,
        value: f64,
    },
    /// Mean reward outside `[0, r_max]`.
    RewardRange {
        state: usize,
        action: usize,
        reward: f64,
    },
    /// `r_max` is not strictly positive.
    NonPositiveRewardBound { r_max: f64 },
}

impl std::fmt::Display for MdpViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MdpViolation::RowSum { state, action, sum } => {
                write!(f, "transition row ({state},{action}) sums to {sum}")
            }
            MdpViolation::NegativeTransition {
                state,
                action,
                next,
                value,
            } => write!(
                f,
                "transition ({state},{action})->{next} is negative: {value}"
            ),
            MdpViolation::RewardRange {
                state,
                action,
                reward,
            } => write!(
                f,
                "mean reward at ({state},{action}) out of range: {reward}"
            ),
            MdpViolation::NonPositiveRewardBound { r_max } => {
                write!(f, "r_max must be positive, got {r_max}")
            }
        }
    }
}

impl<S: Scalar> FiniteMdp<S> {
    /// Builds an MDP and checks every invariant, returning the full violation
    /// list on failure.
    pub fn new(
        n_states: usize,
        n_actions: usize,
        r_max: S,
        transitions: Vec<S>,
        mean_rewards: Vec<S>,
    ) -> Result<Self> {
        let mdp = Self::new_unchecked(n_states, n_actions, r_max, transitions, mean_rewards)?;
        let violations = mdp.validate();
        if violations.is_empty() {
            Ok(mdp)
        } else {
            Err(Error::InvalidMdp(violations))
        }
    }

    /// Builds an MDP checking only array shapes, not stochasticity. Intended
    /// for constructing candidates that will be passed to [`Self::validate`].
    pub fn new_unchecked(
        n_states: usize,
        n_actions: usize,
        r_max: S,
        transitions: Vec<S>,
        mean_rewards: Vec<S>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::DimensionMismatch(
                "n_states and n_actions must be positive".into(),
            ));
        }
        if transitions.len() != n_states * n_actions * n_states {
            return Err(Error::DimensionMismatch(format!(
                "transitions has {} entries, expected {}",
                transitions.len(),
                n_states * n_actions * n_states
            )));
        }
        if mean_rewards.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch(format!(
                "mean_rewards has {} entries, expected {}",
                mean_rewards.len(),
                n_states * n_actions
            )));
        }
        Ok(Self {
            n_states,
            n_actions,
            r_max,
            transitions,
            mean_rewards,
        })
    }

    /// Builds from nested `[s][a][s']` / `[s][a]` arrays (the JSON layout).
    pub fn from_nested(
        r_max: S,
        transitions: Vec<Vec<Vec<S>>>,
        mean_rewards: Vec<Vec<S>>,
    ) -> Result<Self> {
        let n_states = transitions.len();
        let n_actions = transitions.first().map_or(0, Vec::len);
        let mut flat_t = Vec::with_capacity(n_states * n_actions * n_states);
        for (s, per_action) in transitions.iter().enumerate() {
            if per_action.len() != n_actions {
                return Err(Error::DimensionMismatch(format!(
                    "transitions[{s}] has {} action rows, expected {n_actions}",
                    per_action.len()
                )));
            }
            for (a, row) in per_action.iter().enumerate() {
                if row.len() != n_states {
                    return Err(Error::DimensionMismatch(format!(
                        "transitions[{s}][{a}] has {} entries, expected {n_states}",
                        row.len()
                    )));
                }
                flat_t.extend_from_slice(row);
            }
        }
        let mut flat_r = Vec::with_capacity(n_states * n_actions);
        for (s, row) in mean_rewards.iter().enumerate() {
            if row.len() != n_actions {
                return Err(Error::DimensionMismatch(format!(
                    "mean_rewards[{s}] has {} entries, expected {n_actions}",
                    row.len()
                )));
            }
            flat_r.extend_from_slice(row);
        }
        if mean_rewards.len() != n_states {
            return Err(Error::DimensionMismatch(format!(
                "mean_rewards has {} state rows, expected {n_states}",
                mean_rewards.len()
            )));
        }
        Self::new(n_states, n_actions, r_max, flat_t, flat_r)
    }

    /// Reports every violated invariant; empty means the MDP is valid.
    pub fn validate(&self) -> Vec<MdpViolation> {
        let mut out = Vec::new();
        if self.r_max <= S::zero() {
            out.push(MdpViolation::NonPositiveRewardBound {
                r_max: self.r_max.as_f64(),
            });
        }
        let tol = prob_sum_tolerance::<S>(self.n_states);
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.transition_row(s, a);
                let mut sum = S::zero();
                for (next, &p) in row.iter().enumerate() {
                    if p < S::zero() {
                        out.push(MdpViolation::NegativeTransition {
                            state: s,
                            action: a,
                            next,
                            value: p.as_f64(),
                        });
                    }
                    sum = sum + p;
                }
                if (sum - S::one()).abs() > tol {
                    out.push(MdpViolation::RowSum {
                        state: s,
                        action: a,
                        sum: sum.as_f64(),
                    });
                }
                let r = self.mean_reward(s, a);
                if r < S::zero() || r > self.r_max {
                    out.push(MdpViolation::RewardRange {
                        state: s,
                        action: a,
                        reward: r.as_f64(),
                    });
                }
            }
        }
        out
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn r_max(&self) -> S {
        self.r_max
    }

    #[inline]
    pub fn transition(&self, s: usize, a: usize, next: usize) -> S {
        self.transitions[(s * self.n_actions + a) * self.n_states + next]
    }

    /// Probability row over successor states for `(s, a)`.
    #[inline]
    pub fn transition_row(&self, s: usize, a: usize) -> &[S] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.transitions[base..base + self.n_states]
    }

    #[inline]
    pub fn mean_reward(&self, s: usize, a: usize) -> S {
        self.mean_rewards[s * self.n_actions + a]
    }

    /// Identity-transition MDP with all-zero rewards; handy fixture.
    pub fn identity(n_states: usize, n_actions: usize, r_max: S) -> Self {
        let mut transitions = vec![S::zero(); n_states * n_actions * n_states];
        for s in 0..n_states {
            for a in 0..n_actions {
                transitions[(s * n_actions + a) * n_states + s] = S::one();
            }
        }
        Self {
            n_states,
            n_actions,
            r_max,
            transitions,
            mean_rewards: vec![S::zero(); n_states * n_actions],
        }
    }

    /// Checks another MDP shares this one's dimensions and reward bound.
    pub fn same_shape(&self, other: &Self) -> bool {
        self.n_states == other.n_states
            && self.n_actions == other.n_actions
            && self.r_max == other.r_max
    }
}

#[derive(Serialize, Deserialize)]
struct MdpDoc<S> {
    n_states: usize,
    n_actions: usize,
    r_max: S,
    transitions: Vec<Vec<Vec<S>>>,
    mean_rewards: Vec<Vec<S>>,
}

impl<S: Scalar> Serialize for FiniteMdp<S> {
    fn serialize<Ser: serde::Serializer>(
        &self,
        serializer: Ser,
    ) -> std::result::Result<Ser::Ok, Ser::Error> {
        let doc = MdpDoc {
            n_states: self.n_states,
            n_actions: self.n_actions,
            r_max: self.r_max,
            transitions: (0..self.n_states)
                .map(|s| {
                    (0..self.n_actions)
                        .map(|a| self.transition_row(s, a).to_vec())
                        .collect()
                })
                .collect(),
            mean_rewards: (0..self.n_states)
                .map(|s| {
                    (0..self.n_actions)
                        .map(|a| self.mean_reward(s, a))
                        .collect()
                })
                .collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for FiniteMdp<S> {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let doc = MdpDoc::<S>::deserialize(deserializer)?;
        let mdp = FiniteMdp::from_nested(doc.r_max, doc.transitions, doc.mean_rewards)
            .map_err(serde::de::Error::custom)?;
        if mdp.n_states != doc.n_states || mdp.n_actions != doc.n_actions {
            return Err(serde::de::Error::custom(
                "declared n_states/n_actions disagree with array shapes",
            ));
        }
        Ok(mdp)
    }
}

/// Deterministic non-stationary policy over a fixed horizon: one action per
/// `(t, s)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemorylessPlan {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    /// Laid out `[t][s]`.
    actions: Vec<usize>,
}

impl MemorylessPlan {
    pub fn new(
        horizon: usize,
        n_states: usize,
        n_actions: usize,
        actions: Vec<usize>,
    ) -> Result<Self> {
        if horizon == 0 {
            return Err(Error::InvalidHorizon(0));
        }
        if actions.len() != horizon * n_states {
            return Err(Error::DimensionMismatch(format!(
                "plan has {} entries, expected {}",
                actions.len(),
                horizon * n_states
            )));
        }
        if let Some(&bad) = actions.iter().find(|&&a| a >= n_actions) {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: bad,
                bound: n_actions,
            });
        }
        Ok(Self {
            horizon,
            n_states,
            n_actions,
            actions,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn action(&self, t: usize, s: usize) -> usize {
        self.actions[t * self.n_states + s]
    }

    /// The stationary policy given by the plan's first step.
    pub fn first_step_policy(&self) -> StationaryPolicy {
        StationaryPolicy {
            n_actions: self.n_actions,
            actions: self.actions[..self.n_states].to_vec(),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PlanDoc {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    actions: Vec<Vec<usize>>,
}

impl Serialize for MemorylessPlan {
    fn serialize<Ser: serde::Serializer>(
        &self,
        serializer: Ser,
    ) -> std::result::Result<Ser::Ok, Ser::Error> {
        let doc = PlanDoc {
            horizon: self.horizon,
            n_states: self.n_states,
            n_actions: self.n_actions,
            actions: (0..self.horizon)
                .map(|t| (0..self.n_states).map(|s| self.action(t, s)).collect())
                .collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MemorylessPlan {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let doc = PlanDoc::deserialize(deserializer)?;
        let flat: Vec<usize> = doc.actions.into_iter().flatten().collect();
        MemorylessPlan::new(doc.horizon, doc.n_states, doc.n_actions, flat)
            .map_err(serde::de::Error::custom)
    }
}

/// Deterministic stationary (time-invariant, memoryless) policy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StationaryPolicy {
    n_actions: usize,
    actions: Vec<usize>,
}

impl StationaryPolicy {
    pub fn new(n_actions: usize, actions: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = actions.iter().find(|&&a| a >= n_actions) {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: bad,
                bound: n_actions,
            });
        }
        Ok(Self { n_actions, actions })
    }

    pub fn n_states(&self) -> usize {
        self.actions.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn action(&self, s: usize) -> usize {
        self.actions[s]
    }

    pub fn actions(&self) -> &[usize] {
        &self.actions
    }

    /// Expands to a memoryless plan repeating this policy at every step.
    pub fn repeat(&self, horizon: usize) -> Result<MemorylessPlan> {
        let mut actions = Vec::with_capacity(horizon * self.actions.len());
        for _ in 0..horizon {
            actions.extend_from_slice(&self.actions);
        }
        MemorylessPlan::new(horizon, self.actions.len(), self.n_actions, actions)
    }
}

/// Time-indexed state-action values `Q_t(s, a)` for `t` in `0..horizon`.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable<S> {
    horizon: usize,
    n_states: usize,
    n_actions: usize,
    discount: S,
    data: Vec<S>,
}

impl<S: Scalar> QTable<S> {
    pub(crate) fn zeros(horizon: usize, n_states: usize, n_actions: usize, discount: S) -> Self {
        Self {
            horizon,
            n_states,
            n_actions,
            discount,
            data: vec![S::zero(); horizon * n_states * n_actions],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn discount(&self) -> S {
        self.discount
    }

    #[inline]
    pub fn q(&self, t: usize, s: usize, a: usize) -> S {
        self.data[(t * self.n_states + s) * self.n_actions + a]
    }

    #[inline]
    pub(crate) fn set(&mut self, t: usize, s: usize, a: usize, value: S) {
        self.data[(t * self.n_states + s) * self.n_actions + a] = value;
    }

    /// `max_a Q_t(s, a)`.
    pub fn v(&self, t: usize, s: usize) -> S {
        (0..self.n_actions)
            .map(|a| self.q(t, s, a))
            .fold(S::neg_infinity(), S::max)
    }

    /// Greedy action with lowest-index tie-break.
    pub fn greedy(&self, t: usize, s: usize) -> usize {
        argmax((0..self.n_actions).map(|a| self.q(t, s, a)))
    }

    pub fn values(&self) -> &[S] {
        &self.data
    }
}

/// Time-indexed state values `V_t(s)` for `t` in `0..=horizon` (the slice at
/// `horizon` is the terminal value, identically zero for the solvers here).
#[derive(Clone, Debug, PartialEq)]
pub struct VTable<S> {
    horizon: usize,
    n_states: usize,
    discount: S,
    data: Vec<S>,
}

impl<S: Scalar> VTable<S> {
    pub(crate) fn zeros(horizon: usize, n_states: usize, discount: S) -> Self {
        Self {
            horizon,
            n_states,
            discount,
            data: vec![S::zero(); (horizon + 1) * n_states],
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn discount(&self) -> S {
        self.discount
    }

    #[inline]
    pub fn v(&self, t: usize, s: usize) -> S {
        self.data[t * self.n_states + s]
    }

    #[inline]
    pub(crate) fn set(&mut self, t: usize, s: usize, value: S) {
        self.data[t * self.n_states + s] = value;
    }

    pub fn values(&self) -> &[S] {
        &self.data
    }
}

/// Stationary state-action values, as returned by the discounted solver.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix<S> {
    n_states: usize,
    n_actions: usize,
    data: Vec<S>,
}

impl<S: Scalar> QMatrix<S> {
    pub(crate) fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            data: vec![S::zero(); n_states * n_actions],
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    #[inline]
    pub fn q(&self, s: usize, a: usize) -> S {
        self.data[s * self.n_actions + a]
    }

    #[inline]
    pub(crate) fn set(&mut self, s: usize, a: usize, value: S) {
        self.data[s * self.n_actions + a] = value;
    }

    pub fn v(&self, s: usize) -> S {
        (0..self.n_actions)
            .map(|a| self.q(s, a))
            .fold(S::neg_infinity(), S::max)
    }

    pub fn greedy_action(&self, s: usize) -> usize {
        argmax((0..self.n_actions).map(|a| self.q(s, a)))
    }

    pub fn greedy_policy(&self) -> StationaryPolicy {
        StationaryPolicy {
            n_actions: self.n_actions,
            actions: (0..self.n_states).map(|s| self.greedy_action(s)).collect(),
        }
    }
}

/// Index of the maximum, lowest index winning ties.
pub(crate) fn argmax<S: PartialOrd>(values: impl Iterator<Item = S>) -> usize {
    let mut best_idx = 0;
    let mut best: Option<S> = None;
    for (i, v) in values.enumerate() {
        match &best {
            Some(b) if v <= *b => {}
            _ => {
                best = Some(v);
                best_idx = i;
            }
        }
    }
    best_idx
}
