//! Conjugate Bayesian posterior over finite MDPs: independent Dirichlet
//! distributions per transition row and independent Beta distributions per
//! mean reward, with rewards normalised to `[0, 1]` by `r_max` and treated
//! as fractional Bernoulli pseudo-observations. This keeps the conjugate
//! form for any bounded reward and reduces to exact Bernoulli conjugacy when
//! rewards are `{0, r_max}`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mdp::FiniteMdp;
use crate::scalar::Scalar;

/// Product-Dirichlet belief over transition rows plus product-Beta belief
/// over normalised mean rewards.
///
/// Value-like and cheap to clone; [`DirichletBetaBelief::update`] returns a
/// new belief, so a belief in hand is never mutated behind the caller.
#[derive(Clone, Debug, PartialEq)]
pub struct DirichletBetaBelief<S> {
    n_states: usize,
    n_actions: usize,
    r_max: S,
    /// Dirichlet mass per `(s, a, s')`: prior mass plus observed counts.
    dirichlet_counts: Vec<S>,
    /// Beta alpha per `(s, a)`.
    beta_alpha: Vec<S>,
    /// Beta beta per `(s, a)`.
    beta_beta: Vec<S>,
}

impl<S: Scalar> DirichletBetaBelief<S> {
    /// Uniform prior: `dirichlet_mass_per_entry` on every `(s, a, s')` and
    /// `Beta(beta_alpha, beta_beta)` on every normalised reward.
    pub fn new_prior(
        n_states: usize,
        n_actions: usize,
        dirichlet_mass_per_entry: S,
        beta_alpha: S,
        beta_beta: S,
        r_max: S,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::DimensionMismatch(
                "n_states and n_actions must be positive".into(),
            ));
        }
        for (name, value) in [
            ("dirichlet_mass_per_entry", dirichlet_mass_per_entry),
            ("beta_alpha", beta_alpha),
            ("beta_beta", beta_beta),
            ("r_max", r_max),
        ] {
            if !value.is_finite() || value <= S::zero() {
                return Err(Error::InvalidParameter {
                    name,
                    requirement: "positive and finite",
                    value: value.as_f64(),
                });
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            r_max,
            dirichlet_counts: vec![dirichlet_mass_per_entry; n_states * n_actions * n_states],
            beta_alpha: vec![beta_alpha; n_states * n_actions],
            beta_beta: vec![beta_beta; n_states * n_actions],
        })
    }

    /// Builds a belief from explicit parameter arrays (deserialisation,
    /// concentrated test beliefs). Dirichlet rows need strictly positive
    /// total mass; every Beta pair needs positive alpha and beta.
    pub fn from_parts(
        n_states: usize,
        n_actions: usize,
        r_max: S,
        dirichlet_counts: Vec<S>,
        beta_alpha: Vec<S>,
        beta_beta: Vec<S>,
    ) -> Result<Self> {
        if n_states == 0 || n_actions == 0 {
            return Err(Error::DimensionMismatch(
                "n_states and n_actions must be positive".into(),
            ));
        }
        if r_max <= S::zero() {
            return Err(Error::InvalidParameter {
                name: "r_max",
                requirement: "positive",
                value: r_max.as_f64(),
            });
        }
        if dirichlet_counts.len() != n_states * n_actions * n_states {
            return Err(Error::DimensionMismatch(format!(
                "dirichlet_counts has {} entries, expected {}",
                dirichlet_counts.len(),
                n_states * n_actions * n_states
            )));
        }
        if beta_alpha.len() != n_states * n_actions || beta_beta.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch(format!(
                "beta parameters have {}/{} entries, expected {}",
                beta_alpha.len(),
                beta_beta.len(),
                n_states * n_actions
            )));
        }
        if dirichlet_counts.iter().any(|&c| c < S::zero()) {
            return Err(Error::InvalidParameter {
                name: "dirichlet_counts",
                requirement: "nonnegative",
                value: f64::NAN,
            });
        }
        let belief = Self {
            n_states,
            n_actions,
            r_max,
            dirichlet_counts,
            beta_alpha,
            beta_beta,
        };
        for s in 0..n_states {
            for a in 0..n_actions {
                let total: S = belief.dirichlet_row(s, a).iter().copied().sum();
                if !total.is_finite() || total <= S::zero() {
                    return Err(Error::InvalidParameter {
                        name: "dirichlet row mass",
                        requirement: "strictly positive per (s,a)",
                        value: total.as_f64(),
                    });
                }
                let (alpha, beta) = belief.beta(s, a);
                if !alpha.is_finite()
                    || alpha <= S::zero()
                    || !beta.is_finite()
                    || beta <= S::zero()
                {
                    return Err(Error::InvalidParameter {
                        name: "beta parameters",
                        requirement: "strictly positive per (s,a)",
                        value: alpha.min(beta).as_f64(),
                    });
                }
            }
        }
        Ok(belief)
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
    pub fn dirichlet_row(&self, s: usize, a: usize) -> &[S] {
        let base = (s * self.n_actions + a) * self.n_states;
        &self.dirichlet_counts[base..base + self.n_states]
    }

    #[inline]
    pub fn beta(&self, s: usize, a: usize) -> (S, S) {
        let idx = s * self.n_actions + a;
        (self.beta_alpha[idx], self.beta_beta[idx])
    }

    fn check_indices(&self, s: usize, a: usize, next: usize) -> Result<()> {
        if s >= self.n_states {
            return Err(Error::IndexOutOfRange {
                what: "state",
                index: s,
                bound: self.n_states,
            });
        }
        if next >= self.n_states {
            return Err(Error::IndexOutOfRange {
                what: "next state",
                index: next,
                bound: self.n_states,
            });
        }
        if a >= self.n_actions {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                bound: self.n_actions,
            });
        }
        Ok(())
    }

    /// Posterior after observing the transition `(s, a, r, s')`:
    /// the Dirichlet count at `(s, a, s')` gains 1, the Beta pair at
    /// `(s, a)` gains `(r/r_max, 1 - r/r_max)`. Everything else unchanged.
    pub fn update(&self, s: usize, a: usize, reward: S, next: usize) -> Result<Self> {
        self.check_indices(s, a, next)?;
        if reward < S::zero() || reward > self.r_max {
            return Err(Error::RewardOutOfRange {
                reward: reward.as_f64(),
                r_max: self.r_max.as_f64(),
            });
        }
        let mut out = self.clone();
        out.dirichlet_counts[(s * self.n_actions + a) * self.n_states + next] =
            out.dirichlet_counts[(s * self.n_actions + a) * self.n_states + next] + S::one();
        let idx = s * self.n_actions + a;
        let fraction = reward / self.r_max;
        out.beta_alpha[idx] = out.beta_alpha[idx] + fraction;
        out.beta_beta[idx] = out.beta_beta[idx] + (S::one() - fraction);
        Ok(out)
    }

    /// The expected MDP under this belief: Dirichlet row means for the
    /// transitions and `r_max * alpha / (alpha + beta)` for the rewards.
    pub fn expected_mdp(&self) -> FiniteMdp<S> {
        let mut transitions = Vec::with_capacity(self.dirichlet_counts.len());
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.dirichlet_row(s, a);
                let total: S = row.iter().copied().sum();
                transitions.extend(row.iter().map(|&c| c / total));
            }
        }
        let rewards: Vec<S> = self
            .beta_alpha
            .iter()
            .zip(&self.beta_beta)
            .map(|(&alpha, &beta)| self.r_max * alpha / (alpha + beta))
            .collect();
        let mdp = FiniteMdp::new_unchecked(
            self.n_states,
            self.n_actions,
            self.r_max,
            transitions,
            rewards,
        )
        .expect("belief dimensions are valid");
        debug_assert!(mdp.validate().is_empty());
        mdp
    }

    /// One MDP drawn from the posterior: each transition row from its
    /// Dirichlet (per-component Gamma draws normalised to the simplex), each
    /// mean reward as `r_max` times a Beta draw.
    pub fn sample_mdp<R: Rng + ?Sized>(&self, rng: &mut R) -> FiniteMdp<S> {
        let mut transitions = Vec::with_capacity(self.dirichlet_counts.len());
        for s in 0..self.n_states {
            for a in 0..self.n_actions {
                let row = self.dirichlet_row(s, a);
                let mut draws: Vec<S> = row
                    .iter()
                    .map(|&c| {
                        if c > S::zero() {
                            S::sample_gamma(rng, c)
                        } else {
                            S::zero()
                        }
                    })
                    .collect();
                let total: S = draws.iter().copied().sum();
                if total > S::zero() {
                    draws.iter_mut().for_each(|d| *d = *d / total);
                } else {
                    // Vanishingly unlikely underflow; fall back to the row mean.
                    let mass: S = row.iter().copied().sum();
                    draws = row.iter().map(|&c| c / mass).collect();
                }
                transitions.extend(draws);
            }
        }
        let rewards: Vec<S> = self
            .beta_alpha
            .iter()
            .zip(&self.beta_beta)
            .map(|(&alpha, &beta)| self.r_max * S::sample_beta(rng, alpha, beta))
            .collect();
        let mdp = FiniteMdp::new_unchecked(
            self.n_states,
            self.n_actions,
            self.r_max,
            transitions,
            rewards,
        )
        .expect("belief dimensions are valid");
        debug_assert!(mdp.validate().is_empty());
        mdp
    }
}

/// L1 distance between two weight vectors over the same MDP set.
pub fn weight_l1_distance<S: Scalar>(w: &[S], w_other: &[S]) -> Result<S> {
    if w.len() != w_other.len() {
        return Err(Error::DimensionMismatch(format!(
            "weight vectors have lengths {} and {}",
            w.len(),
            w_other.len()
        )));
    }
    Ok(w.iter().zip(w_other).map(|(&a, &b)| (a - b).abs()).sum())
}

#[derive(Serialize, Deserialize)]
struct BeliefDoc<S> {
    n_states: usize,
    n_actions: usize,
    r_max: S,
    dirichlet_counts: Vec<Vec<Vec<S>>>,
    beta_alpha: Vec<Vec<S>>,
    beta_beta: Vec<Vec<S>>,
}

impl<S: Scalar> Serialize for DirichletBetaBelief<S> {
    fn serialize<Ser: serde::Serializer>(
        &self,
        serializer: Ser,
    ) -> std::result::Result<Ser::Ok, Ser::Error> {
        let doc = BeliefDoc {
            n_states: self.n_states,
            n_actions: self.n_actions,
            r_max: self.r_max,
            dirichlet_counts: (0..self.n_states)
                .map(|s| {
                    (0..self.n_actions)
                        .map(|a| self.dirichlet_row(s, a).to_vec())
                        .collect()
                })
                .collect(),
            beta_alpha: (0..self.n_states)
                .map(|s| (0..self.n_actions).map(|a| self.beta(s, a).0).collect())
                .collect(),
            beta_beta: (0..self.n_states)
                .map(|s| (0..self.n_actions).map(|a| self.beta(s, a).1).collect())
                .collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de, S: Scalar> Deserialize<'de> for DirichletBetaBelief<S> {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        let doc = BeliefDoc::<S>::deserialize(deserializer)?;
        let flat_counts: Vec<S> = doc
            .dirichlet_counts
            .into_iter()
            .flatten()
            .flatten()
            .collect();
        let flat_alpha: Vec<S> = doc.beta_alpha.into_iter().flatten().collect();
        let flat_beta: Vec<S> = doc.beta_beta.into_iter().flatten().collect();
        DirichletBetaBelief::from_parts(
            doc.n_states,
            doc.n_actions,
            doc.r_max,
            flat_counts,
            flat_alpha,
            flat_beta,
        )
        .map_err(serde::de::Error::custom)
    }
}
