//! Value-function bounds for a weighted MDP set: two lower bounds (the
//! expected-MDP-optimal plan and the greedy set-plan, both evaluated exactly
//! under the set) and the expected-max upper bound, plus a sweep that traces
//! all three along an uncertainty-to-certainty interpolation of the weights.

use rand::Rng;

use crate::dp::solve_finite_horizon;
use crate::error::{Error, Result};
use crate::mdp::FiniteMdp;
use crate::planner::{mixture_plan_value, mmbi, WeightedMdpSet};
use crate::scalar::Scalar;

/// Lower bound from the expected-MDP heuristic: solve the weight-averaged
/// MDP, then evaluate its optimal plan exactly under the original set.
pub fn lower_bound_emdp<S: Scalar>(
    set: &WeightedMdpSet<S>,
    gamma: S,
    horizon: usize,
) -> Result<Vec<S>> {
    let expected = set.expected_mdp();
    let (_, plan) = solve_finite_horizon(&expected, gamma, horizon)?;
    mixture_plan_value(set, &plan, gamma)
}

/// Lower bound from the greedy set-plan, evaluated exactly under the set.
pub fn lower_bound_mmbi<S: Scalar>(
    set: &WeightedMdpSet<S>,
    gamma: S,
    horizon: usize,
) -> Result<Vec<S>> {
    let result = mmbi(set, gamma, horizon)?;
    mixture_plan_value(set, &result.plan, gamma)
}

/// Upper bound: the weight average of each member's own optimal values.
pub fn upper_bound_expected_max<S: Scalar>(
    set: &WeightedMdpSet<S>,
    gamma: S,
    horizon: usize,
) -> Result<Vec<S>> {
    let mut out = vec![S::zero(); set.n_states()];
    for (m, mdp) in set.mdps().iter().enumerate() {
        let (q, plan) = solve_finite_horizon(mdp, gamma, horizon)?;
        for (s, slot) in out.iter_mut().enumerate() {
            *slot = *slot + set.weight(m) * q.q(0, s, plan.action(0, s));
        }
    }
    Ok(out)
}

/// One row of [`bound_sweep`]: the three bounds averaged over states at one
/// interpolation point.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundSweepRow<S> {
    pub lambda: S,
    pub emdp_bound: S,
    pub mmbi_bound: S,
    pub upper_bound: S,
}

fn state_average<S: Scalar>(values: &[S]) -> S {
    let sum: S = values.iter().copied().sum();
    sum / S::of_usize(values.len())
}

/// Sweeps the weight vector from uniform (lambda = 0, maximal uncertainty)
/// to a point mass on the first MDP (lambda = 1, certainty) on a uniform
/// grid, computing all three bounds averaged over states at each point.
pub fn bound_sweep<S: Scalar>(
    mdps: &[FiniteMdp<S>],
    grid: usize,
    gamma: S,
    horizon: usize,
) -> Result<Vec<BoundSweepRow<S>>> {
    if mdps.len() != 8 {
        return Err(Error::DimensionMismatch(format!(
            "bound sweep takes exactly 8 MDPs, got {}",
            mdps.len()
        )));
    }
    if grid < 2 {
        return Err(Error::InvalidParameter {
            name: "grid",
            requirement: "at least 2",
            value: grid as f64,
        });
    }
    let n = mdps.len();
    let uniform = S::one() / S::of_usize(n);
    let mut rows = Vec::with_capacity(grid);
    for k in 0..grid {
        let lambda = S::of_usize(k) / S::of_usize(grid - 1);
        let weights: Vec<S> = (0..n)
            .map(|i| {
                let point = if i == 0 { S::one() } else { S::zero() };
                (S::one() - lambda) * uniform + lambda * point
            })
            .collect();
        let set = WeightedMdpSet::new(mdps.to_vec(), weights)?;
        rows.push(BoundSweepRow {
            lambda,
            emdp_bound: state_average(&lower_bound_emdp(&set, gamma, horizon)?),
            mmbi_bound: state_average(&lower_bound_mmbi(&set, gamma, horizon)?),
            upper_bound: state_average(&upper_bound_expected_max(&set, gamma, horizon)?),
        });
    }
    Ok(rows)
}

/// Default Dirichlet concentration for ensemble transition rows. Small
/// values give near-deterministic dynamics, where the two lower bounds
/// actually separate; diffuse rows mix too fast for a gap to appear.
pub const ENSEMBLE_CONCENTRATION: f64 = 0.05;

/// Random ensemble recipe: transition rows drawn from a symmetric
/// Dirichlet with the given per-entry concentration, mean rewards uniform
/// on `[0, r_max)`.
pub fn random_ensemble<S: Scalar, R: Rng + ?Sized>(
    count: usize,
    n_states: usize,
    n_actions: usize,
    r_max: S,
    concentration: S,
    rng: &mut R,
) -> Vec<FiniteMdp<S>> {
    (0..count)
        .map(|_| {
            let mut transitions = Vec::with_capacity(n_states * n_actions * n_states);
            for _ in 0..n_states * n_actions {
                let mut row: Vec<S> = (0..n_states)
                    .map(|_| S::sample_gamma(rng, concentration))
                    .collect();
                let total: S = row.iter().copied().sum();
                if total > S::zero() {
                    row.iter_mut().for_each(|p| *p = *p / total);
                } else {
                    row = vec![S::one() / S::of_usize(n_states); n_states];
                }
                transitions.extend(row);
            }
            let rewards: Vec<S> = (0..n_states * n_actions)
                .map(|_| r_max * S::sample_unit(rng))
                .collect();
            FiniteMdp::new_unchecked(n_states, n_actions, r_max, transitions, rewards)
                .expect("generator produces consistent shapes")
        })
        .collect()
}

/// Writes sweep rows as CSV with columns `lambda,emdp_bound,mmbi_bound,upper_bound`.
pub fn write_bound_sweep_csv<S: Scalar, W: std::io::Write>(
    rows: &[BoundSweepRow<S>],
    out: &mut W,
) -> Result<()> {
    writeln!(out, "lambda,emdp_bound,mmbi_bound,upper_bound")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{}",
            row.lambda, row.emdp_bound, row.mmbi_bound, row.upper_bound
        )?;
    }
    Ok(())
}
