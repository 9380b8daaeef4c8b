//! Acceptance suite: one test per exit criterion, each printing a pass line
//! with the measured quantities (run with `-- --nocapture` to see them).

#![allow(clippy::needless_range_loop)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use bayesmdp::bounds::ENSEMBLE_CONCENTRATION;
use bayesmdp::{
    bayes_gap_bound, bayes_optimal_tiny, bootstrap_ci, bound_sweep, chain_prior, chain_task,
    experiment, horizon_for_epsilon, mixture_plan_value, mmbi, random_ensemble, sample_count,
    solve_finite_horizon, AgentName, ExperimentConfig, FiniteMdp, WeightedMdpSet,
};

fn random_mdp(
    rng: &mut ChaCha8Rng,
    n_states: usize,
    n_actions: usize,
    r_max: f64,
) -> FiniteMdp<f64> {
    let mut transitions = Vec::with_capacity(n_states * n_actions * n_states);
    for _ in 0..n_states * n_actions {
        let mut row: Vec<f64> = (0..n_states).map(|_| rng.random::<f64>() + 1e-3).collect();
        let sum: f64 = row.iter().sum();
        row.iter_mut().for_each(|p| *p /= sum);
        transitions.extend(row);
    }
    let rewards = (0..n_states * n_actions)
        .map(|_| rng.random::<f64>() * r_max)
        .collect();
    FiniteMdp::new(n_states, n_actions, r_max, transitions, rewards).unwrap()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// 1. Planning over a singleton set is bit-for-bit the single-MDP solver.
#[test]
fn criterion_1_singleton_equivalence() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n_states = rng.random_range(2..=6);
        let n_actions = rng.random_range(1..=3);
        let horizon = rng.random_range(1..=30);
        let gamma = rng.random_range(0.0..0.99);
        let mdp = random_mdp(&mut rng, n_states, n_actions, 1.0);
        let (q, plan) = solve_finite_horizon(&mdp, gamma, horizon).unwrap();
        let result = mmbi(&WeightedMdpSet::singleton(mdp), gamma, horizon).unwrap();
        assert_eq!(result.plan, plan, "plans diverged");
        for t in 0..horizon {
            for s in 0..n_states {
                for a in 0..n_actions {
                    worst = worst.max((result.belief_q.q(t, s, a) - q.q(t, s, a)).abs());
                }
            }
        }
        assert!(worst <= 1e-12, "sup-norm {worst} exceeds 1e-12");
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}, budget 5 s");
    println!(
        "[PASS] criterion 1 — singleton equivalence: sup-norm {worst:.3e} over 100 MDPs in {elapsed:?}"
    );
}

/// 2. The planner's root values are the exact expected utility of its plan.
#[test]
fn criterion_2_evaluation_exactness() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n_states = rng.random_range(2..=5);
        let n_actions = rng.random_range(1..=3);
        let n_mdps = rng.random_range(1..=8);
        let horizon = rng.random_range(1..=20);
        let gamma = rng.random_range(0.0..0.99);
        let mdps: Vec<_> = (0..n_mdps)
            .map(|_| random_mdp(&mut rng, n_states, n_actions, 1.0))
            .collect();
        let raw: Vec<f64> = (0..n_mdps).map(|_| rng.random::<f64>() + 0.01).collect();
        let total: f64 = raw.iter().sum();
        let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        let set = WeightedMdpSet::new(mdps, weights).unwrap();
        let result = mmbi(&set, gamma, horizon).unwrap();
        let reevaluated = mixture_plan_value(&set, &result.plan, gamma).unwrap();
        for (s, root) in result.root_values().iter().enumerate() {
            worst = worst.max((reevaluated[s] - root).abs());
        }
        assert!(worst <= 1e-12, "sup-norm {worst} exceeds 1e-12");
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "took {elapsed:?}, budget 10 s"
    );
    println!(
        "[PASS] criterion 2 — evaluation exactness: sup-norm {worst:.3e} over 100 sets in {elapsed:?}"
    );
}

/// Independent recursive plan evaluator used by the enumeration oracle.
fn recursive_value(
    mdp: &FiniteMdp<f64>,
    actions: &[usize],
    gamma: f64,
    t: usize,
    s: usize,
    horizon: usize,
) -> f64 {
    if t == horizon {
        return 0.0;
    }
    let a = actions[t * mdp.n_states() + s];
    let mut future = 0.0;
    for next in 0..mdp.n_states() {
        let p = mdp.transition(s, a, next);
        if p > 0.0 {
            future += p * recursive_value(mdp, actions, gamma, t + 1, next, horizon);
        }
    }
    mdp.mean_reward(s, a) + gamma * future
}

/// 3. The greedy plan never beats the enumerated best memoryless plan; the
///    fraction of instances where it matches the best is reported.
#[test]
fn criterion_3_greedy_suboptimality_direction() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let horizon = 3;
    let mut matched = 0usize;
    for _ in 0..200 {
        let gamma = rng.random_range(0.3..0.99);
        let mdps = vec![
            random_mdp(&mut rng, 2, 2, 1.0),
            random_mdp(&mut rng, 2, 2, 1.0),
        ];
        let weights = {
            let w: f64 = rng.random_range(0.1..0.9);
            vec![w, 1.0 - w]
        };
        let set = WeightedMdpSet::new(mdps, weights.clone()).unwrap();
        let result = mmbi(&set, gamma, horizon).unwrap();
        let greedy_value = mean(&result.root_values());

        // Oracle: enumerate all 2^(2*3) = 64 deterministic memoryless plans
        // and evaluate each by direct recursion over both members.
        let mut best = f64::NEG_INFINITY;
        for code in 0..64usize {
            let actions: Vec<usize> = (0..6).map(|i| (code >> i) & 1).collect();
            let value = mean(
                &(0..2)
                    .map(|s| {
                        weights[0] * recursive_value(set.mdp(0), &actions, gamma, 0, s, horizon)
                            + weights[1]
                                * recursive_value(set.mdp(1), &actions, gamma, 0, s, horizon)
                    })
                    .collect::<Vec<_>>(),
            );
            best = best.max(value);
        }
        assert!(
            greedy_value <= best + 1e-12,
            "greedy {greedy_value} above enumerated best {best}"
        );
        if greedy_value >= best - 1e-12 {
            matched += 1;
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "took {elapsed:?}, budget 30 s"
    );
    println!
        ("[PASS] criterion 3 — greedy direction: never above the enumerated best; matched it in {matched}/200 instances (reported, not asserted) in {elapsed:?}"
    );
}

/// 4. The gap to the exact Bayes-optimal value is inside the stated bound
///    with the measured posterior drift.
#[test]
fn criterion_4_gap_bound() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let horizon = 4;
    let mut worst_ratio = 0.0f64;
    for instance in 0..50 {
        let gamma = rng.random_range(0.5..0.9);
        let first = random_mdp(&mut rng, 2, 2, 1.0);
        let second = if instance % 2 == 0 {
            // Similar pair: perturb the first (small drift regime).
            let mut transitions = Vec::new();
            for s in 0..2 {
                for a in 0..2 {
                    let row = first.transition_row(s, a);
                    let jitter: f64 = rng.random_range(-0.05..0.05);
                    let p0 = (row[0] + jitter).clamp(1e-3, 1.0 - 1e-3);
                    transitions.extend([p0, 1.0 - p0]);
                }
            }
            let rewards = (0..4)
                .map(|i| {
                    (first.mean_reward(i / 2, i % 2) + rng.random_range(-0.05..0.05))
                        .clamp(0.0, 1.0)
                })
                .collect();
            FiniteMdp::new(2, 2, 1.0, transitions, rewards).unwrap()
        } else {
            random_mdp(&mut rng, 2, 2, 1.0)
        };
        let w: f64 = rng.random_range(0.2..0.8);
        let set = WeightedMdpSet::new(vec![first, second], vec![w, 1.0 - w]).unwrap();
        let tree = bayes_optimal_tiny(&set, gamma, horizon).unwrap();
        let plan_value =
            mixture_plan_value(&set, &mmbi(&set, gamma, horizon).unwrap().plan, gamma).unwrap();
        let bound = bayes_gap_bound(tree.max_weight_drift, gamma, set.r_max()).unwrap();
        for s in 0..2 {
            let gap = tree.start_values[s] - plan_value[s];
            assert!(
                gap >= -1e-12,
                "Bayes value must dominate the plan, gap {gap}"
            );
            assert!(
                gap <= bound + 1e-9,
                "gap {gap} exceeds bound {bound} (drift {})",
                tree.max_weight_drift
            );
            if bound > 0.0 {
                worst_ratio = worst_ratio.max(gap / bound);
            }
        }
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "took {elapsed:?}, budget 2 min"
    );
    println!(
        "[PASS] criterion 4 — gap bound: max gap/bound ratio {worst_ratio:.3} over 50 instances in {elapsed:?}"
    );
}

/// 5. Bound orderings over 100 random ensembles and a 21-point grid;
///    coincidence at certainty; strict advantage at full uncertainty in at
///    least 90 ensembles.
#[test]
fn criterion_5_bound_ordering() {
    let start = std::time::Instant::now();
    let counts: Vec<(bool, bool)> = (0..100u64)
        .into_par_iter()
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(5000 + seed);
            let mdps = random_ensemble(8, 5, 4, 1.0, ENSEMBLE_CONCENTRATION, &mut rng);
            let rows = bound_sweep(&mdps, 21, 0.95, 50).unwrap();
            assert_eq!(rows.len(), 21);
            for row in &rows {
                assert!(
                    row.upper_bound >= row.mmbi_bound - 1e-9,
                    "upper {} below set-plan bound {} at lambda {}",
                    row.upper_bound,
                    row.mmbi_bound,
                    row.lambda
                );
                assert!(
                    row.upper_bound >= row.emdp_bound - 1e-9,
                    "upper {} below expected-MDP bound {} at lambda {}",
                    row.upper_bound,
                    row.emdp_bound,
                    row.lambda
                );
            }
            let last = rows.last().unwrap();
            let coincide = (last.upper_bound - last.mmbi_bound).abs() <= 1e-9
                && (last.upper_bound - last.emdp_bound).abs() <= 1e-9;
            assert!(coincide, "bounds failed to coincide at lambda = 1");
            let strict = rows[0].mmbi_bound > rows[0].emdp_bound;
            (coincide, strict)
        })
        .collect();
    let strict_count = counts.iter().filter(|&&(_, s)| s).count();
    assert!(
        strict_count >= 90,
        "set-plan bound strictly above expected-MDP bound at lambda=0 in only {strict_count}/100"
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "took {elapsed:?}, budget 2 min"
    );
    println!(
        "[PASS] criterion 5 — bound ordering: pointwise order everywhere, coincidence at certainty, strict at lambda=0 in {strict_count}/100 in {elapsed:?}"
    );
}

/// 6. The closed-form sample-count and horizon formulas, exactly.
#[test]
fn criterion_6_formulas() {
    assert_eq!(sample_count(3.0, 0.5, 1.0).unwrap(), 8);
    assert_eq!(sample_count(2.0, 0.5, 1.0).unwrap(), 27);
    assert_eq!(horizon_for_epsilon(0.5, 0.5, 1.0).unwrap(), 2);
    println!("[PASS] criterion 6 — formulas: n(3,0.5,1)=8, n(2,0.5,1)=27, T(0.5,0.5,1)=2");
}

/// 7. The chain study at desk scale: exploit total inside the tolerance
///    band, utility strictly increasing in the sample count, regret monotone
///    within CI overlap, and the low-reward exploration mass shrinking with
///    more samples.
#[test]
fn criterion_7_chain_experiment() {
    let start = std::time::Instant::now();
    let config = ExperimentConfig::<f64> {
        agents: vec![AgentName::Exploit, AgentName::Mcbrl],
        n_values: vec![1, 2, 4, 8, 16],
        runs: 1000,
        steps: 1000,
        gamma: 0.95,
        replan_interval: 20,
        seed: 42,
        resamples: 10_000,
        ci_level: 0.95,
        histogram_bins: 25,
        vi_tolerance: 1e-6,
        plan_horizon: None,
    };
    let result = experiment(&chain_task(), &chain_prior(), &config).unwrap();

    // (a) Exploit mean total reward in [2950, 3600].
    let exploit = result.cell("exploit").unwrap();
    let exploit_total = exploit.regret.mean_total;
    assert!(
        (2950.0..=3600.0).contains(&exploit_total),
        "exploit mean total {exploit_total} outside [2950, 3600]"
    );

    // (b) Mean discounted utility strictly increasing across n = 1, 8, 16.
    let utility = |name: &str| result.cell(name).unwrap().mean_utility;
    let (u1, u8, u16) = (
        utility("mcbrl_n1"),
        utility("mcbrl_n8"),
        utility("mcbrl_n16"),
    );
    assert!(
        u1 < u8 && u8 < u16,
        "utilities not strictly increasing: {u1} {u8} {u16}"
    );

    // (c) Regret monotone nonincreasing in n within bootstrap CI overlap.
    let cells: Vec<_> = [1usize, 2, 4, 8, 16]
        .iter()
        .map(|n| result.cell(&format!("mcbrl_n{n}")).unwrap())
        .collect();
    for pair in cells.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        let monotone = b.regret.regret <= a.regret.regret;
        let ci_overlap = a.regret.ci_low <= b.regret.ci_high && b.regret.ci_low <= a.regret.ci_high;
        assert!(
            monotone || ci_overlap,
            "regret rose from {} ({}) to {} ({}) beyond CI overlap",
            a.name,
            a.regret.regret,
            b.name,
            b.regret.regret
        );
    }

    // (d) Single-sample planning over-explores: heavier low-reward mass than
    // n = 8, and the fraction of n = 16 runs stuck below 2500 stays small.
    let p10 = |name: &str| result.cell(name).unwrap().percentile_80.0;
    assert!(
        p10("mcbrl_n1") < p10("mcbrl_n8"),
        "n=1 low percentile {} not below n=8's {}",
        p10("mcbrl_n1"),
        p10("mcbrl_n8")
    );
    let n16 = result.cell("mcbrl_n16").unwrap();
    let stuck = n16.totals.iter().filter(|&&t| t < 2500.0).count() as f64 / n16.totals.len() as f64;
    assert!(stuck < 0.05, "n=16 stuck fraction {stuck} not below 5%");

    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 900.0,
        "took {elapsed:?}, budget 15 min"
    );
    println!(
        "[PASS] criterion 7 — chain study: exploit total {exploit_total:.0} in band; utilities {u1:.2} < {u8:.2} < {u16:.2} \
         (exploit utility {:.2}, above the sampling cells here: deterministic mean-reward emission removes the early traps \
         that depress it in the original study — reported, not asserted); regret monotone within CI; n=16 stuck fraction {stuck:.3}; {elapsed:?}",
        exploit.mean_utility
    );
}

/// 8. Percentile-bootstrap coverage calibration on a known distribution.
#[test]
fn criterion_8_bootstrap_calibration() {
    let start = std::time::Instant::now();
    let trials = 1000u64;
    let covered: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let normal = Normal::new(10.0f64, 3.0).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(8000 + t);
            let samples: Vec<f64> = (0..300).map(|_| normal.sample(&mut rng)).collect();
            let (lo, hi) = bootstrap_ci(&samples, 1000, 0.95, 9000 + t).unwrap();
            usize::from(lo <= 10.0 && 10.0 <= hi)
        })
        .sum();
    let coverage = covered as f64 / trials as f64;
    assert!(
        (0.93..=0.97).contains(&coverage),
        "coverage {coverage} outside [0.93, 0.97]"
    );
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "took {elapsed:?}, budget 1 min"
    );
    println!(
        "[PASS] criterion 8 — bootstrap calibration: coverage {coverage:.3} over 1000 meta-trials in {elapsed:?}"
    );
}
