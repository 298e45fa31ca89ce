//! Reward functionals, the transcendence predicate, and executable checks
//! of the mixture/temperature results.
//!
//! The central quantity is the expected reward of a policy under a test
//! input distribution. A candidate *transcends* a pool of experts when its
//! expected reward strictly exceeds every expert's. Averaging alone can
//! never do that — the mixture's reward is exactly the mean of the expert
//! rewards — but sharpening the mixture with a low temperature can, and the
//! `verify_theorem*` drivers check both facts numerically on concrete
//! instances.
//!
//! Strict inequalities use [`STRICT_TOL`]: a gap inside `(-1e-9, 1e-9]` is
//! classified as a tie, never as transcendence.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{self, Dist, Temperature, TemperScheme};
use crate::experts::{self, Instance, Policy};

/// Tolerance for strict reward inequalities in theorem verdicts.
pub const STRICT_TOL: f64 = 1e-9;

/// Tolerance for algebraic identities (linearity, scale round-trips).
pub const LINEAR_TOL: f64 = 1e-12;

/// Favor histograms use 61 uniform bins over `[-0.3, 0.3]` in reward units,
/// clamping outliers into the edge bins, so plots rebuild bit-exactly from CSV.
pub const FAVOR_HIST_BINS: usize = 61;
pub const FAVOR_HIST_LO: f64 = -0.3;
pub const FAVOR_HIST_HI: f64 = 0.3;

/// Bootstrap resample count for 95% confidence intervals.
pub const BOOTSTRAP_RESAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RewardError {
    #[error("reward table is empty or ragged")]
    MalformedTable,
    #[error("reward row {0} is constant")]
    ConstantRow(usize),
    #[error("temperature grid is empty")]
    GridEmpty,
    #[error("temperature grid has no value in (0, 1]")]
    GridOutsideUnitInterval,
    #[error("no visited states supplied")]
    EmptyStateList,
    #[error("need at least one two-subset and one single-subset test case")]
    MissingTestCase,
    #[error("counterfactual sample count must be at least 1")]
    BadCounterfactualCount,
    #[error(transparent)]
    Expert(#[from] experts::ExpertError),
}

/// A dense `inputs x outputs` reward matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RewardTable {
    rows: Vec<Vec<f64>>,
}

impl RewardTable {
    /// Validates shape and requires every row to be non-constant.
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, RewardError> {
        let t = Self::new_allow_constant(rows)?;
        if let Some(x) = (0..t.num_inputs()).find(|&x| t.row_is_constant(x)) {
            return Err(RewardError::ConstantRow(x));
        }
        Ok(t)
    }

    /// Validates shape only. Game-derived tables legitimately contain
    /// constant rows (states where every move draws); theorem drivers filter
    /// those out of the test distribution instead.
    pub fn new_allow_constant(rows: Vec<Vec<f64>>) -> Result<Self, RewardError> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(RewardError::MalformedTable);
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim || r.iter().any(|v| !v.is_finite())) {
            return Err(RewardError::MalformedTable);
        }
        Ok(RewardTable { rows })
    }

    /// I.i.d. uniform `[0,1]` rewards, rows re-drawn until non-constant.
    pub fn random<R: Rng>(num_inputs: usize, num_outputs: usize, rng: &mut R) -> Self {
        assert!(num_inputs >= 1 && num_outputs >= 2);
        let rows = (0..num_inputs)
            .map(|_| loop {
                let row: Vec<f64> = (0..num_outputs).map(|_| rng.gen::<f64>()).collect();
                if row.iter().any(|&v| v != row[0]) {
                    return row;
                }
            })
            .collect();
        RewardTable { rows }
    }

    pub fn num_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn row_is_constant(&self, x: usize) -> bool {
        self.rows[x].iter().all(|&v| v == self.rows[x][0])
    }
}

/// Expected reward of `policy` at a single input: `E_{y ~ f(.|x)} r(x,y)`.
pub fn state_reward(policy: &Policy, x: usize, reward: &RewardTable) -> f64 {
    policy.row(x).expectation(reward.row(x))
}

/// Expected reward of `policy` under the test input distribution.
pub fn expected_reward(policy: &Policy, p_test: &Dist, reward: &RewardTable) -> f64 {
    (0..p_test.len())
        .map(|x| {
            let w = p_test.get(x);
            if w == 0.0 { 0.0 } else { w * state_reward(policy, x, reward) }
        })
        .sum()
}

/// Reward margin of a candidate over the best expert. Positive means
/// transcendence.
pub fn transcendence_gap(
    candidate: &Policy,
    experts: &[Policy],
    p_test: &Dist,
    reward: &RewardTable,
) -> f64 {
    let best = experts
        .iter()
        .map(|e| expected_reward(e, p_test, reward))
        .fold(f64::NEG_INFINITY, f64::max);
    expected_reward(candidate, p_test, reward) - best
}

/// The grid of sampling temperatures used throughout the experiments.
pub fn default_tau_grid() -> Vec<f64> {
    vec![1.0, 0.75, 0.5, 0.25, 0.1, 0.05, 0.01, 0.005, 0.001]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated { counterexample: String },
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }
}

/// Numeric evidence accompanying a theorem verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TheoremWitness {
    pub expert_rewards: Vec<f64>,
    pub mixture_reward: f64,
    pub argmax_reward: Option<f64>,
    /// Largest grid temperature below which every grid point transcends.
    pub tau_star: Option<f64>,
    /// One line per sub-case (per rho, per test distribution, ...).
    pub cases: Vec<String>,
}

/// Outcome of one theorem verification run on one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub theorem: String,
    pub instance: String,
    #[serde(flatten)]
    pub verdict: Verdict,
    pub witness: TheoremWitness,
    pub scheme: Option<TemperScheme>,
    pub tau_grid: Vec<f64>,
}

impl TheoremReport {
    pub fn holds(&self) -> bool {
        self.verdict.holds()
    }
}

fn best_reward(experts: &[Policy], p_test: &Dist, reward: &RewardTable) -> f64 {
    experts
        .iter()
        .map(|e| expected_reward(e, p_test, reward))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Checks the impossibility result: the mixture's reward equals the mean of
/// the expert rewards (linearity) and therefore never beats the best expert.
pub fn verify_theorem1(instance: &Instance, experts: &[Policy]) -> TheoremReport {
    let p_test = instance.p_test();
    let reward = instance.reward();
    let expert_rewards: Vec<f64> =
        experts.iter().map(|e| expected_reward(e, p_test, reward)).collect();
    let mixture = experts::mixture_policy(experts, None).expect("experts share dimensions");
    let mixture_reward = expected_reward(&mixture, p_test, reward);
    let mean = expert_rewards.iter().sum::<f64>() / expert_rewards.len() as f64;
    let max = expert_rewards.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    let verdict = if (mixture_reward - mean).abs() > LINEAR_TOL {
        Verdict::Violated {
            counterexample: format!(
                "R(mixture) = {mixture_reward} but mean expert reward = {mean}"
            ),
        }
    } else if mixture_reward > max + LINEAR_TOL {
        Verdict::Violated {
            counterexample: format!(
                "R(mixture) = {mixture_reward} exceeds best expert reward {max}"
            ),
        }
    } else {
        Verdict::Holds
    };

    TheoremReport {
        theorem: "theorem1_no_transcendence_without_tempering".into(),
        instance: describe_instance(instance, experts.len()),
        verdict,
        witness: TheoremWitness {
            expert_rewards,
            mixture_reward,
            argmax_reward: None,
            tau_star: None,
            cases: vec![],
        },
        scheme: None,
        tau_grid: vec![],
    }
}

/// Checks the equivalence between argmax advantage and low-temperature
/// transcendence, at grid resolution.
pub fn verify_theorem2(
    instance: &Instance,
    experts: &[Policy],
    tau_grid: &[f64],
    scheme: TemperScheme,
) -> Result<TheoremReport, RewardError> {
    let grid = validated_grid(tau_grid)?;
    let p_test = instance.p_test();
    let reward = instance.reward();
    let expert_rewards: Vec<f64> =
        experts.iter().map(|e| expected_reward(e, p_test, reward)).collect();
    let best = expert_rewards.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mixture = experts::mixture_policy(experts, None)?;
    let mixture_reward = expected_reward(&mixture, p_test, reward);
    let sharp = experts::temper(&mixture, Temperature::Zero, scheme);
    let argmax_reward = expected_reward(&sharp, p_test, reward);

    let tempered_rewards: Vec<f64> = grid
        .iter()
        .map(|&t| {
            let pol = experts::temper(&mixture, Temperature::Tau(t), scheme);
            expected_reward(&pol, p_test, reward)
        })
        .collect();

    let (verdict, tau_star) = if argmax_reward > best + STRICT_TOL {
        // Forward direction: some grid suffix must transcend throughout.
        match largest_transcending_suffix(&grid, &tempered_rewards, best) {
            Some(star) => (Verdict::Holds, Some(star)),
            None => (
                Verdict::Violated {
                    counterexample: format!(
                        "argmax reward {argmax_reward} beats best expert {best} but no grid \
                         suffix transcends; tempered rewards {tempered_rewards:?}"
                    ),
                },
                None,
            ),
        }
    } else {
        // Reverse direction at grid resolution: the coldest grid point must
        // not transcend, otherwise a transcending suffix would exist.
        let coldest = *tempered_rewards.last().expect("grid non-empty");
        if coldest > best + STRICT_TOL {
            (
                Verdict::Violated {
                    counterexample: format!(
                        "argmax reward {argmax_reward} does not beat best expert {best}, yet \
                         tau = {} gives reward {coldest}",
                        grid.last().unwrap()
                    ),
                },
                None,
            )
        } else {
            (Verdict::Holds, None)
        }
    };

    Ok(TheoremReport {
        theorem: "theorem2_argmax_advantage_iff_low_tau_transcendence".into(),
        instance: describe_instance(instance, experts.len()),
        verdict,
        witness: TheoremWitness {
            expert_rewards,
            mixture_reward,
            argmax_reward: Some(argmax_reward),
            tau_star,
            cases: grid
                .iter()
                .zip(&tempered_rewards)
                .map(|(t, r)| format!("tau={t}: R={r}"))
                .collect(),
        },
        scheme: Some(scheme),
        tau_grid: grid,
    })
}

/// Checks single-expert denoising: data from one noisy expert `f_rho` is
/// transcended by tempering, and the cold limit recovers the optimal reward.
pub fn verify_theorem3(
    instance: &Instance,
    rho_list: &[f64],
    tau_grid: &[f64],
    scheme: TemperScheme,
) -> Result<TheoremReport, RewardError> {
    let grid = validated_grid(tau_grid)?;
    let p_test = instance.p_test();
    let reward = instance.reward();
    let star = experts::optimal_expert(reward);
    let star_reward = expected_reward(&star, p_test, reward);

    let mut cases = Vec::new();
    let mut failures = Vec::new();
    let mut last_rewards = (0.0, 0.0);
    for &rho in rho_list {
        let expert = experts::noisy_expert(reward, rho)?;
        let expert_reward = expected_reward(&expert, p_test, reward);
        // The learner fit to single-expert data is that expert itself.
        let learner = experts::mixture_policy(std::slice::from_ref(&expert), None)?;
        if learner.sup_distance(&expert) > 0.0 {
            failures.push(format!("rho={rho}: learner differs from the lone expert"));
        }
        let tempered: Vec<f64> = grid
            .iter()
            .map(|&t| {
                let pol = experts::temper(&learner, Temperature::Tau(t), scheme);
                expected_reward(&pol, p_test, reward)
            })
            .collect();
        let coldest = *tempered.last().unwrap();
        match largest_transcending_suffix(&grid, &tempered, expert_reward) {
            Some(star_tau) => cases.push(format!(
                "rho={rho}: tau*={star_tau}, R(expert)={expert_reward}, R(coldest)={coldest}"
            )),
            None => failures.push(format!(
                "rho={rho}: no grid suffix transcends R(expert)={expert_reward}"
            )),
        }
        if (coldest - star_reward).abs() > 1e-6 {
            failures.push(format!(
                "rho={rho}: cold-limit reward {coldest} not within 1e-6 of optimal {star_reward}"
            ));
        }
        last_rewards = (expert_reward, coldest);
    }

    let verdict = if failures.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Violated { counterexample: failures.join("; ") }
    };
    Ok(TheoremReport {
        theorem: "theorem3_single_noisy_expert_transcends".into(),
        instance: describe_instance(instance, 1),
        verdict,
        witness: TheoremWitness {
            expert_rewards: vec![last_rewards.0],
            mixture_reward: last_rewards.0,
            argmax_reward: Some(star_reward),
            tau_star: None,
            cases,
        },
        scheme: Some(scheme),
        tau_grid: grid,
    })
}

/// Checks multi-expert complementarity: with test mass on at least two
/// partition cells the tempered mixture transcends; concentrated on a single
/// cell it only ties the matching expert, showing the hypothesis is needed.
pub fn verify_theorem4(
    instance: &Instance,
    partition: &[Vec<usize>],
    p_test_cases: &[Dist],
    tau_grid: &[f64],
    scheme: TemperScheme,
) -> Result<TheoremReport, RewardError> {
    let grid = validated_grid(tau_grid)?;
    let reward = instance.reward();
    let experts_vec = experts::partition_experts(reward, partition)?;
    let coldest = Temperature::Tau(*grid.last().unwrap());
    let mixture = experts::mixture_policy(&experts_vec, None)?;
    let tempered = experts::temper(&mixture, coldest, scheme);

    let mass_per_cell = |p: &Dist| -> Vec<f64> {
        partition.iter().map(|cell| cell.iter().map(|&x| p.get(x)).sum()).collect()
    };
    let mut saw_multi = false;
    let mut saw_single = false;
    let mut cases = Vec::new();
    let mut failures = Vec::new();

    for (i, p_test) in p_test_cases.iter().enumerate() {
        let masses = mass_per_cell(p_test);
        let populated: Vec<usize> =
            (0..masses.len()).filter(|&c| masses[c] > 0.0).collect();
        if populated.len() >= 2 {
            saw_multi = true;
            let gap = transcendence_gap(&tempered, &experts_vec, p_test, reward);
            if gap > STRICT_TOL {
                cases.push(format!("case {i}: {} populated cells, gap={gap}", populated.len()));
            } else {
                failures.push(format!(
                    "case {i}: {} populated cells but gap={gap} (no transcendence)",
                    populated.len()
                ));
            }
        } else if populated.len() == 1 {
            saw_single = true;
            let owner = &experts_vec[populated[0]];
            let gap = expected_reward(&tempered, p_test, reward)
                - expected_reward(owner, p_test, reward);
            if gap.abs() <= STRICT_TOL {
                cases.push(format!("case {i}: single cell {}, tie (gap={gap})", populated[0]));
            } else {
                failures.push(format!(
                    "case {i}: single cell {} expected a tie, gap={gap}",
                    populated[0]
                ));
            }
        } else {
            failures.push(format!("case {i}: p_test assigns no mass to any cell"));
        }
    }
    if !saw_multi || !saw_single {
        return Err(RewardError::MissingTestCase);
    }

    let p_test = instance.p_test();
    let expert_rewards: Vec<f64> =
        experts_vec.iter().map(|e| expected_reward(e, p_test, reward)).collect();
    let verdict = if failures.is_empty() {
        Verdict::Holds
    } else {
        Verdict::Violated { counterexample: failures.join("; ") }
    };
    Ok(TheoremReport {
        theorem: "theorem4_partition_experts_transcend".into(),
        instance: describe_instance(instance, experts_vec.len()),
        verdict,
        witness: TheoremWitness {
            expert_rewards,
            mixture_reward: expected_reward(&mixture, p_test, reward),
            argmax_reward: Some(expected_reward(
                &experts::temper(&mixture, Temperature::Zero, scheme),
                p_test,
                reward,
            )),
            tau_star: Some(coldest.value()),
            cases,
        },
        scheme: Some(scheme),
        tau_grid: grid,
    })
}

fn describe_instance(instance: &Instance, k: usize) -> String {
    format!(
        "|X|={}, |Y|={}, k={}",
        instance.num_inputs(),
        instance.num_outputs(),
        k
    )
}

/// Grid must be non-empty with every value in (0, 1]; returned sorted
/// descending and deduplicated.
fn validated_grid(tau_grid: &[f64]) -> Result<Vec<f64>, RewardError> {
    if tau_grid.is_empty() {
        return Err(RewardError::GridEmpty);
    }
    let mut grid: Vec<f64> =
        tau_grid.iter().cloned().filter(|&t| t > 0.0 && t <= 1.0).collect();
    if grid.is_empty() {
        return Err(RewardError::GridOutsideUnitInterval);
    }
    grid.sort_by(|a, b| b.partial_cmp(a).unwrap());
    grid.dedup();
    Ok(grid)
}

/// Largest grid value `tau*` such that every grid point `<= tau*` beats
/// `threshold` strictly. `grid` is descending; `rewards` aligned with it.
fn largest_transcending_suffix(grid: &[f64], rewards: &[f64], threshold: f64) -> Option<f64> {
    let mut star = None;
    for i in (0..grid.len()).rev() {
        if rewards[i] > threshold + STRICT_TOL {
            star = Some(grid[i]);
        } else {
            break;
        }
    }
    star
}

/// One per-state favor measurement: the reward change from following the
/// intervention policy instead of the baseline at that state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FavorSample {
    pub state_id: usize,
    pub favor: f64,
    pub baseline: f64,
    pub intervention: f64,
    /// 0 in exact mode; the number of baseline draws in sampled mode.
    pub counterfactual_n: usize,
}

/// How the baseline term of the favor is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FavorMode {
    /// Both terms as exact dot products.
    Exact,
    /// Baseline estimated from `counterfactual_n` draws; intervention exact.
    Sampled { counterfactual_n: usize },
}

/// Favor of `intervention` over `baseline` at input `x`.
pub fn favor_pointwise<R: Rng>(
    intervention: &Policy,
    baseline: &Policy,
    x: usize,
    reward: &RewardTable,
    mode: FavorMode,
    rng: &mut R,
) -> Result<FavorSample, RewardError> {
    let intervention_term = state_reward(intervention, x, reward);
    let (baseline_term, n) = match mode {
        FavorMode::Exact => (state_reward(baseline, x, reward), 0),
        FavorMode::Sampled { counterfactual_n } => {
            if counterfactual_n == 0 {
                return Err(RewardError::BadCounterfactualCount);
            }
            let row = reward.row(x);
            let mut acc = 0.0;
            for _ in 0..counterfactual_n {
                let y = baseline.row(x).sample(rng);
                acc += row[y];
            }
            (acc / counterfactual_n as f64, counterfactual_n)
        }
    };
    Ok(FavorSample {
        state_id: x,
        favor: intervention_term - baseline_term,
        baseline: baseline_term,
        intervention: intervention_term,
        counterfactual_n: n,
    })
}

/// Fixed-bin histogram with outliers clamped into the edge bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn favor_bins(values: &[f64]) -> Self {
        let mut counts = vec![0u64; FAVOR_HIST_BINS];
        let width = (FAVOR_HIST_HI - FAVOR_HIST_LO) / FAVOR_HIST_BINS as f64;
        for &v in values {
            let idx = ((v - FAVOR_HIST_LO) / width).floor() as i64;
            let idx = idx.clamp(0, FAVOR_HIST_BINS as i64 - 1) as usize;
            counts[idx] += 1;
        }
        Histogram { lo: FAVOR_HIST_LO, hi: FAVOR_HIST_HI, counts }
    }
}

/// Summary of a favor run over a set of visited states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FavorReport {
    pub samples: Vec<FavorSample>,
    pub n_states: usize,
    pub mean: f64,
    /// Bootstrap 95% interval of the mean, 10,000 resamples.
    pub ci_low: f64,
    pub ci_high: f64,
    pub median: f64,
    pub histogram: Histogram,
}

/// Evaluates the favor over states drawn from the intervention policy's
/// visitation distribution and summarizes it.
pub fn favor_distribution<R: Rng>(
    intervention: &Policy,
    baseline: &Policy,
    visited_states: &[usize],
    reward: &RewardTable,
    mode: FavorMode,
    rng: &mut R,
) -> Result<FavorReport, RewardError> {
    if visited_states.is_empty() {
        return Err(RewardError::EmptyStateList);
    }
    let samples: Vec<FavorSample> = visited_states
        .iter()
        .map(|&x| favor_pointwise(intervention, baseline, x, reward, mode, rng))
        .collect::<Result<_, _>>()?;
    let favors: Vec<f64> = samples.iter().map(|s| s.favor).collect();
    let (mean, ci_low, ci_high) = bootstrap_mean_ci(&favors, BOOTSTRAP_RESAMPLES, rng);
    let median = median_of(&favors);
    let histogram = Histogram::favor_bins(&favors);
    Ok(FavorReport { n_states: favors.len(), samples, mean, ci_low, ci_high, median, histogram })
}

/// Percentile-method bootstrap of the mean: returns (mean, lo95, hi95).
pub fn bootstrap_mean_ci<R: Rng>(values: &[f64], resamples: usize, rng: &mut R) -> (f64, f64, f64) {
    assert!(!values.is_empty());
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let mut means = Vec::with_capacity(resamples);
    for _ in 0..resamples {
        let mut acc = 0.0;
        for _ in 0..n {
            acc += values[rng.gen_range(0..n)];
        }
        means.push(acc / n as f64);
    }
    means.sort_by(|a, b| a.partial_cmp(b).unwrap());
    (mean, percentile(&means, 0.025), percentile(&means, 0.975))
}

fn percentile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).round() as usize;
    sorted[idx]
}

pub fn median_of(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}
