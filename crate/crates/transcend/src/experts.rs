//! Expert families and the cross-entropy-minimizing learner.
//!
//! An *expert* is a conditional distribution over outputs given an input id.
//! The learner that minimizes cross-entropy against data labeled by a pool
//! of experts is exactly their mixture, so the mixture policy here doubles
//! as the idealized infinite-data learner. The constructions mirror the
//! standard noise models: an optimal expert (uniform over the reward-maximal
//! outputs), a noisy expert that plays uniformly with probability `rho`, and
//! partition experts that are each only competent on their own slice of the
//! input space.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dist::{self, Dist, DistError, Temperature, TemperScheme};
use crate::reward::RewardTable;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExpertError {
    #[error("rho must lie strictly between 0 and 1, got {0}")]
    RhoOutOfRange(f64),
    #[error("bad partition: {0}")]
    BadPartition(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sample ({input}, {output}) outside {num_inputs}x{num_outputs} table")]
    IndexOutOfRange { input: usize, output: usize, num_inputs: usize, num_outputs: usize },
    #[error("training distribution must have full support (p({0}) = 0)")]
    MissingSupport(usize),
    #[error("reward row {0} is constant")]
    ConstantRewardRow(usize),
    #[error(transparent)]
    Dist(#[from] DistError),
}

/// A conditional distribution: one [`Dist`] over outputs per input id.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    label: String,
    rows: Vec<Dist>,
}

impl Policy {
    pub fn new(label: impl Into<String>, rows: Vec<Dist>) -> Result<Self, ExpertError> {
        if rows.is_empty() {
            return Err(ExpertError::DimensionMismatch("policy needs at least one input".into()));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(ExpertError::DimensionMismatch("policy rows differ in dimension".into()));
        }
        Ok(Policy { label: label.into(), rows })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn num_inputs(&self) -> usize {
        self.rows.len()
    }

    pub fn num_outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn row(&self, x: usize) -> &Dist {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[Dist] {
        &self.rows
    }

    /// Largest entrywise difference over all rows.
    pub fn sup_distance(&self, other: &Policy) -> f64 {
        assert_eq!(self.num_inputs(), other.num_inputs());
        self.rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.sup_distance(b))
            .fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct PolicyWire {
    label: String,
    num_inputs: usize,
    num_outputs: usize,
    rows: Vec<Vec<f64>>,
}

impl Serialize for Policy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        PolicyWire {
            label: self.label.clone(),
            num_inputs: self.num_inputs(),
            num_outputs: self.num_outputs(),
            rows: self.rows.iter().map(|d| d.probs().to_vec()).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Policy {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let wire = PolicyWire::deserialize(deserializer)?;
        if wire.rows.len() != wire.num_inputs {
            return Err(D::Error::custom("row count disagrees with num_inputs"));
        }
        let rows = wire
            .rows
            .into_iter()
            .map(|r| {
                if r.len() != wire.num_outputs {
                    Err(D::Error::custom("row length disagrees with num_outputs"))
                } else {
                    Dist::new(r).map_err(D::Error::custom)
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        Policy::new(wire.label, rows).map_err(D::Error::custom)
    }
}

/// A finite learning problem: a reward table plus training and test input
/// distributions.
///
/// `p` must have full support, and every reward row reachable under `p_test`
/// must be non-constant; [`Instance::new`] enforces this on all rows, while
/// [`Instance::with_filtered_ptest`] instead removes constant-reward inputs
/// from `p_test` (reporting how many were dropped), which is what the solved
/// game needs.
#[derive(Debug, Clone)]
pub struct Instance {
    reward: RewardTable,
    p: Dist,
    p_test: Dist,
}

impl Instance {
    pub fn new(reward: RewardTable, p: Dist, p_test: Dist) -> Result<Self, ExpertError> {
        Self::validate_dims(&reward, &p, &p_test)?;
        if let Some(x) = (0..reward.num_inputs()).find(|&x| reward.row_is_constant(x)) {
            return Err(ExpertError::ConstantRewardRow(x));
        }
        Ok(Instance { reward, p, p_test })
    }

    /// Builds an instance over a table that may contain constant-reward rows,
    /// zeroing their `p_test` mass. Returns the instance and the number of
    /// inputs excluded from the test distribution.
    pub fn with_filtered_ptest(
        reward: RewardTable,
        p: Dist,
        p_test: Dist,
    ) -> Result<(Self, usize), ExpertError> {
        Self::validate_dims(&reward, &p, &p_test)?;
        let mut weights = p_test.probs().to_vec();
        let mut excluded = 0usize;
        for (x, w) in weights.iter_mut().enumerate() {
            if reward.row_is_constant(x) {
                if *w > 0.0 {
                    excluded += 1;
                }
                *w = 0.0;
            }
        }
        let p_test = dist::normalize(&weights).map_err(|_| {
            ExpertError::BadPartition("p_test has no mass on non-constant reward rows".into())
        })?;
        Ok((Instance { reward, p, p_test }, excluded))
    }

    fn validate_dims(reward: &RewardTable, p: &Dist, p_test: &Dist) -> Result<(), ExpertError> {
        if p.len() != reward.num_inputs() || p_test.len() != reward.num_inputs() {
            return Err(ExpertError::DimensionMismatch(format!(
                "input distributions must cover {} inputs",
                reward.num_inputs()
            )));
        }
        if let Some(x) = (0..p.len()).find(|&x| p.get(x) == 0.0) {
            return Err(ExpertError::MissingSupport(x));
        }
        Ok(())
    }

    /// Random instance with i.i.d. uniform `[0,1]` rewards (rows re-drawn
    /// until non-constant) and random full-support input distributions.
    pub fn random<R: Rng>(num_inputs: usize, num_outputs: usize, rng: &mut R) -> Self {
        let reward = RewardTable::random(num_inputs, num_outputs, rng);
        let p = random_full_support(num_inputs, rng);
        let p_test = random_full_support(num_inputs, rng);
        Instance { reward, p, p_test }
    }

    pub fn num_inputs(&self) -> usize {
        self.reward.num_inputs()
    }

    pub fn num_outputs(&self) -> usize {
        self.reward.num_outputs()
    }

    pub fn reward(&self) -> &RewardTable {
        &self.reward
    }

    pub fn p(&self) -> &Dist {
        &self.p
    }

    pub fn p_test(&self) -> &Dist {
        &self.p_test
    }
}

fn random_full_support<R: Rng>(n: usize, rng: &mut R) -> Dist {
    // Shift away from zero so support is genuinely full.
    let weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>() + 0.05).collect();
    dist::normalize(&weights).expect("positive weights normalize")
}

/// The optimal expert: uniform over the reward-maximal outputs of each row.
pub fn optimal_expert(reward: &RewardTable) -> Policy {
    let rows = (0..reward.num_inputs())
        .map(|x| {
            let row = reward.row(x);
            let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let winners: Vec<usize> = (0..row.len()).filter(|&y| row[y] == max).collect();
            let share = 1.0 / winners.len() as f64;
            let mut probs = vec![0.0; row.len()];
            for y in winners {
                probs[y] = share;
            }
            Dist::new(probs).expect("argmax rows are normalized")
        })
        .collect();
    Policy { label: "optimal".into(), rows }
}

/// A noisy expert: uniform with probability `rho`, optimal otherwise.
///
/// Entries are exactly `rho/|Y| + (1-rho) * f*(y|x)`.
pub fn noisy_expert(reward: &RewardTable, rho: f64) -> Result<Policy, ExpertError> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(ExpertError::RhoOutOfRange(rho));
    }
    let base = optimal_expert(reward);
    let uniform_mass = rho / reward.num_outputs() as f64;
    let rows = base
        .rows
        .iter()
        .map(|star| {
            let probs = star.probs().iter().map(|&p| uniform_mass + (1.0 - rho) * p).collect();
            Dist::new(probs).expect("convex combination of distributions")
        })
        .collect();
    Ok(Policy { label: format!("noisy(rho={rho})"), rows })
}

/// Partition experts: expert `i` plays optimally on its own cell of the
/// input partition and uniformly at random everywhere else.
pub fn partition_experts(
    reward: &RewardTable,
    partition: &[Vec<usize>],
) -> Result<Vec<Policy>, ExpertError> {
    if partition.len() < 2 {
        return Err(ExpertError::BadPartition("need at least 2 cells".into()));
    }
    let n = reward.num_inputs();
    let mut owner = vec![usize::MAX; n];
    for (i, cell) in partition.iter().enumerate() {
        if cell.is_empty() {
            return Err(ExpertError::BadPartition(format!("cell {i} is empty")));
        }
        for &x in cell {
            if x >= n {
                return Err(ExpertError::BadPartition(format!("input {x} out of range")));
            }
            if owner[x] != usize::MAX {
                return Err(ExpertError::BadPartition(format!(
                    "input {x} appears in cells {} and {i}",
                    owner[x]
                )));
            }
            owner[x] = i;
        }
    }
    if let Some(x) = owner.iter().position(|&o| o == usize::MAX) {
        return Err(ExpertError::BadPartition(format!("input {x} not covered by any cell")));
    }

    let star = optimal_expert(reward);
    let uniform = Dist::uniform(reward.num_outputs());
    Ok(partition
        .iter()
        .enumerate()
        .map(|(i, _)| {
            let rows = (0..n)
                .map(|x| if owner[x] == i { star.row(x).clone() } else { uniform.clone() })
                .collect();
            Policy { label: format!("partition-expert-{i}"), rows }
        })
        .collect())
}

/// The uniform (or weighted) mixture of experts — the exact cross-entropy
/// minimizer over data they jointly label.
pub fn mixture_policy(experts: &[Policy], weights: Option<&[f64]>) -> Result<Policy, ExpertError> {
    if experts.is_empty() {
        return Err(ExpertError::DimensionMismatch("no experts to mix".into()));
    }
    let inputs = experts[0].num_inputs();
    let outputs = experts[0].num_outputs();
    if experts.iter().any(|e| e.num_inputs() != inputs || e.num_outputs() != outputs) {
        return Err(ExpertError::DimensionMismatch("experts differ in table shape".into()));
    }
    let rows = (0..inputs)
        .map(|x| {
            let row_dists: Vec<Dist> = experts.iter().map(|e| e.row(x).clone()).collect();
            dist::mix(&row_dists, weights)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Policy { label: "mixture".into(), rows })
}

/// Tabular maximum-likelihood fit from (input, output) samples.
///
/// Relative frequencies with additive smoothing; inputs never observed fall
/// back to the uniform distribution, the maximum-entropy completion.
pub fn fit_empirical(
    samples: &[(usize, usize)],
    num_inputs: usize,
    num_outputs: usize,
    smoothing: f64,
) -> Result<Policy, ExpertError> {
    assert!(smoothing >= 0.0, "smoothing must be non-negative");
    let mut counts = vec![vec![0u64; num_outputs]; num_inputs];
    for &(x, y) in samples {
        if x >= num_inputs || y >= num_outputs {
            return Err(ExpertError::IndexOutOfRange { input: x, output: y, num_inputs, num_outputs });
        }
        counts[x][y] += 1;
    }
    let rows = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            if total == 0 && smoothing == 0.0 {
                Dist::uniform(num_outputs)
            } else {
                let weights: Vec<f64> = row.iter().map(|&c| c as f64 + smoothing).collect();
                dist::normalize(&weights).expect("positive after smoothing or counts")
            }
        })
        .collect();
    Ok(Policy { label: "empirical".into(), rows })
}

/// Applies a temperature transform to every row of a policy.
pub fn temper(policy: &Policy, tau: Temperature, scheme: TemperScheme) -> Policy {
    let rows = policy.rows.iter().map(|d| dist::temper_dist(d, tau, scheme)).collect();
    Policy {
        label: format!("{}~{}(tau={})", policy.label, scheme, tau.value()),
        rows,
    }
}

/// A policy with independently random rows; handy for brute-force baselines.
pub fn random_policy<R: Rng>(
    num_inputs: usize,
    num_outputs: usize,
    rng: &mut R,
    label: impl Into<String>,
) -> Policy {
    let rows = (0..num_inputs)
        .map(|_| {
            let weights: Vec<f64> = (0..num_outputs).map(|_| rng.gen::<f64>() + 1e-9).collect();
            dist::normalize(&weights).expect("positive weights")
        })
        .collect();
    Policy { label: label.into(), rows }
}
