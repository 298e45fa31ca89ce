//! Exact probability primitives on finite output spaces.
//!
//! Everything downstream — expert families, reward functionals, the solved
//! game, the chess diversity metric — is built on [`Dist`], a validated
//! probability vector, and on the two temperature transforms defined here.
//!
//! Two distinct temperature schemes coexist on purpose. The formal softmax
//! definition applies `exp(q_y/tau)` directly to probabilities, so `tau = 1`
//! is *not* the identity. Sampling stacks instead divide logits by the
//! temperature, which on probabilities is the power map `q_y^(1/tau)` and
//! leaves `tau = 1` untouched. Both share the limit that matters: as
//! `tau -> 0` they converge to the argmax distribution. Every experiment
//! records which scheme produced its numbers.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Sum-to-one tolerance for validated distributions.
pub const SUM_TOLERANCE: f64 = 1e-12;

/// Default tolerance when deciding that two probabilities are tied.
///
/// Distinguishes genuine analytic ties (exact convex combinations of equal
/// entries) from double-rounding noise.
pub const DEFAULT_TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistError {
    #[error("all weights are zero")]
    AllZero,
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },
    #[error("non-finite weight at index {index}")]
    NonFinite { index: usize },
    #[error("empty probability vector")]
    Empty,
    #[error("entries sum to {sum}, not 1")]
    NotNormalized { sum: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("entropy support must be at least 2, got {0}")]
    SupportTooSmall(usize),
    #[error("no observations in count vector")]
    NoObservations,
    #[error("{nonzero} distinct actions observed but support is {support}")]
    SupportExceeded { nonzero: usize, support: usize },
    #[error("temperature must be positive and finite, got {0}")]
    BadTemperature(f64),
    #[error("all positive-mass entries underflowed during tempering")]
    ZeroSupportCollapse,
}

/// A probability vector over a finite output space.
///
/// Invariants: every entry is non-negative and finite, the entries sum to 1
/// within [`SUM_TOLERANCE`], and the dimension is at least 1 and fixed at
/// construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Dist(Vec<f64>);

impl Dist {
    /// Validates `probs` as a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self, DistError> {
        if probs.is_empty() {
            return Err(DistError::Empty);
        }
        let mut sum = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() {
                return Err(DistError::NonFinite { index: i });
            }
            if p < 0.0 {
                return Err(DistError::NegativeWeight { index: i, value: p });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(DistError::NotNormalized { sum });
        }
        Ok(Dist(probs))
    }

    /// Uniform distribution over `n` outputs.
    pub fn uniform(n: usize) -> Self {
        assert!(n >= 1, "need at least one output");
        Dist(vec![1.0 / n as f64; n])
    }

    /// Point mass on output `idx`.
    pub fn point_mass(n: usize, idx: usize) -> Self {
        assert!(idx < n, "point mass index out of range");
        let mut v = vec![0.0; n];
        v[idx] = 1.0;
        Dist(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false // dimension >= 1 by construction
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.0[idx]
    }

    /// Indices attaining the maximum probability, within `tie_eps`.
    pub fn argmax_set(&self, tie_eps: f64) -> Vec<usize> {
        let max = self.0.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (0..self.0.len()).filter(|&i| self.0[i] >= max - tie_eps).collect()
    }

    /// Largest absolute entrywise difference to `other`.
    pub fn sup_distance(&self, other: &Dist) -> f64 {
        assert_eq!(self.len(), other.len(), "sup_distance on mismatched dims");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Expectation of `values` under this distribution.
    pub fn expectation(&self, values: &[f64]) -> f64 {
        assert_eq!(self.len(), values.len(), "expectation on mismatched dims");
        self.0.iter().zip(values).map(|(p, v)| p * v).sum()
    }

    /// Sample an output id.
    pub fn sample<R: rand::Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (i, &p) in self.0.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.0.len() - 1 // rounding slack lands on the last output
    }
}

impl<'de> Deserialize<'de> for Dist {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let probs = Vec::<f64>::deserialize(deserializer)?;
        Dist::new(probs).map_err(serde::de::Error::custom)
    }
}

/// A sampling temperature: either a positive finite value or exact argmax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Temperature {
    /// The `tau -> 0` limit: sampling from the argmax distribution.
    Zero,
    /// A positive finite temperature.
    Tau(f64),
}

impl Temperature {
    /// Validates a positive finite temperature; `0.0` maps to [`Temperature::Zero`].
    pub fn new(tau: f64) -> Result<Self, DistError> {
        if tau == 0.0 {
            Ok(Temperature::Zero)
        } else if tau.is_finite() && tau > 0.0 {
            Ok(Temperature::Tau(tau))
        } else {
            Err(DistError::BadTemperature(tau))
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Temperature::Zero)
    }

    /// The numeric value, with 0.0 standing in for the argmax limit.
    pub fn value(&self) -> f64 {
        match self {
            Temperature::Zero => 0.0,
            Temperature::Tau(t) => *t,
        }
    }
}

/// Which temperature transform to apply to a probability vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TemperScheme {
    /// `softmax(q; tau)_y = exp(q_y/tau) / sum exp(q_{y'}/tau)`.
    /// `tau = 1` reshapes the distribution.
    SoftmaxOnProbs,
    /// `q_y^(1/tau)` renormalized, computed in log space.
    /// `tau = 1` is the exact identity.
    PowerOnProbs,
}

impl std::fmt::Display for TemperScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TemperScheme::SoftmaxOnProbs => write!(f, "softmax_on_probs"),
            TemperScheme::PowerOnProbs => write!(f, "power_on_probs"),
        }
    }
}

/// Normalizes non-negative weights into a [`Dist`].
pub fn normalize(weights: &[f64]) -> Result<Dist, DistError> {
    if weights.is_empty() {
        return Err(DistError::Empty);
    }
    let mut sum = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() {
            return Err(DistError::NonFinite { index: i });
        }
        if w < 0.0 {
            return Err(DistError::NegativeWeight { index: i, value: w });
        }
        sum += w;
    }
    if sum == 0.0 {
        return Err(DistError::AllZero);
    }
    Ok(Dist(weights.iter().map(|w| w / sum).collect()))
}

/// Softmax with temperature applied directly to probabilities.
///
/// Order-isomorphic to the input for every positive `tau`; converges to
/// [`argmax_dist`] as `tau -> 0`. A [`Temperature::Zero`] routes to the
/// argmax distribution with the default tie tolerance.
pub fn softmax_on_probs(q: &Dist, tau: Temperature) -> Dist {
    let t = match tau {
        Temperature::Zero => return argmax_dist(q, DEFAULT_TIE_EPS),
        Temperature::Tau(t) => t,
    };
    // Shift by the max before exponentiating so small tau cannot overflow.
    let max = q.probs().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = q.probs().iter().map(|&p| ((p - max) / t).exp()).collect();
    let sum: f64 = exps.iter().sum();
    Dist(exps.into_iter().map(|e| e / sum).collect())
}

/// Power-map temperature on probabilities: `q_y^(1/tau)` renormalized.
///
/// Equivalent to dividing logits by `tau` before a softmax. `tau = 1`
/// returns the input bitwise; `tau -> 0` converges to [`argmax_dist`].
pub fn power_on_probs(q: &Dist, tau: Temperature) -> Result<Dist, DistError> {
    let t = match tau {
        Temperature::Zero => return Ok(argmax_dist(q, DEFAULT_TIE_EPS)),
        Temperature::Tau(t) => t,
    };
    if t == 1.0 {
        return Ok(q.clone());
    }
    // Work on log probabilities, shifted by the max over the support, so the
    // largest entries stay representable no matter how small tau gets.
    let log_max = q
        .probs()
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p.ln())
        .fold(f64::NEG_INFINITY, f64::max);
    let powered: Vec<f64> = q
        .probs()
        .iter()
        .map(|&p| {
            if p > 0.0 {
                ((p.ln() - log_max) / t).exp()
            } else {
                0.0
            }
        })
        .collect();
    let sum: f64 = powered.iter().sum();
    if sum <= 0.0 || !sum.is_finite() {
        // Unreachable in log space: the maximal entry maps to exp(0) = 1.
        return Err(DistError::ZeroSupportCollapse);
    }
    Ok(Dist(powered.into_iter().map(|e| e / sum).collect()))
}

/// Uniform distribution over the entries within `tie_eps` of the maximum.
pub fn argmax_dist(q: &Dist, tie_eps: f64) -> Dist {
    assert!(tie_eps >= 0.0, "tie_eps must be non-negative");
    let winners = q.argmax_set(tie_eps);
    let share = 1.0 / winners.len() as f64;
    let mut out = vec![0.0; q.len()];
    for i in winners {
        out[i] = share;
    }
    Dist(out)
}

/// Entrywise weighted average of distributions sharing a dimension.
///
/// `weights` defaults to uniform `1/k`; any non-negative weights are
/// normalized before mixing.
pub fn mix(dists: &[Dist], weights: Option<&[f64]>) -> Result<Dist, DistError> {
    if dists.is_empty() {
        return Err(DistError::Empty);
    }
    let dim = dists[0].len();
    for d in dists {
        if d.len() != dim {
            return Err(DistError::DimensionMismatch { expected: dim, got: d.len() });
        }
    }
    let w = match weights {
        Some(w) => {
            if w.len() != dists.len() {
                return Err(DistError::DimensionMismatch { expected: dists.len(), got: w.len() });
            }
            normalize(w)?
        }
        None => Dist::uniform(dists.len()),
    };
    let mut out = vec![0.0; dim];
    for (d, &wi) in dists.iter().zip(w.probs()) {
        for (o, &p) in out.iter_mut().zip(d.probs()) {
            *o += wi * p;
        }
    }
    Ok(Dist(out))
}

/// Applies the chosen temperature transform to a single distribution.
pub fn temper_dist(q: &Dist, tau: Temperature, scheme: TemperScheme) -> Dist {
    match scheme {
        TemperScheme::SoftmaxOnProbs => softmax_on_probs(q, tau),
        TemperScheme::PowerOnProbs => {
            power_on_probs(q, tau).expect("log-space power transform cannot collapse")
        }
    }
}

/// Shannon entropy of empirical action counts, normalized by
/// `log2(support_size)` so the result lands in `[0, 1]`.
///
/// A point mass returns 0; zero counts contribute 0 by the usual
/// `0 log 0 = 0` convention.
pub fn normalized_entropy(counts: &[u64], support_size: usize) -> Result<f64, DistError> {
    if support_size < 2 {
        return Err(DistError::SupportTooSmall(support_size));
    }
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(DistError::NoObservations);
    }
    let nonzero = counts.iter().filter(|&&c| c > 0).count();
    if nonzero > support_size {
        return Err(DistError::SupportExceeded { nonzero, support: support_size });
    }
    let total = total as f64;
    let h: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.log2()
        })
        .sum();
    Ok(h / (support_size as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> Dist {
        Dist::new(v.to_vec()).unwrap()
    }

    #[test]
    fn normalize_splits_equal_weights() {
        let d = normalize(&[2.0, 2.0]).unwrap();
        assert_eq!(d.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn normalize_keeps_point_mass() {
        let d = normalize(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(d.probs(), &[1.0, 0.0, 0.0]);
    }

    #[test]
    fn normalize_rejects_degenerate_input() {
        assert_eq!(normalize(&[0.0, 0.0]), Err(DistError::AllZero));
        assert!(matches!(
            normalize(&[1.0, -0.5]),
            Err(DistError::NegativeWeight { index: 1, .. })
        ));
        assert!(matches!(normalize(&[f64::NAN]), Err(DistError::NonFinite { index: 0 })));
        assert_eq!(normalize(&[]), Err(DistError::Empty));
    }

    #[test]
    fn softmax_fixes_uniform() {
        let q = Dist::uniform(5);
        for tau in [0.01, 0.5, 1.0, 2.0] {
            let out = softmax_on_probs(&q, Temperature::new(tau).unwrap());
            assert!(out.sup_distance(&q) < 1e-15);
        }
    }

    #[test]
    fn softmax_at_tau_one_matches_exponentials() {
        // Independent evaluation of exp(0.5), exp(0.3), exp(0.2).
        let q = dist(&[0.5, 0.3, 0.2]);
        let out = softmax_on_probs(&q, Temperature::Tau(1.0));
        let e = [0.5f64.exp(), 0.3f64.exp(), 0.2f64.exp()];
        let z: f64 = e.iter().sum();
        for i in 0..3 {
            assert!((out.get(i) - e[i] / z).abs() < 1e-15);
        }
    }

    #[test]
    fn softmax_small_tau_approaches_argmax() {
        let q = dist(&[0.5, 0.3, 0.2]);
        let out = softmax_on_probs(&q, Temperature::Tau(0.01));
        assert!(out.get(0) >= 1.0 - 1e-6);
        assert!(out.sup_distance(&argmax_dist(&q, DEFAULT_TIE_EPS)) <= 1e-6);
    }

    #[test]
    fn power_exact_rational_case() {
        // (0.8, 0.2) at tau = 0.5 squares to (0.64, 0.04) -> (16/17, 1/17).
        let q = dist(&[0.8, 0.2]);
        let out = power_on_probs(&q, Temperature::Tau(0.5)).unwrap();
        assert!((out.get(0) - 16.0 / 17.0).abs() < 1e-12);
        assert!((out.get(1) - 1.0 / 17.0).abs() < 1e-12);
    }

    #[test]
    fn power_at_tau_one_is_bitwise_identity() {
        let q = dist(&[0.8, 0.2]);
        let out = power_on_probs(&q, Temperature::Tau(1.0)).unwrap();
        assert_eq!(out, q);
    }

    #[test]
    fn power_small_tau_approaches_argmax() {
        let q = dist(&[0.3, 0.3, 0.4]);
        let out = power_on_probs(&q, Temperature::Tau(0.001)).unwrap();
        assert!(out.sup_distance(&dist(&[0.0, 0.0, 1.0])) <= 1e-9);
    }

    #[test]
    fn power_preserves_zeros() {
        let q = dist(&[0.0, 0.6, 0.4]);
        let out = power_on_probs(&q, Temperature::Tau(0.25)).unwrap();
        assert_eq!(out.get(0), 0.0);
    }

    #[test]
    fn argmax_unique_maximum() {
        let out = argmax_dist(&dist(&[0.2, 0.5, 0.3]), DEFAULT_TIE_EPS);
        assert_eq!(out.probs(), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn argmax_splits_ties() {
        let out = argmax_dist(&dist(&[0.4, 0.4, 0.2]), 1e-9);
        assert_eq!(out.probs(), &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn argmax_fixes_point_mass() {
        let q = Dist::point_mass(4, 2);
        assert_eq!(argmax_dist(&q, DEFAULT_TIE_EPS), q);
    }

    #[test]
    fn mix_averages_two_experts() {
        let a = dist(&[0.6, 0.4, 0.0]);
        let b = dist(&[0.0, 0.4, 0.6]);
        let m = mix(&[a, b], None).unwrap();
        assert!(m.sup_distance(&dist(&[0.3, 0.4, 0.3])) < 1e-15);
    }

    #[test]
    fn mix_single_and_identical_inputs() {
        let a = dist(&[0.25, 0.75]);
        assert_eq!(mix(std::slice::from_ref(&a), None).unwrap(), a);
        let u = Dist::uniform(6);
        let m = mix(&vec![u.clone(); 4], None).unwrap();
        assert!(m.sup_distance(&u) < 1e-15);
    }

    #[test]
    fn mix_rejects_mismatched_dims() {
        let a = Dist::uniform(3);
        let b = Dist::uniform(4);
        assert!(matches!(mix(&[a, b], None), Err(DistError::DimensionMismatch { .. })));
    }

    #[test]
    fn entropy_examples() {
        // Uniform over 4 of 16: log2(4)/log2(16) = 0.5.
        let counts = [5u64, 5, 5, 5];
        assert!((normalized_entropy(&counts, 16).unwrap() - 0.5).abs() < 1e-15);
        // Point mass.
        assert_eq!(normalized_entropy(&[7, 0, 0], 20).unwrap(), 0.0);
        // Uniform over the whole support.
        let full = [3u64; 8];
        assert!((normalized_entropy(&full, 8).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_bad_support() {
        assert_eq!(normalized_entropy(&[1, 1], 1), Err(DistError::SupportTooSmall(1)));
        assert_eq!(normalized_entropy(&[0, 0], 4), Err(DistError::NoObservations));
        assert_eq!(
            normalized_entropy(&[1, 1, 1], 2),
            Err(DistError::SupportExceeded { nonzero: 3, support: 2 })
        );
    }

    #[test]
    fn temperature_validation() {
        assert!(Temperature::new(0.5).is_ok());
        assert_eq!(Temperature::new(0.0), Ok(Temperature::Zero));
        assert!(Temperature::new(-1.0).is_err());
        assert!(Temperature::new(f64::NAN).is_err());
        assert!(Temperature::new(f64::INFINITY).is_err());
    }

    #[test]
    fn zero_temperature_routes_to_argmax() {
        let q = dist(&[0.3, 0.4, 0.3]);
        let a = argmax_dist(&q, DEFAULT_TIE_EPS);
        assert_eq!(softmax_on_probs(&q, Temperature::Zero), a);
        assert_eq!(power_on_probs(&q, Temperature::Zero).unwrap(), a);
        assert_eq!(temper_dist(&q, Temperature::Zero, TemperScheme::PowerOnProbs), a);
    }

    #[test]
    fn dist_rejects_unnormalized() {
        assert!(matches!(
            Dist::new(vec![0.5, 0.6]),
            Err(DistError::NotNormalized { .. })
        ));
        assert!(Dist::new(vec![]).is_err());
    }

    #[test]
    fn sample_respects_point_mass() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let d = Dist::point_mass(5, 3);
        for _ in 0..50 {
            assert_eq!(d.sample(&mut rng), 3);
        }
    }
}
