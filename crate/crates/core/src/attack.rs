//! One-feature poisoning attacks.
//!
//! Density mixing: nature draws a binary-labeled feature from per-class
//! densities; the attacker injects mass `epsilon/2` into each class from a
//! density centred between the class means, dragging both class means
//! toward each other. The attacked mean of a class with mean `u_c` is
//! `(1 - epsilon) * u_c + epsilon * u`.
//!
//! Value corruption: an adversary that targets an attribute replaces its
//! value `u` by `u^2`; the learner observes its chosen attributes from the
//! corrupted record.
//!
//! Streams are generated in fixed-size chunks with per-chunk RNG streams
//! derived from `(seed, chunk index)`, so disjoint index ranges can be
//! produced independently and the output never depends on the degree of
//! parallelism.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};

use crate::game::PureStrategy;

/// Samples per RNG stream when generating poisoned data.
const STREAM_CHUNK: usize = 4096;

#[derive(Debug, Clone, thiserror::Error)]
pub enum AttackError {
    #[error("epsilon must satisfy 0 <= epsilon < 1, got {0}")]
    InvalidEpsilon(f64),
    #[error("class prior must lie in (0, 1), got {0}")]
    InvalidPrior(f64),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("class means must satisfy u_minus < u_plus (got {minus} >= {plus})")]
    MeanOrdering { minus: f64, plus: f64 },
    #[error("attribute index {index} out of range for {len} values")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("strategies have different lengths ({learner} vs {adversary})")]
    StrategyLengthMismatch { learner: usize, adversary: usize },
    #[error("need at least {min} samples, got {got}")]
    SampleCountTooSmall { min: usize, got: usize },
    #[error("degenerate stream: {0}")]
    DegenerateStream(String),
}

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

/// A one-dimensional parametric density with an analytic mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    Normal { mean: f64, std: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Density {
    pub fn validate(&self) -> Result<(), AttackError> {
        match *self {
            Density::Normal { mean, std } => {
                if !mean.is_finite() || !std.is_finite() || std <= 0.0 {
                    return Err(AttackError::InvalidDensity(format!(
                        "normal(mean={mean}, std={std}) requires finite mean and std > 0"
                    )));
                }
            }
            Density::Uniform { lo, hi } => {
                if !lo.is_finite() || !hi.is_finite() || lo >= hi {
                    return Err(AttackError::InvalidDensity(format!(
                        "uniform(lo={lo}, hi={hi}) requires lo < hi"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Density::Normal { mean, .. } => mean,
            Density::Uniform { lo, hi } => 0.5 * (lo + hi),
        }
    }

    pub fn std(&self) -> f64 {
        match *self {
            Density::Normal { std, .. } => std,
            Density::Uniform { lo, hi } => (hi - lo) / 12f64.sqrt(),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Density::Normal { mean, std } => {
                Normal::new(mean, std).expect("validated").sample(rng)
            }
            Density::Uniform { lo, hi } => Uniform::new(lo, hi).expect("validated").sample(rng),
        }
    }
}

/// The two class-conditional densities of the clean data. Orientation is
/// fixed: the minus class sits below the plus class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledDensityPair {
    pub plus: Density,
    pub minus: Density,
}

impl LabeledDensityPair {
    pub fn new(plus: Density, minus: Density) -> Result<Self, AttackError> {
        let pair = LabeledDensityPair { plus, minus };
        pair.validate()?;
        Ok(pair)
    }

    pub fn validate(&self) -> Result<(), AttackError> {
        self.plus.validate()?;
        self.minus.validate()?;
        if self.minus.mean() >= self.plus.mean() {
            return Err(AttackError::MeanOrdering {
                minus: self.minus.mean(),
                plus: self.plus.mean(),
            });
        }
        Ok(())
    }

    /// Midpoint of the two class means, the attacker's default target.
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.plus.mean() + self.minus.mean())
    }
}

fn default_prior() -> f64 {
    0.5
}

/// The attacker's mixing weight, density, and nature's class prior.
///
/// `epsilon = 0` is the no-attack control. The derivation of the mean shift
/// uses only the attacker density's mean, so any parametric density is
/// accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub epsilon: f64,
    pub attacker: Density,
    /// Probability that nature draws the plus class.
    #[serde(default = "default_prior")]
    pub class_prior_plus: f64,
}

impl AttackConfig {
    pub fn new(epsilon: f64, attacker: Density) -> Result<Self, AttackError> {
        let config = AttackConfig {
            epsilon,
            attacker,
            class_prior_plus: default_prior(),
        };
        config.validate()?;
        Ok(config)
    }

    /// The paper's default attack: a normal density centred on the midpoint
    /// of the class means, with the average of the class standard
    /// deviations.
    pub fn midpoint(pair: &LabeledDensityPair, epsilon: f64) -> Result<Self, AttackError> {
        pair.validate()?;
        let attacker = Density::Normal {
            mean: pair.midpoint(),
            std: 0.5 * (pair.plus.std() + pair.minus.std()),
        };
        AttackConfig::new(epsilon, attacker)
    }

    pub fn validate(&self) -> Result<(), AttackError> {
        if !self.epsilon.is_finite() || !(0.0..1.0).contains(&self.epsilon) {
            return Err(AttackError::InvalidEpsilon(self.epsilon));
        }
        if !(self.class_prior_plus > 0.0 && self.class_prior_plus < 1.0) {
            return Err(AttackError::InvalidPrior(self.class_prior_plus));
        }
        self.attacker.validate()
    }
}

// ---------------------------------------------------------------------------
// Poisoned streams
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassLabel {
    Plus,
    Minus,
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ClassLabel::Plus => "+",
            ClassLabel::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Nature,
    Attacker,
}

impl std::fmt::Display for Origin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Origin::Nature => "nature",
            Origin::Attacker => "attacker",
        })
    }
}

/// One labeled feature value. Attacker-origin samples carry the label the
/// attack assigned, not nature's.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoisonedSample {
    pub x: f64,
    pub label: ClassLabel,
    pub origin: Origin,
}

/// Draw `n` samples of the poisoned mixture. Each sample independently: with
/// probability `epsilon/2` the attacker draws from its density and labels
/// plus; with the same probability it labels minus; otherwise nature picks a
/// class by the prior and draws from that class's density. Deterministic
/// given `(pair, attack, seed)` and independent of chunking.
pub fn sample_poisoned_stream(
    pair: &LabeledDensityPair,
    attack: &AttackConfig,
    n: usize,
    seed: u64,
) -> Result<Vec<PoisonedSample>, AttackError> {
    pair.validate()?;
    attack.validate()?;
    if n < 1 {
        return Err(AttackError::SampleCountTooSmall { min: 1, got: n });
    }
    let half_eps = attack.epsilon / 2.0;
    let mut out = Vec::with_capacity(n);
    for chunk_start in (0..n).step_by(STREAM_CHUNK) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((chunk_start / STREAM_CHUNK) as u64);
        let chunk_len = STREAM_CHUNK.min(n - chunk_start);
        for _ in 0..chunk_len {
            let branch: f64 = rng.random();
            let sample = if branch < half_eps {
                PoisonedSample {
                    x: attack.attacker.sample(&mut rng),
                    label: ClassLabel::Plus,
                    origin: Origin::Attacker,
                }
            } else if branch < attack.epsilon {
                PoisonedSample {
                    x: attack.attacker.sample(&mut rng),
                    label: ClassLabel::Minus,
                    origin: Origin::Attacker,
                }
            } else {
                let class: f64 = rng.random();
                if class < attack.class_prior_plus {
                    PoisonedSample {
                        x: pair.plus.sample(&mut rng),
                        label: ClassLabel::Plus,
                        origin: Origin::Nature,
                    }
                } else {
                    PoisonedSample {
                        x: pair.minus.sample(&mut rng),
                        label: ClassLabel::Minus,
                        origin: Origin::Nature,
                    }
                }
            };
            out.push(sample);
        }
    }
    Ok(out)
}

/// The attacked class mean `(1 - epsilon) * u_class + epsilon * u_attacker`.
pub fn predicted_attacked_mean(u_class: f64, u_attacker: f64, epsilon: f64) -> f64 {
    (1.0 - epsilon) * u_class + epsilon * u_attacker
}

/// Count, mean, and sample standard deviation of one class in a stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassStats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

/// Per-class statistics of a stream's feature values, `(plus, minus)`.
pub fn class_stats(stream: &[PoisonedSample]) -> (Option<ClassStats>, Option<ClassStats>) {
    fn stats(values: impl Iterator<Item = f64> + Clone) -> Option<ClassStats> {
        let count = values.clone().count();
        if count == 0 {
            return None;
        }
        let mean = values.clone().sum::<f64>() / count as f64;
        let var = if count > 1 {
            values.map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64
        } else {
            0.0
        };
        Some(ClassStats {
            count,
            mean,
            std: var.sqrt(),
        })
    }
    let plus = stats(
        stream
            .iter()
            .filter(|s| s.label == ClassLabel::Plus)
            .map(|s| s.x),
    );
    let minus = stats(
        stream
            .iter()
            .filter(|s| s.label == ClassLabel::Minus)
            .map(|s| s.x),
    );
    (plus, minus)
}

// ---------------------------------------------------------------------------
// Value corruption
// ---------------------------------------------------------------------------

/// Square every attribute the adversary targets, then return the values the
/// learner observes at its own chosen attributes, in block order. Attributes
/// outside both strategies are untouched; a learner choice the adversary did
/// not target reads through unchanged.
pub fn corrupt_square(
    values: &[f64],
    learner: &PureStrategy,
    adversary: &PureStrategy,
) -> Result<Vec<f64>, AttackError> {
    if learner.choices.len() != adversary.choices.len() {
        return Err(AttackError::StrategyLengthMismatch {
            learner: learner.choices.len(),
            adversary: adversary.choices.len(),
        });
    }
    let mut corrupted = values.to_vec();
    for &target in &adversary.choices {
        let index = target as usize;
        let slot = corrupted
            .get_mut(index)
            .ok_or(AttackError::IndexOutOfRange {
                index,
                len: values.len(),
            })?;
        *slot = *slot * *slot;
    }
    learner
        .choices
        .iter()
        .map(|&choice| {
            let index = choice as usize;
            corrupted
                .get(index)
                .copied()
                .ok_or(AttackError::IndexOutOfRange {
                    index,
                    len: values.len(),
                })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Attacked-quality estimation
// ---------------------------------------------------------------------------

/// Train the built-in one-feature threshold classifier (nearest class
/// centroid) on the first 80% of a poisoned stream and return accuracy on
/// the held-out 20%. Bridges the attack simulation to attacked-quality
/// table entries.
pub fn estimate_attacked_quality(
    pair: &LabeledDensityPair,
    attack: &AttackConfig,
    n: usize,
    seed: u64,
) -> Result<f64, AttackError> {
    if n < 100 {
        return Err(AttackError::SampleCountTooSmall { min: 100, got: n });
    }
    let stream = sample_poisoned_stream(pair, attack, n, seed)?;
    let split = (n * 4) / 5;
    let (train, test) = stream.split_at(split);

    let (plus, minus) = class_stats(train);
    let (plus, minus) = match (plus, minus) {
        (Some(p), Some(m)) => (p, m),
        _ => {
            return Err(AttackError::DegenerateStream(
                "training split contains a single class".into(),
            ))
        }
    };

    let correct = test
        .iter()
        .filter(|s| {
            let predicted = if (s.x - plus.mean).abs() < (s.x - minus.mean).abs() {
                ClassLabel::Plus
            } else {
                ClassLabel::Minus
            };
            predicted == s.label
        })
        .count();
    Ok(correct as f64 / test.len() as f64)
}
