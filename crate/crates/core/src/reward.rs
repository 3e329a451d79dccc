//! Quality tables and the reward-function game.
//!
//! A quality table records the learning quality `Q(a_l)` of every learner
//! strategy and the degraded quality `Q(a_l, a_a)` under each attack. The
//! model assumes a collision on at least one block strictly lowers quality
//! and that attacks missing every learned attribute change nothing. The
//! reward the learner pays the adversary is
//! `R(a_l, a_a) = Q(a_l) + (Q(a_l) - Q(a_l, a_a))`, which exceeds `Q(a_l)`
//! exactly on collision pairs.

use serde::{Deserialize, Serialize};

use crate::game::{GameError, Partition, PayoffMatrix, Provenance, Role, DEFAULT_STRATEGY_CAP};

/// Quality differences below this are treated as exact equality.
pub const QUALITY_EQ_TOL: f64 = 1e-12;

#[derive(Debug, Clone, thiserror::Error)]
pub enum RewardError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("base quality has {got} entries but the partition has {expected} pure strategies")]
    BaseLength { expected: usize, got: usize },
    #[error("attacked quality table has {got} entries, expected {expected}")]
    AttackedLength { expected: usize, got: usize },
    #[error("strategy index {index} out of range (p = {p})")]
    IndexOutOfRange { index: usize, p: usize },
    #[error("quality values must be finite")]
    NonFiniteQuality,
    #[error("quality table violates the reward assumptions ({count} violations, first: {first})")]
    InvalidTable { count: usize, first: String },
    #[error("confidence interval half-width must be > 0, got {0}")]
    InvalidHalfWidth(f64),
    #[error("interval center {center} does not match base quality {base}")]
    IntervalOffCenter { center: f64, base: f64 },
    #[error("matrix provenance is {0:?}, expected a reward matrix built from this table")]
    WrongProvenance(Provenance),
}

// ---------------------------------------------------------------------------
// QualityTable
// ---------------------------------------------------------------------------

/// Learning quality per learner strategy, plus (optionally sparse) quality
/// under attack per strategy pair. Indices follow the canonical strategy
/// order of the partition.
#[derive(Debug, Clone, PartialEq)]
pub struct QualityTable {
    base: Vec<f64>,
    /// Row-major `p * p`, learner-major; `None` marks a missing entry.
    attacked: Vec<Option<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct QualityTableSpec {
    base_quality: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attacked_quality: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    attacked_triplets: Option<Vec<(usize, usize, f64)>>,
}

impl QualityTable {
    /// A table with base qualities only; attacked entries start missing.
    pub fn new(base: Vec<f64>) -> Result<Self, RewardError> {
        if base.iter().any(|q| !q.is_finite()) {
            return Err(RewardError::NonFiniteQuality);
        }
        let p = base.len();
        Ok(QualityTable {
            base,
            attacked: vec![None; p * p],
        })
    }

    /// A table with a dense `p x p` attacked-quality matrix (row = learner).
    pub fn with_dense_attacked(base: Vec<f64>, attacked: Vec<Vec<f64>>) -> Result<Self, RewardError> {
        let p = base.len();
        let mut table = QualityTable::new(base)?;
        if attacked.len() != p || attacked.iter().any(|row| row.len() != p) {
            return Err(RewardError::AttackedLength {
                expected: p * p,
                got: attacked.iter().map(Vec::len).sum(),
            });
        }
        for (l, row) in attacked.into_iter().enumerate() {
            for (a, q) in row.into_iter().enumerate() {
                table.set_attacked(l, a, q)?;
            }
        }
        Ok(table)
    }

    /// A table filled from sparse `(learner, adversary, quality)` triplets.
    pub fn from_triplets(
        base: Vec<f64>,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self, RewardError> {
        let mut table = QualityTable::new(base)?;
        for &(l, a, q) in triplets {
            table.set_attacked(l, a, q)?;
        }
        Ok(table)
    }

    pub fn set_attacked(&mut self, learner: usize, adversary: usize, q: f64) -> Result<(), RewardError> {
        let p = self.base.len();
        if learner >= p {
            return Err(RewardError::IndexOutOfRange { index: learner, p });
        }
        if adversary >= p {
            return Err(RewardError::IndexOutOfRange { index: adversary, p });
        }
        if !q.is_finite() {
            return Err(RewardError::NonFiniteQuality);
        }
        self.attacked[learner * p + adversary] = Some(q);
        Ok(())
    }

    /// Number of learner strategies the table covers.
    pub fn strategy_count(&self) -> usize {
        self.base.len()
    }

    pub fn base(&self, learner: usize) -> Option<f64> {
        self.base.get(learner).copied()
    }

    pub fn base_quality(&self) -> &[f64] {
        &self.base
    }

    pub fn attacked(&self, learner: usize, adversary: usize) -> Option<f64> {
        let p = self.base.len();
        if learner >= p || adversary >= p {
            return None;
        }
        self.attacked[learner * p + adversary]
    }

    /// Whether the base quality is the same for every learner strategy.
    pub fn has_constant_base(&self) -> bool {
        self.base
            .windows(2)
            .all(|w| (w[0] - w[1]).abs() <= QUALITY_EQ_TOL)
    }

    /// Copy of the table with every quality-improving attack clamped back to
    /// the base quality. Used by the asymmetric validation mode: an attack
    /// that helps the learner is treated as a failed attack rather than a
    /// model violation.
    pub fn clamped_asymmetric(&self) -> QualityTable {
        let p = self.base.len();
        let mut out = self.clone();
        for l in 0..p {
            for a in 0..p {
                if let Some(q) = out.attacked[l * p + a] {
                    if q > self.base[l] {
                        out.attacked[l * p + a] = Some(self.base[l]);
                    }
                }
            }
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self, RewardError> {
        let spec: QualityTableSpec = serde_json::from_str(text)
            .map_err(|e| RewardError::InvalidTable { count: 1, first: format!("JSON: {e}") })?;
        match (spec.attacked_quality, spec.attacked_triplets) {
            (Some(dense), _) => QualityTable::with_dense_attacked(spec.base_quality, dense),
            (None, Some(triplets)) => QualityTable::from_triplets(spec.base_quality, &triplets),
            (None, None) => QualityTable::new(spec.base_quality),
        }
    }
}

impl Serialize for QualityTable {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let p = self.base.len();
        let complete = self.attacked.iter().all(Option::is_some);
        let spec = if complete && p > 0 {
            QualityTableSpec {
                base_quality: self.base.clone(),
                attacked_quality: Some(
                    (0..p)
                        .map(|l| (0..p).map(|a| self.attacked[l * p + a].unwrap()).collect())
                        .collect(),
                ),
                attacked_triplets: None,
            }
        } else {
            let triplets: Vec<(usize, usize, f64)> = (0..p)
                .flat_map(|l| (0..p).map(move |a| (l, a)))
                .filter_map(|(l, a)| self.attacked[l * p + a].map(|q| (l, a, q)))
                .collect();
            QualityTableSpec {
                base_quality: self.base.clone(),
                attacked_quality: None,
                attacked_triplets: (!triplets.is_empty()).then_some(triplets),
            }
        };
        spec.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QualityTable {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let spec = QualityTableSpec::deserialize(deserializer)?;
        let table = match (spec.attacked_quality, spec.attacked_triplets) {
            (Some(dense), _) => QualityTable::with_dense_attacked(spec.base_quality, dense),
            (None, Some(triplets)) => QualityTable::from_triplets(spec.base_quality, &triplets),
            (None, None) => QualityTable::new(spec.base_quality),
        };
        table.map_err(D::Error::custom)
    }
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

/// How quality-improving attacks are treated during validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValidationMode {
    /// Both assumptions enforced as written: collisions strictly lower
    /// quality, non-collisions leave it unchanged.
    Strict,
    /// Entries above the base quality are first clamped to it (the attack
    /// failed); collisions may then tie the base instead of beating it.
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// A colliding pair where the attack did not strictly lower quality.
    CollisionNotWorse,
    /// A non-colliding pair where quality changed anyway.
    NoCollisionChanged,
    /// The table has no entry for this pair.
    MissingEntry,
}

/// One offending strategy pair found by validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub learner: usize,
    pub adversary: usize,
    pub kind: ViolationKind,
    pub collisions: u32,
    pub base: f64,
    pub attacked: Option<f64>,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let attacked = self
            .attacked
            .map_or_else(|| "<missing>".to_string(), |q| q.to_string());
        match self.kind {
            ViolationKind::MissingEntry => write!(
                f,
                "pair ({}, {}): missing attacked-quality entry",
                self.learner, self.adversary
            ),
            ViolationKind::CollisionNotWorse => write!(
                f,
                "pair ({}, {}): {} collision(s) but attacked quality {attacked} is not below base {}",
                self.learner, self.adversary, self.collisions, self.base
            ),
            ViolationKind::NoCollisionChanged => write!(
                f,
                "pair ({}, {}): no collision but attacked quality {attacked} differs from base {}",
                self.learner, self.adversary, self.base
            ),
        }
    }
}

/// Check every strategy pair against the two reward assumptions. Returns
/// every violating pair; an empty list means the table is valid.
pub fn validate_quality_table(
    partition: &Partition,
    table: &QualityTable,
    mode: ValidationMode,
) -> Result<Vec<Violation>, RewardError> {
    let strategies = partition
        .pure_strategies_with_cap(Role::Learner, DEFAULT_STRATEGY_CAP)
        .map_err(RewardError::Game)?;
    let p = strategies.len();
    if table.strategy_count() != p {
        return Err(RewardError::BaseLength {
            expected: p,
            got: table.strategy_count(),
        });
    }
    let effective = match mode {
        ValidationMode::Strict => table.clone(),
        ValidationMode::Asymmetric => table.clamped_asymmetric(),
    };
    let mut violations = Vec::new();
    for (l, ls) in strategies.iter().enumerate() {
        let base = effective.base[l];
        for (a, as_) in strategies.iter().enumerate() {
            let collisions = ls
                .choices
                .iter()
                .zip(&as_.choices)
                .filter(|(x, y)| x == y)
                .count() as u32;
            let attacked = effective.attacked(l, a);
            let kind = match attacked {
                None => Some(ViolationKind::MissingEntry),
                Some(q) if collisions > 0 => {
                    let ok = match mode {
                        ValidationMode::Strict => q < base - QUALITY_EQ_TOL,
                        ValidationMode::Asymmetric => q <= base + QUALITY_EQ_TOL,
                    };
                    (!ok).then_some(ViolationKind::CollisionNotWorse)
                }
                Some(q) => {
                    ((q - base).abs() > QUALITY_EQ_TOL).then_some(ViolationKind::NoCollisionChanged)
                }
            };
            if let Some(kind) = kind {
                violations.push(Violation {
                    learner: l,
                    adversary: a,
                    kind,
                    collisions,
                    base,
                    attacked,
                });
            }
        }
    }
    Ok(violations)
}

// ---------------------------------------------------------------------------
// Reward matrix
// ---------------------------------------------------------------------------

/// Build the reward payoff matrix `R(a_l, a_a) = 2 Q(a_l) - Q(a_l, a_a)`
/// from a strictly valid quality table. The result is re-checked after
/// construction: every colliding pair pays strictly more than the base
/// quality and every other pair pays exactly the base quality.
pub fn build_reward_matrix(
    partition: &Partition,
    table: &QualityTable,
) -> Result<PayoffMatrix, RewardError> {
    build_reward_matrix_with_mode(partition, table, ValidationMode::Strict)
}

pub fn build_reward_matrix_with_mode(
    partition: &Partition,
    table: &QualityTable,
    mode: ValidationMode,
) -> Result<PayoffMatrix, RewardError> {
    let violations = validate_quality_table(partition, table, mode)?;
    if let Some(first) = violations.first() {
        return Err(RewardError::InvalidTable {
            count: violations.len(),
            first: first.to_string(),
        });
    }
    let effective = match mode {
        ValidationMode::Strict => table.clone(),
        ValidationMode::Asymmetric => table.clamped_asymmetric(),
    };
    let rows = partition
        .pure_strategies_with_cap(Role::Learner, DEFAULT_STRATEGY_CAP)
        .map_err(RewardError::Game)?;
    let cols = partition
        .pure_strategies_with_cap(Role::Adversary, DEFAULT_STRATEGY_CAP)
        .map_err(RewardError::Game)?;
    let p = rows.len();
    let mut entries = vec![0.0; p * p];
    for l in 0..p {
        let base = effective.base[l];
        for a in 0..p {
            let attacked = effective.attacked(l, a).expect("validated complete");
            entries[l * p + a] = base + (base - attacked);
        }
    }
    // Post-construction check of the reward-function assumptions.
    for (l, ls) in rows.iter().enumerate() {
        for (a, as_) in cols.iter().enumerate() {
            let collides = ls.choices.iter().zip(&as_.choices).any(|(x, y)| x == y);
            let reward = entries[l * p + a];
            let base = effective.base[l];
            let holds = if collides {
                match mode {
                    ValidationMode::Strict => reward > base + QUALITY_EQ_TOL / 2.0,
                    ValidationMode::Asymmetric => reward >= base - QUALITY_EQ_TOL,
                }
            } else {
                (reward - base).abs() <= QUALITY_EQ_TOL
            };
            if !holds {
                return Err(RewardError::InvalidTable {
                    count: 1,
                    first: format!(
                        "constructed reward {reward} at pair ({l}, {a}) breaks the assumptions"
                    ),
                });
            }
        }
    }
    Ok(PayoffMatrix::from_parts(
        rows,
        cols,
        partition.block_sizes(),
        entries,
        Provenance::Reward,
    ))
}

/// Subtract the base quality from each row: entries become the quality drop
/// `Q(a_l) - Q(a_l, a_a)`, zero exactly on non-colliding pairs and positive
/// on colliding ones. Magnitudes within [`QUALITY_EQ_TOL`] of zero are
/// snapped to exact zero.
pub fn normalize_reward(
    matrix: &PayoffMatrix,
    table: &QualityTable,
) -> Result<PayoffMatrix, RewardError> {
    if matrix.provenance() != Provenance::Reward {
        return Err(RewardError::WrongProvenance(matrix.provenance()));
    }
    let p = matrix.row_count();
    if table.strategy_count() != p || matrix.col_count() != p {
        return Err(RewardError::BaseLength {
            expected: p,
            got: table.strategy_count(),
        });
    }
    let mut entries = Vec::with_capacity(p * p);
    for l in 0..p {
        let base = table.base[l];
        for a in 0..p {
            let mut v = matrix.entry(l, a) - base;
            if v.abs() <= QUALITY_EQ_TOL {
                v = 0.0;
            }
            entries.push(v);
        }
    }
    Ok(PayoffMatrix::from_parts(
        matrix.row_strategies().to_vec(),
        matrix.col_strategies().to_vec(),
        matrix.block_sizes().to_vec(),
        entries,
        Provenance::Reward,
    ))
}

// ---------------------------------------------------------------------------
// Confidence-interval attack success
// ---------------------------------------------------------------------------

/// Expected operational-quality interval `[center - half_width, center +
/// half_width]` of a deployed learner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub center: f64,
    pub half_width: f64,
}

impl ConfidenceInterval {
    pub fn new(center: f64, half_width: f64) -> Result<Self, RewardError> {
        if !(half_width > 0.0) || !center.is_finite() {
            return Err(RewardError::InvalidHalfWidth(half_width));
        }
        Ok(ConfidenceInterval { center, half_width })
    }

    pub fn lower(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.center + self.half_width
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower() <= value && value <= self.upper()
    }
}

/// An attack succeeds only when the resulting reward leaves the learner's
/// expected quality interval. The interval is closed: a reward exactly on
/// the boundary counts as a failed attack.
pub fn attack_succeeds(
    q_base: f64,
    interval: &ConfidenceInterval,
    reward: f64,
) -> Result<bool, RewardError> {
    if !(interval.half_width > 0.0) {
        return Err(RewardError::InvalidHalfWidth(interval.half_width));
    }
    if (interval.center - q_base).abs() > QUALITY_EQ_TOL {
        return Err(RewardError::IntervalOffCenter {
            center: interval.center,
            base: q_base,
        });
    }
    Ok(!interval.contains(reward))
}
