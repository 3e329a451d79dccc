//! Partitions, pure/mixed strategies, and payoff-matrix construction for the
//! attribute-selection game.
//!
//! The learner and the adversary each pick one attribute per partition block.
//! In the indicator game the learner pays the adversary one unit for every
//! block where the two choices collide; payoff matrices built from a reward
//! function share the same strategy spaces and indexing.
//!
//! Pure strategies are enumerated in a fixed canonical order (block 0 varies
//! slowest; attribute identifiers ascend within a block) so matrix indices
//! are stable across runs.

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Opaque attribute identifier. Mapping from dataset columns to identifiers
/// happens at ingestion, not here.
pub type AttributeId = u32;

/// Hard limit on the number of pure strategies materialised by enumeration
/// and matrix construction unless the caller raises it explicitly.
pub const DEFAULT_STRATEGY_CAP: u64 = 1_000_000;

/// Tolerance for probability vectors summing to one.
pub const DISTRIBUTION_SUM_TOL: f64 = 1e-12;

/// Which player a strategy belongs to. The strategy spaces of the two
/// players are identical; this is a role tag only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Learner,
    Adversary,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::Learner => f.write_str("learner"),
            Role::Adversary => f.write_str("adversary"),
        }
    }
}

/// Errors from partition, strategy, and matrix operations.
#[derive(Debug, Clone, thiserror::Error)]
pub enum GameError {
    #[error("partition must contain at least one block")]
    EmptyPartition,
    #[error("block {index} is empty")]
    EmptyBlock { index: usize },
    #[error("attribute {id} appears in more than one place")]
    DuplicateAttribute { id: AttributeId },
    #[error("strategy space too large: {count} pure strategies exceeds cap {cap}")]
    StrategySpaceTooLarge { count: u128, cap: u64 },
    #[error("strategy has {got} choices but the partition has {expected} blocks")]
    StrategyLength { expected: usize, got: usize },
    #[error("choice {id} at block {block} does not belong to that block (mismatched partition?)")]
    ChoiceOutsideBlock { block: usize, id: AttributeId },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("payoff entries must be finite")]
    NonFiniteEntry,
}

// ---------------------------------------------------------------------------
// Partition
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct PartitionSpec {
    blocks: Vec<Vec<AttributeId>>,
}

/// A partition of the attribute set into disjoint, non-empty blocks.
///
/// Attribute identifiers within each block are kept sorted ascending; block
/// order is preserved as given (it determines strategy-vector positions).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionSpec", into = "PartitionSpec")]
pub struct Partition {
    blocks: Vec<Vec<AttributeId>>,
    attribute_count: usize,
}

impl TryFrom<PartitionSpec> for Partition {
    type Error = GameError;
    fn try_from(spec: PartitionSpec) -> Result<Self, GameError> {
        Partition::new(spec.blocks)
    }
}

impl From<Partition> for PartitionSpec {
    fn from(p: Partition) -> Self {
        PartitionSpec { blocks: p.blocks }
    }
}

impl Partition {
    /// Build a partition from blocks of attribute identifiers.
    ///
    /// Identifiers are sorted within each block. Fails on empty input, empty
    /// blocks, or an identifier appearing twice anywhere in the partition.
    pub fn new(blocks: Vec<Vec<AttributeId>>) -> Result<Self, GameError> {
        if blocks.is_empty() {
            return Err(GameError::EmptyPartition);
        }
        let mut seen = HashSet::new();
        let mut sorted = Vec::with_capacity(blocks.len());
        let mut attribute_count = 0usize;
        for (index, mut block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(GameError::EmptyBlock { index });
            }
            block.sort_unstable();
            for &id in &block {
                if !seen.insert(id) {
                    return Err(GameError::DuplicateAttribute { id });
                }
            }
            attribute_count += block.len();
            sorted.push(block);
        }
        Ok(Partition {
            blocks: sorted,
            attribute_count,
        })
    }

    /// Parse the JSON form `{"blocks": [[1,2],[3,4]]}`.
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let spec: PartitionSpec = serde_json::from_str(text)
            .map_err(|e| GameError::Malformed(format!("partition JSON: {e}")))?;
        Partition::new(spec.blocks)
    }

    pub fn blocks(&self) -> &[Vec<AttributeId>] {
        &self.blocks
    }

    /// Number of blocks `k`.
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Total attribute count `n`.
    pub fn attribute_count(&self) -> usize {
        self.attribute_count
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Number of pure strategies `p`, the product of block sizes.
    /// `None` when the product overflows `u64`.
    pub fn strategy_count(&self) -> Option<u64> {
        let mut count: u128 = 1;
        for block in &self.blocks {
            count = count.checked_mul(block.len() as u128)?;
            if count > u64::MAX as u128 {
                return None;
            }
        }
        Some(count as u64)
    }

    fn checked_strategy_count(&self, cap: u64) -> Result<usize, GameError> {
        let count: u128 = self
            .blocks
            .iter()
            .fold(Some(1u128), |acc, b| acc?.checked_mul(b.len() as u128))
            .unwrap_or(u128::MAX);
        if count > cap as u128 {
            return Err(GameError::StrategySpaceTooLarge { count, cap });
        }
        Ok(count as usize)
    }

    /// The game value of the indicator game at the uniform product profile,
    /// the sum of reciprocal block sizes.
    pub fn uniform_game_value(&self) -> f64 {
        self.blocks.iter().map(|b| 1.0 / b.len() as f64).sum()
    }

    /// Enumerate all pure strategies in canonical order with the default cap.
    pub fn pure_strategies(&self, owner: Role) -> Result<Vec<PureStrategy>, GameError> {
        self.pure_strategies_with_cap(owner, DEFAULT_STRATEGY_CAP)
    }

    /// Enumerate all pure strategies in canonical order: block 0 varies
    /// slowest and identifiers ascend within each block.
    pub fn pure_strategies_with_cap(
        &self,
        owner: Role,
        cap: u64,
    ) -> Result<Vec<PureStrategy>, GameError> {
        let p = self.checked_strategy_count(cap)?;
        let k = self.block_count();
        let mut out = Vec::with_capacity(p);
        let mut cursor = vec![0usize; k];
        loop {
            let choices = cursor
                .iter()
                .zip(&self.blocks)
                .map(|(&i, block)| block[i])
                .collect();
            out.push(PureStrategy { choices, owner });
            // Odometer increment, last block fastest.
            let mut pos = k;
            loop {
                if pos == 0 {
                    return Ok(out);
                }
                pos -= 1;
                cursor[pos] += 1;
                if cursor[pos] < self.blocks[pos].len() {
                    break;
                }
                cursor[pos] = 0;
            }
        }
    }

    /// Canonical index of a strategy in the enumeration order.
    pub fn strategy_index(&self, strategy: &PureStrategy) -> Result<usize, GameError> {
        self.validate_strategy(strategy)?;
        let mut index = 0usize;
        for (block, &choice) in self.blocks.iter().zip(&strategy.choices) {
            let pos = block.binary_search(&choice).expect("validated above");
            index = index * block.len() + pos;
        }
        Ok(index)
    }

    /// Check that a strategy picks exactly one member of each block.
    pub fn validate_strategy(&self, strategy: &PureStrategy) -> Result<(), GameError> {
        if strategy.choices.len() != self.block_count() {
            return Err(GameError::StrategyLength {
                expected: self.block_count(),
                got: strategy.choices.len(),
            });
        }
        for (block_idx, (block, &choice)) in
            self.blocks.iter().zip(&strategy.choices).enumerate()
        {
            if block.binary_search(&choice).is_err() {
                return Err(GameError::ChoiceOutsideBlock {
                    block: block_idx,
                    id: choice,
                });
            }
        }
        Ok(())
    }

    /// Count the blocks where the two strategies collide. Exact integer
    /// evaluation of the indicator payoff, in `[0, k]`.
    pub fn indicator_payoff(
        &self,
        learner: &PureStrategy,
        adversary: &PureStrategy,
    ) -> Result<u32, GameError> {
        self.validate_strategy(learner)?;
        self.validate_strategy(adversary)?;
        Ok(learner
            .choices
            .iter()
            .zip(&adversary.choices)
            .filter(|(a, b)| a == b)
            .count() as u32)
    }

    /// Build the p x p indicator payoff matrix with the default cap.
    pub fn indicator_matrix(&self) -> Result<PayoffMatrix, GameError> {
        self.indicator_matrix_with_cap(DEFAULT_STRATEGY_CAP)
    }

    /// Build the indicator payoff matrix: entry (r, c) is the number of
    /// blocks where row strategy r and column strategy c coincide.
    pub fn indicator_matrix_with_cap(&self, cap: u64) -> Result<PayoffMatrix, GameError> {
        let rows = self.pure_strategies_with_cap(Role::Learner, cap)?;
        let cols = self.pure_strategies_with_cap(Role::Adversary, cap)?;
        let p = rows.len();
        let mut entries = vec![0.0; p * p];
        for (r, row) in rows.iter().enumerate() {
            for (c, col) in cols.iter().enumerate() {
                let hits = row
                    .choices
                    .iter()
                    .zip(&col.choices)
                    .filter(|(a, b)| a == b)
                    .count();
                entries[r * p + c] = hits as f64;
            }
        }
        Ok(PayoffMatrix {
            rows,
            cols,
            block_sizes: self.block_sizes(),
            entries,
            provenance: Provenance::Indicator,
        })
    }
}

// ---------------------------------------------------------------------------
// Pure and mixed strategies
// ---------------------------------------------------------------------------

/// One attribute choice per block, for either player.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PureStrategy {
    pub choices: Vec<AttributeId>,
    pub owner: Role,
}

impl PureStrategy {
    pub fn new(choices: Vec<AttributeId>, owner: Role) -> Self {
        PureStrategy { choices, owner }
    }
}

impl fmt::Display for PureStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.choices.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// A probability distribution over pure strategies.
///
/// The product form stores one distribution per block (the blocks are drawn
/// independently); the general form stores a distribution over all p pure
/// strategies in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub enum MixedStrategy {
    Product(Vec<Vec<f64>>),
    General(Vec<f64>),
}

fn validate_distribution(probs: &[f64]) -> Result<(), GameError> {
    if probs.is_empty() {
        return Err(GameError::InvalidDistribution("empty vector".into()));
    }
    let mut sum = 0.0;
    for &p in probs {
        if !p.is_finite() || p < 0.0 {
            return Err(GameError::InvalidDistribution(format!(
                "probability {p} is negative or non-finite"
            )));
        }
        sum += p;
    }
    if (sum - 1.0).abs() > DISTRIBUTION_SUM_TOL {
        return Err(GameError::InvalidDistribution(format!(
            "probabilities sum to {sum}, not 1"
        )));
    }
    Ok(())
}

impl MixedStrategy {
    /// Independent per-block distributions.
    pub fn product(block_probs: Vec<Vec<f64>>) -> Result<Self, GameError> {
        for probs in &block_probs {
            validate_distribution(probs)?;
        }
        Ok(MixedStrategy::Product(block_probs))
    }

    /// A distribution over all pure strategies in canonical order.
    pub fn general(probs: Vec<f64>) -> Result<Self, GameError> {
        validate_distribution(&probs)?;
        Ok(MixedStrategy::General(probs))
    }

    /// The uniform product strategy: each block's attribute drawn uniformly
    /// and independently. This is the indicator game's equilibrium strategy.
    pub fn uniform_product(partition: &Partition) -> Self {
        MixedStrategy::Product(
            partition
                .blocks()
                .iter()
                .map(|b| vec![1.0 / b.len() as f64; b.len()])
                .collect(),
        )
    }

    /// Point mass on the pure strategy at the given canonical index.
    pub fn pure(index: usize, p: usize) -> Result<Self, GameError> {
        if index >= p {
            return Err(GameError::DimensionMismatch {
                expected: p,
                got: index,
            });
        }
        let mut probs = vec![0.0; p];
        probs[index] = 1.0;
        Ok(MixedStrategy::General(probs))
    }

    /// Expand to a general-form vector over the canonical strategy order.
    /// The entry for a pure strategy is the product of its per-block
    /// probabilities.
    pub fn expand(&self, block_sizes: &[usize]) -> Result<Vec<f64>, GameError> {
        let p: usize = block_sizes.iter().product();
        match self {
            MixedStrategy::General(probs) => {
                if probs.len() != p {
                    return Err(GameError::DimensionMismatch {
                        expected: p,
                        got: probs.len(),
                    });
                }
                Ok(probs.clone())
            }
            MixedStrategy::Product(block_probs) => {
                if block_probs.len() != block_sizes.len() {
                    return Err(GameError::DimensionMismatch {
                        expected: block_sizes.len(),
                        got: block_probs.len(),
                    });
                }
                for (probs, &size) in block_probs.iter().zip(block_sizes) {
                    if probs.len() != size {
                        return Err(GameError::DimensionMismatch {
                            expected: size,
                            got: probs.len(),
                        });
                    }
                }
                let mut out = vec![1.0];
                for probs in block_probs {
                    let mut next = Vec::with_capacity(out.len() * probs.len());
                    for &acc in &out {
                        for &q in probs {
                            next.push(acc * q);
                        }
                    }
                    out = next;
                }
                debug_assert_eq!(out.len(), p);
                Ok(out)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Payoff matrix
// ---------------------------------------------------------------------------

/// How a payoff matrix was constructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Indicator,
    Reward,
    Explicit,
}

/// A matrix of learner-pays-adversary amounts. Rows are learner pure
/// strategies and columns adversary pure strategies, both in canonical
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    pub(crate) rows: Vec<PureStrategy>,
    pub(crate) cols: Vec<PureStrategy>,
    pub(crate) block_sizes: Vec<usize>,
    /// Row-major, `rows.len() * cols.len()` entries.
    pub(crate) entries: Vec<f64>,
    pub(crate) provenance: Provenance,
}

impl PayoffMatrix {
    /// Wrap an explicit matrix. Row and column strategies are synthesised as
    /// single-block choices so indexing stays uniform.
    pub fn from_entries(entries: Vec<Vec<f64>>) -> Result<Self, GameError> {
        let m = entries.len();
        if m == 0 {
            return Err(GameError::EmptyPartition);
        }
        let n = entries[0].len();
        if n == 0 {
            return Err(GameError::EmptyBlock { index: 0 });
        }
        let mut flat = Vec::with_capacity(m * n);
        for row in &entries {
            if row.len() != n {
                return Err(GameError::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for &v in row {
                if !v.is_finite() {
                    return Err(GameError::NonFiniteEntry);
                }
                flat.push(v);
            }
        }
        let rows = (0..m as u32)
            .map(|i| PureStrategy::new(vec![i], Role::Learner))
            .collect();
        let cols = (0..n as u32)
            .map(|i| PureStrategy::new(vec![i], Role::Adversary))
            .collect();
        Ok(PayoffMatrix {
            rows,
            cols,
            block_sizes: vec![m],
            entries: flat,
            provenance: Provenance::Explicit,
        })
    }

    pub(crate) fn from_parts(
        rows: Vec<PureStrategy>,
        cols: Vec<PureStrategy>,
        block_sizes: Vec<usize>,
        entries: Vec<f64>,
        provenance: Provenance,
    ) -> Self {
        debug_assert_eq!(entries.len(), rows.len() * cols.len());
        PayoffMatrix {
            rows,
            cols,
            block_sizes,
            entries,
            provenance,
        }
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols.len()
    }

    pub fn row_strategies(&self) -> &[PureStrategy] {
        &self.rows
    }

    pub fn col_strategies(&self) -> &[PureStrategy] {
        &self.cols
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.block_sizes
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.cols.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.cols.len();
        &self.entries[row * n..(row + 1) * n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn min_entry(&self) -> f64 {
        self.entries.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Payments per adversary column against a learner distribution:
    /// `(x^T M)_c`.
    pub fn col_payoffs(&self, learner: &[f64]) -> Result<Vec<f64>, GameError> {
        if learner.len() != self.rows.len() {
            return Err(GameError::DimensionMismatch {
                expected: self.rows.len(),
                got: learner.len(),
            });
        }
        let n = self.cols.len();
        let mut out = vec![0.0; n];
        for (r, &x) in learner.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (c, &m) in self.row(r).iter().enumerate() {
                out[c] += x * m;
            }
        }
        Ok(out)
    }

    /// Payments per learner row against an adversary distribution:
    /// `(M y)_r`.
    pub fn row_payoffs(&self, adversary: &[f64]) -> Result<Vec<f64>, GameError> {
        if adversary.len() != self.cols.len() {
            return Err(GameError::DimensionMismatch {
                expected: self.cols.len(),
                got: adversary.len(),
            });
        }
        Ok((0..self.rows.len())
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(adversary)
                    .map(|(&m, &y)| m * y)
                    .sum()
            })
            .collect())
    }

    /// Exact expected payment `x^T M y` for a strategy profile. Product-form
    /// strategies are expanded to general form first.
    pub fn expected_payoff(
        &self,
        learner: &MixedStrategy,
        adversary: &MixedStrategy,
    ) -> Result<f64, GameError> {
        let x = learner.expand(&self.block_sizes)?;
        if x.len() != self.rows.len() {
            return Err(GameError::DimensionMismatch {
                expected: self.rows.len(),
                got: x.len(),
            });
        }
        let y = adversary.expand(&self.block_sizes)?;
        let row_payoffs = self.row_payoffs(&y)?;
        Ok(x.iter().zip(&row_payoffs).map(|(&a, &b)| a * b).sum())
    }
}

#[derive(Serialize, Deserialize)]
struct PayoffMatrixSpec {
    rows: Vec<Vec<AttributeId>>,
    cols: Vec<Vec<AttributeId>>,
    block_sizes: Vec<usize>,
    entries: Vec<Vec<f64>>,
    provenance: Provenance,
}

impl Serialize for PayoffMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let n = self.cols.len();
        PayoffMatrixSpec {
            rows: self.rows.iter().map(|s| s.choices.clone()).collect(),
            cols: self.cols.iter().map(|s| s.choices.clone()).collect(),
            block_sizes: self.block_sizes.clone(),
            entries: self.entries.chunks(n).map(|c| c.to_vec()).collect(),
            provenance: self.provenance,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PayoffMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let spec = PayoffMatrixSpec::deserialize(deserializer)?;
        let m = spec.rows.len();
        let n = spec.cols.len();
        if spec.entries.len() != m || spec.entries.iter().any(|r| r.len() != n) {
            return Err(D::Error::custom("payoff entries do not match strategy counts"));
        }
        let rows = spec
            .rows
            .into_iter()
            .map(|c| PureStrategy::new(c, Role::Learner))
            .collect();
        let cols = spec
            .cols
            .into_iter()
            .map(|c| PureStrategy::new(c, Role::Adversary))
            .collect();
        Ok(PayoffMatrix {
            rows,
            cols,
            block_sizes: spec.block_sizes,
            entries: spec.entries.into_iter().flatten().collect(),
            provenance: spec.provenance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> Partition {
        Partition::new(vec![vec![1, 2], vec![3, 4]]).unwrap()
    }

    #[test]
    fn enumeration_is_canonical() {
        let p = two_by_two();
        let strategies = p.pure_strategies(Role::Learner).unwrap();
        let choices: Vec<Vec<u32>> = strategies.iter().map(|s| s.choices.clone()).collect();
        assert_eq!(
            choices,
            vec![vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4]]
        );
    }

    #[test]
    fn enumeration_singleton() {
        let p = Partition::new(vec![vec![7]]).unwrap();
        let strategies = p.pure_strategies(Role::Adversary).unwrap();
        assert_eq!(strategies.len(), 1);
        assert_eq!(strategies[0].choices, vec![7]);
    }

    #[test]
    fn enumeration_respects_cap() {
        let p = Partition::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let err = p.pure_strategies_with_cap(Role::Learner, 7).unwrap_err();
        assert!(matches!(err, GameError::StrategySpaceTooLarge { count: 8, cap: 7 }));
    }

    #[test]
    fn strategy_index_roundtrips() {
        let p = Partition::new(vec![vec![1, 2, 3], vec![4, 5]]).unwrap();
        let strategies = p.pure_strategies(Role::Learner).unwrap();
        assert_eq!(strategies.len(), 6);
        for (i, s) in strategies.iter().enumerate() {
            assert_eq!(p.strategy_index(s).unwrap(), i);
        }
    }

    #[test]
    fn partition_rejects_duplicates_and_empties() {
        assert!(matches!(
            Partition::new(vec![vec![1, 2], vec![2, 3]]),
            Err(GameError::DuplicateAttribute { id: 2 })
        ));
        assert!(matches!(
            Partition::new(vec![vec![1], vec![]]),
            Err(GameError::EmptyBlock { index: 1 })
        ));
        assert!(matches!(Partition::new(vec![]), Err(GameError::EmptyPartition)));
    }

    #[test]
    fn indicator_payoff_illustration() {
        // Learner picks {2},{3}; attacker picks {1},{3}: one collision.
        let p = two_by_two();
        let learner = PureStrategy::new(vec![2, 3], Role::Learner);
        let adversary = PureStrategy::new(vec![1, 3], Role::Adversary);
        assert_eq!(p.indicator_payoff(&learner, &adversary).unwrap(), 1);
    }

    #[test]
    fn indicator_payoff_full_collision_is_k() {
        let p = Partition::new(vec![vec![1, 2], vec![3, 4, 5], vec![9]]).unwrap();
        for s in p.pure_strategies(Role::Learner).unwrap() {
            let mirror = PureStrategy::new(s.choices.clone(), Role::Adversary);
            assert_eq!(p.indicator_payoff(&s, &mirror).unwrap(), 3);
        }
    }

    #[test]
    fn indicator_payoff_rejects_foreign_strategy() {
        let p = two_by_two();
        let bad = PureStrategy::new(vec![1, 9], Role::Adversary);
        let ok = PureStrategy::new(vec![1, 3], Role::Learner);
        assert!(matches!(
            p.indicator_payoff(&ok, &bad),
            Err(GameError::ChoiceOutsideBlock { block: 1, id: 9 })
        ));
    }

    #[test]
    fn indicator_matrix_two_by_two() {
        let m = two_by_two().indicator_matrix().unwrap();
        assert_eq!(m.row_count(), 4);
        for r in 0..4 {
            assert_eq!(m.entry(r, r), 2.0);
            let row_sum: f64 = m.row(r).iter().sum();
            assert_eq!(row_sum, 4.0);
        }
        // Strategies (1,3) and (2,4) share no block choice.
        assert_eq!(m.entry(0, 3), 0.0);
        assert_eq!(m.entry(3, 0), 0.0);
    }

    #[test]
    fn indicator_matrix_forced_collision() {
        let m = Partition::new(vec![vec![1]]).unwrap().indicator_matrix().unwrap();
        assert_eq!(m.entries(), &[1.0]);
    }

    #[test]
    fn indicator_matrix_matching_pennies() {
        let m = Partition::new(vec![vec![1, 2]]).unwrap().indicator_matrix().unwrap();
        assert_eq!(m.entries(), &[1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn expected_payoff_uniform_is_value() {
        let p = two_by_two();
        let m = p.indicator_matrix().unwrap();
        let u = MixedStrategy::uniform_product(&p);
        let v = m.expected_payoff(&u, &u).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expected_payoff_uniform_vs_pure() {
        let p = two_by_two();
        let m = p.indicator_matrix().unwrap();
        let u = MixedStrategy::uniform_product(&p);
        let pure = MixedStrategy::pure(0, 4).unwrap(); // (1,3)
        let v = m.expected_payoff(&u, &pure).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn expected_payoff_mixed_block_sizes() {
        let p = Partition::new(vec![vec![1, 2, 3, 4], vec![5, 6]]).unwrap();
        let m = p.indicator_matrix().unwrap();
        let u = MixedStrategy::uniform_product(&p);
        let v = m.expected_payoff(&u, &u).unwrap();
        assert!((v - 0.75).abs() < 1e-12);
    }

    #[test]
    fn expected_payoff_rejects_dimension_mismatch() {
        let p = two_by_two();
        let m = p.indicator_matrix().unwrap();
        let bad = MixedStrategy::general(vec![0.5, 0.5]).unwrap();
        assert!(m
            .expected_payoff(&bad, &MixedStrategy::uniform_product(&p))
            .is_err());
    }

    #[test]
    fn product_expansion_matches_per_block_products() {
        let probs = MixedStrategy::product(vec![vec![0.25, 0.75], vec![0.5, 0.5, 0.0]]).unwrap();
        let general = probs.expand(&[2, 3]).unwrap();
        assert_eq!(general.len(), 6);
        assert!((general[0] - 0.125).abs() < 1e-15);
        assert!((general[5] - 0.0).abs() < 1e-15);
        let sum: f64 = general.iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distribution_validation() {
        assert!(MixedStrategy::general(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::general(vec![-0.1, 1.1]).is_err());
        assert!(MixedStrategy::general(vec![0.5, 0.5]).is_ok());
    }

    #[test]
    fn partition_json_roundtrip() {
        let p = Partition::from_json(r#"{"blocks": [[2,1],[3,4]]}"#).unwrap();
        assert_eq!(p.blocks()[0], vec![1, 2]);
        let text = serde_json::to_string(&p).unwrap();
        let back: Partition = serde_json::from_str(&text).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn explicit_matrix_rejects_ragged_rows() {
        assert!(PayoffMatrix::from_entries(vec![vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(PayoffMatrix::from_entries(vec![vec![f64::NAN]]).is_err());
    }
}
