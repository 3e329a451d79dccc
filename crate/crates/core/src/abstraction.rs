//! Feature-partition abstraction and the accuracy-vs-k sweep.
//!
//! A dataset's n features are partitioned into k blocks, one representative
//! feature is drawn per block, each sample is reduced to its k
//! representative values (labels kept), and the built-in classifier is
//! trained on the abstracted data. Sweeping k against an all-features
//! control reproduces the comparability experiment: a k counts as
//! "comparable" when its mean accuracy falls inside the control's
//! mean +/- std band.
//!
//! Randomness decomposes per (k, repeat) through [`crate::seeds`]; the
//! train/test split seed depends only on the repeat index so every k (and
//! the control) sees the same splits.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{train_eval, ClassifierKind, ClassifyError};
use crate::dataset::{Dataset, DatasetError};
use crate::game::{AttributeId, GameError, Partition};
use crate::seeds::derive_seed;

const TAG_SPLIT: u64 = 0x5eed_0001;
const TAG_PARTITION: u64 = 0x5eed_0002;
const TAG_PLAN: u64 = 0x5eed_0003;

#[derive(Debug, Clone, thiserror::Error)]
pub enum AbstractionError {
    #[error("k must satisfy 1 <= k <= n (k = {k}, n = {n})")]
    InvalidK { k: usize, n: usize },
    #[error("grid scheme needs rows*cols = n (got {rows}x{cols} for n = {n})")]
    GridShape { rows: usize, cols: usize, n: usize },
    #[error("cannot tile a {rows}x{cols} grid into {k} non-empty regions")]
    GridTooFine { rows: usize, cols: usize, k: usize },
    #[error("plan covers {expected} features but the dataset has {got}")]
    PlanMismatch { expected: usize, got: usize },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
}

// ---------------------------------------------------------------------------
// Partition schemes
// ---------------------------------------------------------------------------

/// How feature indices are grouped into blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionScheme {
    /// Runs of consecutive indices, sizes differing by at most one.
    Contiguous,
    /// A seeded shuffle dealt into near-equal blocks.
    Random,
    /// Spatial tiling of a rows x cols image into k rectangular regions.
    Grid { rows: usize, cols: usize },
}

/// Partition feature indices `0..n` into `k` blocks. Blocks are ordered by
/// their smallest member, so `k = n` always yields the identity partition
/// regardless of scheme.
pub fn make_partition(
    n: usize,
    k: usize,
    scheme: PartitionScheme,
    seed: u64,
) -> Result<Partition, AbstractionError> {
    if k == 0 || k > n {
        return Err(AbstractionError::InvalidK { k, n });
    }
    let mut blocks: Vec<Vec<AttributeId>> = match scheme {
        PartitionScheme::Contiguous => deal_contiguous(&(0..n as u32).collect::<Vec<_>>(), k),
        PartitionScheme::Random => {
            let mut order: Vec<AttributeId> = (0..n as u32).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            order.shuffle(&mut rng);
            deal_contiguous(&order, k)
        }
        PartitionScheme::Grid { rows, cols } => {
            if rows * cols != n {
                return Err(AbstractionError::GridShape { rows, cols, n });
            }
            grid_blocks(rows, cols, k)?
        }
    };
    for block in &mut blocks {
        block.sort_unstable();
    }
    blocks.sort_by_key(|b| b[0]);
    Ok(Partition::new(blocks)?)
}

/// Split an ordering into k consecutive blocks with sizes differing by at
/// most one (larger blocks first).
fn deal_contiguous(order: &[AttributeId], k: usize) -> Vec<Vec<AttributeId>> {
    let n = order.len();
    let base = n / k;
    let extra = n % k;
    let mut blocks = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let size = base + usize::from(i < extra);
        blocks.push(order[start..start + size].to_vec());
        start += size;
    }
    blocks
}

/// Tile the image into a gr x gc region grid whose aspect ratio is closest
/// to the image's, with gr * gc = k.
fn grid_blocks(rows: usize, cols: usize, k: usize) -> Result<Vec<Vec<AttributeId>>, AbstractionError> {
    let target = rows as f64 / cols as f64;
    let mut best: Option<(usize, usize, f64)> = None;
    for gr in 1..=k {
        if k % gr != 0 {
            continue;
        }
        let gc = k / gr;
        if gr > rows || gc > cols {
            continue;
        }
        let score = ((gr as f64 / gc as f64) / target).ln().abs();
        if best.is_none_or(|(.., s)| score < s) {
            best = Some((gr, gc, score));
        }
    }
    let Some((gr, gc, _)) = best else {
        return Err(AbstractionError::GridTooFine { rows, cols, k });
    };
    let mut blocks = vec![Vec::new(); k];
    for r in 0..rows {
        let band = r * gr / rows;
        for c in 0..cols {
            let region = band * gc + c * gc / cols;
            blocks[region].push((r * cols + c) as AttributeId);
        }
    }
    Ok(blocks)
}

// ---------------------------------------------------------------------------
// Abstraction plans
// ---------------------------------------------------------------------------

/// A partition together with one representative feature per block, drawn
/// once per run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbstractionPlan {
    pub partition: Partition,
    pub representatives: Vec<AttributeId>,
    pub seed: u64,
}

/// Draw one representative uniformly from each block.
pub fn draw_plan(partition: &Partition, seed: u64) -> AbstractionPlan {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let representatives = partition
        .blocks()
        .iter()
        .map(|block| block[rng.random_range(0..block.len())])
        .collect();
    AbstractionPlan {
        partition: partition.clone(),
        representatives,
        seed,
    }
}

fn check_width(data: &Dataset, partition: &Partition) -> Result<(), AbstractionError> {
    if partition.attribute_count() != data.feature_count() {
        return Err(AbstractionError::PlanMismatch {
            expected: partition.attribute_count(),
            got: data.feature_count(),
        });
    }
    Ok(())
}

/// Reduce every sample to the plan's representative features, in block
/// order. Labels are preserved.
pub fn abstract_with_plan(data: &Dataset, plan: &AbstractionPlan) -> Result<Dataset, AbstractionError> {
    check_width(data, &plan.partition)?;
    let features = data
        .features()
        .iter()
        .map(|row| {
            plan.representatives
                .iter()
                .map(|&rep| row[rep as usize])
                .collect()
        })
        .collect();
    let raw_labels = data
        .labels()
        .iter()
        .map(|&l| data.label_names()[l].clone())
        .collect();
    Ok(Dataset::from_labeled(features, raw_labels)?)
}

/// Per-sample variant: a fresh representative is drawn from each block for
/// every sample, mirroring a random pixel per image per group.
pub fn abstract_per_sample(
    data: &Dataset,
    partition: &Partition,
    seed: u64,
) -> Result<Dataset, AbstractionError> {
    check_width(data, partition)?;
    let features = data
        .features()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, TAG_PLAN, i as u64, 0));
            partition
                .blocks()
                .iter()
                .map(|block| row[block[rng.random_range(0..block.len())] as usize])
                .collect()
        })
        .collect();
    let raw_labels = data
        .labels()
        .iter()
        .map(|&l| data.label_names()[l].clone())
        .collect();
    Ok(Dataset::from_labeled(features, raw_labels)?)
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

/// Representative-selection granularity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum RepresentativeMode {
    /// One draw per (k, repeat): the learner commits to its attributes.
    #[default]
    PerRun,
    /// One draw per sample per block.
    PerSample,
}

/// Sweep configuration. The control band is estimated from at least
/// `control_repeats` runs on all features with the same split protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub k_values: Vec<usize>,
    pub repeats: usize,
    pub scheme: PartitionScheme,
    pub seed: u64,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default)]
    pub classifier: ClassifierKind,
    #[serde(default)]
    pub representative_mode: RepresentativeMode,
    #[serde(default = "default_control_repeats")]
    pub control_repeats: usize,
}

fn default_train_fraction() -> f64 {
    0.8
}

fn default_control_repeats() -> usize {
    10
}

impl SweepConfig {
    pub fn new(k_values: Vec<usize>, repeats: usize, scheme: PartitionScheme, seed: u64) -> Self {
        SweepConfig {
            k_values,
            repeats,
            scheme,
            seed,
            train_fraction: default_train_fraction(),
            classifier: ClassifierKind::default(),
            representative_mode: RepresentativeMode::default(),
            control_repeats: default_control_repeats().max(repeats),
        }
    }
}

/// Accuracy aggregate of one k value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRecord {
    pub k: usize,
    pub repeats: usize,
    pub mean_test_accuracy: f64,
    pub std_test_accuracy: f64,
    pub mean_train_accuracy: f64,
    pub test_accuracies: Vec<f64>,
    pub comparable: bool,
    /// Set when every repeat at this k failed; accuracies are then empty.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// All-features control with the same split protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControlRecord {
    pub repeats: usize,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub accuracies: Vec<f64>,
}

impl ControlRecord {
    /// The comparability band: control mean +/- control std, inclusive.
    pub fn band_contains(&self, accuracy: f64) -> bool {
        (accuracy - self.mean_accuracy).abs() <= self.std_accuracy
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub control: ControlRecord,
    pub records: Vec<KRecord>,
}

impl SweepResult {
    /// CSV rows `k,mean_acc,std_acc,comparable`, one line per k.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,mean_acc,std_acc,comparable\n");
        for r in &self.records {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.k, r.mean_test_accuracy, r.std_test_accuracy, r.comparable
            ));
        }
        out
    }
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let std = if values.len() > 1 {
        (values
            .iter()
            .map(|v| (v - mean) * (v - mean))
            .sum::<f64>()
            / (values.len() - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Run the full sweep: for every k and repeat, partition, abstract, train,
/// and evaluate; aggregate against the all-features control. Failures at a
/// given k are recorded in its record instead of aborting the sweep.
pub fn sweep_k(data: &Dataset, config: &SweepConfig) -> Result<SweepResult, AbstractionError> {
    let n = data.feature_count();
    let control_repeats = config.control_repeats.max(1);
    let mut control_accuracies = Vec::with_capacity(control_repeats);
    for rep in 0..control_repeats {
        let split_seed = derive_seed(config.seed, TAG_SPLIT, rep as u64, 0);
        let outcome = train_eval(data, config.train_fraction, split_seed, config.classifier)?;
        control_accuracies.push(outcome.test_accuracy);
    }
    let (mean_accuracy, std_accuracy) = mean_std(&control_accuracies);
    let control = ControlRecord {
        repeats: control_repeats,
        mean_accuracy,
        std_accuracy,
        accuracies: control_accuracies,
    };

    let mut records = Vec::with_capacity(config.k_values.len());
    for &k in &config.k_values {
        let mut test_accuracies = Vec::with_capacity(config.repeats);
        let mut train_accuracies = Vec::with_capacity(config.repeats);
        let mut first_error = None;
        for rep in 0..config.repeats.max(1) {
            match run_one(data, config, n, k, rep) {
                Ok(outcome) => {
                    test_accuracies.push(outcome.test_accuracy);
                    train_accuracies.push(outcome.train_accuracy);
                }
                Err(e) => {
                    if first_error.is_none() {
                        first_error = Some(e.to_string());
                    }
                }
            }
        }
        let (mean_test, std_test) = mean_std(&test_accuracies);
        let (mean_train, _) = mean_std(&train_accuracies);
        let comparable = !test_accuracies.is_empty() && control.band_contains(mean_test);
        records.push(KRecord {
            k,
            repeats: test_accuracies.len(),
            mean_test_accuracy: mean_test,
            std_test_accuracy: std_test,
            mean_train_accuracy: mean_train,
            test_accuracies,
            comparable,
            error: first_error,
        });
    }
    Ok(SweepResult { control, records })
}

fn run_one(
    data: &Dataset,
    config: &SweepConfig,
    n: usize,
    k: usize,
    rep: usize,
) -> Result<crate::classify::EvalOutcome, AbstractionError> {
    let partition_seed = derive_seed(config.seed, TAG_PARTITION, k as u64, rep as u64);
    let partition = make_partition(n, k, config.scheme, partition_seed)?;
    let abstracted = match config.representative_mode {
        RepresentativeMode::PerRun => {
            let plan_seed = derive_seed(config.seed, TAG_PLAN, k as u64, rep as u64);
            abstract_with_plan(data, &draw_plan(&partition, plan_seed))?
        }
        RepresentativeMode::PerSample => {
            let plan_seed = derive_seed(config.seed, TAG_PLAN, k as u64, rep as u64);
            abstract_per_sample(data, &partition, plan_seed)?
        }
    };
    // Split seed depends on the repeat only, so every k and the control
    // reuse identical splits; k = n then matches the control bit-exactly.
    let split_seed = derive_seed(config.seed, TAG_SPLIT, rep as u64, 0);
    Ok(train_eval(
        &abstracted,
        config.train_fraction,
        split_seed,
        config.classifier,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_data(m: usize, n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let features: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                let base = if i % 2 == 0 { 2.0 } else { -2.0 };
                (0..n).map(|_| base + rng.random::<f64>()).collect()
            })
            .collect();
        let labels = (0..m).map(|i| i % 2).collect();
        Dataset::from_numeric_labels(features, labels).unwrap()
    }

    #[test]
    fn contiguous_partition_splits_evenly() {
        let p = make_partition(4, 2, PartitionScheme::Contiguous, 0).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1], vec![2, 3]]);
        let p = make_partition(5, 2, PartitionScheme::Contiguous, 0).unwrap();
        assert_eq!(p.blocks(), &[vec![0, 1, 2], vec![3, 4]]);
    }

    #[test]
    fn singleton_partition_at_k_equals_n() {
        for scheme in [PartitionScheme::Contiguous, PartitionScheme::Random] {
            let p = make_partition(16, 16, scheme, 99).unwrap();
            let blocks: Vec<Vec<u32>> = (0..16).map(|i| vec![i]).collect();
            assert_eq!(p.blocks(), &blocks[..]);
        }
    }

    #[test]
    fn random_partition_is_structurally_sound() {
        for n in [1usize, 2, 7, 30, 100] {
            for k in 1..=n.min(12) {
                let p = make_partition(n, k, PartitionScheme::Random, n as u64 + k as u64).unwrap();
                assert_eq!(p.block_count(), k);
                assert_eq!(p.attribute_count(), n);
                let mut all: Vec<u32> = p.blocks().iter().flatten().copied().collect();
                all.sort_unstable();
                assert_eq!(all, (0..n as u32).collect::<Vec<_>>());
                let sizes = p.block_sizes();
                let min = sizes.iter().min().unwrap();
                let max = sizes.iter().max().unwrap();
                assert!(max - min <= 1, "n={n} k={k} sizes={sizes:?}");
            }
        }
    }

    #[test]
    fn grid_partition_tiles_without_gaps() {
        let p = make_partition(16, 4, PartitionScheme::Grid { rows: 4, cols: 4 }, 0).unwrap();
        assert_eq!(p.block_count(), 4);
        // 2x2 tiling of a 4x4 image: top-left region holds pixels 0,1,4,5.
        assert_eq!(p.blocks()[0], vec![0, 1, 4, 5]);
        let all: std::collections::HashSet<u32> =
            p.blocks().iter().flatten().copied().collect();
        assert_eq!(all.len(), 16);
    }

    #[test]
    fn grid_partition_rejects_bad_shapes() {
        assert!(matches!(
            make_partition(10, 2, PartitionScheme::Grid { rows: 3, cols: 3 }, 0),
            Err(AbstractionError::GridShape { .. })
        ));
        // 2x2 image cannot split into 3 non-empty rectangular regions
        // because 3 has no divisor pair fitting both sides.
        assert!(matches!(
            make_partition(4, 3, PartitionScheme::Grid { rows: 2, cols: 2 }, 0),
            Err(AbstractionError::GridTooFine { .. })
        ));
    }

    #[test]
    fn k_out_of_range_is_rejected() {
        assert!(make_partition(4, 0, PartitionScheme::Contiguous, 0).is_err());
        assert!(make_partition(4, 5, PartitionScheme::Contiguous, 0).is_err());
    }

    #[test]
    fn plan_representatives_belong_to_their_blocks() {
        let p = make_partition(30, 7, PartitionScheme::Random, 3).unwrap();
        for seed in 0..20 {
            let plan = draw_plan(&p, seed);
            for (rep, block) in plan.representatives.iter().zip(p.blocks()) {
                assert!(block.contains(rep));
            }
        }
        assert_eq!(draw_plan(&p, 5), draw_plan(&p, 5));
    }

    #[test]
    fn identity_plan_reproduces_the_dataset() {
        let data = toy_data(20, 6, 1);
        let p = make_partition(6, 6, PartitionScheme::Contiguous, 0).unwrap();
        let plan = draw_plan(&p, 0);
        let out = abstract_with_plan(&data, &plan).unwrap();
        assert_eq!(out.features(), data.features());
        assert_eq!(out.labels(), data.labels());
    }

    #[test]
    fn abstraction_projects_block_members() {
        let data = toy_data(50, 12, 2);
        let p = make_partition(12, 4, PartitionScheme::Random, 7).unwrap();
        let out = abstract_per_sample(&data, &p, 11).unwrap();
        assert_eq!(out.feature_count(), 4);
        for (row_out, row_in) in out.features().iter().zip(data.features()) {
            for (value, block) in row_out.iter().zip(p.blocks()) {
                assert!(block.iter().any(|&f| row_in[f as usize] == *value));
            }
        }
    }

    #[test]
    fn abstraction_rejects_width_mismatch() {
        let data = toy_data(10, 6, 1);
        let p = make_partition(5, 2, PartitionScheme::Contiguous, 0).unwrap();
        let plan = draw_plan(&p, 0);
        assert!(matches!(
            abstract_with_plan(&data, &plan),
            Err(AbstractionError::PlanMismatch { .. })
        ));
    }

    #[test]
    fn sweep_identity_k_matches_control_exactly() {
        let data = toy_data(60, 8, 3);
        let mut config = SweepConfig::new(vec![8], 4, PartitionScheme::Random, 17);
        config.control_repeats = 4;
        let result = sweep_k(&data, &config).unwrap();
        let record = &result.records[0];
        assert_eq!(record.test_accuracies, result.control.accuracies);
        assert_eq!(record.mean_test_accuracy, result.control.mean_accuracy);
        assert!(record.comparable);
    }

    #[test]
    fn sweep_records_errors_per_k_without_aborting() {
        let data = toy_data(60, 8, 3);
        let config = SweepConfig::new(vec![9, 8], 2, PartitionScheme::Random, 17);
        let result = sweep_k(&data, &config).unwrap();
        assert_eq!(result.records.len(), 2);
        assert!(result.records[0].error.is_some());
        assert!(!result.records[0].comparable);
        assert!(result.records[1].error.is_none());
    }

    #[test]
    fn sweep_csv_has_one_row_per_k() {
        let data = toy_data(60, 8, 3);
        let config = SweepConfig::new(vec![2, 4, 8], 2, PartitionScheme::Contiguous, 5);
        let result = sweep_k(&data, &config).unwrap();
        let csv = result.to_csv();
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("k,mean_acc,std_acc,comparable\n"));
    }
}
