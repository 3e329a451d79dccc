//! Built-in classifiers for the abstraction experiments.
//!
//! The default learner is a regularized linear one-vs-rest model: features
//! are standardized on the training split, one ridge regression per class is
//! fit against +/-1 targets through a single Cholesky factorization, and
//! prediction takes the maximum score. A nearest-centroid fallback is also
//! provided. Both are deterministic given the split seed.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;

#[derive(Debug, Clone, thiserror::Error)]
pub enum ClassifyError {
    #[error("train fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),
    #[error("degenerate split: {0}")]
    DegenerateSplit(String),
    #[error("normal-equation system is not positive definite")]
    NotPositiveDefinite,
}

/// Which built-in learner to run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassifierKind {
    RidgeOneVsRest { lambda: f64 },
    /// Ridge with the penalty picked per fit on an internal validation
    /// split. Slower but robust when the feature count rivals the sample
    /// count.
    RidgeOneVsRestAuto,
    NearestCentroid,
}

impl Default for ClassifierKind {
    fn default() -> Self {
        ClassifierKind::RidgeOneVsRest { lambda: 1.0 }
    }
}

/// Penalty grid scanned by [`ClassifierKind::RidgeOneVsRestAuto`].
const LAMBDA_GRID: [f64; 6] = [0.01, 0.1, 1.0, 10.0, 100.0, 1000.0];

/// Accuracy on the training split and on the held-out split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalOutcome {
    pub train_accuracy: f64,
    pub test_accuracy: f64,
}

/// Shuffle sample indices with the split seed and cut at the train fraction.
fn split_indices(
    sample_count: usize,
    train_fraction: f64,
    seed: u64,
) -> Result<(Vec<usize>, Vec<usize>), ClassifyError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(ClassifyError::InvalidFraction(train_fraction));
    }
    if sample_count < 2 {
        return Err(ClassifyError::DegenerateSplit(
            "need at least 2 samples to split".into(),
        ));
    }
    let mut indices: Vec<usize> = (0..sample_count).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);
    let train_count = ((sample_count as f64 * train_fraction).round() as usize)
        .clamp(1, sample_count - 1);
    let test = indices.split_off(train_count);
    Ok((indices, test))
}

/// Train on a seeded split and evaluate on the rest.
pub fn train_eval(
    data: &Dataset,
    train_fraction: f64,
    seed: u64,
    kind: ClassifierKind,
) -> Result<EvalOutcome, ClassifyError> {
    let (train, test) = split_indices(data.sample_count(), train_fraction, seed)?;
    let classes_in_train = {
        let mut seen = vec![false; data.class_count()];
        for &i in &train {
            seen[data.labels()[i]] = true;
        }
        seen.iter().filter(|&&s| s).count()
    };
    if classes_in_train < 2 {
        return Err(ClassifyError::DegenerateSplit(format!(
            "training split contains {classes_in_train} class(es), need at least 2"
        )));
    }
    let predictor: Box<dyn Fn(&[f64]) -> usize> = match kind {
        ClassifierKind::RidgeOneVsRest { lambda } => {
            Box::new(fit_ridge_ovr(data, &train, lambda)?)
        }
        ClassifierKind::RidgeOneVsRestAuto => {
            Box::new(fit_ridge_ovr(data, &train, select_lambda(data, &train)?)?)
        }
        ClassifierKind::NearestCentroid => Box::new(fit_nearest_centroid(data, &train)),
    };
    let accuracy = |indices: &[usize]| {
        let correct = indices
            .iter()
            .filter(|&&i| predictor(data.row(i)) == data.labels()[i])
            .count();
        correct as f64 / indices.len() as f64
    };
    Ok(EvalOutcome {
        train_accuracy: accuracy(&train),
        test_accuracy: accuracy(&test),
    })
}

/// Pick the ridge penalty by holding out the last quarter of the (already
/// shuffled) training indices; ties prefer the smaller penalty. Falls back
/// to the default when the inner split degenerates to one class.
fn select_lambda(data: &Dataset, train: &[usize]) -> Result<f64, ClassifyError> {
    let cut = (train.len() * 3) / 4;
    if cut < 2 || cut == train.len() {
        return Ok(1.0);
    }
    let (fit, held) = train.split_at(cut);
    let fit_classes = {
        let mut seen = vec![false; data.class_count()];
        for &i in fit {
            seen[data.labels()[i]] = true;
        }
        seen.iter().filter(|&&s| s).count()
    };
    if fit_classes < 2 {
        return Ok(1.0);
    }
    let mut best = (1.0, f64::NEG_INFINITY);
    for &lambda in &LAMBDA_GRID {
        let predictor = fit_ridge_ovr(data, fit, lambda)?;
        let correct = held
            .iter()
            .filter(|&&i| predictor(data.row(i)) == data.labels()[i])
            .count();
        let accuracy = correct as f64 / held.len() as f64;
        if accuracy > best.1 {
            best = (lambda, accuracy);
        }
    }
    Ok(best.0)
}

fn fit_nearest_centroid(
    data: &Dataset,
    train: &[usize],
) -> impl Fn(&[f64]) -> usize + use<> {
    let n = data.feature_count();
    let c = data.class_count();
    let mut centroids = vec![vec![0.0; n]; c];
    let mut counts = vec![0usize; c];
    for &i in train {
        let label = data.labels()[i];
        counts[label] += 1;
        for (acc, &v) in centroids[label].iter_mut().zip(data.row(i)) {
            *acc += v;
        }
    }
    for (centroid, &count) in centroids.iter_mut().zip(&counts) {
        if count > 0 {
            for v in centroid.iter_mut() {
                *v /= count as f64;
            }
        }
    }
    move |x: &[f64]| {
        let mut best = usize::MAX;
        let mut best_dist = f64::INFINITY;
        for (label, centroid) in centroids.iter().enumerate() {
            if counts[label] == 0 {
                continue;
            }
            let dist: f64 = centroid
                .iter()
                .zip(x)
                .map(|(&c, &v)| (c - v) * (c - v))
                .sum();
            if dist < best_dist {
                best_dist = dist;
                best = label;
            }
        }
        best
    }
}

fn fit_ridge_ovr(
    data: &Dataset,
    train: &[usize],
    lambda: f64,
) -> Result<impl Fn(&[f64]) -> usize + use<>, ClassifyError> {
    let n = data.feature_count();
    let c = data.class_count();
    let m = train.len();
    let d = n + 1; // standardized features plus bias

    // Standardization fitted on the training split only.
    let mut means = vec![0.0; n];
    for &i in train {
        for (mean, &v) in means.iter_mut().zip(data.row(i)) {
            *mean += v;
        }
    }
    for mean in &mut means {
        *mean /= m as f64;
    }
    let mut scales = vec![0.0; n];
    for &i in train {
        for (j, &v) in data.row(i).iter().enumerate() {
            scales[j] += (v - means[j]) * (v - means[j]);
        }
    }
    for s in &mut scales {
        *s = (*s / m as f64).sqrt();
        if *s < 1e-12 {
            *s = 1.0; // constant column: leave centered
        }
    }

    let standardize = {
        let means = means.clone();
        let scales = scales.clone();
        move |x: &[f64], z: &mut Vec<f64>| {
            z.clear();
            for ((&v, &mean), &scale) in x.iter().zip(&means).zip(&scales) {
                z.push((v - mean) / scale);
            }
            z.push(1.0);
        }
    };

    // Normal equations: gram = Z^T Z + lambda I (bias unpenalized),
    // one right-hand side per class with +/-1 targets.
    let mut gram = vec![0.0; d * d];
    let mut rhs = vec![vec![0.0; d]; c];
    let mut z = Vec::with_capacity(d);
    for &i in train {
        standardize(data.row(i), &mut z);
        for a in 0..d {
            let za = z[a];
            if za == 0.0 {
                continue;
            }
            for b in a..d {
                gram[a * d + b] += za * z[b];
            }
        }
        let label = data.labels()[i];
        for (class, r) in rhs.iter_mut().enumerate() {
            let target = if class == label { 1.0 } else { -1.0 };
            for (slot, &za) in r.iter_mut().zip(&z) {
                *slot += target * za;
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            gram[a * d + b] = gram[b * d + a];
        }
    }
    for j in 0..n {
        gram[j * d + j] += lambda;
    }

    let weights = cholesky_solve(gram, d, rhs)?;
    Ok(move |x: &[f64]| {
        let mut z = Vec::with_capacity(d);
        standardize(x, &mut z);
        let mut best = 0usize;
        let mut best_score = f64::NEG_INFINITY;
        for (class, w) in weights.iter().enumerate() {
            let score: f64 = w.iter().zip(&z).map(|(&a, &b)| a * b).sum();
            if score > best_score {
                best_score = score;
                best = class;
            }
        }
        best
    })
}

/// Factor a symmetric positive-definite system in place and solve for every
/// right-hand side. Retries once with a diagonal jitter before giving up.
fn cholesky_solve(
    mut a: Vec<f64>,
    d: usize,
    rhs: Vec<Vec<f64>>,
) -> Result<Vec<Vec<f64>>, ClassifyError> {
    let original = a.clone();
    if factor(&mut a, d).is_err() {
        a = original;
        let jitter = 1e-8 * (1.0 + (0..d).map(|i| a[i * d + i]).fold(0.0, f64::max));
        for i in 0..d {
            a[i * d + i] += jitter;
        }
        factor(&mut a, d).map_err(|_| ClassifyError::NotPositiveDefinite)?;
    }
    Ok(rhs.into_iter().map(|b| back_substitute(&a, d, b)).collect())
}

fn factor(a: &mut [f64], d: usize) -> Result<(), ()> {
    for j in 0..d {
        let mut diag = a[j * d + j];
        for k in 0..j {
            diag -= a[j * d + k] * a[j * d + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(());
        }
        let diag = diag.sqrt();
        a[j * d + j] = diag;
        for i in j + 1..d {
            let mut v = a[i * d + j];
            for k in 0..j {
                v -= a[i * d + k] * a[j * d + k];
            }
            a[i * d + j] = v / diag;
        }
    }
    Ok(())
}

fn back_substitute(l: &[f64], d: usize, mut b: Vec<f64>) -> Vec<f64> {
    // Solve L y = b.
    for i in 0..d {
        let mut v = b[i];
        for k in 0..i {
            v -= l[i * d + k] * b[k];
        }
        b[i] = v / l[i * d + i];
    }
    // Solve L^T x = y.
    for i in (0..d).rev() {
        let mut v = b[i];
        for k in i + 1..d {
            v -= l[k * d + i] * b[k];
        }
        b[i] = v / l[i * d + i];
    }
    b
}
