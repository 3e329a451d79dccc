//! `attrgame sweep` — the accuracy-vs-k abstraction experiment.

use std::collections::BTreeMap;
use std::path::PathBuf;

use attrgame::abstraction::{sweep_k, PartitionScheme, RepresentativeMode, SweepConfig, SweepResult};
use attrgame::classify::ClassifierKind;
use attrgame::dataset::Dataset;
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::manifest::{pretty, resolve_seed, sha256_file, to_json_value, write_outputs, RunManifest};
use crate::CliError;

pub const CSV_FILE: &str = "sweep.csv";
pub const JSON_FILE: &str = "sweep.json";

#[derive(Args)]
pub struct SweepArgs {
    /// Dataset CSV: first column label, remaining columns features.
    #[arg(long)]
    pub data: PathBuf,
    /// Sweep configuration JSON (k values, repeats, scheme, ...).
    #[arg(long)]
    pub config: PathBuf,
    /// Base RNG seed; drawn from entropy and recorded when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for sweep.csv, sweep.json, and the manifest.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KRange {
    min: usize,
    max: usize,
    #[serde(default = "one")]
    step: usize,
}

fn one() -> usize {
    1
}

/// On-disk sweep configuration; the seed comes from the command line.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SweepFileConfig {
    #[serde(default)]
    k_values: Option<Vec<usize>>,
    #[serde(default)]
    k_range: Option<KRange>,
    repeats: usize,
    scheme: PartitionScheme,
    #[serde(default)]
    train_fraction: Option<f64>,
    #[serde(default)]
    classifier: Option<ClassifierKind>,
    #[serde(default)]
    representative_mode: Option<RepresentativeMode>,
    #[serde(default)]
    control_repeats: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedSweepConfig {
    pub data_path: String,
    pub sweep: SweepConfig,
}

pub fn execute(
    config: &ResolvedSweepConfig,
    digests: BTreeMap<String, String>,
    out_dir: &PathBuf,
) -> Result<SweepResult, CliError> {
    let data = Dataset::from_csv_path(std::path::Path::new(&config.data_path))
        .map_err(CliError::input)?;
    println!(
        "dataset: {} samples, {} features, {} classes",
        data.sample_count(),
        data.feature_count(),
        data.class_count()
    );
    let result = sweep_k(&data, &config.sweep).map_err(CliError::input)?;
    println!(
        "control: {} +/- {} over {} repeats",
        result.control.mean_accuracy, result.control.std_accuracy, result.control.repeats
    );
    for record in &result.records {
        match &record.error {
            Some(e) => println!("k={}: failed ({e})", record.k),
            None => println!(
                "k={}: {} +/- {} ({})",
                record.k,
                record.mean_test_accuracy,
                record.std_test_accuracy,
                if record.comparable { "comparable" } else { "below band" },
            ),
        }
    }

    let manifest = RunManifest::new(
        "sweep",
        Some(config.sweep.seed),
        to_json_value(config)?,
        digests,
        vec![CSV_FILE.to_string(), JSON_FILE.to_string()],
    );
    write_outputs(
        out_dir,
        &[(CSV_FILE, result.to_csv()), (JSON_FILE, pretty(&result)?)],
        &manifest,
    )?;
    println!("wrote {}", out_dir.join(CSV_FILE).display());
    Ok(result)
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let mut digests = BTreeMap::new();
    digests.insert(args.config.display().to_string(), sha256_file(&args.config)?);
    digests.insert(args.data.display().to_string(), sha256_file(&args.data)?);

    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.config.display())))?;
    let file: SweepFileConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.config.display())))?;

    let k_values = match (file.k_values, file.k_range) {
        (Some(values), None) => values,
        (None, Some(range)) => {
            if range.step == 0 || range.min == 0 || range.min > range.max {
                return Err(CliError::Input("invalid k_range".into()));
            }
            (range.min..=range.max).step_by(range.step).collect()
        }
        _ => {
            return Err(CliError::Input(
                "config needs exactly one of k_values or k_range".into(),
            ))
        }
    };
    let seed = resolve_seed(args.seed);
    let mut sweep = SweepConfig::new(k_values, file.repeats, file.scheme, seed);
    if let Some(fraction) = file.train_fraction {
        sweep.train_fraction = fraction;
    }
    if let Some(classifier) = file.classifier {
        sweep.classifier = classifier;
    }
    if let Some(mode) = file.representative_mode {
        sweep.representative_mode = mode;
    }
    if let Some(repeats) = file.control_repeats {
        sweep.control_repeats = repeats;
    }
    let config = ResolvedSweepConfig {
        data_path: args.data.display().to_string(),
        sweep,
    };
    execute(&config, digests, &args.out).map(|_| ())
}
