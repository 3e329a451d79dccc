//! `attrgame attack` — poisoned stream generation with a mean-shift check.

use std::collections::BTreeMap;
use std::path::PathBuf;

use attrgame::attack::{
    class_stats, predicted_attacked_mean, sample_poisoned_stream, AttackConfig, ClassStats,
    Density, LabeledDensityPair, Origin,
};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::manifest::{pretty, resolve_seed, sha256_file, to_json_value, write_outputs, RunManifest};
use crate::CliError;

pub const STREAM_FILE: &str = "poisoned.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Args)]
pub struct AttackArgs {
    /// Attack configuration JSON (densities, epsilon, optional attacker).
    #[arg(long)]
    pub config: PathBuf,
    /// Number of samples to draw.
    #[arg(long)]
    pub n: usize,
    /// Base RNG seed; drawn from entropy and recorded when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for poisoned.csv, summary.json, and the manifest.
    #[arg(long)]
    pub out: PathBuf,
}

/// On-disk attack configuration. The attacker density defaults to the
/// midpoint normal when omitted.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct AttackFileConfig {
    plus: Density,
    minus: Density,
    epsilon: f64,
    #[serde(default)]
    attacker: Option<Density>,
    #[serde(default)]
    class_prior_plus: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResolvedAttackConfig {
    pub pair: LabeledDensityPair,
    pub attack: AttackConfig,
    pub n: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassSummary {
    pub count: usize,
    pub empirical_mean: f64,
    pub predicted_mean: f64,
    pub std: f64,
    pub standard_error: f64,
    pub within_three_se: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AttackSummary {
    pub epsilon: f64,
    pub attacker_mean: f64,
    pub n: usize,
    pub seed: u64,
    pub plus: ClassSummary,
    pub minus: ClassSummary,
    pub attacker_fraction: f64,
    pub passed: bool,
}

fn summarize(stats: &ClassStats, predicted: f64) -> ClassSummary {
    let standard_error = stats.std / (stats.count as f64).sqrt();
    ClassSummary {
        count: stats.count,
        empirical_mean: stats.mean,
        predicted_mean: predicted,
        std: stats.std,
        standard_error,
        within_three_se: (stats.mean - predicted).abs() <= 3.0 * standard_error,
    }
}

pub fn execute(
    config: &ResolvedAttackConfig,
    seed: u64,
    digests: BTreeMap<String, String>,
    out_dir: &PathBuf,
) -> Result<AttackSummary, CliError> {
    let stream = sample_poisoned_stream(&config.pair, &config.attack, config.n, seed)
        .map_err(CliError::input)?;

    let mut csv = String::with_capacity(stream.len() * 24);
    csv.push_str("x,label,origin\n");
    for sample in &stream {
        csv.push_str(&format!("{},{},{}\n", sample.x, sample.label, sample.origin));
    }

    let (plus, minus) = class_stats(&stream);
    let (plus, minus) = match (plus, minus) {
        (Some(p), Some(m)) => (p, m),
        _ => {
            return Err(CliError::Input(
                "degenerate stream: a class is empty; increase n".into(),
            ))
        }
    };
    let u = config.attack.attacker.mean();
    let eps = config.attack.epsilon;
    let plus_summary = summarize(&plus, predicted_attacked_mean(config.pair.plus.mean(), u, eps));
    let minus_summary =
        summarize(&minus, predicted_attacked_mean(config.pair.minus.mean(), u, eps));
    let attacker_count = stream.iter().filter(|s| s.origin == Origin::Attacker).count();
    let summary = AttackSummary {
        epsilon: eps,
        attacker_mean: u,
        n: config.n,
        seed,
        passed: plus_summary.within_three_se && minus_summary.within_three_se,
        plus: plus_summary,
        minus: minus_summary,
        attacker_fraction: attacker_count as f64 / stream.len() as f64,
    };

    println!(
        "plus class:  empirical {} vs predicted {} ({})",
        summary.plus.empirical_mean,
        summary.plus.predicted_mean,
        if summary.plus.within_three_se { "within 3 SE" } else { "OUTSIDE 3 SE" },
    );
    println!(
        "minus class: empirical {} vs predicted {} ({})",
        summary.minus.empirical_mean,
        summary.minus.predicted_mean,
        if summary.minus.within_three_se { "within 3 SE" } else { "OUTSIDE 3 SE" },
    );
    println!(
        "attacker fraction {} (epsilon {eps}), seed {seed}",
        summary.attacker_fraction
    );

    let manifest = RunManifest::new(
        "attack",
        Some(seed),
        to_json_value(config)?,
        digests,
        vec![STREAM_FILE.to_string(), SUMMARY_FILE.to_string()],
    );
    write_outputs(
        out_dir,
        &[(STREAM_FILE, csv), (SUMMARY_FILE, pretty(&summary)?)],
        &manifest,
    )?;
    println!("wrote {}", out_dir.join(STREAM_FILE).display());
    Ok(summary)
}

pub fn run(args: &AttackArgs) -> Result<(), CliError> {
    let mut digests = BTreeMap::new();
    digests.insert(args.config.display().to_string(), sha256_file(&args.config)?);
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", args.config.display())))?;
    let file: AttackFileConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.config.display())))?;

    let pair = LabeledDensityPair::new(file.plus, file.minus).map_err(CliError::input)?;
    let mut attack = match file.attacker {
        Some(attacker) => AttackConfig::new(file.epsilon, attacker).map_err(CliError::input)?,
        None => AttackConfig::midpoint(&pair, file.epsilon).map_err(CliError::input)?,
    };
    if let Some(prior) = file.class_prior_plus {
        attack.class_prior_plus = prior;
        attack.validate().map_err(CliError::input)?;
    }
    let config = ResolvedAttackConfig {
        pair,
        attack,
        n: args.n,
    };
    let seed = resolve_seed(args.seed);
    execute(&config, seed, digests, &args.out).map(|_| ())
}
