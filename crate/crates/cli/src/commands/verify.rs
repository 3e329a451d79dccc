//! `attrgame verify` — certify the uniform-random equilibrium.

use std::collections::BTreeMap;
use std::path::PathBuf;

use attrgame::equilibrium::{certify_uniform_equilibrium_with_cap, SolveError};
use attrgame::game::{Partition, DEFAULT_STRATEGY_CAP};
use clap::Args;
use serde::{Deserialize, Serialize};

use crate::manifest::{pretty, sha256_file, to_json_value, write_outputs, RunManifest};
use crate::CliError;

pub const REPORT_FILE: &str = "verify.json";

#[derive(Args)]
pub struct VerifyArgs {
    /// Partition blocks as JSON, e.g. '[[1,2],[3,4]]'.
    #[arg(long, conflicts_with = "batch")]
    pub partition: Option<String>,
    /// JSON file with an array of partitions: [[[1,2],[3,4]], [[5],[6,7]]].
    #[arg(long)]
    pub batch: Option<PathBuf>,
    /// Certification threshold on exploitability.
    #[arg(long, default_value_t = 1e-12)]
    pub tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_STRATEGY_CAP)]
    pub cap: u64,
    /// Write verify.json and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub partitions: Vec<Vec<Vec<u32>>>,
    pub tolerance: f64,
    pub cap: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartitionReport {
    pub blocks: Vec<Vec<u32>>,
    pub expected_value: f64,
    pub value: Option<f64>,
    pub exploitability: Option<f64>,
    pub certified: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub tolerance: f64,
    pub certified_count: usize,
    pub reports: Vec<PartitionReport>,
}

pub fn execute(
    config: &VerifyConfig,
    digests: BTreeMap<String, String>,
    out: Option<&PathBuf>,
) -> Result<VerifyReport, CliError> {
    let mut reports = Vec::with_capacity(config.partitions.len());
    for blocks in &config.partitions {
        let partition = Partition::new(blocks.clone()).map_err(CliError::input)?;
        let expected_value = partition.uniform_game_value();
        let report = match certify_uniform_equilibrium_with_cap(&partition, config.cap) {
            Ok(certification) => PartitionReport {
                blocks: blocks.clone(),
                expected_value,
                value: Some(certification.value),
                exploitability: Some(certification.certificate.exploitability),
                certified: certification.certificate.exploitability <= config.tolerance,
            },
            Err(SolveError::CertificationFailed { exploitability, .. }) => PartitionReport {
                blocks: blocks.clone(),
                expected_value,
                value: None,
                exploitability: Some(exploitability),
                certified: exploitability <= config.tolerance,
            },
            Err(e) => return Err(CliError::input(e)),
        };
        println!(
            "partition {:?}: value {} exploitability {} -> {}",
            report.blocks,
            report
                .value
                .map_or_else(|| "-".to_string(), |v| v.to_string()),
            report
                .exploitability
                .map_or_else(|| "-".to_string(), |e| format!("{e:e}")),
            if report.certified { "CERTIFIED" } else { "NOT CERTIFIED" },
        );
        reports.push(report);
    }
    let certified_count = reports.iter().filter(|r| r.certified).count();
    let report = VerifyReport {
        tolerance: config.tolerance,
        certified_count,
        reports,
    };
    println!(
        "{}/{} partitions certified at tolerance {:e}",
        report.certified_count,
        report.reports.len(),
        config.tolerance
    );

    if let Some(out_dir) = out {
        let manifest = RunManifest::new(
            "verify",
            None,
            to_json_value(config)?,
            digests,
            vec![REPORT_FILE.to_string()],
        );
        write_outputs(out_dir, &[(REPORT_FILE, pretty(&report)?)], &manifest)?;
    }
    if report.certified_count != report.reports.len() {
        return Err(CliError::NonConvergence(format!(
            "{} partition(s) exceeded exploitability tolerance {:e}",
            report.reports.len() - report.certified_count,
            config.tolerance
        )));
    }
    Ok(report)
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    let mut digests = BTreeMap::new();
    let partitions = match (&args.partition, &args.batch) {
        (Some(text), None) => vec![super::parse_partition_arg(text)?.blocks().to_vec()],
        (None, Some(path)) => {
            digests.insert(path.display().to_string(), sha256_file(path)?);
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?
        }
        _ => {
            return Err(CliError::Input(
                "provide exactly one of --partition or --batch".into(),
            ))
        }
    };
    let config = VerifyConfig {
        partitions,
        tolerance: args.tolerance,
        cap: args.cap,
    };
    execute(&config, digests, args.out.as_ref()).map(|_| ())
}
