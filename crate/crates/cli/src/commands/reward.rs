//! `attrgame reward-build` and `attrgame reward-validate`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use attrgame::game::Partition;
use attrgame::reward::{
    build_reward_matrix_with_mode, normalize_reward, validate_quality_table, QualityTable,
    ValidationMode, Violation,
};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::manifest::{pretty, sha256_file, to_json_value, write_outputs, RunManifest};
use crate::CliError;

pub const MATRIX_FILE: &str = "reward_matrix.json";
pub const NORMALIZED_FILE: &str = "normalized_matrix.json";
pub const VIOLATIONS_FILE: &str = "violations.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeFlag {
    Strict,
    Asymmetric,
}

impl From<ModeFlag> for ValidationMode {
    fn from(flag: ModeFlag) -> Self {
        match flag {
            ModeFlag::Strict => ValidationMode::Strict,
            ModeFlag::Asymmetric => ValidationMode::Asymmetric,
        }
    }
}

#[derive(Args)]
pub struct RewardBuildArgs {
    /// Partition blocks as JSON, e.g. '[[1,2],[3,4]]'.
    #[arg(long)]
    pub partition: String,
    /// Quality table JSON file (base_quality plus attacked_quality or
    /// attacked_triplets).
    #[arg(long)]
    pub quality: PathBuf,
    /// Also write the row-normalized matrix (base quality subtracted).
    #[arg(long)]
    pub normalize: bool,
    #[arg(long, value_enum, default_value_t = ModeFlag::Strict)]
    pub mode: ModeFlag,
    /// Write reward_matrix.json (and normalized_matrix.json) here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct RewardValidateArgs {
    /// Partition blocks as JSON, e.g. '[[1,2],[3,4]]'.
    #[arg(long)]
    pub partition: String,
    /// Quality table JSON file.
    #[arg(long)]
    pub quality: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeFlag::Strict)]
    pub mode: ModeFlag,
    /// Write violations.json here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RewardConfig {
    pub blocks: Vec<Vec<u32>>,
    pub quality: QualityTable,
    pub mode: ModeFlag,
    pub normalize: bool,
}

fn load_inputs(
    partition_arg: &str,
    quality_path: &PathBuf,
) -> Result<(Partition, QualityTable, BTreeMap<String, String>), CliError> {
    let partition = super::parse_partition_arg(partition_arg)?;
    let mut digests = BTreeMap::new();
    digests.insert(quality_path.display().to_string(), sha256_file(quality_path)?);
    let text = std::fs::read_to_string(quality_path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", quality_path.display())))?;
    let table = QualityTable::from_json(&text).map_err(CliError::input)?;
    Ok((partition, table, digests))
}

pub fn execute_build(
    config: &RewardConfig,
    digests: BTreeMap<String, String>,
    out: Option<&PathBuf>,
) -> Result<(), CliError> {
    let partition = Partition::new(config.blocks.clone()).map_err(CliError::input)?;
    let matrix = build_reward_matrix_with_mode(&partition, &config.quality, config.mode.into())
        .map_err(CliError::input)?;
    println!(
        "reward matrix: {} x {} ({:?} mode), assumptions verified",
        matrix.row_count(),
        matrix.col_count(),
        config.mode
    );

    let mut files = vec![(MATRIX_FILE, pretty(&matrix)?)];
    let mut outputs = vec![MATRIX_FILE.to_string()];
    if config.normalize {
        let normalized = normalize_reward(&matrix, &config.quality).map_err(CliError::input)?;
        files.push((NORMALIZED_FILE, pretty(&normalized)?));
        outputs.push(NORMALIZED_FILE.to_string());
        println!("normalized matrix: quality drops only (zero off-collision)");
    }
    if let Some(out_dir) = out {
        let manifest =
            RunManifest::new("reward-build", None, to_json_value(config)?, digests, outputs);
        write_outputs(out_dir, &files, &manifest)?;
        println!("wrote {}", out_dir.join(MATRIX_FILE).display());
    }
    Ok(())
}

pub fn run_build(args: &RewardBuildArgs) -> Result<(), CliError> {
    let (partition, quality, digests) = load_inputs(&args.partition, &args.quality)?;
    let config = RewardConfig {
        blocks: partition.blocks().to_vec(),
        quality,
        mode: args.mode,
        normalize: args.normalize,
    };
    execute_build(&config, digests, args.out.as_ref())
}

pub fn execute_validate(
    config: &RewardConfig,
    digests: BTreeMap<String, String>,
    out: Option<&PathBuf>,
) -> Result<Vec<Violation>, CliError> {
    let partition = Partition::new(config.blocks.clone()).map_err(CliError::input)?;
    let violations = validate_quality_table(&partition, &config.quality, config.mode.into())
        .map_err(CliError::input)?;
    if violations.is_empty() {
        println!("quality table is valid ({:?} mode)", config.mode);
    } else {
        println!("{} violation(s):", violations.len());
        for violation in violations.iter().take(20) {
            println!("  {violation}");
        }
        if violations.len() > 20 {
            println!("  ... and {} more", violations.len() - 20);
        }
    }
    if let Some(out_dir) = out {
        let manifest = RunManifest::new(
            "reward-validate",
            None,
            to_json_value(config)?,
            digests,
            vec![VIOLATIONS_FILE.to_string()],
        );
        write_outputs(out_dir, &[(VIOLATIONS_FILE, pretty(&violations)?)], &manifest)?;
    }
    if !violations.is_empty() {
        return Err(CliError::Input(format!(
            "quality table has {} violation(s)",
            violations.len()
        )));
    }
    Ok(violations)
}

pub fn run_validate(args: &RewardValidateArgs) -> Result<(), CliError> {
    let (partition, quality, digests) = load_inputs(&args.partition, &args.quality)?;
    let config = RewardConfig {
        blocks: partition.blocks().to_vec(),
        quality,
        mode: args.mode,
        normalize: false,
    };
    execute_validate(&config, digests, args.out.as_ref()).map(|_| ())
}
