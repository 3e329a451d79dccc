//! `attrgame rerun` — re-execute a run from its manifest.
//!
//! The manifest stores the subcommand, the fully resolved configuration, and
//! the seed, so a rerun reproduces the primary output files byte for byte.
//! Input files referenced by path (sweep datasets) are re-checked against
//! their recorded digests first.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;

use crate::manifest::{sha256_file, RunManifest};
use crate::CliError;

use super::{attack, reward, solve, sweep, verify};

#[derive(Args)]
pub struct RerunArgs {
    /// Manifest of the run to reproduce.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Fresh output directory.
    #[arg(long)]
    pub out: PathBuf,
}

fn config_as<T: serde::de::DeserializeOwned>(manifest: &RunManifest) -> Result<T, CliError> {
    serde_json::from_value(manifest.config.clone())
        .map_err(|e| CliError::Input(format!("manifest config does not parse: {e}")))
}

/// Re-hash every recorded input file and fail on drift.
fn check_digests(manifest: &RunManifest) -> Result<BTreeMap<String, String>, CliError> {
    let mut digests = BTreeMap::new();
    for (path, recorded) in &manifest.input_digests {
        let current = sha256_file(std::path::Path::new(path))?;
        if &current != recorded {
            return Err(CliError::Input(format!(
                "input {path} changed since the original run ({recorded} -> {current})"
            )));
        }
        digests.insert(path.clone(), current);
    }
    Ok(digests)
}

pub fn run(args: &RerunArgs) -> Result<(), CliError> {
    let manifest = RunManifest::load(&args.manifest)?;
    let digests = check_digests(&manifest)?;
    println!(
        "re-running `{}` from {}",
        manifest.subcommand,
        args.manifest.display()
    );
    match manifest.subcommand.as_str() {
        "solve" => {
            let config: solve::SolveConfig = config_as(&manifest)?;
            solve::execute(&config, digests, Some(&args.out)).map(|_| ())
        }
        "verify" => {
            let config: verify::VerifyConfig = config_as(&manifest)?;
            verify::execute(&config, digests, Some(&args.out)).map(|_| ())
        }
        "attack" => {
            let config: attack::ResolvedAttackConfig = config_as(&manifest)?;
            let seed = manifest
                .seed
                .ok_or_else(|| CliError::Input("attack manifest lacks a seed".into()))?;
            attack::execute(&config, seed, digests, &args.out).map(|_| ())
        }
        "sweep" => {
            let config: sweep::ResolvedSweepConfig = config_as(&manifest)?;
            sweep::execute(&config, digests, &args.out).map(|_| ())
        }
        "reward-build" => {
            let config: reward::RewardConfig = config_as(&manifest)?;
            reward::execute_build(&config, digests, Some(&args.out))
        }
        "reward-validate" => {
            let config: reward::RewardConfig = config_as(&manifest)?;
            reward::execute_validate(&config, digests, Some(&args.out)).map(|_| ())
        }
        other => Err(CliError::Input(format!("unknown subcommand in manifest: {other}"))),
    }
}
