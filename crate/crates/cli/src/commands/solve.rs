//! `attrgame solve` — game values and equilibrium strategies.

use std::collections::BTreeMap;
use std::path::PathBuf;

use attrgame::equilibrium::{solve_fictitious_play, solve_lp, SolveResult, FP_DEFAULT_TOL};
use attrgame::game::{MixedStrategy, Partition, PayoffMatrix, DEFAULT_STRATEGY_CAP};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::manifest::{pretty, sha256_file, to_json_value, write_outputs, RunManifest};
use crate::CliError;

pub const RESULT_FILE: &str = "solve_result.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodFlag {
    /// Exact minimax linear program.
    Lp,
    /// Fictitious play.
    Fp,
}

#[derive(Args)]
pub struct SolveArgs {
    /// Partition blocks as JSON, e.g. '[[1,2],[3,4]]'.
    #[arg(long, conflicts_with_all = ["matrix", "spec"])]
    pub partition: Option<String>,
    /// Explicit payoff matrix as JSON rows, e.g. '[[1,0],[0,1]]'.
    #[arg(long, conflicts_with = "spec")]
    pub matrix: Option<String>,
    /// JSON file holding {"blocks": [...]} or {"matrix": [...]}.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = MethodFlag::Lp)]
    pub method: MethodFlag,
    /// Fictitious-play target exploitability.
    #[arg(long, default_value_t = FP_DEFAULT_TOL)]
    pub tol: f64,
    /// Fictitious-play iteration budget.
    #[arg(long, default_value_t = 2_000_000)]
    pub max_iters: u64,
    /// Reject games with more pure strategies than this.
    #[arg(long, default_value_t = DEFAULT_STRATEGY_CAP)]
    pub cap: u64,
    /// Write solve_result.json and a manifest here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GameSource {
    Partition { blocks: Vec<Vec<u32>> },
    Matrix { entries: Vec<Vec<f64>> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveConfig {
    pub source: GameSource,
    pub method: MethodFlag,
    pub tol: f64,
    pub max_iters: u64,
    pub cap: u64,
}

#[derive(Serialize, Deserialize)]
struct SpecFile {
    #[serde(default)]
    blocks: Option<Vec<Vec<u32>>>,
    #[serde(default)]
    matrix: Option<Vec<Vec<f64>>>,
}

fn resolve_source(args: &SolveArgs) -> Result<(GameSource, BTreeMap<String, String>), CliError> {
    let mut digests = BTreeMap::new();
    let source = match (&args.partition, &args.matrix, &args.spec) {
        (Some(text), None, None) => {
            let partition = super::parse_partition_arg(text)?;
            GameSource::Partition {
                blocks: partition.blocks().to_vec(),
            }
        }
        (None, Some(text), None) => {
            let entries: Vec<Vec<f64>> = serde_json::from_str(text)
                .map_err(|e| CliError::Input(format!("matrix JSON: {e}")))?;
            GameSource::Matrix { entries }
        }
        (None, None, Some(path)) => {
            digests.insert(path.display().to_string(), sha256_file(path)?);
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
            let spec: SpecFile = serde_json::from_str(&text)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            match (spec.blocks, spec.matrix) {
                (Some(blocks), None) => GameSource::Partition { blocks },
                (None, Some(entries)) => GameSource::Matrix { entries },
                _ => {
                    return Err(CliError::Input(format!(
                        "{}: expected exactly one of \"blocks\" or \"matrix\"",
                        path.display()
                    )))
                }
            }
        }
        _ => {
            return Err(CliError::Input(
                "provide exactly one of --partition, --matrix, or --spec".into(),
            ))
        }
    };
    Ok((source, digests))
}

pub fn build_matrix(source: &GameSource, cap: u64) -> Result<PayoffMatrix, CliError> {
    match source {
        GameSource::Partition { blocks } => {
            let partition = Partition::new(blocks.clone()).map_err(CliError::input)?;
            partition.indicator_matrix_with_cap(cap).map_err(CliError::input)
        }
        GameSource::Matrix { entries } => {
            PayoffMatrix::from_entries(entries.clone()).map_err(CliError::input)
        }
    }
}

pub fn execute(
    config: &SolveConfig,
    digests: BTreeMap<String, String>,
    out: Option<&PathBuf>,
) -> Result<SolveResult, CliError> {
    let matrix = build_matrix(&config.source, config.cap)?;
    let result = match config.method {
        MethodFlag::Lp => solve_lp(&matrix).map_err(CliError::input)?,
        MethodFlag::Fp => solve_fictitious_play(&matrix, config.max_iters, config.tol)
            .map_err(CliError::input)?,
    };

    println!("method:         {:?}", config.method);
    println!("value:          {}", result.value);
    println!("exploitability: {:e}", result.certificate.exploitability);
    if let Some(iters) = result.iterations {
        println!("iterations:     {iters}");
        println!("converged:      {}", result.converged);
    }
    print_strategy("learner", &result.learner_strategy);
    print_strategy("adversary", &result.adversary_strategy);

    if let Some(out_dir) = out {
        let manifest = RunManifest::new(
            "solve",
            None,
            to_json_value(config)?,
            digests,
            vec![RESULT_FILE.to_string()],
        );
        write_outputs(out_dir, &[(RESULT_FILE, pretty(&result)?)], &manifest)?;
        println!("wrote {}", out_dir.join(RESULT_FILE).display());
    }
    if !result.converged {
        return Err(CliError::NonConvergence(format!(
            "fictitious play stopped at exploitability {:e} (target {:e})",
            result.certificate.exploitability, config.tol
        )));
    }
    Ok(result)
}

fn print_strategy(name: &str, strategy: &MixedStrategy) {
    if let MixedStrategy::General(probs) = strategy {
        if probs.len() <= 16 {
            let rendered: Vec<String> = probs.iter().map(|p| format!("{p:.6}")).collect();
            println!("{:<15} [{}]", format!("{name}:"), rendered.join(", "));
        } else {
            println!(
                "{:<15} {} pure strategies (see JSON output)",
                format!("{name}:"),
                probs.len()
            );
        }
    }
}

pub fn run(args: &SolveArgs) -> Result<(), CliError> {
    let (source, digests) = resolve_source(args)?;
    let config = SolveConfig {
        source,
        method: args.method,
        tol: args.tol,
        max_iters: args.max_iters,
        cap: args.cap,
    };
    execute(&config, digests, args.out.as_ref()).map(|_| ())
}
