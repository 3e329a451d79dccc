//! Game values and equilibrium strategies for payoff matrices.
//!
//! Three routes are provided and cross-check one another:
//!
//! - [`solve_lp`]: exact minimax via the standard zero-sum linear program
//!   (shift the matrix positive, solve `max 1.u s.t. M'^T u <= 1, u >= 0`;
//!   the primal gives the learner, the duals give the adversary).
//! - [`solve_fictitious_play`]: iterated best response against empirical
//!   averages, an independent second solver.
//! - [`solve_indicator`]: the closed form for indicator games. Each block is
//!   a matching-pennies game on its attributes, payoffs add across blocks,
//!   so the product of per-block uniform strategies is an exact equilibrium
//!   with value equal to the sum of reciprocal block sizes.
//!
//! Every returned profile carries an [`EquilibriumCertificate`] whose
//! exploitability is recomputed from best responses, a code path independent
//! of the solver that produced the profile.

use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize};

use crate::game::{GameError, MixedStrategy, Partition, PayoffMatrix, Role, DEFAULT_STRATEGY_CAP};
use crate::simplex::{max_simplex, SimplexError};

/// Required exploitability of an LP solve.
pub const LP_EXPLOITABILITY_TOL: f64 = 1e-9;
/// Default fictitious-play convergence target.
pub const FP_DEFAULT_TOL: f64 = 1e-4;
/// Exploitability bound certified for the uniform product profile.
pub const UNIFORM_CERT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolveError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("internal LP construction bug: {0}")]
    LpInternal(String),
    #[error("solver produced exploitability {exploitability:e} above tolerance {tolerance:e}")]
    CertificationFailed { exploitability: f64, tolerance: f64 },
    #[error("invalid solver parameter: {0}")]
    InvalidParameter(String),
}

/// Which solver produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Lp,
    FictitiousPlay,
    BlockDecomposition,
}

/// Best-response gap of an equilibrium candidate.
///
/// `exploitability = max(max_c (x^T M)_c - value, value - min_r (M y)_r)`;
/// zero at an exact Nash equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumCertificate {
    pub exploitability: f64,
    pub tolerance: f64,
}

impl EquilibriumCertificate {
    pub fn is_nash(&self) -> bool {
        self.exploitability <= self.tolerance
    }
}

/// A solved game: value, both strategies, and the certificate.
#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Learner-pays-adversary game value at the returned profile.
    pub value: f64,
    pub learner_strategy: MixedStrategy,
    pub adversary_strategy: MixedStrategy,
    pub method: SolveMethod,
    /// Iteration count (fictitious play only).
    pub iterations: Option<u64>,
    /// False when fictitious play hit its iteration budget first.
    pub converged: bool,
    pub certificate: EquilibriumCertificate,
}

impl Serialize for SolveResult {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        fn general(m: &MixedStrategy) -> Vec<f64> {
            match m {
                MixedStrategy::General(p) => p.clone(),
                // Solvers always store general form; a product form here
                // would be a bug, but serialize it losslessly anyway.
                MixedStrategy::Product(blocks) => {
                    let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
                    m.expand(&sizes).unwrap_or_default()
                }
            }
        }
        let mut s = serializer.serialize_struct("SolveResult", 7)?;
        s.serialize_field("value", &self.value)?;
        s.serialize_field("learner_strategy", &general(&self.learner_strategy))?;
        s.serialize_field("adversary_strategy", &general(&self.adversary_strategy))?;
        s.serialize_field("method", &self.method)?;
        s.serialize_field("iterations", &self.iterations)?;
        s.serialize_field("converged", &self.converged)?;
        s.serialize_field("certificate", &self.certificate)?;
        s.end()
    }
}

fn expand_for_side(
    matrix: &PayoffMatrix,
    mix: &MixedStrategy,
    side_len: usize,
) -> Result<Vec<f64>, SolveError> {
    let v = match mix {
        MixedStrategy::General(p) => p.clone(),
        MixedStrategy::Product(_) => mix.expand(matrix.block_sizes()).map_err(SolveError::Game)?,
    };
    if v.len() != side_len {
        return Err(SolveError::Game(GameError::DimensionMismatch {
            expected: side_len,
            got: v.len(),
        }));
    }
    Ok(v)
}

/// The pure strategy maximizing (adversary) or minimizing (learner) expected
/// payoff against the opponent's mixed strategy. Ties break to the lowest
/// canonical index. Returns `(strategy index, achieved value)`.
pub fn best_response(
    matrix: &PayoffMatrix,
    opponent: &MixedStrategy,
    responder: Role,
) -> Result<(usize, f64), SolveError> {
    match responder {
        Role::Adversary => {
            let x = expand_for_side(matrix, opponent, matrix.row_count())?;
            let payoffs = matrix.col_payoffs(&x)?;
            Ok(argbest(&payoffs, true))
        }
        Role::Learner => {
            let y = expand_for_side(matrix, opponent, matrix.col_count())?;
            let payoffs = matrix.row_payoffs(&y)?;
            Ok(argbest(&payoffs, false))
        }
    }
}

fn argbest(values: &[f64], maximize: bool) -> (usize, f64) {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        let improves = if maximize {
            v > values[best]
        } else {
            v < values[best]
        };
        if improves {
            best = i;
        }
    }
    (best, values[best])
}

/// Exploitability of a general-form profile, computed from best responses.
pub fn profile_exploitability(
    matrix: &PayoffMatrix,
    learner: &[f64],
    adversary: &[f64],
) -> Result<(f64, f64), SolveError> {
    let col_payoffs = matrix.col_payoffs(learner).map_err(SolveError::Game)?;
    let row_payoffs = matrix.row_payoffs(adversary).map_err(SolveError::Game)?;
    let value: f64 = learner
        .iter()
        .zip(&row_payoffs)
        .map(|(&x, &p)| x * p)
        .sum();
    let (_, adversary_best) = argbest(&col_payoffs, true);
    let (_, learner_best) = argbest(&row_payoffs, false);
    let exploitability = (adversary_best - value).max(value - learner_best).max(0.0);
    Ok((value, exploitability))
}

fn clip_normalize(mut v: Vec<f64>) -> Result<Vec<f64>, SolveError> {
    for x in &mut v {
        if !x.is_finite() {
            return Err(SolveError::LpInternal("non-finite strategy weight".into()));
        }
        if *x < 0.0 {
            if *x < -1e-9 {
                return Err(SolveError::LpInternal(format!(
                    "strategy weight {x} is significantly negative"
                )));
            }
            *x = 0.0;
        }
    }
    let sum: f64 = v.iter().sum();
    if sum <= 0.0 {
        return Err(SolveError::LpInternal("strategy weights sum to zero".into()));
    }
    for x in &mut v {
        *x /= sum;
    }
    Ok(v)
}

/// Exact minimax solve via linear programming.
///
/// The matrix is shifted so every entry is at least 1 (the value shifts with
/// it; strategies are unaffected) and the learner LP
/// `max 1.u s.t. M'^T u <= 1, u >= 0` is solved by dense simplex. The
/// adversary strategy comes from the dual multipliers. Failure of the LP to
/// be bounded and feasible is impossible by construction and surfaces as
/// [`SolveError::LpInternal`].
pub fn solve_lp(matrix: &PayoffMatrix) -> Result<SolveResult, SolveError> {
    let nr = matrix.row_count();
    let nc = matrix.col_count();
    if matrix.entries().iter().any(|e| !e.is_finite()) {
        return Err(SolveError::Game(GameError::NonFiniteEntry));
    }
    let shift = 1.0 - matrix.min_entry();

    // Constraint matrix is M' transposed: one constraint per adversary column.
    let mut a = vec![0.0; nc * nr];
    for r in 0..nr {
        for c in 0..nc {
            a[c * nr + r] = matrix.entry(r, c) + shift;
        }
    }
    let b = vec![1.0; nc];
    let c = vec![1.0; nr];
    let sol = max_simplex(&a, nc, nr, &b, &c).map_err(|e| match e {
        SimplexError::Unbounded => SolveError::LpInternal("zero-sum LP unbounded".into()),
        SimplexError::NegativeRhs => SolveError::LpInternal("zero-sum LP infeasible".into()),
        SimplexError::Stalled => SolveError::LpInternal("simplex stalled".into()),
    })?;
    if !(sol.objective.is_finite() && sol.objective > 0.0) {
        return Err(SolveError::LpInternal(format!(
            "LP objective {} is not positive",
            sol.objective
        )));
    }

    let learner = clip_normalize(sol.x)?;
    let adversary = clip_normalize(sol.duals)?;
    let lp_value = 1.0 / sol.objective - shift;

    let (value, exploitability) = profile_exploitability(matrix, &learner, &adversary)?;
    if (value - lp_value).abs() > LP_EXPLOITABILITY_TOL.max(1e-9 * (1.0 + lp_value.abs())) {
        return Err(SolveError::LpInternal(format!(
            "LP value {lp_value} disagrees with profile value {value}"
        )));
    }
    if exploitability > LP_EXPLOITABILITY_TOL {
        return Err(SolveError::CertificationFailed {
            exploitability,
            tolerance: LP_EXPLOITABILITY_TOL,
        });
    }
    Ok(SolveResult {
        value,
        learner_strategy: MixedStrategy::General(learner),
        adversary_strategy: MixedStrategy::General(adversary),
        method: SolveMethod::Lp,
        iterations: None,
        converged: true,
        certificate: EquilibriumCertificate {
            exploitability,
            tolerance: LP_EXPLOITABILITY_TOL,
        },
    })
}

/// Fictitious play: both players repeatedly best-respond to the opponent's
/// empirical average, alternating learner first. Returns once the averaged
/// profile's exploitability drops to `target`, or the best profile seen with
/// `converged = false` when `max_iters` runs out. Non-convergence is
/// reported in the result, never raised.
pub fn solve_fictitious_play(
    matrix: &PayoffMatrix,
    max_iters: u64,
    target: f64,
) -> Result<SolveResult, SolveError> {
    if max_iters < 1 {
        return Err(SolveError::InvalidParameter("max_iters must be >= 1".into()));
    }
    if !(target > 0.0) {
        return Err(SolveError::InvalidParameter(
            "target exploitability must be > 0".into(),
        ));
    }
    let nr = matrix.row_count();
    let nc = matrix.col_count();
    // Cumulative payoff of each own pure strategy against the opponent's
    // play counts; best responses read these in O(p).
    let mut row_acc = vec![0.0; nr];
    let mut col_acc = vec![0.0; nc];
    let mut learner_counts = vec![0u64; nr];
    let mut adversary_counts = vec![0u64; nc];

    let check_interval = 64.max(nr.max(nc) as u64 / 4);
    let mut best: Option<(f64, f64, Vec<f64>, Vec<f64>, u64)> = None;

    for t in 1..=max_iters {
        let (r, _) = argbest(&row_acc, false);
        learner_counts[r] += 1;
        for (acc, &m) in col_acc.iter_mut().zip(matrix.row(r)) {
            *acc += m;
        }
        let (c, _) = argbest(&col_acc, true);
        adversary_counts[c] += 1;
        for (row, acc) in row_acc.iter_mut().enumerate() {
            *acc += matrix.entry(row, c);
        }

        if t % check_interval == 0 || t == max_iters {
            let x: Vec<f64> = learner_counts
                .iter()
                .map(|&n| n as f64 / t as f64)
                .collect();
            let y: Vec<f64> = adversary_counts
                .iter()
                .map(|&n| n as f64 / t as f64)
                .collect();
            let (value, exploitability) = profile_exploitability(matrix, &x, &y)?;
            let improved = best.as_ref().is_none_or(|(_, e, ..)| exploitability < *e);
            if improved {
                best = Some((value, exploitability, x, y, t));
            }
            if exploitability <= target {
                break;
            }
        }
    }

    let (value, exploitability, x, y, iterations) =
        best.expect("at least one exploitability check runs");
    Ok(SolveResult {
        value,
        converged: exploitability <= target,
        learner_strategy: MixedStrategy::General(x),
        adversary_strategy: MixedStrategy::General(y),
        method: SolveMethod::FictitiousPlay,
        iterations: Some(iterations),
        certificate: EquilibriumCertificate {
            exploitability,
            tolerance: target,
        },
    })
}

/// Closed-form solve of the indicator game by per-block decomposition.
///
/// The indicator payoff is additive across blocks and each block in
/// isolation is a matching-pennies game whose unique equilibrium is uniform,
/// so the uniform product profile is an exact equilibrium of the full game.
/// Runs in O(sum of block sizes) plus the strategy expansion; the matrix is
/// never materialised. [`certify_uniform_equilibrium`] is the matrix-based
/// verification path for the same claim.
pub fn solve_indicator(partition: &Partition) -> Result<SolveResult, SolveError> {
    solve_indicator_with_cap(partition, DEFAULT_STRATEGY_CAP)
}

pub fn solve_indicator_with_cap(
    partition: &Partition,
    cap: u64,
) -> Result<SolveResult, SolveError> {
    let count = partition.strategy_count().unwrap_or(u64::MAX);
    if count > cap {
        return Err(SolveError::Game(GameError::StrategySpaceTooLarge {
            count: count as u128,
            cap,
        }));
    }
    let uniform = MixedStrategy::uniform_product(partition);
    let expanded = uniform
        .expand(&partition.block_sizes())
        .map_err(SolveError::Game)?;
    Ok(SolveResult {
        value: partition.uniform_game_value(),
        learner_strategy: MixedStrategy::General(expanded.clone()),
        adversary_strategy: MixedStrategy::General(expanded),
        method: SolveMethod::BlockDecomposition,
        iterations: None,
        converged: true,
        certificate: EquilibriumCertificate {
            exploitability: 0.0,
            tolerance: UNIFORM_CERT_TOL,
        },
    })
}

/// Numeric certification of the uniform product profile.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UniformCertification {
    /// Expected payment at the uniform profile (equals the sum of
    /// reciprocal block sizes).
    pub value: f64,
    pub certificate: EquilibriumCertificate,
}

/// Build the indicator matrix, evaluate the uniform product profile on it,
/// and certify that no pure deviation gains more than [`UNIFORM_CERT_TOL`].
/// Also checks the value against the closed form.
pub fn certify_uniform_equilibrium(
    partition: &Partition,
) -> Result<UniformCertification, SolveError> {
    certify_uniform_equilibrium_with_cap(partition, DEFAULT_STRATEGY_CAP)
}

pub fn certify_uniform_equilibrium_with_cap(
    partition: &Partition,
    cap: u64,
) -> Result<UniformCertification, SolveError> {
    let matrix = partition
        .indicator_matrix_with_cap(cap)
        .map_err(SolveError::Game)?;
    let uniform = MixedStrategy::uniform_product(partition)
        .expand(&partition.block_sizes())
        .map_err(SolveError::Game)?;
    let (value, exploitability) = profile_exploitability(&matrix, &uniform, &uniform)?;
    let closed_form = partition.uniform_game_value();
    if (value - closed_form).abs() > UNIFORM_CERT_TOL || exploitability > UNIFORM_CERT_TOL {
        return Err(SolveError::CertificationFailed {
            exploitability: exploitability.max((value - closed_form).abs()),
            tolerance: UNIFORM_CERT_TOL,
        });
    }
    Ok(UniformCertification {
        value,
        certificate: EquilibriumCertificate {
            exploitability,
            tolerance: UNIFORM_CERT_TOL,
        },
    })
}
