//! Attribute-selection defense games.
//!
//! A learner trains on one attribute per block of a partitioned attribute
//! set while an adversary tampers with one attribute per block. This crate
//! models the interaction as a zero-sum matrix game and ships the
//! surrounding experiment machinery:
//!
//! - [`game`]: partitions, strategies, and payoff-matrix construction.
//! - [`equilibrium`]: LP and fictitious-play solvers, best responses, and
//!   certification of the uniform-random equilibrium.
//! - [`reward`]: quality tables and the reward-function extension where
//!   payoffs come from learning-quality degradation.
//! - [`attack`]: the one-feature density-mixing poisoning attack and the
//!   value-squaring corruption patterns.
//! - [`abstraction`]: dataset feature abstraction (one representative per
//!   block) and the accuracy-vs-k sweep that validates comparability.

pub mod abstraction;
pub mod attack;
pub mod classify;
pub mod dataset;
pub mod equilibrium;
pub mod game;
pub mod reward;
pub mod seeds;
mod simplex;

pub use equilibrium::{
    best_response, certify_uniform_equilibrium, solve_fictitious_play, solve_indicator,
    solve_lp, EquilibriumCertificate, SolveMethod, SolveResult, UniformCertification,
};
pub use game::{
    AttributeId, GameError, MixedStrategy, Partition, PayoffMatrix, Provenance, PureStrategy,
    Role, DEFAULT_STRATEGY_CAP,
};
