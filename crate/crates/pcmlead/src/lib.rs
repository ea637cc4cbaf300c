//! Toolkit for additive and multiplicative pairwise-comparison matrices:
//! equalizing orthogonal projections, leader-promotion algorithms built on
//! them, ranking-stability indices, and a deterministic Monte Carlo harness
//! for studying how easily a ranking can be manipulated.
//!
//! Indices are 0-based throughout the API; the command-line front end
//! converts to and from the 1-based convention used in its files and flags.

#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod io;
pub mod leader;
pub mod montecarlo;
pub mod pcm;
pub mod projection;
pub mod stability;

pub use error::{PcmError, Result};
pub use leader::{
    bubble_promote, greedy_promote, nudge_leader, promote, Algorithm, PromotionStep,
    PromotionTrace, WEIGHT_TOL,
};
pub use montecarlo::{
    run_experiment, ExperimentConfig, RDistribution, Strategy, TrialRecord,
};
pub use pcm::{
    additive_ranking, best_alternative, consistency_index, frobenius_distance, frobenius_inner,
    frobenius_norm, geometric_ranking, permute_conjugate, AdditivePcm, MultiplicativePcm,
    Permutation, PriorityVector, DEFAULT_MAX_N, MIN_N,
};
pub use projection::{
    build_permutation, build_tie_basis, cached_orthogonal_basis, closed_form_projection, eq,
    gram_schmidt, project_tie_12, tie_space_dimension, OrthogonalTieBasis, TieBasis,
};
pub use stability::{arsi, rsi, rsi_min, ScaleBound};
