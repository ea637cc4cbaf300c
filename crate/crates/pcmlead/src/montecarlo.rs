//! Deterministic Monte Carlo harness for the promotion experiments.
//!
//! A trial grid is defined by matrix size, profile id, and perturbation
//! level alpha. Every random draw comes from a ChaCha8 substream keyed by
//! (seed, purpose, n, profile id[, alpha]), so any single trial can be
//! reproduced in isolation and results do not depend on thread count or
//! execution order.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PcmError, Result};
use crate::io::fmt_f64;
use crate::leader::{promote, Algorithm};
use crate::pcm::{
    consistency_index, geometric_ranking, AdditivePcm, MultiplicativePcm, PriorityVector,
    DEFAULT_MAX_N, MIN_N,
};
use crate::projection::cached_orthogonal_basis;
use crate::stability::{arsi, ScaleBound};

/// Which alternative a trial tries to promote.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Strategy {
    /// Last by number: always the alternative with the highest index.
    #[serde(rename = "LBN")]
    Lbn,
    /// Last by ranking: the bottom-ranked alternative of the input matrix.
    #[serde(rename = "LBR")]
    Lbr,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Lbn => "LBN",
            Strategy::Lbr => "LBR",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Strategy {
    type Err = PcmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "LBN" => Ok(Strategy::Lbn),
            "LBR" => Ok(Strategy::Lbr),
            other => Err(PcmError::Parse {
                what: "strategy".into(),
                detail: format!("expected LBN or LBR, got {other:?}"),
            }),
        }
    }
}

/// Law of the multiplicative perturbation factor r in [1/alpha, alpha].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RDistribution {
    /// log r uniform on [-ln alpha, ln alpha].
    #[default]
    #[serde(rename = "logUniform")]
    LogUniform,
    /// r uniform on [1/alpha, alpha].
    #[serde(rename = "uniform")]
    Uniform,
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::Greedy, Algorithm::Bubble]
}

fn default_strategies() -> Vec<Strategy> {
    vec![Strategy::Lbn, Strategy::Lbr]
}

fn default_scale_bound() -> f64 {
    9.0_f64.ln()
}

fn default_ci_bin_width() -> f64 {
    0.01
}

fn default_ci_bin_min_count() -> usize {
    30
}

/// Full description of an experiment; serializable as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_range: Vec<usize>,
    pub profiles_per_n: usize,
    pub alpha_grid: Vec<f64>,
    pub seed: u64,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<Strategy>,
    /// Half-width of the additive scale used for stability indices; widened
    /// per matrix when generated entries exceed it.
    #[serde(default = "default_scale_bound")]
    pub scale_bound_m: f64,
    #[serde(default = "default_ci_bin_width")]
    pub ci_bin_width: f64,
    #[serde(default = "default_ci_bin_min_count")]
    pub ci_bin_min_count: usize,
    #[serde(default)]
    pub r_distribution: RDistribution,
}

impl ExperimentConfig {
    /// Small grid suitable for a workstation run: 2,250 matrices.
    pub fn desk_scale(seed: u64) -> Self {
        Self {
            n_range: (5..=9).collect(),
            profiles_per_n: 50,
            alpha_grid: (0..=8).map(|k| 1.0 + 0.5 * k as f64).collect(),
            seed,
            algorithms: default_algorithms(),
            strategies: default_strategies(),
            scale_bound_m: default_scale_bound(),
            ci_bin_width: default_ci_bin_width(),
            ci_bin_min_count: default_ci_bin_min_count(),
            r_distribution: RDistribution::LogUniform,
        }
    }

    /// Full grid: 102,500 matrices, 410,000 promotion runs.
    pub fn full_scale(seed: u64) -> Self {
        Self {
            profiles_per_n: 500,
            alpha_grid: (0..=40).map(|k| 1.0 + 0.1 * k as f64).collect(),
            ..Self::desk_scale(seed)
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| PcmError::Parse {
            what: "experiment config".into(),
            detail: e.to_string(),
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialization cannot fail")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| Err(PcmError::InvalidConfig { reason });
        if self.n_range.is_empty() {
            return fail("nRange must not be empty".into());
        }
        for &n in &self.n_range {
            if !(MIN_N..=DEFAULT_MAX_N).contains(&n) {
                return fail(format!("n = {n} outside {MIN_N}..={DEFAULT_MAX_N}"));
            }
        }
        let mut ns = self.n_range.clone();
        ns.sort_unstable();
        ns.dedup();
        if ns.len() != self.n_range.len() {
            return fail("nRange contains duplicates".into());
        }
        if self.profiles_per_n == 0 {
            return fail("profilesPerN must be at least 1".into());
        }
        if self.alpha_grid.is_empty() {
            return fail("alphaGrid must not be empty".into());
        }
        for &alpha in &self.alpha_grid {
            if !(alpha.is_finite() && alpha >= 1.0) {
                return fail(format!("alpha = {alpha} must be finite and >= 1"));
            }
        }
        let mut alphas: Vec<u64> = self.alpha_grid.iter().map(|a| a.to_bits()).collect();
        alphas.sort_unstable();
        alphas.dedup();
        if alphas.len() != self.alpha_grid.len() {
            return fail("alphaGrid contains duplicates".into());
        }
        if self.algorithms.is_empty() {
            return fail("algorithms must not be empty".into());
        }
        let mut algs = self.algorithms.clone();
        algs.sort_unstable();
        algs.dedup();
        if algs.len() != self.algorithms.len() {
            return fail("algorithms contains duplicates".into());
        }
        if self.strategies.is_empty() {
            return fail("strategies must not be empty".into());
        }
        let mut strats = self.strategies.clone();
        strats.sort_unstable();
        strats.dedup();
        if strats.len() != self.strategies.len() {
            return fail("strategies contains duplicates".into());
        }
        if !(self.scale_bound_m.is_finite() && self.scale_bound_m > 0.0) {
            return fail(format!("scaleBoundM = {} must be positive", self.scale_bound_m));
        }
        if !(self.ci_bin_width.is_finite() && self.ci_bin_width > 0.0) {
            return fail(format!("ciBinWidth = {} must be positive", self.ci_bin_width));
        }
        if self.ci_bin_min_count == 0 {
            return fail("ciBinMinCount must be at least 1".into());
        }
        Ok(())
    }

    /// Number of distinct matrices the grid generates.
    pub fn planned_matrices(&self) -> usize {
        self.n_range.len() * self.profiles_per_n * self.alpha_grid.len()
    }

    /// Number of promotion runs: one per matrix, algorithm, and strategy.
    pub fn planned_runs(&self) -> usize {
        self.planned_matrices() * self.algorithms.len() * self.strategies.len()
    }
}

/// Outcome of one promotion run. `error` is set when any stage of the trial
/// failed; such records carry no data and are excluded from files and
/// aggregates.
#[derive(Debug, Clone)]
pub struct TrialRecord {
    pub n: usize,
    pub alpha: f64,
    pub profile_id: usize,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    /// 0-based in memory; written 1-based to records.csv.
    pub target: usize,
    pub iterations: usize,
    pub ci_input: f64,
    pub ci_output: f64,
    pub arsi_input: f64,
    /// Frobenius distance from the input after steps 1..=iterations.
    pub frobenius_per_step: Vec<f64>,
    /// Aggregate stability index after steps 1..=iterations.
    pub arsi_per_step: Vec<f64>,
    pub error: Option<String>,
}

impl TrialRecord {
    pub fn is_failed(&self) -> bool {
        self.error.is_some()
    }
}

fn splitmix64(z: u64) -> u64 {
    let z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    let z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// ChaCha8 stream keyed by the seed and a list of stream labels.
///
/// The key derivation chains splitmix64 over the labels, so streams with
/// different labels are statistically independent and each is stable across
/// releases (no dependence on external generator internals).
pub fn stream_rng(seed: u64, parts: &[u64]) -> ChaCha8Rng {
    let mut state = splitmix64(seed);
    for &p in parts {
        state = splitmix64(state ^ splitmix64(p));
    }
    let mut key = [0u8; 32];
    let mut z = state;
    for chunk in key.chunks_exact_mut(8) {
        z = splitmix64(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw on [0, 1) with 53 random bits.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

const STREAM_PROFILE: u64 = 1;
const STREAM_PERTURB: u64 = 2;

fn profile_rng(seed: u64, n: usize, profile_id: usize) -> ChaCha8Rng {
    stream_rng(seed, &[STREAM_PROFILE, n as u64, profile_id as u64])
}

fn perturb_rng(seed: u64, n: usize, profile_id: usize, alpha: f64) -> ChaCha8Rng {
    stream_rng(
        seed,
        &[STREAM_PERTURB, n as u64, profile_id as u64, alpha.to_bits()],
    )
}

/// Latent priority profile: n weights log-uniform on [1, 9].
pub fn random_profile(n: usize, rng: &mut impl RngCore) -> PriorityVector {
    let ln9 = 9.0_f64.ln();
    PriorityVector::new((0..n).map(|_| (unit_f64(rng) * ln9).exp()).collect())
}

/// Reciprocal matrix around the profile: `m_ij = (w_i / w_j) * r_ij` with an
/// independent perturbation `r_ij` in [1/alpha, alpha] for each i < j, and
/// `m_ji = 1 / m_ij`. At alpha = 1 the matrix is exactly consistent.
pub fn random_pcm(
    profile: &PriorityVector,
    alpha: f64,
    rng: &mut impl RngCore,
) -> Result<MultiplicativePcm> {
    random_pcm_with_distribution(profile, alpha, RDistribution::LogUniform, rng)
}

/// [`random_pcm`] with an explicit perturbation law.
pub fn random_pcm_with_distribution(
    profile: &PriorityVector,
    alpha: f64,
    distribution: RDistribution,
    rng: &mut impl RngCore,
) -> Result<MultiplicativePcm> {
    if !(alpha.is_finite() && alpha >= 1.0) {
        return Err(PcmError::InvalidConfig {
            reason: format!("alpha = {alpha} must be finite and >= 1"),
        });
    }
    let n = profile.len();
    let mut rows = vec![vec![1.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let r = match distribution {
                RDistribution::LogUniform => {
                    ((2.0 * unit_f64(rng) - 1.0) * alpha.ln()).exp()
                }
                RDistribution::Uniform => {
                    let lo = 1.0 / alpha;
                    lo + unit_f64(rng) * (alpha - lo)
                }
            };
            let v = (profile.get(i) / profile.get(j)) * r;
            rows[i][j] = v;
            rows[j][i] = 1.0 / v;
        }
    }
    MultiplicativePcm::from_rows(&rows)
}

/// Picks the promotion target for a generated matrix.
pub fn select_target(m: &MultiplicativePcm, strategy: Strategy) -> usize {
    match strategy {
        Strategy::Lbn => m.n() - 1,
        Strategy::Lbr => {
            let w = geometric_ranking(m);
            let mut worst = 0;
            for k in 1..w.len() {
                if w.get(k) < w.get(worst) {
                    worst = k;
                }
            }
            worst
        }
    }
}

fn record_key(r: &TrialRecord) -> (usize, usize, u64, Algorithm, Strategy) {
    // total_cmp order == bit order for the non-negative alphas we store.
    (r.n, r.profile_id, r.alpha.to_bits(), r.algorithm, r.strategy)
}

fn failed_record(
    n: usize,
    alpha: f64,
    profile_id: usize,
    algorithm: Algorithm,
    strategy: Strategy,
    error: &PcmError,
) -> TrialRecord {
    TrialRecord {
        n,
        alpha,
        profile_id,
        algorithm,
        strategy,
        target: 0,
        iterations: 0,
        ci_input: f64::NAN,
        ci_output: f64::NAN,
        arsi_input: f64::NAN,
        frobenius_per_step: Vec::new(),
        arsi_per_step: Vec::new(),
        error: Some(error.to_string()),
    }
}

fn run_matrix_trials(
    config: &ExperimentConfig,
    n: usize,
    profile_id: usize,
    alpha: f64,
) -> Vec<TrialRecord> {
    let mut out = Vec::with_capacity(config.algorithms.len() * config.strategies.len());
    let prepared = (|| -> Result<(MultiplicativePcm, AdditivePcm, ScaleBound, f64, f64)> {
        let profile = random_profile(n, &mut profile_rng(config.seed, n, profile_id));
        let m = random_pcm_with_distribution(
            &profile,
            alpha,
            config.r_distribution,
            &mut perturb_rng(config.seed, n, profile_id, alpha),
        )?;
        let ci_input = consistency_index(&m)?;
        let a = m.to_additive();
        let bound = ScaleBound::new(config.scale_bound_m)?.covering(&a);
        let arsi_input = arsi(&a, &bound)?;
        Ok((m, a, bound, ci_input, arsi_input))
    })();
    let (m, a, bound, ci_input, arsi_input) = match prepared {
        Ok(parts) => parts,
        Err(e) => {
            for &algorithm in &config.algorithms {
                for &strategy in &config.strategies {
                    out.push(failed_record(n, alpha, profile_id, algorithm, strategy, &e));
                }
            }
            return out;
        }
    };
    for &algorithm in &config.algorithms {
        for &strategy in &config.strategies {
            let target = select_target(&m, strategy);
            let run = (|| -> Result<TrialRecord> {
                let basis = cached_orthogonal_basis(n)?;
                let (final_matrix, trace) = promote(&a, target, algorithm, &basis, &bound)?;
                let ci_output = consistency_index(&final_matrix.to_multiplicative())?;
                Ok(TrialRecord {
                    n,
                    alpha,
                    profile_id,
                    algorithm,
                    strategy,
                    target,
                    iterations: trace.iterations(),
                    ci_input,
                    ci_output,
                    arsi_input,
                    frobenius_per_step: trace
                        .steps
                        .iter()
                        .map(|s| s.frobenius_from_input)
                        .collect(),
                    arsi_per_step: trace.steps.iter().map(|s| s.arsi).collect(),
                    error: None,
                })
            })();
            out.push(run.unwrap_or_else(|e| {
                failed_record(n, alpha, profile_id, algorithm, strategy, &e)
            }));
        }
    }
    out
}

/// Runs the full grid in parallel. The output is sorted by
/// (n, profile id, alpha, algorithm, strategy) and is independent of the
/// rayon thread count.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    config.validate()?;
    for &n in &config.n_range {
        cached_orthogonal_basis(n)?;
    }
    let mut plan: Vec<(usize, usize, f64)> = Vec::with_capacity(config.planned_matrices());
    for &n in &config.n_range {
        for profile_id in 0..config.profiles_per_n {
            for &alpha in &config.alpha_grid {
                plan.push((n, profile_id, alpha));
            }
        }
    }
    let mut records: Vec<TrialRecord> = plan
        .par_iter()
        .map(|&(n, profile_id, alpha)| run_matrix_trials(config, n, profile_id, alpha))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    records.sort_by_key(record_key);
    Ok(records)
}

/// Per-(algorithm, strategy) digest used for console summaries.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub trials: usize,
    pub failed: usize,
    pub mean_iterations: f64,
    pub mean_ci_input: f64,
    pub mean_ci_output: f64,
}

/// (trials, failed, iteration sum, input CI sum, output CI sum).
type SummaryTotals = (usize, usize, f64, f64, f64);

pub fn summarize(records: &[TrialRecord]) -> Vec<RunSummary> {
    let mut groups: BTreeMap<(Algorithm, Strategy), SummaryTotals> = BTreeMap::new();
    for r in records {
        let g = groups
            .entry((r.algorithm, r.strategy))
            .or_insert((0, 0, 0.0, 0.0, 0.0));
        g.0 += 1;
        if r.is_failed() {
            g.1 += 1;
        } else {
            g.2 += r.iterations as f64;
            g.3 += r.ci_input;
            g.4 += r.ci_output;
        }
    }
    groups
        .into_iter()
        .map(|((algorithm, strategy), (trials, failed, iters, ci_in, ci_out))| {
            let ok = (trials - failed) as f64;
            RunSummary {
                algorithm,
                strategy,
                trials,
                failed,
                mean_iterations: iters / ok,
                mean_ci_input: ci_in / ok,
                mean_ci_output: ci_out / ok,
            }
        })
        .collect()
}

/// Mean iteration count per (n, algorithm, strategy).
#[derive(Debug, Clone, PartialEq)]
pub struct IterationSummary {
    pub n: usize,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub mean_iterations: f64,
}

pub fn aggregate_iterations_by_n(records: &[TrialRecord]) -> Vec<IterationSummary> {
    let mut groups: BTreeMap<(usize, Algorithm, Strategy), (usize, f64)> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_failed()) {
        let g = groups
            .entry((r.n, r.algorithm, r.strategy))
            .or_insert((0, 0.0));
        g.0 += 1;
        g.1 += r.iterations as f64;
    }
    groups
        .into_iter()
        .map(|((n, algorithm, strategy), (count, total))| IterationSummary {
            n,
            algorithm,
            strategy,
            mean_iterations: total / count as f64,
        })
        .collect()
}

/// One consistency-index bin for a given (algorithm, strategy).
#[derive(Debug, Clone, PartialEq)]
pub struct CiBin {
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub bin_low: f64,
    pub bin_high: f64,
    pub mean_ci: f64,
    pub mean_iterations: f64,
    pub count: usize,
    /// True when the bin holds fewer trials than the configured floor and
    /// its mean should not be trusted.
    pub low_confidence: bool,
}

/// Bins trials by input consistency index (clamped at 0 against float
/// noise) and reports the mean iteration count per bin.
pub fn bin_by_ci(records: &[TrialRecord], bin_width: f64, min_count: usize) -> Vec<CiBin> {
    let mut groups: BTreeMap<(Algorithm, Strategy, u64), (usize, f64, f64)> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_failed()) {
        let ci = r.ci_input.max(0.0);
        let bin = (ci / bin_width).floor() as u64;
        let g = groups
            .entry((r.algorithm, r.strategy, bin))
            .or_insert((0, 0.0, 0.0));
        g.0 += 1;
        g.1 += ci;
        g.2 += r.iterations as f64;
    }
    groups
        .into_iter()
        .map(|((algorithm, strategy, bin), (count, ci_total, iter_total))| CiBin {
            algorithm,
            strategy,
            bin_low: bin as f64 * bin_width,
            bin_high: (bin + 1) as f64 * bin_width,
            mean_ci: ci_total / count as f64,
            mean_iterations: iter_total / count as f64,
            count,
            low_confidence: count < min_count,
        })
        .collect()
}

/// Mean Frobenius distance from the input after each step, per
/// (algorithm, strategy). Step s averages over the runs that reached s.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceByIteration {
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub iteration: usize,
    pub mean_distance: f64,
}

pub fn aggregate_frobenius_by_iteration(records: &[TrialRecord]) -> Vec<DistanceByIteration> {
    let mut groups: BTreeMap<(Algorithm, Strategy, usize), (usize, f64)> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_failed()) {
        for (idx, &d) in r.frobenius_per_step.iter().enumerate() {
            let g = groups
                .entry((r.algorithm, r.strategy, idx + 1))
                .or_insert((0, 0.0));
            g.0 += 1;
            g.1 += d;
        }
    }
    groups
        .into_iter()
        .map(|((algorithm, strategy, iteration), (count, total))| DistanceByIteration {
            algorithm,
            strategy,
            iteration,
            mean_distance: total / count as f64,
        })
        .collect()
}

/// Mean aggregate stability index after each step (0 = input), per
/// (n, algorithm, strategy).
#[derive(Debug, Clone, PartialEq)]
pub struct ArsiByIteration {
    pub n: usize,
    pub algorithm: Algorithm,
    pub strategy: Strategy,
    pub iteration: usize,
    pub mean_arsi: f64,
}

pub fn aggregate_arsi_by_iteration(records: &[TrialRecord]) -> Vec<ArsiByIteration> {
    let mut groups: BTreeMap<(usize, Algorithm, Strategy, usize), (usize, f64)> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_failed()) {
        let g = groups
            .entry((r.n, r.algorithm, r.strategy, 0))
            .or_insert((0, 0.0));
        g.0 += 1;
        g.1 += r.arsi_input;
        for (idx, &v) in r.arsi_per_step.iter().enumerate() {
            let g = groups
                .entry((r.n, r.algorithm, r.strategy, idx + 1))
                .or_insert((0, 0.0));
            g.0 += 1;
            g.1 += v;
        }
    }
    groups
        .into_iter()
        .map(
            |((n, algorithm, strategy, iteration), (count, total))| ArsiByIteration {
                n,
                algorithm,
                strategy,
                iteration,
                mean_arsi: total / count as f64,
            },
        )
        .collect()
}

/// Mean input stability index per n, each generated matrix counted once.
#[derive(Debug, Clone, PartialEq)]
pub struct ArsiByN {
    pub n: usize,
    pub mean_arsi: f64,
}

pub fn mean_input_arsi_by_n(records: &[TrialRecord]) -> Vec<ArsiByN> {
    let mut seen: BTreeMap<(usize, usize, u64), f64> = BTreeMap::new();
    for r in records.iter().filter(|r| !r.is_failed()) {
        seen.entry((r.n, r.profile_id, r.alpha.to_bits()))
            .or_insert(r.arsi_input);
    }
    let mut groups: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for ((n, _, _), arsi_input) in seen {
        let g = groups.entry(n).or_insert((0, 0.0));
        g.0 += 1;
        g.1 += arsi_input;
    }
    groups
        .into_iter()
        .map(|(n, (count, total))| ArsiByN {
            n,
            mean_arsi: total / count as f64,
        })
        .collect()
}

pub const RECORDS_FILE: &str = "records.csv";
pub const TRACE_FROBENIUS_FILE: &str = "trace_frobenius.csv";
pub const TRACE_ARSI_FILE: &str = "trace_arsi.csv";
pub const FIG1_FILE: &str = "fig1_iterations_by_n.csv";
pub const FIG2_FILE: &str = "fig2_ci_bins.csv";
pub const FIG3_FILE: &str = "fig3_frobenius.csv";
pub const FIG4_FILE: &str = "fig4_arsi_by_n.csv";
pub const FIG5_FILE: &str = "fig5_arsi_by_iter.csv";
pub const CONFIG_FILE: &str = "config.json";

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(path)?))
}

/// Writes records.csv plus the two per-step trace files.
///
/// Failed trials are skipped; `trial_id` in the trace files is the 0-based
/// row index within records.csv.
pub fn write_records(dir: &Path, records: &[TrialRecord]) -> Result<()> {
    let mut rec = create(&dir.join(RECORDS_FILE))?;
    let mut frob = create(&dir.join(TRACE_FROBENIUS_FILE))?;
    let mut ars = create(&dir.join(TRACE_ARSI_FILE))?;
    writeln!(
        rec,
        "n,alpha,profile_id,algorithm,strategy,target,iterations,ci_input,ci_output"
    )?;
    writeln!(frob, "trial_id,step,value")?;
    writeln!(ars, "trial_id,step,value")?;
    for (trial_id, r) in records.iter().filter(|r| !r.is_failed()).enumerate() {
        writeln!(
            rec,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.alpha),
            r.profile_id,
            r.algorithm,
            r.strategy,
            r.target + 1,
            r.iterations,
            fmt_f64(r.ci_input),
            fmt_f64(r.ci_output)
        )?;
        for (idx, &v) in r.frobenius_per_step.iter().enumerate() {
            writeln!(frob, "{trial_id},{},{}", idx + 1, fmt_f64(v))?;
        }
        writeln!(ars, "{trial_id},0,{}", fmt_f64(r.arsi_input))?;
        for (idx, &v) in r.arsi_per_step.iter().enumerate() {
            writeln!(ars, "{trial_id},{},{}", idx + 1, fmt_f64(v))?;
        }
    }
    rec.flush()?;
    frob.flush()?;
    ars.flush()?;
    Ok(())
}

/// Writes the five figure CSVs derived from the records.
pub fn write_figures(
    dir: &Path,
    records: &[TrialRecord],
    bin_width: f64,
    bin_min_count: usize,
) -> Result<()> {
    let mut f1 = create(&dir.join(FIG1_FILE))?;
    writeln!(f1, "n,algorithm,strategy,mean_iterations")?;
    for row in aggregate_iterations_by_n(records) {
        writeln!(
            f1,
            "{},{},{},{}",
            row.n,
            row.algorithm,
            row.strategy,
            fmt_f64(row.mean_iterations)
        )?;
    }
    f1.flush()?;

    let mut f2 = create(&dir.join(FIG2_FILE))?;
    writeln!(
        f2,
        "algorithm,strategy,bin_low,bin_high,mean_ci,mean_iterations,count,low_confidence"
    )?;
    for row in bin_by_ci(records, bin_width, bin_min_count) {
        writeln!(
            f2,
            "{},{},{},{},{},{},{},{}",
            row.algorithm,
            row.strategy,
            fmt_f64(row.bin_low),
            fmt_f64(row.bin_high),
            fmt_f64(row.mean_ci),
            fmt_f64(row.mean_iterations),
            row.count,
            row.low_confidence
        )?;
    }
    f2.flush()?;

    let mut f3 = create(&dir.join(FIG3_FILE))?;
    writeln!(f3, "algorithm,strategy,iteration,mean_distance")?;
    for row in aggregate_frobenius_by_iteration(records) {
        writeln!(
            f3,
            "{},{},{},{}",
            row.algorithm,
            row.strategy,
            row.iteration,
            fmt_f64(row.mean_distance)
        )?;
    }
    f3.flush()?;

    let mut f4 = create(&dir.join(FIG4_FILE))?;
    writeln!(f4, "n,mean_arsi")?;
    for row in mean_input_arsi_by_n(records) {
        writeln!(f4, "{},{}", row.n, fmt_f64(row.mean_arsi))?;
    }
    f4.flush()?;

    let mut f5 = create(&dir.join(FIG5_FILE))?;
    writeln!(f5, "n,algorithm,strategy,iteration,mean_arsi")?;
    for row in aggregate_arsi_by_iteration(records) {
        writeln!(
            f5,
            "{},{},{},{},{}",
            row.n,
            row.algorithm,
            row.strategy,
            row.iteration,
            fmt_f64(row.mean_arsi)
        )?;
    }
    f5.flush()?;
    Ok(())
}

/// Writes the whole output directory: config echo, records, traces, figures.
pub fn write_experiment_outputs(
    dir: &Path,
    config: &ExperimentConfig,
    records: &[TrialRecord],
) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(CONFIG_FILE), config.to_json())?;
    write_records(dir, records)?;
    write_figures(dir, records, config.ci_bin_width, config.ci_bin_min_count)
}

fn records_parse_error(detail: impl Into<String>) -> PcmError {
    PcmError::Parse {
        what: "records file".into(),
        detail: detail.into(),
    }
}

fn parse_cell<T: std::str::FromStr>(cell: &str, what: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    cell.parse()
        .map_err(|e| records_parse_error(format!("bad {what} {cell:?}: {e}")))
}

fn read_trace(path: &Path, expect_zero_step: bool) -> Result<BTreeMap<usize, Vec<f64>>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("trial_id,step,value") => {}
        other => return Err(records_parse_error(format!("bad trace header {other:?}"))),
    }
    let mut traces: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut cells = line.split(',');
        let (Some(id), Some(step), Some(value), None) =
            (cells.next(), cells.next(), cells.next(), cells.next())
        else {
            return Err(records_parse_error(format!("bad trace row {line:?}")));
        };
        let id: usize = parse_cell(id, "trial id")?;
        let step: usize = parse_cell(step, "step")?;
        let value: f64 = parse_cell(value, "value")?;
        let trace = traces.entry(id).or_default();
        let expected = trace.len() + usize::from(!expect_zero_step);
        if step != expected {
            return Err(records_parse_error(format!(
                "trial {id}: step {step} out of order (expected {expected})"
            )));
        }
        trace.push(value);
    }
    Ok(traces)
}

/// Reads an output directory back into records (only the successful trials
/// that were written).
pub fn read_experiment_dir(dir: &Path) -> Result<Vec<TrialRecord>> {
    let text = fs::read_to_string(dir.join(RECORDS_FILE))?;
    let mut lines = text.lines();
    let header = "n,alpha,profile_id,algorithm,strategy,target,iterations,ci_input,ci_output";
    match lines.next() {
        Some(h) if h == header => {}
        other => return Err(records_parse_error(format!("bad header {other:?}"))),
    }
    let mut records = Vec::new();
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 9 {
            return Err(records_parse_error(format!(
                "expected 9 columns, got {} in {line:?}",
                cells.len()
            )));
        }
        let target_1based: usize = parse_cell(cells[5], "target")?;
        if target_1based == 0 {
            return Err(records_parse_error("target column is 1-based".to_string()));
        }
        records.push(TrialRecord {
            n: parse_cell(cells[0], "n")?,
            alpha: parse_cell(cells[1], "alpha")?,
            profile_id: parse_cell(cells[2], "profile id")?,
            algorithm: cells[3].parse()?,
            strategy: cells[4].parse()?,
            target: target_1based - 1,
            iterations: parse_cell(cells[6], "iterations")?,
            ci_input: parse_cell(cells[7], "ci_input")?,
            ci_output: parse_cell(cells[8], "ci_output")?,
            arsi_input: f64::NAN,
            frobenius_per_step: Vec::new(),
            arsi_per_step: Vec::new(),
            error: None,
        });
    }
    let frob = read_trace(&dir.join(TRACE_FROBENIUS_FILE), false)?;
    let ars = read_trace(&dir.join(TRACE_ARSI_FILE), true)?;
    for (id, r) in records.iter_mut().enumerate() {
        if let Some(t) = frob.get(&id) {
            r.frobenius_per_step = t.clone();
        }
        let Some(t) = ars.get(&id) else {
            return Err(records_parse_error(format!(
                "trial {id} missing from trace_arsi"
            )));
        };
        r.arsi_input = t[0];
        r.arsi_per_step = t[1..].to_vec();
        if r.frobenius_per_step.len() != r.iterations || r.arsi_per_step.len() != r.iterations {
            return Err(records_parse_error(format!(
                "trial {id}: trace lengths disagree with iterations = {}",
                r.iterations
            )));
        }
    }
    for id in frob.keys().chain(ars.keys()) {
        if *id >= records.len() {
            return Err(records_parse_error(format!(
                "trace rows for unknown trial {id}"
            )));
        }
    }
    Ok(records)
}
