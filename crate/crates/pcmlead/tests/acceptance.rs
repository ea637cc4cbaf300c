//! Acceptance suite. Each criterion prints one PASS/FAIL line with the
//! governing numbers (run with `-- --nocapture` to see passing lines) and
//! fails the build when its bound is missed.

#![allow(clippy::needless_range_loop)]

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use pcmlead::montecarlo::{
    aggregate_arsi_by_iteration, aggregate_frobenius_by_iteration, aggregate_iterations_by_n,
    bin_by_ci, mean_input_arsi_by_n, run_experiment, stream_rng, unit_f64,
    write_experiment_outputs, ExperimentConfig, Strategy, TrialRecord,
};
use pcmlead::{
    additive_ranking, build_permutation, build_tie_basis, bubble_promote, cached_orthogonal_basis,
    closed_form_projection, eq, frobenius_inner, gram_schmidt, greedy_promote, nudge_leader,
    permute_conjugate, project_tie_12, Algorithm, AdditivePcm, PriorityVector, ScaleBound,
};

const LN9: f64 = 2.1972245773362196;
const DESK_SEED: u64 = 4;
const CORPUS_SEED: u64 = 7;
const SCALE_SEED: u64 = 11;

fn report(number: u8, label: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {number} ({label}): {verdict} [{detail}]");
    assert!(pass, "criterion {number} ({label}) failed: {detail}");
}

fn max_abs_diff(actual: &AdditivePcm, expected: &[[f64; 4]; 4]) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..4 {
        for j in 0..4 {
            worst = worst.max((actual.get(i, j) - expected[i][j]).abs());
        }
    }
    worst
}

fn max_weight_diff(actual: &PriorityVector, expected: &[f64]) -> f64 {
    expected
        .iter()
        .enumerate()
        .map(|(i, &e)| (actual.get(i) - e).abs())
        .fold(0.0, f64::max)
}

fn worked_example() -> AdditivePcm {
    AdditivePcm::from_rows(&[
        vec![0.0, 1.0, 2.0, 9.0],
        vec![-1.0, 0.0, 1.0, 8.0],
        vec![-2.0, -1.0, 0.0, 7.0],
        vec![-9.0, -8.0, -7.0, 0.0],
    ])
    .unwrap()
}

#[test]
fn c1_orthogonal_basis_golden() {
    let start = Instant::now();
    let b = build_tie_basis(4).unwrap();
    let h = gram_schmidt(&b).unwrap();
    let tol = 1e-12;

    let expected_b: [[[f64; 4]; 4]; 5] = [
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, 0.0],
        ],
        [
            [0.0, 1.0, 0.0, 0.0],
            [-1.0, 0.0, 0.0, 2.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, -2.0, 0.0, 0.0],
        ],
        [
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 0.0],
        ],
        [
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 0.0, 0.0],
            [-1.0, -1.0, 0.0, 0.0],
        ],
        [
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, -1.0],
            [0.0, -1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
        ],
    ];
    let expected_h: [[[f64; 4]; 4]; 5] = [
        expected_b[0],
        expected_b[1],
        [
            [0.0, -2.0 / 5.0, 1.0, 0.0],
            [2.0 / 5.0, 0.0, 0.0, 1.0 / 5.0],
            [-1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0 / 5.0, 0.0, 0.0],
        ],
        [
            [0.0, -1.0 / 3.0, -1.0 / 6.0, 1.0],
            [1.0 / 3.0, 0.0, 0.0, 1.0 / 6.0],
            [1.0 / 6.0, 0.0, 0.0, 0.0],
            [-1.0, -1.0 / 6.0, 0.0, 0.0],
        ],
        [
            [0.0, 2.0 / 7.0, 1.0 / 7.0, 1.0 / 7.0],
            [-2.0 / 7.0, 0.0, 1.0, -1.0 / 7.0],
            [-1.0 / 7.0, -1.0, 0.0, 0.0],
            [-1.0 / 7.0, 1.0 / 7.0, 0.0, 0.0],
        ],
    ];
    let expected_sq = [2.0, 10.0, 12.0 / 5.0, 7.0 / 3.0, 16.0 / 7.0];

    let mut worst = 0.0_f64;
    assert_eq!(b.len(), 5);
    assert_eq!(h.len(), 5);
    for k in 0..5 {
        worst = worst.max(max_abs_diff(b.vector(k), &expected_b[k]));
        worst = worst.max(max_abs_diff(h.vector(k), &expected_h[k]));
        worst = worst.max((h.squared_norm(k) - expected_sq[k]).abs());
        let self_inner = frobenius_inner(h.vector(k), h.vector(k)).unwrap();
        worst = worst.max((self_inner - expected_sq[k]).abs());
    }
    let elapsed = start.elapsed();
    report(
        1,
        "orthogonal basis golden",
        worst <= tol && elapsed < Duration::from_secs(1),
        &format!("max deviation {worst:.2e} (tol 1e-12), {elapsed:.2?}"),
    );
}

#[test]
fn c2_greedy_trace_golden() {
    let start = Instant::now();
    let a = worked_example();
    let basis = cached_orthogonal_basis(4).unwrap();
    let bound = ScaleBound::new(9.0).unwrap();
    let (final_matrix, trace) = greedy_promote(&a, 3, &basis, &bound).unwrap();

    let step1 = [
        [0.0, -3.5, -2.5, 0.0],
        [3.5, 0.0, 1.0, 3.5],
        [2.5, -1.0, 0.0, 2.5],
        [0.0, -3.5, -2.5, 0.0],
    ];
    let step2 = [
        [0.0, -1.75, -2.5, -1.75],
        [1.75, 0.0, -0.75, 0.0],
        [2.5, 0.75, 0.0, 0.75],
        [1.75, 0.0, -0.75, 0.0],
    ];
    let step3 = [
        [0.0, -1.75, -2.125, -2.125],
        [1.75, 0.0, -0.375, -0.375],
        [2.125, 0.375, 0.0, 0.0],
        [2.125, 0.375, 0.0, 0.0],
    ];
    let rankings: [[f64; 4]; 3] = [
        [-1.5, 2.0, 1.0, -1.5],
        [-1.5, 0.25, 1.0, 0.25],
        [-1.5, 0.25, 0.625, 0.625],
    ];

    let mut worst = 0.0_f64;
    let right_count = trace.iterations() == 3;
    if right_count {
        for (step, golden) in trace.steps.iter().zip([step1, step2, step3].iter()) {
            worst = worst.max(max_abs_diff(&step.matrix_after, golden));
        }
        for (step, golden) in trace.steps.iter().zip(rankings.iter()) {
            worst = worst.max(max_weight_diff(&step.ranking, golden));
        }
        worst = worst.max(max_abs_diff(&final_matrix, &step3));
    }
    let elapsed = start.elapsed();
    report(
        2,
        "greedy promotion golden",
        right_count && worst <= 1e-9 && elapsed < Duration::from_secs(1),
        &format!(
            "iterations {} (want 3), max deviation {worst:.2e} (tol 1e-9), {elapsed:.2?}",
            trace.iterations()
        ),
    );
}

#[test]
fn c3_bubble_trace_golden() {
    let a = worked_example();
    let basis = cached_orthogonal_basis(4).unwrap();
    let bound = ScaleBound::new(9.0).unwrap();
    let (final_matrix, trace) = bubble_promote(&a, 3, &basis, &bound).unwrap();

    let final_expected = [
        [0.0, 1.625, 3.875, 0.0],
        [-1.625, 0.0, 2.25, -1.625],
        [-3.875, -2.25, 0.0, -3.875],
        [0.0, 1.625, 3.875, 0.0],
    ];
    let weights = [1.375, -0.25, -2.5, 1.375];

    let mut worst = max_abs_diff(&final_matrix, &final_expected);
    let has_steps = trace.iterations() > 0;
    if has_steps {
        worst = worst.max(max_weight_diff(
            &trace.steps[trace.steps.len() - 1].ranking,
            &weights,
        ));
    }
    report(
        3,
        "bubble promotion golden",
        has_steps && worst <= 1e-9,
        &format!("max deviation {worst:.2e} (tol 1e-9)"),
    );
}

#[test]
fn c4_nudge_golden() {
    let a = worked_example();
    let basis = cached_orthogonal_basis(4).unwrap();
    let bound = ScaleBound::new(9.0).unwrap();
    let (promoted, _) = greedy_promote(&a, 3, &basis, &bound).unwrap();
    let nudged = nudge_leader(&promoted, 3, 2, 0.1).unwrap();
    let w = additive_ranking(&nudged);
    let worst = max_weight_diff(&w, &[-1.5, 0.25, 0.6, 0.65]);
    report(
        4,
        "tie-breaking nudge golden",
        worst <= 1e-9,
        &format!("max deviation {worst:.2e} (tol 1e-9)"),
    );
}

/// 500 matrices per dimension with a random equalized pair and target each.
fn corpus() -> &'static Vec<(AdditivePcm, usize, usize, usize)> {
    static CORPUS: OnceLock<Vec<(AdditivePcm, usize, usize, usize)>> = OnceLock::new();
    CORPUS.get_or_init(|| {
        let mut items = Vec::new();
        for n in 3..=9usize {
            for idx in 0..500u64 {
                let mut rng = stream_rng(CORPUS_SEED, &[n as u64, idx]);
                let a = AdditivePcm::from_upper(n, |_, _| {
                    (2.0 * unit_f64(&mut rng) - 1.0) * LN9
                })
                .unwrap();
                let i = (unit_f64(&mut rng) * (n as f64 - 1.0)) as usize;
                let j = i + 1 + (unit_f64(&mut rng) * ((n - 1 - i) as f64)) as usize;
                let target = (unit_f64(&mut rng) * n as f64) as usize;
                items.push((a, i, j, target));
            }
        }
        items
    })
}

#[test]
fn c5_projection_properties() {
    let start = Instant::now();
    let tol = 1e-9;
    let mut worst_rows = 0.0_f64;
    let mut worst_tie = 0.0_f64;
    let mut worst_oracle = 0.0_f64;
    let mut worst_orth = 0.0_f64;
    for (a, i, j, _) in corpus() {
        let n = a.n();
        let basis = cached_orthogonal_basis(n).unwrap();
        let out = eq(a, *i, *j, &basis).unwrap();

        let half = (a.row_sum(*i) + a.row_sum(*j)) / 2.0;
        worst_tie = worst_tie
            .max((out.row_sum(*i) - half).abs())
            .max((out.row_sum(*j) - half).abs());
        for k in 0..n {
            if k != *i && k != *j {
                worst_rows = worst_rows.max((out.row_sum(k) - a.row_sum(k)).abs());
            }
        }

        let perm = build_permutation(n, *i, *j).unwrap();
        let b = permute_conjugate(a, &perm).unwrap();
        let via_basis = project_tie_12(&b, &basis).unwrap();
        let via_formula = closed_form_projection(&b);
        for r in 0..n {
            for c in 0..n {
                worst_oracle =
                    worst_oracle.max((via_basis.get(r, c) - via_formula.get(r, c)).abs());
            }
        }
        for k in 0..basis.len() {
            let h = basis.vector(k);
            let residual_inner =
                frobenius_inner(&b, h).unwrap() - frobenius_inner(&via_basis, h).unwrap();
            worst_orth = worst_orth.max(residual_inner.abs());
        }
    }
    let elapsed = start.elapsed();
    let pass = worst_rows <= tol
        && worst_tie <= tol
        && worst_oracle <= tol
        && worst_orth <= tol
        && elapsed < Duration::from_secs(30);
    report(
        5,
        "projection properties on 3500 random matrices",
        pass,
        &format!(
            "spectator row sums {worst_rows:.2e}, tie at average {worst_tie:.2e}, \
             basis vs closed form {worst_oracle:.2e}, residual orthogonality {worst_orth:.2e} \
             (tol 1e-9), {elapsed:.2?}"
        ),
    );
}

#[test]
fn c6_termination_bound() {
    let bound = ScaleBound::saaty();
    let mut worst_gap = 0.0_f64;
    let mut max_extra = 0i64;
    for (a, _, _, target) in corpus() {
        let n = a.n();
        let basis = cached_orthogonal_basis(n).unwrap();
        for algorithm in [Algorithm::Greedy, Algorithm::Bubble] {
            let (out, trace) =
                pcmlead::promote(a, *target, algorithm, &basis, &bound).unwrap();
            max_extra = max_extra.max(trace.iterations() as i64 - (n as i64 - 1));
            let w = additive_ranking(&out);
            let max = (0..n).map(|k| w.get(k)).fold(f64::NEG_INFINITY, f64::max);
            worst_gap = worst_gap.max(max - w.get(*target));
        }
    }
    report(
        6,
        "promotion terminates within n - 1 calls",
        max_extra <= 0 && worst_gap <= 1e-9,
        &format!(
            "max iterations over n - 1: {max_extra}, worst target gap {worst_gap:.2e} (tol 1e-9)"
        ),
    );
}

#[test]
fn c7_scale_preservation() {
    let bound = LN9;
    let slack = 1e-9;
    let mut violating_matrices = 0usize;
    let mut worst = 0.0_f64;
    let mut first_example: Option<String> = None;
    for idx in 0..1000u64 {
        let n = 3 + (idx as usize % 7);
        let mut rng = stream_rng(SCALE_SEED, &[n as u64, idx]);
        let a = AdditivePcm::from_upper(n, |_, _| (2.0 * unit_f64(&mut rng) - 1.0) * bound)
            .unwrap();
        let i = (unit_f64(&mut rng) * (n as f64 - 1.0)) as usize;
        let j = i + 1 + (unit_f64(&mut rng) * ((n - 1 - i) as f64)) as usize;
        let basis = cached_orthogonal_basis(n).unwrap();
        let out = eq(&a, i, j, &basis).unwrap();
        let peak = out.max_abs_entry();
        if peak > bound + slack {
            violating_matrices += 1;
            worst = worst.max(peak);
            if first_example.is_none() {
                first_example = Some(format!(
                    "first finding: n = {n}, equalized pair ({i}, {j}), output entry \
                     magnitude {peak:.6} exceeds {bound:.6}"
                ));
            }
        }
    }
    if let Some(example) = &first_example {
        println!("{example}");
    }
    report(
        7,
        "equalizing preserves the input scale",
        violating_matrices == 0,
        &format!(
            "{violating_matrices} of 1000 matrices exceed the bound, worst magnitude {worst:.6} \
             vs bound {bound:.6} + 1e-9"
        ),
    );
}

fn desk_run() -> &'static (Vec<TrialRecord>, Duration) {
    static DESK: OnceLock<(Vec<TrialRecord>, Duration)> = OnceLock::new();
    DESK.get_or_init(|| {
        let start = Instant::now();
        let records = run_experiment(&ExperimentConfig::desk_scale(DESK_SEED)).unwrap();
        (records, start.elapsed())
    })
}

fn filter(
    records: &[TrialRecord],
    algorithm: Algorithm,
    strategy: Strategy,
) -> Vec<TrialRecord> {
    records
        .iter()
        .filter(|r| r.algorithm == algorithm && r.strategy == strategy)
        .cloned()
        .collect()
}

fn adjacent_drops(xs: &[f64]) -> (usize, f64) {
    let mut count = 0;
    let mut worst = 0.0_f64;
    for w in xs.windows(2) {
        let drop = w[0] - w[1];
        if drop > 1e-12 {
            count += 1;
            worst = worst.max(drop);
        }
    }
    (count, worst)
}

#[test]
fn c8_simulation_trends() {
    let config = ExperimentConfig::desk_scale(DESK_SEED);
    let (records, elapsed) = desk_run();
    let mut failures: Vec<&str> = Vec::new();

    // 8a: greedy mean iterations non-decreasing in n, at most one adjacent
    // drop of at most 0.05 per strategy.
    let mut a_detail = String::new();
    let mut a_pass = true;
    for strategy in [Strategy::Lbn, Strategy::Lbr] {
        let means: Vec<f64> = aggregate_iterations_by_n(records)
            .into_iter()
            .filter(|r| r.algorithm == Algorithm::Greedy && r.strategy == strategy)
            .map(|r| r.mean_iterations)
            .collect();
        let (drops, worst) = adjacent_drops(&means);
        if drops > 1 || worst > 0.05 {
            a_pass = false;
        }
        a_detail.push_str(&format!(
            " greedy/{strategy}: means {:?}, {drops} drop(s), worst {worst:.3};",
            means.iter().map(|m| (m * 1000.0).round() / 1000.0).collect::<Vec<_>>()
        ));
    }
    println!(
        "criterion 8a (greedy iterations grow with n): {}[{}]",
        if a_pass { "PASS " } else { "FAIL " },
        a_detail.trim()
    );
    if !a_pass {
        failures.push("8a");
    }

    // 8b: bubble/LBR mean iterations similar across inconsistency bins that
    // hold at least 30 trials.
    let bubble_lbr = filter(records, Algorithm::Bubble, Strategy::Lbr);
    let bins = bin_by_ci(&bubble_lbr, config.ci_bin_width, config.ci_bin_min_count);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut kept = 0;
    for bin in bins.iter().filter(|b| !b.low_confidence) {
        lo = lo.min(bin.mean_iterations);
        hi = hi.max(bin.mean_iterations);
        kept += 1;
    }
    let spread = hi - lo;
    let b_pass = kept > 0 && spread <= 0.5;
    println!(
        "criterion 8b (iterations flat across inconsistency bins): {} [spread {spread:.3} \
         over {kept} bins with >= 30 trials, limit 0.5]",
        if b_pass { "PASS" } else { "FAIL" }
    );
    if !b_pass {
        failures.push("8b");
    }

    // 8c: greedy/LBN mean distance from the input non-decreasing across
    // iteration indices.
    let greedy_lbn = filter(records, Algorithm::Greedy, Strategy::Lbn);
    let distances: Vec<f64> = aggregate_frobenius_by_iteration(&greedy_lbn)
        .into_iter()
        .map(|r| r.mean_distance)
        .collect();
    let (c_drops, c_worst) = adjacent_drops(&distances);
    let c_pass = c_drops == 0;
    println!(
        "criterion 8c (mean distance grows with iteration): {} [means {:?}, {c_drops} drop(s), \
         worst {c_worst:.3}]",
        if c_pass { "PASS" } else { "FAIL" },
        distances.iter().map(|m| (m * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    );
    if !c_pass {
        failures.push("8c");
    }

    // 8d: mean input ARSI increasing in n; mean ARSI strictly decreasing
    // across iterations for n = 5 and n = 9 under greedy/LBN.
    let by_n: Vec<(usize, f64)> = mean_input_arsi_by_n(records)
        .into_iter()
        .map(|r| (r.n, r.mean_arsi))
        .collect();
    let rising = by_n.windows(2).all(|w| w[1].1 > w[0].1);
    let mut falling = true;
    for n in [5usize, 9] {
        let series: Vec<f64> = aggregate_arsi_by_iteration(&greedy_lbn)
            .into_iter()
            .filter(|r| r.n == n)
            .map(|r| r.mean_arsi)
            .collect();
        if series.len() < 2 || !series.windows(2).all(|w| w[1] < w[0]) {
            falling = false;
        }
    }
    let d_pass = rising && falling;
    println!(
        "criterion 8d (input ARSI grows with n, falls over iterations): {} [by n: {:?}, \
         rising: {rising}; per-iteration decrease for n = 5 and 9: {falling}]",
        if d_pass { "PASS" } else { "FAIL" },
        by_n
            .iter()
            .map(|(n, m)| (*n, (m * 10000.0).round() / 10000.0))
            .collect::<Vec<_>>()
    );
    if !d_pass {
        failures.push("8d");
    }

    // 8e: input ARSI of every generated matrix within [0, 1].
    let mut e_pass = true;
    let mut failed_records = 0;
    for r in records {
        if r.is_failed() {
            failed_records += 1;
            e_pass = false;
        } else if !(0.0..=1.0).contains(&r.arsi_input) {
            e_pass = false;
        }
    }
    println!(
        "criterion 8e (input ARSI within [0, 1]): {} [{} records, {failed_records} failed]",
        if e_pass { "PASS" } else { "FAIL" },
        records.len()
    );
    if !e_pass {
        failures.push("8e");
    }

    let runtime_ok = *elapsed < Duration::from_secs(300);
    if !runtime_ok {
        failures.push("runtime");
    }
    report(
        8,
        "simulation trends at desk scale",
        failures.is_empty(),
        &format!(
            "failing parts: {}; run of {} records took {elapsed:.2?} (limit 300 s)",
            if failures.is_empty() { "none".to_string() } else { failures.join(", ") },
            records.len()
        ),
    );
}

fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let entry = entry.unwrap();
        out.insert(
            entry.file_name().to_string_lossy().into_owned(),
            std::fs::read(entry.path()).unwrap(),
        );
    }
    out
}

#[test]
fn c9_determinism() {
    let config = ExperimentConfig::desk_scale(DESK_SEED);
    let (records, _) = desk_run();

    let base = tempfile::tempdir().unwrap();
    let dir_default = base.path().join("default");
    write_experiment_outputs(&dir_default, &config, records).unwrap();

    let mut identical = true;
    let mut detail = String::new();
    let reference = dir_contents(&dir_default);
    for jobs in [1usize, 3] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .unwrap();
        let rerun = pool.install(|| run_experiment(&config)).unwrap();
        let dir = base.path().join(format!("jobs{jobs}"));
        write_experiment_outputs(&dir, &config, &rerun).unwrap();
        let contents = dir_contents(&dir);
        let same = contents == reference;
        identical &= same;
        detail.push_str(&format!(
            " jobs={jobs}: {} files, byte-identical: {same};",
            contents.len()
        ));
    }
    report(
        9,
        "byte-identical outputs across reruns and thread counts",
        identical,
        detail.trim(),
    );
}
