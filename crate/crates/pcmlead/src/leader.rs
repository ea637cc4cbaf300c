//! Promotion of a chosen alternative to (shared) first place by repeated
//! equalization, plus the final nudge that breaks the resulting tie.
//!
//! Both algorithms repeatedly apply [`eq`] between the target `p` and some
//! alternative ranked above it, which replaces the two weights by their mean
//! and leaves every other weight unchanged. They differ only in the choice
//! of partner per step:
//!
//! * greedy: the current top alternative, shrinking the gap fastest;
//! * bubble: the alternative directly ahead of `p`, so `p` climbs one rung
//!   at a time and the relative order of the others is preserved.

use serde::{Deserialize, Serialize};

use crate::error::{PcmError, Result};
use crate::pcm::{
    additive_ranking, best_alternative, frobenius_distance, AdditivePcm, PriorityVector,
};
use crate::projection::{eq, OrthogonalTieBasis};
use crate::stability::{arsi, ScaleBound};

/// Two weights within this tolerance count as tied.
pub const WEIGHT_TOL: f64 = 1e-9;

/// Partner-selection rule for promotion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Greedy,
    Bubble,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Greedy => "greedy",
            Algorithm::Bubble => "bubble",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = PcmError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Algorithm::Greedy),
            "bubble" => Ok(Algorithm::Bubble),
            other => Err(PcmError::Parse {
                what: "algorithm".into(),
                detail: format!("expected greedy or bubble, got {other:?}"),
            }),
        }
    }
}

/// One equalization step of a promotion run.
#[derive(Debug, Clone)]
pub struct PromotionStep {
    /// The partner equated with the target at this step.
    pub equated: usize,
    pub matrix_after: AdditivePcm,
    pub ranking: PriorityVector,
    /// Frobenius distance from the run's input matrix.
    pub frobenius_from_input: f64,
    /// Aggregate stability index after the step. The scale bound is widened
    /// to cover the step's entries when a projection pushes one past it.
    pub arsi: f64,
}

/// Full record of a promotion run.
#[derive(Debug, Clone)]
pub struct PromotionTrace {
    pub algorithm: Algorithm,
    pub target: usize,
    pub steps: Vec<PromotionStep>,
}

impl PromotionTrace {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }
}

fn check_target(a: &AdditivePcm, target: usize) -> Result<()> {
    if target >= a.n() {
        return Err(PcmError::IndexOutOfRange {
            index: target,
            n: a.n(),
        });
    }
    Ok(())
}

/// Partner for the greedy rule: the current best alternative.
fn pick_greedy(w: &PriorityVector, _target: usize) -> usize {
    best_alternative(w)
}

/// Partner for the bubble rule: the lowest-ranked alternative still strictly
/// ahead of the target; near-equal weights resolve to the smallest index.
fn pick_bubble(w: &PriorityVector, target: usize) -> usize {
    let wt = w.get(target);
    let mut best: Option<usize> = None;
    for k in 0..w.len() {
        if k == target || w.get(k) <= wt + WEIGHT_TOL {
            continue;
        }
        match best {
            Some(b) if w.get(k) >= w.get(b) - WEIGHT_TOL => {}
            _ => best = Some(k),
        }
    }
    best.expect("caller checked a strictly better alternative exists")
}

fn promote_with(
    a: &AdditivePcm,
    target: usize,
    basis: &OrthogonalTieBasis,
    bound: &ScaleBound,
    algorithm: Algorithm,
    pick: fn(&PriorityVector, usize) -> usize,
) -> Result<(AdditivePcm, PromotionTrace)> {
    check_target(a, target)?;
    let n = a.n();
    let mut current = a.clone();
    let mut steps: Vec<PromotionStep> = Vec::new();
    loop {
        let w = additive_ranking(&current);
        if w.get(target) >= w.max_weight() - WEIGHT_TOL {
            break;
        }
        // Each step strictly shrinks the set of alternatives ahead of the
        // target, so more than n - 1 steps signals a numerical breakdown.
        if steps.len() >= n {
            return Err(PcmError::PromotionStalled {
                target,
                steps: steps.len(),
            });
        }
        let q = pick(&w, target);
        debug_assert_ne!(q, target);
        let (lo, hi) = if target < q { (target, q) } else { (q, target) };
        current = eq(&current, lo, hi, basis)?;
        steps.push(PromotionStep {
            equated: q,
            matrix_after: current.clone(),
            ranking: additive_ranking(&current),
            frobenius_from_input: frobenius_distance(a, &current)?,
            arsi: arsi(&current, &bound.covering(&current))?,
        });
    }
    Ok((
        current,
        PromotionTrace {
            algorithm,
            target,
            steps,
        },
    ))
}

/// Promotes `target` by repeatedly equalizing it with the current leader.
pub fn greedy_promote(
    a: &AdditivePcm,
    target: usize,
    basis: &OrthogonalTieBasis,
    bound: &ScaleBound,
) -> Result<(AdditivePcm, PromotionTrace)> {
    promote_with(a, target, basis, bound, Algorithm::Greedy, pick_greedy)
}

/// Promotes `target` by repeatedly equalizing it with the alternative
/// directly ahead of it.
pub fn bubble_promote(
    a: &AdditivePcm,
    target: usize,
    basis: &OrthogonalTieBasis,
    bound: &ScaleBound,
) -> Result<(AdditivePcm, PromotionTrace)> {
    promote_with(a, target, basis, bound, Algorithm::Bubble, pick_bubble)
}

/// Dispatches on the algorithm choice.
pub fn promote(
    a: &AdditivePcm,
    target: usize,
    algorithm: Algorithm,
    basis: &OrthogonalTieBasis,
    bound: &ScaleBound,
) -> Result<(AdditivePcm, PromotionTrace)> {
    match algorithm {
        Algorithm::Greedy => greedy_promote(a, target, basis, bound),
        Algorithm::Bubble => bubble_promote(a, target, basis, bound),
    }
}

/// Breaks a tie at the top in favor of `p` by adding `delta` to the
/// comparison `a_pq` (and subtracting it from `a_qp`).
///
/// Requires `p` and `q` to be tied at the top of the ranking within
/// [`WEIGHT_TOL`] and `delta >= 0`. The caller chooses `delta` small enough
/// not to disturb the rest of the ranking; `delta = 0` returns the matrix
/// unchanged.
pub fn nudge_leader(a: &AdditivePcm, p: usize, q: usize, delta: f64) -> Result<AdditivePcm> {
    let n = a.n();
    check_target(a, p)?;
    check_target(a, q)?;
    if p == q {
        return Err(PcmError::InvalidPair { i: p, j: q, n });
    }
    if delta.is_nan() || delta < 0.0 {
        return Err(PcmError::NegativeDelta { delta });
    }
    let w = additive_ranking(a);
    let top = w.max_weight();
    if (w.get(p) - top).abs() > WEIGHT_TOL || (w.get(q) - top).abs() > WEIGHT_TOL {
        return Err(PcmError::NotTiedAtTop { p, q });
    }
    let mut entries = a.entries().to_vec();
    let v = a.get(p, q) + delta;
    entries[p * n + q] = v;
    entries[q * n + p] = -v;
    Ok(AdditivePcm::from_parts_unchecked(n, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::projection::cached_orthogonal_basis;
    use rand_chacha::rand_core::{RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit(rng: &mut ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 * (1.0 / 9007199254740992.0)
    }

    fn random_skew(n: usize, rng: &mut ChaCha8Rng) -> AdditivePcm {
        let scale = 9.0_f64.ln();
        AdditivePcm::from_upper(n, |_, _| (2.0 * unit(rng) - 1.0) * scale).unwrap()
    }

    fn example() -> AdditivePcm {
        AdditivePcm::from_rows(&[
            vec![0.0, 1.0, 2.0, 9.0],
            vec![-1.0, 0.0, 1.0, 8.0],
            vec![-2.0, -1.0, 0.0, 7.0],
            vec![-9.0, -8.0, -7.0, 0.0],
        ])
        .unwrap()
    }

    fn assert_matrix_close(actual: &AdditivePcm, expected: &[[f64; 4]; 4], tol: f64) {
        for i in 0..4 {
            for j in 0..4 {
                assert!(
                    (actual.get(i, j) - expected[i][j]).abs() <= tol,
                    "({i},{j}): {} vs {}",
                    actual.get(i, j),
                    expected[i][j]
                );
            }
        }
    }

    fn assert_weights_close(actual: &PriorityVector, expected: &[f64], tol: f64) {
        for (i, &e) in expected.iter().enumerate() {
            assert!(
                (actual.get(i) - e).abs() <= tol,
                "w[{i}] = {} vs {e}",
                actual.get(i)
            );
        }
    }

    #[test]
    fn greedy_trace_matches_hand_computation() {
        let a = example();
        let basis = cached_orthogonal_basis(4).unwrap();
        let bound = ScaleBound::new(9.0).unwrap();
        let (final_matrix, trace) = greedy_promote(&a, 3, &basis, &bound).unwrap();
        assert_eq!(trace.iterations(), 3);
        let partners: Vec<usize> = trace.steps.iter().map(|s| s.equated).collect();
        assert_eq!(partners, vec![0, 1, 2]);

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
        assert_matrix_close(&trace.steps[0].matrix_after, &step1, 1e-9);
        assert_matrix_close(&trace.steps[1].matrix_after, &step2, 1e-9);
        assert_matrix_close(&trace.steps[2].matrix_after, &step3, 1e-9);
        assert_matrix_close(&final_matrix, &step3, 1e-9);

        assert_weights_close(&trace.steps[0].ranking, &[-1.5, 2.0, 1.0, -1.5], 1e-9);
        assert_weights_close(&trace.steps[1].ranking, &[-1.5, 0.25, 1.0, 0.25], 1e-9);
        assert_weights_close(&trace.steps[2].ranking, &[-1.5, 0.25, 0.625, 0.625], 1e-9);

        // Distances from the input grow monotonically along this run.
        let d: Vec<f64> = trace.steps.iter().map(|s| s.frobenius_from_input).collect();
        assert!(d[0] > 0.0 && d[0] < d[1] && d[1] < d[2], "distances {d:?}");
    }

    #[test]
    fn bubble_trace_matches_hand_computation() {
        let a = example();
        let basis = cached_orthogonal_basis(4).unwrap();
        let bound = ScaleBound::new(9.0).unwrap();
        let (final_matrix, trace) = bubble_promote(&a, 3, &basis, &bound).unwrap();
        assert_eq!(trace.iterations(), 3);
        let partners: Vec<usize> = trace.steps.iter().map(|s| s.equated).collect();
        // Climbs one rung at a time: first the alternative directly ahead.
        assert_eq!(partners, vec![2, 1, 0]);

        let final_expected = [
            [0.0, 1.625, 3.875, 0.0],
            [-1.625, 0.0, 2.25, -1.625],
            [-3.875, -2.25, 0.0, -3.875],
            [0.0, 1.625, 3.875, 0.0],
        ];
        assert_matrix_close(&final_matrix, &final_expected, 1e-9);
        assert_weights_close(
            &trace.steps[2].ranking,
            &[1.375, -0.25, -2.5, 1.375],
            1e-9,
        );
    }

    #[test]
    fn promotion_is_noop_for_already_leading_target() {
        let a = example();
        let basis = cached_orthogonal_basis(4).unwrap();
        let bound = ScaleBound::new(9.0).unwrap();
        let (out, trace) = greedy_promote(&a, 0, &basis, &bound).unwrap();
        assert_eq!(trace.iterations(), 0);
        assert_eq!(out, a);
    }

    #[test]
    fn promotion_terminates_within_n_minus_1_steps() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let bound = ScaleBound::saaty();
        for n in 3..=9 {
            let basis = cached_orthogonal_basis(n).unwrap();
            for _ in 0..20 {
                let a = random_skew(n, &mut rng);
                for target in [0, n / 2, n - 1] {
                    for algorithm in [Algorithm::Greedy, Algorithm::Bubble] {
                        let (out, trace) =
                            promote(&a, target, algorithm, &basis, &bound).unwrap();
                        assert!(
                            trace.iterations() < n,
                            "n = {n}, {algorithm}: {} steps",
                            trace.iterations()
                        );
                        let w = additive_ranking(&out);
                        assert!(
                            w.get(target) >= w.max_weight() - WEIGHT_TOL,
                            "target not at the top"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn bubble_iterations_equal_initial_lead_count() {
        // Generic inputs have no tied weights, so bubble takes exactly one
        // step per alternative initially ahead of the target.
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let bound = ScaleBound::saaty();
        for n in [4, 6, 9] {
            let basis = cached_orthogonal_basis(n).unwrap();
            for _ in 0..20 {
                let a = random_skew(n, &mut rng);
                let w = additive_ranking(&a);
                for target in 0..n {
                    let ahead = (0..n)
                        .filter(|&k| k != target && w.get(k) > w.get(target) + WEIGHT_TOL)
                        .count();
                    let (_, trace) = bubble_promote(&a, target, &basis, &bound).unwrap();
                    assert_eq!(trace.iterations(), ahead, "n = {n}, target {target}");
                }
            }
        }
    }

    #[test]
    fn bubble_preserves_spectator_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let bound = ScaleBound::saaty();
        for n in [5, 8] {
            let basis = cached_orthogonal_basis(n).unwrap();
            for _ in 0..20 {
                let a = random_skew(n, &mut rng);
                let before = additive_ranking(&a);
                let target = (best_alternative(&before) + 1) % n;
                let (out, _) = bubble_promote(&a, target, &basis, &bound).unwrap();
                let after = additive_ranking(&out);
                for k in 0..n {
                    for l in 0..n {
                        if k == target || l == target || k == l {
                            continue;
                        }
                        if before.get(k) > before.get(l) + 1e-6 {
                            assert!(
                                after.get(k) >= after.get(l) - WEIGHT_TOL,
                                "n = {n}: order of {k} and {l} flipped"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn nudge_matches_hand_computation() {
        let a = example();
        let basis = cached_orthogonal_basis(4).unwrap();
        let bound = ScaleBound::new(9.0).unwrap();
        let (promoted, _) = greedy_promote(&a, 3, &basis, &bound).unwrap();
        // Rows 2 and 3 tie at 0.625; favor row 3.
        let nudged = nudge_leader(&promoted, 3, 2, 0.1).unwrap();
        let w = additive_ranking(&nudged);
        assert_weights_close(&w, &[-1.5, 0.25, 0.6, 0.65], 1e-9);
        assert_eq!(best_alternative(&w), 3);
        // Comparison moved by exactly delta, mirror exactly negated.
        assert!((nudged.get(3, 2) - (promoted.get(3, 2) + 0.1)).abs() <= 1e-15);
        assert_eq!(nudged.get(3, 2).to_bits(), (-nudged.get(2, 3)).to_bits());
    }

    #[test]
    fn nudge_validates_inputs() {
        let a = example();
        // Top is unique, so no pair ties there.
        assert!(matches!(
            nudge_leader(&a, 0, 1, 0.1),
            Err(PcmError::NotTiedAtTop { .. })
        ));
        let basis = cached_orthogonal_basis(4).unwrap();
        let bound = ScaleBound::new(9.0).unwrap();
        let (promoted, _) = greedy_promote(&a, 3, &basis, &bound).unwrap();
        assert!(matches!(
            nudge_leader(&promoted, 3, 2, -0.5),
            Err(PcmError::NegativeDelta { .. })
        ));
        assert!(matches!(
            nudge_leader(&promoted, 3, 3, 0.1),
            Err(PcmError::InvalidPair { .. })
        ));
        assert!(matches!(
            nudge_leader(&promoted, 3, 7, 0.1),
            Err(PcmError::IndexOutOfRange { .. })
        ));
        // Tied pair but neither is at the top.
        let zeroish = AdditivePcm::from_rows(&[
            vec![0.0, 5.0, 5.0, 5.0],
            vec![-5.0, 0.0, 1.0, -1.0],
            vec![-5.0, -1.0, 0.0, 0.0],
            vec![-5.0, 1.0, 0.0, 0.0],
        ])
        .unwrap();
        assert!(matches!(
            nudge_leader(&zeroish, 2, 3, 0.1),
            Err(PcmError::NotTiedAtTop { .. })
        ));
    }

    #[test]
    fn zero_delta_nudge_is_identity() {
        let a = example();
        let basis = cached_orthogonal_basis(4).unwrap();
        let bound = ScaleBound::new(9.0).unwrap();
        let (promoted, _) = greedy_promote(&a, 3, &basis, &bound).unwrap();
        let nudged = nudge_leader(&promoted, 3, 2, 0.0).unwrap();
        assert_eq!(nudged, promoted);
    }

    #[test]
    fn algorithm_round_trips_through_strings() {
        for alg in [Algorithm::Greedy, Algorithm::Bubble] {
            assert_eq!(alg.to_string().parse::<Algorithm>().unwrap(), alg);
        }
        assert!("sorted".parse::<Algorithm>().is_err());
    }
}
