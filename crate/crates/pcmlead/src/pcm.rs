//! Pairwise-comparison matrices in additive (skew-symmetric) and
//! multiplicative (positive reciprocal) form, plus the elementary
//! operations defined on them: conversions, Frobenius geometry,
//! row-mean rankings, and Saaty's consistency index.

use crate::error::{PcmError, Result};

/// Smallest matrix dimension for which the tie-space construction is defined.
pub const MIN_N: usize = 3;
/// Default cap on matrix dimension; guards against accidental huge allocations.
pub const DEFAULT_MAX_N: usize = 64;
/// Absolute tolerance when validating skew-symmetry of raw input.
pub const SKEW_TOL: f64 = 1e-12;
/// Tolerance on m_ij * m_ji relative to 1 when validating reciprocity.
pub const RECIPROCITY_TOL: f64 = 1e-12;
/// Relative convergence tolerance for the principal-eigenvalue iteration.
pub const POWER_TOL: f64 = 1e-12;
/// Iteration limit for the principal-eigenvalue iteration.
pub const POWER_MAX_ITERATIONS: usize = 10_000;

fn check_dimensions(rows: &[Vec<f64>], cap: usize) -> Result<usize> {
    let n = rows.len();
    if n < MIN_N {
        return Err(PcmError::DimensionTooSmall { n, min: MIN_N });
    }
    if n > cap {
        return Err(PcmError::DimensionTooLarge { n, cap });
    }
    for (row, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(PcmError::NotSquare {
                row,
                len: r.len(),
                n,
            });
        }
    }
    for (i, r) in rows.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(PcmError::NonFiniteEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
        }
    }
    Ok(n)
}

/// Additive pairwise-comparison matrix: skew-symmetric, zero diagonal.
///
/// Entries are stored row-major. Skew-symmetry is exact in storage:
/// `get(j, i) == -get(i, j)` bit for bit.
#[derive(Debug, Clone, PartialEq)]
pub struct AdditivePcm {
    n: usize,
    entries: Vec<f64>,
}

impl AdditivePcm {
    /// Validates and symmetrizes raw rows into an additive PCM.
    ///
    /// Input must be square with n in `MIN_N..=DEFAULT_MAX_N`, all entries
    /// finite, and `|a_ij + a_ji| <= SKEW_TOL`. The stored matrix is the
    /// exact skew part `(a_ij - a_ji) / 2`, so downstream arithmetic can
    /// rely on exact negation across the diagonal.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows_with_cap(rows, DEFAULT_MAX_N)
    }

    /// Same as [`AdditivePcm::from_rows`] with an explicit dimension cap.
    pub fn from_rows_with_cap(rows: &[Vec<f64>], cap: usize) -> Result<Self> {
        let n = check_dimensions(rows, cap)?;
        for i in 0..n {
            for j in i..n {
                let sum = rows[i][j] + rows[j][i];
                if sum.abs() > SKEW_TOL {
                    return Err(PcmError::NotSkewSymmetric {
                        row: i,
                        col: j,
                        residual: sum,
                    });
                }
            }
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (rows[i][j] - rows[j][i]) / 2.0;
                entries[i * n + j] = v;
                entries[j * n + i] = -v;
            }
        }
        Ok(Self { n, entries })
    }

    /// Builds from a strict upper triangle given as `f(i, j)` for `i < j`.
    /// The lower triangle is the exact negation; the diagonal is zero.
    pub fn from_upper<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Result<Self> {
        if n < MIN_N {
            return Err(PcmError::DimensionTooSmall { n, min: MIN_N });
        }
        if n > DEFAULT_MAX_N {
            return Err(PcmError::DimensionTooLarge { n, cap: DEFAULT_MAX_N });
        }
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(PcmError::NonFiniteEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
                entries[i * n + j] = v;
                entries[j * n + i] = -v;
            }
        }
        Ok(Self { n, entries })
    }

    /// Internal constructor for results that are skew-symmetric by
    /// construction (projections, conjugations, linear combinations of
    /// stored matrices).
    pub(crate) fn from_parts_unchecked(n: usize, entries: Vec<f64>) -> Self {
        debug_assert_eq!(entries.len(), n * n);
        #[cfg(debug_assertions)]
        for i in 0..n {
            for j in i..n {
                debug_assert!(
                    entries[i * n + j] == -entries[j * n + i],
                    "internal matrix not exactly skew at ({i},{j})"
                );
            }
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.entries[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    pub fn row_sum(&self, i: usize) -> f64 {
        self.entries[i * self.n..(i + 1) * self.n].iter().sum()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Entrywise exponential, yielding the multiplicative form.
    pub fn to_multiplicative(&self) -> MultiplicativePcm {
        let n = self.n;
        let mut entries = vec![1.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    entries[i * n + j] = self.entries[i * n + j].exp();
                }
            }
        }
        MultiplicativePcm { n, entries }
    }
}

/// Multiplicative pairwise-comparison matrix: positive, reciprocal,
/// unit diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicativePcm {
    n: usize,
    entries: Vec<f64>,
}

impl MultiplicativePcm {
    /// Validates raw rows as a multiplicative PCM.
    ///
    /// Requires all entries positive and finite, `|m_ii - 1| <= RECIPROCITY_TOL`
    /// (the stored diagonal is snapped to exactly 1), and
    /// `|m_ij * m_ji - 1| <= RECIPROCITY_TOL`. Off-diagonal entries are stored
    /// as given.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::from_rows_with_cap(rows, DEFAULT_MAX_N)
    }

    /// Same as [`MultiplicativePcm::from_rows`] with an explicit dimension cap.
    pub fn from_rows_with_cap(rows: &[Vec<f64>], cap: usize) -> Result<Self> {
        let n = check_dimensions(rows, cap)?;
        for i in 0..n {
            for j in 0..n {
                if rows[i][j] <= 0.0 {
                    return Err(PcmError::NonPositiveEntry {
                        row: i,
                        col: j,
                        value: rows[i][j],
                    });
                }
            }
        }
        for i in 0..n {
            if (rows[i][i] - 1.0).abs() > RECIPROCITY_TOL {
                return Err(PcmError::DiagonalNotOne {
                    index: i,
                    value: rows[i][i],
                });
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let product = rows[i][j] * rows[j][i];
                if (product - 1.0).abs() > RECIPROCITY_TOL {
                    return Err(PcmError::NotReciprocal {
                        row: i,
                        col: j,
                        product,
                    });
                }
            }
        }
        let mut entries = vec![1.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    entries[i * n + j] = rows[i][j];
                }
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n)
            .map(|i| self.entries[i * self.n..(i + 1) * self.n].to_vec())
            .collect()
    }

    /// Entrywise logarithm with exact skew-symmetrization.
    ///
    /// `ln(m_ij)` and `ln(m_ji)` need not be exact negations in floating
    /// point, so the additive entry is taken as `(ln m_ij - ln m_ji) / 2`.
    pub fn to_additive(&self) -> AdditivePcm {
        let n = self.n;
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (self.entries[i * n + j].ln() - self.entries[j * n + i].ln()) / 2.0;
                entries[i * n + j] = v;
                entries[j * n + i] = -v;
            }
        }
        AdditivePcm { n, entries }
    }
}

/// Ranking vector: one weight per alternative, larger is better.
#[derive(Debug, Clone, PartialEq)]
pub struct PriorityVector {
    weights: Vec<f64>,
}

impl PriorityVector {
    pub fn new(weights: Vec<f64>) -> Self {
        Self { weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }
}

/// Permutation of `0..n`, stored as the image map `k -> map[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation {
    map: Vec<usize>,
}

impl Permutation {
    pub fn new(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut seen = vec![false; n];
        for &v in &map {
            if v >= n {
                return Err(PcmError::InvalidPermutation {
                    reason: format!("image {v} out of range for n = {n}"),
                });
            }
            if seen[v] {
                return Err(PcmError::InvalidPermutation {
                    reason: format!("image {v} repeated"),
                });
            }
            seen[v] = true;
        }
        Ok(Self { map })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
        }
    }

    pub fn transposition(n: usize, a: usize, b: usize) -> Result<Self> {
        if a >= n {
            return Err(PcmError::IndexOutOfRange { index: a, n });
        }
        if b >= n {
            return Err(PcmError::IndexOutOfRange { index: b, n });
        }
        let mut map: Vec<usize> = (0..n).collect();
        map.swap(a, b);
        Ok(Self { map })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    pub fn apply(&self, k: usize) -> usize {
        self.map[k]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.map.len()];
        for (k, &v) in self.map.iter().enumerate() {
            inv[v] = k;
        }
        Self { map: inv }
    }
}

fn check_same_n(a: &AdditivePcm, b: &AdditivePcm) -> Result<()> {
    if a.n != b.n {
        return Err(PcmError::DimensionMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(())
}

/// Frobenius inner product `sum_ij a_ij * b_ij`.
pub fn frobenius_inner(a: &AdditivePcm, b: &AdditivePcm) -> Result<f64> {
    check_same_n(a, b)?;
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| x * y)
        .sum())
}

/// Frobenius norm `sqrt(<A, A>)`.
pub fn frobenius_norm(a: &AdditivePcm) -> f64 {
    a.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Frobenius distance `||A - B||`.
pub fn frobenius_distance(a: &AdditivePcm, b: &AdditivePcm) -> Result<f64> {
    check_same_n(a, b)?;
    Ok(a.entries
        .iter()
        .zip(&b.entries)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt())
}

/// Row arithmetic means of the additive matrix; the canonical additive
/// ranking. Commutes with the entrywise log of the geometric-mean ranking.
pub fn additive_ranking(a: &AdditivePcm) -> PriorityVector {
    let n = a.n;
    PriorityVector::new((0..n).map(|i| a.row_sum(i) / n as f64).collect())
}

/// Row geometric means of the multiplicative matrix.
pub fn geometric_ranking(m: &MultiplicativePcm) -> PriorityVector {
    let n = m.n;
    PriorityVector::new(
        (0..n)
            .map(|i| {
                let log_mean: f64 = (0..n).map(|j| m.get(i, j).ln()).sum::<f64>() / n as f64;
                log_mean.exp()
            })
            .collect(),
    )
}

/// Index of the strictly largest weight; first index wins exact ties.
pub fn best_alternative(w: &PriorityVector) -> usize {
    let mut best = 0;
    for k in 1..w.len() {
        if w.get(k) > w.get(best) {
            best = k;
        }
    }
    best
}

/// Saaty consistency index `(lambda_max - n) / (n - 1)`.
///
/// The principal eigenvalue is found by power iteration from the all-ones
/// vector. For a positive matrix the Perron eigenvalue dominates, so the
/// iteration converges for every valid input; the iteration cap only guards
/// against pathological slow convergence.
pub fn consistency_index(m: &MultiplicativePcm) -> Result<f64> {
    let n = m.n;
    let mut x = vec![1.0; n];
    let mut lambda = f64::NAN;
    for _ in 0..POWER_MAX_ITERATIONS {
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += m.entries[i * n + j] * x[j];
            }
            y[i] = acc;
        }
        // Positive eigenvector, so the component sums are positive and the
        // ratio estimates lambda_max.
        let next = y.iter().sum::<f64>() / x.iter().sum::<f64>();
        let scale = y.iter().fold(0.0_f64, |m, &v| m.max(v));
        for v in &mut y {
            *v /= scale;
        }
        let converged = (next - lambda).abs() <= POWER_TOL * next.abs();
        x = y;
        lambda = next;
        if converged {
            return Ok((lambda - n as f64) / (n as f64 - 1.0));
        }
    }
    Err(PcmError::PowerIterationDiverged {
        max_iterations: POWER_MAX_ITERATIONS,
    })
}

/// Conjugates by a permutation: `result[k][l] = a[p(k)][p(l)]`.
///
/// Relabels alternative `p(k)` as `k`, so properties phrased about rows
/// `{0, 1}` of the result apply to rows `{p(0), p(1)}` of the input.
pub fn permute_conjugate(a: &AdditivePcm, p: &Permutation) -> Result<AdditivePcm> {
    let n = a.n;
    if p.n() != n {
        return Err(PcmError::DimensionMismatch {
            left: n,
            right: p.n(),
        });
    }
    let mut entries = vec![0.0; n * n];
    for k in 0..n {
        for l in 0..n {
            entries[k * n + l] = a.get(p.apply(k), p.apply(l));
        }
    }
    Ok(AdditivePcm::from_parts_unchecked(n, entries))
}
