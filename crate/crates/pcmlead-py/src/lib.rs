//! Python bindings for the pairwise-comparison toolkit.
//!
//! Exposes additive and multiplicative comparison matrices, the equalizing
//! projection, the leader-promotion algorithms, and the ranking-stability
//! indices. All indices are 0-based, matching Python convention.
//!
//! ```python
//! import pcmlead_py as pcm
//!
//! a = pcm.AdditivePcm([
//!     [0.0, 1.0, 2.0, 9.0],
//!     [-1.0, 0.0, 1.0, 8.0],
//!     [-2.0, -1.0, 0.0, 7.0],
//!     [-9.0, -8.0, -7.0, 0.0],
//! ])
//! trace = a.promote(3, algorithm="greedy")
//! print(trace.iterations(), trace.final_matrix().ranking())
//! ```

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use pcmlead::{Algorithm, PcmError, ScaleBound};

/// Invalid input maps to ValueError; numerical breakdowns inside the
/// library map to RuntimeError.
fn to_py_err(e: PcmError) -> PyErr {
    match e {
        PcmError::PowerIterationDiverged { .. }
        | PcmError::DependentBasis { .. }
        | PcmError::PromotionStalled { .. }
        | PcmError::Io(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// `None` means the bound of the multiplicative 1-9 scale, M = ln 9.
fn make_bound(scale_bound: Option<f64>) -> PyResult<ScaleBound> {
    match scale_bound {
        Some(m) => ScaleBound::new(m).map_err(to_py_err),
        None => Ok(ScaleBound::saaty()),
    }
}

fn parse_algorithm(name: &str) -> PyResult<Algorithm> {
    name.parse().map_err(to_py_err)
}

fn check_index(name: &str, index: usize, n: usize) -> PyResult<()> {
    if index >= n {
        return Err(PyValueError::new_err(format!(
            "{name} index {index} out of range for n = {n}"
        )));
    }
    Ok(())
}

/// Skew-symmetric pairwise-comparison matrix.
///
/// Entry `a[i][j]` says how strongly alternative `i` is preferred to
/// alternative `j` on an additive scale; `a[j][i]` is its negation.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
pub struct AdditivePcm {
    inner: pcmlead::AdditivePcm,
}

impl AdditivePcm {
    fn bound_for(&self, scale_bound: Option<f64>, covering: bool) -> PyResult<ScaleBound> {
        let bound = make_bound(scale_bound)?;
        Ok(if covering {
            bound.covering(&self.inner)
        } else {
            bound
        })
    }
}

#[pymethods]
impl AdditivePcm {
    /// Build from a full square list of rows.
    ///
    /// Args:
    ///     rows: n lists of n floats, skew-symmetric with a zero diagonal.
    ///
    /// Raises:
    ///     ValueError: If the rows are not square, contain non-finite
    ///         entries, or violate skew-symmetry.
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: pcmlead::AdditivePcm::from_rows(&rows).map_err(to_py_err)?,
        })
    }

    /// Number of alternatives.
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// The matrix as a list of rows.
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    /// Single entry a_ij.
    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.n();
        check_index("row", i, n)?;
        check_index("column", j, n)?;
        Ok(self.inner.get(i, j))
    }

    /// Largest absolute entry.
    fn max_abs_entry(&self) -> f64 {
        self.inner.max_abs_entry()
    }

    /// Row arithmetic means; the canonical additive priority vector.
    fn ranking(&self) -> Vec<f64> {
        pcmlead::additive_ranking(&self.inner).weights().to_vec()
    }

    /// Index of the highest-weight alternative; first index wins exact ties.
    fn best_alternative(&self) -> usize {
        pcmlead::best_alternative(&pcmlead::additive_ranking(&self.inner))
    }

    /// Equivalent multiplicative matrix (entrywise exp).
    fn to_multiplicative(&self) -> MultiplicativePcm {
        MultiplicativePcm {
            inner: self.inner.to_multiplicative(),
        }
    }

    /// Consistency index of the multiplicative equivalent,
    /// `(lambda_max - n) / (n - 1)`.
    fn consistency_index(&self) -> PyResult<f64> {
        pcmlead::consistency_index(&self.inner.to_multiplicative()).map_err(to_py_err)
    }

    /// Frobenius distance to another matrix of the same dimension.
    fn frobenius_distance(&self, other: &AdditivePcm) -> PyResult<f64> {
        pcmlead::frobenius_distance(&self.inner, &other.inner).map_err(to_py_err)
    }

    /// Nearest matrix (in Frobenius distance) in which alternatives `i` and
    /// `j` have equal ranking weights.
    ///
    /// The projection ties the pair at the average of their weights and
    /// leaves every other alternative's weight unchanged. Pair order does
    /// not matter.
    ///
    /// Raises:
    ///     ValueError: If the indices coincide or fall outside the matrix.
    fn eq(&self, i: usize, j: usize) -> PyResult<AdditivePcm> {
        let (lo, hi) = if i < j { (i, j) } else { (j, i) };
        let basis = pcmlead::cached_orthogonal_basis(self.inner.n()).map_err(to_py_err)?;
        Ok(Self {
            inner: pcmlead::eq(&self.inner, lo, hi, &basis).map_err(to_py_err)?,
        })
    }

    /// Promote `target` to (at least a tie for) the top of the ranking by
    /// repeated equalizations.
    ///
    /// Args:
    ///     target: Alternative to promote (0-based).
    ///     algorithm: "greedy" equates the target with the current leader
    ///         each step; "bubble" with the alternative directly ahead of it.
    ///     scale_bound: Bound M for the per-step stability values; defaults
    ///         to ln 9 and widens automatically to cover off-scale entries.
    ///
    /// Returns:
    ///     PromotionTrace holding the final matrix and one record per step.
    ///
    /// Raises:
    ///     ValueError: If the target index or algorithm name is invalid.
    ///     RuntimeError: If the promotion fails to terminate.
    #[pyo3(signature = (target, algorithm = "greedy", scale_bound = None))]
    fn promote(
        &self,
        target: usize,
        algorithm: &str,
        scale_bound: Option<f64>,
    ) -> PyResult<PromotionTrace> {
        let algorithm = parse_algorithm(algorithm)?;
        let bound = make_bound(scale_bound)?;
        let basis = pcmlead::cached_orthogonal_basis(self.inner.n()).map_err(to_py_err)?;
        let (final_matrix, trace) =
            pcmlead::promote(&self.inner, target, algorithm, &basis, &bound).map_err(to_py_err)?;
        Ok(PromotionTrace::from_parts(final_matrix, trace))
    }

    /// Break a tie at the top in favor of `p` by adding `delta` to its
    /// comparison with `q`.
    ///
    /// Raises:
    ///     ValueError: If `p` and `q` are not tied at the top within the
    ///         ranking tolerance, or `delta` is negative.
    fn nudge_leader(&self, p: usize, q: usize, delta: f64) -> PyResult<AdditivePcm> {
        Ok(Self {
            inner: pcmlead::nudge_leader(&self.inner, p, q, delta).map_err(to_py_err)?,
        })
    }

    /// Stability of the pair (i, j): the ranking gap relative to the largest
    /// single-entry change the scale [-M, M] allows. Ranges over [0, n-1].
    ///
    /// Args:
    ///     scale_bound: Bound M; defaults to ln 9.
    ///     covering: Widen the bound to the largest absolute entry instead
    ///         of rejecting off-scale matrices.
    ///
    /// Raises:
    ///     ValueError: If an entry lies outside the bound and `covering`
    ///         is off.
    #[pyo3(signature = (i, j, scale_bound = None, covering = false))]
    fn rsi(&self, i: usize, j: usize, scale_bound: Option<f64>, covering: bool) -> PyResult<f64> {
        let bound = self.bound_for(scale_bound, covering)?;
        pcmlead::rsi(&self.inner, i, j, &bound).map_err(to_py_err)
    }

    /// Smallest pairwise stability over all pairs: the cheapest tie anywhere
    /// in the ranking.
    #[pyo3(signature = (scale_bound = None, covering = false))]
    fn rsi_min(&self, scale_bound: Option<f64>, covering: bool) -> PyResult<f64> {
        let bound = self.bound_for(scale_bound, covering)?;
        pcmlead::rsi_min(&self.inner, &bound).map_err(to_py_err)
    }

    /// Aggregate stability: pairwise values averaged over all pairs and
    /// normalized into [0, 1].
    #[pyo3(signature = (scale_bound = None, covering = false))]
    fn arsi(&self, scale_bound: Option<f64>, covering: bool) -> PyResult<f64> {
        let bound = self.bound_for(scale_bound, covering)?;
        pcmlead::arsi(&self.inner, &bound).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!("AdditivePcm(n={})", self.inner.n())
    }
}

/// Positive reciprocal pairwise-comparison matrix.
///
/// Entry `m[i][j]` says how many times alternative `i` is preferred to
/// alternative `j`; `m[j][i]` is its reciprocal and the diagonal is 1.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
pub struct MultiplicativePcm {
    inner: pcmlead::MultiplicativePcm,
}

#[pymethods]
impl MultiplicativePcm {
    /// Build from a full square list of rows.
    ///
    /// Raises:
    ///     ValueError: If the rows are not square, contain non-positive
    ///         entries, or violate reciprocity.
    #[new]
    fn new(rows: Vec<Vec<f64>>) -> PyResult<Self> {
        Ok(Self {
            inner: pcmlead::MultiplicativePcm::from_rows(&rows).map_err(to_py_err)?,
        })
    }

    /// Number of alternatives.
    fn n(&self) -> usize {
        self.inner.n()
    }

    /// The matrix as a list of rows.
    fn rows(&self) -> Vec<Vec<f64>> {
        self.inner.to_rows()
    }

    /// Single entry m_ij.
    fn get(&self, i: usize, j: usize) -> PyResult<f64> {
        let n = self.inner.n();
        check_index("row", i, n)?;
        check_index("column", j, n)?;
        Ok(self.inner.get(i, j))
    }

    /// Equivalent additive matrix (entrywise ln).
    fn to_additive(&self) -> AdditivePcm {
        AdditivePcm {
            inner: self.inner.to_additive(),
        }
    }

    /// Row geometric means; the canonical multiplicative priority vector.
    fn ranking(&self) -> Vec<f64> {
        pcmlead::geometric_ranking(&self.inner).weights().to_vec()
    }

    /// Consistency index `(lambda_max - n) / (n - 1)`.
    fn consistency_index(&self) -> PyResult<f64> {
        pcmlead::consistency_index(&self.inner).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!("MultiplicativePcm(n={})", self.inner.n())
    }
}

/// One equalization step of a promotion run.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
pub struct PromotionStep {
    equated: usize,
    matrix: pcmlead::AdditivePcm,
    ranking: Vec<f64>,
    frobenius_from_input: f64,
    arsi: f64,
}

#[pymethods]
impl PromotionStep {
    /// Alternative the target was equated with in this step.
    fn equated(&self) -> usize {
        self.equated
    }

    /// Matrix after this step.
    fn matrix(&self) -> AdditivePcm {
        AdditivePcm {
            inner: self.matrix.clone(),
        }
    }

    /// Ranking after this step.
    fn ranking(&self) -> Vec<f64> {
        self.ranking.clone()
    }

    /// Frobenius distance from the original input matrix.
    fn frobenius_from_input(&self) -> f64 {
        self.frobenius_from_input
    }

    /// Aggregate stability after this step.
    fn arsi(&self) -> f64 {
        self.arsi
    }

    fn __repr__(&self) -> String {
        format!(
            "PromotionStep(equated={}, frobenius_from_input={:.6})",
            self.equated, self.frobenius_from_input
        )
    }
}

/// Result of a promotion run: the final matrix plus per-step records.
#[pyclass]
pub struct PromotionTrace {
    algorithm: Algorithm,
    target: usize,
    final_matrix: pcmlead::AdditivePcm,
    steps: Vec<PromotionStep>,
}

impl PromotionTrace {
    fn from_parts(final_matrix: pcmlead::AdditivePcm, trace: pcmlead::PromotionTrace) -> Self {
        Self {
            algorithm: trace.algorithm,
            target: trace.target,
            final_matrix,
            steps: trace
                .steps
                .into_iter()
                .map(|s| PromotionStep {
                    equated: s.equated,
                    matrix: s.matrix_after,
                    ranking: s.ranking.weights().to_vec(),
                    frobenius_from_input: s.frobenius_from_input,
                    arsi: s.arsi,
                })
                .collect(),
        }
    }
}

#[pymethods]
impl PromotionTrace {
    /// Name of the promotion rule that produced this trace.
    fn algorithm(&self) -> &'static str {
        self.algorithm.as_str()
    }

    /// The promoted alternative.
    fn target(&self) -> usize {
        self.target
    }

    /// Number of equalization steps taken.
    fn iterations(&self) -> usize {
        self.steps.len()
    }

    /// Matrix after the last step (the input matrix if no steps were
    /// needed).
    fn final_matrix(&self) -> AdditivePcm {
        AdditivePcm {
            inner: self.final_matrix.clone(),
        }
    }

    /// Per-step records, in order.
    fn steps(&self) -> Vec<PromotionStep> {
        self.steps.clone()
    }

    fn __repr__(&self) -> String {
        format!(
            "PromotionTrace(algorithm={:?}, target={}, iterations={})",
            self.algorithm.as_str(),
            self.target,
            self.steps.len()
        )
    }
}

#[pymodule]
fn pcmlead_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", "0.1.0")?;
    m.add("SAATY_BOUND", ScaleBound::saaty().value())?;
    m.add_class::<AdditivePcm>()?;
    m.add_class::<MultiplicativePcm>()?;
    m.add_class::<PromotionStep>()?;
    m.add_class::<PromotionTrace>()?;
    Ok(())
}
