//! The tie subspace and the equalizing projection.
//!
//! For an additive PCM, "alternatives 1 and 2 are tied" means row 0 and
//! row 1 have equal sums (0-based rows; rankings are row means). The set of
//! skew-symmetric matrices with that property is a linear subspace of
//! dimension (n^2 - n - 2) / 2. This module builds an explicit integer basis
//! of the subspace, orthogonalizes it, and projects onto it, which yields the
//! nearest matrix (in Frobenius distance) in which the two alternatives tie.
//! [`eq`] extends the projection to an arbitrary pair via relabelling.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{PcmError, Result};
use crate::pcm::{
    additive_ranking, frobenius_inner, permute_conjugate, AdditivePcm, Permutation, MIN_N,
};

/// Squared-norm floor below which Gram-Schmidt reports a dependent vector.
pub const DEPENDENCE_TOL: f64 = 1e-12;

/// Dimension of the tie subspace inside the skew-symmetric matrices.
pub fn tie_space_dimension(n: usize) -> usize {
    (n * n - n - 2) / 2
}

fn skew_from_pairs(n: usize, pairs: &[(usize, usize, f64)]) -> AdditivePcm {
    let mut entries = vec![0.0; n * n];
    for &(i, j, v) in pairs {
        debug_assert!(i < j);
        entries[i * n + j] = v;
        entries[j * n + i] = -v;
    }
    AdditivePcm::from_parts_unchecked(n, entries)
}

/// Integer spanning basis of the tie subspace for rows {0, 1}.
///
/// Element order is fixed: the `C` family in lexicographic `(q, r)` order,
/// then `E`, then `F` for `p = 2..n-1`, then `G` for `p = 2..n-2`
/// (0-based row indices). Every member has row-0 sum equal to row-1 sum,
/// exactly, by integer construction.
#[derive(Debug, Clone)]
pub struct TieBasis {
    n: usize,
    vectors: Vec<AdditivePcm>,
}

impl TieBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, k: usize) -> &AdditivePcm {
        &self.vectors[k]
    }

    pub fn vectors(&self) -> &[AdditivePcm] {
        &self.vectors
    }
}

/// Builds the spanning basis of the tie subspace for rows {0, 1}.
pub fn build_tie_basis(n: usize) -> Result<TieBasis> {
    if n < MIN_N {
        return Err(PcmError::DimensionTooSmall { n, min: MIN_N });
    }
    let last = n - 1;
    let mut vectors = Vec::with_capacity(tie_space_dimension(n));
    // C[q][r]: a lone comparison between two alternatives outside {0, 1}
    // touches neither row sum.
    for q in 2..n {
        for r in (q + 1)..n {
            vectors.push(skew_from_pairs(n, &[(q, r, 1.0)]));
        }
    }
    // E: the (0,1) comparison shifts the two row sums oppositely; the double
    // weight on (1, last) restores the balance.
    vectors.push(skew_from_pairs(n, &[(0, 1, 1.0), (1, last, 2.0)]));
    // F[p]: equal contributions to row 0 (via p) and row 1 (via last).
    for p in 2..n {
        vectors.push(skew_from_pairs(n, &[(0, p, 1.0), (1, last, 1.0)]));
    }
    // G[p]: row 1 gains via p and loses via last; row 0 is untouched.
    for p in 2..(n - 1) {
        vectors.push(skew_from_pairs(n, &[(1, p, 1.0), (1, last, -1.0)]));
    }
    debug_assert_eq!(vectors.len(), tie_space_dimension(n));
    Ok(TieBasis { n, vectors })
}

/// Orthogonal (not normalized) basis of the tie subspace, with cached
/// squared norms.
#[derive(Debug, Clone)]
pub struct OrthogonalTieBasis {
    n: usize,
    vectors: Vec<AdditivePcm>,
    squared_norms: Vec<f64>,
}

impl OrthogonalTieBasis {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vector(&self, k: usize) -> &AdditivePcm {
        &self.vectors[k]
    }

    pub fn squared_norm(&self, k: usize) -> f64 {
        self.squared_norms[k]
    }

    pub fn vectors(&self) -> &[AdditivePcm] {
        &self.vectors
    }
}

/// Classical Gram-Schmidt without normalization.
///
/// `H_k = B_k - sum_{l<k} (<B_k, H_l> / <H_l, H_l>) H_l`. Norms are kept
/// un-normalized so the orthogonal vectors retain small rational entries.
pub fn gram_schmidt(basis: &TieBasis) -> Result<OrthogonalTieBasis> {
    let n = basis.n;
    let mut vectors: Vec<AdditivePcm> = Vec::with_capacity(basis.len());
    let mut squared_norms: Vec<f64> = Vec::with_capacity(basis.len());
    for (k, b) in basis.vectors.iter().enumerate() {
        let mut acc = b.entries().to_vec();
        for l in 0..k {
            let coef = frobenius_inner(b, &vectors[l])? / squared_norms[l];
            for (a, h) in acc.iter_mut().zip(vectors[l].entries()) {
                *a -= coef * h;
            }
        }
        let h = AdditivePcm::from_parts_unchecked(n, acc);
        let sq = frobenius_inner(&h, &h)?;
        if sq <= DEPENDENCE_TOL {
            return Err(PcmError::DependentBasis {
                index: k,
                squared_norm: sq,
            });
        }
        vectors.push(h);
        squared_norms.push(sq);
    }
    Ok(OrthogonalTieBasis {
        n,
        vectors,
        squared_norms,
    })
}

/// Orthogonal projection onto the tie subspace for rows {0, 1}:
/// `A' = sum_k (<A, H_k> / <H_k, H_k>) H_k`.
pub fn project_tie_12(a: &AdditivePcm, basis: &OrthogonalTieBasis) -> Result<AdditivePcm> {
    if a.n() != basis.n {
        return Err(PcmError::DimensionMismatch {
            left: a.n(),
            right: basis.n,
        });
    }
    let n = a.n();
    let mut acc = vec![0.0; n * n];
    for (h, &sq) in basis.vectors.iter().zip(&basis.squared_norms) {
        let eps = frobenius_inner(a, h)? / sq;
        for (v, hv) in acc.iter_mut().zip(h.entries()) {
            *v += eps * hv;
        }
    }
    Ok(AdditivePcm::from_parts_unchecked(n, acc))
}

/// Closed form of the same projection, used as an independent oracle.
///
/// The tie subspace is the kernel, within the skew-symmetric matrices, of
/// `f(A) = rowsum_0(A) - rowsum_1(A)`. Its Riesz representer is the skew
/// matrix R with `r_01 = 1`, `r_0l = 1/2`, `r_1l = -1/2` for `l >= 2`;
/// `<R, R> = n`, so the projection is `A - (f(A) / n) R`.
pub fn closed_form_projection(a: &AdditivePcm) -> AdditivePcm {
    let n = a.n();
    let c = (a.row_sum(0) - a.row_sum(1)) / n as f64;
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let r = if i == 0 && j == 1 {
                1.0
            } else if i == 0 {
                0.5
            } else if i == 1 {
                -0.5
            } else {
                0.0
            };
            let v = a.get(i, j) - c * r;
            entries[i * n + j] = v;
            entries[j * n + i] = -v;
        }
    }
    AdditivePcm::from_parts_unchecked(n, entries)
}

/// Relabelling that moves the pair `(i, j)` into rows {0, 1}.
///
/// The map p satisfies `p(0) = i` and `p(1) = j` so that conjugation
/// `b[k][l] = a[p(k)][p(l)]` places alternative i in row 0 and j in row 1.
/// Cases (0-based, i < j): `(0, 1)` is the identity; `(0, j)` swaps rows 1
/// and j; `(i, j)` with `i >= 2` composes the swaps (0 i) and (1 j). The
/// degenerate case `(1, j)` cannot use two swaps (they would collide on row
/// 1), so it uses the 3-cycle `0 -> 1 -> j -> 0`.
pub fn build_permutation(n: usize, i: usize, j: usize) -> Result<Permutation> {
    if !(i < j && j < n) {
        return Err(PcmError::InvalidPair { i, j, n });
    }
    if i == 0 && j == 1 {
        return Ok(Permutation::identity(n));
    }
    if i == 0 {
        return Permutation::transposition(n, 1, j);
    }
    if i == 1 {
        let mut map: Vec<usize> = (0..n).collect();
        map[0] = 1;
        map[1] = j;
        map[j] = 0;
        return Permutation::new(map);
    }
    let mut map: Vec<usize> = (0..n).collect();
    map.swap(0, i);
    map.swap(1, j);
    Permutation::new(map)
}

/// Equalizes alternatives `i` and `j` (0-based, `i < j`): the nearest
/// additive PCM in which their ranking weights are equal.
///
/// For pairs other than (0, 1) the matrix is conjugated so the pair lands in
/// rows {0, 1}, projected there, and conjugated back; orthogonal projection
/// commutes with the relabelling isometry, so the result is again the
/// nearest tied matrix.
pub fn eq(
    a: &AdditivePcm,
    i: usize,
    j: usize,
    basis: &OrthogonalTieBasis,
) -> Result<AdditivePcm> {
    let n = a.n();
    if basis.n != n {
        return Err(PcmError::DimensionMismatch {
            left: n,
            right: basis.n,
        });
    }
    if !(i < j && j < n) {
        return Err(PcmError::InvalidPair { i, j, n });
    }
    if i == 0 && j == 1 {
        return project_tie_12(a, basis);
    }
    let p = build_permutation(n, i, j)?;
    let relabelled = permute_conjugate(a, &p)?;
    let projected = project_tie_12(&relabelled, basis)?;
    permute_conjugate(&projected, &p.inverse())
}

static BASIS_CACHE: OnceLock<Mutex<HashMap<usize, Arc<OrthogonalTieBasis>>>> = OnceLock::new();

/// Shared per-dimension orthogonal basis. Construction happens at most once
/// per n for the process lifetime.
pub fn cached_orthogonal_basis(n: usize) -> Result<Arc<OrthogonalTieBasis>> {
    let cache = BASIS_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("basis cache poisoned");
    if let Some(b) = guard.get(&n) {
        return Ok(Arc::clone(b));
    }
    let built = Arc::new(gram_schmidt(&build_tie_basis(n)?)?);
    guard.insert(n, Arc::clone(&built));
    Ok(built)
}

/// Row-sum difference functional whose kernel (among skew matrices) is the
/// tie subspace. Public for use by tests and diagnostics.
pub fn tie_defect(a: &AdditivePcm) -> f64 {
    let w = additive_ranking(a);
    w.get(0) - w.get(1)
}
