//! Ranking-stability indices.
//!
//! A pair of alternatives can be forced to tie by the equalizing projection;
//! the cheaper the projection, the easier the ranking is to manipulate. The
//! pairwise index below measures that cost on a [-M, M]-bounded comparison
//! scale, and the aggregate index averages it over all pairs.

use crate::error::{PcmError, Result};
use crate::pcm::AdditivePcm;

/// Slack allowed when checking entries against the scale bound, so matrices
/// sitting exactly on the bound after round-tripping still validate.
pub const BOUND_SLACK: f64 = 1e-9;

/// Half-width M of the additive comparison scale [-M, M].
///
/// On Saaty's 1-9 multiplicative scale, M = ln 9.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleBound {
    m: f64,
}

impl ScaleBound {
    pub fn new(m: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return Err(PcmError::InvalidScaleBound { value: m });
        }
        Ok(Self { m })
    }

    /// The bound matching the multiplicative 1-9 scale.
    pub fn saaty() -> Self {
        Self { m: 9.0_f64.ln() }
    }

    /// Bound that covers the given matrix: max(m, largest |a_ij|).
    ///
    /// Keeps the indices well defined for matrices that exceed the nominal
    /// scale, e.g. perturbed products of on-scale quantities.
    pub fn covering(&self, a: &AdditivePcm) -> Self {
        Self {
            m: self.m.max(a.max_abs_entry()),
        }
    }

    pub fn value(&self) -> f64 {
        self.m
    }

    fn check(&self, a: &AdditivePcm) -> Result<()> {
        let n = a.n();
        for i in 0..n {
            for j in 0..n {
                let v = a.get(i, j);
                if v.abs() > self.m + BOUND_SLACK {
                    return Err(PcmError::EntryOutsideBound {
                        row: i,
                        col: j,
                        value: v,
                        bound: self.m,
                    });
                }
            }
        }
        Ok(())
    }
}

/// Ranking-stability index of the pair (i, j): the row-sum gap scaled by the
/// maximum single-entry change 2M.
///
/// Equals |rowsum_i - rowsum_j| / (2M); ranges over [0, n-1] because each of
/// the n-1 off-diagonal entries of a row is within [-M, M]. Large values
/// mean many or large entry edits are needed to tie the pair.
pub fn rsi(a: &AdditivePcm, i: usize, j: usize, bound: &ScaleBound) -> Result<f64> {
    let n = a.n();
    if i >= n {
        return Err(PcmError::IndexOutOfRange { index: i, n });
    }
    if j >= n {
        return Err(PcmError::IndexOutOfRange { index: j, n });
    }
    bound.check(a)?;
    Ok((a.row_sum(i) - a.row_sum(j)).abs() / (2.0 * bound.value()))
}

/// Smallest pairwise index over all pairs i < j: the cost of the cheapest
/// single tie anywhere in the ranking.
pub fn rsi_min(a: &AdditivePcm, bound: &ScaleBound) -> Result<f64> {
    bound.check(a)?;
    let n = a.n();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (a.row_sum(i) - a.row_sum(j)).abs() / (2.0 * bound.value());
            if v < best {
                best = v;
            }
        }
    }
    Ok(best)
}

/// Aggregate ranking-stability index: pairwise indices averaged over the
/// n(n-1)/2 unordered pairs and normalized by the per-pair maximum n-1,
/// giving a value in [0, 1].
pub fn arsi(a: &AdditivePcm, bound: &ScaleBound) -> Result<f64> {
    bound.check(a)?;
    let n = a.n();
    let mut total = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            total += (a.row_sum(i) - a.row_sum(j)).abs() / (2.0 * bound.value());
        }
    }
    let pairs = (n * (n - 1)) as f64 / 2.0;
    Ok(total / (pairs * (n as f64 - 1.0)))
}
