//! Empirical `(2k+1)`-window statistics of a noisy sequence.
//!
//! Windows are centered at 1-based positions `k+1..n-k` (0-based `k..n-k`),
//! so edge symbols only ever appear as context. Counts are exact integers and
//! are normalized by the window count `n - 2k` on read.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{Alphabet, JointDistribution, ProbVector, Symbol};
use crate::window::WindowShape;

/// Sequences at least this long are counted in parallel chunks.
const PARALLEL_CHUNK: usize = 1 << 16;

/// A two-sided context: `k` symbols to the left and `k` to the right of the
/// center.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextKey {
    pub left: Vec<Symbol>,
    pub right: Vec<Symbol>,
}

impl ContextKey {
    pub fn new(left: Vec<Symbol>, right: Vec<Symbol>) -> Result<Self> {
        if left.len() != right.len() {
            return Err(Error::DimensionMismatch(format!(
                "context sides of length {} and {}",
                left.len(),
                right.len()
            )));
        }
        Ok(ContextKey { left, right })
    }

    /// The empty context of a `k = 0` window.
    pub fn empty() -> Self {
        ContextKey {
            left: Vec::new(),
            right: Vec::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.left.len()
    }

    pub fn index(&self, shape: &WindowShape) -> Result<usize> {
        if self.k() != shape.k() {
            return Err(Error::DimensionMismatch(format!(
                "context of order {} for windows of order {}",
                self.k(),
                shape.k()
            )));
        }
        let m = shape.alphabet_size();
        let mut idx = 0;
        for &s in self.left.iter().chain(&self.right) {
            if s as usize >= m {
                return Err(Error::SymbolOutOfRange {
                    symbol: s as usize,
                    position: 0,
                    alphabet: m,
                });
            }
            idx = idx * m + s as usize;
        }
        Ok(idx)
    }

    pub fn from_index(shape: &WindowShape, ctx: usize) -> Self {
        let w = shape.decode(shape.join(ctx, 0));
        let k = shape.k();
        ContextKey {
            left: w[..k].to_vec(),
            right: w[k + 1..].to_vec(),
        }
    }
}

/// Window counts of a sequence at order `k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmpiricalStats {
    shape: WindowShape,
    counts: Vec<u64>,
    total: u64,
}

/// Counts every `(2k+1)`-window of `z`.
pub fn empirical_joint(z: &[Symbol], alphabet: Alphabet, k: usize) -> Result<EmpiricalStats> {
    alphabet.check_sequence(z)?;
    let n = z.len();
    if n <= 2 * k {
        return Err(Error::SequenceTooShort { n, k });
    }
    let shape = WindowShape::new(alphabet, k);
    let (start, end) = (k, n - k);
    let count_range = |lo: usize, hi: usize| -> Result<Vec<u64>> {
        let mut counts = vec![0u64; shape.window_count()];
        for w in shape.window_indices_range(z, lo, hi)? {
            counts[w] += 1;
        }
        Ok(counts)
    };
    let counts = if end - start <= PARALLEL_CHUNK {
        count_range(start, end)?
    } else {
        let bounds: Vec<(usize, usize)> = (start..end)
            .step_by(PARALLEL_CHUNK)
            .map(|lo| (lo, (lo + PARALLEL_CHUNK).min(end)))
            .collect();
        let partial = bounds
            .into_par_iter()
            .map(|(lo, hi)| count_range(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        let mut counts = vec![0u64; shape.window_count()];
        for part in partial {
            for (c, p) in counts.iter_mut().zip(part) {
                *c += p;
            }
        }
        counts
    };
    Ok(EmpiricalStats {
        shape,
        counts,
        total: (end - start) as u64,
    })
}

impl EmpiricalStats {
    pub fn shape(&self) -> WindowShape {
        self.shape
    }

    pub fn k(&self) -> usize {
        self.shape.k()
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of windows, `n - 2k`.
    pub fn window_total(&self) -> u64 {
        self.total
    }

    /// Normalized empirical law `Q̂^{2k+1}`.
    pub fn joint(&self) -> JointDistribution {
        let total = self.total as f64;
        let probs = self.counts.iter().map(|&c| c as f64 / total).collect();
        JointDistribution::new(self.shape.alphabet(), self.shape.width(), probs)
            .expect("normalized counts form a distribution")
    }

    /// Empirical law of `Z_0` given the context; uniform for unseen contexts.
    pub fn conditional_center(&self, ctx: &ContextKey) -> Result<ProbVector> {
        let idx = ctx.index(&self.shape)?;
        let m = self.shape.alphabet_size();
        let counts: Vec<u64> = (0..m)
            .map(|c| self.counts[self.shape.join(idx, c)])
            .collect();
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Ok(ProbVector::uniform(m));
        }
        ProbVector::new(counts.iter().map(|&c| c as f64 / total as f64).collect())
    }

    /// Marginal probability of every context that occurs.
    pub fn context_weights(&self) -> Vec<(ContextKey, f64)> {
        let mut per_ctx = vec![0u64; self.shape.context_count()];
        for (w, &c) in self.counts.iter().enumerate() {
            per_ctx[self.shape.split(w).0] += c;
        }
        per_ctx
            .into_iter()
            .enumerate()
            .filter(|(_, c)| *c > 0)
            .map(|(ctx, c)| {
                (
                    ContextKey::from_index(&self.shape, ctx),
                    c as f64 / self.total as f64,
                )
            })
            .collect()
    }

    /// CSV with one row per window: `window,count,probability`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("window,count,probability\n");
        for (w, &c) in self.counts.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{:.11e}\n",
                self.shape.label(w),
                c,
                c as f64 / self.total as f64
            ));
        }
        out
    }
}

/// Maximum absolute entrywise difference of two tensors of the same order.
pub fn l_inf_distance(p: &JointDistribution, q: &JointDistribution) -> Result<f64> {
    if p.order() != q.order() || p.alphabet() != q.alphabet() {
        return Err(Error::DimensionMismatch(format!(
            "tensors of order {} and {}",
            p.order(),
            q.order()
        )));
    }
    Ok(p.probs()
        .iter()
        .zip(q.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}
