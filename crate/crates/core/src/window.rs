//! Indexing of `(2k+1)`-windows and their two-sided contexts.
//!
//! A window `(s_0, .., s_2k)` is encoded base `m` with `s_0` most
//! significant. Its context is the `2k` symbols with the center removed,
//! encoded the same way; the center is `s_k`.

use crate::error::{Error, Result};
use crate::model::{Alphabet, Symbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct WindowShape {
    alphabet: Alphabet,
    k: usize,
    /// `m^k`
    half: usize,
}

impl WindowShape {
    pub fn new(alphabet: Alphabet, k: usize) -> Self {
        let half = alphabet.size().pow(k as u32);
        WindowShape { alphabet, k, half }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn alphabet_size(&self) -> usize {
        self.alphabet.size()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `2k + 1`
    pub fn width(&self) -> usize {
        2 * self.k + 1
    }

    /// `m^{2k+1}`
    pub fn window_count(&self) -> usize {
        self.half * self.half * self.alphabet.size()
    }

    /// `m^{2k}`
    pub fn context_count(&self) -> usize {
        self.half * self.half
    }

    /// Splits a window index into `(context index, center symbol)`.
    #[inline]
    pub fn split(&self, w: usize) -> (usize, usize) {
        let m = self.alphabet.size();
        let right = w % self.half;
        let center = (w / self.half) % m;
        let left = w / (self.half * m);
        (left * self.half + right, center)
    }

    /// Inverse of [`split`](Self::split).
    #[inline]
    pub fn join(&self, ctx: usize, center: usize) -> usize {
        let m = self.alphabet.size();
        let left = ctx / self.half;
        let right = ctx % self.half;
        (left * m + center) * self.half + right
    }

    pub fn encode(&self, symbols: &[Symbol]) -> usize {
        debug_assert_eq!(symbols.len(), self.width());
        let m = self.alphabet.size();
        symbols.iter().fold(0, |acc, &s| acc * m + s as usize)
    }

    pub fn decode(&self, w: usize) -> Vec<Symbol> {
        let m = self.alphabet.size();
        let mut out = vec![0; self.width()];
        let mut rest = w;
        for slot in out.iter_mut().rev() {
            *slot = (rest % m) as Symbol;
            rest /= m;
        }
        out
    }

    /// Window index of every center position `k..n-k` (0-based), in order.
    pub fn window_indices(&self, seq: &[Symbol]) -> Result<Vec<usize>> {
        self.window_indices_range(seq, self.k, seq.len().saturating_sub(self.k))
    }

    /// Window indices for centers `start..end` (0-based, clipped to the
    /// valid range is the caller's job).
    pub fn window_indices_range(
        &self,
        seq: &[Symbol],
        start: usize,
        end: usize,
    ) -> Result<Vec<usize>> {
        let n = seq.len();
        if n <= 2 * self.k {
            return Err(Error::SequenceTooShort { n, k: self.k });
        }
        if start < self.k || end > n - self.k || start > end {
            return Err(Error::InvalidRange(format!(
                "centers {start}..{end} outside {}..{}",
                self.k,
                n - self.k
            )));
        }
        if start == end {
            return Ok(Vec::new());
        }
        let m = self.alphabet.size();
        let top = self.window_count() / m;
        let mut out = Vec::with_capacity(end - start);
        let mut w = self.encode(&seq[start - self.k..=start + self.k]);
        out.push(w);
        for t in start + 1..end {
            w = (w % top) * m + seq[t + self.k] as usize;
            out.push(w);
        }
        Ok(out)
    }

    /// Symbol string of a window, e.g. `"011"`.
    pub fn label(&self, w: usize) -> String {
        self.decode(w)
            .into_iter()
            .map(|s| std::char::from_digit(s as u32, 36).expect("alphabet <= 36 for labels"))
            .collect()
    }

    pub fn parse_label(&self, label: &str) -> Result<usize> {
        let m = self.alphabet.size();
        let symbols: Option<Vec<Symbol>> = label
            .chars()
            .map(|c| {
                c.to_digit(36)
                    .filter(|&d| (d as usize) < m)
                    .map(|d| d as Symbol)
            })
            .collect();
        match symbols {
            Some(s) if s.len() == self.width() => Ok(self.encode(&s)),
            _ => Err(Error::Format(format!(
                "\"{label}\" is not a window of width {} over {m} symbols",
                self.width()
            ))),
        }
    }
}
