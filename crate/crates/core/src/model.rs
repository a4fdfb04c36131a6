//! Value types shared by every stage of the denoiser: alphabets, channels,
//! loss matrices, probability vectors and tensors, sliding-window denoisers
//! and finite channel sets.
//!
//! Matrices are stored row-major as flat `Vec<f64>`. A channel entry
//! `Π(x, z)` is the probability of observing `z` when `x` was sent.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::window::WindowShape;

/// A symbol is an index into the alphabet.
pub type Symbol = u8;

/// Row sums of a channel must match 1 within this tolerance.
pub const STOCHASTIC_TOL: f64 = 1e-12;
/// Channels with `|det Π|` below this are rejected as singular.
pub const SINGULAR_TOL: f64 = 1e-10;
/// Probability vectors and tensors must sum to 1 within this tolerance.
pub const SIMPLEX_TOL: f64 = 1e-9;

/// A finite alphabet `{0, .., m-1}` with `m >= 2`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size < 2 || size > Symbol::MAX as usize + 1 {
            return Err(Error::InvalidAlphabet(size));
        }
        Ok(Alphabet(size))
    }

    pub fn size(self) -> usize {
        self.0
    }

    /// Checks that every element of `seq` is a symbol of this alphabet.
    pub fn check_sequence(self, seq: &[Symbol]) -> Result<()> {
        match seq.iter().position(|&s| s as usize >= self.0) {
            Some(position) => Err(Error::SymbolOutOfRange {
                symbol: seq[position] as usize,
                position,
                alphabet: self.0,
            }),
            None => Ok(()),
        }
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;
    fn try_from(value: usize) -> Result<Self> {
        Alphabet::new(value)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.0
    }
}

/// JSON shape shared by channels and loss matrices: `{"matrix": [[..], ..]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixDoc {
    pub matrix: Vec<Vec<f64>>,
}

fn flatten_square(rows: &[Vec<f64>]) -> Result<(usize, Vec<f64>)> {
    let m = rows.len();
    if let Some(bad) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "expected a square {m}x{m} matrix, found a row of length {}",
            bad.len()
        )));
    }
    Ok((m, rows.iter().flatten().copied().collect()))
}

fn to_rows(m: usize, data: &[f64]) -> Vec<Vec<f64>> {
    data.chunks(m).map(|r| r.to_vec()).collect()
}

/// Induced infinity norm: maximum absolute row sum.
pub(crate) fn induced_inf_norm(m: usize, data: &[f64]) -> f64 {
    data.chunks(m)
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// An invertible discrete memoryless channel over a square alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixDoc", into = "MatrixDoc")]
pub struct Channel {
    alphabet: Alphabet,
    matrix: Vec<f64>,
    inverse_transpose: Vec<f64>,
    inv_norm: f64,
}

impl Channel {
    /// Validates a row-stochastic invertible matrix given as rows.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let (m, data) = flatten_square(rows)?;
        Self::from_row_major(Alphabet::new(m)?, data)
    }

    pub fn from_row_major(alphabet: Alphabet, matrix: Vec<f64>) -> Result<Self> {
        let m = alphabet.size();
        if matrix.len() != m * m {
            return Err(Error::DimensionMismatch(format!(
                "channel over {m} symbols needs {} entries, got {}",
                m * m,
                matrix.len()
            )));
        }
        for (x, row) in matrix.chunks(m).enumerate() {
            if let Some(v) = row.iter().find(|v| !(**v >= 0.0 && **v <= 1.0)) {
                return Err(Error::NotStochastic(format!(
                    "entry {v} in row {x} is outside [0, 1]"
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!("row {x} sums to {sum}")));
            }
        }
        let dm = DMatrix::from_row_slice(m, m, &matrix);
        let det = dm.clone().lu().determinant();
        if !(det.abs() >= SINGULAR_TOL) {
            return Err(Error::Singular { det });
        }
        let inv = dm.try_inverse().ok_or(Error::Singular { det })?;
        let inv_norm = induced_inf_norm(m, inv.transpose().as_slice());
        // nalgebra is column-major: the column-major storage of Π^{-1} is the
        // row-major storage of Π^{-T}.
        let inverse_transpose = inv.as_slice().to_vec();
        Ok(Channel {
            alphabet,
            matrix,
            inverse_transpose,
            inv_norm,
        })
    }

    /// The identity (noiseless) channel.
    pub fn identity(alphabet: Alphabet) -> Self {
        let m = alphabet.size();
        let mut matrix = vec![0.0; m * m];
        for i in 0..m {
            matrix[i * m + i] = 1.0;
        }
        Channel {
            alphabet,
            inverse_transpose: matrix.clone(),
            matrix,
            inv_norm: 1.0,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.size()
    }

    /// `Π(x, z)`.
    #[inline]
    pub fn get(&self, x: usize, z: usize) -> f64 {
        self.matrix[x * self.size() + z]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    /// Row-major `Π^{-T}`.
    pub fn inverse_transpose(&self) -> &[f64] {
        &self.inverse_transpose
    }

    /// `‖Π^{-1}‖` in the induced infinity norm.
    pub fn inv_norm(&self) -> f64 {
        self.inv_norm
    }

    /// `Π^{-T} v`.
    pub fn apply_inverse_transpose(&self, v: &[f64]) -> Vec<f64> {
        let m = self.size();
        self.inverse_transpose
            .chunks(m)
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Output distribution `Π^T p` for input distribution `p`.
    pub fn output_of(&self, p: &[f64]) -> Vec<f64> {
        let m = self.size();
        (0..m)
            .map(|z| (0..m).map(|x| p[x] * self.get(x, z)).sum())
            .collect()
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        to_rows(self.size(), &self.matrix)
    }
}

impl TryFrom<MatrixDoc> for Channel {
    type Error = Error;
    fn try_from(doc: MatrixDoc) -> Result<Self> {
        Channel::new(&doc.matrix)
    }
}

impl From<Channel> for MatrixDoc {
    fn from(c: Channel) -> Self {
        MatrixDoc { matrix: c.rows() }
    }
}

/// Binary symmetric channel with crossover probability `delta`.
pub fn bsc(delta: f64) -> Result<Channel> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidArgument(format!(
            "crossover probability {delta} is outside [0, 1]"
        )));
    }
    Channel::new(&[vec![1.0 - delta, delta], vec![delta, 1.0 - delta]])
}

/// Entrywise maximum absolute difference between two channels.
pub fn channel_distance(a: &Channel, b: &Channel) -> Result<f64> {
    if a.size() != b.size() {
        return Err(Error::DimensionMismatch(format!(
            "channels over {} and {} symbols",
            a.size(),
            b.size()
        )));
    }
    Ok(a.matrix
        .iter()
        .zip(&b.matrix)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

/// Single-letter loss `Λ(x, a)`: cost of reconstructing `a` when `x` was sent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixDoc", into = "MatrixDoc")]
pub struct LossMatrix {
    alphabet: Alphabet,
    matrix: Vec<f64>,
    max_loss: f64,
}

impl LossMatrix {
    pub fn new(rows: &[Vec<f64>]) -> Result<Self> {
        let (m, data) = flatten_square(rows)?;
        let alphabet = Alphabet::new(m)?;
        if let Some(v) = data.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidArgument(format!(
                "loss entry {v} is negative"
            )));
        }
        let max_loss = data.iter().copied().fold(0.0, f64::max);
        Ok(LossMatrix {
            alphabet,
            matrix: data,
            max_loss,
        })
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn size(&self) -> usize {
        self.alphabet.size()
    }

    #[inline]
    pub fn get(&self, x: usize, a: usize) -> f64 {
        self.matrix[x * self.size() + a]
    }

    /// `Λ_max`.
    pub fn max_loss(&self) -> f64 {
        self.max_loss
    }

    /// Returns `c · Λ`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        LossMatrix::new(&to_rows(
            self.size(),
            &self.matrix.iter().map(|v| v * c).collect::<Vec<_>>(),
        ))
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        to_rows(self.size(), &self.matrix)
    }
}

impl TryFrom<MatrixDoc> for LossMatrix {
    type Error = Error;
    fn try_from(doc: MatrixDoc) -> Result<Self> {
        LossMatrix::new(&doc.matrix)
    }
}

impl From<LossMatrix> for MatrixDoc {
    fn from(l: LossMatrix) -> Self {
        MatrixDoc { matrix: l.rows() }
    }
}

/// Hamming loss: 0 on the diagonal, 1 elsewhere.
pub fn hamming_loss(m: usize) -> Result<LossMatrix> {
    Alphabet::new(m)?;
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|x| (0..m).map(|a| if x == a { 0.0 } else { 1.0 }).collect())
        .collect();
    LossMatrix::new(&rows)
}

fn check_simplex(values: &[f64]) -> Result<()> {
    if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && v.is_finite())) {
        return Err(Error::InvalidDistribution(format!("entry {v} is negative")));
    }
    let sum: f64 = values.iter().sum();
    if (sum - 1.0).abs() > SIMPLEX_TOL {
        return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
    }
    Ok(())
}

/// A point of the probability simplex over the alphabet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidAlphabet(values.len()));
        }
        check_simplex(&values)?;
        Ok(ProbVector(values))
    }

    pub fn uniform(m: usize) -> Self {
        ProbVector(vec![1.0 / m as f64; m])
    }

    pub fn point_mass(m: usize, s: usize) -> Self {
        let mut v = vec![0.0; m];
        v[s] = 1.0;
        ProbVector(v)
    }

    /// Bernoulli law on `{0, 1}` with `P(1) = p`.
    pub fn bernoulli(p: f64) -> Result<Self> {
        ProbVector::new(vec![1.0 - p, p])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Index of the largest entry, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }
}

impl std::ops::Index<usize> for ProbVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        ProbVector::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Vec<f64> {
        p.0
    }
}

/// Probability tensor over `order`-tuples of the alphabet, first axis most
/// significant in the flat index.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDistribution {
    alphabet: Alphabet,
    order: usize,
    probs: Vec<f64>,
}

impl JointDistribution {
    pub fn new(alphabet: Alphabet, order: usize, probs: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidArgument(
                "tensor order must be positive".into(),
            ));
        }
        let expected = checked_pow(alphabet.size(), order)?;
        if probs.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "order-{order} tensor over {} symbols needs {expected} entries, got {}",
                alphabet.size(),
                probs.len()
            )));
        }
        check_simplex(&probs)?;
        Ok(JointDistribution {
            alphabet,
            order,
            probs,
        })
    }

    /// Law of `order` independent draws from `p`.
    pub fn product(p: &ProbVector, order: usize) -> Result<Self> {
        let alphabet = Alphabet::new(p.len())?;
        let m = p.len();
        let mut probs = vec![1.0];
        for _ in 0..order {
            let mut next = Vec::with_capacity(probs.len() * m);
            for &q in &probs {
                next.extend(p.as_slice().iter().map(|&v| q * v));
            }
            probs = next;
        }
        JointDistribution::new(alphabet, order, probs)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Window shape of an odd-order tensor (order `2k + 1`).
    pub fn window_shape(&self) -> Result<WindowShape> {
        if self.order % 2 == 0 {
            return Err(Error::DimensionMismatch(format!(
                "tensor order {} is not of the form 2k+1",
                self.order
            )));
        }
        Ok(WindowShape::new(self.alphabet, (self.order - 1) / 2))
    }

    /// Probability of each two-sided context, indexed by context index.
    pub fn context_weights(&self) -> Result<Vec<f64>> {
        let shape = self.window_shape()?;
        let mut weights = vec![0.0; shape.context_count()];
        for (w, &p) in self.probs.iter().enumerate() {
            weights[shape.split(w).0] += p;
        }
        Ok(weights)
    }

    /// Conditional law of the center symbol given context `ctx`; uniform when
    /// the context has zero probability.
    pub fn conditional_center(&self, ctx: usize) -> Result<ProbVector> {
        let shape = self.window_shape()?;
        let m = shape.alphabet_size();
        let v: Vec<f64> = (0..m).map(|c| self.probs[shape.join(ctx, c)]).collect();
        let total: f64 = v.iter().sum();
        if total <= 0.0 {
            return Ok(ProbVector::uniform(m));
        }
        Ok(ProbVector(v.into_iter().map(|x| x / total).collect()))
    }

    /// Marginal law of the center symbol.
    pub fn center_marginal(&self) -> Result<ProbVector> {
        let shape = self.window_shape()?;
        let m = shape.alphabet_size();
        let mut v = vec![0.0; m];
        for (w, &p) in self.probs.iter().enumerate() {
            v[shape.split(w).1] += p;
        }
        Ok(ProbVector(v))
    }
}

pub(crate) fn checked_pow(m: usize, t: usize) -> Result<usize> {
    u32::try_from(t)
        .ok()
        .and_then(|t| m.checked_pow(t))
        .filter(|&v| v <= 1 << 26)
        .ok_or_else(|| Error::InvalidArgument(format!("{m}^{t} entries is too large")))
}

/// A randomized sliding-window denoiser of order `k`: each `(2k+1)`-window of
/// the noisy sequence maps to a distribution over reconstructions of its
/// center symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct WindowedDenoiser {
    shape: WindowShape,
    table: Vec<f64>,
}

impl WindowedDenoiser {
    /// Builds a denoiser from one distribution per window index.
    pub fn new(shape: WindowShape, rows: Vec<ProbVector>) -> Result<Self> {
        let m = shape.alphabet_size();
        if rows.len() != shape.window_count() {
            return Err(Error::DimensionMismatch(format!(
                "denoiser of order {} needs {} windows, got {}",
                shape.k(),
                shape.window_count(),
                rows.len()
            )));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "reconstruction vector of length {} for alphabet of size {m}",
                r.len()
            )));
        }
        Ok(WindowedDenoiser {
            shape,
            table: rows.into_iter().flat_map(|r| r.0).collect(),
        })
    }

    /// Builds a denoiser from a raw flat table, validating every row.
    pub fn from_flat(shape: WindowShape, table: Vec<f64>) -> Result<Self> {
        let m = shape.alphabet_size();
        if table.len() != shape.window_count() * m {
            return Err(Error::DimensionMismatch(format!(
                "flat denoiser table has {} entries, expected {}",
                table.len(),
                shape.window_count() * m
            )));
        }
        for row in table.chunks(m) {
            check_simplex(row)?;
        }
        Ok(WindowedDenoiser { shape, table })
    }

    /// Same distribution for every window.
    pub fn constant(shape: WindowShape, p: &ProbVector) -> Result<Self> {
        WindowedDenoiser::new(shape, vec![p.clone(); shape.window_count()])
    }

    /// Deterministic denoiser given by a reconstruction symbol per window.
    pub fn deterministic(shape: WindowShape, rule: &[usize]) -> Result<Self> {
        let m = shape.alphabet_size();
        if let Some(&s) = rule.iter().find(|&&s| s >= m) {
            return Err(Error::InvalidArgument(format!(
                "reconstruction {s} out of range"
            )));
        }
        WindowedDenoiser::new(
            shape,
            rule.iter().map(|&s| ProbVector::point_mass(m, s)).collect(),
        )
    }

    /// "Say what you see": reconstruct the observed center symbol.
    pub fn say_what_you_see(shape: WindowShape) -> Self {
        let rule: Vec<usize> = (0..shape.window_count())
            .map(|w| shape.split(w).1)
            .collect();
        WindowedDenoiser::deterministic(shape, &rule).expect("centers are in range")
    }

    /// Always reconstruct `symbol`.
    pub fn say_constant(shape: WindowShape, symbol: usize) -> Result<Self> {
        WindowedDenoiser::deterministic(shape, &vec![symbol; shape.window_count()])
    }

    /// Pointwise mixture `γ f + (1 - γ) g`.
    pub fn mix(&self, other: &WindowedDenoiser, gamma: f64) -> Result<Self> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch(
                "denoisers of different shape".into(),
            ));
        }
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidArgument(format!("mixing weight {gamma}")));
        }
        let table = self
            .table
            .iter()
            .zip(&other.table)
            .map(|(a, b)| gamma * a + (1.0 - gamma) * b)
            .collect();
        Ok(WindowedDenoiser {
            shape: self.shape,
            table,
        })
    }

    pub fn shape(&self) -> WindowShape {
        self.shape
    }

    pub fn k(&self) -> usize {
        self.shape.k()
    }

    /// Reconstruction distribution for window index `w`.
    #[inline]
    pub fn row(&self, w: usize) -> &[f64] {
        let m = self.shape.alphabet_size();
        &self.table[w * m..(w + 1) * m]
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Restriction of the denoiser to one two-sided context: row `z` is the
    /// reconstruction law when the observed center is `z`.
    pub fn slice(&self, ctx: usize) -> Vec<ProbVector> {
        (0..self.shape.alphabet_size())
            .map(|z| ProbVector(self.row(self.shape.join(ctx, z)).to_vec()))
            .collect()
    }

    /// JSON document `{"k": k, "alphabet": m, "table": {window: [probs]}}`
    /// with probabilities at 17 significant digits.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{{\n  \"k\": {},\n  \"alphabet\": {},\n  \"table\": {{",
            self.k(),
            self.shape.alphabet_size()
        ));
        for w in 0..self.shape.window_count() {
            if w > 0 {
                out.push(',');
            }
            let probs: Vec<String> = self.row(w).iter().map(|p| format!("{p:.16e}")).collect();
            out.push_str(&format!(
                "\n    \"{}\": [{}]",
                self.shape.label(w),
                probs.join(", ")
            ));
        }
        out.push_str("\n  }\n}\n");
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let k = doc
            .get("k")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::Format("missing integer field \"k\"".into()))?
            as usize;
        let table = doc
            .get("table")
            .and_then(|v| v.as_object())
            .ok_or_else(|| Error::Format("missing object field \"table\"".into()))?;
        let m = match doc.get("alphabet").and_then(|v| v.as_u64()) {
            Some(m) => m as usize,
            None => table
                .values()
                .next()
                .and_then(|v| v.as_array())
                .map(|a| a.len())
                .ok_or_else(|| Error::Format("empty denoiser table".into()))?,
        };
        let shape = WindowShape::new(Alphabet::new(m)?, k);
        let mut flat = vec![f64::NAN; shape.window_count() * m];
        for (label, probs) in table {
            let w = shape.parse_label(label)?;
            let probs: Vec<f64> = serde_json::from_value(probs.clone())
                .map_err(|e| Error::Format(format!("window {label}: {e}")))?;
            if probs.len() != m {
                return Err(Error::Format(format!(
                    "window {label} has {} entries",
                    probs.len()
                )));
            }
            flat[w * m..(w + 1) * m].copy_from_slice(&probs);
        }
        if flat.iter().any(|v| v.is_nan()) {
            return Err(Error::Format(
                "denoiser table does not cover every window".into(),
            ));
        }
        WindowedDenoiser::from_flat(shape, flat)
    }
}

/// A finite, nonempty set of channels with optional labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    channels: Vec<Channel>,
    labels: Vec<String>,
}

impl ChannelSet {
    /// Builds a set, labelling channels by position.
    pub fn new(channels: Vec<Channel>) -> Result<Self> {
        let labels = (0..channels.len()).map(|i| format!("channel{i}")).collect();
        Self::with_labels(channels, labels)
    }

    pub fn with_labels(channels: Vec<Channel>, labels: Vec<String>) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::EmptySet);
        }
        if labels.len() != channels.len() {
            return Err(Error::DimensionMismatch("one label per channel".into()));
        }
        let m = channels[0].size();
        for (i, c) in channels.iter().enumerate() {
            if c.size() != m {
                return Err(Error::DimensionMismatch(format!(
                    "channel {i} has alphabet {} instead of {m}",
                    c.size()
                )));
            }
            for d in &channels[..i] {
                if channel_distance(c, d)? <= STOCHASTIC_TOL {
                    return Err(Error::InvalidArgument(format!(
                        "channel {i} is a duplicate"
                    )));
                }
            }
        }
        Ok(ChannelSet { channels, labels })
    }

    /// Set of BSCs with the given crossover probabilities, labelled `BSC(δ)`.
    pub fn bsc_set(deltas: &[f64]) -> Result<Self> {
        let channels = deltas.iter().map(|&d| bsc(d)).collect::<Result<Vec<_>>>()?;
        let labels = deltas.iter().map(|d| format!("BSC({d})")).collect();
        Self::with_labels(channels, labels)
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn get(&self, i: usize) -> &Channel {
        &self.channels[i]
    }

    pub fn alphabet(&self) -> Alphabet {
        self.channels[0].alphabet()
    }

    /// `max_{Π ∈ Δ} ‖Π^{-1}‖`.
    pub fn max_inv_norm(&self) -> f64 {
        self.channels
            .iter()
            .map(|c| c.inv_norm())
            .fold(0.0, f64::max)
    }

    /// Subset keeping the given indices in order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        Self::with_labels(
            indices.iter().map(|&i| self.channels[i].clone()).collect(),
            indices.iter().map(|&i| self.labels[i].clone()).collect(),
        )
    }
}

/// `ρ(A, B) = sup_a inf_b ‖a − b‖ + sup_b inf_a ‖a − b‖` with the entrywise
/// max norm on channels.
pub fn rho(a: &ChannelSet, b: &ChannelSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let directed = |from: &ChannelSet, to: &ChannelSet| -> Result<f64> {
        let mut sup: f64 = 0.0;
        for x in from.channels() {
            let mut inf = f64::INFINITY;
            for y in to.channels() {
                inf = inf.min(channel_distance(x, y)?);
            }
            sup = sup.max(inf);
        }
        Ok(sup)
    };
    Ok(directed(a, b)? + directed(b, a)?)
}
