//! Source models, source/channel pairs, seeded sampling and exact posteriors.
//!
//! All randomness is counter based: the `i`-th uniform of stream `s` under
//! seed `seed` is the `i`-th `u64` of `ChaCha8Rng::seed_from_u64(seed)` on
//! stream `s`. Any position range can therefore be generated independently
//! and the result never depends on how work is split across threads.

use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Alphabet, Channel, JointDistribution, ProbVector, Symbol, STOCHASTIC_TOL};
use crate::tensor::apply_along_axes;

/// Stream used for clean-sequence draws.
pub const SOURCE_STREAM: u64 = 0;
/// Stream used for channel noise.
pub const CHANNEL_STREAM: u64 = 1;
/// Stream used when sampling reconstructions.
pub const DENOISER_STREAM: u64 = 2;

/// Stream used to derive per-trial seeds.
pub const SEED_STREAM: u64 = 3;

const BLOCK: usize = 1 << 14;

/// Independent seed number `index` derived from `seed`.
pub fn derived_seed(seed: u64, index: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(SEED_STREAM);
    rng.set_word_pos(2 * index as u128);
    rng.next_u64()
}

/// Uniform variates in `[0, 1)` for positions `start..start + len`.
pub fn uniforms(seed: u64, stream: u64, start: usize, len: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    // each u64 consumes two 32-bit words
    rng.set_word_pos(2 * start as u128);
    (0..len)
        .map(|_| (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64))
        .collect()
}

/// Inverse-CDF draw from `probs`; never returns a zero-probability symbol.
pub fn draw(probs: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last = 0;
    for (a, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = a;
        if u < acc {
            return a;
        }
    }
    last
}

/// Maps position `t` through `f(t, u_t)` in parallel blocks.
pub(crate) fn par_positions<F>(seed: u64, stream: u64, n: usize, f: F) -> Vec<Symbol>
where
    F: Fn(usize, f64) -> Symbol + Sync,
{
    let blocks: Vec<usize> = (0..n).step_by(BLOCK).collect();
    blocks
        .into_par_iter()
        .flat_map_iter(|lo| {
            let hi = (lo + BLOCK).min(n);
            let us = uniforms(seed, stream, lo, hi - lo);
            (lo..hi).zip(us).map(|(t, u)| f(t, u)).collect::<Vec<_>>()
        })
        .collect()
}

/// A stationary source of clean symbols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceModel {
    Iid {
        probs: ProbVector,
    },
    /// First-order chain with row-stochastic `transition` started from
    /// `initial`.
    Markov {
        transition: Vec<Vec<f64>>,
        initial: ProbVector,
    },
}

impl SourceModel {
    pub fn iid(probs: ProbVector) -> Result<Self> {
        Alphabet::new(probs.len())?;
        Ok(SourceModel::Iid { probs })
    }

    pub fn markov(transition: Vec<Vec<f64>>, initial: ProbVector) -> Result<Self> {
        let m = initial.len();
        Alphabet::new(m)?;
        if transition.len() != m || transition.iter().any(|r| r.len() != m) {
            return Err(Error::DimensionMismatch(format!(
                "transition matrix must be {m} x {m}"
            )));
        }
        for (i, row) in transition.iter().enumerate() {
            if row.iter().any(|&v| !(v >= 0.0)) {
                return Err(Error::NotStochastic(format!(
                    "row {i} has a negative entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::NotStochastic(format!("row {i} sums to {s}")));
            }
        }
        Ok(SourceModel::Markov {
            transition,
            initial,
        })
    }

    /// Markov chain started from its stationary law.
    pub fn stationary_markov(transition: Vec<Vec<f64>>) -> Result<Self> {
        let pi = crate::oracle::markov_stationary(&transition)?;
        SourceModel::markov(transition, pi)
    }

    pub fn alphabet(&self) -> Alphabet {
        let m = match self {
            SourceModel::Iid { probs } => probs.len(),
            SourceModel::Markov { initial, .. } => initial.len(),
        };
        Alphabet::new(m).expect("validated at construction")
    }

    /// Validates a deserialized model.
    pub fn validate(self) -> Result<Self> {
        match self {
            SourceModel::Iid { probs } => SourceModel::iid(probs),
            SourceModel::Markov {
                transition,
                initial,
            } => SourceModel::markov(transition, initial),
        }
    }

    /// Samples `n` symbols. Markov chains are inherently sequential, but their
    /// uniforms still come from the counter-based stream.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<Symbol> {
        match self {
            SourceModel::Iid { probs } => par_positions(seed, SOURCE_STREAM, n, |_, u| {
                draw(probs.as_slice(), u) as Symbol
            }),
            SourceModel::Markov {
                transition,
                initial,
            } => {
                let us = uniforms(seed, SOURCE_STREAM, 0, n);
                let mut out = Vec::with_capacity(n);
                let mut prev: Option<usize> = None;
                for u in us {
                    let s = match prev {
                        None => draw(initial.as_slice(), u),
                        Some(p) => draw(&transition[p], u),
                    };
                    out.push(s as Symbol);
                    prev = Some(s);
                }
                out
            }
        }
    }

    /// Law of `order` consecutive clean symbols. Markov chains use their
    /// initial law at the first position, which is the window law everywhere
    /// when the chain is stationary.
    pub fn window_law(&self, order: usize) -> Result<JointDistribution> {
        match self {
            SourceModel::Iid { probs } => JointDistribution::product(probs, order),
            SourceModel::Markov {
                transition,
                initial,
            } => {
                let m = initial.len();
                let mut probs = initial.as_slice().to_vec();
                for _ in 1..order {
                    let mut next = Vec::with_capacity(probs.len() * m);
                    for (idx, &p) in probs.iter().enumerate() {
                        let last = idx % m;
                        next.extend(transition[last].iter().map(|&t| p * t));
                    }
                    probs = next;
                }
                JointDistribution::new(self.alphabet(), order, probs)
            }
        }
    }
}

/// Transmits `x` through `ch` with noise from the channel stream of `seed`.
pub fn transmit(ch: &Channel, x: &[Symbol], seed: u64) -> Result<Vec<Symbol>> {
    ch.alphabet().check_sequence(x)?;
    let m = ch.size();
    let rows = ch.matrix();
    Ok(par_positions(seed, CHANNEL_STREAM, x.len(), |t, u| {
        let xi = x[t] as usize;
        draw(&rows[xi * m..(xi + 1) * m], u) as Symbol
    }))
}

/// A clean source together with the channel that corrupts it.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceChannelPair {
    pub source: SourceModel,
    pub channel: Channel,
}

impl SourceChannelPair {
    pub fn new(source: SourceModel, channel: Channel) -> Result<Self> {
        if source.alphabet() != channel.alphabet() {
            return Err(Error::DimensionMismatch(format!(
                "source over {} symbols, channel over {}",
                source.alphabet().size(),
                channel.size()
            )));
        }
        Ok(SourceChannelPair { source, channel })
    }

    /// `(x, z)` of length `n`.
    pub fn sample(&self, n: usize, seed: u64) -> (Vec<Symbol>, Vec<Symbol>) {
        let x = self.source.sample(n, seed);
        let z = transmit(&self.channel, &x, seed).expect("source symbols are in range");
        (x, z)
    }

    /// Law of `order` consecutive noisy symbols.
    pub fn output_law(&self, order: usize) -> Result<JointDistribution> {
        let input = self.source.window_law(order)?;
        let m = self.channel.size();
        let mut pt = vec![0.0; m * m];
        for x in 0..m {
            for z in 0..m {
                pt[z * m + x] = self.channel.get(x, z);
            }
        }
        let mut probs = apply_along_axes(m, order, &pt, input.probs());
        // clean up rounding below zero
        probs.iter_mut().for_each(|p| *p = p.max(0.0));
        JointDistribution::new(self.channel.alphabet(), order, probs)
    }

    /// `P(X_t = x | Z^n = z)` for every position, row-major `n × m`.
    pub fn posteriors(&self, z: &[Symbol]) -> Result<Vec<f64>> {
        self.channel.alphabet().check_sequence(z)?;
        let m = self.channel.size();
        let ch = &self.channel;
        match &self.source {
            SourceModel::Iid { probs } => {
                let mut out = vec![0.0; z.len() * m];
                for (t, row) in out.chunks_mut(m).enumerate() {
                    let zt = z[t] as usize;
                    for x in 0..m {
                        row[x] = probs[x] * ch.get(x, zt);
                    }
                    normalize(row)?;
                }
                Ok(out)
            }
            SourceModel::Markov {
                transition,
                initial,
            } => forward_backward(transition, initial.as_slice(), ch, z),
        }
    }
}

fn normalize(row: &mut [f64]) -> Result<f64> {
    let s: f64 = row.iter().sum();
    if !(s > 0.0) {
        return Err(Error::ZeroLikelihood);
    }
    row.iter_mut().for_each(|v| *v /= s);
    Ok(s)
}

/// Scaled forward-backward smoothing; each step is renormalized so nothing
/// underflows on long sequences.
fn forward_backward(
    transition: &[Vec<f64>],
    initial: &[f64],
    ch: &Channel,
    z: &[Symbol],
) -> Result<Vec<f64>> {
    let n = z.len();
    let m = initial.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut alpha = vec![0.0; n * m];
    for x in 0..m {
        alpha[x] = initial[x] * ch.get(x, z[0] as usize);
    }
    normalize(&mut alpha[..m])?;
    for t in 1..n {
        let (prev, cur) = alpha.split_at_mut(t * m);
        let prev = &prev[(t - 1) * m..];
        let cur = &mut cur[..m];
        for x in 0..m {
            let pred: f64 = (0..m).map(|y| prev[y] * transition[y][x]).sum();
            cur[x] = pred * ch.get(x, z[t] as usize);
        }
        normalize(cur)?;
    }
    let mut beta = vec![1.0 / m as f64; m];
    let mut post = vec![0.0; n * m];
    for t in (0..n).rev() {
        let row = &mut post[t * m..(t + 1) * m];
        for x in 0..m {
            row[x] = alpha[t * m + x] * beta[x];
        }
        normalize(row)?;
        if t > 0 {
            let zt = z[t] as usize;
            let mut next = vec![0.0; m];
            for y in 0..m {
                next[y] = (0..m)
                    .map(|x| transition[y][x] * ch.get(x, zt) * beta[x])
                    .sum();
            }
            normalize(&mut next)?;
            beta = next;
        }
    }
    Ok(post)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::bsc;
    use approx::assert_abs_diff_eq;

    #[test]
    fn uniforms_are_counter_based() {
        let all = uniforms(3, 1, 0, 1000);
        let tail = uniforms(3, 1, 400, 600);
        assert_eq!(&all[400..], &tail[..]);
        assert_ne!(uniforms(3, 0, 0, 10), uniforms(3, 1, 0, 10));
        assert!(all.iter().all(|&u| (0.0..1.0).contains(&u)));
    }

    #[test]
    fn draw_skips_zero_mass() {
        assert_eq!(draw(&[0.0, 1.0], 0.0), 1);
        assert_eq!(draw(&[0.5, 0.5, 0.0], 0.999_999_999), 1);
        assert_eq!(draw(&[0.25, 0.75], 0.2), 0);
    }

    #[test]
    fn iid_sampling_frequency() {
        let s = SourceModel::iid(ProbVector::bernoulli(0.3).unwrap()).unwrap();
        let x = s.sample(100_000, 4);
        let ones = x.iter().filter(|&&v| v == 1).count() as f64 / 1e5;
        assert!((ones - 0.3).abs() < 0.0045, "{ones}");
        assert_eq!(x, s.sample(100_000, 4));
    }

    #[test]
    fn markov_sampling_frequency() {
        let s = SourceModel::stationary_markov(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let x = s.sample(200_000, 8);
        let ones = x.iter().filter(|&&v| v == 1).count() as f64 / 2e5;
        assert!((ones - 0.25).abs() < 0.01, "{ones}");
        let switches = x.windows(2).filter(|w| w[0] == 0 && w[1] == 1).count() as f64;
        let zeros = x[..x.len() - 1].iter().filter(|&&v| v == 0).count() as f64;
        assert!((switches / zeros - 0.1).abs() < 0.01);
    }

    #[test]
    fn output_law_of_bsc() {
        let pair = SourceChannelPair::new(
            SourceModel::iid(ProbVector::bernoulli(0.1875).unwrap()).unwrap(),
            bsc(0.1).unwrap(),
        )
        .unwrap();
        let q = pair.output_law(1).unwrap();
        assert_abs_diff_eq!(q.probs()[1], 0.25, epsilon = 1e-12);
        let q3 = pair.output_law(3).unwrap();
        assert_abs_diff_eq!(q3.probs()[7], 0.25f64.powi(3), epsilon = 1e-12);
    }

    #[test]
    fn markov_window_law_marginals() {
        let s = SourceModel::stationary_markov(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        let w = s.window_law(2).unwrap();
        assert_abs_diff_eq!(w.probs()[1], 0.075, epsilon = 1e-12);
        assert_abs_diff_eq!(w.probs()[2], 0.075, epsilon = 1e-12);
    }

    #[test]
    fn iid_posteriors_are_bayes() {
        let pair = SourceChannelPair::new(
            SourceModel::iid(ProbVector::bernoulli(0.1875).unwrap()).unwrap(),
            bsc(0.1).unwrap(),
        )
        .unwrap();
        let post = pair.posteriors(&[1, 0]).unwrap();
        assert_abs_diff_eq!(post[0], 0.8125 * 0.1 / 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(post[3], 0.1875 * 0.1 / 0.75, epsilon = 1e-12);
    }

    #[test]
    fn impossible_observation() {
        let pair = SourceChannelPair::new(
            SourceModel::iid(ProbVector::point_mass(2, 0)).unwrap(),
            Channel::identity(Alphabet::new(2).unwrap()),
        )
        .unwrap();
        assert!(matches!(
            pair.posteriors(&[0, 1]),
            Err(Error::ZeroLikelihood)
        ));
        let markov = SourceChannelPair::new(
            SourceModel::markov(
                vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                ProbVector::point_mass(2, 0),
            )
            .unwrap(),
            Channel::identity(Alphabet::new(2).unwrap()),
        )
        .unwrap();
        assert!(matches!(
            markov.posteriors(&[0, 1]),
            Err(Error::ZeroLikelihood)
        ));
    }

    #[test]
    fn long_markov_smoothing_does_not_underflow() {
        let pair = SourceChannelPair::new(
            SourceModel::stationary_markov(vec![vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap(),
            bsc(0.2).unwrap(),
        )
        .unwrap();
        let (_, z) = pair.sample(100_000, 1);
        let post = pair.posteriors(&z).unwrap();
        for row in post.chunks(2) {
            assert!(row.iter().all(|v| v.is_finite()));
            assert_abs_diff_eq!(row[0] + row[1], 1.0, epsilon = 1e-12);
        }
    }
}
