//! Brute-force references: a grid search for binary minimax problems, exact
//! enumeration of expected losses, and a few closed forms.
//!
//! These are deliberately naive and share nothing with the production
//! algorithms beyond the core value types.

use crate::error::{Error, Result};
use crate::model::{ChannelSet, LossMatrix, ProbVector, Symbol, WindowedDenoiser};
use crate::source::{SourceChannelPair, SourceModel};

/// Best point of a grid search over `(d_0, d_1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridResult {
    /// Probability of reconstructing 1 when 0 is observed.
    pub d0: f64,
    /// Probability of reconstructing 1 when 1 is observed.
    pub d1: f64,
    pub value: f64,
    pub step: f64,
}

/// Binary window-free expected loss with `d_z` the probability of answering 1
/// after observing `z`, written out term by term.
fn binary_loss(alpha: f64, pi: [[f64; 2]; 2], loss: &LossMatrix, d0: f64, d1: f64) -> f64 {
    // invert the 2x2 channel by hand
    let det = pi[0][0] * pi[1][1] - pi[0][1] * pi[1][0];
    let inv = [
        [pi[1][1] / det, -pi[0][1] / det],
        [-pi[1][0] / det, pi[0][0] / det],
    ];
    // input law u = inv^T q with q = (1 - alpha, alpha)
    let q = [1.0 - alpha, alpha];
    let u = [
        inv[0][0] * q[0] + inv[1][0] * q[1],
        inv[0][1] * q[0] + inv[1][1] * q[1],
    ];
    let d = [d0, d1];
    let mut total = 0.0;
    for x in 0..2 {
        for z in 0..2 {
            let answer_one = d[z];
            total += u[x]
                * pi[x][z]
                * ((1.0 - answer_one) * loss.get(x, 0) + answer_one * loss.get(x, 1));
        }
    }
    total
}

/// Exhaustive search over `(d_0, d_1) ∈ {0, step, .., 1}²` of the worst-case
/// loss over `delta`. Ties keep the lexicographically smallest point.
pub fn grid_minimax_binary_k0(
    q: &ProbVector,
    delta: &ChannelSet,
    loss: &LossMatrix,
    step: f64,
) -> Result<GridResult> {
    if q.len() != 2 || delta.alphabet().size() != 2 || loss.size() != 2 {
        return Err(Error::DimensionMismatch(
            "grid search is binary only".into(),
        ));
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step {step}")));
    }
    let chans: Vec<[[f64; 2]; 2]> = delta
        .channels()
        .iter()
        .map(|c| [[c.get(0, 0), c.get(0, 1)], [c.get(1, 0), c.get(1, 1)]])
        .collect();
    let points = (1.0 / step).round() as usize;
    let mut best = GridResult {
        d0: 0.0,
        d1: 0.0,
        value: f64::INFINITY,
        step,
    };
    for i in 0..=points {
        let d0 = (i as f64 * step).min(1.0);
        for j in 0..=points {
            let d1 = (j as f64 * step).min(1.0);
            let worst = chans
                .iter()
                .map(|&pi| binary_loss(q[1], pi, loss, d0, d1))
                .fold(f64::NEG_INFINITY, f64::max);
            if worst < best.value {
                best = GridResult {
                    d0,
                    d1,
                    value: worst,
                    step,
                };
            }
        }
    }
    Ok(best)
}

/// Exact expectations of the normalized loss of a denoiser under a pair.
#[derive(Clone, Debug)]
pub struct ExhaustiveResult {
    /// `E[L_f]`.
    pub expected: f64,
    /// `E[L_f | Z^n = z]` for every `z`, indexed base `m` with `z_0` most
    /// significant; `NaN` where `P(z) = 0`.
    pub conditional: Vec<f64>,
    /// `P(Z^n = z)` on the same indexing.
    pub prob_z: Vec<f64>,
    m: usize,
}

impl ExhaustiveResult {
    pub fn conditional_at(&self, z: &[Symbol]) -> f64 {
        let idx = z.iter().fold(0usize, |acc, &s| acc * self.m + s as usize);
        self.conditional[idx]
    }
}

fn digits(mut idx: usize, m: usize, n: usize) -> Vec<Symbol> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = (idx % m) as Symbol;
        idx /= m;
    }
    out
}

fn prob_x(source: &SourceModel, x: &[Symbol]) -> f64 {
    match source {
        SourceModel::Iid { probs } => x.iter().map(|&s| probs[s as usize]).product(),
        SourceModel::Markov {
            transition,
            initial,
        } => {
            let mut p = initial[x[0] as usize];
            for w in x.windows(2) {
                p *= transition[w[0] as usize][w[1] as usize];
            }
            p
        }
    }
}

fn normalized_loss(x: &[Symbol], z: &[Symbol], f: &WindowedDenoiser, loss: &LossMatrix) -> f64 {
    let k = f.k();
    let n = x.len();
    let shape = f.shape();
    let mut total = 0.0;
    for t in k..n - k {
        let row = f.row(shape.encode(&z[t - k..=t + k]));
        for (a, &p) in row.iter().enumerate() {
            total += loss.get(x[t] as usize, a) * p;
        }
    }
    total / (n - 2 * k) as f64
}

/// Enumerates every `(x^n, z^n)`; requires `m^n ≤ 2^24`.
pub fn exhaustive_expected_loss(
    pair: &SourceChannelPair,
    f: &WindowedDenoiser,
    n: usize,
    loss: &LossMatrix,
) -> Result<ExhaustiveResult> {
    let m = pair.channel.size();
    let states = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if states > 1 << 24 {
        return Err(Error::StateSpaceTooLarge(states));
    }
    if n <= 2 * f.k() {
        return Err(Error::SequenceTooShort { n, k: f.k() });
    }
    let states = states as usize;
    let xs: Vec<(Vec<Symbol>, f64)> = (0..states)
        .map(|i| {
            let x = digits(i, m, n);
            let p = prob_x(&pair.source, &x);
            (x, p)
        })
        .filter(|(_, p)| *p > 0.0)
        .collect();
    let mut conditional = vec![f64::NAN; states];
    let mut prob_z = vec![0.0; states];
    let mut expected = 0.0;
    for zi in 0..states {
        let z = digits(zi, m, n);
        let mut mass = 0.0;
        let mut weighted = 0.0;
        for (x, px) in &xs {
            let pzx: f64 = x
                .iter()
                .zip(&z)
                .map(|(&a, &b)| pair.channel.get(a as usize, b as usize))
                .product();
            let w = px * pzx;
            if w == 0.0 {
                continue;
            }
            mass += w;
            weighted += w * normalized_loss(x, &z, f, loss);
        }
        prob_z[zi] = mass;
        expected += weighted;
        if mass > 0.0 {
            conditional[zi] = weighted / mass;
        }
    }
    Ok(ExhaustiveResult {
        expected,
        conditional,
        prob_z,
        m,
    })
}

/// Input rate `p` of a BSC(δ) whose output rate is `q`.
pub fn induced_bsc_input(q: f64, delta: f64) -> Result<f64> {
    let denom = 1.0 - 2.0 * delta;
    if denom.abs() < 1e-10 {
        return Err(Error::Singular { det: denom });
    }
    Ok((q - delta) / denom)
}

/// Stationary law of an irreducible chain, by power iteration on the lazy
/// chain `(P + I) / 2` (same stationary law, no periodicity).
pub fn markov_stationary(transition: &[Vec<f64>]) -> Result<ProbVector> {
    let m = transition.len();
    if m == 0 || transition.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch(
            "transition matrix must be square".into(),
        ));
    }
    // strong connectivity: everything reachable from 0 and 0 reachable from everything
    let reach = |forward: bool| {
        let mut seen = vec![false; m];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..m {
                let p = if forward {
                    transition[i][j]
                } else {
                    transition[j][i]
                };
                if p > 0.0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    if !reach(true) || !reach(false) {
        return Err(Error::NotIrreducible);
    }
    let mut pi = vec![1.0 / m as f64; m];
    for _ in 0..1_000_000 {
        let mut next = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                next[j] += pi[i] * 0.5 * (transition[i][j] + if i == j { 1.0 } else { 0.0 });
            }
        }
        let s: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= s);
        let residual = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        pi = next;
        if residual < 1e-13 {
            return ProbVector::new(pi);
        }
    }
    Err(Error::NotIrreducible)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bsc, hamming_loss, Alphabet, Channel};
    use crate::window::WindowShape;
    use approx::assert_abs_diff_eq;

    #[test]
    fn example_one_grid() {
        let h = hamming_loss(2).unwrap();
        let q = ProbVector::bernoulli(0.25).unwrap();
        let delta = ChannelSet::bsc_set(&[0.1, 0.2]).unwrap();
        let g = grid_minimax_binary_k0(&q, &delta, &h, 1e-3).unwrap();
        assert!((g.value - 0.1428).abs() < 2e-3);
        assert_abs_diff_eq!(g.d0, 0.0);
        assert!((g.d1 - 0.510).abs() < 2e-3);
    }

    #[test]
    fn grid_trivial_cases() {
        let h = hamming_loss(2).unwrap();
        let id = ChannelSet::bsc_set(&[0.0]).unwrap();
        let g =
            grid_minimax_binary_k0(&ProbVector::bernoulli(0.3).unwrap(), &id, &h, 0.01).unwrap();
        assert_eq!((g.d0, g.d1, g.value), (0.0, 1.0, 0.0));
        let d = 0.1;
        let pair = ChannelSet::bsc_set(&[d, 0.0]).unwrap();
        let g =
            grid_minimax_binary_k0(&ProbVector::bernoulli(d).unwrap(), &pair, &h, 1e-3).unwrap();
        assert_abs_diff_eq!(g.value, d / 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(g.d1, 0.5, epsilon = 1e-9);
    }

    #[test]
    fn exhaustive_simple_cases() {
        let h = hamming_loss(2).unwrap();
        let shape = WindowShape::new(Alphabet::new(2).unwrap(), 0);
        let swys = WindowedDenoiser::say_what_you_see(shape);
        let clean = SourceChannelPair::new(
            SourceModel::iid(ProbVector::bernoulli(0.4).unwrap()).unwrap(),
            Channel::identity(Alphabet::new(2).unwrap()),
        )
        .unwrap();
        assert_eq!(
            exhaustive_expected_loss(&clean, &swys, 6, &h)
                .unwrap()
                .expected,
            0.0
        );
        let noisy = SourceChannelPair::new(
            SourceModel::iid(ProbVector::bernoulli(0.3).unwrap()).unwrap(),
            bsc(0.15).unwrap(),
        )
        .unwrap();
        let r = exhaustive_expected_loss(&noisy, &swys, 6, &h).unwrap();
        assert_abs_diff_eq!(r.expected, 0.15, epsilon = 1e-12);
        let total: f64 = r.prob_z.iter().sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        let weighted: f64 = r
            .conditional
            .iter()
            .zip(&r.prob_z)
            .filter(|(_, &p)| p > 0.0)
            .map(|(c, p)| c * p)
            .sum();
        assert_abs_diff_eq!(weighted, r.expected, epsilon = 1e-12);
        assert!(matches!(
            exhaustive_expected_loss(&noisy, &swys, 25, &h),
            Err(Error::StateSpaceTooLarge(_))
        ));
    }

    #[test]
    fn bsc_inputs() {
        assert_abs_diff_eq!(
            induced_bsc_input(0.25, 0.1).unwrap(),
            0.1875,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            induced_bsc_input(0.25, 0.2).unwrap(),
            0.05 / 0.6,
            epsilon = 1e-15
        );
        assert_eq!(induced_bsc_input(0.2, 0.2).unwrap(), 0.0);
        assert!(matches!(
            induced_bsc_input(0.3, 0.5),
            Err(Error::Singular { .. })
        ));
    }

    #[test]
    fn stationary_laws() {
        let pi = markov_stationary(&[vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        assert_abs_diff_eq!(pi[0], 0.5, epsilon = 1e-12);
        let pi = markov_stationary(&[vec![0.9, 0.1], vec![0.3, 0.7]]).unwrap();
        assert_abs_diff_eq!(pi[0], 0.75, epsilon = 1e-12);
        assert_abs_diff_eq!(pi[1], 0.25, epsilon = 1e-12);
        let periodic = markov_stationary(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert_abs_diff_eq!(periodic[0], 0.5, epsilon = 1e-12);
        assert!(matches!(
            markov_stationary(&[vec![1.0, 0.0], vec![0.0, 1.0]]),
            Err(Error::NotIrreducible)
        ));
    }
}
