//! Loss measurement: realized loss, conditional expected loss given the
//! noisy sequence under explicit source/channel pairs, the worst case over a
//! pair list, and the best achievable worst case among order-`k` rules.

pub mod bounds;
pub mod concentration;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::minimax::{minimax_over_tables, LossTable, MinimaxSolution};
use crate::model::{LossMatrix, Symbol, WindowedDenoiser};
use crate::source::SourceChannelPair;
use crate::window::WindowShape;

pub use bounds::{lemma1_bound, lemma2_bound, lemma4_bound};
pub use concentration::{concentration_experiment, ConcentrationReport, TrialGap};

fn check_pair(x: &[Symbol], z: &[Symbol], k: usize) -> Result<()> {
    if x.len() != z.len() {
        return Err(Error::LengthMismatch(x.len(), z.len()));
    }
    if z.len() <= 2 * k {
        return Err(Error::SequenceTooShort { n: z.len(), k });
    }
    Ok(())
}

/// Loss of `f` against the clean sequence, averaged over the `n - 2k` full
/// windows and over the denoiser's randomization.
pub fn realized_loss(
    x: &[Symbol],
    z: &[Symbol],
    f: &WindowedDenoiser,
    loss: &LossMatrix,
) -> Result<f64> {
    let shape = f.shape();
    let k = shape.k();
    check_pair(x, z, k)?;
    shape.alphabet().check_sequence(x)?;
    let windows = shape.window_indices(z)?;
    let total: f64 = windows
        .iter()
        .enumerate()
        .map(|(i, &w)| {
            let xt = x[i + k] as usize;
            f.row(w)
                .iter()
                .enumerate()
                .map(|(a, p)| loss.get(xt, a) * p)
                .sum::<f64>()
        })
        .sum();
    Ok(total / windows.len() as f64)
}

/// Realized loss of a fixed reconstruction over the full-window positions.
pub fn reconstruction_loss(
    x: &[Symbol],
    xhat: &[Symbol],
    k: usize,
    loss: &LossMatrix,
) -> Result<f64> {
    check_pair(x, xhat, k)?;
    let n = x.len();
    let total: f64 = (k..n - k)
        .map(|t| loss.get(x[t] as usize, xhat[t] as usize))
        .sum();
    Ok(total / (n - 2 * k) as f64)
}

/// Linear table `c[w][a] = (1/(n-2k)) Σ_{t: window_t = w} Σ_x P(X_t = x | z) Λ(x, a)`;
/// its value at `f` is the conditional expected loss of `f`.
pub fn posterior_loss_table(
    pair: &SourceChannelPair,
    z: &[Symbol],
    k: usize,
    loss: &LossMatrix,
) -> Result<LossTable> {
    let alphabet = pair.channel.alphabet();
    if loss.size() != alphabet.size() {
        return Err(Error::DimensionMismatch(
            "loss and pair alphabets differ".into(),
        ));
    }
    if z.len() <= 2 * k {
        return Err(Error::SequenceTooShort { n: z.len(), k });
    }
    let m = alphabet.size();
    let shape = WindowShape::new(alphabet, k);
    let post = pair.posteriors(z)?;
    let windows = shape.window_indices(z)?;
    let scale = 1.0 / windows.len() as f64;
    let mut coeffs = vec![0.0; shape.window_count() * m];
    for (i, &w) in windows.iter().enumerate() {
        let p = &post[(i + k) * m..(i + k + 1) * m];
        for a in 0..m {
            coeffs[w * m + a] += scale * (0..m).map(|x| p[x] * loss.get(x, a)).sum::<f64>();
        }
    }
    LossTable::new(shape, coeffs)
}

/// `E[L_f(X^n, Z^n) | Z^n = z]` under `pair`.
pub fn conditional_expected_loss(
    pair: &SourceChannelPair,
    z: &[Symbol],
    f: &WindowedDenoiser,
    loss: &LossMatrix,
) -> Result<f64> {
    posterior_loss_table(pair, z, f.k(), loss)?.evaluate(f)
}

/// Largest conditional expected loss over `pairs`; ties go to the lowest
/// index.
pub fn worst_case_loss(
    pairs: &[SourceChannelPair],
    z: &[Symbol],
    f: &WindowedDenoiser,
    loss: &LossMatrix,
) -> Result<(f64, usize)> {
    if pairs.is_empty() {
        return Err(Error::EmptyList);
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, pair) in pairs.iter().enumerate() {
        let v = conditional_expected_loss(pair, z, f, loss)?;
        if v > best.0 {
            best = (v, i);
        }
    }
    Ok(best)
}

/// Smallest worst-case conditional expected loss achievable by an order-`k`
/// denoiser, with the rule attaining it.
pub fn benchmark_mu(
    pairs: &[SourceChannelPair],
    z: &[Symbol],
    k: usize,
    loss: &LossMatrix,
) -> Result<MinimaxSolution> {
    if pairs.is_empty() {
        return Err(Error::EmptyList);
    }
    let tables = pairs
        .iter()
        .map(|p| posterior_loss_table(p, z, k, loss))
        .collect::<Result<Vec<_>>>()?;
    minimax_over_tables(&tables)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairLoss {
    pub label: String,
    pub conditional_loss: f64,
}

/// Tail-bound values reported alongside an evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundValues {
    pub delta: f64,
    pub lemma1: f64,
    pub lemma2: f64,
    pub lemma4: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalReport {
    pub realized_loss: f64,
    pub pairs: Vec<PairLoss>,
    pub worst_case: f64,
    pub worst_index: usize,
    pub benchmark_mu: f64,
    /// `worst_case - benchmark_mu`.
    pub regret: f64,
    pub bounds: Option<BoundValues>,
}

impl EvalReport {
    /// Evaluates `f` on `(x, z)` against `pairs`.
    pub fn compute(
        x: &[Symbol],
        z: &[Symbol],
        f: &WindowedDenoiser,
        pairs: &[SourceChannelPair],
        labels: &[String],
        loss: &LossMatrix,
    ) -> Result<EvalReport> {
        if labels.len() != pairs.len() {
            return Err(Error::LengthMismatch(labels.len(), pairs.len()));
        }
        let realized = realized_loss(x, z, f, loss)?;
        let per_pair = pairs
            .iter()
            .map(|p| conditional_expected_loss(p, z, f, loss))
            .collect::<Result<Vec<_>>>()?;
        let (worst_case, worst_index) = worst_case_loss(pairs, z, f, loss)?;
        let mu = benchmark_mu(pairs, z, f.k(), loss)?.value;
        Ok(EvalReport {
            realized_loss: realized,
            pairs: labels
                .iter()
                .zip(per_pair)
                .map(|(l, v)| PairLoss {
                    label: l.clone(),
                    conditional_loss: v,
                })
                .collect(),
            worst_case,
            worst_index,
            benchmark_mu: mu,
            regret: worst_case - mu,
            bounds: None,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// One row per pair.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "pair,label,conditional_loss,realized_loss,worst_case,benchmark_mu,regret\n",
        );
        for (i, p) in self.pairs.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{:.11e},{:.11e},{:.11e},{:.11e},{:.11e}\n",
                i,
                p.label,
                p.conditional_loss,
                self.realized_loss,
                self.worst_case,
                self.benchmark_mu,
                self.regret
            ));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{bsc, hamming_loss, Alphabet, Channel, ProbVector};
    use crate::source::SourceModel;
    use approx::assert_abs_diff_eq;

    fn h() -> LossMatrix {
        hamming_loss(2).unwrap()
    }

    fn shape(k: usize) -> WindowShape {
        WindowShape::new(Alphabet::new(2).unwrap(), k)
    }

    fn iid_pair(p: f64, d: f64) -> SourceChannelPair {
        SourceChannelPair::new(
            SourceModel::iid(ProbVector::bernoulli(p).unwrap()).unwrap(),
            bsc(d).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn realized_loss_examples() {
        let f = WindowedDenoiser::say_what_you_see(shape(0));
        assert_eq!(
            realized_loss(&[0, 1, 1, 0], &[0, 1, 1, 0], &f, &h()).unwrap(),
            0.0
        );
        assert_abs_diff_eq!(
            realized_loss(&[0; 5], &[0, 0, 1, 0, 0], &f, &h()).unwrap(),
            0.2
        );
        let half = WindowedDenoiser::constant(shape(1), &ProbVector::uniform(2)).unwrap();
        assert_abs_diff_eq!(
            realized_loss(&[0, 1, 1, 0, 1], &[1, 1, 0, 0, 1], &half, &h()).unwrap(),
            0.5
        );
        assert!(matches!(
            realized_loss(&[0, 1], &[0, 1, 1], &f, &h()),
            Err(Error::LengthMismatch(2, 3))
        ));
    }

    #[test]
    fn noiseless_pair_matches_realized() {
        let pair = SourceChannelPair::new(
            SourceModel::iid(ProbVector::bernoulli(0.4).unwrap()).unwrap(),
            Channel::identity(Alphabet::new(2).unwrap()),
        )
        .unwrap();
        let z = [0, 1, 1, 0, 1, 0, 0];
        let f = WindowedDenoiser::say_constant(shape(1), 1).unwrap();
        assert_abs_diff_eq!(
            conditional_expected_loss(&pair, &z, &f, &h()).unwrap(),
            realized_loss(&z, &z, &f, &h()).unwrap(),
            epsilon = 1e-15
        );
        let mu = benchmark_mu(&[pair], &z, 1, &h()).unwrap();
        assert_abs_diff_eq!(mu.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn example_one_pairs_at_scale() {
        let pairs = vec![iid_pair(0.1875, 0.1), iid_pair(0.05 / 0.6, 0.2)];
        let (_, z) = pairs[0].sample(100_000, 7);
        let swys = WindowedDenoiser::say_what_you_see(shape(0));
        let zeros = WindowedDenoiser::say_constant(shape(0), 0).unwrap();
        let (v1, i1) = worst_case_loss(&pairs, &z, &swys, &h()).unwrap();
        assert!((v1 - 0.2).abs() < 0.01);
        assert_eq!(i1, 1);
        let (v2, _) = worst_case_loss(&pairs, &z, &zeros, &h()).unwrap();
        assert!((v2 - 0.1875).abs() < 0.01);
        let mu = benchmark_mu(&pairs, &z, 0, &h()).unwrap();
        assert!((mu.value - 1.0 / 7.0).abs() < 0.01);
        assert!((mu.denoiser.row(1)[1] - 0.5101).abs() < 0.05);
        assert!(mu.value <= v1 + 1e-8 && mu.value <= v2 + 1e-8);
    }

    #[test]
    fn report_outputs() {
        let pairs = vec![iid_pair(0.1875, 0.1), iid_pair(0.05 / 0.6, 0.2)];
        let (x, z) = pairs[0].sample(2_000, 1);
        let f = WindowedDenoiser::say_what_you_see(shape(0));
        let labels = vec!["BSC(0.1)".to_string(), "BSC(0.2)".to_string()];
        let r = EvalReport::compute(&x, &z, &f, &pairs, &labels, &h()).unwrap();
        assert!(r.regret >= -1e-8);
        assert_eq!(r.to_csv().lines().count(), 3);
        assert!(r.to_json().contains("\"worst_index\""));
        assert!(worst_case_loss(&[], &z, &f, &h()).is_err());
    }
}
