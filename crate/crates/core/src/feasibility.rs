//! Channel feasibility against an observed output law, trimming of the
//! uncertainty set, and the continuity moduli used to reason about it.
//!
//! A channel `Π` is feasible for an order-`t` output law `Q` when some valid
//! input law `P` satisfies `Π * P = Q`. For invertible `Π` the candidate is
//! unique, `P = (Π^{-T})^{⊗t} Q`, so feasibility reduces to the sign of its
//! smallest entry.

use rayon::prelude::*;
use serde::Serialize;

use crate::empirical::EmpiricalStats;
use crate::error::{Error, Result};
use crate::model::{bsc, rho, Channel, ChannelSet, JointDistribution, LossMatrix};
use crate::tensor::apply_along_axes;

/// Applies `Π^{-T}` along every axis of `q`. Entries may be negative when `Π`
/// is not feasible for `q`; they always sum to 1 because `Π^{-1} 1 = 1`.
pub fn induced_input(ch: &Channel, q: &JointDistribution) -> Result<Vec<f64>> {
    if ch.alphabet() != q.alphabet() {
        return Err(Error::DimensionMismatch(format!(
            "channel over {} symbols, tensor over {}",
            ch.size(),
            q.alphabet().size()
        )));
    }
    Ok(apply_along_axes(
        ch.size(),
        q.order(),
        ch.inverse_transpose(),
        q.probs(),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeasibilityVerdict {
    pub channel: usize,
    pub label: String,
    /// Most negative entry of the induced input tensor.
    pub min_entry: f64,
    pub feasible: bool,
    pub eps: f64,
}

/// Feasible iff the induced input tensor has no entry below `-eps`.
pub fn is_feasible(ch: &Channel, q: &JointDistribution, eps: f64) -> Result<FeasibilityVerdict> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "feasibility slack {eps} is negative"
        )));
    }
    let min_entry = induced_input(ch, q)?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(FeasibilityVerdict {
        channel: 0,
        label: String::new(),
        min_entry,
        feasible: min_entry >= -eps,
        eps,
    })
}

/// Default slack `max(1e-9, sqrt(ln(m^{2l+1}) / (n - 2l)))` for stats of
/// order `l` computed from `n - 2l` windows.
pub fn default_slack(m: usize, l: usize, windows: u64) -> f64 {
    let ln_cells = (2 * l + 1) as f64 * (m as f64).ln();
    (ln_cells / windows.max(1) as f64).sqrt().max(1e-9)
}

/// Result of trimming an uncertainty set.
#[derive(Clone, Debug, Serialize)]
pub struct TrimmedSet {
    #[serde(skip)]
    pub survivors: ChannelSet,
    /// Indices into the original set of the surviving channels.
    pub survivor_indices: Vec<usize>,
    pub verdicts: Vec<FeasibilityVerdict>,
    pub eps: f64,
    pub order: usize,
    /// Set when no channel passed and the least-infeasible one was kept.
    pub fallback: bool,
}

impl TrimmedSet {
    /// JSON report: per channel `{label, min_entry, feasible, eps}`.
    pub fn report_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trim report serializes")
    }
}

/// Keeps the channels of `delta` that are feasible for the order-`2l+1` law
/// `q` at slack `eps`; if none are, keeps the one with the largest minimum
/// entry and sets `fallback`.
pub fn trim_law(delta: &ChannelSet, q: &JointDistribution, eps: f64) -> Result<TrimmedSet> {
    let shape = q.window_shape()?;
    let verdicts = delta
        .channels()
        .par_iter()
        .enumerate()
        .map(|(i, ch)| {
            is_feasible(ch, q, eps).map(|mut v| {
                v.channel = i;
                v.label = delta.labels()[i].clone();
                v
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut survivor_indices: Vec<usize> = verdicts
        .iter()
        .filter(|v| v.feasible)
        .map(|v| v.channel)
        .collect();
    let fallback = survivor_indices.is_empty();
    if fallback {
        let mut best = 0;
        for v in &verdicts {
            if v.min_entry > verdicts[best].min_entry {
                best = v.channel;
            }
        }
        survivor_indices.push(best);
    }
    Ok(TrimmedSet {
        survivors: delta.subset(&survivor_indices)?,
        survivor_indices,
        verdicts,
        eps,
        order: shape.k(),
        fallback,
    })
}

/// [`trim_law`] against the empirical law of `stats`.
pub fn trim(delta: &ChannelSet, stats: &EmpiricalStats, eps: f64) -> Result<TrimmedSet> {
    trim_law(delta, &stats.joint(), eps)
}

/// Finite-order proxy `ρ(Δ̂_L, Δ̂_l)` for the distance between the order-`l`
/// trimmed set and the fully feasible set, using a higher order `L > l`.
pub fn trim_gap_proxy(
    delta: &ChannelSet,
    low: &JointDistribution,
    high: &JointDistribution,
    eps: f64,
) -> Result<f64> {
    if high.order() <= low.order() {
        return Err(Error::InvalidArgument(
            "the proxy needs a strictly higher comparison order".into(),
        ));
    }
    let a = trim_law(delta, low, eps)?;
    let b = trim_law(delta, high, eps)?;
    rho(&b.survivors, &a.survivors)
}

/// Continuity modulus of the worst-case loss in the channel set:
/// `[m^{2k+1} Λ_max max_Π ‖Π^{-1}‖] · eps`.
pub fn phi_k(k: usize, delta: &ChannelSet, loss: &LossMatrix, eps: f64) -> f64 {
    let m = delta.alphabet().size() as f64;
    m.powi(2 * k as i32 + 1) * loss.max_loss() * delta.max_inv_norm() * eps
}

/// Modulus `ε ↦ ε (max_Π ‖Π^{-1}‖)^{l m^l}` of trimmed-set continuity in the
/// output law.
pub fn b_l_modulus(l: usize, delta: &ChannelSet) -> impl Fn(f64) -> f64 {
    let m = delta.alphabet().size() as f64;
    let factor = delta.max_inv_norm().powf(l as f64 * m.powi(l as i32));
    move |eps| eps * factor
}

/// BSCs with crossover probabilities on a grid of spacing at most `eta`
/// covering `[lo, hi]`. Grid values are rounded to 12 decimals so they are
/// the doubles nearest to short decimal fractions.
pub fn bsc_cover(lo: f64, hi: f64, eta: f64) -> Result<ChannelSet> {
    if !(0.0 <= lo && lo <= hi && hi < 0.5) {
        return Err(Error::InvalidRange(format!(
            "need 0 <= lo <= hi < 0.5, got [{lo}, {hi}]"
        )));
    }
    if !(eta > 0.0) {
        return Err(Error::InvalidRange(format!(
            "cover radius {eta} must be positive"
        )));
    }
    let width = hi - lo;
    let points = if width == 0.0 {
        1
    } else {
        (width / eta - 1e-9).ceil().max(1.0) as usize + 1
    };
    let round = |v: f64| (v * 1e12).round() / 1e12;
    let deltas: Vec<f64> = (0..points)
        .map(|i| {
            if points == 1 {
                lo
            } else {
                round(lo + width * i as f64 / (points - 1) as f64)
            }
        })
        .collect();
    let channels = deltas.iter().map(|&d| bsc(d)).collect::<Result<Vec<_>>>()?;
    ChannelSet::with_labels(
        channels,
        deltas.iter().map(|d| format!("BSC({d})")).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{hamming_loss, Alphabet, ProbVector};
    use approx::assert_abs_diff_eq;

    fn bern(q: f64, order: usize) -> JointDistribution {
        JointDistribution::product(&ProbVector::bernoulli(q).unwrap(), order).unwrap()
    }

    #[test]
    fn identity_leaves_law_unchanged() {
        let q = bern(0.3, 3);
        let id = Channel::identity(Alphabet::new(2).unwrap());
        assert_eq!(induced_input(&id, &q).unwrap(), q.probs());
        let v = is_feasible(&id, &q, 0.0).unwrap();
        assert!(v.feasible);
        assert_abs_diff_eq!(
            v.min_entry,
            0.7f64.powi(3).min(0.3f64.powi(3)),
            epsilon = 1e-15
        );
    }

    #[test]
    fn bernoulli_induced_inputs() {
        let q = bern(0.25, 1);
        let p = induced_input(&bsc(0.1).unwrap(), &q).unwrap();
        assert_abs_diff_eq!(p[1], 0.1875, epsilon = 1e-12);
        let p = induced_input(&bsc(0.2).unwrap(), &q).unwrap();
        assert_abs_diff_eq!(p[1], 0.05 / 0.6, epsilon = 1e-12);
    }

    #[test]
    fn crossover_above_output_rate_is_infeasible() {
        let q = bern(0.25, 1);
        let v = is_feasible(&bsc(0.3).unwrap(), &q, 1e-6).unwrap();
        assert!(!v.feasible);
        assert_abs_diff_eq!(v.min_entry, -0.125, epsilon = 1e-12);
        assert!(is_feasible(&bsc(0.2).unwrap(), &q, 1e-9).unwrap().feasible);
        assert!(is_feasible(&bsc(0.1).unwrap(), &q, -1.0).is_err());
    }

    #[test]
    fn trim_examples() {
        let q = bern(0.25, 1);
        let delta = ChannelSet::bsc_set(&[0.1, 0.2, 0.3]).unwrap();
        let t = trim_law(&delta, &q, 0.0).unwrap();
        assert_eq!(t.survivor_indices, vec![0, 1]);
        assert!(!t.fallback);

        let single = ChannelSet::bsc_set(&[0.2]).unwrap();
        assert_eq!(trim_law(&single, &q, 0.0).unwrap().survivors, single);

        let bad = ChannelSet::bsc_set(&[0.4]).unwrap();
        let t = trim_law(&bad, &q, 1e-6).unwrap();
        assert!(t.fallback);
        assert_abs_diff_eq!(t.verdicts[0].min_entry, -0.75, epsilon = 1e-12);
        assert_eq!(t.survivors.len(), 1);

        let json = t.report_json();
        assert!(json.contains("\"label\": \"BSC(0.4)\""));
        assert!(json.contains("\"feasible\": false"));
    }

    #[test]
    fn fallback_picks_least_infeasible() {
        let q = bern(0.25, 1);
        let delta = ChannelSet::bsc_set(&[0.45, 0.3, 0.4]).unwrap();
        let t = trim_law(&delta, &q, 0.0).unwrap();
        assert!(t.fallback);
        assert_eq!(t.survivor_indices, vec![1]);
    }

    #[test]
    fn phi_k_values() {
        let delta = ChannelSet::bsc_set(&[0.1]).unwrap();
        let h = hamming_loss(2).unwrap();
        assert_eq!(phi_k(0, &delta, &h, 0.0), 0.0);
        assert_abs_diff_eq!(phi_k(0, &delta, &h, 0.01), 0.025, epsilon = 1e-15);
        assert_abs_diff_eq!(phi_k(1, &delta, &h, 0.02), 2.0 * phi_k(1, &delta, &h, 0.01));
    }

    #[test]
    fn b_l_values() {
        let delta = ChannelSet::bsc_set(&[0.1]).unwrap();
        let b = b_l_modulus(1, &delta);
        assert_eq!(b(0.0), 0.0);
        assert_abs_diff_eq!(b(0.2), 0.2 * 1.5625, epsilon = 1e-12);
        let id = ChannelSet::bsc_set(&[0.0]).unwrap();
        assert_eq!(b_l_modulus(3, &id)(0.37), 0.37);
    }

    #[test]
    fn cover_examples() {
        assert_eq!(bsc_cover(0.1, 0.1, 0.05).unwrap().len(), 1);
        let c = bsc_cover(0.0, 0.4, 0.1).unwrap();
        assert_eq!(c.len(), 5);
        assert_eq!(c.get(3).get(0, 1), 0.3);
        assert_eq!(bsc_cover(0.1, 0.2, 0.5).unwrap().len(), 2);
        assert!(bsc_cover(0.2, 0.1, 0.1).is_err());
        assert!(bsc_cover(0.0, 0.5, 0.1).is_err());
        assert!(bsc_cover(0.0, 0.1, 0.0).is_err());
    }

    #[test]
    fn cover_radius_holds() {
        let (lo, hi, eta) = (0.03, 0.37, 0.07);
        let c = bsc_cover(lo, hi, eta).unwrap();
        for i in 0..=1000 {
            let d = lo + (hi - lo) * i as f64 / 1000.0;
            let target = bsc(d).unwrap();
            let nearest = c
                .channels()
                .iter()
                .map(|ch| crate::model::channel_distance(ch, &target).unwrap())
                .fold(f64::INFINITY, f64::min);
            assert!(nearest <= eta + 1e-12);
        }
    }

    #[test]
    fn default_slack_scale() {
        assert_abs_diff_eq!(default_slack(2, 0, 100_000), (2f64.ln() / 1e5).sqrt());
        assert_eq!(default_slack(2, 0, u64::MAX), 1e-9);
    }
}
