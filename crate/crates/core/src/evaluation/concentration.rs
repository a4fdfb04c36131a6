//! Monte Carlo check of how closely the windowed estimator `G_k(Q̂, Π, f)`
//! tracks the realized loss and the conditional expected loss.

use rayon::prelude::*;
use serde::Serialize;

use super::bounds::{lemma1_bound, lemma2_bound};
use super::{conditional_expected_loss, realized_loss};
use crate::empirical::empirical_joint;
use crate::error::{Error, Result};
use crate::minimax::g_k_expected_loss_raw;
use crate::model::{LossMatrix, WindowedDenoiser};
use crate::source::{derived_seed, SourceChannelPair, SourceModel};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialGap {
    pub trial: usize,
    pub seed: u64,
    pub estimate: f64,
    pub realized: f64,
    /// `|G_k - L_f|`.
    pub gap_realized: f64,
    /// `|G_k - E[L_f | Z]|`, iid sources only.
    pub gap_conditional: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConcentrationReport {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub trials: Vec<TrialGap>,
    pub exceed_realized: f64,
    pub exceed_conditional: Option<f64>,
    pub lemma1: f64,
    pub lemma2: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

impl ConcentrationReport {
    pub fn median_gap_realized(&self) -> f64 {
        median(self.trials.iter().map(|t| t.gap_realized).collect())
    }

    pub fn median_gap_conditional(&self) -> Option<f64> {
        let v: Vec<f64> = self
            .trials
            .iter()
            .filter_map(|t| t.gap_conditional)
            .collect();
        (!v.is_empty()).then(|| median(v))
    }

    /// One row per trial.
    pub fn to_csv(&self) -> String {
        let mut out =
            String::from("trial,seed,n,k,estimate,realized,gap_realized,gap_conditional\n");
        for t in &self.trials {
            out.push_str(&format!(
                "{},{},{},{},{:.11e},{:.11e},{:.11e},{}\n",
                t.trial,
                t.seed,
                self.n,
                self.k,
                t.estimate,
                t.realized,
                t.gap_realized,
                t.gap_conditional
                    .map(|g| format!("{g:.11e}"))
                    .unwrap_or_default()
            ));
        }
        out
    }
}

/// Runs `trials` independent `(x, z)` draws of length `n` and records the
/// estimator gaps and exceedance frequencies at threshold `delta`.
pub fn concentration_experiment(
    pair: &SourceChannelPair,
    f: &WindowedDenoiser,
    loss: &LossMatrix,
    n: usize,
    trials: usize,
    delta: f64,
    seed: u64,
) -> Result<ConcentrationReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is needed".into(),
        ));
    }
    let k = f.k();
    if n <= 2 * k {
        return Err(Error::SequenceTooShort { n, k });
    }
    let iid = matches!(pair.source, SourceModel::Iid { .. });
    let mut rows = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = derived_seed(seed, trial as u64);
            let (x, z) = pair.sample(n, s);
            let q = empirical_joint(&z, pair.channel.alphabet(), k)?.joint();
            let estimate = g_k_expected_loss_raw(&q, &pair.channel, f, loss)?;
            let realized = realized_loss(&x, &z, f, loss)?;
            let gap_conditional = if iid {
                Some((estimate - conditional_expected_loss(pair, &z, f, loss)?).abs())
            } else {
                None
            };
            Ok(TrialGap {
                trial,
                seed: s,
                estimate,
                realized,
                gap_realized: (estimate - realized).abs(),
                gap_conditional,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|t| t.trial);
    let count = rows.len() as f64;
    let exceed_realized = rows.iter().filter(|t| t.gap_realized > delta).count() as f64 / count;
    let exceed_conditional = iid.then(|| {
        rows.iter()
            .filter(|t| t.gap_conditional.is_some_and(|g| g > delta))
            .count() as f64
            / count
    });
    let inv = pair.channel.inv_norm();
    Ok(ConcentrationReport {
        n,
        k,
        delta,
        trials: rows,
        exceed_realized,
        exceed_conditional,
        lemma1: lemma1_bound(n as u64, k, delta, loss, inv),
        lemma2: lemma2_bound(n as u64, k, delta, loss, inv),
    })
}
