//! End-to-end block denoisers: estimate window statistics, optionally trim
//! the channel set to feasible channels, solve for the minimax rule, and
//! apply it to the noisy sequence.

use serde::{Deserialize, Serialize};

use crate::empirical::empirical_joint;
use crate::error::{Error, Result};
use crate::feasibility::{default_slack, trim_law, TrimmedSet};
use crate::minimax::{solve_minimax, MinimaxSolution, SolverDiagnostics};
use crate::model::{
    ChannelSet, JointDistribution, LossMatrix, ProbVector, Symbol, WindowedDenoiser,
};
use crate::source::{draw, par_positions, DENOISER_STREAM};

/// Window order suggested by the growth rate `ln n / (16 ln m)`.
pub fn default_window_order(n: f64, m: usize) -> usize {
    if !(n >= 2.0) || m < 2 {
        return 0;
    }
    // the small nudge keeps exact integer ratios such as n = m^16 from
    // rounding down
    let ratio = n.ln() / (16.0 * (m as f64).ln());
    (ratio + 1e-9).floor().max(0.0) as usize
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplyMode {
    /// Draw each reconstruction from the window's distribution.
    #[default]
    Sample,
    /// Most likely reconstruction, lowest symbol on ties.
    Map,
    /// Return the per-position distributions.
    Distribution,
}

/// How positions without a full window are reconstructed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgePolicy {
    #[default]
    CopyObserved,
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub k: usize,
    /// Trimming order; `None` means `k`.
    pub l: Option<usize>,
    /// Feasibility slack; `None` uses [`default_slack`].
    pub feas_eps: Option<f64>,
    pub loss: LossMatrix,
    pub edge_policy: EdgePolicy,
    pub apply_mode: ApplyMode,
    pub seed: u64,
}

impl PipelineConfig {
    pub fn new(k: usize, loss: LossMatrix) -> Self {
        PipelineConfig {
            k,
            l: None,
            feas_eps: None,
            loss,
            edge_policy: EdgePolicy::CopyObserved,
            apply_mode: ApplyMode::Sample,
            seed: 0,
        }
    }

    pub fn trim_order(&self) -> usize {
        self.l.unwrap_or(self.k)
    }
}

/// A reconstruction: symbols, or one distribution per position.
#[derive(Clone, Debug, PartialEq)]
pub enum Reconstruction {
    Symbols(Vec<Symbol>),
    Distributions(Vec<ProbVector>),
}

impl Reconstruction {
    pub fn len(&self) -> usize {
        match self {
            Reconstruction::Symbols(s) => s.len(),
            Reconstruction::Distributions(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn symbols(&self) -> Option<&[Symbol]> {
        match self {
            Reconstruction::Symbols(s) => Some(s),
            Reconstruction::Distributions(_) => None,
        }
    }

    pub fn distributions(&self) -> Option<&[ProbVector]> {
        match self {
            Reconstruction::Distributions(d) => Some(d),
            Reconstruction::Symbols(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DenoiseResult {
    pub reconstruction: Reconstruction,
    pub solution: MinimaxSolution,
    /// Absent when the set was taken as feasible without trimming.
    pub trim: Option<TrimmedSet>,
    /// Labels of the channels the solver optimized against.
    pub channels: Vec<String>,
    pub k: usize,
    pub l: Option<usize>,
}

#[derive(Serialize)]
struct Summary<'a> {
    k: usize,
    l: Option<usize>,
    value: f64,
    channels: &'a [String],
    active_channels: Vec<&'a str>,
    diagnostics: &'a SolverDiagnostics,
    trim: Option<&'a TrimmedSet>,
}

impl DenoiseResult {
    /// JSON summary: orders, solver value and diagnostics, and trim report.
    pub fn summary_json(&self) -> String {
        let summary = Summary {
            k: self.k,
            l: self.l,
            value: self.solution.value,
            channels: &self.channels,
            active_channels: self
                .solution
                .active
                .iter()
                .map(|&i| self.channels[i].as_str())
                .collect(),
            diagnostics: &self.solution.diagnostics,
            trim: self.trim.as_ref(),
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }
}

/// Applies `f` to every full window of `z`; edge positions copy `z`.
///
/// Sample mode draws position `t` from the `t`-th uniform of the denoiser
/// stream of `seed`, so the output does not depend on the thread count.
pub fn apply_denoiser(
    f: &WindowedDenoiser,
    z: &[Symbol],
    mode: ApplyMode,
    seed: u64,
) -> Result<Reconstruction> {
    let shape = f.shape();
    shape.alphabet().check_sequence(z)?;
    let (n, k, m) = (z.len(), shape.k(), shape.alphabet_size());
    if n <= 2 * k {
        return Err(Error::SequenceTooShort { n, k });
    }
    let windows = shape.window_indices(z)?;
    let inner = |t: usize| (k..n - k).contains(&t);
    Ok(match mode {
        ApplyMode::Distribution => Reconstruction::Distributions(
            (0..n)
                .map(|t| {
                    if inner(t) {
                        ProbVector::new(f.row(windows[t - k]).to_vec())
                            .expect("denoiser rows are distributions")
                    } else {
                        ProbVector::point_mass(m, z[t] as usize)
                    }
                })
                .collect(),
        ),
        ApplyMode::Map => Reconstruction::Symbols(
            (0..n)
                .map(|t| {
                    if inner(t) {
                        argmax(f.row(windows[t - k])) as Symbol
                    } else {
                        z[t]
                    }
                })
                .collect(),
        ),
        ApplyMode::Sample => {
            Reconstruction::Symbols(par_positions(seed, DENOISER_STREAM, n, |t, u| {
                if inner(t) {
                    draw(f.row(windows[t - k]), u) as Symbol
                } else {
                    z[t]
                }
            }))
        }
    })
}

fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (a, &p) in row.iter().enumerate() {
        if p > row[best] {
            best = a;
        }
    }
    best
}

fn check_length(z: &[Symbol], order: usize) -> Result<()> {
    if z.len() <= 2 * order {
        return Err(Error::SequenceTooShort {
            n: z.len(),
            k: order,
        });
    }
    Ok(())
}

fn finish(
    z: &[Symbol],
    delta: &ChannelSet,
    cfg: &PipelineConfig,
    q: &JointDistribution,
    trim: Option<TrimmedSet>,
) -> Result<DenoiseResult> {
    let solution = solve_minimax(q, delta, cfg.k, &cfg.loss)?;
    let reconstruction = apply_denoiser(&solution.denoiser, z, cfg.apply_mode, cfg.seed)?;
    Ok(DenoiseResult {
        reconstruction,
        solution,
        channels: delta.labels().to_vec(),
        l: trim.as_ref().map(|t| t.order),
        trim,
        k: cfg.k,
    })
}

/// Minimax denoising when every channel of `delta` is known to be feasible.
pub fn denoise_feasible(
    z: &[Symbol],
    delta: &ChannelSet,
    cfg: &PipelineConfig,
) -> Result<DenoiseResult> {
    check_length(z, cfg.k)?;
    let stats = empirical_joint(z, delta.alphabet(), cfg.k)?;
    finish(z, delta, cfg, &stats.joint(), None)
}

/// Trims `delta` at order `l` against the empirical law of `z`, then
/// denoises against the survivors.
pub fn denoise(z: &[Symbol], delta: &ChannelSet, cfg: &PipelineConfig) -> Result<DenoiseResult> {
    let l = cfg.trim_order();
    check_length(z, cfg.k.max(l))?;
    let q_l = empirical_joint(z, delta.alphabet(), l)?;
    let eps = cfg
        .feas_eps
        .unwrap_or_else(|| default_slack(delta.alphabet().size(), l, q_l.window_total()));
    let q_k = if l == cfg.k {
        q_l.joint()
    } else {
        empirical_joint(z, delta.alphabet(), cfg.k)?.joint()
    };
    denoise_with_laws(z, delta, cfg, &q_k, &q_l.joint(), eps)
}

/// [`denoise`] with the window laws supplied by the caller (for example the
/// exact output law instead of its empirical estimate).
pub fn denoise_with_laws(
    z: &[Symbol],
    delta: &ChannelSet,
    cfg: &PipelineConfig,
    q_k: &JointDistribution,
    q_l: &JointDistribution,
    eps: f64,
) -> Result<DenoiseResult> {
    check_length(z, cfg.k.max(cfg.trim_order()))?;
    let trimmed = trim_law(delta, q_l, eps)?;
    let survivors = trimmed.survivors.clone();
    finish(z, &survivors, cfg, q_k, Some(trimmed))
}

/// [`denoise_feasible`] with a caller-supplied window law.
pub fn denoise_feasible_with_law(
    z: &[Symbol],
    delta: &ChannelSet,
    cfg: &PipelineConfig,
    q_k: &JointDistribution,
) -> Result<DenoiseResult> {
    check_length(z, cfg.k)?;
    finish(z, delta, cfg, q_k, None)
}
