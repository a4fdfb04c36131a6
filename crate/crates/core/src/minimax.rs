//! Expected-loss functionals of a sliding-window denoiser under a known
//! channel, their worst case over a channel set, and the minimax denoiser.
//!
//! For a context with center law `q` and channel `Π`, the input posterior is
//! `u = Π^{-T} q` and the joint law of `(X_0, Z_0)` given the context is
//! `u_x Π(x, z)`. The denoiser slice row `z` is the reconstruction law when
//! the observed center is `z`, so the context loss is
//! `Σ_{x,z} u_x Π(x,z) Σ_a Λ(x,a) f(z)[a]`.
//!
//! Everything is linear in the denoiser table, so the minimax problem
//! `min_f max_Π G_k(Q, Π, f)` is a linear program over a product of
//! simplices (see [`minimax_over_tables`]).

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::{
    Channel, ChannelSet, JointDistribution, LossMatrix, ProbVector, WindowedDenoiser,
};
use crate::window::WindowShape;

/// Input posterior `Π^{-T} q` with negative entries clamped to zero and the
/// result renormalized. Exact laws are left untouched.
pub fn clamped_posterior(ch: &Channel, q_center: &[f64]) -> Vec<f64> {
    let mut u = ch.apply_inverse_transpose(q_center);
    if u.iter().any(|&v| v < 0.0) {
        u.iter_mut().for_each(|v| *v = v.max(0.0));
        let s: f64 = u.iter().sum();
        if s > 0.0 {
            u.iter_mut().for_each(|v| *v /= s);
        } else {
            let m = u.len() as f64;
            u.iter_mut().for_each(|v| *v = 1.0 / m);
        }
    }
    u
}

fn check_sizes(q: usize, ch: &Channel, loss: &LossMatrix) -> Result<()> {
    if q != ch.size() || loss.size() != ch.size() {
        return Err(Error::DimensionMismatch(format!(
            "law over {q} symbols, channel over {}, loss over {}",
            ch.size(),
            loss.size()
        )));
    }
    Ok(())
}

fn context_loss_with(u: &[f64], ch: &Channel, slice: &[ProbVector], loss: &LossMatrix) -> f64 {
    let m = ch.size();
    let mut total = 0.0;
    for (z, row) in slice.iter().enumerate() {
        for x in 0..m {
            let joint = u[x] * ch.get(x, z);
            if joint == 0.0 {
                continue;
            }
            let expected: f64 = (0..m).map(|a| loss.get(x, a) * row[a]).sum();
            total += joint * expected;
        }
    }
    total
}

fn check_slice(m: usize, slice: &[ProbVector]) -> Result<()> {
    if slice.len() != m || slice.iter().any(|r| r.len() != m) {
        return Err(Error::DimensionMismatch(format!(
            "denoiser slice must be {m} rows of length {m}"
        )));
    }
    Ok(())
}

/// Expected loss of a denoiser slice within one context, using the clamped
/// input posterior.
pub fn f_k_context_loss(
    q_center: &ProbVector,
    ch: &Channel,
    slice: &[ProbVector],
    loss: &LossMatrix,
) -> Result<f64> {
    check_sizes(q_center.len(), ch, loss)?;
    check_slice(ch.size(), slice)?;
    let u = clamped_posterior(ch, q_center.as_slice());
    Ok(context_loss_with(&u, ch, slice, loss))
}

/// Same as [`f_k_context_loss`] but with the raw (unclamped) posterior
/// `Π^{-T} q`. This is the linear estimator whose concentration the bound
/// calculators describe.
pub fn f_k_context_loss_raw(
    q_center: &ProbVector,
    ch: &Channel,
    slice: &[ProbVector],
    loss: &LossMatrix,
) -> Result<f64> {
    check_sizes(q_center.len(), ch, loss)?;
    check_slice(ch.size(), slice)?;
    let u = ch.apply_inverse_transpose(q_center.as_slice());
    Ok(context_loss_with(&u, ch, slice, loss))
}

fn check_denoiser(q: &JointDistribution, f: &WindowedDenoiser) -> Result<WindowShape> {
    let shape = q.window_shape()?;
    if shape != f.shape() {
        return Err(Error::DimensionMismatch(format!(
            "law of order {} and denoiser of order {}",
            q.order(),
            f.shape().width()
        )));
    }
    Ok(shape)
}

fn g_k_with(
    q: &JointDistribution,
    ch: &Channel,
    f: &WindowedDenoiser,
    loss: &LossMatrix,
    clamp: bool,
) -> Result<f64> {
    let shape = check_denoiser(q, f)?;
    check_sizes(shape.alphabet_size(), ch, loss)?;
    let weights = q.context_weights()?;
    let mut total = 0.0;
    for (ctx, &w) in weights.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let cond = q.conditional_center(ctx)?;
        let slice = f.slice(ctx);
        let value = if clamp {
            f_k_context_loss(&cond, ch, &slice, loss)?
        } else {
            f_k_context_loss_raw(&cond, ch, &slice, loss)?
        };
        total += w * value;
    }
    Ok(total)
}

/// Context-weighted expected loss `G_k(Q, Π, f)`.
pub fn g_k_expected_loss(
    q: &JointDistribution,
    ch: &Channel,
    f: &WindowedDenoiser,
    loss: &LossMatrix,
) -> Result<f64> {
    g_k_with(q, ch, f, loss, true)
}

/// `G_k` with the raw posterior; see [`f_k_context_loss_raw`].
pub fn g_k_expected_loss_raw(
    q: &JointDistribution,
    ch: &Channel,
    f: &WindowedDenoiser,
    loss: &LossMatrix,
) -> Result<f64> {
    g_k_with(q, ch, f, loss, false)
}

/// Worst case of `G_k` over `delta`; ties go to the lowest index.
pub fn j_k_worst_case(
    q: &JointDistribution,
    delta: &ChannelSet,
    f: &WindowedDenoiser,
    loss: &LossMatrix,
) -> Result<(f64, usize)> {
    if delta.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (i, ch) in delta.channels().iter().enumerate() {
        let g = g_k_expected_loss(q, ch, f, loss)?;
        if g > best.0 {
            best = (g, i);
        }
    }
    Ok(best)
}

/// Linear loss functional over denoiser tables: `value(f) = Σ_{w,a} c[w][a] f(w)[a]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LossTable {
    shape: WindowShape,
    coeffs: Vec<f64>,
}

impl LossTable {
    pub fn new(shape: WindowShape, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != shape.window_count() * shape.alphabet_size() {
            return Err(Error::DimensionMismatch("loss table size".into()));
        }
        Ok(LossTable { shape, coeffs })
    }

    pub fn shape(&self) -> WindowShape {
        self.shape
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn row(&self, w: usize) -> &[f64] {
        let m = self.shape.alphabet_size();
        &self.coeffs[w * m..(w + 1) * m]
    }

    pub fn evaluate(&self, f: &WindowedDenoiser) -> Result<f64> {
        if f.shape() != self.shape {
            return Err(Error::DimensionMismatch("denoiser shape".into()));
        }
        Ok(self.coeffs.iter().zip(f.table()).map(|(c, p)| c * p).sum())
    }
}

/// Per-window conditional loss of each reconstruction, `Σ_x u_x Π(x,z) Λ(x,a)`,
/// before weighting by the context probability.
fn conditional_table(q: &JointDistribution, ch: &Channel, loss: &LossMatrix) -> Result<Vec<f64>> {
    let shape = q.window_shape()?;
    check_sizes(shape.alphabet_size(), ch, loss)?;
    let m = shape.alphabet_size();
    let mut out = vec![0.0; shape.window_count() * m];
    for ctx in 0..shape.context_count() {
        let cond = q.conditional_center(ctx)?;
        let u = clamped_posterior(ch, cond.as_slice());
        for z in 0..m {
            let w = shape.join(ctx, z);
            for a in 0..m {
                out[w * m + a] = (0..m).map(|x| u[x] * ch.get(x, z) * loss.get(x, a)).sum();
            }
        }
    }
    Ok(out)
}

/// `G_k(Q, Π, ·)` as a linear table.
pub fn expected_loss_table(
    q: &JointDistribution,
    ch: &Channel,
    loss: &LossMatrix,
) -> Result<LossTable> {
    let shape = q.window_shape()?;
    let m = shape.alphabet_size();
    let weights = q.context_weights()?;
    let mut coeffs = conditional_table(q, ch, loss)?;
    for (w, row) in coeffs.chunks_mut(m).enumerate() {
        let cw = weights[shape.split(w).0];
        row.iter_mut().for_each(|c| *c *= cw);
    }
    LossTable::new(shape, coeffs)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SolverStatus {
    Optimal,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub status: SolverStatus,
    pub lp_variables: usize,
    pub lp_constraints: usize,
    /// LP objective before the denoiser was re-evaluated.
    pub lp_objective: f64,
}

/// Outcome of a minimax solve.
#[derive(Clone, Debug)]
pub struct MinimaxSolution {
    pub denoiser: WindowedDenoiser,
    /// `max_j table_j(denoiser)`, recomputed from the returned denoiser.
    pub value: f64,
    /// Indices attaining the max within `1e-9`.
    pub active: Vec<usize>,
    pub diagnostics: SolverDiagnostics,
}

/// Tolerance for reporting a channel as attaining the worst case.
pub const ACTIVE_TOL: f64 = 1e-9;

/// Solves `min_f max_j table_j(f)` over all denoisers of the tables' shape.
///
/// Windows on which every table has an all-zero row do not affect any value
/// and receive the uniform distribution.
pub fn minimax_over_tables(tables: &[LossTable]) -> Result<MinimaxSolution> {
    let first = tables.first().ok_or(Error::EmptySet)?;
    let shape = first.shape();
    if tables.iter().any(|t| t.shape() != shape) {
        return Err(Error::DimensionMismatch(
            "loss tables of different shapes".into(),
        ));
    }
    let m = shape.alphabet_size();
    let live: Vec<usize> = (0..shape.window_count())
        .filter(|&w| tables.iter().any(|t| t.row(w).iter().any(|&c| c != 0.0)))
        .collect();
    let nvars = live.len() * m + 1;
    let t_var = nvars - 1;
    let mut objective = vec![0.0; nvars];
    objective[t_var] = 1.0;
    let mut lp = LinearProgram::new(objective);
    for table in tables {
        let mut row = vec![0.0; nvars];
        for (i, &w) in live.iter().enumerate() {
            row[i * m..(i + 1) * m].copy_from_slice(table.row(w));
        }
        row[t_var] = -1.0;
        lp.add_constraint(row, Relation::LessEq, 0.0);
    }
    for i in 0..live.len() {
        let mut row = vec![0.0; nvars];
        row[i * m..(i + 1) * m].iter_mut().for_each(|v| *v = 1.0);
        lp.add_constraint(row, Relation::Equal, 1.0);
    }
    let solution = lp
        .solve()
        .map_err(|e| Error::SolverFailure(e.to_string()))?;

    let mut flat: Vec<f64> = vec![1.0 / m as f64; shape.window_count() * m];
    for (i, &w) in live.iter().enumerate() {
        let raw = &solution.x[i * m..(i + 1) * m];
        let s: f64 = raw.iter().map(|v| v.max(0.0)).sum();
        for a in 0..m {
            flat[w * m + a] = raw[a].max(0.0) / s;
        }
    }
    let denoiser = WindowedDenoiser::from_flat(shape, flat)?;
    let values = tables
        .iter()
        .map(|t| t.evaluate(&denoiser))
        .collect::<Result<Vec<_>>>()?;
    let value = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let active = values
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= value - ACTIVE_TOL)
        .map(|(i, _)| i)
        .collect();
    Ok(MinimaxSolution {
        denoiser,
        value,
        active,
        diagnostics: SolverDiagnostics {
            iterations: solution.iterations,
            status: SolverStatus::Optimal,
            lp_variables: lp.num_vars(),
            lp_constraints: lp.num_constraints(),
            lp_objective: solution.objective,
        },
    })
}

/// The minimax sliding-window denoiser of order `k` for output law `q` and
/// channel set `delta`.
pub fn solve_minimax(
    q: &JointDistribution,
    delta: &ChannelSet,
    k: usize,
    loss: &LossMatrix,
) -> Result<MinimaxSolution> {
    if delta.is_empty() {
        return Err(Error::EmptySet);
    }
    if q.order() != 2 * k + 1 {
        return Err(Error::DimensionMismatch(format!(
            "law of order {} for window order {k}",
            q.order()
        )));
    }
    let tables = delta
        .channels()
        .iter()
        .map(|ch| expected_loss_table(q, ch, loss))
        .collect::<Result<Vec<_>>>()?;
    minimax_over_tables(&tables)
}

/// Known-channel baseline: in every window pick the reconstruction with the
/// smallest posterior expected loss, lowest symbol on ties.
pub fn dude_rule(
    q: &JointDistribution,
    ch: &Channel,
    k: usize,
    loss: &LossMatrix,
) -> Result<WindowedDenoiser> {
    if q.order() != 2 * k + 1 {
        return Err(Error::DimensionMismatch(format!(
            "law of order {} for window order {k}",
            q.order()
        )));
    }
    let shape = q.window_shape()?;
    let m = shape.alphabet_size();
    let table = conditional_table(q, ch, loss)?;
    let rule: Vec<usize> = table
        .chunks(m)
        .map(|row| {
            let mut best = 0;
            for a in 1..m {
                if row[a] < row[best] {
                    best = a;
                }
            }
            best
        })
        .collect();
    WindowedDenoiser::deterministic(shape, &rule)
}
