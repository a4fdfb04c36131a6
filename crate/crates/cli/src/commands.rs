//! The subcommands. Each is a pure function of its config, input files and
//! seed, and writes its outputs under the output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use mmdude_core::empirical::empirical_joint;
use mmdude_core::evaluation::bounds::{lemma1_bound, lemma2_bound, lemma4_bound};
use mmdude_core::evaluation::{reconstruction_loss, EvalReport};
use mmdude_core::feasibility::{default_slack, induced_input, trim_law, TrimmedSet};
use mmdude_core::minimax::{g_k_expected_loss, j_k_worst_case, solve_minimax};
use mmdude_core::model::{ChannelSet, JointDistribution, LossMatrix, ProbVector, WindowedDenoiser};
use mmdude_core::oracle::grid_minimax_binary_k0;
use mmdude_core::pipeline::{denoise, denoise_with_laws, DenoiseResult, Reconstruction};
use mmdude_core::source::{SourceChannelPair, SourceModel};
use mmdude_core::{bsc, hamming_loss, WindowShape};
use serde_json::json;

use crate::config::{Experiment, ExperimentConfig, Overrides};
use crate::error::{CliError, CliResult};
use crate::io::{
    distributions_csv, fmt_float, read_sequence, write_file, write_sequence, SequenceFormat,
};

/// Options shared by every subcommand.
#[derive(Clone, Debug)]
pub struct Globals {
    pub config: Option<PathBuf>,
    pub out: PathBuf,
    pub overrides: Overrides,
    pub format: SequenceFormat,
    /// Fill the wall-time column; off by default so outputs are
    /// reproducible byte for byte.
    pub timing: bool,
}

impl Default for Globals {
    fn default() -> Self {
        Globals {
            config: None,
            out: PathBuf::from("out"),
            overrides: Overrides::default(),
            format: SequenceFormat::Text,
            timing: false,
        }
    }
}

impl Globals {
    fn load(&self) -> CliResult<ExperimentConfig> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("this command needs --config".into()))?;
        Ok(ExperimentConfig::load(path)?.apply(&self.overrides))
    }

    fn load_or_example(&self) -> CliResult<ExperimentConfig> {
        match &self.config {
            Some(_) => self.load(),
            None => Ok(ExperimentConfig::example1().apply(&self.overrides)),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn seq_name(&self, stem: &str) -> String {
        match self.format {
            SequenceFormat::Text => format!("{stem}.txt"),
            SequenceFormat::Binary => format!("{stem}.bin"),
        }
    }
}

fn manifest(config: &ExperimentConfig, outputs: serde_json::Value) -> String {
    let doc = json!({ "config": config, "outputs": outputs });
    serde_json::to_string_pretty(&doc).expect("manifest serializes") + "\n"
}

/// Paths written by `simulate`.
#[derive(Clone, Debug)]
pub struct SimulateOutput {
    pub clean: PathBuf,
    pub noisy: PathBuf,
    pub manifest: PathBuf,
}

pub fn cmd_simulate(g: &Globals) -> CliResult<SimulateOutput> {
    let exp = g.load()?.resolve()?;
    let (x, z) = exp.pair.sample(exp.config.n, exp.config.seed);
    let out = SimulateOutput {
        clean: g.path(&g.seq_name("clean")),
        noisy: g.path(&g.seq_name("noisy")),
        manifest: g.path("manifest.json"),
    };
    write_sequence(&out.clean, &x, g.format)?;
    write_sequence(&out.noisy, &z, g.format)?;
    write_file(
        &out.manifest,
        manifest(
            &exp.config,
            json!({ "clean": g.seq_name("clean"), "noisy": g.seq_name("noisy") }),
        ),
    )?;
    Ok(out)
}

fn run_pipeline(exp: &Experiment, z: &[u8]) -> CliResult<(DenoiseResult, f64)> {
    let cfg = exp.pipeline_config();
    if exp.config.exact_law {
        let q_k = exp.pair.output_law(2 * exp.k + 1)?;
        let q_l = exp.pair.output_law(2 * exp.l + 1)?;
        let eps = exp.config.feas_eps.unwrap_or(1e-9);
        Ok((
            denoise_with_laws(z, &exp.delta, &cfg, &q_k, &q_l, eps)?,
            eps,
        ))
    } else {
        let r = denoise(z, &exp.delta, &cfg)?;
        let eps = r.trim.as_ref().map_or(0.0, |t| t.eps);
        Ok((r, eps))
    }
}

/// Paths written by `denoise`, plus the solver value.
#[derive(Clone, Debug)]
pub struct DenoiseOutput {
    pub reconstruction: PathBuf,
    pub denoiser: PathBuf,
    pub summary: PathBuf,
    pub value: f64,
    pub k: usize,
}

pub fn cmd_denoise(g: &Globals, noisy: &Path) -> CliResult<DenoiseOutput> {
    let exp = g.load()?.resolve()?;
    eprintln!("window order k = {}, trimming order l = {}", exp.k, exp.l);
    let z = read_sequence(noisy, g.format, exp.alphabet)?;
    if z.len() <= 2 * exp.k.max(exp.l) {
        return Err(CliError::Config(format!(
            "noisy sequence of length {} is too short for k = {}, l = {}",
            z.len(),
            exp.k,
            exp.l
        )));
    }
    let (result, eps) = run_pipeline(&exp, &z)?;
    let reconstruction = match &result.reconstruction {
        Reconstruction::Symbols(s) => {
            let p = g.path(&g.seq_name("reconstruction"));
            write_sequence(&p, s, g.format)?;
            p
        }
        Reconstruction::Distributions(d) => {
            let p = g.path("reconstruction.csv");
            write_file(&p, distributions_csv(d))?;
            p
        }
    };
    let denoiser = g.path("denoiser.json");
    write_file(&denoiser, result.solution.denoiser.to_json())?;
    let mut summary: serde_json::Value =
        serde_json::from_str(&result.summary_json()).expect("summary is JSON");
    summary["id"] = json!(exp.config.id);
    summary["n"] = json!(z.len());
    summary["feas_eps"] = json!(eps);
    summary["exact_law"] = json!(exp.config.exact_law);
    summary["apply_mode"] = json!(exp.config.apply_mode);
    let summary_path = g.path("summary.json");
    write_file(
        &summary_path,
        serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
    )?;
    Ok(DenoiseOutput {
        reconstruction,
        denoiser,
        summary: summary_path,
        value: result.solution.value,
        k: exp.k,
    })
}

/// Clean-source models consistent with the configured output law, one per
/// channel of the uncertainty set that can produce it.
///
/// For iid sources the induced input law is exact. For Markov sources the
/// output process is generally not Markov after inversion, so the pair law
/// of consecutive symbols is inverted and read as a first-order chain.
pub fn feasible_pairs(exp: &Experiment) -> CliResult<(Vec<SourceChannelPair>, Vec<String>)> {
    let order = match exp.pair.source {
        SourceModel::Iid { .. } => 1,
        SourceModel::Markov { .. } => 2,
    };
    let law = exp.pair.output_law(order)?;
    let m = exp.alphabet.size();
    let mut pairs = Vec::new();
    let mut labels = Vec::new();
    for (ch, label) in exp.delta.channels().iter().zip(exp.delta.labels()) {
        let mut p = induced_input(ch, &law)?;
        if p.iter().any(|&v| v < -1e-9) {
            continue;
        }
        p.iter_mut().for_each(|v| *v = v.max(0.0));
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        let source = if order == 1 {
            SourceModel::iid(ProbVector::new(p)?)?
        } else {
            let marginal: Vec<f64> = p.chunks(m).map(|r| r.iter().sum()).collect();
            let transition = p
                .chunks(m)
                .map(|r| {
                    let s: f64 = r.iter().sum();
                    if s > 0.0 {
                        r.iter().map(|v| v / s).collect()
                    } else {
                        vec![1.0 / m as f64; m]
                    }
                })
                .collect();
            SourceModel::markov(transition, ProbVector::new(marginal)?)?
        };
        pairs.push(SourceChannelPair::new(source, ch.clone())?);
        labels.push(label.clone());
    }
    if pairs.is_empty() {
        return Err(CliError::Config(
            "no channel of the uncertainty set is consistent with the configured source and channel".into(),
        ));
    }
    Ok((pairs, labels))
}

pub const RESULT_HEADER: &str =
    "experiment,n,k,l,denoiser,realized_loss,worst_case,benchmark_mu,regret,solver_value,wall_time";

/// One line of the evaluation CSV.
#[derive(Clone, Debug)]
pub struct ResultRow {
    pub experiment: String,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub denoiser: String,
    pub realized_loss: f64,
    pub worst_case: Option<f64>,
    pub benchmark_mu: Option<f64>,
    pub solver_value: Option<f64>,
    pub wall_time: Option<f64>,
}

impl ResultRow {
    pub fn regret(&self) -> Option<f64> {
        Some(self.worst_case? - self.benchmark_mu?)
    }

    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            self.experiment,
            self.n,
            self.k,
            self.l,
            self.denoiser,
            fmt_float(self.realized_loss),
            opt(self.worst_case),
            opt(self.benchmark_mu),
            opt(self.regret()),
            opt(self.solver_value),
            self.wall_time
                .map(|t| format!("{t:.6}"))
                .unwrap_or_default()
        )
    }
}

/// Resolves a denoiser argument: a JSON file, `@identity`, `@constant:S`, or
/// `@minimax` (solved from the noisy data with the configured pipeline).
fn resolve_denoiser(
    spec: &str,
    exp: &Experiment,
    z: &[u8],
) -> CliResult<(String, WindowedDenoiser, Option<f64>)> {
    let shape = WindowShape::new(exp.alphabet, exp.k);
    if spec == "@identity" {
        return Ok((
            "identity".into(),
            WindowedDenoiser::say_what_you_see(shape),
            None,
        ));
    }
    if let Some(s) = spec.strip_prefix("@constant:") {
        let symbol: usize = s
            .parse()
            .map_err(|_| CliError::Config(format!("bad constant denoiser {spec:?}")))?;
        let f = WindowedDenoiser::say_constant(shape, symbol)
            .map_err(|e| CliError::Config(e.to_string()))?;
        return Ok((format!("constant{symbol}"), f, None));
    }
    if spec == "@minimax" {
        let (r, _) = run_pipeline(exp, z)?;
        return Ok((
            "minimax".into(),
            r.solution.denoiser,
            Some(r.solution.value),
        ));
    }
    if spec.starts_with('@') {
        return Err(CliError::Config(format!(
            "unknown builtin denoiser {spec:?}"
        )));
    }
    let text = std::fs::read_to_string(spec).map_err(CliError::io(format!("reading {spec}")))?;
    let f =
        WindowedDenoiser::from_json(&text).map_err(|e| CliError::Config(format!("{spec}: {e}")))?;
    if f.shape().alphabet() != exp.alphabet {
        return Err(CliError::Config(format!(
            "{spec}: denoiser alphabet differs from the config"
        )));
    }
    let name = Path::new(spec)
        .file_stem()
        .map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
    Ok((name, f, None))
}

/// Evaluation of one or more denoisers on a clean/noisy pair of files.
#[derive(Clone, Debug)]
pub struct EvaluateOutput {
    pub rows: Vec<ResultRow>,
    pub reports: Vec<EvalReport>,
    pub csv: PathBuf,
}

pub fn evaluate_sequences(
    g: &Globals,
    exp: &Experiment,
    x: &[u8],
    z: &[u8],
    denoisers: &[String],
    reconstruction: Option<&[u8]>,
) -> CliResult<(Vec<ResultRow>, Vec<EvalReport>)> {
    if x.len() != z.len() {
        return Err(CliError::Config(format!(
            "clean and noisy sequences have lengths {} and {}",
            x.len(),
            z.len()
        )));
    }
    let (pairs, labels) = feasible_pairs(exp)?;
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut mu_cache: Vec<(usize, f64)> = Vec::new();
    for spec in denoisers {
        let start = Instant::now();
        let (name, f, solver_value) = resolve_denoiser(spec, exp, z)?;
        let k = f.k();
        let mut report = EvalReport::compute(x, z, &f, &pairs, &labels, &exp.loss)?;
        match mu_cache.iter().find(|(kk, _)| *kk == k) {
            Some(&(_, mu)) => {
                report.benchmark_mu = mu;
                report.regret = report.worst_case - mu;
            }
            None => mu_cache.push((k, report.benchmark_mu)),
        }
        rows.push(ResultRow {
            experiment: exp.config.id.clone(),
            n: z.len(),
            k,
            l: exp.l,
            denoiser: name,
            realized_loss: report.realized_loss,
            worst_case: Some(report.worst_case),
            benchmark_mu: Some(report.benchmark_mu),
            solver_value,
            wall_time: g.timing.then(|| start.elapsed().as_secs_f64()),
        });
        reports.push(report);
    }
    if let Some(xhat) = reconstruction {
        let start = Instant::now();
        rows.push(ResultRow {
            experiment: exp.config.id.clone(),
            n: z.len(),
            k: exp.k,
            l: exp.l,
            denoiser: "reconstruction".into(),
            realized_loss: reconstruction_loss(x, xhat, exp.k, &exp.loss)?,
            worst_case: None,
            benchmark_mu: None,
            solver_value: None,
            wall_time: g.timing.then(|| start.elapsed().as_secs_f64()),
        });
    }
    Ok((rows, reports))
}

pub fn cmd_evaluate(
    g: &Globals,
    clean: &Path,
    noisy: &Path,
    denoisers: &[String],
    reconstruction: Option<&Path>,
) -> CliResult<EvaluateOutput> {
    let exp = g.load()?.resolve()?;
    let x = read_sequence(clean, g.format, exp.alphabet)?;
    let z = read_sequence(noisy, g.format, exp.alphabet)?;
    let xhat = reconstruction
        .map(|p| read_sequence(p, g.format, exp.alphabet))
        .transpose()?;
    if denoisers.is_empty() && xhat.is_none() {
        return Err(CliError::Config(
            "nothing to evaluate: pass --denoiser or --reconstruction".into(),
        ));
    }
    let (rows, reports) = evaluate_sequences(g, &exp, &x, &z, denoisers, xhat.as_deref())?;
    let mut csv = String::from(RESULT_HEADER);
    csv.push('\n');
    rows.iter().for_each(|r| csv.push_str(&r.to_csv()));
    let csv_path = g.path("evaluation.csv");
    write_file(&csv_path, &csv)?;
    let detail = json!({
        "config": exp.config,
        "reports": reports,
    });
    write_file(
        g.path("evaluation.json"),
        serde_json::to_string_pretty(&detail).expect("report serializes") + "\n",
    )?;
    print!("{csv}");
    Ok(EvaluateOutput {
        rows,
        reports,
        csv: csv_path,
    })
}

/// One checked quantity of the worked example.
#[derive(Clone, Debug)]
pub struct CheckRow {
    pub quantity: &'static str,
    pub reference: f64,
    pub computed: f64,
    pub tolerance: f64,
}

impl CheckRow {
    pub fn pass(&self) -> bool {
        (self.computed - self.reference).abs() <= self.tolerance
    }
}

/// The worked binary example under its exact output law.
pub fn example1_rows() -> CliResult<Vec<CheckRow>> {
    let h = hamming_loss(2)?;
    let q = JointDistribution::product(&ProbVector::bernoulli(0.25)?, 1)?;
    let delta = ChannelSet::bsc_set(&[0.1, 0.2])?;
    let shape = q.window_shape()?;
    let f1 = WindowedDenoiser::say_what_you_see(shape);
    let f2 = WindowedDenoiser::say_constant(shape, 0)?;
    let alpha1 = induced_input(&bsc(0.1)?, &q)?[1];
    let alpha2 = induced_input(&bsc(0.2)?, &q)?[1];
    let (j1, _) = j_k_worst_case(&q, &delta, &f1, &h)?;
    let (j2, _) = j_k_worst_case(&q, &delta, &f2, &h)?;
    let sol = solve_minimax(&q, &delta, 0, &h)?;
    let gamma = sol.denoiser.row(1)[1];
    let (mixture, _) = j_k_worst_case(&q, &delta, &f1.mix(&f2, gamma)?, &h)?;
    let grid = grid_minimax_binary_k0(&ProbVector::bernoulli(0.25)?, &delta, &h, 1e-3)?;
    let row = |quantity, reference, computed, tolerance| CheckRow {
        quantity,
        reference,
        computed,
        tolerance,
    };
    Ok(vec![
        row("alpha_bsc0.1", 0.1875, alpha1, 1e-9),
        row("alpha_bsc0.2", 1.0 / 12.0, alpha2, 1e-9),
        row("worst_case_say_what_you_see", 0.2, j1, 1e-9),
        row("worst_case_all_zeros", 0.1875, j2, 1e-9),
        row("gamma_star", 0.5101, gamma, 0.02),
        row("d0", 0.0, sol.denoiser.row(0)[1], 1e-6),
        row("mixture_worst_case", 0.1428, mixture, 0.005),
        row("minimax_value", 0.1428, sol.value, 0.005),
        row("grid_minimax_value", 0.1428, grid.value, 0.005),
    ])
}

pub fn cmd_example1(g: &Globals) -> CliResult<Vec<CheckRow>> {
    let rows = example1_rows()?;
    let mut csv = String::from("quantity,reference,computed,tolerance,status\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{:e},{}\n",
            r.quantity,
            fmt_float(r.reference),
            fmt_float(r.computed),
            r.tolerance,
            if r.pass() { "PASS" } else { "FAIL" }
        ));
    }
    print!("{csv}");
    if g.config.is_some() || g.out != Globals::default().out {
        write_file(g.path("example1.csv"), &csv)?;
    }
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| !r.pass())
        .map(|r| r.quantity)
        .collect();
    if failed.is_empty() {
        println!("PASS");
        Ok(rows)
    } else {
        println!("FAIL");
        Err(CliError::Check(failed.join(", ")))
    }
}

/// Grid for the bound table.
#[derive(Clone, Debug)]
pub struct BoundsGrid {
    pub n: Vec<u64>,
    pub k: Vec<usize>,
    pub delta: Vec<f64>,
}

impl Default for BoundsGrid {
    fn default() -> Self {
        BoundsGrid {
            n: vec![1_000, 10_000, 100_000, 1_000_000],
            k: vec![0, 1],
            delta: vec![0.05, 0.1, 0.2],
        }
    }
}

pub fn bounds_csv(grid: &BoundsGrid, loss: &LossMatrix, inv_norm: f64, set_size: usize) -> String {
    let mut csv = String::from("n,k,delta,lemma1,lemma2,lemma4\n");
    for &k in &grid.k {
        for &delta in &grid.delta {
            for &n in &grid.n {
                csv.push_str(&format!(
                    "{n},{k},{delta},{},{},{}\n",
                    fmt_float(lemma1_bound(n, k, delta, loss, inv_norm)),
                    fmt_float(lemma2_bound(n, k, delta, loss, inv_norm)),
                    fmt_float(lemma4_bound(n, k, delta, loss, inv_norm, set_size)),
                ));
            }
        }
    }
    csv
}

pub fn cmd_bounds(g: &Globals, grid: &BoundsGrid) -> CliResult<String> {
    let exp = g.load_or_example()?.resolve()?;
    let csv = bounds_csv(grid, &exp.loss, exp.delta.max_inv_norm(), exp.delta.len());
    print!("{csv}");
    write_file(g.path("bounds.csv"), &csv)?;
    Ok(csv)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepAxis {
    Gamma,
    N,
    K,
}

/// Worst-case loss of `γ·(say what you see) + (1-γ)·(all zeros)` under the
/// exact single-letter output law, per channel.
pub fn gamma_sweep_csv(exp: &Experiment, gammas: &[f64]) -> CliResult<String> {
    let q = exp.pair.output_law(1)?;
    let shape = q.window_shape()?;
    let f1 = WindowedDenoiser::say_what_you_see(shape);
    let f0 = WindowedDenoiser::say_constant(shape, 0)?;
    let mut csv = String::from("gamma");
    for label in exp.delta.labels() {
        csv.push_str(&format!(",{label}"));
    }
    csv.push_str(",max_loss\n");
    for &gamma in gammas {
        let f = f1
            .mix(&f0, gamma)
            .map_err(|e| CliError::Config(e.to_string()))?;
        csv.push_str(&format!("{gamma}"));
        let mut worst = f64::NEG_INFINITY;
        for ch in exp.delta.channels() {
            let v = g_k_expected_loss(&q, ch, &f, &exp.loss)?;
            worst = worst.max(v);
            csv.push_str(&format!(",{}", fmt_float(v)));
        }
        csv.push_str(&format!(",{}\n", fmt_float(worst)));
    }
    Ok(csv)
}

pub fn cmd_sweep(g: &Globals, axis: SweepAxis, values: Option<&[f64]>) -> CliResult<String> {
    let base = g.load_or_example()?;
    let csv = match axis {
        SweepAxis::Gamma => {
            let gammas: Vec<f64> = match values {
                Some(v) => v.to_vec(),
                None => (0..=100).map(|i| i as f64 / 100.0).collect(),
            };
            gamma_sweep_csv(&base.resolve()?, &gammas)?
        }
        SweepAxis::N | SweepAxis::K => {
            let values: Vec<f64> = match (values, axis) {
                (Some(v), _) => v.to_vec(),
                (None, SweepAxis::N) => vec![1e3, 1e4, 1e5],
                (None, _) => vec![0.0, 1.0, 2.0],
            };
            let mut csv = String::from(RESULT_HEADER);
            csv.push('\n');
            for v in values {
                let mut cfg = base.clone();
                if axis == SweepAxis::N {
                    cfg.n = v as usize;
                } else {
                    cfg.k = crate::config::OrderSpec::Fixed(v as usize);
                    cfg.l = None;
                }
                let exp = cfg.resolve()?;
                let (x, z) = exp.pair.sample(exp.config.n, exp.config.seed);
                let (rows, _) =
                    evaluate_sequences(g, &exp, &x, &z, &["@minimax".to_string()], None)?;
                rows.iter().for_each(|r| csv.push_str(&r.to_csv()));
            }
            csv
        }
    };
    print!("{csv}");
    write_file(g.path("sweep.csv"), &csv)?;
    Ok(csv)
}

pub fn cmd_feasibility(g: &Globals, noisy: Option<&Path>) -> CliResult<TrimmedSet> {
    let exp = g.load()?.resolve()?;
    let trimmed = if exp.config.exact_law {
        let q = exp.pair.output_law(2 * exp.l + 1)?;
        trim_law(&exp.delta, &q, exp.config.feas_eps.unwrap_or(1e-9))?
    } else {
        let path = noisy.ok_or_else(|| {
            CliError::Config("feasibility needs a noisy sequence unless --exact-law is set".into())
        })?;
        let z = read_sequence(path, g.format, exp.alphabet)?;
        if z.len() <= 2 * exp.l {
            return Err(CliError::Config(
                "noisy sequence too short for the trimming order".into(),
            ));
        }
        let stats = empirical_joint(&z, exp.alphabet, exp.l)?;
        let eps = exp
            .config
            .feas_eps
            .unwrap_or_else(|| default_slack(exp.alphabet.size(), exp.l, stats.window_total()));
        trim_law(&exp.delta, &stats.joint(), eps)?
    };
    let report = trimmed.report_json() + "\n";
    print!("{report}");
    write_file(g.path("feasibility.json"), &report)?;
    Ok(trimmed)
}
