//! Experiment configuration: a single JSON document, validated and resolved
//! (for example `"k": "auto"`) before anything runs.

use std::path::Path;

use mmdude_core::feasibility::bsc_cover;
use mmdude_core::model::{Alphabet, Channel, ChannelSet, LossMatrix, ProbVector};
use mmdude_core::pipeline::{default_window_order, ApplyMode, PipelineConfig};
use mmdude_core::source::{SourceChannelPair, SourceModel};
use mmdude_core::{bsc, hamming_loss};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceSpec {
    Iid {
        probs: Vec<f64>,
    },
    Bernoulli {
        p: f64,
    },
    /// `initial` defaults to the stationary law.
    Markov {
        transition: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<Vec<f64>>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelSpec {
    Identity,
    Bsc(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub eta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintySpec {
    Channels(Vec<ChannelSpec>),
    BscInterval(Interval),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrderSpec {
    Fixed(usize),
    Named(String),
}

impl Default for OrderSpec {
    fn default() -> Self {
        OrderSpec::Named("auto".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LossSpec {
    Named(String),
    Matrix { matrix: Vec<Vec<f64>> },
}

impl Default for LossSpec {
    fn default() -> Self {
        LossSpec::Named("hamming".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_id")]
    pub id: String,
    pub alphabet: usize,
    pub source: SourceSpec,
    pub channel: ChannelSpec,
    pub uncertainty: UncertaintySpec,
    pub n: usize,
    #[serde(default)]
    pub k: OrderSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feas_eps: Option<f64>,
    #[serde(default)]
    pub loss: LossSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub apply_mode: ApplyMode,
    #[serde(default)]
    pub exact_law: bool,
}

fn default_id() -> String {
    "run".into()
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub feas_eps: Option<f64>,
    pub exact_law: bool,
}

/// A validated experiment with every default resolved.
#[derive(Clone, Debug)]
pub struct Experiment {
    /// The config with `k` and `l` made explicit; this is what manifests
    /// record.
    pub config: ExperimentConfig,
    pub alphabet: Alphabet,
    pub pair: SourceChannelPair,
    pub delta: ChannelSet,
    pub loss: LossMatrix,
    pub k: usize,
    pub l: usize,
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn build_channel(spec: &ChannelSpec, alphabet: Alphabet) -> CliResult<Channel> {
    let ch = match spec {
        ChannelSpec::Identity => Channel::identity(alphabet),
        ChannelSpec::Bsc(d) => bsc(*d).map_err(invalid)?,
        ChannelSpec::Matrix(rows) => Channel::new(rows).map_err(invalid)?,
    };
    if ch.alphabet() != alphabet {
        return Err(CliError::Config(format!(
            "channel over {} symbols in a {}-symbol experiment",
            ch.size(),
            alphabet.size()
        )));
    }
    Ok(ch)
}

fn channel_label(spec: &ChannelSpec, index: usize) -> String {
    match spec {
        ChannelSpec::Identity => "identity".into(),
        ChannelSpec::Bsc(d) => format!("BSC({d})"),
        ChannelSpec::Matrix(_) => format!("channel{index}"),
    }
}

fn build_source(spec: &SourceSpec) -> CliResult<SourceModel> {
    let source = match spec {
        SourceSpec::Iid { probs } => {
            SourceModel::iid(ProbVector::new(probs.clone()).map_err(invalid)?)
        }
        SourceSpec::Bernoulli { p } => {
            SourceModel::iid(ProbVector::bernoulli(*p).map_err(invalid)?)
        }
        SourceSpec::Markov {
            transition,
            initial: None,
        } => SourceModel::stationary_markov(transition.clone()),
        SourceSpec::Markov {
            transition,
            initial: Some(initial),
        } => SourceModel::markov(
            transition.clone(),
            ProbVector::new(initial.clone()).map_err(invalid)?,
        ),
    };
    source.map_err(invalid)
}

impl ExperimentConfig {
    /// Parses a config document, or the `config` member of a run manifest.
    pub fn from_json(text: &str) -> CliResult<Self> {
        let doc: serde_json::Value = serde_json::from_str(text).map_err(invalid)?;
        let doc = match doc.get("config") {
            Some(inner) if doc.get("outputs").is_some() => inner.clone(),
            _ => doc,
        };
        serde_json::from_value(doc).map_err(invalid)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn apply(mut self, o: &Overrides) -> Self {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(eps) = o.feas_eps {
            self.feas_eps = Some(eps);
        }
        self.exact_law |= o.exact_law;
        self
    }

    /// Validates and resolves the config.
    pub fn resolve(&self) -> CliResult<Experiment> {
        let alphabet = Alphabet::new(self.alphabet).map_err(invalid)?;
        let source = build_source(&self.source)?;
        if source.alphabet() != alphabet {
            return Err(CliError::Config(format!(
                "source over {} symbols in a {}-symbol experiment",
                source.alphabet().size(),
                alphabet.size()
            )));
        }
        let channel = build_channel(&self.channel, alphabet)?;
        let pair = SourceChannelPair::new(source, channel).map_err(invalid)?;
        let delta = match &self.uncertainty {
            UncertaintySpec::Channels(specs) => {
                let channels = specs
                    .iter()
                    .map(|s| build_channel(s, alphabet))
                    .collect::<CliResult<Vec<_>>>()?;
                let labels = specs
                    .iter()
                    .enumerate()
                    .map(|(i, s)| channel_label(s, i))
                    .collect();
                ChannelSet::with_labels(channels, labels).map_err(invalid)?
            }
            UncertaintySpec::BscInterval(iv) => {
                if alphabet.size() != 2 {
                    return Err(CliError::Config(
                        "a BSC interval needs a binary alphabet".into(),
                    ));
                }
                bsc_cover(iv.lo, iv.hi, iv.eta).map_err(invalid)?
            }
        };
        let loss = match &self.loss {
            LossSpec::Named(name) if name == "hamming" => {
                hamming_loss(alphabet.size()).map_err(invalid)?
            }
            LossSpec::Named(name) => {
                return Err(CliError::Config(format!("unknown loss \"{name}\"")))
            }
            LossSpec::Matrix { matrix } => LossMatrix::new(matrix).map_err(invalid)?,
        };
        if loss.size() != alphabet.size() {
            return Err(CliError::Config(
                "loss matrix size differs from the alphabet".into(),
            ));
        }
        let k = match &self.k {
            OrderSpec::Fixed(k) => *k,
            OrderSpec::Named(s) if s == "auto" => {
                default_window_order(self.n as f64, alphabet.size())
            }
            OrderSpec::Named(s) => {
                return Err(CliError::Config(format!(
                    "k must be an integer or \"auto\", got \"{s}\""
                )))
            }
        };
        let l = self.l.unwrap_or(k);
        if self.n <= 2 * k.max(l) {
            return Err(CliError::Config(format!(
                "n = {} is too short for k = {k}, l = {l}",
                self.n
            )));
        }
        if let Some(eps) = self.feas_eps {
            if !(eps >= 0.0) {
                return Err(CliError::Config(format!(
                    "feas_eps = {eps} must be nonnegative"
                )));
            }
        }
        let mut config = self.clone();
        config.k = OrderSpec::Fixed(k);
        config.l = Some(l);
        Ok(Experiment {
            config,
            alphabet,
            pair,
            delta,
            loss,
            k,
            l,
        })
    }

    /// The worked binary example: Bernoulli(.25) output through one of two
    /// BSCs, with the BSC(.1) reading as the truth.
    pub fn example1() -> Self {
        ExperimentConfig {
            id: "example1".into(),
            alphabet: 2,
            source: SourceSpec::Bernoulli { p: 0.1875 },
            channel: ChannelSpec::Bsc(0.1),
            uncertainty: UncertaintySpec::Channels(vec![
                ChannelSpec::Bsc(0.1),
                ChannelSpec::Bsc(0.2),
            ]),
            n: 100_000,
            k: OrderSpec::Fixed(0),
            l: None,
            feas_eps: None,
            loss: LossSpec::default(),
            seed: 7,
            apply_mode: ApplyMode::Sample,
            exact_law: false,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

impl Experiment {
    pub fn pipeline_config(&self) -> PipelineConfig {
        let mut cfg = PipelineConfig::new(self.k, self.loss.clone());
        cfg.l = Some(self.l);
        cfg.feas_eps = self.config.feas_eps;
        cfg.apply_mode = self.config.apply_mode;
        cfg.seed = self.config.seed;
        cfg
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DOC: &str = r#"{
        "alphabet": 2,
        "source": {"kind": "bernoulli", "p": 0.1875},
        "channel": {"bsc": 0.1},
        "uncertainty": {"channels": [{"bsc": 0.1}, {"bsc": 0.2}]},
        "n": 1000000,
        "k": "auto",
        "seed": 3
    }"#;

    #[test]
    fn auto_order_resolves() {
        let e = ExperimentConfig::from_json(DOC).unwrap().resolve().unwrap();
        assert_eq!((e.k, e.l), (1, 1));
        assert_eq!(e.config.k, OrderSpec::Fixed(1));
        assert_eq!(e.delta.labels(), &["BSC(0.1)", "BSC(0.2)"]);
    }

    #[test]
    fn manifest_round_trip() {
        let e = ExperimentConfig::from_json(DOC).unwrap().resolve().unwrap();
        let manifest = format!("{{\"config\": {}, \"outputs\": {{}}}}", e.config.to_json());
        let back = ExperimentConfig::from_json(&manifest).unwrap();
        assert_eq!(back, e.config);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = DOC.replace("\"auto\"", "\"soon\"");
        assert!(matches!(
            ExperimentConfig::from_json(&bad).unwrap().resolve(),
            Err(CliError::Config(_))
        ));
        let bad = DOC.replace("0.2}]", "0.5}]");
        assert!(ExperimentConfig::from_json(&bad)
            .unwrap()
            .resolve()
            .is_err());
        let bad = DOC.replace("\"seed\": 3", "\"seeed\": 3");
        assert!(ExperimentConfig::from_json(&bad).is_err());
        let bad = DOC.replace("1000000", "2").replace("\"auto\"", "1");
        assert!(ExperimentConfig::from_json(&bad)
            .unwrap()
            .resolve()
            .is_err());
    }

    #[test]
    fn interval_and_markov() {
        let doc = r#"{
            "alphabet": 2,
            "source": {"kind": "markov", "transition": [[0.9, 0.1], [0.3, 0.7]]},
            "channel": "identity",
            "uncertainty": {"bsc_interval": {"lo": 0.0, "hi": 0.2, "eta": 0.05}},
            "n": 500,
            "k": 1
        }"#;
        let e = ExperimentConfig::from_json(doc).unwrap().resolve().unwrap();
        assert_eq!(e.delta.len(), 5);
        assert_eq!(e.pair.source.alphabet().size(), 2);
    }
}
