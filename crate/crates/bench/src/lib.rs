//! Benchmark fixtures. The benchmarks themselves live in `benches/`.

use mmdude_core::{bsc, ChannelSet, ProbVector, SourceChannelPair, SourceModel, Symbol};

/// Noisy output of a Bernoulli(.1875) source through a BSC(.1).
pub fn binary_noisy(n: usize, seed: u64) -> Vec<Symbol> {
    let pair = SourceChannelPair::new(
        SourceModel::iid(ProbVector::bernoulli(0.1875).expect("valid rate")).expect("valid source"),
        bsc(0.1).expect("valid channel"),
    )
    .expect("matching alphabets");
    pair.sample(n, seed).1
}

/// Crossover grid `{.02, .04, .., 2·size/100}`.
pub fn bsc_grid(size: usize) -> ChannelSet {
    let deltas: Vec<f64> = (1..=size).map(|i| 0.02 * i as f64).collect();
    ChannelSet::bsc_set(&deltas).expect("crossovers below one half")
}
