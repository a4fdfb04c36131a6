mod common;

use mmdude_core::minimax::g_k_expected_loss;
use mmdude_core::oracle::exhaustive_expected_loss;
use mmdude_core::{
    bsc, conditional_expected_loss, empirical_joint, hamming_loss, l_inf_distance, Alphabet,
    ProbVector, SourceChannelPair, SourceModel,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// `P(X_t = x | z)` by summing over every clean sequence.
fn brute_posteriors(pair: &SourceChannelPair, z: &[u8]) -> Vec<f64> {
    let m = pair.channel.size();
    let n = z.len();
    let mut post = vec![0.0; n * m];
    let mut total = 0.0;
    for idx in 0..m.pow(n as u32) {
        let mut x = vec![0u8; n];
        let mut r = idx;
        for s in x.iter_mut().rev() {
            *s = (r % m) as u8;
            r /= m;
        }
        let mut p = match &pair.source {
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
        };
        for (a, b) in x.iter().zip(z) {
            p *= pair.channel.get(*a as usize, *b as usize);
        }
        total += p;
        for (t, &s) in x.iter().enumerate() {
            post[t * m + s as usize] += p;
        }
    }
    post.iter().map(|v| v / total).collect()
}

fn markov_pair(seed: u64, m: usize) -> SourceChannelPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let t = (0..m).map(|_| common::simplex(&mut rng, m)).collect();
    let ch = common::channel(&mut rng, m);
    SourceChannelPair::new(SourceModel::stationary_markov(t).unwrap(), ch).unwrap()
}

#[test]
fn forward_backward_matches_enumeration() {
    for seed in 0..20 {
        let m = 2 + (seed % 2) as usize;
        let pair = markov_pair(seed, m);
        let (_, z) = pair.sample(7, seed);
        let fb = pair.posteriors(&z).unwrap();
        let brute = brute_posteriors(&pair, &z);
        for (a, b) in fb.iter().zip(&brute) {
            assert!((a - b).abs() < 1e-12, "seed {seed}: {a} vs {b}");
        }
    }
}

#[test]
fn conditional_loss_matches_enumeration() {
    let h = hamming_loss(2).unwrap();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let k = (seed % 2) as usize;
        let pair = if seed < 5 {
            SourceChannelPair::new(
                SourceModel::iid(ProbVector::new(common::simplex(&mut rng, 2)).unwrap()).unwrap(),
                common::channel(&mut rng, 2),
            )
            .unwrap()
        } else {
            markov_pair(seed, 2)
        };
        let f = common::denoiser(&mut rng, 2, k);
        let exact = exhaustive_expected_loss(&pair, &f, 8, &h).unwrap();
        for zi in [0usize, 37, 200, 255] {
            let z: Vec<u8> = (0..8).rev().map(|b| ((zi >> b) & 1) as u8).collect();
            let got = conditional_expected_loss(&pair, &z, &f, &h).unwrap();
            assert!(
                (got - exact.conditional_at(&z)).abs() < 1e-12,
                "seed {seed} z {zi}"
            );
        }
    }
}

#[test]
fn windowed_loss_equals_exact_expectation_for_stationary_sources() {
    let h = hamming_loss(2).unwrap();
    for seed in 0..8 {
        let mut rng = ChaCha8Rng::seed_from_u64(200 + seed);
        let k = (seed % 2) as usize;
        let pair = markov_pair(seed + 50, 2);
        let f = common::denoiser(&mut rng, 2, k);
        let q = pair.output_law(2 * k + 1).unwrap();
        let g = g_k_expected_loss(&q, &pair.channel, &f, &h).unwrap();
        let exact = exhaustive_expected_loss(&pair, &f, 9, &h).unwrap().expected;
        assert!((g - exact).abs() < 1e-12, "seed {seed}: {g} vs {exact}");
    }
}

#[test]
fn empirical_law_approaches_the_true_law() {
    let pair = markov_pair(9, 2);
    let a = Alphabet::new(2).unwrap();
    let exact = pair.output_law(3).unwrap();
    let dist: Vec<f64> = [1_000usize, 100_000, 1_000_000]
        .iter()
        .map(|&n| {
            let (_, z) = pair.sample(n, 42);
            l_inf_distance(&empirical_joint(&z, a, 1).unwrap().joint(), &exact).unwrap()
        })
        .collect();
    assert!(dist[0] > dist[1] && dist[1] > dist[2], "{dist:?}");
    assert!(dist[2] < 5e-3);
}

#[test]
fn bsc_pair_output_law_is_closed_form() {
    let pair = SourceChannelPair::new(
        SourceModel::iid(ProbVector::bernoulli(0.1875).unwrap()).unwrap(),
        bsc(0.1).unwrap(),
    )
    .unwrap();
    let q = pair.output_law(1).unwrap();
    assert!((q.probs()[1] - 0.25).abs() < 1e-15);
}
