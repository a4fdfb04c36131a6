mod common;

use mmdude_core::minimax::g_k_expected_loss;
use mmdude_core::{hamming_loss, j_k_worst_case, solve_minimax};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn setup(seed: u64) -> (ChaCha8Rng, usize, usize) {
    let m = 2 + (seed % 2) as usize;
    let k = ((seed / 2) % 2) as usize;
    (ChaCha8Rng::seed_from_u64(seed), m, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn no_random_denoiser_beats_the_lp(seed in any::<u64>()) {
        let (mut rng, m, k) = setup(seed);
        let q = common::law(&mut rng, m, k);
        let delta = common::channel_set(&mut rng, m, 3);
        let h = hamming_loss(m).unwrap();
        let sol = solve_minimax(&q, &delta, k, &h).unwrap();
        for _ in 0..200 {
            let f = common::denoiser(&mut rng, m, k);
            let (j, _) = j_k_worst_case(&q, &delta, &f, &h).unwrap();
            prop_assert!(j >= sol.value - 1e-9, "{j} < {}", sol.value);
        }
    }

    #[test]
    fn reported_value_is_attained(seed in any::<u64>()) {
        let (mut rng, m, k) = setup(seed);
        let q = common::law(&mut rng, m, k);
        let delta = common::channel_set(&mut rng, m, 3);
        let h = hamming_loss(m).unwrap();
        let sol = solve_minimax(&q, &delta, k, &h).unwrap();
        let (j, worst) = j_k_worst_case(&q, &delta, &sol.denoiser, &h).unwrap();
        prop_assert!((j - sol.value).abs() < 1e-9);
        prop_assert!(sol.active.contains(&worst));
        for &i in &sol.active {
            let g = g_k_expected_loss(&q, delta.get(i), &sol.denoiser, &h).unwrap();
            prop_assert!((g - sol.value).abs() < 1e-8);
        }
    }

    #[test]
    fn value_scales_with_the_loss(seed in any::<u64>(), c in 0.1f64..10.0) {
        let (mut rng, m, k) = setup(seed);
        let q = common::law(&mut rng, m, k);
        let delta = common::channel_set(&mut rng, m, 2);
        let h = hamming_loss(m).unwrap();
        let a = solve_minimax(&q, &delta, k, &h).unwrap().value;
        let b = solve_minimax(&q, &delta, k, &h.scaled(c).unwrap()).unwrap().value;
        prop_assert!((b - c * a).abs() <= 1e-9 * c.max(1.0));
    }

    #[test]
    fn expected_loss_is_linear_in_the_denoiser(seed in any::<u64>(), gamma in 0.0f64..=1.0) {
        let (mut rng, m, k) = setup(seed);
        let q = common::law(&mut rng, m, k);
        let ch = common::channel(&mut rng, m);
        let h = hamming_loss(m).unwrap();
        let f1 = common::denoiser(&mut rng, m, k);
        let f2 = common::denoiser(&mut rng, m, k);
        let mixed = g_k_expected_loss(&q, &ch, &f1.mix(&f2, gamma).unwrap(), &h).unwrap();
        let parts = gamma * g_k_expected_loss(&q, &ch, &f1, &h).unwrap()
            + (1.0 - gamma) * g_k_expected_loss(&q, &ch, &f2, &h).unwrap();
        prop_assert!((mixed - parts).abs() < 1e-12);
    }

    #[test]
    fn adding_channels_never_lowers_the_value(seed in any::<u64>()) {
        let (mut rng, m, k) = setup(seed);
        let q = common::law(&mut rng, m, k);
        let delta = common::channel_set(&mut rng, m, 3);
        let h = hamming_loss(m).unwrap();
        let full = solve_minimax(&q, &delta, k, &h).unwrap().value;
        let part = solve_minimax(&q, &delta.subset(&[0, 2]).unwrap(), k, &h).unwrap().value;
        prop_assert!(part <= full + 1e-9);
    }
}
