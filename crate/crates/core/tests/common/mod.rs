#![allow(dead_code)]

use mmdude_core::{
    Alphabet, Channel, ChannelSet, JointDistribution, WindowShape, WindowedDenoiser,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn simplex(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..len).map(|_| rng.gen_range(0.02..1.0)).collect();
    let s: f64 = v.iter().sum();
    v.into_iter().map(|x| x / s).collect()
}

pub fn channel(rng: &mut ChaCha8Rng, m: usize) -> Channel {
    let rows: Vec<Vec<f64>> = (0..m)
        .map(|x| {
            let mut r: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
            r[x] += m as f64;
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect();
    Channel::new(&rows).unwrap()
}

pub fn channel_set(rng: &mut ChaCha8Rng, m: usize, size: usize) -> ChannelSet {
    ChannelSet::new((0..size).map(|_| channel(rng, m)).collect()).unwrap()
}

pub fn law(rng: &mut ChaCha8Rng, m: usize, k: usize) -> JointDistribution {
    let a = Alphabet::new(m).unwrap();
    JointDistribution::new(a, 2 * k + 1, simplex(rng, m.pow(2 * k as u32 + 1))).unwrap()
}

pub fn denoiser(rng: &mut ChaCha8Rng, m: usize, k: usize) -> WindowedDenoiser {
    let shape = WindowShape::new(Alphabet::new(m).unwrap(), k);
    let table = (0..shape.window_count())
        .flat_map(|_| simplex(rng, m))
        .collect();
    WindowedDenoiser::from_flat(shape, table).unwrap()
}
