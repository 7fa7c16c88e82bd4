//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit seed. Parallel sample loops derive
//! one ChaCha8 stream per sample index so serial and parallel runs agree.

use rand::SeedableRng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type LabRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> LabRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `index` of the generator seeded by `seed`.
pub fn stream(seed: u64, index: u64) -> LabRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index.wrapping_add(1));
    rng
}

pub fn gaussian_vec(rng: &mut LabRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform sample from the closed Euclidean ball of `radius` in dimension `len`.
pub fn uniform_ball(rng: &mut LabRng, len: usize, radius: f64) -> Vec<f64> {
    let mut dir = unit_sphere(rng, len);
    let u: f64 = rng.random();
    let r = radius * u.powf(1.0 / len as f64);
    dir.iter_mut().for_each(|v| *v *= r);
    dir
}

/// Uniform direction on the unit sphere in dimension `len`.
pub fn unit_sphere(rng: &mut LabRng, len: usize) -> Vec<f64> {
    loop {
        let g = gaussian_vec(rng, len);
        let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return g.into_iter().map(|v| v / norm).collect();
        }
    }
}
