//! Seeded randomness. All random draws go through ChaCha20 seeded from a
//! 64-bit value; Gaussians use the ziggurat sampler from `rand_distr`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::linalg::Matrix;

pub struct Rng64(ChaCha20Rng);

impl Rng64 {
    pub fn seed(seed: u64) -> Self {
        Rng64(ChaCha20Rng::seed_from_u64(seed))
    }

    /// Independent stream for trial `trial` of experiment `seed`.
    pub fn for_trial(seed: u64, trial: u64, stream: u64) -> Self {
        Self::seed(derive_seed(seed, trial, stream))
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    pub fn sign(&mut self) -> f64 {
        if self.0.random::<bool>() {
            1.0
        } else {
            -1.0
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.random()
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        xs.shuffle(&mut self.0);
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, trial: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ trial) ^ stream.rotate_left(32))
}

/// Matrix of independent standard normal entries, filled column by column.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng64) -> Matrix {
    let data: Vec<f64> = (0..rows * cols).map(|_| rng.normal()).collect();
    Matrix::from_vec(rows, cols, data)
}
