#![allow(dead_code)]

use lcp_atlas::analysis::is_p;
use lcp_atlas::{Mat, Vector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_mat(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Gaussian matrix shifted towards the identity until it is a P-matrix.
pub fn random_p_matrix(rng: &mut ChaCha8Rng, n: usize) -> Mat {
    loop {
        let shift = rng.gen_range(0.0..1.5) * n as f64;
        let m = gaussian_mat(rng, n, n) + Mat::identity(n, n) * shift;
        if is_p(&m) {
            return m;
        }
    }
}

pub fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
    a.len() == b.len() && (a - b).amax() <= tol * (1.0 + a.amax().max(b.amax()))
}
