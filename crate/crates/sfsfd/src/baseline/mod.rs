//! Comparison design generators: uniform random, Latin hypercube, and
//! the randomized Sobol sequence.

pub mod sobol;

pub use sobol::{sobol_design, sobol_design_with, SobolRandomization, SobolState};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::design::DesignMatrix;
use crate::error::Result;

/// `n x d` i.i.d. uniform coordinates in `[0, 1)`.
pub fn uniform_random_design<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<DesignMatrix> {
    let data: Vec<f64> = (0..n * d).map(|_| rng.random()).collect();
    DesignMatrix::new(data, n, d)
}

/// Classic Latin hypercube: for each dimension independently, a uniform
/// random permutation of the `n` strata plus an in-stratum jitter, giving
/// coordinates `(pi(i) + u_i) / n`. Every 1D projection has exactly one
/// point per stratum.
pub fn latin_hypercube_design<R: Rng>(n: usize, d: usize, rng: &mut R) -> Result<DesignMatrix> {
    let mut data = vec![0.0; n * d];
    let mut strata: Vec<usize> = (0..n).collect();
    for k in 0..d {
        strata.shuffle(rng);
        for (i, &stratum) in strata.iter().enumerate() {
            let jitter: f64 = rng.random();
            data[i * d + k] = (stratum as f64 + jitter) / n as f64;
        }
    }
    DesignMatrix::new(data, n, d)
}
