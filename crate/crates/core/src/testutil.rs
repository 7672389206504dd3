//! Seeded random fields shared across the crate's tests.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::lattice::{GridFunction, LatticeSpec};

pub fn random_grid(spec: LatticeSpec, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..spec.site_count())
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    GridFunction::from_values(spec, values).unwrap()
}

pub fn random_real_grid(spec: LatticeSpec, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..spec.site_count())
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, 0.0))
        .collect();
    GridFunction::from_values(spec, values).unwrap()
}
