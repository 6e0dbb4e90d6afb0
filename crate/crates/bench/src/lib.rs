//! Fixtures shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lensmimo_core::{sample_channel, ArrayGeometry, Direction, ExperimentConfig, LensArrayGeometry, MultipathChannel, UpaGeometry};

/// The default scenario's arrays and a few channel draws.
pub struct Fixture {
    pub config: ExperimentConfig,
    pub lens: LensArrayGeometry,
    pub upa: UpaGeometry,
    pub ms: ArrayGeometry,
    pub channels: Vec<MultipathChannel>,
}

impl Fixture {
    pub fn new(n_channels: usize) -> Self {
        let config = ExperimentConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(config.master_seed);
        let channels = (0..n_channels).map(|_| sample_channel(&config.channel, &mut rng).unwrap()).collect();
        Self {
            lens: config.bs_lens().unwrap(),
            upa: config.bs_upa().unwrap(),
            ms: config.ms_geometry().unwrap(),
            channels,
            config,
        }
    }
}

/// Log-uniform gains over five decades.
pub fn random_gains(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| 10f64.powf(rng.random_range(-3.0..2.0))).collect()
}

/// Directions spread over the lens coverage.
pub fn random_directions(n: usize, seed: u64) -> Vec<Direction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| Direction::from_degrees(rng.random_range(-30.0..30.0), rng.random_range(-60.0..60.0)))
        .collect()
}
