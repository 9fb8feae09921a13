//! Shared inputs for the benchmarks.

use nlwave_core::{Domain, InitialData, NonlinearityMode, ScenarioConfig, ScenarioTag};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform samples on `[-1, 1)`, reproducible from `seed`.
pub fn random_series(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// GFE I run at `alpha = 0.3` with smooth data over `modes` modes.
pub fn gfe1_run(modes: usize, steps: usize, mode: NonlinearityMode) -> (ScenarioConfig, InitialData) {
    let d = Domain::interval(1.0, modes).expect("valid interval");
    let mut cfg = ScenarioConfig::named(ScenarioTag::GfeI, 0.3, d).expect("valid law");
    cfg.tau = 0.05;
    cfg.delta = 0.5;
    cfg.step = 1e-3;
    cfg.final_time = steps as f64 * cfg.step;
    cfg.mode = mode;
    if mode != NonlinearityMode::Linear {
        cfg.k1 = 1.0;
        cfg.k2 = 1.0;
        cfg.k3 = 1.0;
    }
    let amps: Vec<f64> = (1..=modes).map(|m| 1e-3 / (m * m) as f64).collect();
    let data = InitialData::from_amplitudes(d, &amps, &[], &[]).expect("valid data");
    (cfg, data)
}
