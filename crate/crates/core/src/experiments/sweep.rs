use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::energy::discrete_energy;
use super::composite_distance;
use crate::error::{Error, Result};
use crate::solver::{limiting_solve, solve, InitialData, ScenarioConfig};
use crate::spectral::eigenpairs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub tau: f64,
    /// Composite distance to the limiting solution.
    pub error: Option<f64>,
    pub peak_energy: Option<f64>,
    pub iterations: usize,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// Sorted by decreasing `tau`.
    pub entries: Vec<SweepEntry>,
    pub limiting_energy: f64,
}

impl SweepResult {
    /// `(tau, error)` of the successful runs.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.entries.iter().filter_map(|e| e.error.map(|err| (e.tau, err))).collect()
    }

    /// Largest over smallest peak energy of the successful runs.
    pub fn energy_spread(&self) -> f64 {
        let peaks: Vec<f64> = self.entries.iter().filter_map(|e| e.peak_energy).collect();
        let hi = peaks.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = peaks.iter().copied().fold(f64::INFINITY, f64::min);
        if peaks.is_empty() || hi == 0.0 {
            1.0
        } else {
            hi / lo
        }
    }

    pub fn failures(&self) -> usize {
        self.entries.iter().filter(|e| e.failure.is_some()).count()
    }
}

/// Solves `config` at each relaxation time and measures the distance to
/// the `tau = 0` solution. Runs execute in parallel; a failed run is
/// recorded in its entry and the sweep continues.
pub fn tau_sweep(config: &ScenarioConfig, data: &InitialData, taus: &[f64]) -> Result<SweepResult> {
    if taus.is_empty() || taus.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
        return Err(Error::InvalidInput("relaxation times must be positive".into()));
    }
    if taus.windows(2).any(|p| p[1] >= p[0]) {
        return Err(Error::InvalidInput("relaxation times must be strictly decreasing".into()));
    }
    let lambda = eigenpairs(&config.domain).eigenvalues;
    let limit = limiting_solve(config, data)?;
    let entries = taus
        .par_iter()
        .map(|&tau| {
            let run = ScenarioConfig { tau, ..config.clone() };
            let outcome = solve(&run, data).and_then(|traj| {
                let err = composite_distance(&traj, &limit, &lambda)?;
                Ok((err, discrete_energy(&traj, &lambda), traj.meta.iterations))
            });
            match outcome {
                Ok((err, energy, iterations)) => SweepEntry {
                    tau,
                    error: Some(err),
                    peak_energy: Some(energy),
                    iterations,
                    failure: None,
                },
                Err(e) => SweepEntry { tau, error: None, peak_energy: None, iterations: 0, failure: Some(e.to_string()) },
            }
        })
        .collect();
    Ok(SweepResult { entries, limiting_energy: discrete_energy(&limit, &lambda) })
}
