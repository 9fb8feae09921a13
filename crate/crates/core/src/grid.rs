use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform time grid `t_n = n * step`, `n = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub step: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(step: f64, steps: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::DomainError(format!("time step must be positive, got {step}")));
        }
        if steps == 0 {
            return Err(Error::DomainError("time grid needs at least one step".into()));
        }
        Ok(Self { step, steps })
    }

    /// Grid covering `[0, final_time]` with step as close to `step` as the
    /// integer step count allows.
    pub fn covering(final_time: f64, step: f64) -> Result<Self> {
        if !(final_time.is_finite() && final_time > 0.0) {
            return Err(Error::DomainError(format!("final time must be positive, got {final_time}")));
        }
        let steps = (final_time / step).round().max(1.0) as usize;
        Self::new(final_time / steps as f64, steps)
    }

    pub fn final_time(&self) -> f64 {
        self.step * self.steps as f64
    }

    pub fn time(&self, n: usize) -> f64 {
        self.step * n as f64
    }

    /// All grid times `t_0..=t_N`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.time(n)).collect()
    }
}
