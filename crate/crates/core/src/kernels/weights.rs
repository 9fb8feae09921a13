use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::Kernel;
use crate::error::{Error, Result};

/// Below this length the direct sum beats the transform.
const FAST_CUTOFF: usize = 64;

/// Product-integration weights `w_m = int_{t_m}^{t_{m+1}} K(s) ds`.
///
/// `(K * z)(t_n) ~ sum_{j<n} w_{n-1-j} z_{j+1}`, where `z_{j+1}` stands for the
/// density on the cell `(t_j, t_{j+1})`. The delta carries no weights and
/// returns the latest sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionWeights {
    step: f64,
    count: usize,
    weights: Vec<f64>,
    is_delta: bool,
}

impl ConvolutionWeights {
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn is_delta(&self) -> bool {
        self.is_delta
    }

    /// Weight multiplying the newest sample.
    pub fn leading(&self) -> f64 {
        if self.is_delta {
            1.0
        } else {
            self.weights[0]
        }
    }

    /// Contribution of all samples but the newest one to `(K * z)(t_n)`,
    /// where `history = z_1..z_{n-1}`.
    pub(crate) fn lagged_sum(&self, history: &[f64]) -> f64 {
        if self.is_delta {
            return 0.0;
        }
        let n = history.len() + 1;
        history
            .iter()
            .enumerate()
            .map(|(j, z)| self.weights[n - 1 - j] * z)
            .sum()
    }

    /// Same as [`conv_apply`].
    pub fn apply(&self, history: &[f64]) -> Result<f64> {
        conv_apply(self, history)
    }
}

pub fn build_weights(kernel: &Kernel, step: f64, count: usize) -> Result<ConvolutionWeights> {
    if !(step.is_finite() && step > 0.0) {
        return Err(Error::DomainError(format!("step must be positive, got {step}")));
    }
    if count == 0 {
        return Err(Error::DomainError("weight count must be at least one".into()));
    }
    kernel.validate()?;
    let weights = match kernel {
        Kernel::DiracDelta => {
            return Ok(ConvolutionWeights { step, count, weights: Vec::new(), is_delta: true })
        }
        Kernel::ConstantOne => vec![step; count],
        Kernel::Abel { order } => {
            let scale = step.powf(*order) / super::gamma(order + 1.0);
            // ((m+1)^a - m^a) h^a / Gamma(a+1)
            (0..count)
                .map(|m| {
                    let m = m as f64;
                    scale * ((m + 1.0).powf(*order) - m.powf(*order))
                })
                .collect()
        }
        Kernel::Tabulated(_) => {
            let times: Vec<f64> = (0..=count).map(|m| step * m as f64).collect();
            let cumulative = kernel.antiderivative(&times);
            cumulative.windows(2).map(|w| w[1] - w[0]).collect()
        }
    };
    if weights.iter().any(|w: &f64| !w.is_finite()) {
        return Err(Error::NumericalError("non-finite convolution weight".into()));
    }
    Ok(ConvolutionWeights { step, count, weights, is_delta: false })
}

/// `(K * z)(t_n)` from the history `z_1..z_n`. An empty history gives 0.
pub fn conv_apply(weights: &ConvolutionWeights, history: &[f64]) -> Result<f64> {
    let n = history.len();
    if n == 0 {
        return Ok(0.0);
    }
    if weights.is_delta {
        return Ok(history[n - 1]);
    }
    if n > weights.count {
        return Err(Error::ShapeError(format!(
            "history of length {n} exceeds the {} available weights",
            weights.count
        )));
    }
    Ok(weights.lagged_sum(&history[..n - 1]) + weights.weights[0] * history[n - 1])
}

/// Every partial convolution `(K * z)(t_n)`, `n = 1..N`, by the direct O(N^2) loop.
pub fn conv_apply_naive(weights: &ConvolutionWeights, series: &[f64]) -> Vec<f64> {
    if weights.is_delta {
        return series.to_vec();
    }
    let n = series.len().min(weights.count);
    let w = &weights.weights;
    (0..n)
        .map(|i| (0..=i).map(|j| w[i - j] * series[j]).sum())
        .collect()
}

/// Every partial convolution `(K * z)(t_n)`, `n = 1..N`, in O(N log N).
///
/// Values agree with [`conv_apply_naive`] up to transform round-off, which
/// stays below `1e-12 * max_n |(K * z)(t_n)|` for the grid sizes used here.
pub fn conv_apply_fast(weights: &ConvolutionWeights, series: &[f64]) -> Result<Vec<f64>> {
    if weights.is_delta {
        return Ok(series.to_vec());
    }
    let n = series.len();
    if n > weights.count {
        return Err(Error::ShapeError(format!(
            "series of length {n} exceeds the {} available weights",
            weights.count
        )));
    }
    if n <= FAST_CUTOFF {
        return Ok(conv_apply_naive(weights, series));
    }
    let size = (2 * n).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward: Arc<dyn Fft<f64>> = planner.plan_fft_forward(size);
    let inverse: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(size);

    let mut a: Vec<Complex<f64>> = weights.weights[..n]
        .iter()
        .map(|&w| Complex::new(w, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    let mut b: Vec<Complex<f64>> = series
        .iter()
        .map(|&z| Complex::new(z, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(size)
        .collect();
    forward.process(&mut a);
    forward.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inverse.process(&mut a);
    let scale = 1.0 / size as f64;
    let out: Vec<f64> = a[..n].iter().map(|c| c.re * scale).collect();
    if out.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalError("non-finite value in fast convolution".into()));
    }
    Ok(out)
}
