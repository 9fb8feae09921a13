//! Drivers for the numerical studies: relaxation-time sweeps, order fits,
//! energy diagnostics and convergence checks.

mod convergence;
mod energy;
mod sweep;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::solver::Trajectory;

pub use convergence::{manufactured_test, oracle_error, self_convergence, ConvergenceReport};
pub use energy::{discrete_energy, energy_report, EnergyRecord};
pub use sweep::{tau_sweep, SweepEntry, SweepResult};

/// Least-squares line through `(log parameter, log error)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square deviation of the logs from the line.
    pub residual: f64,
    pub used: usize,
    pub warnings: Vec<String>,
}

/// Fits `error ~ C parameter^slope`. Pairs with a zero error are dropped
/// and reported in `warnings`; at least three usable pairs are needed.
pub fn fit_order(pairs: &[(f64, f64)]) -> Result<OrderFit> {
    let mut warnings = Vec::new();
    let mut points = Vec::with_capacity(pairs.len());
    for &(p, e) in pairs {
        if !(p > 0.0) || !p.is_finite() || !e.is_finite() || e < 0.0 {
            return Err(Error::InvalidInput(format!("order fit needs positive finite pairs, got ({p}, {e})")));
        }
        if e == 0.0 {
            warnings.push(format!("zero error at parameter {p:e} excluded"));
            continue;
        }
        points.push((p.ln(), e.ln()));
    }
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "order fit needs at least 3 nonzero errors, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("order fit needs distinct parameters".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(OrderFit { slope, intercept, residual, used: points.len(), warnings })
}

/// `sup_n ||x_n - y_n|| + (sum_n dt_n ||grad (x_n - y_n)||^2)^(1/2)`, the
/// `L^inf(L^2) + L^2(H^1_0)` distance of two trajectories on the same times.
pub fn composite_distance(a: &Trajectory, b: &Trajectory, lambda: &[f64]) -> Result<f64> {
    if a.times.len() != b.times.len() || a.modes() != b.modes() || a.modes() != lambda.len() {
        return Err(Error::ShapeError(format!(
            "trajectories of {}x{} and {}x{} samples over {} modes",
            a.len(),
            a.modes(),
            b.len(),
            b.modes(),
            lambda.len()
        )));
    }
    let mut sup: f64 = 0.0;
    let mut gradient = 0.0;
    for n in 0..a.len() {
        let (p, q) = (&a.snapshots[n], &b.snapshots[n]);
        let mut l2 = 0.0;
        let mut h1 = 0.0;
        for k in 0..lambda.len() {
            let d = p.x[k] - q.x[k];
            l2 += d * d;
            h1 += lambda[k] * d * d;
        }
        sup = sup.max(l2.sqrt());
        if n > 0 {
            gradient += (a.times[n] - a.times[n - 1]) * h1;
        }
    }
    Ok(sup + gradient.sqrt())
}
