use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{build_weights, conv_apply_fast, fractional_integral, Kernel};
use crate::solver::{ScenarioConfig, Trajectory};
use crate::spectral::eigenpairs;

/// Discrete energy quantities at one output time. Norms are computed from
/// modal coefficients through Parseval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub time: f64,
    pub lap_u: f64,
    pub lap_ut: f64,
    /// `sum_j dt_j ||grad u_tt(t_j)||^2` up to this time.
    pub grad_utt_cumulative: f64,
    /// Running supremum of `int_0^t (K2 * y)(K1 * y) ds` with `y = Lap u_tt`,
    /// clipped at zero.
    pub phi_proxy: f64,
    /// `int_0^t |I^(s/2) grad u_tt|^2 ds` with `s` the singularity order of `K1`.
    pub psi_proxy: f64,
    /// `1/2 ||u_t||^2 + 1/2 c^2 ||grad u||^2`.
    pub wave_energy: f64,
}

/// Energy diagnostics along a trajectory produced with `config`.
///
/// The memory terms are evaluated on the stored samples, so a strided
/// trajectory gives coarser proxies.
pub fn energy_report(config: &ScenarioConfig, traj: &Trajectory) -> Result<Vec<EnergyRecord>> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("energy report of an empty trajectory".into()));
    }
    let lambda = eigenpairs(&config.domain).eigenvalues;
    if traj.modes() != lambda.len() {
        return Err(Error::ShapeError(format!(
            "trajectory has {} modes, domain {}",
            traj.modes(),
            lambda.len()
        )));
    }
    let len = traj.len();
    let step = if len > 1 { traj.times[1] - traj.times[0] } else { config.step };
    let c2 = config.c * config.c;

    let mut phi_density = vec![0.0; len];
    let mut psi_density = vec![0.0; len];
    let psi_order = config.pair.k1.singularity_order().unwrap_or(0.0);
    for k in 0..lambda.len() {
        let w: Vec<f64> = traj.snapshots.iter().map(|s| s.w[k]).collect();
        let k1w = convolve(&config.pair.k1, &w, step)?;
        let k2w = convolve(&config.pair.k2, &w, step)?;
        let lam2 = lambda[k] * lambda[k];
        for n in 0..len {
            phi_density[n] += lam2 * k1w[n] * k2w[n];
        }
        let smoothed = if psi_order > 0.0 { fractional_integral(psi_order / 2.0, &w, step)? } else { w };
        for n in 0..len {
            psi_density[n] += lambda[k] * smoothed[n] * smoothed[n];
        }
    }

    let mut records = Vec::with_capacity(len);
    let (mut grad, mut phi_running, mut phi_sup, mut psi) = (0.0, 0.0, 0.0f64, 0.0);
    for n in 0..len {
        let s = &traj.snapshots[n];
        let (mut lap_u, mut lap_ut, mut grad_w, mut kinetic, mut potential) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for k in 0..lambda.len() {
            let lam = lambda[k];
            lap_u += lam * lam * s.x[k] * s.x[k];
            lap_ut += lam * lam * s.v[k] * s.v[k];
            grad_w += lam * s.w[k] * s.w[k];
            kinetic += s.v[k] * s.v[k];
            potential += lam * s.x[k] * s.x[k];
        }
        if n > 0 {
            let dt = traj.times[n] - traj.times[n - 1];
            grad += dt * grad_w;
            phi_running += 0.5 * dt * (phi_density[n - 1] + phi_density[n]);
            psi += 0.5 * dt * (psi_density[n - 1] + psi_density[n]);
        }
        phi_sup = phi_sup.max(phi_running);
        records.push(EnergyRecord {
            time: traj.times[n],
            lap_u: lap_u.sqrt(),
            lap_ut: lap_ut.sqrt(),
            grad_utt_cumulative: grad,
            phi_proxy: phi_sup,
            psi_proxy: psi,
            wave_energy: 0.5 * kinetic + 0.5 * c2 * potential,
        });
    }
    Ok(records)
}

/// `(K * y)(t_n)` for every sample, with `y(t_0)` excluded as in the stepper.
fn convolve(kernel: &Kernel, y: &[f64], step: f64) -> Result<Vec<f64>> {
    if kernel.is_delta() {
        return Ok(y.to_vec());
    }
    let mut out = vec![0.0; y.len()];
    if y.len() > 1 {
        let weights = build_weights(kernel, step, y.len() - 1)?;
        out[1..].copy_from_slice(&conv_apply_fast(&weights, &y[1..])?);
    }
    Ok(out)
}

/// `sup_t (||Lap u_t||^2 + ||Lap u||^2) + sum dt ||grad u_tt||^2`, the
/// quantity whose uniformity in `tau` is checked by the sweeps.
pub fn discrete_energy(traj: &Trajectory, lambda: &[f64]) -> f64 {
    let mut peak: f64 = 0.0;
    let mut dissipated = 0.0;
    for (n, s) in traj.snapshots.iter().enumerate() {
        let mut lap = 0.0;
        let mut grad_w = 0.0;
        for (k, lam) in lambda.iter().enumerate() {
            lap += lam * lam * (s.v[k] * s.v[k] + s.x[k] * s.x[k]);
            grad_w += lam * s.w[k] * s.w[k];
        }
        peak = peak.max(lap);
        if n > 0 {
            dissipated += (traj.times[n] - traj.times[n - 1]) * grad_w;
        }
    }
    peak + dissipated
}
