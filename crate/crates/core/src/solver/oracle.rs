use super::config::{InitialData, ScenarioConfig};
use super::trajectory::{Snapshot, Trajectory};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::spectral::{eigenpairs, NonlinearityMode};

/// Number of RK4 substeps per solver step.
const REFINEMENT: usize = 10;

/// Independent reference for the local JMGT case (`K1 = delta`, `K2 = 1`).
///
/// Each mode obeys
/// `tau^a x''' + x'' + c^2 lam x + tau^a c^2 lam x' + delta lam (x' - x'(0)) = f(t)`,
/// which is integrated by classical RK4 at a tenth of the solver step. At
/// `tau = 0` the second-order limit is integrated instead.
pub fn mgt_oracle(config: &ScenarioConfig, data: &InitialData) -> Result<Trajectory> {
    if config.pair.k1 != Kernel::DiracDelta || config.pair.k2 != Kernel::ConstantOne {
        return Err(Error::UnsupportedScenario(
            "the RK4 oracle needs K1 = delta and K2 = 1".into(),
        ));
    }
    if config.mode != NonlinearityMode::Linear {
        return Err(Error::UnsupportedScenario("the RK4 oracle is linear only".into()));
    }
    config.validate(Some(data))?;
    let grid = config.grid()?;
    let lambda = eigenpairs(&config.domain).eigenvalues;
    let modes = lambda.len();
    let ta = config.tau_power();
    let c2 = config.c * config.c;
    let delta = config.delta;
    let h = grid.step / REFINEMENT as f64;

    let mut columns: Vec<Vec<[f64; 3]>> = Vec::with_capacity(modes);
    for k in 0..modes {
        let lam = lambda[k];
        let x1 = data.u1.coeffs[k];
        let force = |t: f64| config.forcing.eval(t, modes)[k];
        // second derivative implied by the equation when tau = 0
        let accel2 = |t: f64, x: f64, v: f64| force(t) - c2 * lam * x - delta * lam * (v - x1);
        let rhs = |t: f64, y: [f64; 3]| -> [f64; 3] {
            if ta > 0.0 {
                let jerk = (force(t) - y[2] - c2 * lam * y[0] - ta * c2 * lam * y[1]
                    - delta * lam * (y[1] - x1))
                    / ta;
                [y[1], y[2], jerk]
            } else {
                [y[1], accel2(t, y[0], y[1]), 0.0]
            }
        };
        let mut y = [data.u0.coeffs[k], x1, data.u2.coeffs[k]];
        if ta == 0.0 {
            y[2] = accel2(0.0, y[0], y[1]);
        }
        let mut column = Vec::with_capacity(grid.steps + 1);
        column.push(y);
        for n in 0..grid.steps {
            for sub in 0..REFINEMENT {
                let t = grid.time(n) + sub as f64 * h;
                let add = |a: [f64; 3], b: [f64; 3], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]];
                let k1 = rhs(t, y);
                let k2 = rhs(t + 0.5 * h, add(y, k1, 0.5 * h));
                let k3 = rhs(t + 0.5 * h, add(y, k2, 0.5 * h));
                let k4 = rhs(t + h, add(y, k3, h));
                for i in 0..3 {
                    y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                }
            }
            if ta == 0.0 {
                y[2] = accel2(grid.time(n + 1), y[0], y[1]);
            }
            if !y.iter().all(|v| v.is_finite()) {
                return Err(Error::NumericalError(format!("RK4 oracle overflowed in mode {}", k + 1)));
            }
            column.push(y);
        }
        columns.push(column);
    }
    let times = grid.times();
    let snapshots = (0..=grid.steps)
        .map(|n| Snapshot {
            x: columns.iter().map(|c| c[n][0]).collect(),
            v: columns.iter().map(|c| c[n][1]).collect(),
            w: columns.iter().map(|c| c[n][2]).collect(),
        })
        .collect();
    Ok(Trajectory::new(times, snapshots).strided(config.output_stride))
}
