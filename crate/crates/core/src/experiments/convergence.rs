use serde::{Deserialize, Serialize};

use super::{fit_order, OrderFit};
use crate::error::{Error, Result};
use crate::kernels::Kernel;
use crate::solver::{
    mgt_oracle, solve, solve_linear, Forcing, ForcingTerm, InitialData, ScenarioConfig, TimeProfile,
    Trajectory,
};
use crate::spectral::{eigenpairs, ModalField, NonlinearityMode};

/// Errors per time step and the fitted order. `order` is `None` when fewer
/// than three nonzero errors are available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    /// `(h, error)` in the order the steps were given.
    pub rows: Vec<(f64, f64)>,
    pub order: Option<OrderFit>,
}

impl ConvergenceReport {
    fn new(rows: Vec<(f64, f64)>) -> Result<Self> {
        let usable = rows.iter().filter(|r| r.1 > 0.0).count();
        let order = if usable >= 3 { Some(fit_order(&rows)?) } else { None };
        Ok(Self { rows, order })
    }
}

fn sup_l2(a: &Trajectory, b: &Trajectory) -> f64 {
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(p, q)| p.x.iter().zip(&q.x).map(|(s, t)| (s - t) * (s - t)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

/// Runs the local JMGT scenario against the exact solution
/// `u = amplitude * phi_1(x) cos(omega t)`, where `phi_1` is the first sine
/// mode with unit peak, and reports the `L^inf(L^2)` error per step.
///
/// Forcing and initial data in `config` are replaced; `tau`, `delta`, `c`,
/// domain and final time are kept.
pub fn manufactured_test(
    config: &ScenarioConfig,
    steps: &[f64],
    amplitude: f64,
    omega: f64,
) -> Result<ConvergenceReport> {
    if config.pair.k1 != Kernel::DiracDelta || config.pair.k2 != Kernel::ConstantOne {
        return Err(Error::UnsupportedScenario(
            "the manufactured solution needs K1 = delta and K2 = 1".into(),
        ));
    }
    let lambda = eigenpairs(&config.domain).eigenvalues;
    let modes = lambda.len();
    let lam = lambda[0];
    let ta = config.tau_power();
    let c2 = config.c * config.c;
    let xi = amplitude * config.domain.sine_to_modal();
    let unit = |value: f64| {
        let mut m = vec![0.0; modes];
        m[0] = value;
        m
    };
    let forcing = Forcing {
        terms: vec![
            ForcingTerm { modal: unit(xi * (c2 * lam - omega * omega)), profile: TimeProfile::Cos { omega } },
            ForcingTerm {
                modal: unit(xi * (ta * omega.powi(3) - ta * c2 * lam * omega - config.delta * lam * omega)),
                profile: TimeProfile::Sin { omega },
            },
        ],
    };
    let field = |value: f64| ModalField::new(config.domain, unit(value));
    let data = InitialData { u0: field(xi)?, u1: field(0.0)?, u2: field(-xi * omega * omega)? };

    let mut rows = Vec::with_capacity(steps.len());
    for &h in steps {
        let run = ScenarioConfig {
            step: h,
            forcing: forcing.clone(),
            mode: NonlinearityMode::Linear,
            output_stride: 1,
            ..config.clone()
        };
        let traj = solve_linear(&run, &data)?;
        let error = traj
            .times
            .iter()
            .zip(&traj.snapshots)
            .map(|(t, s)| {
                let exact = xi * (omega * t).cos();
                let rest: f64 = s.x[1..].iter().map(|c| c * c).sum();
                ((s.x[0] - exact).powi(2) + rest).sqrt()
            })
            .fold(0.0, f64::max);
        rows.push((h, error));
    }
    ConvergenceReport::new(rows)
}

/// Compares each step with the next finer one on the coarse output times.
/// Consecutive steps must have an integer ratio; the last step only serves
/// as a reference, so `n` steps give `n - 1` rows.
pub fn self_convergence(
    config: &ScenarioConfig,
    data: &InitialData,
    steps: &[f64],
) -> Result<ConvergenceReport> {
    if steps.len() < 2 {
        return Err(Error::InvalidInput("self-convergence needs at least two steps".into()));
    }
    let runs: Vec<Trajectory> = steps
        .iter()
        .map(|&h| solve(&ScenarioConfig { step: h, output_stride: 1, ..config.clone() }, data))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(steps.len() - 1);
    for i in 0..steps.len() - 1 {
        let ratio = steps[i] / steps[i + 1];
        let factor = ratio.round() as usize;
        if factor < 2 || (ratio - factor as f64).abs() > 1e-9 * ratio {
            return Err(Error::InvalidInput(format!(
                "steps {} and {} are not an integer refinement",
                steps[i],
                steps[i + 1]
            )));
        }
        let (coarse, fine) = (&runs[i], &runs[i + 1]);
        let sampled = Trajectory::new(
            coarse.times.clone(),
            (0..coarse.len()).map(|n| fine.snapshots[(n * factor).min(fine.len() - 1)].clone()).collect(),
        );
        rows.push((steps[i], sup_l2(coarse, &sampled)));
    }
    ConvergenceReport::new(rows)
}

/// Relative `L^inf(L^2)` distance between the solver and the RK4 oracle.
pub fn oracle_error(config: &ScenarioConfig, data: &InitialData) -> Result<f64> {
    let reference = mgt_oracle(config, data)?;
    let traj = solve_linear(config, data)?;
    let scale = reference.peak_displacement();
    let err = sup_l2(&traj, &reference);
    Ok(if scale > 0.0 { err / scale } else { err })
}
