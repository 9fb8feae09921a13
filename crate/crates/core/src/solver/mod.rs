//! Fully discrete time integration in the Dirichlet-Laplace eigenbasis.
//!
//! Linear runs call the implicit [`Stepper`] once per step. Nonlinear runs
//! iterate the map "freeze `a(u*)`, `b(u*)`, `-N(u*)` along the whole
//! trajectory and re-solve" until successive iterates agree.

mod config;
mod integrate;
mod oracle;
mod stepper;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{eigenpairs, NonlinearityMode};

pub use config::{Forcing, ForcingTerm, InitialData, ScenarioConfig, TimeProfile};
pub use oracle::mgt_oracle;
pub use stepper::{ModalState, StepInput, Stepper};
pub use trajectory::{RunMeta, Snapshot, Trajectory};

use integrate::{integrate, Linearization};

/// Stopping rule of the fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl PicardOptions {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self { tol: config.picard_tol, max_iter: config.picard_max_iter }
    }
}

/// Residual history of one fixed-point solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PicardLog {
    pub iterations: usize,
    /// `sup_n ||(x, v)^(k)_n - (x, v)^(k-1)_n||` after each iteration.
    pub residuals: Vec<f64>,
}

impl PicardLog {
    /// Ratios of successive residuals.
    pub fn ratios(&self) -> Vec<f64> {
        self.residuals.windows(2).map(|p| p[1] / p[0]).collect()
    }
}

fn distance(a: &Trajectory, b: &Trajectory) -> f64 {
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(p, q)| {
            p.x.iter()
                .zip(&q.x)
                .chain(p.v.iter().zip(&q.v))
                .map(|(s, t)| (s - t) * (s - t))
                .sum::<f64>()
                .sqrt()
        })
        .fold(0.0, f64::max)
}

/// Solves the linear equation (`a = b = 1`, `N = 0`); nonlinearity
/// constants in `config` are ignored. Output follows the configured stride.
pub fn solve_linear(config: &ScenarioConfig, data: &InitialData) -> Result<Trajectory> {
    config.validate(Some(data))?;
    Ok(integrate(config, data, None)?.strided(config.output_stride))
}

/// Fixed-point iteration for the WB and KB equations, started from the
/// linear solution. Each iteration is one full linear solve.
pub fn solve_nonlinear(
    config: &ScenarioConfig,
    data: &InitialData,
    picard: PicardOptions,
) -> Result<(Trajectory, PicardLog)> {
    config.validate(Some(data))?;
    if config.mode == NonlinearityMode::Linear {
        return Err(Error::InvalidInput("solve_nonlinear needs the WB or KB mode".into()));
    }
    let linearization = Linearization::new(config)?;
    let mut log = PicardLog::default();
    let mut current = integrate(config, data, None)?;
    for iteration in 1..=picard.max_iter {
        let frozen = linearization.along(&current)?;
        // a blown-up iterate means the map is not contracting
        let next = integrate(config, data, Some(&frozen)).map_err(|e| match e {
            Error::Runaway { .. } => Error::NoContraction { iterations: iteration, residual: f64::INFINITY },
            other => other,
        })?;
        let residual = distance(&current, &next);
        log.residuals.push(residual);
        log.iterations = iteration;
        if !residual.is_finite() {
            return Err(Error::NoContraction { iterations: iteration, residual });
        }
        current = next;
        if residual <= picard.tol {
            let mut traj = current.strided(config.output_stride);
            traj.meta.iterations = log.iterations;
            traj.meta.residuals = log.residuals.clone();
            return Ok((traj, log));
        }
    }
    Err(Error::NoContraction {
        iterations: picard.max_iter,
        residual: log.residuals.last().copied().unwrap_or(f64::NAN),
    })
}

/// Per-step quasi-linearization: coefficients are frozen at the previous
/// time level instead of along a previous iterate. Cheaper than
/// [`solve_nonlinear`] and first order in the lag.
pub fn solve_nonlinear_lagged(config: &ScenarioConfig, data: &InitialData) -> Result<Trajectory> {
    config.validate(Some(data))?;
    let grid = config.grid()?;
    let lambda = eigenpairs(&config.domain).eigenvalues;
    let modes = lambda.len();
    let linearization = Linearization::new(config)?;
    let with_forcing = |mut extra: Vec<f64>, n: usize| {
        for (e, f) in extra.iter_mut().zip(config.forcing.eval(grid.time(n), modes)) {
            *e += f;
        }
        extra
    };
    let (a, b, f) = linearization.at(&data.u0.coeffs, &data.u1.coeffs, 0.0)?;
    let f = with_forcing(f, 0);
    let input = StepInput { a: a.as_ref(), b: b.as_ref(), forcing: &f };
    let mut stepper = Stepper::new(config, &lambda, data, input, grid.steps)?;
    let mut times = vec![0.0];
    let mut snapshots = vec![snapshot(stepper.state())];
    for n in 1..=grid.steps {
        let st = stepper.state();
        let (a, b, f) = linearization.at(&st.x, &st.v, grid.time(n - 1))?;
        let f = with_forcing(f, n);
        stepper.advance(StepInput { a: a.as_ref(), b: b.as_ref(), forcing: &f })?;
        times.push(grid.time(n));
        snapshots.push(snapshot(stepper.state()));
    }
    Ok(Trajectory::new(times, snapshots).strided(config.output_stride))
}

fn snapshot(state: &ModalState) -> Snapshot {
    Snapshot { x: state.x.clone(), v: state.v.clone(), w: state.w.clone() }
}

/// Linear or fixed-point solve according to `config.mode`.
pub fn solve(config: &ScenarioConfig, data: &InitialData) -> Result<Trajectory> {
    match config.mode {
        NonlinearityMode::Linear => solve_linear(config, data),
        _ => solve_nonlinear(config, data, PicardOptions::from_config(config)).map(|r| r.0),
    }
}

/// The `tau = 0` problem. Only `u0` and `u1` are used.
pub fn limiting_solve(config: &ScenarioConfig, data: &InitialData) -> Result<Trajectory> {
    let limit = config.limiting();
    let data = InitialData {
        u2: crate::spectral::ModalField::zeros(config.domain),
        ..data.clone()
    };
    solve(&limit, &data)
}
