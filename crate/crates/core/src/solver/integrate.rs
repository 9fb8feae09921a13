use nalgebra::DMatrix;

use super::config::{InitialData, ScenarioConfig};
use super::stepper::{StepInput, Stepper};
use super::trajectory::{Snapshot, Trajectory};
use crate::error::{Error, Result};
use crate::spectral::{eigenpairs, nonlinearity, NonlinearityMode, PhysicalState, SpectralBasis};

/// Coefficients and extra forcing frozen along a whole trajectory, indexed
/// by time step. Empty coefficient lists mean `a = 1` or `b = 1`.
#[derive(Debug, Clone, Default)]
pub(crate) struct Frozen {
    pub a: Vec<DMatrix<f64>>,
    pub b: Vec<DMatrix<f64>>,
    pub forcing: Vec<Vec<f64>>,
}

fn coefficient(list: Option<&Vec<DMatrix<f64>>>, n: usize) -> Option<&DMatrix<f64>> {
    list.and_then(|l| l.get(n))
}

/// Frozen `a`, frozen `b` (both `None` when identically one) and extra forcing.
type Linearized = (Option<DMatrix<f64>>, Option<DMatrix<f64>>, Vec<f64>);

pub(crate) fn integrate(
    config: &ScenarioConfig,
    data: &InitialData,
    frozen: Option<&Frozen>,
) -> Result<Trajectory> {
    let grid = config.grid()?;
    let lambda = eigenpairs(&config.domain).eigenvalues;
    let modes = lambda.len();
    let forcing_at = |n: usize| -> Vec<f64> {
        let mut f = config.forcing.eval(grid.time(n), modes);
        if let Some(extra) = frozen.and_then(|fr| fr.forcing.get(n)) {
            for (a, b) in f.iter_mut().zip(extra) {
                *a += b;
            }
        }
        f
    };
    let a_list = frozen.map(|f| &f.a).filter(|l| !l.is_empty());
    let b_list = frozen.map(|f| &f.b).filter(|l| !l.is_empty());

    let f0 = forcing_at(0);
    let input0 = StepInput { a: coefficient(a_list, 0), b: coefficient(b_list, 0), forcing: &f0 };
    let mut stepper = Stepper::new(config, &lambda, data, input0, grid.steps)?;
    let mut times = Vec::with_capacity(grid.steps + 1);
    let mut snapshots = Vec::with_capacity(grid.steps + 1);
    let record = |s: &Stepper, times: &mut Vec<f64>, snaps: &mut Vec<Snapshot>| {
        let st = s.state();
        times.push(grid.time(st.n));
        snaps.push(Snapshot { x: st.x.clone(), v: st.v.clone(), w: st.w.clone() });
    };
    record(&stepper, &mut times, &mut snapshots);
    for n in 1..=grid.steps {
        let f = forcing_at(n);
        let input = StepInput { a: coefficient(a_list, n), b: coefficient(b_list, n), forcing: &f };
        stepper.advance(input)?;
        record(&stepper, &mut times, &mut snapshots);
    }
    Ok(Trajectory::new(times, snapshots))
}

/// Builds the coefficients `a(u*)`, `b(u*)` and forcing `-N(u*)` of the
/// linearization around one state.
pub(crate) struct Linearization<'a> {
    config: &'a ScenarioConfig,
    basis: SpectralBasis,
}

impl<'a> Linearization<'a> {
    pub fn new(config: &'a ScenarioConfig) -> Result<Self> {
        Ok(Self { config, basis: SpectralBasis::new(config.domain)? })
    }

    pub fn at(&self, x: &[f64], v: &[f64], time: f64) -> Result<Linearized> {
        let cfg = self.config;
        let u = self.basis.to_physical(x)?;
        let ut = self.basis.to_physical(v)?;
        let (driver, state) = match cfg.mode {
            NonlinearityMode::Linear => {
                return Ok((None, None, vec![0.0; x.len()]));
            }
            NonlinearityMode::Wb => {
                let state = PhysicalState { u: u.clone(), ut, ..Default::default() };
                (u, state)
            }
            NonlinearityMode::Kb => {
                let state = PhysicalState {
                    u,
                    ut: ut.clone(),
                    grad_u: self.basis.gradient(x)?,
                    grad_ut: self.basis.gradient(v)?,
                };
                (ut, state)
            }
        };
        let a = if cfg.k1 != 0.0 {
            let samples: Vec<f64> = driver.iter().map(|d| 1.0 + 2.0 * cfg.k1 * d).collect();
            let lowest = samples.iter().copied().fold(f64::INFINITY, f64::min);
            if !(lowest > 0.0) {
                return Err(Error::DegenerateCoefficient(format!(
                    "a = 1 + 2 k1 u drops to {lowest:e} at t = {time}"
                )));
            }
            Some(self.basis.coefficient_matrix(&samples)?)
        } else {
            None
        };
        let b = if cfg.k2 != 0.0 {
            let samples: Vec<f64> = driver.iter().map(|d| 1.0 - 2.0 * cfg.k2 * d).collect();
            let lowest = samples.iter().copied().fold(f64::INFINITY, f64::min);
            if !(lowest > 0.0) {
                return Err(Error::DegenerateCoefficient(format!(
                    "b = 1 - 2 k2 u drops to {lowest:e} at t = {time}"
                )));
            }
            Some(self.basis.coefficient_matrix(&samples)?)
        } else {
            None
        };
        let n = nonlinearity(cfg.mode, &state, cfg.k3)?;
        let forcing = if cfg.k3 != 0.0 {
            self.basis.to_modal(&n)?.into_iter().map(|v| -v).collect()
        } else {
            vec![0.0; x.len()]
        };
        Ok((a, b, forcing))
    }

    pub fn along(&self, traj: &Trajectory) -> Result<Frozen> {
        let mut frozen = Frozen::default();
        for (t, s) in traj.times.iter().zip(&traj.snapshots) {
            let (a, b, f) = self.at(&s.x, &s.v, *t)?;
            if let Some(a) = a {
                frozen.a.push(a);
            }
            if let Some(b) = b {
                frozen.b.push(b);
            }
            frozen.forcing.push(f);
        }
        Ok(frozen)
    }
}
