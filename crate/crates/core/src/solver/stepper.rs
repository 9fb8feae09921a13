//! One implicit time step of the linearized equation in modal coordinates.
//!
//! With acceleration `w_n` as unknown, velocity and displacement follow the
//! trapezoidal updates
//!
//! ```text
//! v_n = v_{n-1} + h/2 (w_{n-1} + w_n)
//! x_n = x_{n-1} + h/2 (v_{n-1} + v_n)
//! ```
//!
//! and the equation
//!
//! ```text
//! tau^a (K1 * w)_t + a w + c^2 b Lambda x + tau^a c^2 Lambda (K1 * v) + delta Lambda (K2 * w) = f
//! ```
//!
//! is averaged over `[t_{n-1}, t_n]` with the leading term differenced.
//! Everything is affine in `w_n`, so each step is one linear solve.

use nalgebra::{DMatrix, DVector};

use super::config::{InitialData, ScenarioConfig};
use crate::error::{Error, Result};
use crate::kernels::{build_weights, ConvolutionWeights, Kernel};

/// Multiplier of an unknown modal vector at the new time level, plus the
/// part fixed by the history.
struct Affine {
    slope: f64,
    base: Vec<f64>,
}

/// How a kernel acts in the discrete convolution.
enum Rule {
    Delta,
    /// `1 * z`, evaluated as the running integral of the trapezoidal updates.
    Constant,
    Weights(ConvolutionWeights),
}

impl Rule {
    fn new(kernel: &Kernel, step: f64, count: usize) -> Result<Self> {
        Ok(match kernel {
            Kernel::DiracDelta => Rule::Delta,
            Kernel::ConstantOne => Rule::Constant,
            other => Rule::Weights(build_weights(other, step, count)?),
        })
    }
}

/// Frozen data entering one step at the new time level. `None`
/// coefficients mean `a = 1`, `b = 1`.
#[derive(Debug, Clone, Copy)]
pub struct StepInput<'a> {
    pub a: Option<&'a DMatrix<f64>>,
    pub b: Option<&'a DMatrix<f64>>,
    pub forcing: &'a [f64],
}

/// Modal state at step `n` with the histories needed by the convolutions.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState {
    pub n: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    pub w: Vec<f64>,
    /// `w_1..w_n`, the densities seen by the convolutions.
    w_history: Vec<Vec<f64>>,
    /// `v_1..v_n`.
    v_history: Vec<Vec<f64>>,
    /// `(K1 * w)(t_n)`, whose difference quotient is the leading term.
    mu: Vec<f64>,
}

impl ModalState {
    pub fn history_len(&self) -> usize {
        self.w_history.len()
    }

    /// Accelerations `w_1..w_n`.
    pub fn w_history(&self) -> &[Vec<f64>] {
        &self.w_history
    }
}

pub struct Stepper {
    step: f64,
    lambda: Vec<f64>,
    c2: f64,
    delta: f64,
    tau_a: f64,
    k1: Rule,
    k2: Rule,
    x0: Vec<f64>,
    v0: Vec<f64>,
    state: ModalState,
    /// Averaged-equation operator at the previous level.
    e_prev: Vec<f64>,
    f_prev: Vec<f64>,
    guard: f64,
}

fn mat_vec(m: Option<&DMatrix<f64>>, v: &[f64]) -> Vec<f64> {
    match m {
        Some(m) => (m * DVector::from_column_slice(v)).data.into(),
        None => v.to_vec(),
    }
}

fn state_norm(x: &[f64], v: &[f64]) -> f64 {
    x.iter().chain(v).map(|c| c * c).sum::<f64>().sqrt()
}

impl Stepper {
    /// Sets up step 0. For `tau > 0` the acceleration starts at `u2`; at
    /// `tau = 0` it is computed from the equation at `t = 0`.
    pub fn new(
        config: &ScenarioConfig,
        lambda: &[f64],
        data: &InitialData,
        input0: StepInput<'_>,
        steps: usize,
    ) -> Result<Self> {
        let step = config.grid()?.step;
        let modes = lambda.len();
        let x0 = data.u0.coeffs.clone();
        let v0 = data.u1.coeffs.clone();
        let tau_a = config.tau_power();
        let k1 = Rule::new(&config.pair.k1, step, steps.max(1))?;
        let k2 = Rule::new(&config.pair.k2, step, steps.max(1))?;
        let c2 = config.c * config.c;
        let mut stepper = Self {
            step,
            lambda: lambda.to_vec(),
            c2,
            delta: config.delta,
            tau_a,
            k1,
            k2,
            x0: x0.clone(),
            v0: v0.clone(),
            state: ModalState {
                n: 0,
                x: x0.clone(),
                v: v0.clone(),
                w: vec![0.0; modes],
                w_history: Vec::new(),
                v_history: Vec::new(),
                mu: vec![0.0; modes],
            },
            e_prev: vec![0.0; modes],
            f_prev: input0.forcing.to_vec(),
            guard: 1e6 * state_norm(&x0, &v0).max(1.0),
        };
        let w0 = if tau_a > 0.0 {
            data.u2.coeffs.clone()
        } else {
            stepper.consistent_acceleration(input0)?
        };
        stepper.state.w = w0.clone();
        stepper.state.mu = match stepper.k1 {
            Rule::Delta => w0.clone(),
            _ => vec![0.0; modes],
        };
        let c1v = match stepper.k1 {
            Rule::Delta => v0.clone(),
            _ => vec![0.0; modes],
        };
        let c2w = match stepper.k2 {
            Rule::Delta => w0.clone(),
            _ => vec![0.0; modes],
        };
        stepper.e_prev = stepper.operator(input0, &w0, &x0, &c1v, &c2w);
        Ok(stepper)
    }

    pub fn state(&self) -> &ModalState {
        &self.state
    }

    pub fn step_size(&self) -> f64 {
        self.step
    }

    /// `a w + c^2 b Lambda x + tau^a c^2 Lambda (K1 * v) + delta Lambda (K2 * w)`.
    fn operator(
        &self,
        input: StepInput<'_>,
        w: &[f64],
        x: &[f64],
        c1v: &[f64],
        c2w: &[f64],
    ) -> Vec<f64> {
        let aw = mat_vec(input.a, w);
        let lx: Vec<f64> = x.iter().zip(&self.lambda).map(|(x, l)| l * x).collect();
        let blx = mat_vec(input.b, &lx);
        (0..w.len())
            .map(|k| {
                aw[k]
                    + self.c2 * blx[k]
                    + self.tau_a * self.c2 * self.lambda[k] * c1v[k]
                    + self.delta * self.lambda[k] * c2w[k]
            })
            .collect()
    }

    fn consistent_acceleration(&self, input: StepInput<'_>) -> Result<Vec<f64>> {
        let modes = self.lambda.len();
        let lx: Vec<f64> = self.state.x.iter().zip(&self.lambda).map(|(x, l)| l * x).collect();
        let blx = mat_vec(input.b, &lx);
        let rhs: Vec<f64> = (0..modes).map(|k| input.forcing[k] - self.c2 * blx[k]).collect();
        let damping = match self.k2 {
            Rule::Delta => self.delta,
            _ => 0.0,
        };
        let mut j = match input.a {
            Some(a) => a.clone(),
            None => DMatrix::identity(modes, modes),
        };
        for k in 0..modes {
            j[(k, k)] += damping * self.lambda[k];
        }
        solve(j, rhs)
    }

    /// `(K * z)(t_n)` as an affine function of `z_n`, where `z_n = z_b + s w_n`.
    fn conv_affine(
        rule: &Rule,
        history: &[Vec<f64>],
        z_base: &[f64],
        z_slope: f64,
        running: (&[f64], f64),
    ) -> Affine {
        // `running` is the affine integral of z: (base, slope) of int_0^t_n z
        match rule {
            Rule::Delta => Affine { slope: z_slope, base: z_base.to_vec() },
            Rule::Constant => Affine { slope: running.1, base: running.0.to_vec() },
            Rule::Weights(w) => {
                let lead = w.leading();
                let modes = z_base.len();
                let mut base: Vec<f64> = z_base.iter().map(|z| lead * z).collect();
                let n = history.len() + 1;
                let weights = w.weights();
                for (j, z) in history.iter().enumerate() {
                    let wt = weights[n - 1 - j];
                    for k in 0..modes {
                        base[k] += wt * z[k];
                    }
                }
                Affine { slope: lead * z_slope, base }
            }
        }
    }

    /// Advances to `t_{n+1}` with the frozen data at the new level.
    pub fn advance(&mut self, input: StepInput<'_>) -> Result<()> {
        let h = self.step;
        let modes = self.lambda.len();
        let s = &self.state;
        if s.n + 1 > self.capacity() {
            return Err(Error::ShapeError("stepper ran past its convolution weights".into()));
        }
        // v_n = vb + h/2 w_n,  x_n = xb + h^2/4 w_n
        let vb: Vec<f64> = (0..modes).map(|k| s.v[k] + 0.5 * h * s.w[k]).collect();
        let xb: Vec<f64> = (0..modes)
            .map(|k| s.x[k] + h * s.v[k] + 0.25 * h * h * s.w[k])
            .collect();
        let v_minus_v0: Vec<f64> = (0..modes).map(|k| vb[k] - self.v0[k]).collect();
        let x_minus_x0: Vec<f64> = (0..modes).map(|k| xb[k] - self.x0[k]).collect();

        let c1w = Self::conv_affine(&self.k1, &s.w_history, &vec![0.0; modes], 1.0, (&v_minus_v0, 0.5 * h));
        let c1v = Self::conv_affine(&self.k1, &s.v_history, &vb, 0.5 * h, (&x_minus_x0, 0.25 * h * h));
        let c2w = Self::conv_affine(&self.k2, &s.w_history, &vec![0.0; modes], 1.0, (&v_minus_v0, 0.5 * h));

        // residual at w_n = 0
        let zero = vec![0.0; modes];
        let e0 = self.operator(input, &zero, &xb, &c1v.base, &c2w.base);
        let rhs: Vec<f64> = (0..modes)
            .map(|k| {
                let lead = self.tau_a * (c1w.base[k] - s.mu[k]) / h;
                let r0 = lead + 0.5 * (e0[k] + self.e_prev[k]) - 0.5 * (input.forcing[k] + self.f_prev[k]);
                -r0
            })
            .collect();

        let diag: Vec<f64> = (0..modes)
            .map(|k| {
                self.tau_a * c1w.slope / h
                    + 0.5 * (self.tau_a * self.c2 * self.lambda[k] * c1v.slope
                        + self.delta * self.lambda[k] * c2w.slope)
            })
            .collect();
        let w_new = if input.a.is_none() && input.b.is_none() {
            let mut out = Vec::with_capacity(modes);
            for k in 0..modes {
                let j = diag[k] + 0.5 + 0.125 * self.c2 * h * h * self.lambda[k];
                if !(j.abs() > 0.0) || !j.is_finite() {
                    return Err(Error::DegenerateCoefficient(format!(
                        "implicit operator vanishes in mode {}",
                        k + 1
                    )));
                }
                out.push(rhs[k] / j);
            }
            out
        } else {
            let mut j = match input.a {
                Some(a) => a * 0.5,
                None => DMatrix::identity(modes, modes) * 0.5,
            };
            let scale = 0.125 * self.c2 * h * h;
            match input.b {
                Some(b) => {
                    for col in 0..modes {
                        for row in 0..modes {
                            j[(row, col)] += scale * b[(row, col)] * self.lambda[col];
                        }
                    }
                }
                None => {
                    for k in 0..modes {
                        j[(k, k)] += scale * self.lambda[k];
                    }
                }
            }
            for k in 0..modes {
                j[(k, k)] += diag[k];
            }
            solve(j, rhs)?
        };

        let v_new: Vec<f64> = (0..modes).map(|k| vb[k] + 0.5 * h * w_new[k]).collect();
        let x_new: Vec<f64> = (0..modes).map(|k| xb[k] + 0.25 * h * h * w_new[k]).collect();
        let at = |a: &Affine| -> Vec<f64> {
            (0..modes).map(|k| a.base[k] + a.slope * w_new[k]).collect()
        };
        let mu_new = at(&c1w);
        let c1v_new = at(&c1v);
        let c2w_new = at(&c2w);
        self.e_prev = self.operator(input, &w_new, &x_new, &c1v_new, &c2w_new);
        self.f_prev = input.forcing.to_vec();

        let norm = state_norm(&x_new, &v_new);
        let time = (self.state.n + 1) as f64 * h;
        if !norm.is_finite() || norm > self.guard {
            return Err(Error::Runaway { time, norm });
        }
        let s = &mut self.state;
        s.n += 1;
        s.w_history.push(w_new.clone());
        s.v_history.push(v_new.clone());
        s.x = x_new;
        s.v = v_new;
        s.w = w_new;
        s.mu = mu_new;
        Ok(())
    }

    fn capacity(&self) -> usize {
        let cap = |r: &Rule| match r {
            Rule::Weights(w) => w.count(),
            _ => usize::MAX,
        };
        cap(&self.k1).min(cap(&self.k2))
    }
}

fn solve(j: DMatrix<f64>, rhs: Vec<f64>) -> Result<Vec<f64>> {
    let n = rhs.len();
    let scale = j.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let lu = j.lu();
    let det_ok = lu.u().diagonal().iter().all(|d| d.abs() > 1e-14 * scale.max(1e-300));
    if !det_ok {
        return Err(Error::DegenerateCoefficient("implicit step operator is singular".into()));
    }
    let sol = lu
        .solve(&DVector::from_vec(rhs))
        .ok_or_else(|| Error::DegenerateCoefficient("implicit step operator is singular".into()))?;
    if sol.iter().any(|v| !v.is_finite()) || sol.len() != n {
        return Err(Error::NumericalError("non-finite acceleration".into()));
    }
    Ok(sol.data.into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::ScenarioTag;
    use crate::spectral::Domain;
    use approx::assert_relative_eq;

    fn single_mode(tag: ScenarioTag) -> (ScenarioConfig, InitialData) {
        let d = Domain::interval(1.0, 1).unwrap();
        let mut cfg = ScenarioConfig::named(tag, 0.5, d).unwrap();
        cfg.step = 0.01;
        let data = InitialData::from_amplitudes(d, &[(2.0f64).sqrt()], &[], &[]).unwrap();
        (cfg, data)
    }

    #[test]
    fn tau_zero_is_trapezoidal_oscillator() {
        let (cfg, data) = single_mode(ScenarioTag::Jmgt);
        let lam = std::f64::consts::PI.powi(2);
        let zero = [0.0];
        let input = StepInput { a: None, b: None, forcing: &zero };
        let mut s = Stepper::new(&cfg, &[lam], &data, input, 10).unwrap();
        assert_relative_eq!(s.state().x[0], 1.0, epsilon = 1e-15);
        assert_relative_eq!(s.state().w[0], -lam, epsilon = 1e-12);
        s.advance(input).unwrap();
        // average-acceleration update for x'' + lam x = 0
        let h = 0.01;
        let x1 = (1.0 - 0.25 * h * h * lam) / (1.0 + 0.25 * h * h * lam);
        assert_relative_eq!(s.state().x[0], x1, epsilon = 1e-14);
        assert_relative_eq!(s.state().w[0], -lam * x1, epsilon = 1e-12);
        assert_relative_eq!(s.state().v[0], 0.5 * h * (-lam - lam * x1), epsilon = 1e-13);
    }

    #[test]
    fn zero_state_stays_zero() {
        let d = Domain::interval(1.0, 3).unwrap();
        let mut cfg = ScenarioConfig::named(ScenarioTag::GfeI, 0.3, d).unwrap();
        cfg.tau = 0.1;
        cfg.delta = 0.5;
        let data = InitialData::zeros(d);
        let lam = [1.0, 4.0, 9.0];
        let zero = [0.0; 3];
        let input = StepInput { a: None, b: None, forcing: &zero };
        let mut s = Stepper::new(&cfg, &lam, &data, input, 20).unwrap();
        for _ in 0..20 {
            s.advance(input).unwrap();
        }
        assert!(s.state().x.iter().chain(&s.state().v).chain(&s.state().w).all(|&v| v == 0.0));
        assert!(s.advance(input).is_err());
    }

    #[test]
    fn dense_path_matches_diagonal_path() {
        let d = Domain::interval(1.0, 3).unwrap();
        let mut cfg = ScenarioConfig::named(ScenarioTag::Gfe, 0.5, d).unwrap();
        cfg.tau = 0.05;
        cfg.delta = 0.3;
        let data = InitialData::from_amplitudes(d, &[1.0, 0.2, -0.1], &[0.3], &[]).unwrap();
        let lam = [1.0, 4.0, 9.0];
        let f = [0.1, 0.0, 0.2];
        let id = DMatrix::<f64>::identity(3, 3);
        let diag = StepInput { a: None, b: None, forcing: &f };
        let dense = StepInput { a: Some(&id), b: Some(&id), forcing: &f };
        let mut s1 = Stepper::new(&cfg, &lam, &data, diag, 30).unwrap();
        let mut s2 = Stepper::new(&cfg, &lam, &data, dense, 30).unwrap();
        for _ in 0..30 {
            s1.advance(diag).unwrap();
            s2.advance(dense).unwrap();
        }
        for k in 0..3 {
            assert_relative_eq!(s1.state().x[k], s2.state().x[k], epsilon = 1e-13);
            assert_relative_eq!(s1.state().w[k], s2.state().w[k], epsilon = 1e-11);
        }
    }

    #[test]
    fn negative_mass_is_degenerate() {
        let d = Domain::interval(1.0, 2).unwrap();
        let cfg = ScenarioConfig::named(ScenarioTag::Jmgt, 0.5, d).unwrap();
        let data = InitialData::zeros(d);
        let zero_mass = DMatrix::<f64>::zeros(2, 2);
        let f = [0.0; 2];
        let input = StepInput { a: Some(&zero_mass), b: None, forcing: &f };
        assert!(matches!(
            Stepper::new(&cfg, &[1.0, 4.0], &data, input, 5),
            Err(Error::DegenerateCoefficient(_))
        ));
    }

    #[test]
    fn reconstruction_identity() {
        let (mut cfg, data) = single_mode(ScenarioTag::Jmgt);
        cfg.tau = 0.05;
        cfg.delta = 0.2;
        let lam = [std::f64::consts::PI.powi(2)];
        let zero = [0.0];
        let input = StepInput { a: None, b: None, forcing: &zero };
        let mut s = Stepper::new(&cfg, &lam, &data, input, 50).unwrap();
        let w0 = s.state().w[0];
        for _ in 0..50 {
            s.advance(input).unwrap();
        }
        let ws: Vec<f64> = std::iter::once(w0).chain(s.state().w_history().iter().map(|w| w[0])).collect();
        let trapezoid: f64 = ws.windows(2).map(|p| 0.5 * 0.01 * (p[0] + p[1])).sum();
        assert!((s.state().v[0] - data.u1.coeffs[0] - trapezoid).abs() < 1e-13);
    }
}
