use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::kernels::{KernelPair, ScenarioTag};
use crate::spectral::{Domain, ModalField, NonlinearityMode};

/// Temporal factor of one separable forcing term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TimeProfile {
    Constant,
    Sin { omega: f64 },
    Cos { omega: f64 },
}

impl TimeProfile {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeProfile::Constant => 1.0,
            TimeProfile::Sin { omega } => (omega * t).sin(),
            TimeProfile::Cos { omega } => (omega * t).cos(),
        }
    }
}

/// `modal(x) * profile(t)`, with `modal` given as modal coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForcingTerm {
    pub modal: Vec<f64>,
    pub profile: TimeProfile,
}

/// Sum of separable terms; empty means `f = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Forcing {
    pub terms: Vec<ForcingTerm>,
}

impl Forcing {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Modal forcing at time `t`.
    pub fn eval(&self, t: f64, modes: usize) -> Vec<f64> {
        let mut out = vec![0.0; modes];
        for term in &self.terms {
            let s = term.profile.eval(t);
            for (o, m) in out.iter_mut().zip(&term.modal) {
                *o += m * s;
            }
        }
        out
    }
}

/// Complete description of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub pair: KernelPair,
    /// Fractional order of the named law, when it has one.
    pub alpha: Option<f64>,
    pub tau: f64,
    /// Upper end of the admissible relaxation-time range.
    pub tau_bar: f64,
    /// Merged damping coefficient.
    pub delta: f64,
    pub c: f64,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub mode: NonlinearityMode,
    pub forcing: Forcing,
    pub final_time: f64,
    pub step: f64,
    pub domain: Domain,
    pub output_stride: usize,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
}

impl ScenarioConfig {
    /// Linear run of a named law with unit sound speed and no forcing.
    pub fn named(tag: ScenarioTag, alpha: f64, domain: Domain) -> Result<Self> {
        let pair = KernelPair::named(tag, alpha)?;
        Ok(Self {
            alpha: pair.alpha(),
            pair,
            tau: 0.0,
            tau_bar: 1.0,
            delta: 0.0,
            c: 1.0,
            k1: 0.0,
            k2: 0.0,
            k3: 0.0,
            mode: NonlinearityMode::Linear,
            forcing: Forcing::zero(),
            final_time: 1.0,
            step: 1e-3,
            domain,
            output_stride: 1,
            picard_tol: 1e-10,
            picard_max_iter: 50,
        })
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::covering(self.final_time, self.step)
    }

    /// `tau^a`, with `0^a = 0`.
    pub fn tau_power(&self) -> f64 {
        if self.tau == 0.0 {
            0.0
        } else {
            self.tau.powf(self.pair.power_a)
        }
    }

    /// Same scenario at `tau = 0`.
    pub fn limiting(&self) -> Self {
        Self { tau: 0.0, ..self.clone() }
    }

    /// Every violated invariant, in one error.
    pub fn validate(&self, data: Option<&InitialData>) -> Result<()> {
        let mut issues = Vec::new();
        if let Err(e) = self.pair.validate(self.alpha) {
            issues.push(e.to_string());
        }
        if let Err(e) = self.domain.validate() {
            issues.push(e.to_string());
        }
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.tau) {
            issues.push(format!("tau must be nonnegative, got {}", self.tau));
        }
        if !(self.tau_bar.is_finite() && self.tau_bar > 0.0) {
            issues.push(format!("tau_bar must be positive, got {}", self.tau_bar));
        } else if self.tau > self.tau_bar {
            issues.push(format!("tau = {} exceeds tau_bar = {}", self.tau, self.tau_bar));
        }
        if !finite_nonneg(self.delta) {
            issues.push(format!("delta must be nonnegative, got {}", self.delta));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            issues.push(format!("c must be positive, got {}", self.c));
        }
        for (name, v) in [("k1", self.k1), ("k2", self.k2), ("k3", self.k3)] {
            if !v.is_finite() {
                issues.push(format!("{name} must be finite"));
            }
        }
        if !(self.final_time.is_finite() && self.final_time > 0.0) {
            issues.push(format!("T must be positive, got {}", self.final_time));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            issues.push(format!("dt must be positive, got {}", self.step));
        } else if self.step > self.final_time {
            issues.push(format!("dt = {} exceeds T = {}", self.step, self.final_time));
        }
        if self.output_stride == 0 {
            issues.push("output stride must be at least 1".into());
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            issues.push(format!("picard_tol must be positive, got {}", self.picard_tol));
        }
        if self.picard_max_iter == 0 {
            issues.push("picard_max_iter must be at least 1".into());
        }
        let modes = self.domain.mode_count();
        for (i, term) in self.forcing.terms.iter().enumerate() {
            if term.modal.len() != modes {
                issues.push(format!(
                    "forcing term {i} has {} coefficients for {modes} modes",
                    term.modal.len()
                ));
            }
        }
        if self.mode == NonlinearityMode::Kb && self.domain.dimension() != 1 {
            issues.push("the KB nonlinearity is only supported on an interval".into());
        }
        if let Some(alpha) = self.alpha {
            match self.pair.scenario_tag {
                ScenarioTag::GfeIii if alpha <= 0.5 => issues.push(format!(
                    "gfe3 needs alpha > 1/2 so that the resolvent of K1 lies in L^2, got alpha = {alpha}"
                )),
                ScenarioTag::GfeI if alpha > 0.5 => {
                    let allowed = self.mode == NonlinearityMode::Linear
                        || (self.mode == NonlinearityMode::Wb && self.k1 == 0.0);
                    if !allowed {
                        issues.push(format!(
                            "gfe1 with alpha = {alpha} > 1/2 supports only linear runs or WB with k1 = 0"
                        ));
                    }
                }
                _ => {}
            }
        }
        if let Some(data) = data {
            for (name, field) in [("u0", &data.u0), ("u1", &data.u1), ("u2", &data.u2)] {
                if field.coeffs.len() != modes {
                    issues.push(format!(
                        "{name} has {} coefficients for {modes} modes",
                        field.coeffs.len()
                    ));
                }
                if field.coeffs.iter().any(|c| !c.is_finite()) {
                    issues.push(format!("{name} has non-finite coefficients"));
                }
            }
            let needs_zero_u2 = self.tau > 0.0 && !self.pair.k1.is_delta()
                || (self.pair.scenario_tag == ScenarioTag::GfeI
                    && self.alpha.is_some_and(|a| a > 0.5));
            if needs_zero_u2 && data.u2.coeffs.iter().any(|&c| c != 0.0) {
                issues.push("u2 must vanish when the leading kernel is not the Dirac delta".into());
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(issues))
        }
    }
}

/// `(u, u_t, u_tt)` at `t = 0` in modal coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub u0: ModalField,
    pub u1: ModalField,
    pub u2: ModalField,
}

impl InitialData {
    pub fn zeros(domain: Domain) -> Self {
        Self {
            u0: ModalField::zeros(domain),
            u1: ModalField::zeros(domain),
            u2: ModalField::zeros(domain),
        }
    }

    /// Data from plain sine amplitudes, listed in ascending eigenvalue order.
    pub fn from_amplitudes(domain: Domain, u0: &[f64], u1: &[f64], u2: &[f64]) -> Result<Self> {
        Ok(Self {
            u0: ModalField::from_sine_amplitudes(domain, u0)?,
            u1: ModalField::from_sine_amplitudes(domain, u1)?,
            u2: ModalField::from_sine_amplitudes(domain, u2)?,
        })
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let s = |f: &ModalField| ModalField {
            domain: f.domain,
            coeffs: f.coeffs.iter().map(|c| c * factor).collect(),
        };
        Self { u0: s(&self.u0), u1: s(&self.u1), u2: s(&self.u2) }
    }
}
