//! Monte-Carlo certificates for the kernel coercivity inequalities.
//!
//! Each certificate draws seeded smooth signals
//! `y(t) = sum_m c_m / m^2 sin(m pi t / T + phi_m)`, evaluates the discrete
//! quadratic form of one inequality, and records the smallest margin above the
//! admissible lower bound. Margins are divided by `max_n |y_n|^2`, so the pass
//! threshold is a relative round-off level.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fractional::{fractional_integral, trapezoid_l2};
use super::{build_weights, conv_apply_fast, ConvolutionWeights, Kernel, KernelPair};
use crate::error::{Error, Result};
use crate::grid::TimeGrid;

/// Relative margin below which a certificate fails.
pub const CERTIFICATE_TOLERANCE: f64 = 1e-10;

const SIGNAL_MODES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AssumptionId {
    /// `int (K1 * y') y >= -C |y(0)|^2`
    A2,
    /// `int (tau^a c^2 K1 * y + delta K2 * y') y' >= c ||y - y(0)||_inf^2 - C |y(0)|^2`
    A3,
    /// `int (K1 * y)' y >= -C |y(0)|^2`
    H2,
    /// `int (K1 * y) y >= 0`
    H3,
    /// `int (K2 * y) y >= 0`
    H4,
    /// `int (K2 * y)(K1 * y) >= Phi >= 0`, K2 more singular than K1
    H5I,
    /// `int (K2 * y)(K1 * y) >= Phi >= 0`, K2 less singular than K1
    H5II,
}

impl AssumptionId {
    pub const ALL: [AssumptionId; 7] = [
        AssumptionId::A2,
        AssumptionId::A3,
        AssumptionId::H2,
        AssumptionId::H3,
        AssumptionId::H4,
        AssumptionId::H5I,
        AssumptionId::H5II,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AssumptionId::A2 => "A2",
            AssumptionId::A3 => "A3",
            AssumptionId::H2 => "H2",
            AssumptionId::H3 => "H3",
            AssumptionId::H4 => "H4",
            AssumptionId::H5I => "H5_I",
            AssumptionId::H5II => "H5_II",
        }
    }
}

impl std::str::FromStr for AssumptionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_uppercase().replace(['_', '-', ' '], "");
        AssumptionId::ALL
            .into_iter()
            .find(|id| id.name().replace('_', "") == key)
            .ok_or_else(|| Error::InvalidInput(format!("unknown assumption '{s}'")))
    }
}

/// Physical constants entering the combined form of `A3`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertifyParams {
    pub tau: f64,
    pub c: f64,
    pub delta: f64,
}

impl Default for CertifyParams {
    fn default() -> Self {
        Self { tau: 0.0, c: 1.0, delta: 1.0 }
    }
}

/// Reproducible random test signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestSignal {
    pub seed: u64,
    pub coefficients: Vec<f64>,
    pub phases: Vec<f64>,
}

impl TestSignal {
    pub fn from_seed(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coefficients = (0..SIGNAL_MODES).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let phases = (0..SIGNAL_MODES)
            .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
            .collect();
        Self { seed, coefficients, phases }
    }

    /// Samples `y(t_0), .., y(t_N)`.
    pub fn samples(&self, grid: TimeGrid) -> Vec<f64> {
        let period = grid.final_time();
        grid.times()
            .iter()
            .map(|&t| {
                self.coefficients
                    .iter()
                    .zip(&self.phases)
                    .enumerate()
                    .map(|(i, (c, phi))| {
                        let m = (i + 1) as f64;
                        c / (m * m) * (m * std::f64::consts::PI * t / period + phi).sin()
                    })
                    .sum()
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoercivityCertificate {
    pub assumption_id: AssumptionId,
    pub trials: usize,
    /// Smallest `(form - lower bound) / max |y|^2` over all trials.
    pub worst_margin: f64,
    pub worst_witness: TestSignal,
    /// Fitted constant of the inequality, see [`certify`].
    pub empirical_constant: f64,
    /// Constant used in the admissible lower bound, when the bound has one.
    pub reference_constant: Option<f64>,
    pub pass: bool,
}

struct Trial {
    margin: f64,
    constant: Option<f64>,
}

struct Forms<'a> {
    id: AssumptionId,
    w1: &'a ConvolutionWeights,
    w2: &'a ConvolutionWeights,
    one: &'a ConvolutionWeights,
    step: f64,
    k1_order: f64,
    k2_order: f64,
    k1_norm: f64,
    params: CertifyParams,
    power_a: f64,
}

impl Forms<'_> {
    fn reference_constant(&self) -> Option<f64> {
        match self.id {
            AssumptionId::A2 | AssumptionId::H2 => Some(0.5 * self.k1_norm),
            AssumptionId::A3 => Some(0.5 * self.tau_scaled() * self.k1_norm),
            _ => None,
        }
    }

    fn tau_scaled(&self) -> f64 {
        self.params.tau.powf(self.power_a) * self.params.c * self.params.c
    }

    /// `(K * z)(t_n)` for `n = 1..N` from `z_1..z_N`.
    fn conv(w: &ConvolutionWeights, z: &[f64]) -> Result<Vec<f64>> {
        conv_apply_fast(w, z)
    }

    fn evaluate(&self, y: &[f64]) -> Result<Trial> {
        let y0 = y[0];
        let tail = &y[1..];
        let d: Vec<f64> = y.windows(2).map(|p| p[1] - p[0]).collect();
        let scale = y.iter().fold(0.0f64, |m, v| m.max(v * v)).max(f64::MIN_POSITIVE);
        let h = self.step;
        let bound = self.reference_constant().unwrap_or(0.0);
        let trial = match self.id {
            AssumptionId::A2 => {
                // sum_n y_n sum_k w_{n-k} d_k; the 1/h of y' cancels against the outer h
                let kd = Self::conv(self.w1, &d)?;
                let form: f64 = tail.iter().zip(&kd).map(|(a, b)| a * b).sum();
                let constant = (y0 * y0 > 1e-8 * scale).then(|| -form / (y0 * y0));
                Trial { margin: (form + bound * y0 * y0) / scale, constant }
            }
            AssumptionId::A3 => {
                let ky = Self::conv(self.w1, tail)?;
                let kd = Self::conv(self.w2, &d)?;
                let ts = self.tau_scaled();
                let form: f64 = d
                    .iter()
                    .zip(ky.iter().zip(&kd))
                    .map(|(dn, (a, b))| (ts * a + self.params.delta * b / h) * dn)
                    .sum();
                let lifted = form + bound * y0 * y0;
                let sup_shift = y.iter().fold(0.0f64, |m, v| m.max((v - y0) * (v - y0)));
                let constant = (sup_shift > 1e-12 * scale).then(|| lifted / sup_shift);
                Trial { margin: lifted / scale, constant }
            }
            AssumptionId::H2 => {
                let ky = Self::conv(self.w1, tail)?;
                let start = if self.w1.is_delta() { y0 } else { 0.0 };
                let form: f64 = tail
                    .iter()
                    .enumerate()
                    .map(|(i, yn)| {
                        let prev = if i == 0 { start } else { ky[i - 1] };
                        yn * (ky[i] - prev)
                    })
                    .sum();
                let constant = (y0 * y0 > 1e-8 * scale).then(|| -form / (y0 * y0));
                Trial { margin: (form + bound * y0 * y0) / scale, constant }
            }
            AssumptionId::H3 | AssumptionId::H4 => {
                let (w, order) = if self.id == AssumptionId::H3 {
                    (self.w1, self.k1_order)
                } else {
                    (self.w2, self.k2_order)
                };
                let ky = Self::conv(w, tail)?;
                let form: f64 = h * tail.iter().zip(&ky).map(|(a, b)| a * b).sum::<f64>();
                let reference = if order > 0.0 {
                    let z = fractional_integral((order / 2.0).min(1.0), y, h)?;
                    trapezoid_l2(&z, h).powi(2)
                } else {
                    trapezoid_l2(y, h).powi(2)
                };
                let constant = (reference > 0.0).then(|| form / reference);
                Trial { margin: form / scale, constant }
            }
            AssumptionId::H5I | AssumptionId::H5II => {
                let k1y = Self::conv(self.w1, tail)?;
                let k2y = Self::conv(self.w2, tail)?;
                let mut running = 0.0;
                let mut lowest = f64::INFINITY;
                let mut highest = f64::NEG_INFINITY;
                for (a, b) in k1y.iter().zip(&k2y) {
                    running += h * a * b;
                    lowest = lowest.min(running);
                    highest = highest.max(running);
                }
                let one_y = Self::conv(self.one, tail)?;
                let one_one_y = Self::conv(self.one, &one_y)?;
                let l2 = |v: &[f64]| h * v.iter().map(|x| x * x).sum::<f64>();
                let sup2 = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x * x));
                let norm = if self.id == AssumptionId::H5I {
                    l2(&k1y).max(l2(&one_one_y))
                } else {
                    let k1_one_y = Self::conv(self.w1, &one_y)?;
                    l2(&one_y).max(sup2(&one_one_y)).max(sup2(&k1_one_y))
                };
                let constant = (norm > 0.0).then(|| highest / norm);
                Trial { margin: lowest / scale, constant }
            }
        };
        Ok(trial)
    }
}

fn case_gate(id: AssumptionId, pair: &KernelPair) -> Result<()> {
    if !matches!(id, AssumptionId::H5I | AssumptionId::H5II) {
        return Ok(());
    }
    let (Some(o1), Some(o2)) = (pair.k1.singularity_order(), pair.k2.singularity_order()) else {
        return Err(Error::CaseMismatch(
            "the singularity ordering of tabulated kernels is not known".into(),
        ));
    };
    match id {
        AssumptionId::H5I if o2 > o1 => Err(Error::CaseMismatch(format!(
            "case I needs K2 at least as singular as K1, got orders {o2} > {o1}"
        ))),
        AssumptionId::H5II if o2 < o1 => Err(Error::CaseMismatch(format!(
            "case II needs K2 at most as singular as K1, got orders {o2} < {o1}"
        ))),
        _ => Ok(()),
    }
}

/// Runs `trials` seeded signals through the discrete form of `id`.
///
/// Trial `i` uses seed `seed + i`. The empirical constant is
/// * `A2`, `H2`: the largest `-Q / y(0)^2`, i.e. the smallest admissible `C`;
/// * `A3`: the smallest `(Q + C y(0)^2) / ||y - y(0)||_inf^2` with the reference `C`;
/// * `H3`, `H4`: the smallest ratio of the form to `||I^(a/2) y||^2`, `a` the kernel order;
/// * `H5_I`, `H5_II`: the smallest ratio of `sup_t Phi` to the case norm.
///
/// `A3` and `H5` additionally fail when that constant is not positive.
pub fn certify(
    id: AssumptionId,
    pair: &KernelPair,
    params: CertifyParams,
    grid: TimeGrid,
    trials: usize,
    seed: u64,
) -> Result<CoercivityCertificate> {
    if trials == 0 {
        return Err(Error::InvalidInput("certificate needs at least one trial".into()));
    }
    case_gate(id, pair)?;
    let n = grid.steps;
    let w1 = build_weights(&pair.k1, grid.step, n)?;
    let w2 = build_weights(&pair.k2, grid.step, n)?;
    let one = build_weights(&Kernel::ConstantOne, grid.step, n)?;
    let forms = Forms {
        id,
        w1: &w1,
        w2: &w2,
        one: &one,
        step: grid.step,
        k1_order: pair.k1.singularity_order().unwrap_or(0.0),
        k2_order: pair.k2.singularity_order().unwrap_or(0.0),
        k1_norm: pair.k1.measure_norm(grid.final_time()),
        params,
        power_a: pair.power_a,
    };

    let results: Vec<(u64, Trial)> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            let y = TestSignal::from_seed(s).samples(grid);
            forms.evaluate(&y).map(|t| (s, t))
        })
        .collect::<Result<_>>()?;

    let mut worst = (f64::INFINITY, seed);
    let mut constants = Vec::with_capacity(trials);
    for (s, t) in &results {
        if t.margin < worst.0 {
            worst = (t.margin, *s);
        }
        if let Some(c) = t.constant {
            constants.push(c);
        }
    }
    let largest_is_worst = matches!(id, AssumptionId::A2 | AssumptionId::H2);
    let empirical_constant = if largest_is_worst {
        constants.iter().copied().fold(0.0, f64::max)
    } else {
        constants.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let empirical_constant = if empirical_constant.is_finite() { empirical_constant } else { 0.0 };
    let needs_positive = matches!(id, AssumptionId::A3 | AssumptionId::H5I | AssumptionId::H5II);
    let pass = worst.0 >= -CERTIFICATE_TOLERANCE && (!needs_positive || empirical_constant > 0.0);
    Ok(CoercivityCertificate {
        assumption_id: id,
        trials,
        worst_margin: worst.0,
        worst_witness: TestSignal::from_seed(worst.1),
        empirical_constant,
        reference_constant: forms.reference_constant(),
        pass,
    })
}
