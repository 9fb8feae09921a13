//! Memory kernels and the operations built on them.
//!
//! A [`Kernel`] is either the Dirac delta at the origin, an Abel kernel
//! `g_a(t) = t^(a-1) / Gamma(a)` with `0 < a < 1`, the constant kernel `1`,
//! or a tabulated sample set. Convolutions `(K * z)(t)` are discretized by
//! right-endpoint product integration with exact kernel moments, see
//! [`ConvolutionWeights`].

mod coercivity;
mod fractional;
mod table;
mod weights;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::TimeGrid;

pub use coercivity::{
    certify, AssumptionId, CertifyParams, CoercivityCertificate, TestSignal, CERTIFICATE_TOLERANCE,
};
pub use fractional::{fourier_symbol, fractional_integral, neg_sobolev_norm};
pub use table::{ScenarioTable, TableEntry, TableRow};
pub use weights::{build_weights, conv_apply, conv_apply_fast, conv_apply_naive, ConvolutionWeights};

pub(crate) fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Sampled kernel with strictly increasing abscissae.
///
/// Between samples the kernel is linearly interpolated. On `[0, t_0)` a power
/// law `v_0 (t / t_0)^p` fitted through the first two samples is used, so
/// weakly singular tables keep an integrable head. Past the last sample the
/// last value is held.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedKernel {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedKernel {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        let table = Self { grid, values };
        table.validate()?;
        Ok(table)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn validate(&self) -> Result<()> {
        if self.grid.len() < 2 {
            return Err(Error::DomainError("tabulated kernel needs at least two points".into()));
        }
        if self.grid.len() != self.values.len() {
            return Err(Error::DomainError(format!(
                "tabulated kernel has {} abscissae but {} values",
                self.grid.len(),
                self.values.len()
            )));
        }
        if self.grid[0] < 0.0 || !self.grid.iter().all(|t| t.is_finite()) {
            return Err(Error::DomainError("tabulated grid must be finite and nonnegative".into()));
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::DomainError("tabulated grid must be strictly increasing".into()));
        }
        if !self.values.iter().all(|v| v.is_finite()) {
            return Err(Error::DomainError("tabulated values must be finite".into()));
        }
        Ok(())
    }

    /// Exponent of the power-law head, if the first two samples support one.
    fn head_exponent(&self) -> Option<f64> {
        let (t0, t1) = (self.grid[0], self.grid[1]);
        let (v0, v1) = (self.values[0], self.values[1]);
        if t0 <= 0.0 || v0 <= 0.0 || v1 <= 0.0 {
            return None;
        }
        let p = (v1 / v0).ln() / (t1 / t0).ln();
        (p.is_finite() && p > -1.0).then_some(p)
    }

    fn eval(&self, t: f64) -> f64 {
        let g = &self.grid;
        let v = &self.values;
        if t < g[0] {
            return match self.head_exponent() {
                Some(p) => v[0] * (t / g[0]).powf(p),
                None => v[0],
            };
        }
        if t >= g[g.len() - 1] {
            return v[v.len() - 1];
        }
        let i = g.partition_point(|&s| s <= t) - 1;
        let theta = (t - g[i]) / (g[i + 1] - g[i]);
        v[i] + theta * (v[i + 1] - v[i])
    }

    /// `int_0^t K` for every (sorted, nonnegative) entry of `times`.
    fn antiderivative(&self, times: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let v = &self.values;
        let head = match self.head_exponent() {
            Some(p) => v[0] * g[0] / (p + 1.0),
            None => v[0] * g[0],
        };
        let mut cumulative = Vec::with_capacity(g.len());
        cumulative.push(head);
        for i in 1..g.len() {
            let seg = 0.5 * (v[i] + v[i - 1]) * (g[i] - g[i - 1]);
            cumulative.push(cumulative[i - 1] + seg);
        }
        times
            .iter()
            .map(|&t| {
                if t <= 0.0 {
                    0.0
                } else if t < g[0] {
                    match self.head_exponent() {
                        Some(p) => v[0] * g[0] / (p + 1.0) * (t / g[0]).powf(p + 1.0),
                        None => v[0] * t,
                    }
                } else if t >= g[g.len() - 1] {
                    cumulative[g.len() - 1] + v[v.len() - 1] * (t - g[g.len() - 1])
                } else {
                    let i = g.partition_point(|&s| s <= t) - 1;
                    let value_at_t = self.eval(t);
                    cumulative[i] + 0.5 * (v[i] + value_at_t) * (t - g[i])
                }
            })
            .collect()
    }
}

/// Memory kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kernel {
    DiracDelta,
    Abel { order: f64 },
    ConstantOne,
    Tabulated(TabulatedKernel),
}

impl Kernel {
    pub fn abel(order: f64) -> Result<Self> {
        let kernel = Kernel::Abel { order };
        kernel.validate()?;
        Ok(kernel)
    }

    pub fn tabulated(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        TabulatedKernel::new(grid, values).map(Kernel::Tabulated)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Kernel::Abel { order } if !(*order > 0.0 && *order < 1.0) => Err(Error::DomainError(
                format!("Abel order must lie strictly inside (0, 1), got {order}"),
            )),
            Kernel::Tabulated(table) => table.validate(),
            _ => Ok(()),
        }
    }

    pub fn is_delta(&self) -> bool {
        matches!(self, Kernel::DiracDelta)
    }

    /// Differentiation order carried by the kernel when it is one of the
    /// `g_a` family: 0 for the delta, `a` for Abel, 1 for the constant.
    /// Smaller means more singular. `None` for tabulated kernels.
    pub fn singularity_order(&self) -> Option<f64> {
        match self {
            Kernel::DiracDelta => Some(0.0),
            Kernel::Abel { order } => Some(*order),
            Kernel::ConstantOne => Some(1.0),
            Kernel::Tabulated(_) => None,
        }
    }

    /// Pointwise value `K(t)` for `t > 0`.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::DomainError(format!("kernel evaluated at non-positive time {t}")));
        }
        match self {
            Kernel::DiracDelta => Err(Error::PointwiseUndefined),
            Kernel::Abel { order } => Ok(t.powf(order - 1.0) / gamma(*order)),
            Kernel::ConstantOne => Ok(1.0),
            Kernel::Tabulated(table) => Ok(table.eval(t)),
        }
    }

    /// `int_0^t K(s) ds` at each of the sorted times. The delta integrates to 1.
    pub fn antiderivative(&self, times: &[f64]) -> Vec<f64> {
        match self {
            Kernel::DiracDelta => times.iter().map(|&t| if t > 0.0 { 1.0 } else { 0.0 }).collect(),
            Kernel::Abel { order } => times
                .iter()
                .map(|&t| if t > 0.0 { t.powf(*order) / gamma(order + 1.0) } else { 0.0 })
                .collect(),
            Kernel::ConstantOne => times.iter().map(|&t| t.max(0.0)).collect(),
            Kernel::Tabulated(table) => table.antiderivative(times),
        }
    }

    /// Total variation norm on `(0, T)`: 1 for the delta, the `L^1` norm otherwise.
    pub fn measure_norm(&self, final_time: f64) -> f64 {
        match self {
            Kernel::DiracDelta => 1.0,
            Kernel::Tabulated(table) => {
                // |K| is not the antiderivative of K when the table changes sign.
                let probe = TimeGrid::covering(final_time, final_time / 4096.0)
                    .expect("positive final time");
                let w = build_weights(&Kernel::Tabulated(table.clone()), probe.step, probe.steps)
                    .expect("finite table");
                w.weights().iter().map(|x| x.abs()).sum()
            }
            other => other.antiderivative(&[final_time])[0].abs(),
        }
    }
}

/// Named flux laws and their kernel pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioTag {
    Jmgt,
    GfeI,
    GfeIii,
    Gfe,
    Custom,
}

impl ScenarioTag {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioTag::Jmgt => "jmgt",
            ScenarioTag::GfeI => "gfe1",
            ScenarioTag::GfeIii => "gfe3",
            ScenarioTag::Gfe => "gfe",
            ScenarioTag::Custom => "custom",
        }
    }
}

impl std::str::FromStr for ScenarioTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-', ' '], "").as_str() {
            "jmgt" | "mgt" => Ok(ScenarioTag::Jmgt),
            "gfe1" | "gfei" => Ok(ScenarioTag::GfeI),
            "gfe3" | "gfeiii" => Ok(ScenarioTag::GfeIii),
            "gfe" => Ok(ScenarioTag::Gfe),
            "custom" => Ok(ScenarioTag::Custom),
            other => Err(Error::UnsupportedScenario(format!("unknown scenario tag '{other}'"))),
        }
    }
}

/// The two memory kernels of the model together with the exponent `a` of `tau^a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelPair {
    pub k1: Kernel,
    pub k2: Kernel,
    pub power_a: f64,
    pub scenario_tag: ScenarioTag,
}

impl KernelPair {
    /// Kernel pair of a named flux law at fractional order `alpha`.
    ///
    /// | law     | K1          | K2       | a     |
    /// |---------|-------------|----------|-------|
    /// | GFE I   | g_(1-alpha) | g_alpha  | alpha |
    /// | GFE III | delta       | g_alpha  | 1     |
    /// | GFE     | g_(1-alpha) | 1        | alpha |
    /// | JMGT    | delta       | 1        | 1     |
    pub fn named(tag: ScenarioTag, alpha: f64) -> Result<Self> {
        let (k1, k2, power_a) = match tag {
            ScenarioTag::Jmgt => (Kernel::DiracDelta, Kernel::ConstantOne, 1.0),
            ScenarioTag::GfeI => (Kernel::abel(1.0 - alpha)?, Kernel::abel(alpha)?, alpha),
            ScenarioTag::GfeIii => (Kernel::DiracDelta, Kernel::abel(alpha)?, 1.0),
            ScenarioTag::Gfe => (Kernel::abel(1.0 - alpha)?, Kernel::ConstantOne, alpha),
            ScenarioTag::Custom => {
                return Err(Error::UnsupportedScenario(
                    "custom pairs must be built with KernelPair::custom".into(),
                ))
            }
        };
        Ok(Self { k1, k2, power_a, scenario_tag: tag })
    }

    pub fn custom(k1: Kernel, k2: Kernel, power_a: f64) -> Result<Self> {
        k1.validate()?;
        k2.validate()?;
        if !(power_a.is_finite() && power_a > 0.0) {
            return Err(Error::DomainError(format!("power a must be positive, got {power_a}")));
        }
        Ok(Self { k1, k2, power_a, scenario_tag: ScenarioTag::Custom })
    }

    /// Checks that a named tag carries exactly its tabulated kernels.
    pub fn validate(&self, alpha: Option<f64>) -> Result<()> {
        self.k1.validate()?;
        self.k2.validate()?;
        if self.scenario_tag == ScenarioTag::Custom {
            return Ok(());
        }
        let alpha = match (self.scenario_tag, alpha) {
            (ScenarioTag::Jmgt, _) => 0.5,
            (_, Some(a)) => a,
            (tag, None) => {
                return Err(Error::DomainError(format!(
                    "scenario {} needs a fractional order",
                    tag.name()
                )))
            }
        };
        let expected = Self::named(self.scenario_tag, alpha)?;
        if expected.k1 != self.k1 || expected.k2 != self.k2 || expected.power_a != self.power_a {
            return Err(Error::DomainError(format!(
                "kernel pair does not match the {} law at alpha = {alpha}",
                self.scenario_tag.name()
            )));
        }
        Ok(())
    }

    /// Fractional order `alpha` implied by the pair, for the named laws.
    pub fn alpha(&self) -> Option<f64> {
        match (self.scenario_tag, &self.k2, &self.k1) {
            (ScenarioTag::GfeI | ScenarioTag::GfeIii, Kernel::Abel { order }, _) => Some(*order),
            (ScenarioTag::Gfe, _, Kernel::Abel { order }) => Some(1.0 - order),
            _ => None,
        }
    }
}

/// Resolvent `R` with `K * R = 1`.
///
/// Analytic for the delta (`R = 1`) and for Abel kernels (`g_a * g_(1-a) = 1`).
/// Tabulated kernels are inverted numerically on `grid` by forward substitution
/// of the lower-triangular discrete Volterra system; the result is tabulated at
/// the cell midpoints.
pub fn resolvent(kernel: &Kernel, grid: TimeGrid) -> Result<Kernel> {
    match kernel {
        Kernel::DiracDelta => Ok(Kernel::ConstantOne),
        Kernel::Abel { order } => Kernel::abel(1.0 - order),
        Kernel::ConstantOne => Err(Error::NoIntegrableResolvent(
            "the resolvent of the constant kernel is the Dirac delta".into(),
        )),
        Kernel::Tabulated(_) => {
            let w = build_weights(kernel, grid.step, grid.steps)?;
            let moments = w.weights();
            let lead = moments[0];
            if !(lead.abs() > f64::EPSILON * moments.iter().map(|m| m.abs()).sum::<f64>().max(1e-300))
            {
                return Err(Error::NoIntegrableResolvent(
                    "tabulated kernel vanishes on the first cell".into(),
                ));
            }
            // sum_{j<n} w_{n-1-j} r_j = 1 for n = 1..N
            let n_steps = grid.steps;
            let mut r = Vec::with_capacity(n_steps);
            for n in 0..n_steps {
                let history: f64 = (0..n).map(|j| moments[n - j] * r[j]).sum();
                r.push((1.0 - history) / lead);
            }
            let mids: Vec<f64> = (0..n_steps).map(|j| (j as f64 + 0.5) * grid.step).collect();
            if r.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalError("resolvent recursion overflowed".into()));
            }
            Kernel::tabulated(mids, r)
        }
    }
}

/// `max_{n >= n_min} |(K * R)(t_n) - 1|` on `grid`; zero for an exact Sonine pair.
///
/// When neither kernel is the delta the convolution is evaluated by product
/// integration against the cell averages of `kres`, which keeps both weak
/// singularities integrated exactly.
pub fn sonine_defect(k: &Kernel, kres: &Kernel, grid: TimeGrid, n_min: usize) -> Result<f64> {
    let n_min = n_min.max(1);
    if n_min > grid.steps {
        return Err(Error::DomainError(format!(
            "n_min = {n_min} exceeds the {} grid steps",
            grid.steps
        )));
    }
    let times = grid.times();
    let products: Vec<f64> = match (k, kres) {
        (Kernel::DiracDelta, Kernel::DiracDelta) => return Err(Error::PointwiseUndefined),
        (Kernel::DiracDelta, other) | (other, Kernel::DiracDelta) => times[1..]
            .iter()
            .map(|&t| other.eval(t))
            .collect::<Result<_>>()?,
        _ => {
            let wk = build_weights(k, grid.step, grid.steps)?;
            let wr = build_weights(kres, grid.step, grid.steps)?;
            let means: Vec<f64> = wr.weights().iter().map(|m| m / grid.step).collect();
            conv_apply_naive(&wk, &means)
        }
    };
    Ok(products[n_min - 1..]
        .iter()
        .map(|p| (p - 1.0).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn abel_half_at_one() {
        let k = Kernel::abel(0.5).unwrap();
        assert_relative_eq!(k.eval(1.0).unwrap(), 1.0 / std::f64::consts::PI.sqrt(), epsilon = 1e-14);
        assert_relative_eq!(k.eval(1.0).unwrap(), 0.5641896, epsilon = 1e-7);
    }

    #[test]
    fn abel_quarter_at_sixteen() {
        // 16^(-3/4) = 1/8, Gamma(1/4) = 3.6256099082...
        let k = Kernel::abel(0.25).unwrap();
        assert_relative_eq!(k.eval(16.0).unwrap(), 0.125 / 3.625_609_908_221_908, epsilon = 1e-14);
        assert_relative_eq!(k.eval(16.0).unwrap(), 0.0344769, epsilon = 1e-7);
    }

    #[test]
    fn constant_and_delta_eval() {
        assert_eq!(Kernel::ConstantOne.eval(17.3).unwrap(), 1.0);
        assert_eq!(Kernel::DiracDelta.eval(1.0), Err(Error::PointwiseUndefined));
        assert!(matches!(Kernel::ConstantOne.eval(0.0), Err(Error::DomainError(_))));
        assert!(matches!(Kernel::ConstantOne.eval(-1.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn abel_order_must_be_interior() {
        assert!(Kernel::abel(0.0).is_err());
        assert!(Kernel::abel(1.0).is_err());
        assert!(Kernel::abel(f64::NAN).is_err());
        assert!(Kernel::abel(0.3).is_ok());
    }

    #[test]
    fn tabulated_invariants() {
        assert!(Kernel::tabulated(vec![0.0], vec![1.0]).is_err());
        assert!(Kernel::tabulated(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Kernel::tabulated(vec![0.0, 1.0], vec![1.0, f64::INFINITY]).is_err());
        let k = Kernel::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 3.0, 5.0]).unwrap();
        assert_relative_eq!(k.eval(0.5).unwrap(), 2.0);
        assert_relative_eq!(k.eval(1.5).unwrap(), 4.0);
        assert_relative_eq!(k.eval(7.0).unwrap(), 5.0);
    }

    #[test]
    fn tabulated_power_head_integrates_abel() {
        let alpha: f64 = 0.3;
        let g = Kernel::abel(alpha).unwrap();
        let grid: Vec<f64> = (1..=200).map(|i| 1e-3 * i as f64).collect();
        let values: Vec<f64> = grid.iter().map(|&t| g.eval(t).unwrap()).collect();
        let tab = Kernel::tabulated(grid, values).unwrap();
        let exact = g.antiderivative(&[0.2])[0];
        let approx = tab.antiderivative(&[0.2])[0];
        assert!((approx - exact).abs() / exact < 5e-3, "{approx} vs {exact}");
    }

    #[test]
    fn named_pairs_follow_flux_laws() {
        let p = KernelPair::named(ScenarioTag::GfeI, 0.3).unwrap();
        assert_eq!(p.k1, Kernel::Abel { order: 0.7 });
        assert_eq!(p.k2, Kernel::Abel { order: 0.3 });
        assert_eq!(p.power_a, 0.3);
        let p = KernelPair::named(ScenarioTag::GfeIii, 0.6).unwrap();
        assert_eq!((p.k1, p.k2, p.power_a), (Kernel::DiracDelta, Kernel::Abel { order: 0.6 }, 1.0));
        let p = KernelPair::named(ScenarioTag::Gfe, 0.4).unwrap();
        assert_eq!(p.k2, Kernel::ConstantOne);
        assert_eq!(p.alpha(), Some(0.4));
        let p = KernelPair::named(ScenarioTag::Jmgt, 0.4).unwrap();
        assert_eq!((p.k1, p.k2, p.power_a), (Kernel::DiracDelta, Kernel::ConstantOne, 1.0));
    }

    #[test]
    fn mismatched_named_pair_is_rejected() {
        let mut p = KernelPair::named(ScenarioTag::GfeI, 0.3).unwrap();
        p.power_a = 1.0;
        assert!(p.validate(Some(0.3)).is_err());
        let p = KernelPair::named(ScenarioTag::GfeI, 0.3).unwrap();
        assert!(p.validate(Some(0.3)).is_ok());
        assert!(p.validate(Some(0.4)).is_err());
    }

    #[test]
    fn resolvents() {
        let grid = TimeGrid::new(1e-3, 1000).unwrap();
        assert_eq!(resolvent(&Kernel::DiracDelta, grid).unwrap(), Kernel::ConstantOne);
        assert_eq!(resolvent(&Kernel::abel(0.5).unwrap(), grid).unwrap(), Kernel::Abel { order: 0.5 });
        match resolvent(&Kernel::abel(0.3).unwrap(), grid).unwrap() {
            Kernel::Abel { order } => assert_relative_eq!(order, 0.7, epsilon = 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            resolvent(&Kernel::ConstantOne, grid),
            Err(Error::NoIntegrableResolvent(_))
        ));
    }

    #[test]
    fn tabulated_resolvent_recovers_abel_partner() {
        let grid = TimeGrid::new(1e-3, 1000).unwrap();
        let g03 = Kernel::abel(0.3).unwrap();
        let g07 = Kernel::abel(0.7).unwrap();
        // geometric refinement towards the singularity plus the uniform grid
        let mut ts: Vec<f64> = (0..40).map(|i| 1e-3 * 10f64.powf(-4.0 + 0.1 * i as f64)).collect();
        ts.extend((1..=1000).map(|i| 1e-3 * i as f64));
        let vals: Vec<f64> = ts.iter().map(|&t| g03.eval(t).unwrap()).collect();
        let tab = Kernel::tabulated(ts, vals).unwrap();
        let res = resolvent(&tab, grid).unwrap();
        let Kernel::Tabulated(table) = &res else { panic!("expected a table") };
        let mut worst: f64 = 0.0;
        for (&t, &r) in table.grid().iter().zip(table.values()) {
            if t >= 10.0 * grid.step {
                let exact = g07.eval(t).unwrap();
                worst = worst.max((r - exact).abs() / exact);
            }
        }
        assert!(worst <= 1e-2, "max relative error {worst}");
    }

    #[test]
    fn sonine_defects() {
        let grid = TimeGrid::new(1e-3, 1000).unwrap();
        assert_eq!(sonine_defect(&Kernel::DiracDelta, &Kernel::ConstantOne, grid, 1).unwrap(), 0.0);
        let pair = sonine_defect(&Kernel::abel(0.3).unwrap(), &Kernel::abel(0.7).unwrap(), grid, 10)
            .unwrap();
        assert!(pair <= 5e-3, "defect {pair}");
        let not_pair =
            sonine_defect(&Kernel::abel(0.3).unwrap(), &Kernel::abel(0.5).unwrap(), grid, 10).unwrap();
        assert!(not_pair >= 0.1, "defect {not_pair}");
    }
}
