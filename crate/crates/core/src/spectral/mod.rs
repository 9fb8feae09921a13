//! Dirichlet-Laplace sine basis on an interval or a rectangle.
//!
//! Eigenfunctions are `L^2`-orthonormal, so the mass matrix is the identity
//! and the Laplacian is `diag(-lambda_k)` in modal coordinates. Products with
//! variable coefficients are evaluated pseudo-spectrally on a uniform interior
//! grid; products of three sines are integrated up to a quadrature error that
//! decays quickly with the number of grid points.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Domain {
    Interval { length: f64, n_modes: usize },
    Rectangle { lx: f64, ly: f64, nx: usize, ny: usize },
}

impl Domain {
    pub fn interval(length: f64, n_modes: usize) -> Result<Self> {
        let d = Domain::Interval { length, n_modes };
        d.validate()?;
        Ok(d)
    }

    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Self> {
        let d = Domain::Rectangle { lx, ly, nx, ny };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        let ok_len = |l: f64| l.is_finite() && l > 0.0;
        match *self {
            Domain::Interval { length, n_modes } => {
                if !ok_len(length) {
                    return Err(Error::DomainError(format!("interval length must be positive, got {length}")));
                }
                if n_modes == 0 {
                    return Err(Error::DomainError("need at least one mode".into()));
                }
            }
            Domain::Rectangle { lx, ly, nx, ny } => {
                if !ok_len(lx) || !ok_len(ly) {
                    return Err(Error::DomainError(format!(
                        "rectangle sides must be positive, got {lx} x {ly}"
                    )));
                }
                if nx == 0 || ny == 0 {
                    return Err(Error::DomainError("need at least one mode per axis".into()));
                }
            }
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::Interval { .. } => 1,
            Domain::Rectangle { .. } => 2,
        }
    }

    pub fn mode_count(&self) -> usize {
        match *self {
            Domain::Interval { n_modes, .. } => n_modes,
            Domain::Rectangle { nx, ny, .. } => nx * ny,
        }
    }

    /// Modal coefficient of `amplitude * sin(..)` for an unnormalized sine
    /// product eigenfunction.
    pub fn sine_to_modal(&self) -> f64 {
        match *self {
            Domain::Interval { length, .. } => (length / 2.0).sqrt(),
            Domain::Rectangle { lx, ly, .. } => (lx * ly).sqrt() / 2.0,
        }
    }
}

/// Eigenvalues in ascending order with their (1-based) wave numbers.
/// On an interval the second index is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub eigenvalues: Vec<f64>,
    pub indices: Vec<(usize, usize)>,
}

pub fn eigenpairs(domain: &Domain) -> EigenSystem {
    match *domain {
        Domain::Interval { length, n_modes } => EigenSystem {
            eigenvalues: (1..=n_modes).map(|k| (k as f64 * PI / length).powi(2)).collect(),
            indices: (1..=n_modes).map(|k| (k, 0)).collect(),
        },
        Domain::Rectangle { lx, ly, nx, ny } => {
            let mut modes: Vec<(f64, (usize, usize))> = (1..=nx)
                .flat_map(|i| (1..=ny).map(move |j| (i, j)))
                .map(|(i, j)| ((i as f64 * PI / lx).powi(2) + (j as f64 * PI / ly).powi(2), (i, j)))
                .collect();
            modes.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            EigenSystem {
                eigenvalues: modes.iter().map(|m| m.0).collect(),
                indices: modes.iter().map(|m| m.1).collect(),
            }
        }
    }
}

/// Modal coefficients tied to their domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalField {
    pub domain: Domain,
    pub coeffs: Vec<f64>,
}

impl ModalField {
    pub fn new(domain: Domain, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != domain.mode_count() {
            return Err(Error::ShapeError(format!(
                "{} coefficients for {} modes",
                coeffs.len(),
                domain.mode_count()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("modal coefficients must be finite".into()));
        }
        Ok(Self { domain, coeffs })
    }

    pub fn zeros(domain: Domain) -> Self {
        Self { domain, coeffs: vec![0.0; domain.mode_count()] }
    }

    /// Field `sum_k a_k sin(..)` from plain sine amplitudes listed in
    /// ascending eigenvalue order. Missing trailing amplitudes are zero.
    pub fn from_sine_amplitudes(domain: Domain, amplitudes: &[f64]) -> Result<Self> {
        if amplitudes.len() > domain.mode_count() {
            return Err(Error::ShapeError(format!(
                "{} amplitudes for {} modes",
                amplitudes.len(),
                domain.mode_count()
            )));
        }
        let mut coeffs = vec![0.0; domain.mode_count()];
        let scale = domain.sine_to_modal();
        for (c, a) in coeffs.iter_mut().zip(amplitudes) {
            *c = a * scale;
        }
        Self::new(domain, coeffs)
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonlinearityMode {
    Linear,
    #[serde(alias = "WB")]
    Wb,
    #[serde(alias = "KB")]
    Kb,
}

impl std::str::FromStr for NonlinearityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(NonlinearityMode::Linear),
            "wb" | "westervelt" => Ok(NonlinearityMode::Wb),
            "kb" | "kuznetsov" => Ok(NonlinearityMode::Kb),
            other => Err(Error::InvalidInput(format!("unknown nonlinearity mode '{other}'"))),
        }
    }
}

/// Physical samples needed by the nonlinear term. Gradients are the `x`
/// derivatives on an interval.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PhysicalState {
    pub u: Vec<f64>,
    pub ut: Vec<f64>,
    pub grad_u: Vec<f64>,
    pub grad_ut: Vec<f64>,
}

/// `N = 2 k3 u_t^2` (WB) or `N = 2 k3 grad u . grad u_t` (KB), pointwise.
pub fn nonlinearity(mode: NonlinearityMode, state: &PhysicalState, k3: f64) -> Result<Vec<f64>> {
    match mode {
        NonlinearityMode::Linear => Ok(vec![0.0; state.u.len().max(state.ut.len())]),
        NonlinearityMode::Wb => Ok(state.ut.iter().map(|v| 2.0 * k3 * v * v).collect()),
        NonlinearityMode::Kb => {
            if state.grad_u.len() != state.grad_ut.len() {
                return Err(Error::ShapeError(format!(
                    "gradient samples of length {} and {}",
                    state.grad_u.len(),
                    state.grad_ut.len()
                )));
            }
            Ok(state
                .grad_u
                .iter()
                .zip(&state.grad_ut)
                .map(|(a, b)| 2.0 * k3 * a * b)
                .collect())
        }
    }
}

/// Synthesis and analysis matrices of the sine basis on a fixed interior grid.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    domain: Domain,
    eigen: EigenSystem,
    points: Vec<Vec<f64>>,
    axis_points: (usize, usize),
    weight: f64,
    synthesis: DMatrix<f64>,
    gradient: Option<DMatrix<f64>>,
}

impl SpectralBasis {
    /// Basis with four grid points per mode and axis.
    pub fn new(domain: Domain) -> Result<Self> {
        let q = match domain {
            Domain::Interval { n_modes, .. } => (4 * n_modes, 0),
            Domain::Rectangle { nx, ny, .. } => (4 * nx, 4 * ny),
        };
        Self::with_points(domain, q.0, q.1)
    }

    /// Basis on `qx` (and `qy`) interior points per axis. `qy` is ignored on
    /// an interval. At least as many points as modes are needed for the
    /// transform pair; products need `ceil(3n/2)`.
    pub fn with_points(domain: Domain, qx: usize, qy: usize) -> Result<Self> {
        domain.validate()?;
        let eigen = eigenpairs(&domain);
        let axis = |length: f64, q: usize| -> Vec<f64> {
            (1..=q).map(|j| j as f64 * length / (q + 1) as f64).collect()
        };
        let sine = |length: f64, k: usize, x: f64| {
            (2.0 / length).sqrt() * (k as f64 * PI * x / length).sin()
        };
        match domain {
            Domain::Interval { length, n_modes } => {
                if qx < n_modes {
                    return Err(Error::ShapeError(format!(
                        "{qx} grid points cannot resolve {n_modes} modes"
                    )));
                }
                let xs = axis(length, qx);
                let synthesis = DMatrix::from_fn(qx, n_modes, |j, k| sine(length, k + 1, xs[j]));
                let gradient = DMatrix::from_fn(qx, n_modes, |j, k| {
                    let kk = (k + 1) as f64 * PI / length;
                    (2.0 / length).sqrt() * kk * (kk * xs[j]).cos()
                });
                Ok(Self {
                    domain,
                    eigen,
                    points: xs.iter().map(|&x| vec![x]).collect(),
                    axis_points: (qx, 0),
                    weight: length / (qx + 1) as f64,
                    synthesis,
                    gradient: Some(gradient),
                })
            }
            Domain::Rectangle { lx, ly, nx, ny } => {
                if qx < nx || qy < ny {
                    return Err(Error::ShapeError(format!(
                        "{qx} x {qy} grid points cannot resolve {nx} x {ny} modes"
                    )));
                }
                let xs = axis(lx, qx);
                let ys = axis(ly, qy);
                let points: Vec<Vec<f64>> =
                    xs.iter().flat_map(|&x| ys.iter().map(move |&y| vec![x, y])).collect();
                let synthesis = DMatrix::from_fn(points.len(), eigen.indices.len(), |p, m| {
                    let (i, j) = eigen.indices[m];
                    sine(lx, i, points[p][0]) * sine(ly, j, points[p][1])
                });
                Ok(Self {
                    domain,
                    eigen,
                    points,
                    axis_points: (qx, qy),
                    weight: lx / (qx + 1) as f64 * ly / (qy + 1) as f64,
                    synthesis,
                    gradient: None,
                })
            }
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.eigenvalues
    }

    pub fn eigen(&self) -> &EigenSystem {
        &self.eigen
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn quadrature_weight(&self) -> f64 {
        self.weight
    }

    pub fn mode_count(&self) -> usize {
        self.synthesis.ncols()
    }

    pub fn point_count(&self) -> usize {
        self.synthesis.nrows()
    }

    /// True when quadratic products are resolved without aliasing.
    pub fn dealiased(&self) -> bool {
        let need = |n: usize| (3 * n).div_ceil(2);
        match self.domain {
            Domain::Interval { n_modes, .. } => self.axis_points.0 >= need(n_modes),
            Domain::Rectangle { nx, ny, .. } => {
                self.axis_points.0 >= need(nx) && self.axis_points.1 >= need(ny)
            }
        }
    }

    fn check_modes(&self, coeffs: &[f64]) -> Result<()> {
        if coeffs.len() != self.mode_count() {
            return Err(Error::ShapeError(format!(
                "{} coefficients for {} modes",
                coeffs.len(),
                self.mode_count()
            )));
        }
        Ok(())
    }

    fn check_points(&self, samples: &[f64]) -> Result<()> {
        if samples.len() != self.point_count() {
            return Err(Error::ShapeError(format!(
                "{} samples for {} grid points",
                samples.len(),
                self.point_count()
            )));
        }
        Ok(())
    }

    pub fn to_physical(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_modes(coeffs)?;
        Ok((&self.synthesis * DVector::from_column_slice(coeffs)).data.into())
    }

    pub fn to_modal(&self, samples: &[f64]) -> Result<Vec<f64>> {
        self.check_points(samples)?;
        let v = self.synthesis.tr_mul(&DVector::from_column_slice(samples)) * self.weight;
        Ok(v.data.into())
    }

    /// `d/dx` of the field, sampled on the grid. Interval only.
    pub fn gradient(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_modes(coeffs)?;
        let g = self.gradient.as_ref().ok_or_else(|| {
            Error::UnsupportedScenario("spectral gradients are only available on an interval".into())
        })?;
        Ok((g * DVector::from_column_slice(coeffs)).data.into())
    }

    /// Modal coefficients of `coeff(x) * field(x)`.
    pub fn apply_coefficient(&self, coeff_samples: &[f64], coeffs: &[f64]) -> Result<Vec<f64>> {
        self.check_points(coeff_samples)?;
        let phys = self.to_physical(coeffs)?;
        let product: Vec<f64> = phys.iter().zip(coeff_samples).map(|(u, a)| u * a).collect();
        self.to_modal(&product)
    }

    /// Galerkin matrix `(a phi_j, phi_i)` of a sampled coefficient.
    pub fn coefficient_matrix(&self, coeff_samples: &[f64]) -> Result<DMatrix<f64>> {
        self.check_points(coeff_samples)?;
        let mut scaled = self.synthesis.clone();
        for (mut row, a) in scaled.row_iter_mut().zip(coeff_samples) {
            row *= *a * self.weight;
        }
        Ok(self.synthesis.tr_mul(&scaled))
    }

    /// `sum_k lambda_k^p c_k^2`, i.e. `||(-Delta)^(p/2) u||^2`.
    pub fn weighted_norm_sq(&self, coeffs: &[f64], p: f64) -> f64 {
        coeffs
            .iter()
            .zip(self.eigenvalues())
            .map(|(c, l)| l.powf(p) * c * c)
            .sum()
    }
}
