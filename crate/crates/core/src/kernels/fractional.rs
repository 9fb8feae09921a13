use std::f64::consts::FRAC_PI_2;

use super::{build_weights, conv_apply_fast, Kernel, ScenarioTag};
use crate::error::{Error, Result};

/// Riemann-Liouville integral `I^eta y` on a uniform grid.
///
/// `samples` holds `y(t_0), .., y(t_N)`; the result has the same length with
/// `(I^eta y)(t_0) = 0`. `eta = 1` is the running integral.
pub fn fractional_integral(eta: f64, samples: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::DomainError(format!("integral order must lie in (0, 1], got {eta}")));
    }
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    let kernel = if eta == 1.0 { Kernel::ConstantOne } else { Kernel::Abel { order: eta } };
    let n = samples.len() - 1;
    let mut out = Vec::with_capacity(n + 1);
    out.push(0.0);
    if n > 0 {
        let w = build_weights(&kernel, step, n)?;
        out.extend(conv_apply_fast(&w, &samples[1..])?);
    }
    Ok(out)
}

/// `|| I^(alpha/2) y' ||_{L^2(0, T)}`, the computable stand-in for the
/// `H^(-alpha/2)` norm of `y'`. `alpha = 0` gives the plain `L^2` norm.
pub fn neg_sobolev_norm(alpha: f64, yprime: &[f64], step: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&alpha) {
        return Err(Error::DomainError(format!("order must lie in [0, 2], got {alpha}")));
    }
    let z = if alpha == 0.0 {
        yprime.to_vec()
    } else {
        fractional_integral(alpha / 2.0, yprime, step)?
    };
    Ok(trapezoid_l2(&z, step))
}

pub(crate) fn trapezoid_l2(z: &[f64], step: f64) -> f64 {
    if z.len() < 2 {
        return 0.0;
    }
    let sum: f64 = z.windows(2).map(|p| 0.5 * (p[0] * p[0] + p[1] * p[1])).sum();
    (step * sum).sqrt()
}

/// Real part of the Fourier transform of the memory terms of a named law.
///
/// `tau_scaled` is `tau^a c^2`, `delta` the merged damping coefficient.
pub fn fourier_symbol(
    tag: ScenarioTag,
    alpha: f64,
    tau_scaled: f64,
    delta: f64,
    omega: f64,
) -> Result<f64> {
    if !(omega > 0.0) {
        return Err(Error::DomainError(format!("frequency must be positive, got {omega}")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::DomainError(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let relaxation = tau_scaled * ((2.0 - alpha) * FRAC_PI_2).cos() * omega.powf(alpha - 2.0);
    let damping = delta * (alpha * FRAC_PI_2).cos() * omega.powf(-alpha);
    match tag {
        ScenarioTag::GfeI => Ok(relaxation + damping),
        ScenarioTag::GfeIii => Ok(damping),
        ScenarioTag::Gfe => Ok(relaxation),
        other => Err(Error::UnsupportedScenario(format!(
            "no Fourier symbol tabulated for {}",
            other.name()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::gamma;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn integral_examples() {
        let h = 0.01;
        let ones = vec![1.0; 101];
        let first = fractional_integral(1.0, &ones, h).unwrap();
        for (n, v) in first.iter().enumerate() {
            assert_relative_eq!(*v, n as f64 * h, epsilon = 1e-12);
        }
        let half = fractional_integral(0.5, &ones, h).unwrap();
        assert_relative_eq!(half[100], 1.0 / gamma(1.5), epsilon = 1e-12);
        assert_relative_eq!(half[100], std::f64::consts::FRAC_2_SQRT_PI, epsilon = 1e-12);
        let zero = fractional_integral(0.3, &[0.0; 50], h).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        assert!(fractional_integral(0.0, &ones, h).is_err());
    }

    #[test]
    fn neg_sobolev_examples() {
        let h = 1e-3;
        let ones = vec![1.0; 1001];
        let value = neg_sobolev_norm(1.0, &ones, h).unwrap();
        let exact = (1.0 / (2.0 * gamma(1.5).powi(2))).sqrt();
        assert_relative_eq!(value, exact, epsilon = 1e-9);
        assert_relative_eq!(value, 0.7978846, epsilon = 1e-7);
        assert_eq!(neg_sobolev_norm(0.5, &[0.0; 100], h).unwrap(), 0.0);
    }

    #[test]
    fn fourier_examples() {
        let v = fourier_symbol(ScenarioTag::GfeIii, 0.5, 0.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(v, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_eq!(fourier_symbol(ScenarioTag::Gfe, 0.4, 0.0, 3.0, 2.0).unwrap(), 0.0);
        let v = fourier_symbol(ScenarioTag::GfeI, 0.5, 1.0, 1.0, 4.0).unwrap();
        let expected = -(0.5f64).sqrt() * 0.125 + (0.5f64).sqrt() * 0.5;
        assert_relative_eq!(v, expected, epsilon = 1e-14);
        assert_relative_eq!(v, 0.2651650, epsilon = 1e-7);
        assert!(matches!(
            fourier_symbol(ScenarioTag::Jmgt, 0.5, 1.0, 1.0, 1.0),
            Err(Error::UnsupportedScenario(_))
        ));
    }

    proptest! {
        #[test]
        fn gfe1_symbol_is_sum(
            alpha in 0.01f64..0.99,
            ts in 0f64..10.0,
            delta in 0f64..10.0,
            omega in 0.01f64..100.0,
        ) {
            let one = fourier_symbol(ScenarioTag::GfeI, alpha, ts, delta, omega).unwrap();
            let three = fourier_symbol(ScenarioTag::GfeIii, alpha, ts, delta, omega).unwrap();
            let plain = fourier_symbol(ScenarioTag::Gfe, alpha, ts, delta, omega).unwrap();
            prop_assert!((one - three - plain).abs() <= 1e-12 * (1.0 + one.abs() + three.abs() + plain.abs()));
        }

        #[test]
        fn neg_sobolev_homogeneous(
            y in proptest::collection::vec(-5f64..5.0, 2..200),
            scale in -10f64..10.0,
            alpha in 0.0f64..2.0,
        ) {
            let base = neg_sobolev_norm(alpha, &y, 0.01).unwrap();
            let scaled: Vec<f64> = y.iter().map(|v| scale * v).collect();
            let value = neg_sobolev_norm(alpha, &scaled, 0.01).unwrap();
            prop_assert!((value - scale.abs() * base).abs() <= 1e-12 * (1.0 + value.abs()));
        }
    }
}
