//! Exact covariance of `<φ, Z(s)>` and `<ψ, Z(t)>` from the Fourier moment formula
//!
//! ```text
//! Cov = intensity (2π)^{-d} ∫ φ̂(y) conj(ψ̂(y)) [ e^{-(t-s)|y|^α} + ∫_0^s e^{-(t+s-2r)|y|^α} dU(r) ] dy
//! ```
//!
//! for `s <= t`, where `U` is the renewal function of the lifetime law.

use super::lifetime::LifetimeLaw;
use super::population::ParticleSystemConfig;
use super::test_function::{TestFunction, MAX_DIM};
use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special::gamma;
use core::f64::consts::PI;
use libm::{cos, exp, expm1, pow, sqrt};

/// Renewal measure `dU` entering the branching term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RenewalMeasure {
    /// No branching term.
    Zero,
    /// `dU = V dr`.
    Uniform { rate: f64 },
    /// `dU = r^{γ-1} / Γ(γ) dr`.
    Power { gamma: f64 },
}

impl RenewalMeasure {
    pub fn for_law(law: &LifetimeLaw) -> Result<Self> {
        match *law {
            LifetimeLaw::Exponential { rate } => Ok(RenewalMeasure::Uniform { rate }),
            LifetimeLaw::MittagLeffler { gamma } => Ok(RenewalMeasure::Power { gamma }),
            _ => Err(Error::Unsupported(
                "exact moments need an exponential or Mittag-Leffler lifetime law",
            )),
        }
    }

    /// `∫_0^s e^{-(t+s-2r) c} dU(r)`
    fn branching_term(&self, c: f64, s: f64, t: f64, q: &QuadratureSpec) -> Result<f64> {
        match *self {
            RenewalMeasure::Zero => Ok(0.0),
            RenewalMeasure::Uniform { rate } => {
                if c == 0.0 {
                    return Ok(rate * s);
                }
                Ok(rate * exp(-(t - s) * c) * (-expm1(-2.0 * s * c)) / (2.0 * c))
            }
            RenewalMeasure::Power { gamma: g } => {
                if s == 0.0 {
                    return Ok(0.0);
                }
                let norm = gamma(g);
                integrate(
                    |n| pow(n.from_lo, g - 1.0) * exp(-(t - s + 2.0 * n.to_hi) * c) / norm,
                    0.0,
                    s,
                    q,
                )
            }
        }
    }
}

/// Covariance from the moment formula with an explicit renewal measure. Only Gaussian
/// bumps are supported; in `d >= 2` their centers must coincide.
#[allow(clippy::too_many_arguments)]
pub fn moment_cov_with_renewal(
    alpha: f64,
    dimension: usize,
    intensity: f64,
    renewal: RenewalMeasure,
    phi: &TestFunction,
    psi: &TestFunction,
    s: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::param("alpha", alpha, "0 < alpha <= 2"));
    }
    if dimension == 0 || dimension > MAX_DIM {
        return Err(Error::param("d", dimension as f64, "1 <= d <= 3"));
    }
    if !(s >= 0.0 && t >= 0.0 && s.is_finite() && t.is_finite()) {
        return Err(Error::param("s", s, "finite times >= 0"));
    }
    // Cov(<φ,Z(s)>, <ψ,Z(t)>) with s > t is the mirrored case.
    let (phi, psi, s, t) = if s <= t {
        (phi, psi, s, t)
    } else {
        (psi, phi, t, s)
    };
    phi.validate(dimension)?;
    psi.validate(dimension)?;
    let (TestFunction::GaussianBump {
        center: c1,
        width: w1,
        ..
    }, TestFunction::GaussianBump {
        center: c2,
        width: w2,
        ..
    }) = (*phi, *psi)
    else {
        return Err(Error::Unsupported("exact moments support Gaussian bumps only"));
    };
    let shift = c1[0] - c2[0];
    if dimension > 1 && (0..dimension).any(|k| c1[k] != c2[k]) {
        return Err(Error::Unsupported(
            "exact moments in d >= 2 need bumps with a common center",
        ));
    }
    let d = dimension as f64;
    let masses = phi.mass(dimension) * psi.mass(dimension);
    let spread = w1 * w1 + w2 * w2;
    // e^{-spread y^2 / 2} < 1e-17 beyond this radius
    let cutoff = sqrt(2.0 * 39.2 / spread);
    let mut failure = None;
    let radial = integrate(
        |n| {
            let y = n.x;
            let c = pow(y, alpha);
            let branch = match renewal.branching_term(c, s, t, q) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            };
            let envelope = exp(-0.5 * spread * y * y) * (exp(-(t - s) * c) + branch);
            let phase = if dimension == 1 { cos(y * shift) } else { 1.0 };
            pow(y, d - 1.0) * envelope * phase
        },
        0.0,
        cutoff,
        q,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    // ∫_{R^d} f(|y|) dy = S_{d-1} ∫_0^∞ ρ^{d-1} f(ρ) dρ; in d = 1, S_0 = 2.
    let sphere = 2.0 * pow(PI, d / 2.0) / gamma(d / 2.0);
    Ok(intensity * masses * sphere * radial / pow(2.0 * PI, d))
}

/// `Cov(<φ, Z(s)>, <ψ, Z(t)>)` for the system described by `cfg`, on all of R^d.
pub fn exact_moment_cov(
    cfg: &ParticleSystemConfig,
    phi: &TestFunction,
    psi: &TestFunction,
    s: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    cfg.validate()?;
    let renewal = RenewalMeasure::for_law(&cfg.lifetime)?;
    moment_cov_with_renewal(cfg.alpha, cfg.dimension, cfg.intensity, renewal, phi, psi, s, t, q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn no_branching_equal_times_is_square_mass() {
        let f = TestFunction::GaussianBump {
            center: [0.4, 0.0, 0.0],
            width: 0.8,
            amplitude: 1.5,
        };
        for d in 1..=3 {
            let v = moment_cov_with_renewal(1.3, d, 1.0, RenewalMeasure::Zero, &f, &f, 2.0, 2.0, &q())
                .unwrap();
            assert!((v / f.square_mass(d) - 1.0).abs() < 1e-9, "d={d}");
        }
    }

    #[test]
    fn exponential_closed_form_matches_quadrature() {
        let m = RenewalMeasure::Uniform { rate: 1.7 };
        let (s, t, c) = (1.2, 2.5, 0.9);
        let closed = m.branching_term(c, s, t, &q()).unwrap();
        let quad = integrate(|n| 1.7 * exp(-(t + s - 2.0 * n.x) * c), 0.0, s, &q()).unwrap();
        assert!((closed - quad).abs() < 1e-12);
    }

    #[test]
    fn brownian_free_part_closed_form() {
        // Without branching and α = 2 in d = 1: Cov = ∫ φ(x) (p_{t-s} * ψ)(x) dx,
        // for unit bumps of width w: mass^2 / sqrt(2π(2w^2 + 2(t-s))).
        let f = TestFunction::centered_bump(1.0);
        let v = moment_cov_with_renewal(2.0, 1, 1.0, RenewalMeasure::Zero, &f, &f, 1.0, 3.0, &q())
            .unwrap();
        let var = 2.0 + 2.0 * 2.0;
        let exact = f.mass(1) * f.mass(1) / sqrt(2.0 * PI * var);
        assert!((v - exact).abs() < 1e-10);
    }

    #[test]
    fn unsupported_inputs() {
        let cfg = ParticleSystemConfig {
            lifetime: LifetimeLaw::Gamma {
                shape: 2.0,
                scale: 0.5,
            },
            ..Default::default()
        };
        let f = TestFunction::centered_bump(1.0);
        assert!(matches!(
            exact_moment_cov(&cfg, &f, &f, 1.0, 1.0, &q()),
            Err(Error::Unsupported(_))
        ));
        let b = TestFunction::IndicatorBox {
            lower: [-1.0; 3],
            upper: [1.0; 3],
        };
        let cfg = ParticleSystemConfig::default();
        assert!(exact_moment_cov(&cfg, &b, &f, 1.0, 1.0, &q()).is_err());
    }

    #[test]
    fn order_of_times_is_mirrored() {
        let cfg = ParticleSystemConfig::default();
        let f = TestFunction::centered_bump(1.0);
        let g = TestFunction::GaussianBump {
            center: [1.0, 0.0, 0.0],
            width: 0.5,
            amplitude: 1.0,
        };
        let a = exact_moment_cov(&cfg, &f, &g, 1.0, 2.0, &q()).unwrap();
        let b = exact_moment_cov(&cfg, &g, &f, 2.0, 1.0, &q()).unwrap();
        assert!((a - b).abs() < 1e-14);
    }
}
