//! Lifetime distributions of branching particles.

use crate::error::{Error, Result};
use crate::rng::open_unit;
use crate::special::gamma;
use core::f64::consts::PI;
use libm::{log, pow, sin};
use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LifetimeLaw {
    /// Rate `rate`, mean `1 / rate`.
    Exponential { rate: f64 },
    /// Gamma with the given shape and scale.
    Gamma { shape: f64, scale: f64 },
    /// Survival `E_γ(-t^γ)`; tail `t^{-γ} / Γ(1-γ)`; renewal function exactly `t^γ / Γ(1+γ)`.
    MittagLeffler { gamma: f64 },
    /// Lomax survival `(1 + t/σ)^{-γ}` with `σ = Γ(1-γ)^{-1/γ}`, so the tail is exactly
    /// `t^{-γ} / Γ(1-γ)` asymptotically but the renewal function is not a pure power.
    Pareto { gamma: f64 },
}

impl LifetimeLaw {
    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::param(name, v, "strictly positive and finite"))
            }
        };
        match *self {
            LifetimeLaw::Exponential { rate } => positive("rate", rate),
            LifetimeLaw::Gamma { shape, scale } => {
                positive("shape", shape)?;
                positive("scale", scale)
            }
            LifetimeLaw::MittagLeffler { gamma } | LifetimeLaw::Pareto { gamma } => {
                if gamma > 0.0 && gamma < 1.0 {
                    Ok(())
                } else {
                    Err(Error::param("gamma", gamma, "0 < gamma < 1"))
                }
            }
        }
    }

    /// Mean lifetime for the finite-mean laws.
    pub fn mean(&self) -> Option<f64> {
        match *self {
            LifetimeLaw::Exponential { rate } => Some(1.0 / rate),
            LifetimeLaw::Gamma { shape, scale } => Some(shape * scale),
            _ => None,
        }
    }

    /// Tail exponent `γ` for the heavy-tailed laws.
    pub fn tail_exponent(&self) -> Option<f64> {
        match *self {
            LifetimeLaw::MittagLeffler { gamma } | LifetimeLaw::Pareto { gamma } => Some(gamma),
            _ => None,
        }
    }

    /// Exact renewal function `U(t)` where it has a closed form.
    pub fn renewal_function(&self, t: f64) -> Option<f64> {
        match *self {
            LifetimeLaw::Exponential { rate } => Some(rate * t),
            LifetimeLaw::MittagLeffler { gamma: g } => Some(pow(t, g) / gamma(1.0 + g)),
            _ => None,
        }
    }

    /// Survival function `P(S > t)` where it has an elementary closed form.
    pub fn survival(&self, t: f64) -> Option<f64> {
        if t <= 0.0 {
            return Some(1.0);
        }
        match *self {
            LifetimeLaw::Exponential { rate } => Some(libm::exp(-rate * t)),
            LifetimeLaw::Pareto { gamma } => Some(pow(1.0 + t / pareto_scale(gamma), -gamma)),
            _ => None,
        }
    }

    /// One lifetime draw; always strictly positive.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LifetimeLaw::Exponential { rate } => -log(open_unit(rng)) / rate,
            LifetimeLaw::Gamma { shape, scale } => {
                let g = rand_distr::Gamma::new(shape, scale).expect("validated gamma law");
                loop {
                    let v: f64 = rng.sample(g);
                    if v > 0.0 {
                        return v;
                    }
                }
            }
            LifetimeLaw::MittagLeffler { gamma } => {
                let u = open_unit(rng);
                let v = open_unit(rng);
                let ratio = sin(gamma * PI * (1.0 - v)) / sin(gamma * PI * v);
                -log(u) * pow(ratio, 1.0 / gamma)
            }
            LifetimeLaw::Pareto { gamma } => {
                let u = open_unit(rng);
                let s = pareto_scale(gamma) * libm::expm1(-log(u) / gamma);
                if s > 0.0 {
                    s
                } else {
                    f64::MIN_POSITIVE
                }
            }
        }
    }
}

/// One lifetime draw from a validated law.
pub fn sample_lifetime<R: Rng + ?Sized>(law: &LifetimeLaw, rng: &mut R) -> f64 {
    law.sample(rng)
}

fn pareto_scale(gamma_exp: f64) -> f64 {
    pow(gamma(1.0 - gamma_exp), -1.0 / gamma_exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn mean_and_se(law: LifetimeLaw, n: usize) -> (f64, f64) {
        let mut r = stream_rng(9, 0);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let x = law.sample(&mut r);
            assert!(x > 0.0);
            s += x;
            s2 += x * x;
        }
        let m = s / n as f64;
        (m, libm::sqrt((s2 / n as f64 - m * m) / n as f64))
    }

    #[test]
    fn exponential_mean() {
        let (m, se) = mean_and_se(LifetimeLaw::Exponential { rate: 2.0 }, 200_000);
        assert!((m - 0.5).abs() < 3.0 * se);
    }

    #[test]
    fn gamma_mean() {
        let law = LifetimeLaw::Gamma {
            shape: 2.0,
            scale: 0.5,
        };
        let (m, se) = mean_and_se(law, 200_000);
        assert!((m - 1.0).abs() < 3.0 * se);
        assert_eq!(law.mean(), Some(1.0));
    }

    #[test]
    fn tails_match_their_constant() {
        // P(S > t) t^γ Γ(1-γ) -> 1
        for law in [
            LifetimeLaw::MittagLeffler { gamma: 0.5 },
            LifetimeLaw::Pareto { gamma: 0.5 },
        ] {
            let mut r = stream_rng(4, 1);
            let n = 400_000;
            let t = 100.0;
            let hits = (0..n).filter(|_| law.sample(&mut r) > t).count();
            let scaled = hits as f64 / n as f64 * 10.0 * gamma(0.5);
            assert!((scaled - 1.0).abs() < 0.1, "{law:?}: {scaled}");
        }
    }

    #[test]
    fn validation() {
        assert!(LifetimeLaw::Exponential { rate: 0.0 }.validate().is_err());
        assert!(LifetimeLaw::MittagLeffler { gamma: 1.0 }.validate().is_err());
        assert!(LifetimeLaw::Pareto { gamma: 0.3 }.validate().is_ok());
        assert_eq!(LifetimeLaw::Pareto { gamma: 0.3 }.tail_exponent(), Some(0.3));
    }
}
