//! Symmetric α-stable increments with characteristic function `e^{-dt |y|^α}`.

use crate::error::{Error, Result};
use crate::rng::{open_unit, stream_rng};
use alloc::vec::Vec;
use core::f64::consts::PI;
use libm::{cos, exp, log, pow, sin, sqrt};
use rand::Rng;
use rand_distr::StandardNormal;

fn check(alpha: f64, dt: f64, d: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::param("alpha", alpha, "0 < alpha <= 2"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::param("dt", dt, "0 < dt < inf"));
    }
    if d == 0 || d > super::MAX_DIM {
        return Err(Error::param("d", d as f64, "1 <= d <= 3"));
    }
    Ok(())
}

/// Standard exponential by inversion.
fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    -log(open_unit(rng))
}

/// Chambers–Mallows–Stuck draw with characteristic function `e^{-|y|^α}`.
fn symmetric_unit<R: Rng + ?Sized>(rng: &mut R, alpha: f64) -> f64 {
    let v = PI * (open_unit(rng) - 0.5);
    let w = exp1(rng);
    if alpha == 1.0 {
        return libm::tan(v);
    }
    sin(alpha * v) / pow(cos(v), 1.0 / alpha) * pow(cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha)
}

/// Positive stable draw with Laplace transform `e^{-λ^β}`, `0 < β < 1` (Kanter).
fn positive_stable<R: Rng + ?Sized>(rng: &mut R, beta: f64) -> f64 {
    let u = PI * open_unit(rng);
    let w = exp1(rng);
    sin(beta * u) / pow(sin(u), 1.0 / beta) * pow(sin((1.0 - beta) * u) / w, (1.0 - beta) / beta)
}

/// Writes one increment over `dt` into `out` (length `d`). Parameters are assumed valid;
/// see [`sample_stable_increment`] for the checked entry point.
pub(crate) fn add_increment<R: Rng + ?Sized>(rng: &mut R, alpha: f64, dt: f64, out: &mut [f64]) {
    let scale = pow(dt, 1.0 / alpha);
    if out.len() == 1 {
        out[0] += scale * symmetric_unit(rng, alpha);
        return;
    }
    // Subordinated Brownian motion: sqrt(A) N(0, 2I) with E e^{-λA} = e^{-λ^{α/2}}.
    let mix = if alpha == 2.0 {
        1.0
    } else {
        positive_stable(rng, alpha / 2.0)
    };
    let s = scale * sqrt(2.0 * mix);
    for x in out.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *x += s * z;
    }
}

/// One increment of d-dimensional symmetric α-stable motion over `dt`.
pub fn sample_stable_increment<R: Rng + ?Sized>(
    rng: &mut R,
    alpha: f64,
    dt: f64,
    d: usize,
) -> Result<super::Point> {
    check(alpha, dt, d)?;
    let mut p = [0.0; super::MAX_DIM];
    add_increment(rng, alpha, dt, &mut p[..d]);
    Ok(p)
}

/// Empirical characteristic function at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CfDeviation {
    pub y: f64,
    pub empirical: f64,
    pub target: f64,
    pub deviation: f64,
    pub standard_error: f64,
}

/// Outcome of [`empirical_cf_check`].
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StableSampleCheck {
    pub alpha: f64,
    pub dt: f64,
    pub dimension: usize,
    pub n: usize,
    pub frequencies: Vec<CfDeviation>,
    /// Sample variance of the first coordinate (meaningful for α = 2).
    pub variance: f64,
    pub variance_standard_error: f64,
}

/// Compares the empirical characteristic function of `n` increments, taken along the
/// first axis, with `e^{-dt |y|^α}`.
pub fn empirical_cf_check(
    alpha: f64,
    dt: f64,
    d: usize,
    y_list: &[f64],
    n: usize,
    seed: u64,
) -> Result<StableSampleCheck> {
    check(alpha, dt, d)?;
    if n < 2 {
        return Err(Error::param("n", n as f64, "n >= 2"));
    }
    let mut rng = stream_rng(seed, 0);
    let k = y_list.len();
    let mut sum_cos = alloc::vec![0.0; k];
    let mut sum_cos2 = alloc::vec![0.0; k];
    let (mut m1, mut m2, mut m4) = (0.0, 0.0, 0.0);
    let mut p = [0.0; super::MAX_DIM];
    for _ in 0..n {
        p[..d].iter_mut().for_each(|x| *x = 0.0);
        add_increment(&mut rng, alpha, dt, &mut p[..d]);
        let x = p[0];
        for (j, y) in y_list.iter().enumerate() {
            let c = cos(y * x);
            sum_cos[j] += c;
            sum_cos2[j] += c * c;
        }
        let x2 = x * x;
        m1 += x;
        m2 += x2;
        m4 += x2 * x2;
    }
    let nf = n as f64;
    let frequencies = y_list
        .iter()
        .enumerate()
        .map(|(j, &y)| {
            let mean = sum_cos[j] / nf;
            let var = (sum_cos2[j] / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
            let target = exp(-dt * pow(y.abs(), alpha));
            CfDeviation {
                y,
                empirical: mean,
                target,
                deviation: (mean - target).abs(),
                standard_error: sqrt(var / nf),
            }
        })
        .collect();
    let mean = m1 / nf;
    let variance = (m2 / nf - mean * mean) * nf / (nf - 1.0);
    // Var of x^2 about zero is a fine proxy for the symmetric case.
    let var_of_sq = (m4 / nf - (m2 / nf) * (m2 / nf)).max(0.0);
    Ok(StableSampleCheck {
        alpha,
        dt,
        dimension: d,
        n,
        frequencies,
        variance,
        variance_standard_error: sqrt(var_of_sq / nf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn guards() {
        let mut r = stream_rng(0, 0);
        assert!(sample_stable_increment(&mut r, 2.5, 1.0, 1).is_err());
        assert!(sample_stable_increment(&mut r, 1.5, 0.0, 1).is_err());
        assert!(sample_stable_increment(&mut r, 1.5, 1.0, 4).is_err());
    }

    #[test]
    fn zero_frequency_is_exact() {
        let c = empirical_cf_check(1.5, 1.0, 1, &[0.0], 100, 3).unwrap();
        assert_eq!(c.frequencies[0].deviation, 0.0);
    }

    #[test]
    fn cauchy_and_gaussian_cf() {
        for &(alpha, d) in &[(1.0, 1), (2.0, 1), (1.5, 2), (0.75, 3), (2.0, 2)] {
            let c = empirical_cf_check(alpha, 0.5, d, &[0.5, 1.0, 2.0], 100_000, 11).unwrap();
            for f in &c.frequencies {
                assert!(
                    f.deviation < 4.0 * f.standard_error + 1e-12,
                    "alpha={alpha} d={d} y={} dev={} se={}",
                    f.y,
                    f.deviation,
                    f.standard_error
                );
            }
        }
    }

    #[test]
    fn brownian_variance_is_two_dt() {
        let c = empirical_cf_check(2.0, 0.5, 1, &[], 200_000, 5).unwrap();
        assert!((c.variance - 1.0).abs() < 4.0 * c.variance_standard_error);
    }
}
