//! Renewal functions `U(t) = E N(t)` by Monte Carlo, and their power-law scaling.

use super::lifetime::LifetimeLaw;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use alloc::vec;
use alloc::vec::Vec;
use libm::{pow, sqrt};
use rand::Rng;

/// Number of renewals in `(0, t]` of one sequence of i.i.d. lifetimes.
pub fn renewal_count<R: Rng + ?Sized>(law: &LifetimeLaw, t: f64, rng: &mut R) -> u64 {
    let mut clock = 0.0;
    let mut n = 0;
    loop {
        clock += law.sample(rng);
        if clock > t {
            return n;
        }
        n += 1;
    }
}

/// Monte Carlo estimate of the renewal function.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RenewalEstimate {
    pub t: f64,
    pub mean: f64,
    pub standard_error: f64,
    pub n_sequences: usize,
}

/// Mean renewal count over `n_sequences` sequences; sequence `i` uses stream `i`.
pub fn renewal_function_mc(
    law: &LifetimeLaw,
    t: f64,
    n_sequences: usize,
    seed: u64,
) -> Result<RenewalEstimate> {
    law.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::param("t", t, "0 <= t < inf"));
    }
    if n_sequences < 2 {
        return Err(Error::param("n_reps", n_sequences as f64, "n_reps >= 2"));
    }
    let (mut s, mut s2) = (0.0, 0.0);
    for i in 0..n_sequences {
        let mut rng = stream_rng(seed, i as u64);
        let c = renewal_count(law, t, &mut rng) as f64;
        s += c;
        s2 += c * c;
    }
    let n = n_sequences as f64;
    let mean = s / n;
    let var = (s2 / n - mean * mean).max(0.0) * n / (n - 1.0);
    Ok(RenewalEstimate {
        t,
        mean,
        standard_error: sqrt(var / n),
        n_sequences,
    })
}

/// One `(T, u)` cell of [`renewal_scaling_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScalingRow {
    pub horizon: f64,
    pub u: f64,
    /// `Û(Tu) / Û(T)`
    pub ratio: f64,
    pub standard_error: f64,
    /// `u^γ`
    pub target: f64,
    pub deviation: f64,
}

/// Empirical `U(Tu)/U(T)` against `u^γ` for each horizon.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RenewalScaling {
    pub gamma: f64,
    pub rows: Vec<ScalingRow>,
    /// Per horizon: largest deviation over `u` and the standard error of that cell.
    pub max_deviation: Vec<(f64, f64, f64)>,
}

impl RenewalScaling {
    /// True when each horizon's maximum deviation is no larger than the previous one
    /// plus `slack` combined standard errors.
    pub fn decreasing_within(&self, slack: f64) -> bool {
        self.max_deviation.windows(2).all(|w| {
            let (_, d0, se0) = w[0];
            let (_, d1, se1) = w[1];
            d1 <= d0 + slack * sqrt(se0 * se0 + se1 * se1)
        })
    }
}

/// Renewal-measure scaling `U(T·)/U(T) → u^γ` on `[0, 1]` for a heavy-tailed law.
pub fn renewal_scaling_check(
    law: &LifetimeLaw,
    horizons: &[f64],
    u_grid: &[f64],
    n_sequences: usize,
    seed: u64,
) -> Result<RenewalScaling> {
    law.validate()?;
    let gamma = law
        .tail_exponent()
        .ok_or(Error::Regime("renewal scaling needs a heavy-tailed lifetime law"))?;
    if n_sequences < 2 {
        return Err(Error::param("n_reps", n_sequences as f64, "n_reps >= 2"));
    }
    if u_grid.iter().any(|u| !(*u > 0.0 && *u <= 1.0)) {
        return Err(Error::param("u", f64::NAN, "0 < u <= 1"));
    }
    let mut rows = Vec::new();
    let mut max_deviation = Vec::new();
    for (h_index, &horizon) in horizons.iter().enumerate() {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::param("T", horizon, "0 < T < inf"));
        }
        let k = u_grid.len();
        // sums of N(Tu), N(Tu)^2, N(Tu) N(T), plus N(T), N(T)^2
        let mut s = vec![0.0; k];
        let mut s2 = vec![0.0; k];
        let mut cross = vec![0.0; k];
        let (mut total, mut total2) = (0.0, 0.0);
        for i in 0..n_sequences {
            let stream = ((h_index as u64) << 40) | i as u64;
            let mut rng = stream_rng(seed, stream);
            let mut counts = vec![0u64; k];
            let mut clock = 0.0;
            let mut n = 0u64;
            loop {
                clock += law.sample(&mut rng);
                if clock > horizon {
                    break;
                }
                n += 1;
                for (c, u) in counts.iter_mut().zip(u_grid) {
                    if clock <= horizon * u {
                        *c += 1;
                    }
                }
            }
            let nt = n as f64;
            total += nt;
            total2 += nt * nt;
            for j in 0..k {
                let c = counts[j] as f64;
                s[j] += c;
                s2[j] += c * c;
                cross[j] += c * nt;
            }
        }
        let nf = n_sequences as f64;
        let m_total = total / nf;
        let v_total = total2 / nf - m_total * m_total;
        let mut worst = (horizon, 0.0, 0.0);
        for j in 0..k {
            let u = u_grid[j];
            let m = s[j] / nf;
            let ratio = if m_total > 0.0 { m / m_total } else { f64::NAN };
            let v = s2[j] / nf - m * m;
            let cv = cross[j] / nf - m * m_total;
            // delta method for a ratio of means
            let var = (v - 2.0 * ratio * cv + ratio * ratio * v_total).max(0.0)
                / (nf * m_total * m_total);
            let target = pow(u, gamma);
            let row = ScalingRow {
                horizon,
                u,
                ratio,
                standard_error: sqrt(var),
                target,
                deviation: (ratio - target).abs(),
            };
            if row.deviation > worst.1 {
                worst = (horizon, row.deviation, row.standard_error);
            }
            rows.push(row);
        }
        max_deviation.push(worst);
    }
    Ok(RenewalScaling {
        gamma,
        rows,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_horizon_has_no_renewals() {
        let e = renewal_function_mc(&LifetimeLaw::Exponential { rate: 2.0 }, 0.0, 100, 1).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn exponential_renewal_is_linear() {
        let e = renewal_function_mc(&LifetimeLaw::Exponential { rate: 2.0 }, 10.0, 20_000, 1).unwrap();
        assert!((e.mean - 20.0).abs() < 3.0 * e.standard_error);
    }

    #[test]
    fn unit_fraction_ratio_is_one() {
        let r = renewal_scaling_check(
            &LifetimeLaw::MittagLeffler { gamma: 0.5 },
            &[100.0],
            &[0.25, 1.0],
            2_000,
            3,
        )
        .unwrap();
        assert_eq!(r.rows[1].ratio, 1.0);
        assert_eq!(r.rows[1].standard_error, 0.0);
    }

    #[test]
    fn finite_mean_law_rejected() {
        let r = renewal_scaling_check(&LifetimeLaw::Exponential { rate: 1.0 }, &[10.0], &[0.5], 10, 0);
        assert!(matches!(r, Err(Error::Regime(_))));
    }
}
