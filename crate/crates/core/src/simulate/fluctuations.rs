//! Rescaled occupation-time fluctuations
//! `(<φ, J(Tt)> - Tt intensity ∫φ) / H_T` and ratio statistics on them.

use super::lifetime::LifetimeLaw;
use super::population::{simulate_replicate, Observation, ParticleSystemConfig, ReplicateOutcome};
use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::gp::{empirical_cov, EnsembleStats};
use crate::kernels::{BranchingLimitParams, LifetimeRegime};
use alloc::vec;
use alloc::vec::Vec;
use libm::{pow, sqrt};

/// Which limit theorem the configuration falls under.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum FluctuationRegime {
    /// `αγ < d < α(1+γ)`, `H_T = T^{(2+γ-d/α)/2}`.
    HeavyTail { gamma: f64 },
    /// `α < d < 2α`, `H_T = T^{(3-d/α)/2}`.
    FiniteMean { mean: f64 },
}

impl FluctuationRegime {
    pub fn from_config(cfg: &ParticleSystemConfig) -> Result<Self> {
        let d = cfg.dimension as f64;
        let a = cfg.alpha;
        match cfg.lifetime {
            LifetimeLaw::MittagLeffler { gamma } | LifetimeLaw::Pareto { gamma } => {
                if a * gamma < d && d < a * (1.0 + gamma) {
                    Ok(FluctuationRegime::HeavyTail { gamma })
                } else {
                    Err(Error::Regime("heavy tail requires alpha*gamma < d < alpha*(1+gamma)"))
                }
            }
            law => {
                let mean = law.mean().expect("finite-mean law");
                if a < d && d < 2.0 * a {
                    Ok(FluctuationRegime::FiniteMean { mean })
                } else {
                    Err(Error::Regime("finite mean requires alpha < d < 2*alpha"))
                }
            }
        }
    }

    /// `H_T`.
    pub fn normalization(&self, horizon: f64, alpha: f64, dimension: usize) -> f64 {
        let r = dimension as f64 / alpha;
        match *self {
            FluctuationRegime::HeavyTail { gamma } => pow(horizon, (2.0 + gamma - r) / 2.0),
            FluctuationRegime::FiniteMean { .. } => pow(horizon, (3.0 - r) / 2.0),
        }
    }

    /// Parameters of the limit covariance for a function of mass `phi_mass`
    /// and a field of the given intensity.
    pub fn limit_params(&self, alpha: f64, dimension: usize, phi_mass: f64, intensity: f64) -> BranchingLimitParams {
        let regime = match *self {
            FluctuationRegime::HeavyTail { gamma } => LifetimeRegime::HeavyTail { gamma },
            FluctuationRegime::FiniteMean { mean } => LifetimeRegime::FiniteMean { mean },
        };
        BranchingLimitParams {
            alpha,
            dimension: dimension as u32,
            regime,
            phi_mass: phi_mass * intensity,
            psi_mass: phi_mass,
        }
    }
}

/// A fluctuation experiment at one time scale `T`, split into independent replicates.
#[derive(Debug, Clone, PartialEq)]
pub struct FluctuationPlan {
    pub cfg: ParticleSystemConfig,
    pub observation: Observation,
    pub regime: FluctuationRegime,
    pub time_scale: f64,
    pub fractions: Vec<f64>,
    pub normalization: f64,
    /// `Tt intensity ∫φ` per fraction.
    pub centering: Vec<f64>,
}

impl FluctuationPlan {
    /// Sets the horizon of `cfg` to `T · max(fractions)`; the box and seed are kept.
    pub fn new(
        cfg: &ParticleSystemConfig,
        time_scale: f64,
        fractions: &[f64],
        phi: &TestFunction,
    ) -> Result<Self> {
        if !(time_scale > 0.0 && time_scale.is_finite()) {
            return Err(Error::param("T", time_scale, "0 < T < inf"));
        }
        if fractions.is_empty() || fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(Error::Grid("time fractions must lie in (0, 1]"));
        }
        let regime = FluctuationRegime::from_config(cfg)?;
        let mut cfg = cfg.clone();
        let times: Vec<f64> = fractions.iter().map(|f| f * time_scale).collect();
        cfg.horizon = *times.iter().fold(&0.0, |a, b| if b > a { b } else { a });
        let observation = Observation {
            times: times.clone(),
            functions: vec![*phi],
            occupation: true,
        };
        cfg.validate()?;
        observation.validate(&cfg)?;
        let mass = phi.mass(cfg.dimension);
        let centering = times.iter().map(|t| t * cfg.intensity * mass).collect();
        let normalization = regime.normalization(time_scale, cfg.alpha, cfg.dimension);
        Ok(FluctuationPlan {
            cfg,
            observation,
            regime,
            time_scale,
            fractions: fractions.to_vec(),
            normalization,
            centering,
        })
    }

    /// Rescaled, centered occupation values of replicate `index`; `None` if it exploded.
    pub fn replicate(&self, index: u64) -> Result<Option<Vec<f64>>> {
        match simulate_replicate(&self.cfg, &self.observation, index)? {
            ReplicateOutcome::Completed(v) => Ok(Some(
                v.occupation
                    .iter()
                    .zip(&self.centering)
                    .map(|(j, c)| (j - c) / self.normalization)
                    .collect(),
            )),
            ReplicateOutcome::Exploded { .. } => Ok(None),
        }
    }

    pub fn summarize(&self, outcomes: Vec<Option<Vec<f64>>>) -> Result<FluctuationRun> {
        let total = outcomes.len();
        let values: Vec<Vec<f64>> = outcomes.into_iter().flatten().collect();
        let exploded = total - values.len();
        let stats = empirical_cov(&self.fractions, &values)?;
        Ok(FluctuationRun {
            regime: self.regime,
            time_scale: self.time_scale,
            normalization: self.normalization,
            values,
            stats,
            exploded,
        })
    }
}

/// Replicate values and their ensemble statistics.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FluctuationRun {
    pub regime: FluctuationRegime,
    pub time_scale: f64,
    pub normalization: f64,
    pub values: Vec<Vec<f64>>,
    pub stats: EnsembleStats,
    pub exploded: usize,
}

/// Runs replicates `0..n_replicates` sequentially.
pub fn occupation_fluctuations(
    cfg: &ParticleSystemConfig,
    time_scale: f64,
    fractions: &[f64],
    phi: &TestFunction,
    n_replicates: usize,
) -> Result<FluctuationRun> {
    let plan = FluctuationPlan::new(cfg, time_scale, fractions, phi)?;
    let outcomes = (0..n_replicates as u64)
        .map(|i| plan.replicate(i))
        .collect::<Result<Vec<_>>>()?;
    plan.summarize(outcomes)
}

/// A ratio of two sample covariances with a jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatioEstimate {
    pub ratio: f64,
    pub standard_error: f64,
}

fn sample_cov(rows: &[&Vec<f64>], i: usize, j: usize) -> f64 {
    let n = rows.len() as f64;
    let mi = rows.iter().map(|r| r[i]).sum::<f64>() / n;
    let mj = rows.iter().map(|r| r[j]).sum::<f64>() / n;
    rows.iter().map(|r| (r[i] - mi) * (r[j] - mj)).sum::<f64>() / (n - 1.0)
}

/// `Cov(X_i, X_j) / Cov(X_k, X_l)` over `rows`, with a delete-a-group jackknife
/// error using `groups` contiguous groups.
pub fn covariance_ratio(
    rows: &[Vec<f64>],
    numerator: (usize, usize),
    denominator: (usize, usize),
    groups: usize,
) -> Result<RatioEstimate> {
    jackknife_ratio(rows, groups, |sub| {
        sample_cov(sub, numerator.0, numerator.1) / sample_cov(sub, denominator.0, denominator.1)
    })
}

/// `statistic(rows)` with a delete-a-group jackknife error.
pub(crate) fn jackknife_ratio<F>(rows: &[Vec<f64>], groups: usize, statistic: F) -> Result<RatioEstimate>
where
    F: Fn(&[&Vec<f64>]) -> f64,
{
    let n = rows.len();
    if groups < 2 || n < 2 * groups {
        return Err(Error::param("n_samples", n as f64, "at least two rows per jackknife group"));
    }
    let all: Vec<&Vec<f64>> = rows.iter().collect();
    let ratio = statistic(&all);
    let g = groups as f64;
    let mut partial = Vec::with_capacity(groups);
    for k in 0..groups {
        let lo = k * n / groups;
        let hi = (k + 1) * n / groups;
        let kept: Vec<&Vec<f64>> = all[..lo].iter().chain(&all[hi..]).copied().collect();
        partial.push(statistic(&kept));
    }
    let mean = partial.iter().sum::<f64>() / g;
    let var = (g - 1.0) / g * partial.iter().map(|p| (p - mean) * (p - mean)).sum::<f64>();
    Ok(RatioEstimate {
        ratio,
        standard_error: sqrt(var),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        let heavy = ParticleSystemConfig {
            alpha: 1.5,
            lifetime: LifetimeLaw::MittagLeffler { gamma: 0.5 },
            ..Default::default()
        };
        assert_eq!(
            FluctuationRegime::from_config(&heavy).unwrap(),
            FluctuationRegime::HeavyTail { gamma: 0.5 }
        );
        let finite = ParticleSystemConfig {
            alpha: 0.75,
            ..Default::default()
        };
        assert_eq!(
            FluctuationRegime::from_config(&finite).unwrap(),
            FluctuationRegime::FiniteMean { mean: 1.0 }
        );
        let outside = ParticleSystemConfig::default();
        assert!(FluctuationRegime::from_config(&outside).is_err());
    }

    #[test]
    fn normalizations() {
        let h = FluctuationRegime::HeavyTail { gamma: 0.5 };
        assert!((h.normalization(100.0, 1.5, 1) - pow(100.0, (2.5 - 2.0 / 3.0) / 2.0)).abs() < 1e-9);
        let f = FluctuationRegime::FiniteMean { mean: 1.0 };
        assert!((f.normalization(100.0, 0.75, 1) - pow(100.0, 5.0 / 6.0)).abs() < 1e-9);
    }

    #[test]
    fn ratio_of_perfectly_correlated_rows() {
        let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let r = covariance_ratio(&rows, (0, 1), (1, 1), 10).unwrap();
        assert!((r.ratio - 0.5).abs() < 1e-14);
        assert!(r.standard_error < 1e-12);
    }

    #[test]
    fn small_run_is_centered() {
        let cfg = ParticleSystemConfig {
            alpha: 1.5,
            lifetime: LifetimeLaw::MittagLeffler { gamma: 0.5 },
            box_halfwidth: 40.0,
            occupation_dt: 0.5,
            ..Default::default()
        };
        let phi = TestFunction::centered_bump(1.0);
        let run = occupation_fluctuations(&cfg, 10.0, &[0.5, 1.0], &phi, 300).unwrap();
        for k in 0..2 {
            let m = run.stats.mean[k];
            assert!(m.abs() < 4.0 * run.stats.mean_standard_error[k], "{m}");
        }
        assert_eq!(run.exploded, 0);
    }
}
