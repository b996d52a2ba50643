//! Occupation-time covariances from independent single-ancestor families.
//!
//! For a Poisson initial field of intensity `λ` on the line, families of distinct
//! ancestors are independent, and translating an ancestor from `x` to the origin
//! translates its whole family, so
//!
//! ```text
//! Cov(<φ, J(s)>, <φ, J(t)>) = λ E ∫ F_s(x) F_t(x) dx,   F_t(x) = ∫_0^t Σ_i φ(x + X_i(u)) du,
//! ```
//!
//! with `X_i` the particles of one family started at 0. For a Gaussian bump the
//! `x`-integral reduces to a pair sum of the family's occupation measure against a
//! wider Gaussian, which is evaluated on a fine spatial histogram. Every family then
//! contributes, with no box and no truncation of the initial field.

use super::fluctuations::{jackknife_ratio, FluctuationRegime, RatioEstimate};
use super::population::{simulate_family_profile, Boundary, Observation, ParticleSystemConfig, ReplicateOutcome};
use super::test_function::TestFunction;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use libm::{exp, floor, sqrt};

/// Spatial histogram of an occupation measure, one layer per observation interval.
/// Mass is split linearly between the two nearest cells.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct OccupationProfile {
    spacing: f64,
    n_times: usize,
    cells: BTreeMap<i64, Vec<f64>>,
}

impl OccupationProfile {
    pub(crate) fn new(spacing: f64, n_times: usize) -> Self {
        OccupationProfile {
            spacing,
            n_times,
            cells: BTreeMap::new(),
        }
    }

    pub(crate) fn deposit(&mut self, interval: usize, x: f64, mass: f64) {
        let u = x / self.spacing;
        let base = floor(u);
        let frac = u - base;
        let i = base as i64;
        let nt = self.n_times;
        self.cells.entry(i).or_insert_with(|| vec![0.0; nt])[interval] += mass * (1.0 - frac);
        self.cells.entry(i + 1).or_insert_with(|| vec![0.0; nt])[interval] += mass * frac;
    }

    /// `Σ_{a,b} F_i(a) F_j(b) kernel(x_a - x_b)` over cells closer than `cutoff`, where
    /// `F_i` is the cumulative mass up to observation `i`; row-major `n_times²`.
    pub(crate) fn pair_moments<K: Fn(f64) -> f64>(&self, kernel: K, cutoff: f64) -> Vec<f64> {
        let nt = self.n_times;
        let reach = floor(cutoff / self.spacing) as i64;
        let table: Vec<f64> = (0..=reach).map(|k| kernel(k as f64 * self.spacing)).collect();
        let cells: Vec<(i64, Vec<f64>)> = self
            .cells
            .iter()
            .map(|(&i, m)| {
                let mut acc = m.clone();
                for k in 1..nt {
                    acc[k] += acc[k - 1];
                }
                (i, acc)
            })
            .collect();
        let mut out = vec![0.0; nt * nt];
        for (a, (ia, fa)) in cells.iter().enumerate() {
            for (ib, fb) in &cells[a..] {
                let offset = ib - ia;
                if offset > reach {
                    break;
                }
                let w = table[offset as usize];
                let twice = if offset == 0 { 1.0 } else { 2.0 };
                for i in 0..nt {
                    for j in 0..nt {
                        // symmetrised so that (a, b) and (b, a) are both counted
                        out[i * nt + j] += 0.5 * twice * w * (fa[i] * fb[j] + fb[i] * fa[j]);
                    }
                }
            }
        }
        out
    }
}

/// Pair kernel `∫ φ(x + p) φ(x + q) dx` of a Gaussian bump as a function of `p - q`,
/// and the distance beyond which it is below `1e-17` of its peak.
fn bump_pair_kernel(phi: &TestFunction) -> Result<(f64, f64, f64)> {
    match *phi {
        TestFunction::GaussianBump { width, amplitude, .. } => {
            let peak = amplitude * amplitude * sqrt(core::f64::consts::PI) * width;
            Ok((peak, width, 2.0 * width * sqrt(39.2)))
        }
        TestFunction::IndicatorBox { .. } => Err(Error::Unsupported("family sampling supports Gaussian bumps only")),
    }
}

/// One time scale of the family estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyPlan {
    pub cfg: ParticleSystemConfig,
    pub observation: Observation,
    pub regime: FluctuationRegime,
    pub time_scale: f64,
    pub fractions: Vec<f64>,
    pub normalization: f64,
    /// Histogram cell width used for the pair sum.
    pub spacing: f64,
    phi: TestFunction,
}

impl FamilyPlan {
    /// Uses the motion, lifetime, intensity, step and seed of `cfg` (which must be
    /// one-dimensional); the horizon becomes `T · max(fractions)`. The histogram
    /// cell is a tenth of the bump width.
    pub fn new(cfg: &ParticleSystemConfig, time_scale: f64, fractions: &[f64], phi: &TestFunction) -> Result<Self> {
        if cfg.dimension != 1 {
            return Err(Error::Unsupported("family sampling is implemented for d = 1"));
        }
        if !(time_scale > 0.0 && time_scale.is_finite()) {
            return Err(Error::param("T", time_scale, "0 < T < inf"));
        }
        if fractions.is_empty() || fractions.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return Err(Error::Grid("time fractions must lie in (0, 1]"));
        }
        phi.validate(1)?;
        let (_, width, _) = bump_pair_kernel(phi)?;
        let regime = FluctuationRegime::from_config(cfg)?;
        let mut cfg = cfg.clone();
        cfg.boundary = Boundary::Open;
        let times: Vec<f64> = fractions.iter().map(|f| f * time_scale).collect();
        cfg.horizon = times.iter().fold(0.0, |a: f64, b| a.max(*b));
        let observation = Observation {
            times,
            functions: vec![*phi],
            occupation: true,
        };
        cfg.validate()?;
        observation.validate(&cfg)?;
        let normalization = regime.normalization(time_scale, cfg.alpha, cfg.dimension);
        Ok(FamilyPlan {
            cfg,
            observation,
            regime,
            time_scale,
            fractions: fractions.to_vec(),
            normalization,
            spacing: 0.1 * width,
            phi: *phi,
        })
    }

    /// `λ ∫ F_s F_t dx / H_T²` for family `index`, row-major over the fractions;
    /// `None` if the family exceeded `max_particles`.
    pub fn family(&self, index: u64) -> Result<Option<Vec<f64>>> {
        let mut rng = stream_rng(self.cfg.seed, index);
        let nt = self.fractions.len();
        let profile = OccupationProfile::new(self.spacing, nt);
        let (outcome, profile) = simulate_family_profile(&self.cfg, &self.observation, &mut rng, index, profile);
        let (ReplicateOutcome::Completed(_), Some(profile)) = (outcome, profile) else {
            return Ok(None);
        };
        let (peak, width, cutoff) = bump_pair_kernel(&self.phi)?;
        let scale = self.cfg.intensity / (self.normalization * self.normalization);
        let quarter = 0.25 / (width * width);
        let moments = profile.pair_moments(|d| peak * exp(-quarter * d * d), cutoff);
        Ok(Some(moments.into_iter().map(|m| scale * m).collect()))
    }

    pub fn summarize(&self, outcomes: Vec<Option<Vec<f64>>>) -> Result<FamilyRun> {
        let total = outcomes.len();
        let rows: Vec<Vec<f64>> = outcomes.into_iter().flatten().collect();
        if rows.len() < 2 {
            return Err(Error::param("n_families", rows.len() as f64, "at least two completed families"));
        }
        let m = rows[0].len();
        let n = rows.len() as f64;
        let mut cov = vec![0.0; m];
        let mut cov_standard_error = vec![0.0; m];
        for e in 0..m {
            let (s1, s2) = rows.iter().fold((0.0, 0.0), |(a, b), r| (a + r[e], b + r[e] * r[e]));
            let mean = s1 / n;
            cov[e] = mean;
            cov_standard_error[e] = sqrt((s2 / n - mean * mean).max(0.0) / (n - 1.0));
        }
        Ok(FamilyRun {
            time_scale: self.time_scale,
            fractions: self.fractions.clone(),
            normalization: self.normalization,
            cov,
            cov_standard_error,
            exploded: total - rows.len(),
            rows,
        })
    }
}

/// Per-family pair moments and the covariance they estimate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FamilyRun {
    pub time_scale: f64,
    pub fractions: Vec<f64>,
    pub normalization: f64,
    /// Row-major covariance of the rescaled fluctuations at `fractions`.
    pub cov: Vec<f64>,
    pub cov_standard_error: Vec<f64>,
    pub exploded: usize,
    pub rows: Vec<Vec<f64>>,
}

impl FamilyRun {
    pub fn cov(&self, i: usize, j: usize) -> f64 {
        self.cov[i * self.fractions.len() + j]
    }

    pub fn cov_se(&self, i: usize, j: usize) -> f64 {
        self.cov_standard_error[i * self.fractions.len() + j]
    }

    /// `Cov_ij / Cov_kl` with a delete-a-group jackknife error.
    pub fn ratio(&self, numerator: (usize, usize), denominator: (usize, usize), groups: usize) -> Result<RatioEstimate> {
        let k = self.fractions.len();
        let (num, den) = (numerator.0 * k + numerator.1, denominator.0 * k + denominator.1);
        jackknife_ratio(&self.rows, groups, |rows| {
            let (mut a, mut b) = (0.0, 0.0);
            for r in rows {
                a += r[num];
                b += r[den];
            }
            a / b
        })
    }
}

/// Runs families `0..n_families` sequentially.
pub fn family_covariance(
    cfg: &ParticleSystemConfig,
    time_scale: f64,
    fractions: &[f64],
    phi: &TestFunction,
    n_families: usize,
) -> Result<FamilyRun> {
    let plan = FamilyPlan::new(cfg, time_scale, fractions, phi)?;
    let outcomes = (0..n_families as u64)
        .map(|i| plan.family(i))
        .collect::<Result<Vec<_>>>()?;
    plan.summarize(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::LifetimeLaw;

    #[test]
    fn pair_sum_of_point_masses() {
        let mut p = OccupationProfile::new(0.1, 2);
        p.deposit(0, 0.0, 1.0);
        p.deposit(1, 0.5, 2.0);
        let k = |d: f64| exp(-d * d);
        let m = p.pair_moments(k, 10.0);
        // F_0 = δ_0, F_1 = δ_0 + 2 δ_0.5
        assert!((m[0] - 1.0).abs() < 1e-12);
        let cross = 1.0 + 2.0 * exp(-0.25);
        assert!((m[1] - cross).abs() < 1e-12);
        assert!((m[2] - cross).abs() < 1e-12);
        assert!((m[3] - (1.0 + 4.0 + 4.0 * exp(-0.25))).abs() < 1e-12);
    }

    #[test]
    fn short_horizon_matches_initial_field_variance() {
        // Over a short window [0, τ] the occupation is about τ <φ, Z(0)>, whose
        // variance is λ ∫φ² for a Poisson field.
        let cfg = ParticleSystemConfig {
            alpha: 0.75,
            intensity: 2.0,
            lifetime: LifetimeLaw::Exponential { rate: 1.0 },
            occupation_dt: 1e-4,
            ..Default::default()
        };
        let phi = TestFunction::centered_bump(1.0);
        let tau = 1e-3;
        let plan = FamilyPlan::new(&cfg, tau, &[1.0], &phi).unwrap();
        let run = plan.summarize((0..50).map(|i| plan.family(i).unwrap()).collect()).unwrap();
        let h = plan.normalization;
        let exact = 2.0 * phi.square_mass(1) * tau * tau / (h * h);
        assert!((run.cov(0, 0) / exact - 1.0).abs() < 1e-2, "{} vs {exact}", run.cov(0, 0));
    }

    #[test]
    fn rejects_unsupported_inputs() {
        let cfg = ParticleSystemConfig {
            dimension: 2,
            alpha: 1.5,
            lifetime: LifetimeLaw::Exponential { rate: 1.0 },
            ..Default::default()
        };
        let r = FamilyPlan::new(&cfg, 10.0, &[1.0], &TestFunction::centered_bump(1.0));
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
