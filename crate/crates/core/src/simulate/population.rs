//! Critical binary branching system of symmetric α-stable particles.
//!
//! Particles start as a Poisson field in the box `[-L, L]^d`, move as
//! independent stable motions, and at the end of a lifetime either vanish or are
//! replaced by two newborns at the death site, each with probability ½. Each
//! particle's whole life is simulated when it is born; births wait in a queue
//! ordered by time.

use super::families::OccupationProfile;
use super::lifetime::LifetimeLaw;
use super::stable::add_increment;
use super::test_function::{wrap_coordinate, Point, TestFunction, MAX_DIM};
use crate::error::{Error, Result};
use crate::rng::{open_unit, stream_rng};
use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use libm::{floor, pow};
use rand::Rng;

/// Treatment of particles leaving the simulation box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Boundary {
    /// Positions wrap around the torus `[-L, L)^d`; Lebesgue measure stays invariant.
    Periodic,
    /// Particles move freely; only the initial field is truncated to the box.
    Open,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ParticleSystemConfig {
    pub dimension: usize,
    pub alpha: f64,
    pub lifetime: LifetimeLaw,
    /// Poisson rate per unit volume of the initial field.
    pub intensity: f64,
    /// Half-width `L` of the simulation box.
    pub box_halfwidth: f64,
    /// Largest simulated time.
    pub horizon: f64,
    /// Sub-step for occupation integrals.
    pub occupation_dt: f64,
    pub seed: u64,
    pub boundary: Boundary,
    /// Explosion guard on the number of queued births.
    pub max_particles: usize,
}

impl Default for ParticleSystemConfig {
    fn default() -> Self {
        ParticleSystemConfig {
            dimension: 1,
            alpha: 2.0,
            lifetime: LifetimeLaw::Exponential { rate: 1.0 },
            intensity: 1.0,
            box_halfwidth: 10.0,
            horizon: 1.0,
            occupation_dt: 0.01,
            seed: 0,
            boundary: Boundary::Periodic,
            max_particles: 1_000_000,
        }
    }
}

/// Non-fatal configuration findings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConfigWarning {
    /// Neither `αγ < d < α(1+γ)` nor `α < d < 2α` holds for the lifetime law.
    OutsideLimitRegimes,
    /// The box is smaller than the support radius plus six motion scales.
    SmallBox { recommended: f64 },
}

impl ParticleSystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dimension == 0 || self.dimension > MAX_DIM {
            return Err(Error::param("d", self.dimension as f64, "1 <= d <= 3"));
        }
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::param("alpha", self.alpha, "0 < alpha <= 2"));
        }
        self.lifetime.validate()?;
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::param("intensity", self.intensity, "0 <= intensity < inf"));
        }
        if !(self.box_halfwidth > 0.0 && self.box_halfwidth.is_finite()) {
            return Err(Error::param("box_halfwidth", self.box_halfwidth, "0 < L < inf"));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::param("horizon", self.horizon, "0 < horizon < inf"));
        }
        if !(self.occupation_dt > 0.0 && self.occupation_dt.is_finite()) {
            return Err(Error::param("occupation_dt", self.occupation_dt, "0 < dt < inf"));
        }
        if self.max_particles == 0 {
            return Err(Error::param("max_particles", 0.0, "max_particles >= 1"));
        }
        Ok(())
    }

    /// Box half-width `r + 6 horizon^{1/α} · safety` for functions supported in radius `r`.
    pub fn recommended_box_halfwidth(&self, support_radius: f64, safety: f64) -> f64 {
        support_radius + 6.0 * pow(self.horizon, 1.0 / self.alpha) * safety
    }

    pub fn warnings(&self, observation: &Observation) -> Vec<ConfigWarning> {
        let mut out = Vec::new();
        let d = self.dimension as f64;
        let a = self.alpha;
        let in_regime = match (self.lifetime.tail_exponent(), self.lifetime.mean()) {
            (Some(g), _) => a * g < d && d < a * (1.0 + g),
            (None, Some(_)) => a < d && d < 2.0 * a,
            _ => false,
        };
        if !in_regime {
            out.push(ConfigWarning::OutsideLimitRegimes);
        }
        let radius = observation
            .functions
            .iter()
            .map(|f| f.support_radius(self.dimension))
            .fold(0.0, f64::max);
        let recommended = self.recommended_box_halfwidth(radius, 1.0);
        if self.box_halfwidth < recommended {
            out.push(ConfigWarning::SmallBox { recommended });
        }
        out
    }

    /// Volume of the simulation box.
    pub fn volume(&self) -> f64 {
        pow(2.0 * self.box_halfwidth, self.dimension as f64)
    }
}

/// What to record for each replicate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Observation {
    /// Strictly increasing observation times in `[0, horizon]`.
    pub times: Vec<f64>,
    pub functions: Vec<TestFunction>,
    /// Whether to accumulate `∫_0^t <φ, Z(s)> ds`.
    pub occupation: bool,
}

impl Observation {
    pub fn validate(&self, cfg: &ParticleSystemConfig) -> Result<()> {
        if self.times.is_empty() {
            return Err(Error::Grid("at least one observation time is required"));
        }
        if self.times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::Grid("observation times must be finite and >= 0"));
        }
        if self.times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Grid("observation times must be strictly increasing"));
        }
        if *self.times.last().unwrap() > cfg.horizon {
            return Err(Error::Grid("observation times must not exceed the horizon"));
        }
        if self.functions.is_empty() {
            return Err(Error::Unsupported("at least one test function is required"));
        }
        for f in &self.functions {
            f.validate(cfg.dimension)?;
        }
        Ok(())
    }
}

/// Functionals of one replicate, laid out as `[function * n_times + time]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReplicateValues {
    pub index: u64,
    pub n_times: usize,
    /// `<φ, Z(t)>`
    pub state: Vec<f64>,
    /// `∫_0^t <φ, Z(s)> ds`; empty unless occupation was requested.
    pub occupation: Vec<f64>,
    pub initial_particles: usize,
    pub lives: usize,
    pub peak_queue: usize,
}

impl ReplicateValues {
    pub fn state_at(&self, function: usize, time: usize) -> f64 {
        self.state[function * self.n_times + time]
    }

    pub fn occupation_at(&self, function: usize, time: usize) -> f64 {
        self.occupation[function * self.n_times + time]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReplicateOutcome {
    Completed(ReplicateValues),
    /// The queue exceeded `max_particles`; the replicate is discarded.
    Exploded { index: u64, lives: usize },
}

struct Birth {
    time: f64,
    position: Point,
}

impl PartialEq for Birth {
    fn eq(&self, other: &Self) -> bool {
        self.time.total_cmp(&other.time) == Ordering::Equal
    }
}

impl Eq for Birth {}

impl PartialOrd for Birth {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Birth {
    // reversed so the max-heap pops the earliest birth
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time)
    }
}

struct Recorder<'a> {
    cfg: &'a ParticleSystemConfig,
    obs: &'a Observation,
    state: Vec<f64>,
    bins: Vec<f64>,
    values: Vec<f64>,
    last: Point,
    profile: Option<OccupationProfile>,
}

impl Recorder<'_> {
    fn eval(&self, f: &TestFunction, x: &Point) -> f64 {
        match self.cfg.boundary {
            Boundary::Periodic => f.value_periodic(x, self.cfg.dimension, self.cfg.box_halfwidth),
            Boundary::Open => f.value(x, self.cfg.dimension),
        }
    }

    fn record(&mut self, k: usize, x: &Point) {
        let nt = self.obs.times.len();
        for (j, f) in self.obs.functions.iter().enumerate() {
            self.state[j * nt + k] += self.eval(f, x);
        }
    }

    fn refresh(&mut self, x: &Point) {
        self.last = *x;
        for j in 0..self.obs.functions.len() {
            self.values[j] = self.eval(&self.obs.functions[j], x);
        }
    }

    /// Adds the trapezoid over a step ending inside bin `k`; `values` holds the start.
    fn accumulate(&mut self, k: usize, x: &Point, step: f64) {
        let nt = self.obs.times.len();
        for j in 0..self.obs.functions.len() {
            let new = self.eval(&self.obs.functions[j], x);
            self.bins[j * nt + k] += 0.5 * (self.values[j] + new) * step;
            self.values[j] = new;
        }
        if let Some(profile) = self.profile.as_mut() {
            profile.deposit(k, self.last[0], 0.5 * step);
            profile.deposit(k, x[0], 0.5 * step);
        }
        self.last = *x;
    }

    /// Moves one particle from `birth` until `min(death, last observation)`.
    fn run_life<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        birth: f64,
        death: f64,
        mut x: Point,
    ) -> Point {
        let obs = self.obs;
        let times = &obs.times;
        let nt = times.len();
        let t_end = times[nt - 1];
        let stop = death.min(t_end);
        let d = self.cfg.dimension;
        let dt = self.cfg.occupation_dt;
        let occupation = obs.occupation;

        let first = times.partition_point(|&s| s < birth);
        if first < nt && times[first] == birth && birth < death {
            self.record(first, &x);
        }
        let mut k_next = times.partition_point(|&s| s <= birth);
        if occupation {
            self.refresh(&x);
        }
        let mut t = birth;
        while t < stop {
            let mut next = stop;
            if k_next < nt && times[k_next] < next {
                next = times[k_next];
            }
            if occupation {
                let m = floor(t / dt) + 1.0;
                let mut g = m * dt;
                if g <= t {
                    g = (m + 1.0) * dt;
                }
                if g < next {
                    next = g;
                }
            }
            add_increment(rng, self.cfg.alpha, next - t, &mut x[..d]);
            if self.cfg.boundary == Boundary::Periodic {
                for c in x[..d].iter_mut() {
                    *c = wrap_coordinate(*c, self.cfg.box_halfwidth);
                }
            }
            if occupation {
                self.accumulate(k_next.min(nt - 1), &x, next - t);
            }
            t = next;
            if k_next < nt && times[k_next] == t {
                if t < death {
                    self.record(k_next, &x);
                }
                k_next += 1;
            }
        }
        x
    }
}

/// Simulates replicate `index`, drawing from stream `index` of `cfg.seed`.
pub fn simulate_replicate(
    cfg: &ParticleSystemConfig,
    obs: &Observation,
    index: u64,
) -> Result<ReplicateOutcome> {
    cfg.validate()?;
    obs.validate(cfg)?;
    let mut rng = stream_rng(cfg.seed, index);
    let d = cfg.dimension;
    let half = cfg.box_halfwidth;

    let expected = cfg.intensity * cfg.volume();
    let initial = if expected > 0.0 {
        let p = rand_distr::Poisson::new(expected)
            .map_err(|_| Error::param("intensity", cfg.intensity, "intensity * volume < 1e19"))?;
        rng.sample::<f64, _>(p) as usize
    } else {
        0
    };
    if initial > cfg.max_particles {
        return Ok(ReplicateOutcome::Exploded { index, lives: 0 });
    }
    let mut queue = BinaryHeap::with_capacity(initial);
    for _ in 0..initial {
        let mut position = [0.0; MAX_DIM];
        for c in position[..d].iter_mut() {
            *c = half * (2.0 * open_unit(&mut rng) - 1.0);
        }
        queue.push(Birth {
            time: 0.0,
            position,
        });
    }
    Ok(evolve(cfg, obs, &mut rng, queue, index, None).0)
}

/// Simulates the family of a single ancestor born at time 0 at `start`.
pub fn simulate_family<R: Rng + ?Sized>(
    cfg: &ParticleSystemConfig,
    obs: &Observation,
    start: Point,
    rng: &mut R,
    index: u64,
) -> Result<ReplicateOutcome> {
    cfg.validate()?;
    obs.validate(cfg)?;
    let mut queue = BinaryHeap::with_capacity(1);
    queue.push(Birth {
        time: 0.0,
        position: start,
    });
    Ok(evolve(cfg, obs, rng, queue, index, None).0)
}

/// Like [`simulate_family`] from the origin, also returning the spatial profile of
/// the occupation measure along the first axis.
pub(crate) fn simulate_family_profile<R: Rng + ?Sized>(
    cfg: &ParticleSystemConfig,
    obs: &Observation,
    rng: &mut R,
    index: u64,
    profile: OccupationProfile,
) -> (ReplicateOutcome, Option<OccupationProfile>) {
    let mut queue = BinaryHeap::with_capacity(1);
    queue.push(Birth {
        time: 0.0,
        position: [0.0; MAX_DIM],
    });
    evolve(cfg, obs, rng, queue, index, Some(profile))
}

fn evolve<R: Rng + ?Sized>(
    cfg: &ParticleSystemConfig,
    obs: &Observation,
    rng: &mut R,
    mut queue: BinaryHeap<Birth>,
    index: u64,
    profile: Option<OccupationProfile>,
) -> (ReplicateOutcome, Option<OccupationProfile>) {
    let nt = obs.times.len();
    let nf = obs.functions.len();
    let t_end = obs.times[nt - 1];
    let initial = queue.len();
    let mut rec = Recorder {
        cfg,
        obs,
        state: vec![0.0; nf * nt],
        bins: if obs.occupation {
            vec![0.0; nf * nt]
        } else {
            Vec::new()
        },
        values: vec![0.0; nf],
        last: [0.0; MAX_DIM],
        profile,
    };
    let mut lives = 0usize;
    let mut peak_queue = queue.len();
    while let Some(b) = queue.pop() {
        lives += 1;
        let death = b.time + cfg.lifetime.sample(rng);
        let end = rec.run_life(rng, b.time, death, b.position);
        if death <= t_end && open_unit(rng) < 0.5 {
            for _ in 0..2 {
                queue.push(Birth {
                    time: death,
                    position: end,
                });
            }
            if queue.len() > cfg.max_particles {
                return (ReplicateOutcome::Exploded { index, lives }, None);
            }
            peak_queue = peak_queue.max(queue.len());
        }
    }

    let mut occupation = rec.bins;
    if obs.occupation {
        for j in 0..nf {
            for k in 1..nt {
                occupation[j * nt + k] += occupation[j * nt + k - 1];
            }
        }
    }
    let values = ReplicateValues {
        index,
        n_times: nt,
        state: rec.state,
        occupation,
        initial_particles: initial,
        lives,
        peak_queue,
    };
    (ReplicateOutcome::Completed(values), rec.profile)
}

/// Completed replicates plus the indices of exploded ones.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationRun {
    pub replicates: Vec<ReplicateValues>,
    pub exploded: Vec<u64>,
}

impl PopulationRun {
    /// Sorts outcomes by replicate index, separating exploded ones.
    pub fn from_outcomes(outcomes: Vec<ReplicateOutcome>) -> Self {
        let mut replicates = Vec::new();
        let mut exploded = Vec::new();
        for o in outcomes {
            match o {
                ReplicateOutcome::Completed(v) => replicates.push(v),
                ReplicateOutcome::Exploded { index, .. } => exploded.push(index),
            }
        }
        replicates.sort_by_key(|r| r.index);
        exploded.sort_unstable();
        PopulationRun {
            replicates,
            exploded,
        }
    }

    /// Per replicate, `<φ_function, Z(t)>` over the observation times.
    pub fn state_rows(&self, function: usize) -> Vec<Vec<f64>> {
        self.replicates
            .iter()
            .map(|r| {
                let nt = r.n_times;
                r.state[function * nt..(function + 1) * nt].to_vec()
            })
            .collect()
    }

    /// Per replicate, `∫_0^t <φ_function, Z(s)> ds` over the observation times.
    pub fn occupation_rows(&self, function: usize) -> Vec<Vec<f64>> {
        self.replicates
            .iter()
            .map(|r| {
                let nt = r.n_times;
                r.occupation[function * nt..(function + 1) * nt].to_vec()
            })
            .collect()
    }
}

/// Runs replicates `0..n_replicates` sequentially.
pub fn simulate_population(
    cfg: &ParticleSystemConfig,
    obs: &Observation,
    n_replicates: usize,
) -> Result<PopulationRun> {
    cfg.validate()?;
    obs.validate(cfg)?;
    let outcomes = (0..n_replicates as u64)
        .map(|i| simulate_replicate(cfg, obs, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(PopulationRun::from_outcomes(outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(times: Vec<f64>, occupation: bool) -> Observation {
        Observation {
            times,
            functions: vec![TestFunction::centered_bump(1.0)],
            occupation,
        }
    }

    #[test]
    fn zero_intensity_is_empty() {
        let cfg = ParticleSystemConfig {
            intensity: 0.0,
            horizon: 2.0,
            ..Default::default()
        };
        let run = simulate_population(&cfg, &obs(vec![1.0, 2.0], true), 5).unwrap();
        assert_eq!(run.replicates.len(), 5);
        for r in &run.replicates {
            assert!(r.state.iter().chain(&r.occupation).all(|v| *v == 0.0));
            assert_eq!(r.lives, 0);
        }
    }

    #[test]
    fn occupation_is_nondecreasing() {
        let cfg = ParticleSystemConfig {
            horizon: 3.0,
            occupation_dt: 0.05,
            ..Default::default()
        };
        let run = simulate_population(&cfg, &obs(vec![0.5, 1.0, 2.0, 3.0], true), 20).unwrap();
        for r in &run.replicates {
            for k in 1..4 {
                assert!(r.occupation_at(0, k) >= r.occupation_at(0, k - 1));
            }
        }
    }

    #[test]
    fn without_motion_time_the_state_at_zero_is_the_field() {
        // At t = 0 every particle sits where it was placed, so <1_box, Z(0)> is the count.
        let cfg = ParticleSystemConfig {
            horizon: 1.0,
            box_halfwidth: 5.0,
            ..Default::default()
        };
        let o = Observation {
            times: vec![0.0, 1.0],
            functions: vec![TestFunction::IndicatorBox {
                lower: [-5.0; 3],
                upper: [5.0; 3],
            }],
            occupation: false,
        };
        let run = simulate_population(&cfg, &o, 10).unwrap();
        for r in &run.replicates {
            assert_eq!(r.state_at(0, 0), r.initial_particles as f64);
        }
    }

    #[test]
    fn deterministic_per_index() {
        let cfg = ParticleSystemConfig {
            horizon: 2.0,
            ..Default::default()
        };
        let o = obs(vec![1.0, 2.0], true);
        let a = simulate_replicate(&cfg, &o, 7).unwrap();
        let b = simulate_replicate(&cfg, &o, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn explosion_guard() {
        let cfg = ParticleSystemConfig {
            horizon: 1.0,
            max_particles: 3,
            ..Default::default()
        };
        let run = simulate_population(&cfg, &obs(vec![1.0], false), 3).unwrap();
        assert_eq!(run.exploded.len(), 3);
    }

    #[test]
    fn observation_validation() {
        let cfg = ParticleSystemConfig::default();
        assert!(obs(vec![], false).validate(&cfg).is_err());
        assert!(obs(vec![2.0], false).validate(&cfg).is_err());
        assert!(obs(vec![0.5, 0.5], false).validate(&cfg).is_err());
    }

    #[test]
    fn regime_warning() {
        let cfg = ParticleSystemConfig::default();
        let w = cfg.warnings(&obs(vec![1.0], false));
        assert!(w.contains(&ConfigWarning::OutsideLimitRegimes));
        let cfg = ParticleSystemConfig {
            alpha: 0.75,
            box_halfwidth: 100.0,
            ..Default::default()
        };
        assert!(cfg.warnings(&obs(vec![1.0], false)).is_empty());
    }
}
