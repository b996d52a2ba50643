//! Monte Carlo engine for critical binary branching systems of symmetric
//! α-stable particles, with renewal utilities and exact second moments.

pub mod families;
pub mod fluctuations;
pub mod lifetime;
pub mod moments;
pub mod population;
pub mod renewal;
pub mod stable;
pub mod test_function;

pub use families::{family_covariance, FamilyPlan, FamilyRun};
pub use fluctuations::{
    covariance_ratio, occupation_fluctuations, FluctuationPlan, FluctuationRegime,
    FluctuationRun, RatioEstimate,
};
pub use lifetime::LifetimeLaw;
pub use moments::{exact_moment_cov, moment_cov_with_renewal, RenewalMeasure};
pub use population::{
    simulate_family, simulate_population, simulate_replicate, Boundary, ConfigWarning, Observation,
    ParticleSystemConfig, PopulationRun, ReplicateOutcome, ReplicateValues,
};
pub use renewal::{
    renewal_count, renewal_function_mc, renewal_scaling_check, RenewalEstimate,
    RenewalScaling, ScalingRow,
};
pub use stable::{empirical_cf_check, sample_stable_increment, CfDeviation, StableSampleCheck};
pub use test_function::{Point, TestFunction, MAX_DIM};
