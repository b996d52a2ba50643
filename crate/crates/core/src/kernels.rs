//! Covariance kernels.
//!
//! The central object is
//!
//! ```text
//! Q_{a,b}(w, z) = 1/(1-b) ∫_0^{w∧z} s^a [ (z-s)^b + (w-s)^b - (w+z-2s)^b ] ds
//! ```
//!
//! for `a > -1`, `b > -1`, `b != 1`, together with its `b = 1` logarithmic
//! counterpart, the sub-fractional kernel and the weighted fractional kernel.

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special::{beta, gamma, pow_diff, xlogx};
use core::f64::consts::PI;
use libm::{log, log1p, pow};

/// Anything that can produce a covariance between two times.
pub trait Kernel {
    fn covariance(&self, s: f64, t: f64) -> Result<f64>;
}

/// Validated exponents `(a, b)` of the kernel `Q_{a,b}`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct KernelParams {
    a: f64,
    b: f64,
}

/// Where `(a, b)` sits relative to the known positive-definiteness results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Region {
    /// `0 <= b <= 2`: positive definite.
    PdBounded,
    /// `-1 < b < 0` and `a + b + 1 >= 0`: positive definite.
    PdNegative,
    /// `-1 < b < 0` and `a + b + 1 < 0`: not a covariance.
    NotPdNegative,
    /// `b > a + 3`: not a covariance.
    NotPdSteep,
    /// `2 < b <= a + 3`: no result either way.
    Unresolved,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::PdBounded => "pd-bounded",
            Region::PdNegative => "pd-negative",
            Region::NotPdNegative => "not-pd-negative",
            Region::NotPdSteep => "not-pd-steep",
            Region::Unresolved => "unresolved",
        }
    }

    pub fn is_positive_definite(self) -> bool {
        matches!(self, Region::PdBounded | Region::PdNegative)
    }

    pub fn is_not_positive_definite(self) -> bool {
        matches!(self, Region::NotPdNegative | Region::NotPdSteep)
    }
}

impl KernelParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > -1.0) {
            return Err(Error::param("a", a, "a > -1"));
        }
        if !(b.is_finite() && b > -1.0) {
            return Err(Error::param("b", b, "b > -1"));
        }
        if b == 1.0 {
            return Err(Error::param(
                "b",
                b,
                "b != 1 (use the logarithmic kernel for b = 1)",
            ));
        }
        Ok(KernelParams { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Self-similarity exponent `a + b + 1`.
    pub fn scaling_exponent(&self) -> f64 {
        self.a + self.b + 1.0
    }

    pub fn region(&self) -> Region {
        let (a, b) = (self.a, self.b);
        if (0.0..=2.0).contains(&b) {
            Region::PdBounded
        } else if b < 0.0 {
            if a + b + 1.0 >= 0.0 {
                Region::PdNegative
            } else {
                Region::NotPdNegative
            }
        } else if b > a + 3.0 {
            Region::NotPdSteep
        } else {
            Region::Unresolved
        }
    }
}

fn check_time(name: &'static str, t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, t, "finite time >= 0"))
    }
}

/// `Q_{a,b}(w, z)` by quadrature.
pub fn eval_qab(params: &KernelParams, w: f64, z: f64, q: &QuadratureSpec) -> Result<f64> {
    check_time("w", w)?;
    check_time("z", z)?;
    let (lo, hi) = if w <= z { (w, z) } else { (z, w) };
    if lo == 0.0 {
        return Ok(0.0);
    }
    let (a, b) = (params.a, params.b);
    if b == 0.0 {
        return Ok(pow(lo, a + 1.0) / (a + 1.0));
    }
    let gap = hi - lo;
    let integral = integrate(
        |n| {
            // bracket = (lo-s)^b - [(gap + 2(lo-s))^b - (gap + (lo-s))^b]
            let near = n.to_hi;
            let bracket = pow(near, b) - pow_diff(gap + near, near, b);
            pow(n.from_lo, a) * bracket
        },
        0.0,
        lo,
        q,
    )?;
    Ok(integral / (1.0 - b))
}

/// `Q_{a,b}(t, t)` in closed form.
pub fn qab_diagonal(params: &KernelParams, t: f64) -> Result<f64> {
    check_time("t", t)?;
    let (a, b) = (params.a, params.b);
    if t == 0.0 {
        return Ok(0.0);
    }
    Ok((2.0 - pow(2.0, b)) / (1.0 - b) * beta(a + 1.0, b + 1.0) * pow(t, a + b + 1.0))
}

/// `Q_{0,b}(w, z)` in closed form.
pub fn qab_zero_weight(b: f64, w: f64, z: f64) -> Result<f64> {
    KernelParams::new(0.0, b)?;
    check_time("w", w)?;
    check_time("z", z)?;
    let e = b + 1.0;
    let sum = pow(w, e) + pow(z, e) - 0.5 * (pow(w + z, e) + pow((w - z).abs(), e));
    Ok(sum / ((b + 1.0) * (1.0 - b)))
}

/// `Q_{a,0}(w, z) = (w∧z)^{a+1} / (a+1)`.
pub fn qab_flat(a: f64, w: f64, z: f64) -> Result<f64> {
    KernelParams::new(a, 0.0)?;
    check_time("w", w)?;
    check_time("z", z)?;
    Ok(pow(w.min(z), a + 1.0) / (a + 1.0))
}

/// Logarithmic kernel
/// `K(s,t) = ∫_0^{s∧t} r^{γ-1} [ (s+t-2r) ln(s+t-2r) - (s-r) ln(s-r) - (t-r) ln(t-r) ] dr`.
pub fn eval_k_log(gamma_exp: f64, s: f64, t: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(gamma_exp > 0.0 && gamma_exp < 1.0) {
        return Err(Error::param("gamma", gamma_exp, "0 < gamma < 1"));
    }
    check_time("s", s)?;
    check_time("t", t)?;
    let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
    if lo == 0.0 {
        return Ok(0.0);
    }
    let gap = hi - lo;
    integrate(
        |n| {
            let near = n.to_hi;
            // (gap + 2 near) ln(gap + 2 near) - (gap + near) ln(gap + near), rearranged
            let wide = gap + 2.0 * near;
            let mid = gap + near;
            let diff = if mid > 0.0 {
                near * log(wide) + mid * log1p(near / mid)
            } else {
                0.0
            };
            pow(n.from_lo, gamma_exp - 1.0) * (diff - xlogx(near))
        },
        0.0,
        lo,
        q,
    )
}

/// Sub-fractional Brownian motion kernel
/// `s^h + t^h - ½[(s+t)^h + |s-t|^h]`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SubFbm {
    h: f64,
}

impl SubFbm {
    /// Accepts `h` in `(0, 2)`.
    pub fn new(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 2.0) {
            return Err(Error::param("h", h, "0 < h < 2"));
        }
        Ok(SubFbm { h })
    }

    /// Accepts `h` in `(0, 3)`. For `h > 2` the expression equals
    /// `h(2-h) Q_{0,h-1}`, so its negation is the covariance.
    pub fn with_extended_range(h: f64) -> Result<Self> {
        if !(h > 0.0 && h < 3.0) {
            return Err(Error::param("h", h, "0 < h < 3"));
        }
        Ok(SubFbm { h })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        check_time("s", s)?;
        check_time("t", t)?;
        let h = self.h;
        Ok(pow(s, h) + pow(t, h) - 0.5 * (pow(s + t, h) + pow((s - t).abs(), h)))
    }
}

impl Kernel for SubFbm {
    fn covariance(&self, s: f64, t: f64) -> Result<f64> {
        self.eval(s, t)
    }
}

/// Convenience wrapper over [`SubFbm::new`].
pub fn eval_subfbm(h: f64, s: f64, t: f64) -> Result<f64> {
    SubFbm::new(h)?.eval(s, t)
}

/// Weighted fractional Brownian motion kernel
/// `∫_0^{s∧t} r^a [(s-r)^b + (t-r)^b] dr`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightedFbm {
    a: f64,
    b: f64,
    pub quadrature: QuadratureSpec,
}

impl WeightedFbm {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > -1.0) {
            return Err(Error::param("a", a, "a > -1"));
        }
        if !(b > -1.0 && b <= 1.0) {
            return Err(Error::param("b", b, "-1 < b <= 1"));
        }
        if b.abs() > 1.0 + a {
            return Err(Error::param("b", b, "|b| <= 1 + a"));
        }
        Ok(WeightedFbm {
            a,
            b,
            quadrature: QuadratureSpec::default(),
        })
    }

    pub fn eval(&self, s: f64, t: f64) -> Result<f64> {
        check_time("s", s)?;
        check_time("t", t)?;
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        if lo == 0.0 {
            return Ok(0.0);
        }
        let (a, b, gap) = (self.a, self.b, hi - lo);
        integrate(
            |n| pow(n.from_lo, a) * (pow(n.to_hi, b) + pow(gap + n.to_hi, b)),
            0.0,
            lo,
            &self.quadrature,
        )
    }
}

impl Kernel for WeightedFbm {
    fn covariance(&self, s: f64, t: f64) -> Result<f64> {
        self.eval(s, t)
    }
}

/// `Q_{a,b}` packaged with its quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Qab {
    pub params: KernelParams,
    pub quadrature: QuadratureSpec,
}

impl Qab {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        Ok(Qab {
            params: KernelParams::new(a, b)?,
            quadrature: QuadratureSpec::default(),
        })
    }
}

impl Kernel for Qab {
    fn covariance(&self, s: f64, t: f64) -> Result<f64> {
        if s == t {
            qab_diagonal(&self.params, s)
        } else {
            eval_qab(&self.params, s, t, &self.quadrature)
        }
    }
}

/// The logarithmic kernel packaged with its quadrature settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogKernel {
    pub gamma: f64,
    pub quadrature: QuadratureSpec,
}

impl Kernel for LogKernel {
    fn covariance(&self, s: f64, t: f64) -> Result<f64> {
        eval_k_log(self.gamma, s, t, &self.quadrature)
    }
}

/// `∫_{R^d} e^{-|y|^α} dy = 2π^{d/2} / Γ(d/2) · Γ(d/α) / α`.
pub fn stable_mass_integral(alpha: f64, dimension: u32) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(Error::param("alpha", alpha, "0 < alpha <= 2"));
    }
    if dimension == 0 {
        return Err(Error::param("d", 0.0, "d >= 1"));
    }
    let d = dimension as f64;
    Ok(2.0 * pow(PI, d / 2.0) / gamma(d / 2.0) * gamma(d / alpha) / alpha)
}

/// Lifetime regime of a branching particle system.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum LifetimeRegime {
    /// Survival tail `t^{-γ} / Γ(1-γ)`, `0 < γ < 1`.
    HeavyTail { gamma: f64 },
    /// Finite mean lifetime `μ`.
    FiniteMean { mean: f64 },
}

/// Parameters fixing the limit covariance of occupation-time fluctuations.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BranchingLimitParams {
    pub alpha: f64,
    pub dimension: u32,
    pub regime: LifetimeRegime,
    /// `∫ φ`
    pub phi_mass: f64,
    /// `∫ ψ`
    pub psi_mass: f64,
}

/// Which limit shape the parameters select.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitShape {
    /// `Q_{γ-1, 2-d/α}`, with `d < α` or `d > α`.
    Weighted(KernelParams),
    /// `K` with exponent `γ`, when `d = α`.
    Logarithmic { gamma: f64 },
    /// Sub-fractional kernel with `h = 3 - d/α`.
    SubFractional(SubFbm),
}

impl BranchingLimitParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 2.0) {
            return Err(Error::param("alpha", self.alpha, "0 < alpha <= 2"));
        }
        if self.dimension == 0 {
            return Err(Error::param("d", 0.0, "d >= 1"));
        }
        let d = self.dimension as f64;
        let alpha = self.alpha;
        match self.regime {
            LifetimeRegime::HeavyTail { gamma } => {
                if !(gamma > 0.0 && gamma < 1.0) {
                    return Err(Error::param("gamma", gamma, "0 < gamma < 1"));
                }
                if !(alpha * gamma < d && d < alpha * (1.0 + gamma)) {
                    return Err(Error::Regime("heavy tail requires alpha*gamma < d < alpha*(1+gamma)"));
                }
            }
            LifetimeRegime::FiniteMean { mean } => {
                if !(mean > 0.0 && mean.is_finite()) {
                    return Err(Error::param("mu", mean, "0 < mu < inf"));
                }
                if !(alpha < d && d < 2.0 * alpha) {
                    return Err(Error::Regime("finite mean requires alpha < d < 2*alpha"));
                }
            }
        }
        Ok(())
    }

    pub fn shape(&self) -> Result<LimitShape> {
        self.validate()?;
        let ratio = self.dimension as f64 / self.alpha;
        match self.regime {
            LifetimeRegime::HeavyTail { gamma } => {
                if ratio == 1.0 {
                    Ok(LimitShape::Logarithmic { gamma })
                } else {
                    Ok(LimitShape::Weighted(KernelParams::new(gamma - 1.0, 2.0 - ratio)?))
                }
            }
            LifetimeRegime::FiniteMean { .. } => {
                Ok(LimitShape::SubFractional(SubFbm::new(3.0 - ratio)?))
            }
        }
    }

    /// Constant multiplying the limit shape.
    pub fn constant(&self) -> Result<f64> {
        let shape = self.shape()?;
        let d = self.dimension as f64;
        let masses = self.phi_mass * self.psi_mass;
        match (self.regime, shape) {
            (LifetimeRegime::HeavyTail { gamma: g }, shape) => {
                let base = g * masses * stable_mass_integral(self.alpha, self.dimension)?
                    / (gamma(g + 1.0) * pow(2.0 * PI, d));
                match shape {
                    LimitShape::Logarithmic { .. } => Ok(base),
                    _ => Ok(base / (2.0 - d / self.alpha)),
                }
            }
            (LifetimeRegime::FiniteMean { mean }, _) => {
                let h = 3.0 - d / self.alpha;
                Ok(gamma(2.0 - h) * masses
                    / (pow(2.0, d - 1.0)
                        * pow(PI, d / 2.0)
                        * mean
                        * self.alpha
                        * gamma(d / 2.0)
                        * h
                        * (h - 1.0)))
            }
        }
    }
}

/// Limit covariance of occupation-time fluctuations with heavy-tailed lifetimes.
pub fn limit_cov_heavy_tail(
    params: &BranchingLimitParams,
    s: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    if !matches!(params.regime, LifetimeRegime::HeavyTail { .. }) {
        return Err(Error::Regime("heavy-tail limit needs a heavy-tail regime"));
    }
    let c = params.constant()?;
    let shape = match params.shape()? {
        LimitShape::Weighted(p) => {
            if s == t {
                qab_diagonal(&p, s)?
            } else {
                eval_qab(&p, s, t, q)?
            }
        }
        LimitShape::Logarithmic { gamma } => eval_k_log(gamma, s, t, q)?,
        LimitShape::SubFractional(_) => unreachable!("heavy-tail shapes are weighted or logarithmic"),
    };
    Ok(c * shape)
}

/// Limit covariance of occupation-time fluctuations with finite-mean lifetimes.
pub fn limit_cov_finite_mean(params: &BranchingLimitParams, s: f64, t: f64) -> Result<f64> {
    if !matches!(params.regime, LifetimeRegime::FiniteMean { .. }) {
        return Err(Error::Regime("finite-mean limit needs a finite-mean regime"));
    }
    let c = params.constant()?;
    match params.shape()? {
        LimitShape::SubFractional(k) => Ok(c * k.eval(s, t)?),
        _ => unreachable!("finite-mean shape is sub-fractional"),
    }
}
