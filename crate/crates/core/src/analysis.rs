//! Checks of the structural properties of `Q_{a,b}`: where it is a covariance,
//! how its increments behave, and what its rescaled increments converge to.

use crate::error::{Error, Result};
use crate::gp::{build_gram, TimeGrid};
use crate::kernels::{eval_qab, qab_diagonal, KernelParams, Qab, Region};
use crate::quadrature::{integrate, QuadratureSpec};
use crate::special::{beta, pow_diff, second_difference};
use alloc::vec::Vec;
use libm::{pow, sqrt};

/// Relative slack a covariance-inequality violation must exceed.
pub const WITNESS_SLACK: f64 = 1e-8;

fn q_at(p: &KernelParams, w: f64, z: f64, q: &QuadratureSpec) -> Result<f64> {
    if w == z {
        qab_diagonal(p, w)
    } else {
        eval_qab(p, w, z, q)
    }
}

/// Outcome of checking one lattice point against its claimed region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Verdict {
    ConsistentPsd,
    ViolationFound,
    Unresolved,
}

impl Verdict {
    pub fn label(self) -> &'static str {
        match self {
            Verdict::ConsistentPsd => "ConsistentPSD",
            Verdict::ViolationFound => "ViolationFound",
            Verdict::Unresolved => "Unresolved",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegionScanResult {
    pub a: f64,
    pub b: f64,
    pub claimed_region: Region,
    pub min_eigenvalue: f64,
    pub max_diagonal: f64,
    pub grid_size: usize,
    pub verdict: Verdict,
    /// A time `t` with `|Q(1,t)| > sqrt(Q(1,1) Q(t,t))`, if one was found.
    pub witness: Option<f64>,
}

/// Times `start · ratio^k`, `k = 0..count`.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start * pow(ratio, k as f64)).collect()
}

/// Default witness search toward zero: `10^{-2} · 2^{-k}`.
pub fn small_time_search() -> Vec<f64> {
    geometric_grid(1e-2, 0.5, 40)
}

/// Default witness search toward infinity: `2^k`.
pub fn large_time_search() -> Vec<f64> {
    geometric_grid(2.0, 2.0, 60)
}

/// First `t` in `search` where `|Q(1,t)|` exceeds `sqrt(Q(1,1) Q(t,t))` by more than
/// the relative slack [`WITNESS_SLACK`].
pub fn covariance_inequality_witness(
    params: &KernelParams,
    search: &[f64],
    q: &QuadratureSpec,
) -> Result<Option<f64>> {
    let one = qab_diagonal(params, 1.0)?;
    for &t in search {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::param("t", t, "0 < t < inf"));
        }
        let cross = eval_qab(params, 1.0, t, q)?;
        let bound = sqrt(one * qab_diagonal(params, t)?);
        if cross.abs() > bound * (1.0 + WITNESS_SLACK) {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Gram matrix spectrum plus region-specific witness searches for one `(a, b)`.
pub fn scan_point(
    a: f64,
    b: f64,
    grid: &TimeGrid,
    tol: f64,
    q: &QuadratureSpec,
) -> Result<RegionScanResult> {
    if grid.len() < 8 || grid.times()[0] <= 0.0 {
        return Err(Error::Grid("scan grid needs at least 8 strictly positive times"));
    }
    let kernel = Qab {
        params: KernelParams::new(a, b)?,
        quadrature: *q,
    };
    let region = kernel.params.region();
    let gram = build_gram(&kernel, grid)?;
    let min_eigenvalue = gram.min_eigenvalue();
    let max_diagonal = gram.max_diagonal();
    let negative = min_eigenvalue < -tol * max_diagonal;
    let witness = match region {
        Region::PdBounded | Region::PdNegative => None,
        Region::NotPdNegative => covariance_inequality_witness(&kernel.params, &small_time_search(), q)?,
        Region::NotPdSteep | Region::Unresolved => {
            covariance_inequality_witness(&kernel.params, &large_time_search(), q)?
        }
    };
    let verdict = match region {
        Region::Unresolved => Verdict::Unresolved,
        _ if negative || witness.is_some() => Verdict::ViolationFound,
        _ => Verdict::ConsistentPsd,
    };
    Ok(RegionScanResult {
        a,
        b,
        claimed_region: region,
        min_eigenvalue,
        max_diagonal,
        grid_size: grid.len(),
        verdict,
        witness,
    })
}

/// [`scan_point`] over the lattice `a_values × b_values`, in row-major order.
pub fn pd_scan(
    a_values: &[f64],
    b_values: &[f64],
    grid: &TimeGrid,
    tol: f64,
    q: &QuadratureSpec,
) -> Result<Vec<RegionScanResult>> {
    let mut out = Vec::with_capacity(a_values.len() * b_values.len());
    for &a in a_values {
        for &b in b_values {
            out.push(scan_point(a, b, grid, tol, q)?);
        }
    }
    Ok(out)
}

/// Default scan lattice for `a`.
pub const DEFAULT_A: [f64; 6] = [-0.9, -0.5, 0.0, 0.5, 1.0, 2.0];
/// Default scan lattice for `b`.
pub const DEFAULT_B: [f64; 9] = [-0.9, -0.5, -0.1, 0.0, 0.5, 1.5, 2.0, 2.5, 4.0];

/// The 8-point scan grid `{0.25, 0.5, ..., 2}`.
pub fn default_scan_grid() -> TimeGrid {
    TimeGrid::uniform(2.0, 8).expect("static grid")
}

/// A statistic tracked over increasing time scales against its limit.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LimitCheckReport {
    pub name: &'static str,
    pub a: f64,
    pub b: f64,
    pub horizons: Vec<f64>,
    pub statistics: Vec<f64>,
    pub target: f64,
    pub abs_errors: Vec<f64>,
    /// Errors relative to `|target|`, or absolute when the target is 0.
    pub errors: Vec<f64>,
    pub tolerance: f64,
    /// Errors decrease strictly along the horizons and the last is within tolerance.
    pub converged: bool,
}

impl LimitCheckReport {
    fn new(name: &'static str, p: &KernelParams, horizons: &[f64], statistics: Vec<f64>, target: f64, tolerance: f64) -> Self {
        let abs_errors: Vec<f64> = statistics.iter().map(|s| (s - target).abs()).collect();
        let errors: Vec<f64> = abs_errors
            .iter()
            .map(|e| if target != 0.0 { e / target.abs() } else { *e })
            .collect();
        let monotone = errors.windows(2).all(|w| w[1] < w[0]);
        let last_ok = errors.last().is_some_and(|e| *e <= tolerance);
        LimitCheckReport {
            name,
            a: p.a(),
            b: p.b(),
            horizons: horizons.to_vec(),
            statistics,
            target,
            abs_errors,
            errors,
            tolerance,
            converged: monotone && last_ok,
        }
    }

    pub fn final_error(&self) -> f64 {
        self.errors.last().copied().unwrap_or(f64::NAN)
    }
}

fn check_horizons(horizons: &[f64]) -> Result<()> {
    if horizons.is_empty() {
        return Err(Error::param("T_list", 0.0, "at least one horizon"));
    }
    if horizons.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::param("T", f64::NAN, "0 < T < inf"));
    }
    Ok(())
}

/// `Q(1,T) / T^{b-1}` against `b/(b-1) · (1/(a+1) - 1/(a+2))`, for `b > 2`.
pub fn growth_exponent_check(
    params: &KernelParams,
    horizons: &[f64],
    tolerance: f64,
    q: &QuadratureSpec,
) -> Result<LimitCheckReport> {
    let (a, b) = (params.a(), params.b());
    if !(b > 2.0) {
        return Err(Error::param("b", b, "b > 2"));
    }
    check_horizons(horizons)?;
    let target = b / (b - 1.0) * (1.0 / (a + 1.0) - 1.0 / (a + 2.0));
    let stats = horizons
        .iter()
        .map(|&t| Ok(eval_qab(params, 1.0, t, q)? / pow(t, b - 1.0)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitCheckReport::new("growth", params, horizons, stats, target, tolerance))
}

fn check_ordering(r: f64, v: f64, s: f64, t: f64) -> Result<()> {
    if !(r.is_finite() && t.is_finite()) {
        return Err(Error::Ordering("times must be finite"));
    }
    if !(0.0 <= r && r <= v && v <= s && s <= t) {
        return Err(Error::Ordering("requires 0 <= r <= v <= s <= t"));
    }
    Ok(())
}

/// `Q(t,v) - Q(t,r) - Q(s,v) + Q(s,r)` from four kernel evaluations.
pub fn increment_cross_cov_four_point(
    params: &KernelParams,
    r: f64,
    v: f64,
    s: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    check_ordering(r, v, s, t)?;
    Ok(q_at(params, t, v, q)? - q_at(params, t, r, q)? - q_at(params, s, v, q)? + q_at(params, s, r, q)?)
}

/// The same covariance as three integrals of first differences,
///
/// ```text
/// (1-b) Cov = ∫_r^v u^a [(t-u)^b - (s-u)^b] du
///           + ∫_0^r u^a [(t+r-2u)^b - (s+r-2u)^b] du
///           - ∫_0^v u^a [(t+v-2u)^b - (s+v-2u)^b] du,
/// ```
///
/// which stays accurate when `s, t` are far from `r, v`.
pub fn increment_cross_cov_integral(
    params: &KernelParams,
    r: f64,
    v: f64,
    s: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    check_ordering(r, v, s, t)?;
    let (a, b) = (params.a(), params.b());
    if r == v || s == t {
        return Ok(0.0);
    }
    let h = t - s;
    let first = integrate(
        |n| {
            let u = if r == 0.0 { n.from_lo } else { n.x };
            pow(u, a) * pow_diff((s - v) + n.to_hi, h, b)
        },
        r,
        v,
        q,
    )?;
    let shifted = |c: f64| {
        integrate(
            |n| pow(n.from_lo, a) * pow_diff((s - c) + 2.0 * n.to_hi, h, b),
            0.0,
            c,
            q,
        )
    };
    Ok((first + shifted(r)? - shifted(v)?) / (1.0 - b))
}

/// Covariance of the increments over `[r, v]` and `[s, t]`, computed both ways; the
/// routes must agree to `1e-8 · max(1, |value|)`.
pub fn increment_cross_cov(
    params: &KernelParams,
    r: f64,
    v: f64,
    s: f64,
    t: f64,
    q: &QuadratureSpec,
) -> Result<f64> {
    let four = increment_cross_cov_four_point(params, r, v, s, t, q)?;
    let three = increment_cross_cov_integral(params, r, v, s, t, q)?;
    if (four - three).abs() > 1e-8 * four.abs().max(1.0) {
        return Err(Error::RouteMismatch {
            first: four,
            second: three,
        });
    }
    Ok(three)
}

fn check_lrd_params(params: &KernelParams) -> Result<()> {
    let (a, b) = (params.a(), params.b());
    let ok = (b > 0.0 && b < 2.0) || (b <= 0.0 && a + b + 1.0 >= 0.0);
    if ok {
        Ok(())
    } else {
        Err(Error::param("b", b, "b in (0,1) or (1,2), or -1 < b <= 0 with a+b+1 >= 0"))
    }
}

/// `b/((a+1)(a+2)) · (t-s) · (v^{a+2} - r^{a+2})`.
pub fn lrd_limit(params: &KernelParams, r: f64, v: f64, s: f64, t: f64) -> f64 {
    let (a, b) = (params.a(), params.b());
    b / ((a + 1.0) * (a + 2.0)) * (t - s) * (pow(v, a + 2.0) - pow(r, a + 2.0))
}

/// `T^{2-b} Cov(ζ(v)-ζ(r), ζ(t+T)-ζ(s+T))` against its long-range limit.
#[allow(clippy::too_many_arguments)]
pub fn lrd_check(
    params: &KernelParams,
    r: f64,
    v: f64,
    s: f64,
    t: f64,
    horizons: &[f64],
    tolerance: f64,
    q: &QuadratureSpec,
) -> Result<LimitCheckReport> {
    check_lrd_params(params)?;
    check_ordering(r, v, s, t)?;
    check_horizons(horizons)?;
    let b = params.b();
    let stats = horizons
        .iter()
        .map(|&big| Ok(pow(big, 2.0 - b) * increment_cross_cov_integral(params, r, v, s + big, t + big, q)?))
        .collect::<Result<Vec<_>>>()?;
    let target = lrd_limit(params, r, v, s, t);
    Ok(LimitCheckReport::new("lrd", params, horizons, stats, target, tolerance))
}

/// `T^{1-b} Cov(ζ(v)-ζ(r), ζ(t+T)-ζ(s+T))`, which tends to 0.
pub fn lrd_first_order_check(
    params: &KernelParams,
    r: f64,
    v: f64,
    s: f64,
    t: f64,
    horizons: &[f64],
    q: &QuadratureSpec,
) -> Result<LimitCheckReport> {
    check_lrd_params(params)?;
    check_ordering(r, v, s, t)?;
    check_horizons(horizons)?;
    let b = params.b();
    let stats = horizons
        .iter()
        .map(|&big| Ok(pow(big, 1.0 - b) * increment_cross_cov_integral(params, r, v, s + big, t + big, q)?))
        .collect::<Result<Vec<_>>>()?;
    let last = stats.last().copied().unwrap_or(0.0).abs();
    Ok(LimitCheckReport::new("lrd-first-order", params, horizons, stats, 0.0, last.max(f64::MIN_POSITIVE)))
}

/// Both sides of the Gaussian Markov identity `Q(s,t) Q(r,r) = Q(s,r) Q(r,t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MarkovGap {
    /// `Q(s,t)`
    pub lhs: f64,
    /// `Q(s,r) Q(r,t) / Q(r,r)`
    pub rhs: f64,
    pub gap: f64,
    /// Quadrature-level tolerance on the gap.
    pub tolerance: f64,
}

impl MarkovGap {
    pub fn is_zero(&self) -> bool {
        self.gap <= self.tolerance
    }
}

/// Markov triplet test for `0 < s <= r <= t`.
pub fn markov_test(params: &KernelParams, s: f64, r: f64, t: f64, q: &QuadratureSpec) -> Result<MarkovGap> {
    if !(0.0 < s && s <= r && r <= t && t.is_finite()) {
        return Err(Error::Ordering("requires 0 < s <= r <= t"));
    }
    let rr = qab_diagonal(params, r)?;
    if rr == 0.0 {
        return Err(Error::Degenerate("Q(r,r) = 0"));
    }
    let lhs = q_at(params, s, t, q)?;
    let rhs = q_at(params, s, r, q)? * q_at(params, r, t, q)? / rr;
    Ok(MarkovGap {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        tolerance: 100.0 * q.relative_tolerance * lhs.abs().max(rhs.abs()),
    })
}

/// Which rescaled-increment limit applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum IncrementLimitCase {
    /// `b ∈ (1, 2]`: scale `T^{-(a+b-1)}`, Brownian-like limit.
    Smooth,
    /// `b ∈ (-1, 1)`, `a + b + 1 > 0`: scale `T^{-a}`, fractional limit.
    Rough,
}

pub fn increment_limit_case(params: &KernelParams) -> Result<IncrementLimitCase> {
    let (a, b) = (params.a(), params.b());
    if b > 1.0 && b <= 2.0 {
        Ok(IncrementLimitCase::Smooth)
    } else if b < 1.0 && a + b + 1.0 > 0.0 {
        Ok(IncrementLimitCase::Rough)
    } else {
        Err(Error::param("b", b, "b in (1,2], or b in (-1,1) with a+b+1 > 0"))
    }
}

/// `Cov(ζ(s+T) - ζ(T), ζ(t+T) - ζ(T))` for `0 <= s <= t`, written as
///
/// ```text
/// (1-b) Cov = ∫_0^s (T+v)^a [(s-v)^b + (t-v)^b - (s+t-2v)^b] dv
///           - ∫_0^T u^a Δ_s Δ_t y^b |_{y = 2(T-u)} du
/// ```
///
/// so that nothing of size `T^{a+b+1}` cancels.
pub fn shifted_increment_cov(params: &KernelParams, big: f64, s: f64, t: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(big >= 0.0 && big.is_finite()) {
        return Err(Error::param("T", big, "0 <= T < inf"));
    }
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if !(s >= 0.0 && t.is_finite()) {
        return Err(Error::Ordering("requires finite 0 <= s <= t"));
    }
    if s == 0.0 {
        return Ok(0.0);
    }
    let (a, b) = (params.a(), params.b());
    let gap = t - s;
    let near = integrate(
        |n| {
            let x = n.to_hi;
            let shift = if big == 0.0 { n.from_lo } else { big + n.from_lo };
            pow(shift, a) * (pow(x, b) - pow_diff(gap + x, x, b))
        },
        0.0,
        s,
        q,
    )?;
    let far = if big == 0.0 {
        0.0
    } else {
        integrate(
            |n| pow(n.from_lo, a) * second_difference(2.0 * n.to_hi, s, t, b),
            0.0,
            big,
            q,
        )?
    };
    Ok((near - far) / (1.0 - b))
}

/// Limit of the rescaled increment covariance.
pub fn increment_limit(params: &KernelParams, s: f64, t: f64) -> Result<f64> {
    let (a, b) = (params.a(), params.b());
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    Ok(match increment_limit_case(params)? {
        IncrementLimitCase::Smooth => pow(2.0, b - 2.0) * b * beta(a + 1.0, b - 1.0) * s * t,
        IncrementLimitCase::Rough => {
            let e = b + 1.0;
            (pow(s, e) + pow(t, e) - pow(t - s, e)) / (2.0 * (b + 1.0) * (1.0 - b))
        }
    })
}

/// Scaled increment covariance over `T` against [`increment_limit`].
pub fn rescaled_limit_check(
    params: &KernelParams,
    s: f64,
    t: f64,
    horizons: &[f64],
    tolerance: f64,
    q: &QuadratureSpec,
) -> Result<LimitCheckReport> {
    let case = increment_limit_case(params)?;
    check_horizons(horizons)?;
    let (a, b) = (params.a(), params.b());
    let exponent = match case {
        IncrementLimitCase::Smooth => a + b - 1.0,
        IncrementLimitCase::Rough => a,
    };
    let stats = horizons
        .iter()
        .map(|&big| Ok(shifted_increment_cov(params, big, s, t, q)? / pow(big, exponent)))
        .collect::<Result<Vec<_>>>()?;
    let target = increment_limit(params, s, t)?;
    Ok(LimitCheckReport::new("rescaled-increments", params, horizons, stats, target, tolerance))
}

/// `E(ζ(t) - ζ(s))^2` for `s <= t`, as
///
/// ```text
/// (1-b) E(ζ(t)-ζ(s))^2 = (2-2^b) ∫_s^t u^a (t-u)^b du
///                        - 2^b ∫_0^s u^a Δ_{h/2}^2 x^b |_{x = s-u} du,   h = t - s,
/// ```
///
/// which keeps full relative accuracy as `h → 0`.
pub fn increment_variance(params: &KernelParams, s: f64, t: f64, q: &QuadratureSpec) -> Result<f64> {
    let (s, t) = if s <= t { (s, t) } else { (t, s) };
    if !(s >= 0.0 && t.is_finite()) {
        return Err(Error::Ordering("requires finite 0 <= s <= t"));
    }
    if s == t {
        return Ok(0.0);
    }
    let (a, b) = (params.a(), params.b());
    let h = t - s;
    let head = integrate(
        |n| {
            let u = if s == 0.0 { n.from_lo } else { n.x };
            pow(u, a) * pow(n.to_hi, b)
        },
        s,
        t,
        q,
    )?;
    let tail = if s == 0.0 {
        0.0
    } else {
        integrate(
            |n| pow(n.from_lo, a) * second_difference(n.to_hi, 0.5 * h, 0.5 * h, b),
            0.0,
            s,
            q,
        )?
    };
    Ok(((2.0 - pow(2.0, b)) * head - pow(2.0, b) * tail) / (1.0 - b))
}

/// Margin applied to the coarse-grid ratio when fitting `κ`.
pub const KAPPA_MARGIN: f64 = 2.0;

/// Hölder-type bound `E(ζ(t)-ζ(s))^2 <= κ |t-s|^e`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct IncrementBound {
    pub exponent: f64,
    /// Largest ratio over pairs of the fitting grid.
    pub coarse_max_ratio: f64,
    /// `KAPPA_MARGIN` times the coarse ratio.
    pub kappa: f64,
    /// Largest ratio over the refined pairs.
    pub refined_max_ratio: f64,
    pub refined_pairs: usize,
    pub holds: bool,
}

/// Fits `κ` on all pairs of `grid` with `0 < |t-s| <= 1`, then checks the bound on
/// pairs `(s, s + 2^{-k})`, `k = 1..=20`, for `s` in `{0} ∪ grid` with `s + 2^{-k}`
/// inside the grid's span.
pub fn increment_bound_check(
    params: &KernelParams,
    grid: &TimeGrid,
    exponent: f64,
    q: &QuadratureSpec,
) -> Result<IncrementBound> {
    let ts = grid.times();
    let end = ts[ts.len() - 1];
    let mut coarse: f64 = 0.0;
    for (i, &s) in ts.iter().enumerate() {
        for &t in &ts[i + 1..] {
            if t - s <= 1.0 {
                coarse = coarse.max(increment_variance(params, s, t, q)? / pow(t - s, exponent));
            }
        }
    }
    let kappa = KAPPA_MARGIN * coarse;
    let mut refined_max_ratio: f64 = 0.0;
    let mut refined_pairs = 0;
    for &s in core::iter::once(&0.0).chain(ts) {
        for k in 1..=20 {
            let h = pow(2.0, -(k as f64));
            if s + h > end {
                continue;
            }
            let ratio = increment_variance(params, s, s + h, q)? / pow(h, exponent);
            refined_max_ratio = refined_max_ratio.max(ratio);
            refined_pairs += 1;
        }
    }
    Ok(IncrementBound {
        exponent,
        coarse_max_ratio: coarse,
        kappa,
        refined_max_ratio,
        refined_pairs,
        holds: refined_max_ratio <= kappa,
    })
}

/// `|Q(cs, ct) - c^{a+b+1} Q(s, t)|` relative to `max(1, |Q(cs, ct)|)`.
pub fn self_similarity_gap(params: &KernelParams, s: f64, t: f64, c: f64, q: &QuadratureSpec) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("c", c, "0 < c < inf"));
    }
    let scaled = eval_qab(params, c * s, c * t, q)?;
    let base = eval_qab(params, s, t, q)?;
    let predicted = pow(c, params.scaling_exponent()) * base;
    Ok((scaled - predicted).abs() / scaled.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    fn p(a: f64, b: f64) -> KernelParams {
        KernelParams::new(a, b).unwrap()
    }

    #[test]
    fn scan_examples() {
        let g = default_scan_grid();
        let r = scan_point(0.5, 1.5, &g, 1e-8, &q()).unwrap();
        assert_eq!(r.verdict, Verdict::ConsistentPsd);
        let r = scan_point(0.5, -0.5, &g, 1e-8, &q()).unwrap();
        assert_eq!(r.verdict, Verdict::ConsistentPsd);
        let r = scan_point(-0.5, -0.7, &g, 1e-8, &q()).unwrap();
        assert_eq!(r.verdict, Verdict::ViolationFound);
        assert!(r.witness.unwrap() <= 1e-2);
    }

    #[test]
    fn witness_examples() {
        assert!(covariance_inequality_witness(&p(0.0, -0.5), &small_time_search(), &q())
            .unwrap()
            .is_none());
        assert!(covariance_inequality_witness(&p(-0.5, -0.7), &[1.0], &q())
            .unwrap()
            .is_none());
    }

    #[test]
    fn growth_example() {
        let r = growth_exponent_check(&p(0.0, 4.0), &[10.0, 100.0, 1000.0], 0.02, &q()).unwrap();
        assert!((r.target - 2.0 / 3.0).abs() < 1e-15);
        assert!(r.converged, "{r:?}");
        assert!(growth_exponent_check(&p(0.0, 0.5), &[10.0], 0.02, &q()).is_err());
    }

    #[test]
    fn degenerate_increments() {
        let k = p(0.0, 0.5);
        assert_eq!(increment_cross_cov(&k, 1.0, 1.0, 2.0, 3.0, &q()).unwrap(), 0.0);
        assert_eq!(increment_cross_cov(&k, 0.0, 1.0, 2.0, 2.0, &q()).unwrap(), 0.0);
        assert!(increment_cross_cov(&k, 1.0, 0.5, 2.0, 3.0, &q()).is_err());
        let v = increment_cross_cov(&k, 0.0, 1.0, 1.0, 2.0, &q()).unwrap();
        let four = increment_cross_cov_four_point(&k, 0.0, 1.0, 1.0, 2.0, &q()).unwrap();
        assert!((v - four).abs() < 1e-8);
        assert_eq!(lrd_limit(&k, 0.0, 1.0, 2.0, 2.0), 0.0);
        assert_eq!(lrd_limit(&k, 1.0, 1.0, 2.0, 3.0), 0.0);
    }

    #[test]
    fn markov_examples() {
        let m = markov_test(&p(0.0, 0.0), 1.0, 2.0, 3.0, &q()).unwrap();
        assert!(m.is_zero(), "{m:?}");
        let m = markov_test(&p(1.0, 0.0), 0.5, 1.5, 4.0, &q()).unwrap();
        assert!(m.is_zero(), "{m:?}");
        let m = markov_test(&p(0.0, 0.5), 1.0, 2.0, 3.0, &q()).unwrap();
        assert!(m.gap > 10.0 * m.tolerance, "{m:?}");
    }

    #[test]
    fn shifted_increment_routes_agree() {
        for &(a, b) in &[(0.0, 1.5), (0.5, 0.5), (0.5, -0.25), (-0.5, 1.8)] {
            let k = p(a, b);
            let big = 3.0;
            let (s, t) = (0.7, 1.9);
            let stable = shifted_increment_cov(&k, big, s, t, &q()).unwrap();
            let direct = q_at(&k, s + big, t + big, &q()).unwrap()
                - q_at(&k, s + big, big, &q()).unwrap()
                - q_at(&k, big, t + big, &q()).unwrap()
                + qab_diagonal(&k, big).unwrap();
            assert!((stable - direct).abs() < 1e-8 * direct.abs().max(1.0), "a={a} b={b}");
        }
    }

    #[test]
    fn increment_variance_matches_definition() {
        for &(a, b) in &[(0.0, 0.5), (-0.5, 1.5), (0.5, -0.25)] {
            let k = p(a, b);
            let (s, t) = (0.8, 1.7);
            let v = increment_variance(&k, s, t, &q()).unwrap();
            let direct = qab_diagonal(&k, s).unwrap() + qab_diagonal(&k, t).unwrap()
                - 2.0 * eval_qab(&k, s, t, &q()).unwrap();
            assert!((v - direct).abs() < 1e-9, "a={a} b={b}");
            assert!((increment_variance(&k, 0.0, t, &q()).unwrap() - qab_diagonal(&k, t).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn limits_vanish_at_zero() {
        assert_eq!(increment_limit(&p(0.0, 1.5), 0.0, 1.0).unwrap(), 0.0);
        assert_eq!(increment_limit(&p(0.5, 0.5), 0.0, 1.0).unwrap(), 0.0);
        assert!((increment_limit(&p(0.0, 1.5), 1.0, 1.0).unwrap() - 1.5 * libm::sqrt(2.0)).abs() < 1e-12);
        assert!((increment_limit(&p(0.5, 0.5), 1.0, 1.0).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!(increment_limit_case(&p(-0.9, -0.5)).is_err());
    }
}
