//! Tanh-sinh quadrature on finite intervals with adaptive bisection fallback.
//!
//! The integrand receives each abscissa together with its exact distances to
//! both ends of the original interval, so factors such as `(m - s)^b` can be
//! formed without the cancellation of `m - x` near `m`.

use crate::error::{Error, Result};
use core::f64::consts::FRAC_PI_2;
use libm::{cosh, exp, sinh};

/// Accuracy controls for every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_floor: f64,
    pub max_refinement_levels: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            relative_tolerance: 1e-10,
            absolute_floor: 1e-300,
            max_refinement_levels: 12,
        }
    }
}

impl QuadratureSpec {
    pub fn with_relative_tolerance(mut self, tol: f64) -> Self {
        self.relative_tolerance = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0 && self.relative_tolerance < 1.0) {
            return Err(Error::param(
                "relative_tolerance",
                self.relative_tolerance,
                "0 < tol < 1",
            ));
        }
        if !(self.absolute_floor >= 0.0) {
            return Err(Error::param(
                "absolute_floor",
                self.absolute_floor,
                "floor >= 0",
            ));
        }
        if self.max_refinement_levels < 3 || self.max_refinement_levels > 20 {
            return Err(Error::param(
                "max_refinement_levels",
                self.max_refinement_levels as f64,
                "3 <= levels <= 20",
            ));
        }
        Ok(())
    }
}

/// An abscissa with its distances to the interval ends.
#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub x: f64,
    pub from_lo: f64,
    pub to_hi: f64,
}

const MIN_LEVEL: u32 = 3;
const MAX_SPLIT_DEPTH: u32 = 8;
// Nodes closer than this to an end are dropped; e^{-2u} underflows shortly after.
const TINY_DISTANCE: f64 = 1e-300;

struct Estimate {
    value: f64,
    error: f64,
    converged: bool,
}

/// Integrates `f` over `[lo, hi]`.
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(Node) -> f64,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Ordering("integration limits must be finite"));
    }
    if hi < lo {
        return Err(Error::Ordering("integration requires lo <= hi"));
    }
    if hi == lo {
        return Ok(0.0);
    }
    let est = adaptive(&mut f, lo, hi, 0.0, 0.0, spec, 0);
    let target = (spec.relative_tolerance * est.value.abs()).max(spec.absolute_floor);
    if est.value.is_finite() && est.error <= target {
        Ok(est.value)
    } else {
        Err(Error::ToleranceNotMet {
            estimate: est.value,
            error_estimate: est.error,
            tolerance: spec.relative_tolerance,
        })
    }
}

fn adaptive(
    f: &mut dyn FnMut(Node) -> f64,
    lo: f64,
    hi: f64,
    lo_offset: f64,
    hi_offset: f64,
    spec: &QuadratureSpec,
    depth: u32,
) -> Estimate {
    let est = tanh_sinh(f, lo, hi, lo_offset, hi_offset, spec);
    if est.converged || depth >= MAX_SPLIT_DEPTH || !est.value.is_finite() {
        return est;
    }
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let left = adaptive(f, lo, mid, lo_offset, hi_offset + half, spec, depth + 1);
    let right = adaptive(f, mid, hi, lo_offset + half, hi_offset, spec, depth + 1);
    let value = left.value + right.value;
    let error = left.error + right.error;
    Estimate {
        value,
        error,
        converged: left.converged && right.converged,
    }
}

fn tanh_sinh(
    f: &mut dyn FnMut(Node) -> f64,
    lo: f64,
    hi: f64,
    lo_offset: f64,
    hi_offset: f64,
    spec: &QuadratureSpec,
) -> Estimate {
    let half = 0.5 * (hi - lo);
    // Evaluates the symmetric pair of nodes at +t and -t (one node when t == 0).
    let mut pair = |t: f64| -> Option<(f64, f64, f64)> {
        let u = FRAC_PI_2 * sinh(t);
        let q = exp(-2.0 * u);
        let near = half * 2.0 * q / (1.0 + q);
        if near < TINY_DISTANCE {
            return None;
        }
        let weight = FRAC_PI_2 * cosh(t) * 4.0 * q / ((1.0 + q) * (1.0 + q)) * half;
        let far = 2.0 * half - near;
        let right = f(Node {
            x: hi - near,
            from_lo: lo_offset + far,
            to_hi: hi_offset + near,
        });
        if t == 0.0 {
            return Some((weight * right, right.abs() * near, near));
        }
        let left = f(Node {
            x: lo + near,
            from_lo: lo_offset + near,
            to_hi: hi_offset + far,
        });
        let tail = (right.abs() + left.abs()) * near;
        Some((weight * (right + left), tail, near))
    };

    let mut h = 1.0;
    let mut sum = 0.0;
    // Tail mass proxy taken at the outermost node evaluated so far.
    let mut tail = 0.0;
    let mut outermost = f64::INFINITY;
    let mut k = 0u32;
    while let Some((v, tl, near)) = pair(k as f64) {
        sum += v;
        tail = tl;
        outermost = near;
        k += 1;
    }
    let mut value = h * sum;
    let mut error = f64::INFINITY;
    for level in 1..=spec.max_refinement_levels {
        h *= 0.5;
        let mut fresh = 0.0;
        let mut k = 1u32;
        loop {
            let t = k as f64 * h;
            match pair(t) {
                Some((v, tl, near)) => {
                    fresh += v;
                    if near < outermost {
                        outermost = near;
                        tail = tl;
                    }
                }
                None => break,
            }
            k += 2;
        }
        sum += fresh;
        let next = h * sum;
        error = (next - value).abs();
        value = next;
        if level >= MIN_LEVEL {
            // The mass beyond the outermost nodes is bounded by |f| times the distance
            // for integrable power singularities; it must not dominate the tolerance.
            let total = error + tail;
            let target = (spec.relative_tolerance * value.abs()).max(spec.absolute_floor);
            if total <= target {
                return Estimate {
                    value,
                    error: total,
                    converged: true,
                };
            }
        }
    }
    Estimate {
        value,
        error: error + tail,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use libm::{log, pow, sqrt};

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn polynomial() {
        let v = integrate(|n| n.x * n.x, 0.0, 3.0, &spec()).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_power_singularities() {
        // Beta(0.1, 0.2) through x^{-0.9} (1-x)^{-0.8}
        let v = integrate(
            |n| pow(n.from_lo, -0.9) * pow(n.to_hi, -0.8),
            0.0,
            1.0,
            &spec(),
        )
        .unwrap();
        let exact = crate::special::beta(0.1, 0.2);
        assert!((v / exact - 1.0).abs() < 1e-10, "{v} vs {exact}");
    }

    #[test]
    fn log_singularity() {
        let v = integrate(|n| log(n.from_lo), 0.0, 1.0, &spec()).unwrap();
        assert!((v + 1.0).abs() < 1e-12);
    }

    #[test]
    fn interior_kink_uses_fallback() {
        let v = integrate(|n| (n.x - 0.3).abs(), 0.0, 1.0, &spec()).unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-10);
    }

    #[test]
    fn offsets_are_consistent_after_splitting() {
        let v = integrate(
            |n| {
                assert!((n.from_lo + n.to_hi - 2.0).abs() < 1e-12);
                sqrt(n.to_hi) + (n.x - 1.2).abs()
            },
            0.0,
            2.0,
            &spec(),
        )
        .unwrap();
        let exact = 2.0 / 3.0 * pow(2.0, 1.5) + 0.5 * 1.44 + 0.5 * 0.64;
        assert!((v - exact).abs() < 1e-9);
    }

    #[test]
    fn hopeless_singularity_reports_error() {
        // x^{-0.999}: almost all mass sits below the smallest representable node.
        let r = integrate(|n| pow(n.from_lo, -0.999), 0.0, 1.0, &spec());
        assert!(matches!(r, Err(Error::ToleranceNotMet { .. })));
    }

    #[test]
    fn reversed_limits_rejected() {
        assert!(integrate(|n| n.x, 1.0, 0.0, &spec()).is_err());
        assert_eq!(integrate(|n| n.x, 1.0, 1.0, &spec()).unwrap(), 0.0);
    }
}
