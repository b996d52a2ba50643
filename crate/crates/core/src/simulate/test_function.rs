//! Test functions φ paired against the particle configuration.

use crate::error::{Error, Result};
use core::f64::consts::PI;
use libm::{cos, exp, pow, sin, sqrt};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// A point of R^d stored in a fixed array; coordinates past `d` are ignored.
pub type Point = [f64; MAX_DIM];

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum TestFunction {
    /// `amplitude * exp(-|x - center|^2 / (2 width^2))`
    GaussianBump {
        center: Point,
        width: f64,
        amplitude: f64,
    },
    /// Indicator of the box `[lower, upper)`.
    IndicatorBox { lower: Point, upper: Point },
}

impl TestFunction {
    /// Unit-amplitude bump of the given width at the origin.
    pub fn centered_bump(width: f64) -> Self {
        TestFunction::GaussianBump {
            center: [0.0; MAX_DIM],
            width,
            amplitude: 1.0,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        match *self {
            TestFunction::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                if !(width > 0.0 && width.is_finite()) {
                    return Err(Error::param("width", width, "0 < width < inf"));
                }
                if !(amplitude >= 0.0 && amplitude.is_finite()) {
                    return Err(Error::param("amplitude", amplitude, "0 <= amplitude < inf"));
                }
                if center[..d].iter().any(|c| !c.is_finite()) {
                    return Err(Error::Unsupported("bump center must be finite"));
                }
            }
            TestFunction::IndicatorBox { lower, upper } => {
                for k in 0..d {
                    if !(lower[k].is_finite() && upper[k].is_finite() && lower[k] < upper[k]) {
                        return Err(Error::Unsupported("box needs finite lower < upper"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Value at `x`, reading displacements through `wrap` (identity or minimum image).
    fn value_with(&self, x: &Point, d: usize, wrap: impl Fn(f64) -> f64) -> f64 {
        match *self {
            TestFunction::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let mut r2 = 0.0;
                for k in 0..d {
                    let dx = wrap(x[k] - center[k]);
                    r2 += dx * dx;
                }
                amplitude * exp(-0.5 * r2 / (width * width))
            }
            TestFunction::IndicatorBox { lower, upper } => {
                let inside = (0..d).all(|k| x[k] >= lower[k] && x[k] < upper[k]);
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Value on R^d.
    pub fn value(&self, x: &Point, d: usize) -> f64 {
        self.value_with(x, d, |v| v)
    }

    /// Value on the torus `[-half, half)^d`, assuming `x` is already wrapped.
    pub fn value_periodic(&self, x: &Point, d: usize, half: f64) -> f64 {
        self.value_with(x, d, |v| wrap_coordinate(v, half))
    }

    /// `∫ φ`.
    pub fn mass(&self, d: usize) -> f64 {
        match *self {
            TestFunction::GaussianBump {
                width, amplitude, ..
            } => amplitude * pow(2.0 * PI * width * width, d as f64 / 2.0),
            TestFunction::IndicatorBox { lower, upper } => {
                (0..d).map(|k| upper[k] - lower[k]).product()
            }
        }
    }

    /// `∫ φ²`.
    pub fn square_mass(&self, d: usize) -> f64 {
        match *self {
            TestFunction::GaussianBump {
                width, amplitude, ..
            } => amplitude * amplitude * pow(PI * width * width, d as f64 / 2.0),
            TestFunction::IndicatorBox { .. } => self.mass(d),
        }
    }

    /// Fourier transform `∫ e^{i<y,x>} φ(x) dx` as `(re, im)`.
    pub fn fourier(&self, y: &Point, d: usize) -> (f64, f64) {
        match *self {
            TestFunction::GaussianBump {
                center,
                width,
                amplitude,
            } => {
                let y2: f64 = (0..d).map(|k| y[k] * y[k]).sum();
                let phase: f64 = (0..d).map(|k| y[k] * center[k]).sum();
                let m = amplitude * pow(2.0 * PI * width * width, d as f64 / 2.0)
                    * exp(-0.5 * width * width * y2);
                (m * cos(phase), m * sin(phase))
            }
            TestFunction::IndicatorBox { lower, upper } => {
                let (mut re, mut im) = (1.0, 0.0);
                for k in 0..d {
                    // ∫_l^u e^{i y x} dx
                    let (fr, fi) = if y[k] == 0.0 {
                        (upper[k] - lower[k], 0.0)
                    } else {
                        (
                            (sin(y[k] * upper[k]) - sin(y[k] * lower[k])) / y[k],
                            (cos(y[k] * lower[k]) - cos(y[k] * upper[k])) / y[k],
                        )
                    };
                    let nr = re * fr - im * fi;
                    im = re * fi + im * fr;
                    re = nr;
                }
                (re, im)
            }
        }
    }

    /// Radius of a ball about the origin outside which φ is negligible (< 1e-14 of its peak).
    pub fn support_radius(&self, d: usize) -> f64 {
        match *self {
            TestFunction::GaussianBump { center, width, .. } => {
                let c: f64 = (0..d).map(|k| center[k] * center[k]).sum();
                sqrt(c) + 8.0 * width
            }
            TestFunction::IndicatorBox { lower, upper } => {
                let c: f64 = (0..d)
                    .map(|k| {
                        let m = lower[k].abs().max(upper[k].abs());
                        m * m
                    })
                    .sum();
                sqrt(c)
            }
        }
    }
}

/// Maps `v` into `[-half, half)`.
pub(crate) fn wrap_coordinate(v: f64, half: f64) -> f64 {
    if v >= -half && v < half {
        return v;
    }
    let width = 2.0 * half;
    let r = v + half - width * libm::floor((v + half) / width);
    // r in [0, width]; rounding can land exactly on width
    let w = r - half;
    if w >= half {
        -half
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadratureSpec};

    #[test]
    fn bump_mass_matches_quadrature() {
        let f = TestFunction::GaussianBump {
            center: [0.3, 0.0, 0.0],
            width: 0.7,
            amplitude: 2.0,
        };
        let q = QuadratureSpec::default();
        let v = integrate(|n| f.value(&[n.x, 0.0, 0.0], 1), -10.0, 10.0, &q).unwrap();
        assert!((v / f.mass(1) - 1.0).abs() < 1e-10);
        let v2 = integrate(
            |n| {
                let v = f.value(&[n.x, 0.0, 0.0], 1);
                v * v
            },
            -10.0,
            10.0,
            &q,
        )
        .unwrap();
        assert!((v2 / f.square_mass(1) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn fourier_at_zero_is_mass() {
        let fs = [
            TestFunction::centered_bump(1.0),
            TestFunction::IndicatorBox {
                lower: [-1.0, 0.0, 2.0],
                upper: [1.0, 0.5, 3.0],
            },
        ];
        for f in fs {
            for d in 1..=3 {
                let (re, im) = f.fourier(&[0.0; 3], d);
                assert!((re - f.mass(d)).abs() < 1e-12);
                assert_eq!(im, 0.0);
            }
        }
    }

    #[test]
    fn box_fourier_matches_quadrature() {
        let f = TestFunction::IndicatorBox {
            lower: [-0.5, 0.0, 0.0],
            upper: [1.5, 0.0, 0.0],
        };
        let y = 1.3;
        let q = QuadratureSpec::default();
        let re = integrate(|n| libm::cos(y * n.x), -0.5, 1.5, &q).unwrap();
        let im = integrate(|n| libm::sin(y * n.x), -0.5, 1.5, &q).unwrap();
        let (fr, fi) = f.fourier(&[y, 0.0, 0.0], 1);
        assert!((fr - re).abs() < 1e-12 && (fi - im).abs() < 1e-12);
    }

    #[test]
    fn wrapping() {
        assert_eq!(wrap_coordinate(0.5, 2.0), 0.5);
        assert!((wrap_coordinate(2.5, 2.0) + 1.5).abs() < 1e-15);
        assert!((wrap_coordinate(-6.5, 2.0) - 1.5).abs() < 1e-15);
        assert_eq!(wrap_coordinate(2.0, 2.0), -2.0);
    }

    #[test]
    fn validation() {
        assert!(TestFunction::centered_bump(0.0).validate(1).is_err());
        let b = TestFunction::IndicatorBox {
            lower: [1.0; 3],
            upper: [0.0; 3],
        };
        assert!(b.validate(2).is_err());
    }
}
