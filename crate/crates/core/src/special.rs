//! Special functions and cancellation-free power differences.

use libm::{exp, expm1, log, log1p, pow};

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Natural logarithm of |Γ(x)|.
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// Beta function B(x, y) for positive arguments.
pub fn beta(x: f64, y: f64) -> f64 {
    if x + y < 150.0 {
        gamma(x) * gamma(y) / gamma(x + y)
    } else {
        exp(ln_gamma(x) + ln_gamma(y) - ln_gamma(x + y))
    }
}

/// `x ln x` extended by continuity with `0 ln 0 = 0`.
pub fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * log(x)
    }
}

/// `(x + h)^b - x^b` for `x >= 0`, `h >= 0`, accurate when `h << x`.
pub fn pow_diff(x: f64, h: f64, b: f64) -> f64 {
    if h == 0.0 {
        return 0.0;
    }
    if x == 0.0 {
        return if b > 0.0 {
            pow(h, b)
        } else if b == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
    }
    pow(x, b) * expm1(b * log1p(h / x))
}

/// Second mixed difference `(y+s+t)^b - (y+s)^b - (y+t)^b + y^b` for
/// `y, s, t >= 0`, stable when `y` is large against `s + t`.
pub fn second_difference(y: f64, s: f64, t: f64, b: f64) -> f64 {
    if s == 0.0 || t == 0.0 {
        return 0.0;
    }
    if y <= s + t {
        return pow(y + s + t, b) - pow(y + s, b) - pow(y + t, b) + pow(y, b);
    }
    let sigma = s / y;
    let tau = t / y;
    let bs = b * log1p(sigma);
    let bt = b * log1p(tau);
    let shrink = b * log1p(-sigma * tau / ((1.0 + sigma) * (1.0 + tau)));
    pow(y, b) * (expm1(bs) * expm1(bt) + exp(bs + bt) * expm1(shrink))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_half_integer() {
        let root_pi = libm::sqrt(core::f64::consts::PI);
        assert!((gamma(0.5) - root_pi).abs() < 1e-15);
        assert!((gamma(1.5) - 0.5 * root_pi).abs() < 1e-15);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
    }

    #[test]
    fn beta_matches_gamma_ratio() {
        assert!((beta(1.0, 0.5) - 2.0).abs() < 1e-14);
        assert!((beta(2.0, 3.0) - 1.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn pow_diff_small_step() {
        let exact = 1e-12 * 0.5; // derivative of sqrt at 1
        let got = pow_diff(1.0, 1e-12, 0.5);
        assert!((got - exact).abs() < 1e-24);
        assert_eq!(pow_diff(0.0, 2.0, 2.0), 4.0);
    }

    #[test]
    fn second_difference_routes_agree() {
        for &b in &[-0.5, 0.5, 1.5, 2.5] {
            let (s, t) = (0.7, 1.3);
            let y = 2.5;
            let direct = pow(y + s + t, b) - pow(y + s, b) - pow(y + t, b) + pow(y, b);
            let got = second_difference(y, s, t, b);
            assert!((got - direct).abs() < 1e-13 * direct.abs().max(1.0), "b={b}");
        }
        // far field: b(b-1) s t y^(b-2)
        let y = 1e8;
        let got = second_difference(y, 1.0, 1.0, 0.5);
        let lead = 0.5 * -0.5 * pow(y, -1.5);
        assert!((got / lead - 1.0).abs() < 1e-6);
    }
}
