use approx::assert_relative_eq;
use proptest::prelude::*;
use wsfbm_core::analysis::{increment_cross_cov_four_point, increment_cross_cov_integral, self_similarity_gap};
use wsfbm_core::kernels::{eval_qab, eval_subfbm, qab_diagonal, qab_flat, qab_zero_weight, KernelParams};
use wsfbm_core::QuadratureSpec;

/// Composite midpoint rule straight from the defining integral.
fn midpoint_oracle(a: f64, b: f64, w: f64, z: f64, n: usize) -> f64 {
    let m = w.min(z);
    let h = m / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let s = (i as f64 + 0.5) * h;
        acc += s.powf(a) * ((z - s).powf(b) + (w - s).powf(b) - (w + z - 2.0 * s).powf(b));
    }
    acc * h / (1.0 - b)
}

#[test]
fn smooth_parameters_match_midpoint_rule() {
    let q = QuadratureSpec::default();
    for &(a, b) in &[(0.5, 1.5), (1.0, 2.0), (2.0, 1.5)] {
        let p = KernelParams::new(a, b).unwrap();
        for &(w, z) in &[(0.3, 1.0), (1.0, 2.5), (2.0, 2.0)] {
            let oracle = midpoint_oracle(a, b, w, z, 200_000);
            assert_relative_eq!(eval_qab(&p, w, z, &q).unwrap(), oracle, max_relative = 1e-7);
        }
    }
}

#[test]
fn zero_weight_is_scaled_subfractional() {
    // Q_{0,b} = subfBm_{b+1} / ((b+1)(1-b)) for b in (-1, 1).
    for &b in &[-0.5, 0.5] {
        for &(s, t) in &[(0.5, 1.0), (1.0, 3.0), (2.0, 2.0)] {
            let scaled = eval_subfbm(b + 1.0, s, t).unwrap() / ((b + 1.0) * (1.0 - b));
            assert_relative_eq!(qab_zero_weight(b, s, t).unwrap(), scaled, max_relative = 1e-12);
        }
    }
}

#[test]
fn brownian_special_case() {
    let q = QuadratureSpec::default();
    let p = KernelParams::new(0.0, 0.0).unwrap();
    assert_relative_eq!(eval_qab(&p, 0.7, 1.9, &q).unwrap(), 0.7, max_relative = 1e-10);
    assert_eq!(qab_flat(0.0, 0.7, 1.9).unwrap(), 0.7);
}

fn admissible() -> impl Strategy<Value = (f64, f64)> {
    (-0.9f64..2.0, -0.9f64..2.0).prop_filter("b != 1 and a+b+1 > 0", |(a, b)| (b - 1.0).abs() > 0.05 && a + b + 1.0 > 0.05)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kernel_is_symmetric((a, b) in admissible(), s in 0.01f64..5.0, t in 0.01f64..5.0) {
        let q = QuadratureSpec::default();
        let p = KernelParams::new(a, b).unwrap();
        let st = eval_qab(&p, s, t, &q).unwrap();
        let ts = eval_qab(&p, t, s, &q).unwrap();
        prop_assert!((st - ts).abs() <= 1e-12 * st.abs().max(1e-300));
    }

    #[test]
    fn kernel_is_self_similar((a, b) in admissible(), s in 0.05f64..3.0, t in 0.05f64..3.0, c in prop::sample::select(vec![0.5, 2.0, 10.0])) {
        let q = QuadratureSpec::default();
        let p = KernelParams::new(a, b).unwrap();
        prop_assert!(self_similarity_gap(&p, s, t, c, &q).unwrap() < 1e-8);
    }

    #[test]
    fn diagonal_is_continuous_limit((a, b) in admissible(), t in 0.1f64..3.0) {
        let q = QuadratureSpec::default();
        let p = KernelParams::new(a, b).unwrap();
        let diag = qab_diagonal(&p, t).unwrap();
        let delta = 1e-9 * t;
        let near = eval_qab(&p, t, t + delta, &q).unwrap();
        // b < 0 leaves a |w-z|^{b+1} cusp on the diagonal
        let modulus = 10.0 * delta.powf((b + 1.0).min(1.0)) / ((b + 1.0) * (1.0 - b)).abs();
        prop_assert!((diag - near).abs() <= 1e-8 * diag.abs() + modulus, "{diag} vs {near}");
    }

    #[test]
    fn increment_routes_agree((a, b) in admissible(), mut xs in prop::array::uniform4(0.0f64..4.0)) {
        xs.sort_by(f64::total_cmp);
        let [r, v, s, t] = xs;
        let q = QuadratureSpec::default();
        let p = KernelParams::new(a, b).unwrap();
        let four = increment_cross_cov_four_point(&p, r, v, s, t, &q).unwrap();
        let three = increment_cross_cov_integral(&p, r, v, s, t, &q).unwrap();
        prop_assert!((four - three).abs() <= 1e-8 * four.abs().max(1.0), "{four} vs {three}");
    }
}
