use wsfbm_core::analysis::{increment_bound_check, increment_variance};
use wsfbm_core::gp::TimeGrid;
use wsfbm_core::kernels::KernelParams;
use wsfbm_core::QuadratureSpec;

#[test]
fn local_bounds_hold_on_bounded_window() {
    let q = QuadratureSpec::default();
    let grid = TimeGrid::uniform(2.0, 20).unwrap();
    // (a, b, exponent): exponent b for b > 0, b + 1 for b <= 0
    for &(a, b, e) in &[(0.0, 0.5, 0.5), (-0.5, 1.5, 1.5), (-0.9, 1.5, 1.5), (0.5, -0.25, 0.75), (1.0, -0.5, 0.5)] {
        let p = KernelParams::new(a, b).unwrap();
        let r = increment_bound_check(&p, &grid, e, &q).unwrap();
        assert!(r.holds, "a={a} b={b}: {r:?}");
    }
}

#[test]
fn negative_b_bound_is_not_uniform_in_time_when_weight_grows() {
    // With a > 0 the increment variance over a window of fixed width grows like T^a,
    // so the h^{b+1} bound only holds on bounded time windows.
    let q = QuadratureSpec::default();
    let (a, b) = (1.0, -0.5);
    let p = KernelParams::new(a, b).unwrap();
    let h: f64 = 0.01;
    let ratio = |big: f64| increment_variance(&p, big, big + h, &q).unwrap() / h.powf(b + 1.0);
    let asymptote = |big: f64| big.powf(a) * h.powf(0.0) / ((1.0 - b) * (b + 1.0));
    for &big in &[10.0, 100.0, 1000.0] {
        let r = ratio(big);
        assert!((r / asymptote(big) - 1.0).abs() < 0.02, "T={big}: {r}");
    }
    assert!(ratio(1000.0) > 50.0 * ratio(10.0));
}
