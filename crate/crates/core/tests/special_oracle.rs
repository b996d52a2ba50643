use approx::assert_relative_eq;
use statrs::function::beta::beta as beta_oracle;
use statrs::function::gamma::{gamma as gamma_oracle, ln_gamma as ln_gamma_oracle};
use wsfbm_core::special::{beta, gamma, ln_gamma};

#[test]
fn gamma_family_agrees_with_statrs() {
    for &x in &[0.1, 0.5, 1.0, 1.5, 2.5, 4.0, 7.3, 12.0] {
        assert_relative_eq!(gamma(x), gamma_oracle(x), max_relative = 1e-12);
        assert_relative_eq!(ln_gamma(x), ln_gamma_oracle(x), max_relative = 1e-12, epsilon = 1e-14);
    }
    for &(x, y) in &[(1.0, 0.5), (1.5, 2.5), (0.1, 3.0), (2.0, 2.0)] {
        assert_relative_eq!(beta(x, y), beta_oracle(x, y), max_relative = 1e-12);
    }
}
