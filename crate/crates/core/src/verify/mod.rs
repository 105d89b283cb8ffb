//! Verification harness: exact identity suites, Monte Carlo distributional
//! tests, Jacobian check, covariance estimators and horizon checks.

mod algebra;
mod burke;
mod horizon;
mod invariance;
mod kernel_suite;
mod report;
pub mod stats;

pub use algebra::{
    algebra_suite, jacobian_det_check, jacobian_suite, polymer_suite, random_family, random_vector,
    AlgebraConfig, ALGEBRA_CHECKS,
};
pub use burke::{burke_mismatch_control, burke_test, BurkeConfig};
pub use horizon::{
    beta_zero_limit_check, covariance_suite, drift_gamma, estimate_r, estimate_sigma2,
    horizon_suite, horizon_variance_check, monotone_sandwich_check, sandwich_violation,
    tropical_limit_check, CovarianceConfig, Estimate, HorizonConfig, LimitConfig,
};
pub use invariance::{
    duality_order_test, invariance_chain_test, invariance_sde_test, ChainConfig, DualityConfig,
    InitialLaw, SdeConfig,
};
pub use kernel_suite::{kernels_suite, pn_grid_errors, KernelSuiteConfig};
pub use report::{CheckRecord, TestReport};
pub use stats::{ks_two_sample, MomentSummary};
