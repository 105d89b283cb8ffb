use pitman_core::dynamics::WeightMode;
use pitman_core::kernels::*;
use pitman_core::samplers::{BridgeFamily, BridgePath, McmcConfig};
use pitman_core::verify::*;
use proptest::prelude::*;

fn mcmc() -> McmcConfig {
    McmcConfig::default()
}

fn chain_cfg(initial: InitialLaw, samples: usize) -> ChainConfig {
    ChainConfig {
        n: 2,
        slopes: vec![0.0, 1.0],
        beta: 1.0,
        mode: WeightMode::Conditioned { alpha: -1.0, beta: 1.0 },
        steps: 1,
        samples,
        seed: 3,
        mcmc: mcmc(),
        initial,
    }
}

proptest! {
    #[test]
    fn pn_kernel_lattice_shift_is_exact(
        n in 1usize..40, t in 0.1f64..2.0, y in -1.0f64..1.0, x in -1.0f64..1.0, j in -20i64..20,
    ) {
        let w = j as f64 / n as f64;
        let a = pn_kernel(n, t, y, 0.0, x);
        let b = pn_kernel(n, t, y + w, 0.0, x + w);
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
    }
}

#[test]
fn periodized_kernel_stable_under_doubled_radius() {
    for theta in [0.0, 0.5, -0.8] {
        let small = KernelParams::new(theta, 1e-12, 20).unwrap();
        let large = KernelParams::new(theta, 1e-12, 40).unwrap();
        for (t, y) in [(0.3, 0.1), (1.0, -0.4), (2.0, 0.9)] {
            let a = periodized_kernel(&small, t, y, 0.0, 0.0).unwrap();
            let b = periodized_kernel(&large, t, y, 0.0, 0.0).unwrap();
            assert!(a.converged && b.converged);
            assert!((a.value - b.value).abs() <= 1e-10 * b.value);
        }
    }
}

#[test]
fn poisson_kernel_has_unit_mass() {
    for t in [0.1, 1.0, 25.0] {
        assert!((poisson_total_mass(t, 1e-16) - 1.0).abs() < 1e-10);
    }
}

#[test]
fn kernel_suite_passes_and_reports_exponent_ratio() {
    let r = kernels_suite(&KernelSuiteConfig::default()).unwrap();
    assert!(r.passed(), "{r}");
    assert!(r.notes.iter().any(|n| n.contains("ratio")));
    let e = pn_grid_errors(100);
    assert!(e > pn_grid_errors(1000));
}

#[test]
fn algebra_suite_small_sizes_pass() {
    let cfg = AlgebraConfig {
        n_max: 4,
        k_max: 3,
        families: 100,
        seed: 2,
    };
    let r = algebra_suite(&cfg).unwrap();
    assert!(r.passed(), "{r}");
    assert_eq!(r.checks.len(), ALGEBRA_CHECKS.len());
}

#[test]
fn jacobian_and_polymer_suites_pass() {
    assert!(jacobian_suite(20, 5, 1e-5, 4).unwrap().passed());
    assert!(polymer_suite(100, 6, 4).unwrap().passed());
}

#[test]
fn jacobian_of_two_component_map_is_unimodular() {
    let mut rng = pitman_core::RngStream::new(5, 0);
    let x1 = random_vector(&mut rng, 3, 0.0);
    let x2 = random_vector(&mut rng, 3, 1.0);
    let det = jacobian_det_check(&x1, &x2, 1e-5).unwrap();
    assert!((det - 1.0).abs() < 1e-6, "det {det}");
}

#[test]
fn burke_passes_and_detects_wrong_shape() {
    let cfg = BurkeConfig {
        n: 3,
        gamma1: 1.0,
        gamma2: 2.0,
        beta: 1.0,
        samples: 20_000,
        seed: 6,
    };
    let r = burke_test(&cfg).unwrap();
    assert!(r.passed(), "{r}");
    let control = burke_mismatch_control(&cfg).unwrap();
    assert!(!control.passed(), "{control}");
}

#[test]
fn chain_invariance_passes_from_mu() {
    let r = invariance_chain_test(&chain_cfg(InitialLaw::Mu, 20_000)).unwrap();
    assert!(r.passed(), "{r}");
}

#[test]
fn chain_invariance_rejects_unsorted_start() {
    let r = invariance_chain_test(&chain_cfg(InitialLaw::IndependentNu, 20_000)).unwrap();
    assert!(!r.passed());
}

#[test]
fn zero_step_chain_is_trivial() {
    let mut cfg = chain_cfg(InitialLaw::Mu, 100);
    cfg.steps = 0;
    assert!(invariance_chain_test(&cfg).unwrap().passed());
}

#[test]
fn sde_zero_horizon_is_trivial() {
    let cfg = SdeConfig {
        n: 2,
        slopes: vec![0.0, 1.0],
        beta: 1.0,
        dt: 1e-3,
        horizon: 0.0,
        samples: 100,
        seed: 1,
        mcmc: mcmc(),
    };
    assert!(invariance_sde_test(&cfg).unwrap().passed());
}

#[test]
fn sde_short_run_keeps_mu() {
    let cfg = SdeConfig {
        n: 2,
        slopes: vec![0.0, 1.0],
        beta: 1.0,
        dt: 1e-2,
        horizon: 0.2,
        samples: 5000,
        seed: 8,
        mcmc: mcmc(),
    };
    let r = invariance_sde_test(&cfg).unwrap();
    assert!(r.passed(), "{r}");
}

#[test]
fn duality_converges_at_first_order() {
    let r = duality_order_test(&DualityConfig::default()).unwrap();
    assert!(r.passed(), "{r}");
}

#[test]
fn horizon_suite_and_raw_control() {
    let cfg = HorizonConfig {
        grid: 256,
        sandwich_draws: 200,
        variance_draws: 4000,
        ..HorizonConfig::default()
    };
    let r = horizon_suite(&cfg).unwrap();
    assert!(r.passed(), "{r}");
}

#[test]
fn sandwich_flags_crossing_paths() {
    let lo = BridgePath::new(vec![0.0, 1.6, -1.0]).unwrap();
    let hi = BridgePath::new(vec![0.0, 0.1, 1.0]).unwrap();
    let fam = BridgeFamily::new(vec![lo, hi]).unwrap();
    assert!((sandwich_violation(&fam) - 1.5).abs() < 1e-12);
    assert!(!monotone_sandwich_check(&fam).passed());
}

#[test]
fn limit_checks_pass_at_reduced_scale() {
    let cfg = LimitConfig {
        draws: 100,
        ..LimitConfig::default()
    };
    assert!(beta_zero_limit_check(&cfg).unwrap().passed());
    assert!(tropical_limit_check(&cfg).unwrap().passed());
}

#[test]
fn covariance_estimates_are_consistent() {
    let s1 = estimate_sigma2(1.0, 256, 20_000, 1).unwrap();
    let s2 = estimate_sigma2(1.0, 256, 20_000, 2).unwrap();
    assert!(s1.value > 0.0);
    assert!((s1.value - s2.value).abs() <= 2.0 * (s1.stderr.powi(2) + s2.stderr.powi(2)).sqrt());
    let r0 = estimate_r(0.0, 1.0, 256, 20_000, 3).unwrap();
    assert!(r0.z_against(&s1).abs() < 3.0);
    let plus = estimate_r(1.0, 1.0, 256, 20_000, 4).unwrap();
    let minus = estimate_r(-1.0, 1.0, 256, 20_000, 5).unwrap();
    assert!(plus.z_against(&minus).abs() < 3.0, "{plus:?} {minus:?}");
}

#[test]
fn drift_is_even_in_theta() {
    for theta in [0.3, 1.0, 2.5] {
        assert!((drift_gamma(theta, 1.0) - drift_gamma(-theta, 1.0)).abs() < 1e-12);
    }
}

#[test]
fn report_display_lists_every_check() {
    let mut r = TestReport::new("demo");
    r.at_most("small", 0.1, 1.0, 10);
    r.at_least("big", 0.1, 1.0, 10);
    let text = r.finish().to_string();
    assert!(text.contains("suite demo: FAIL"));
    assert!(text.contains("[ok] small"));
    assert!(text.contains("[FAIL] big"));
}

#[test]
fn ks_hand_example() {
    // Empirical CDFs of {1,2,3} and {2.5,4,5,6} differ most just after 2 and 3: 2/3 − 0 and 1 − 1/4.
    let (d, p) = stats::ks_two_sample(&[1.0, 2.0, 3.0], &[2.5, 4.0, 5.0, 6.0]).unwrap();
    assert!((d - 0.75).abs() < 1e-15);
    assert!(p > 0.0 && p < 1.0);
}
