use super::report::TestReport;
use crate::error::Result;
use crate::kernels::{dirichlet_integral, dirichlet_integral_exponent_variant, dirichlet_quadrature, gauss_kernel, pn_kernel};

/// Grid and tolerances of the kernel suite.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSuiteConfig {
    pub sizes: Vec<usize>,
    pub pn_tolerance: f64,
    pub quadrature_points: usize,
    pub dirichlet_points: Vec<(f64, f64)>,
    pub dirichlet_tolerance: f64,
}

impl Default for KernelSuiteConfig {
    fn default() -> Self {
        Self {
            sizes: vec![100, 300, 1000],
            pn_tolerance: 5e-2,
            quadrature_points: 64,
            dirichlet_points: vec![(1.0, 0.0), (0.5, 0.3), (2.0, -0.7)],
            dirichlet_tolerance: 1e-6,
        }
    }
}

/// Max of `|p_N(τ, y | 0, 0) − ρ(τ, y)|` over `τ ∈ linspace(0.25, 2, 5)`, `y ∈ linspace(−1, 1, 5)`.
pub fn pn_grid_errors(n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..5 {
        let tau = 0.25 + 1.75 * a as f64 / 4.0;
        for b in 0..5 {
            let y = -1.0 + 2.0 * b as f64 / 4.0;
            worst = worst.max((pn_kernel(n, tau, y, 0.0, 0.0) - gauss_kernel(tau, y)).abs());
        }
    }
    worst
}

/// Convergence of `p_N` to the Gaussian kernel and the Dirichlet closed form against quadrature.
pub fn kernels_suite(cfg: &KernelSuiteConfig) -> Result<TestReport> {
    let mut report = TestReport::new("kernels");
    let errs: Vec<f64> = cfg.sizes.iter().map(|&n| pn_grid_errors(n)).collect();
    let increases = errs.windows(2).filter(|w| w[1] >= w[0]).count();
    report.at_most("pn_error_increases", increases as f64, 0.0, errs.len());
    if let (Some(&n), Some(&e)) = (cfg.sizes.last(), errs.last()) {
        report.below(format!("pn_max_error_N={n}"), e, cfg.pn_tolerance, 25);
    }
    for (n, e) in cfg.sizes.iter().zip(&errs) {
        report.note(format!("p_N grid error at N={n}: {e:.4e}"));
    }
    for k in [1u32, 2] {
        for &(tau, z) in &cfg.dirichlet_points {
            let closed = dirichlet_integral(k, tau, z)?;
            let quad = dirichlet_quadrature(k, tau, z, cfg.quadrature_points)?;
            report.at_most(
                format!("dirichlet_k={k}_tau={tau}_z={z}"),
                (closed - quad).abs() / quad.abs(),
                cfg.dirichlet_tolerance,
                cfg.quadrature_points,
            );
            let variant = dirichlet_integral_exponent_variant(k, tau, z)?;
            report.note(format!(
                "k={k} tau={tau} z={z}: quadrature {quad:.10e}, closed form {closed:.10e}, exponent (k+3)/2 gives {variant:.10e} (ratio {:.6})",
                variant / quad
            ));
        }
    }
    Ok(report.finish())
}
