//! Per-draw and distributional checks of the horizon sampler, its small- and
//! large-`β` limits, and the Monte Carlo covariance estimators.

use rayon::prelude::*;

use super::report::TestReport;
use crate::error::{invalid, Result};
use crate::numeric::{log_trapezoid_exp, pairwise_sum};
use crate::rng::RngStream;
use crate::samplers::{phi2, phi2_trop, sample_bridge, sample_horizon, BridgeFamily, BridgePath};

/// `γ_β^{(θ)} = θ²/2 − β²/2 − β⁴/24`.
pub fn drift_gamma(theta: f64, beta: f64) -> f64 {
    theta * theta / 2.0 - beta * beta / 2.0 - beta.powi(4) / 24.0
}

/// Worst violation of `0 ≤ g_m − g_r ≤ θ_m − θ_r` over slope-sorted pairs and grid points.
///
/// Pairs with equal slopes must coincide, so their violation is `max |g_m − g_r|`.
pub fn sandwich_violation(family: &BridgeFamily) -> f64 {
    let slopes = family.slopes();
    let mut order: Vec<usize> = (0..family.len()).collect();
    order.sort_by(|&a, &b| slopes[a].total_cmp(&slopes[b]));
    let mut worst: f64 = 0.0;
    for (p, &r) in order.iter().enumerate() {
        for &m in &order[p + 1..] {
            let gap = slopes[m] - slopes[r];
            for (a, b) in family.get(r).values().iter().zip(family.get(m).values()) {
                let d = b - a;
                worst = worst.max(-d).max(d - gap);
            }
        }
    }
    worst
}

/// Per-draw monotone sandwich check with tolerance `2/M`.
pub fn monotone_sandwich_check(family: &BridgeFamily) -> TestReport {
    let mut report = TestReport::new("monotone_sandwich");
    let tol = 2.0 / family.grid() as f64;
    report.at_most("worst_violation", sandwich_violation(family), tol, 1);
    report.finish()
}

/// Sizes of the horizon suite.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizonConfig {
    pub grid: usize,
    pub beta: f64,
    pub slopes: Vec<f64>,
    pub sandwich_draws: usize,
    pub variance_draws: usize,
    pub seed: u64,
}

impl Default for HorizonConfig {
    fn default() -> Self {
        Self {
            grid: 1024,
            beta: 1.0,
            slopes: vec![-1.0, 1.0],
            sandwich_draws: 1000,
            variance_draws: 10_000,
            seed: 1,
        }
    }
}

/// Sample variance of `g_r(1/2)` per component against `β²/4`, within 3 standard errors.
pub fn horizon_variance_check(cfg: &HorizonConfig) -> Result<TestReport> {
    if !cfg.grid.is_multiple_of(2) {
        return Err(invalid("grid", "must be even to contain x = 1/2"));
    }
    let mut report = TestReport::new("horizon_variance");
    let mid = cfg.grid / 2;
    let rows: Vec<Vec<f64>> = (0..cfg.variance_draws)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(cfg.seed, 92, j as u64);
            let h = sample_horizon(&mut rng, cfg.grid, cfg.beta, &cfg.slopes)?;
            Ok(h.paths().iter().map(|p| p.values()[mid]).collect())
        })
        .collect::<Result<_>>()?;
    let target = cfg.beta * cfg.beta / 4.0;
    let n = rows.len() as f64;
    for r in 0..cfg.slopes.len() {
        let col: Vec<f64> = rows.iter().map(|row| row[r]).collect();
        let mean = pairwise_sum(&col) / n;
        let sq: Vec<f64> = col.iter().map(|x| (x - mean) * (x - mean)).collect();
        let var = pairwise_sum(&sq) / (n - 1.0);
        let dev: Vec<f64> = sq.iter().map(|s| (s - var) * (s - var)).collect();
        let se = (pairwise_sum(&dev) / (n - 1.0) / n).sqrt();
        report.at_most(format!("var_g{}(1/2)_z", r + 1), (var - target).abs() / se, 3.0, rows.len());
    }
    Ok(report.finish())
}

/// Sandwich over many draws, its raw-bridge negative control, and the midpoint variance.
pub fn horizon_suite(cfg: &HorizonConfig) -> Result<TestReport> {
    if cfg.slopes.is_empty() {
        return Err(invalid("slopes", "need at least one slope"));
    }
    let mut report = TestReport::new("horizon");
    let tol = 2.0 / cfg.grid as f64;
    let pairs: Vec<(f64, f64)> = (0..cfg.sandwich_draws)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(cfg.seed, 91, j as u64);
            let h = sample_horizon(&mut rng, cfg.grid, cfg.beta, &cfg.slopes)?;
            let raw = cfg
                .slopes
                .iter()
                .map(|&t| sample_bridge(&mut rng, cfg.grid, cfg.beta, t))
                .collect::<Result<Vec<_>>>()?;
            Ok((sandwich_violation(&h), sandwich_violation(&BridgeFamily::new(raw)?)))
        })
        .collect::<Result<_>>()?;
    let worst = pairs.iter().map(|p| p.0).fold(0.0, f64::max);
    report.at_most("sandwich_worst_violation", worst, tol, pairs.len());
    let caught = pairs.iter().filter(|p| p.1 > tol).count();
    report.at_least("raw_bridge_control_violations", caught as f64, 1.0, pairs.len());
    report.absorb(horizon_variance_check(cfg)?);
    Ok(report.finish())
}

/// Sizes of the limit checks.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitConfig {
    pub grid: usize,
    /// Grid of the large-`β` check; resolving `e^{βf}` needs `β/√M ≤ 1`.
    pub tropical_grid: usize,
    pub draws: usize,
    pub seed: u64,
}

impl Default for LimitConfig {
    fn default() -> Self {
        Self {
            grid: 1024,
            tropical_grid: 4096,
            draws: 1000,
            seed: 1,
        }
    }
}

/// Fraction of draws on which `(1/β)(g_{β,βθ2} − g_{β,βθ1})(x)` stays within 0.05 of
/// `(θ2 − θ1)x`, at `β = 0.01` and slopes `(−1, 1)`; must be at least 0.9.
pub fn beta_zero_limit_check(cfg: &LimitConfig) -> Result<TestReport> {
    let beta = 0.01;
    let (t1, t2) = (-1.0, 1.0);
    let mut report = TestReport::new("beta_zero_limit");
    let m = cfg.grid as f64;
    let sups: Vec<f64> = (0..cfg.draws)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(cfg.seed, 101, j as u64);
            let h = sample_horizon(&mut rng, cfg.grid, beta, &[beta * t1, beta * t2])?;
            Ok(h.get(0)
                .values()
                .iter()
                .zip(h.get(1).values())
                .enumerate()
                .map(|(i, (a, b))| ((b - a) / beta - (t2 - t1) * i as f64 / m).abs())
                .fold(0.0, f64::max))
        })
        .collect::<Result<_>>()?;
    let good = sups.iter().filter(|s| **s < 0.05).count() as f64 / sups.len() as f64;
    report.at_least("fraction_within_0.05", good, 0.9, sups.len());
    Ok(report.finish())
}

/// Sup-norm distance between `(1/β)Φ²(βf1, βf2)` and the max-plus map at `β = 50`,
/// for unit bridges of slopes `−1` and `1`; every draw must be within 0.15.
pub fn tropical_limit_check(cfg: &LimitConfig) -> Result<TestReport> {
    let beta = 50.0;
    let mut report = TestReport::new("tropical_limit");
    let dists: Vec<f64> = (0..cfg.draws)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(cfg.seed, 102, j as u64);
            let f1 = sample_bridge(&mut rng, cfg.tropical_grid, 1.0, -1.0)?;
            let f2 = sample_bridge(&mut rng, cfg.tropical_grid, 1.0, 1.0)?;
            let soft = phi2(&f1.scaled(beta), &f2.scaled(beta))?.scaled(1.0 / beta);
            Ok(soft.sup_distance(&phi2_trop(&f1, &f2)?))
        })
        .collect::<Result<_>>()?;
    report.at_most("worst_sup_distance", dists.iter().cloned().fold(0.0, f64::max), 0.15, dists.len());
    Ok(report.finish())
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: usize,
}

impl Estimate {
    fn from_terms(terms: &[f64], scale: f64) -> Self {
        let n = terms.len() as f64;
        let mean = pairwise_sum(terms) / n;
        let dev: Vec<f64> = terms.iter().map(|t| (t - mean) * (t - mean)).collect();
        let sd = (pairwise_sum(&dev) / (n - 1.0)).sqrt();
        Self {
            value: scale * mean,
            stderr: scale * sd / n.sqrt(),
            samples: terms.len(),
        }
    }

    /// `|a − b| / sqrt(se_a² + se_b²)`.
    pub fn z_against(&self, other: &Estimate) -> f64 {
        (self.value - other.value).abs() / (self.stderr.powi(2) + other.stderr.powi(2)).sqrt()
    }

    /// `|a − target| / se_a`.
    pub fn z_to(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.stderr
    }
}

fn check_estimator(beta: f64, grid: usize, samples: usize) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    if grid == 0 {
        return Err(invalid("grid", "must be positive"));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least two"));
    }
    Ok(())
}

fn lte(values: impl Iterator<Item = f64>) -> f64 {
    log_trapezoid_exp(&values.collect::<Vec<_>>())
}

fn combine<'a>(parts: &'a [(&'a BridgePath, f64)]) -> impl Iterator<Item = f64> + 'a {
    let m = parts[0].0.grid();
    (0..=m).map(move |j| parts.iter().map(|(p, c)| c * p.values()[j]).sum())
}

/// `σ_β² = β² E[∫e^{β(B1+B2+2B3)} / (∫e^{β(B1+B3)} ∫e^{β(B2+B3)})]` over standard bridges.
pub fn estimate_sigma2(beta: f64, grid: usize, samples: usize, seed: u64) -> Result<Estimate> {
    check_estimator(beta, grid, samples)?;
    let terms: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(seed, 111, j as u64);
            let b1 = sample_bridge(&mut rng, grid, 1.0, 0.0)?;
            let b2 = sample_bridge(&mut rng, grid, 1.0, 0.0)?;
            let b3 = sample_bridge(&mut rng, grid, 1.0, 0.0)?;
            let num = lte(combine(&[(&b1, beta), (&b2, beta), (&b3, 2.0 * beta)]));
            let d1 = lte(combine(&[(&b1, beta), (&b3, beta)]));
            let d2 = lte(combine(&[(&b2, beta), (&b3, beta)]));
            Ok((num - d1 - d2).exp())
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_terms(&terms, beta * beta))
}

/// Covariance `R_β^{(θ)}` with `(g_{β,0}, g_{β,−θ})` drawn from the horizon sampler and
/// the tilt `+θy` attached to the `g_{β,−θ}` factor in the numerator and second denominator.
pub fn estimate_r(theta: f64, beta: f64, grid: usize, samples: usize, seed: u64) -> Result<Estimate> {
    check_estimator(beta, grid, samples)?;
    if !theta.is_finite() {
        return Err(invalid("theta", "must be finite"));
    }
    let m = grid as f64;
    let terms: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(seed, 112, j as u64);
            let b1 = sample_bridge(&mut rng, grid, 1.0, 0.0)?;
            let b2 = sample_bridge(&mut rng, grid, 1.0, 0.0)?;
            let h = sample_horizon(&mut rng, grid, beta, &[0.0, -theta])?;
            let (g0, gt) = (h.get(0).values(), h.get(1).values());
            let first: Vec<f64> = (0..=grid).map(|i| beta * b1.values()[i] + g0[i]).collect();
            let second: Vec<f64> = (0..=grid)
                .map(|i| beta * b2.values()[i] + gt[i] + theta * i as f64 / m)
                .collect();
            let num = lte(first.iter().zip(&second).map(|(a, b)| a + b));
            Ok((num - log_trapezoid_exp(&first) - log_trapezoid_exp(&second)).exp())
        })
        .collect::<Result<_>>()?;
    Ok(Estimate::from_terms(&terms, beta * beta))
}

/// Sizes of the covariance suite.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceConfig {
    pub beta: f64,
    pub small_beta: f64,
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for CovarianceConfig {
    fn default() -> Self {
        Self {
            beta: 1.0,
            small_beta: 0.01,
            grid: 1024,
            samples: 10_000,
            seed: 1,
        }
    }
}

/// `R̂(0)` against `σ̂²` at `beta`, and both against `β²` at `small_beta`, each within 3σ.
pub fn covariance_suite(cfg: &CovarianceConfig) -> Result<TestReport> {
    let mut report = TestReport::new("covariance");
    let s = estimate_sigma2(cfg.beta, cfg.grid, cfg.samples, cfg.seed)?;
    let r = estimate_r(0.0, cfg.beta, cfg.grid, cfg.samples, cfg.seed.wrapping_add(1))?;
    report.at_most("r0_vs_sigma2_z", r.z_against(&s), 3.0, cfg.samples);
    report.note(format!(
        "beta={}: sigma2={:.6e}±{:.2e}, R(0)={:.6e}±{:.2e}",
        cfg.beta, s.value, s.stderr, r.value, r.stderr
    ));
    let b = cfg.small_beta;
    let s0 = estimate_sigma2(b, cfg.grid, cfg.samples, cfg.seed.wrapping_add(2))?;
    let r0 = estimate_r(0.0, b, cfg.grid, cfg.samples, cfg.seed.wrapping_add(3))?;
    let b2 = b * b;
    report.at_most("small_beta_sigma2_vs_beta2_z", s0.z_to(b2), 3.0, cfg.samples);
    report.at_most("small_beta_r0_vs_beta2_z", r0.z_to(b2), 3.0, cfg.samples);
    let corrected = b2 + b.powi(4) / 12.0;
    report.note(format!(
        "beta={b}: sigma2-beta^2={:.4e}, R(0)-beta^2={:.4e}, beta^4/12={:.4e}; z against beta^2+beta^4/12: {:.2}, {:.2}",
        s0.value - b2,
        r0.value - b2,
        b.powi(4) / 12.0,
        s0.z_to(corrected),
        r0.z_to(corrected)
    ));
    Ok(report.finish())
}
