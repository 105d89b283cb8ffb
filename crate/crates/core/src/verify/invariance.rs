//! Before/after invariance tests for the coupled chain and the SDE systems,
//! and the strong-order check of the duality between them.

use rand::Rng;
use rayon::prelude::*;

use super::report::TestReport;
use super::stats::{bonferroni_z, z_scores, MomentSummary};
use crate::cyclic::{jk_stack, SlopedFamily};
use crate::dynamics::{chain_step, evolve, evolve_with_noise, Flow, NoiseIncrement, SdeState, WeightMode};
use crate::error::{invalid, Result};
use crate::rng::RngStream;
use crate::samplers::{sample_mu, sample_nu_family, McmcConfig};

/// Family-level false-alarm rate for the moment comparisons.
const FAMILY_ALPHA: f64 = 1e-3;
/// Smallest z threshold ever applied.
const Z_FLOOR: f64 = 3.5;

/// Law of the initial family in the before/after comparisons.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitialLaw {
    /// `μ`: independent `ν`'s pushed through the stacked map.
    Mu,
    /// Independent `ν`'s without the stacked map.
    IndependentNu,
}

/// Parameters of [`invariance_chain_test`].
#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub n: usize,
    pub slopes: Vec<f64>,
    pub beta: f64,
    pub mode: WeightMode,
    pub steps: usize,
    pub samples: usize,
    pub seed: u64,
    pub mcmc: McmcConfig,
    pub initial: InitialLaw,
}

/// Parameters of [`invariance_sde_test`].
#[derive(Clone, Debug, PartialEq)]
pub struct SdeConfig {
    pub n: usize,
    pub slopes: Vec<f64>,
    pub beta: f64,
    pub dt: f64,
    pub horizon: f64,
    pub samples: usize,
    pub seed: u64,
    pub mcmc: McmcConfig,
}

/// Parameters of [`duality_order_test`].
#[derive(Clone, Debug, PartialEq)]
pub struct DualityConfig {
    pub n: usize,
    pub slopes: Vec<f64>,
    pub beta: f64,
    pub horizon: f64,
    pub dts: Vec<f64>,
    pub paths: usize,
    pub seed: u64,
    pub mcmc: McmcConfig,
    pub min_order: f64,
}

impl Default for DualityConfig {
    fn default() -> Self {
        Self {
            n: 3,
            slopes: vec![0.0, 1.0],
            beta: 1.0,
            horizon: 0.5,
            dts: vec![4e-3, 2e-3, 1e-3],
            paths: 100,
            seed: 1,
            mcmc: McmcConfig::default(),
            min_order: 0.8,
        }
    }
}

fn initial_family<R: Rng + ?Sized>(
    rng: &mut R,
    law: InitialLaw,
    n: usize,
    slopes: &[f64],
    beta: f64,
    cfg: &McmcConfig,
) -> Result<SlopedFamily> {
    match law {
        InitialLaw::Mu => sample_mu(rng, n, slopes, beta, cfg),
        InitialLaw::IndependentNu => sample_nu_family(rng, n, slopes, beta, cfg),
    }
}

/// Entries, squares, and pairwise differences with their squares.
fn features(u: &SlopedFamily) -> Vec<f64> {
    let mut out = Vec::new();
    for v in u.vectors() {
        for &x in v.values() {
            out.push(x);
            out.push(x * x);
        }
    }
    for r in 0..u.len() {
        for m in r + 1..u.len() {
            for (a, b) in u.get(r).values().iter().zip(u.get(m).values()) {
                let d = b - a;
                out.push(d);
                out.push(d * d);
            }
        }
    }
    out
}

fn feature_names(n: usize, k: usize) -> Vec<String> {
    let mut out = Vec::new();
    for r in 0..k {
        for i in 0..n {
            out.push(format!("U{}[{i}]", r + 1));
            out.push(format!("U{}[{i}]^2", r + 1));
        }
    }
    for r in 0..k {
        for m in r + 1..k {
            for i in 0..n {
                out.push(format!("(U{}-U{})[{i}]", m + 1, r + 1));
                out.push(format!("(U{}-U{})[{i}]^2", m + 1, r + 1));
            }
        }
    }
    out
}

/// Number of families violating `U_r < U_m` entrywise for some pair with `θ_r < θ_m`.
fn ordering_violations(fams: &[SlopedFamily], slopes: &[f64]) -> usize {
    fams.iter()
        .filter(|u| {
            (0..slopes.len()).any(|r| {
                (0..slopes.len()).any(|m| {
                    slopes[r] < slopes[m]
                        && u.get(r)
                            .values()
                            .iter()
                            .zip(u.get(m).values())
                            .any(|(a, b)| a >= b)
                })
            })
        })
        .count()
}

fn compare_moments(
    report: &mut TestReport,
    prefix: &str,
    before: &[SlopedFamily],
    after: &[SlopedFamily],
    allowance: f64,
) -> Result<()> {
    let fb: Vec<Vec<f64>> = before.iter().map(features).collect();
    let fa: Vec<Vec<f64>> = after.iter().map(features).collect();
    let (sb, sa) = (MomentSummary::from_rows(&fb)?, MomentSummary::from_rows(&fa)?);
    let z = z_scores(&sb, &sa, allowance);
    let thr = Z_FLOOR.max(bonferroni_z(FAMILY_ALPHA, z.len()));
    let names = feature_names(before[0].period(), before[0].len());
    for (name, zf) in names.iter().zip(&z) {
        report.below(format!("{prefix}z_{name}"), *zf, thr, before.len() + after.len());
    }
    Ok(())
}

fn check_slopes(n: usize, slopes: &[f64], samples: usize) -> Result<()> {
    if n == 0 {
        return Err(invalid("n", "period must be positive"));
    }
    if slopes.is_empty() {
        return Err(invalid("slopes", "need at least one slope"));
    }
    if samples < 2 {
        return Err(invalid("samples", "need at least two"));
    }
    Ok(())
}

/// Compares the initial law with its image after `steps` steps of the coupled chain.
///
/// Before and after samples come from disjoint replica streams. Besides the
/// moment z-tests, every sample on both sides must be ordered by slope.
pub fn invariance_chain_test(cfg: &ChainConfig) -> Result<TestReport> {
    check_slopes(cfg.n, &cfg.slopes, cfg.samples)?;
    cfg.mcmc.validate()?;
    let mut report = TestReport::new("chain_invariance");
    if cfg.steps == 0 && cfg.initial == InitialLaw::Mu {
        report.at_most("steps", 0.0, 0.0, 0);
        report.note("no steps: the before and after laws coincide");
        return Ok(report.finish());
    }
    let draw = |tag: u32, steps: usize| -> Result<Vec<SlopedFamily>> {
        (0..cfg.samples)
            .into_par_iter()
            .map(|j| {
                let mut rng = RngStream::for_replica(cfg.seed, tag, j as u64);
                let mut u = initial_family(&mut rng, cfg.initial, cfg.n, &cfg.slopes, cfg.beta, &cfg.mcmc)?;
                for _ in 0..steps {
                    u = chain_step(&u, &mut rng, cfg.mode, &cfg.mcmc)?;
                }
                Ok(u)
            })
            .collect()
    };
    let before = draw(61, 0)?;
    let after = draw(62, cfg.steps)?;
    compare_moments(&mut report, "", &before, &after, 0.0)?;
    report.at_most("ordering_violations_before", ordering_violations(&before, &cfg.slopes) as f64, 0.0, before.len());
    report.at_most("ordering_violations_after", ordering_violations(&after, &cfg.slopes) as f64, 0.0, after.len());
    Ok(report.finish())
}

/// Before/after comparison under (a) the coupled Burgers SDE started from `μ`
/// and (b) the dual SDE started from the product of `ν`'s.
///
/// Mean differences up to `5·dt` are absorbed as discretization bias.
pub fn invariance_sde_test(cfg: &SdeConfig) -> Result<TestReport> {
    check_slopes(cfg.n, &cfg.slopes, cfg.samples)?;
    cfg.mcmc.validate()?;
    if !(cfg.dt > 0.0) {
        return Err(invalid("dt", "must be positive"));
    }
    let mut report = TestReport::new("sde_invariance");
    if cfg.horizon == 0.0 {
        report.at_most("horizon", 0.0, 0.0, 0);
        report.note("zero horizon: the before and after laws coincide");
        return Ok(report.finish());
    }
    let allowance = 5.0 * cfg.dt;
    for (prefix, flow, law, tags) in [
        ("sbe_", Flow::Sbe, InitialLaw::Mu, (71, 72)),
        ("dual_", Flow::Dual, InitialLaw::IndependentNu, (73, 74)),
    ] {
        let draw = |tag: u32, evolve_it: bool| -> Result<Vec<SlopedFamily>> {
            (0..cfg.samples)
                .into_par_iter()
                .map(|j| {
                    let mut rng = RngStream::for_replica(cfg.seed, tag, j as u64);
                    let f = initial_family(&mut rng, law, cfg.n, &cfg.slopes, cfg.beta, &cfg.mcmc)?;
                    if !evolve_it {
                        return Ok(f);
                    }
                    let state = SdeState::new(f, cfg.beta)?;
                    Ok(evolve(flow, &state, cfg.dt, cfg.horizon, &mut rng, None)?.final_state.family)
                })
                .collect()
        };
        let before = draw(tags.0, false)?;
        let after = draw(tags.1, true)?;
        compare_moments(&mut report, prefix, &before, &after, allowance)?;
        if flow == Flow::Sbe {
            report.at_most(
                "sbe_ordering_violations",
                ordering_violations(&after, &cfg.slopes) as f64,
                0.0,
                after.len(),
            );
        }
    }
    Ok(report.finish())
}

fn aggregate(fine: &[NoiseIncrement], factor: usize) -> Vec<NoiseIncrement> {
    fine.chunks(factor)
        .map(|c| {
            let mut db = vec![0.0; c[0].db.len()];
            for inc in c {
                for (a, b) in db.iter_mut().zip(&inc.db) {
                    *a += b;
                }
            }
            NoiseIncrement { db }
        })
        .collect()
}

/// Mean sup-norm residual between `𝒥` of the Burgers flow and the dual flow
/// under shared noise, for each step size, and the fitted convergence order.
pub fn duality_order_test(cfg: &DualityConfig) -> Result<TestReport> {
    check_slopes(cfg.n, &cfg.slopes, cfg.paths)?;
    if cfg.dts.len() < 2 || cfg.dts.iter().any(|d| !(*d > 0.0)) {
        return Err(invalid("dts", "need at least two positive step sizes"));
    }
    let fine = cfg.dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let factors: Vec<usize> = cfg
        .dts
        .iter()
        .map(|d| {
            let f = (d / fine).round() as usize;
            if (f as f64 * fine - d).abs() > 1e-9 * d {
                Err(invalid("dts", "every step must be an integer multiple of the finest"))
            } else {
                Ok(f)
            }
        })
        .collect::<Result<_>>()?;
    let lcm = factors.iter().cloned().max().unwrap_or(1);
    let fine_steps = {
        let s = (cfg.horizon / fine).round() as usize;
        s.div_ceil(lcm) * lcm
    };
    let mut report = TestReport::new("duality");
    let per_path: Vec<Vec<f64>> = (0..cfg.paths)
        .into_par_iter()
        .map(|p| -> Result<Vec<f64>> {
            let mut rng = RngStream::for_replica(cfg.seed, 81, p as u64);
            let u0 = sample_mu(&mut rng, cfg.n, &cfg.slopes, cfg.beta, &cfg.mcmc)?;
            let x0 = jk_stack(&u0)?;
            let noise: Vec<NoiseIncrement> = (0..fine_steps)
                .map(|_| NoiseIncrement::sample(&mut rng, cfg.n, fine))
                .collect();
            let guard = RngStream::for_replica(cfg.seed, 82, p as u64);
            let su = SdeState::new(u0, cfg.beta)?;
            let sx = SdeState::new(x0, cfg.beta)?;
            Ok(cfg
                .dts
                .iter()
                .zip(&factors)
                .map(|(dt, f)| {
                    let path = aggregate(&noise, *f);
                    let ut = evolve_with_noise(Flow::Sbe, &su, *dt, &path, &mut guard.clone());
                    let xt = evolve_with_noise(Flow::Dual, &sx, *dt, &path, &mut guard.clone());
                    match jk_stack(&ut.family) {
                        Ok(x_hat) => x_hat.max_abs_diff(&xt.family),
                        Err(_) => f64::INFINITY,
                    }
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let means: Vec<f64> = (0..cfg.dts.len())
        .map(|d| per_path.iter().map(|r| r[d]).sum::<f64>() / cfg.paths as f64)
        .collect();
    for (dt, m) in cfg.dts.iter().zip(&means) {
        report.at_most(format!("residual_dt={dt:e}_finite"), if m.is_finite() { 0.0 } else { 1.0 }, 0.0, cfg.paths);
        report.note(format!("dt={dt:e}: mean residual {m:.6e}"));
    }
    let order = fitted_order(&cfg.dts, &means);
    report.at_least("order", order, cfg.min_order, cfg.paths);
    Ok(report.finish())
}

/// Least-squares slope of `log residual` against `log dt`.
fn fitted_order(dts: &[f64], res: &[f64]) -> f64 {
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = res.iter().map(|r| r.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    if slope.is_finite() {
        slope
    } else {
        f64::NEG_INFINITY
    }
}
