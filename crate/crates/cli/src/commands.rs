use anyhow::Result;
use clap::{Args, FromArgMatches};
use pitman_core::cyclic::{coupled_step, multiline_step};
use pitman_core::dynamics::{evolve, Flow, SdeState, WeightMode};
use pitman_core::kernels::{gauss_kernel, pn_kernel};
use pitman_core::samplers::{sample_bridge, sample_horizon, sample_mu, sample_nu, sample_nu_family, BridgeFamily};
use pitman_core::verify::*;
use pitman_core::{McmcConfig, RngStream, SlopedFamily};
use rayon::prelude::*;

use crate::args::*;
use crate::output::{fmt_f64, Table};

/// Result of a command that ran to completion.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
}

impl McmcArgs {
    fn config(&self) -> McmcConfig {
        McmcConfig {
            burn_in: self.burn_in,
            thin: self.thin,
            ..McmcConfig::default()
        }
    }
}

impl WeightArgs {
    fn mode(&self, beta: f64) -> WeightMode {
        match self.mode {
            ModeArg::Iid => WeightMode::IidLig { gamma: self.gamma, beta },
            ModeArg::Conditioned => WeightMode::Conditioned { alpha: self.alpha, beta },
        }
    }
}

/// Parses an argument group from an empty command line, yielding its declared defaults.
fn defaults<T: Args + FromArgMatches>() -> T {
    let cmd = T::augment_args(clap::Command::new("defaults").allow_negative_numbers(true));
    T::from_arg_matches(&cmd.get_matches_from(["defaults"])).expect("argument defaults parse")
}

pub fn dispatch(cli: &Cli) -> Result<Outcome> {
    let seed = cli.seed;
    match &cli.command {
        Command::Sample(c) => sample(c, seed).map(|_| Outcome::Pass),
        Command::Evolve(c) => evolve_cmd(c, seed).map(|_| Outcome::Pass),
        Command::Verify(c) => verify(c, seed),
        Command::Estimate(c) => estimate(c, seed).map(|_| Outcome::Pass),
        Command::Kernels(KernelsCmd::Table(a)) => kernel_table(a).map(|_| Outcome::Pass),
    }
}

fn family_rows(table: &mut Table, lead: &[String], fam: &SlopedFamily) {
    for (r, v) in fam.vectors().iter().enumerate() {
        let slope = fmt_f64(v.slope());
        for (i, x) in v.values().iter().enumerate() {
            let mut row = lead.to_vec();
            row.extend([(r + 1).to_string(), slope.clone(), i.to_string(), fmt_f64(*x)]);
            table.push(row);
        }
    }
}

fn bridge_rows(table: &mut Table, sample: usize, fam: &BridgeFamily, beta: f64) {
    let m = fam.grid();
    for (r, p) in fam.paths().iter().enumerate() {
        let slope = fmt_f64(p.slope());
        for (j, &v) in p.values().iter().enumerate() {
            let gap = if r == 0 { 0.0 } else { v - fam.get(r - 1).values()[j] };
            table.push(vec![
                sample.to_string(),
                (r + 1).to_string(),
                slope.clone(),
                fmt_f64(j as f64 / m as f64),
                fmt_f64(v),
                fmt_f64(v / beta),
                fmt_f64(gap),
            ]);
        }
    }
}

fn par_replicas<T: Send>(count: usize, f: impl Fn(usize) -> pitman_core::Result<T> + Sync + Send) -> Result<Vec<T>> {
    Ok((0..count).into_par_iter().map(f).collect::<pitman_core::Result<Vec<T>>>()?)
}

fn sample(cmd: &SampleCmd, seed: u64) -> Result<()> {
    match cmd {
        SampleCmd::Nu(a) => {
            let cfg = a.mcmc.config();
            let draws = par_replicas(a.samples, |j| {
                let mut rng = RngStream::for_replica(seed, 201, j as u64);
                sample_nu(&mut rng, a.n, a.theta, a.beta, &cfg)
            })?;
            let mut t = Table::new(&["sample", "component", "slope", "i", "value"]);
            for (j, v) in draws.into_iter().enumerate() {
                family_rows(&mut t, &[j.to_string()], &SlopedFamily::new(vec![v])?);
            }
            t.write(a.out.out.as_deref())
        }
        SampleCmd::Mu(a) => {
            let cfg = a.mcmc.config();
            let draws = par_replicas(a.samples, |j| {
                let mut rng = RngStream::for_replica(seed, 202, j as u64);
                sample_mu(&mut rng, a.n, &a.slopes.0, a.beta, &cfg)
            })?;
            let mut t = Table::new(&["sample", "component", "slope", "i", "value"]);
            for (j, f) in draws.iter().enumerate() {
                family_rows(&mut t, &[j.to_string()], f);
            }
            t.write(a.out.out.as_deref())
        }
        SampleCmd::Bridge(a) => {
            let draws = par_replicas(a.samples, |j| {
                let mut rng = RngStream::for_replica(seed, 203, j as u64);
                BridgeFamily::new(vec![sample_bridge(&mut rng, a.n_grid, a.beta, a.theta)?])
            })?;
            let mut t = Table::new(&["sample", "component", "slope", "x", "value", "scaled", "gap"]);
            for (j, f) in draws.iter().enumerate() {
                bridge_rows(&mut t, j, f, a.beta);
            }
            t.write(a.out.out.as_deref())
        }
        SampleCmd::Horizon(a) => {
            let draws = par_replicas(a.samples, |j| {
                let mut rng = RngStream::for_replica(seed, 204, j as u64);
                sample_horizon(&mut rng, a.n_grid, a.beta, &a.slopes.0)
            })?;
            let mut t = Table::new(&["sample", "component", "slope", "x", "value", "scaled", "gap"]);
            for (j, f) in draws.iter().enumerate() {
                bridge_rows(&mut t, j, f, a.beta);
            }
            t.write(a.out.out.as_deref())
        }
    }
}

fn evolve_cmd(cmd: &EvolveCmd, seed: u64) -> Result<()> {
    match cmd {
        EvolveCmd::Sde(a) | EvolveCmd::Dual(a) => {
            let (flow, tag) = match cmd {
                EvolveCmd::Sde(_) => (Flow::Sbe, 211),
                _ => (Flow::Dual, 212),
            };
            let cfg = a.mcmc.config();
            let runs = par_replicas(a.replicas, |j| {
                let mut rng = RngStream::for_replica(seed, tag, j as u64);
                let init = match flow {
                    Flow::Sbe => sample_mu(&mut rng, a.n, &a.slopes.0, a.beta, &cfg)?,
                    Flow::Dual => sample_nu_family(&mut rng, a.n, &a.slopes.0, a.beta, &cfg)?,
                };
                let state = SdeState::new(init, a.beta)?;
                Ok(evolve(flow, &state, a.dt, a.horizon, &mut rng, Some(a.stride))?.snapshots)
            })?;
            let mut t = Table::new(&["replica", "t", "component", "slope", "i", "value"]);
            for (j, snaps) in runs.iter().enumerate() {
                for s in snaps {
                    family_rows(&mut t, &[j.to_string(), fmt_f64(s.t)], &s.family);
                }
            }
            t.write(a.out.out.as_deref())
        }
        EvolveCmd::Chain(a) | EvolveCmd::Multiline(a) => {
            let (multiline, tag) = match cmd {
                EvolveCmd::Multiline(_) => (true, 214),
                _ => (false, 213),
            };
            let cfg = a.mcmc.config();
            let mode = a.weights.mode(a.beta);
            let runs = par_replicas(a.replicas, |j| {
                let mut rng = RngStream::for_replica(seed, tag, j as u64);
                let mut f = if multiline {
                    sample_nu_family(&mut rng, a.n, &a.slopes.0, a.beta, &cfg)?
                } else {
                    sample_mu(&mut rng, a.n, &a.slopes.0, a.beta, &cfg)?
                };
                let mut path = vec![f.clone()];
                for _ in 0..a.steps {
                    let w = mode.sample(&mut rng, a.n, &cfg)?;
                    f = if multiline {
                        multiline_step(&w, &f)?.0
                    } else {
                        coupled_step(&w, &f)?
                    };
                    path.push(f.clone());
                }
                Ok(path)
            })?;
            let mut t = Table::new(&["replica", "step", "component", "slope", "i", "value"]);
            for (j, path) in runs.iter().enumerate() {
                for (s, f) in path.iter().enumerate() {
                    family_rows(&mut t, &[j.to_string(), s.to_string()], f);
                }
            }
            t.write(a.out.out.as_deref())
        }
    }
}

fn report_table(reports: &[TestReport]) -> Table {
    let mut t = Table::new(&["suite", "check", "statistic", "threshold", "samples", "pass"]);
    for r in reports {
        for c in &r.checks {
            t.push(vec![
                r.suite.clone(),
                c.name.clone(),
                fmt_f64(c.statistic),
                fmt_f64(c.threshold),
                c.samples.to_string(),
                c.passed.to_string(),
            ]);
        }
    }
    t
}

fn finish(reports: Vec<TestReport>, out: &OutArg) -> Result<Outcome> {
    for r in &reports {
        println!("{r}");
    }
    if let Some(p) = &out.out {
        report_table(&reports).write(Some(p))?;
    }
    let pass = reports.iter().all(TestReport::passed);
    println!("overall: {}", if pass { "PASS" } else { "FAIL" });
    Ok(if pass { Outcome::Pass } else { Outcome::Fail })
}

/// Runs one suite; `verify all` calls this for every suite with default arguments.
fn run_suite(cmd: &VerifyCmd, seed: u64) -> Result<Vec<TestReport>> {
    Ok(match cmd {
        VerifyCmd::Algebra(a) => vec![algebra_suite(&AlgebraConfig {
            n_max: a.n_max,
            k_max: a.k_max,
            families: a.families,
            seed,
        })?],
        VerifyCmd::Burke(a) => vec![burke_test(&BurkeConfig {
            n: a.n,
            gamma1: a.gamma1,
            gamma2: a.gamma2,
            beta: a.beta,
            samples: a.samples,
            seed,
        })?],
        VerifyCmd::ChainInvariance(a) => vec![invariance_chain_test(&ChainConfig {
            n: a.n,
            slopes: a.slopes.0.clone(),
            beta: a.beta,
            mode: a.weights.mode(a.beta),
            steps: a.steps,
            samples: a.samples,
            seed,
            mcmc: a.mcmc.config(),
            initial: match a.initial {
                InitialArg::Mu => InitialLaw::Mu,
                InitialArg::Nu => InitialLaw::IndependentNu,
            },
        })?],
        VerifyCmd::SdeInvariance(a) => vec![invariance_sde_test(&SdeConfig {
            n: a.n,
            slopes: a.slopes.0.clone(),
            beta: a.beta,
            dt: a.dt,
            horizon: a.horizon,
            samples: a.samples,
            seed,
            mcmc: a.mcmc.config(),
        })?],
        VerifyCmd::Duality(a) => vec![duality_order_test(&DualityConfig {
            n: a.n,
            slopes: a.slopes.0.clone(),
            beta: a.beta,
            horizon: a.horizon,
            dts: a.dts.0.clone(),
            paths: a.paths,
            seed,
            mcmc: a.mcmc.config(),
            min_order: a.min_order,
        })?],
        VerifyCmd::Kernels(a) => vec![kernels_suite(&KernelSuiteConfig {
            sizes: a.sizes.0.clone(),
            quadrature_points: a.quadrature_points,
            ..KernelSuiteConfig::default()
        })?],
        VerifyCmd::Jacobian(a) => vec![jacobian_suite(a.points, a.n_max, a.h, seed)?],
        VerifyCmd::Polymer(a) => vec![polymer_suite(a.samples, a.n_max, seed)?],
        VerifyCmd::Horizon(a) => vec![horizon_suite(&HorizonConfig {
            grid: a.n_grid,
            beta: a.beta,
            slopes: a.slopes.0.clone(),
            sandwich_draws: a.sandwich_draws,
            variance_draws: a.variance_draws,
            seed,
        })?],
        VerifyCmd::Limits(a) => {
            let cfg = LimitConfig {
                grid: a.n_grid,
                tropical_grid: a.tropical_grid,
                draws: a.draws,
                seed,
            };
            vec![beta_zero_limit_check(&cfg)?, tropical_limit_check(&cfg)?]
        }
        VerifyCmd::Covariance(a) => vec![covariance_suite(&CovarianceConfig {
            beta: a.beta,
            small_beta: a.small_beta,
            grid: a.n_grid,
            samples: a.samples,
            seed,
        })?],
        VerifyCmd::All(_) => {
            let suites = [
                VerifyCmd::Algebra(defaults()),
                VerifyCmd::Polymer(defaults()),
                VerifyCmd::Jacobian(defaults()),
                VerifyCmd::Burke(defaults()),
                VerifyCmd::ChainInvariance(defaults()),
                VerifyCmd::SdeInvariance(defaults()),
                VerifyCmd::Duality(defaults()),
                VerifyCmd::Horizon(defaults()),
                VerifyCmd::Limits(defaults()),
                VerifyCmd::Covariance(defaults()),
                VerifyCmd::Kernels(defaults()),
            ];
            let mut all = Vec::new();
            for s in &suites {
                all.extend(run_suite(s, seed)?);
            }
            all
        }
    })
}

fn verify(cmd: &VerifyCmd, seed: u64) -> Result<Outcome> {
    let out = match cmd {
        VerifyCmd::Algebra(a) => &a.out,
        VerifyCmd::Burke(a) => &a.out,
        VerifyCmd::ChainInvariance(a) => &a.out,
        VerifyCmd::SdeInvariance(a) => &a.out,
        VerifyCmd::Duality(a) => &a.out,
        VerifyCmd::Kernels(a) => &a.out,
        VerifyCmd::Jacobian(a) => &a.out,
        VerifyCmd::Polymer(a) => &a.out,
        VerifyCmd::Horizon(a) => &a.out,
        VerifyCmd::Limits(a) => &a.out,
        VerifyCmd::Covariance(a) => &a.out,
        VerifyCmd::All(o) => o,
    };
    finish(run_suite(cmd, seed)?, out)
}

fn estimate(cmd: &EstimateCmd, seed: u64) -> Result<()> {
    match cmd {
        EstimateCmd::Sigma2(a) => {
            let e = estimate_sigma2(a.beta, a.n_grid, a.samples, seed)?;
            let mut t = Table::new(&["beta", "sigma2_hat", "stderr"]);
            t.push(vec![fmt_f64(a.beta), fmt_f64(e.value), fmt_f64(e.stderr)]);
            t.write(a.out.out.as_deref())
        }
        EstimateCmd::RCovariance(a) => {
            let mut t = Table::new(&["theta", "R_hat", "stderr"]);
            for theta in a.theta_grid.points() {
                let e = estimate_r(theta, a.beta, a.n_grid, a.samples, seed)?;
                t.push(vec![fmt_f64(theta), fmt_f64(e.value), fmt_f64(e.stderr)]);
            }
            t.write(a.out.out.as_deref())
        }
    }
}

fn kernel_table(a: &KernelTableArgs) -> Result<()> {
    let mut t = Table::new(&["n", "tau", "y", "pn", "rho", "abs_error"]);
    for &n in &a.sizes.0 {
        for ia in 0..5 {
            let tau = 0.25 + 1.75 * ia as f64 / 4.0;
            for ib in 0..5 {
                let y = -1.0 + 2.0 * ib as f64 / 4.0;
                let (p, g) = (pn_kernel(n, tau, y, 0.0, 0.0), gauss_kernel(tau, y));
                t.push(vec![
                    n.to_string(),
                    fmt_f64(tau),
                    fmt_f64(y),
                    fmt_f64(p),
                    fmt_f64(g),
                    fmt_f64((p - g).abs()),
                ]);
            }
        }
    }
    t.write(a.out.out.as_deref())
}
