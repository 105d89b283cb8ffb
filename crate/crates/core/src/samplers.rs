//! Samplers for log-inverse-gamma vectors, the conditioned measures ν and μ,
//! sloped Brownian bridges and the periodic KPZ horizon.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::cyclic::{dk_stack, CyclicVector, SlopedFamily};
use crate::error::{invalid, Error, Result};
use crate::numeric::{cumulative_trapezoid_exp, log_add_exp};

/// Draws `log(scale) − log G` with `G ~ Gamma(shape, 1)`.
///
/// The law has density proportional to `e^{−shape·x} e^{−scale·e^{−x}}`.
pub fn log_inv_gamma<R: Rng + ?Sized>(rng: &mut R, shape: f64, scale: f64) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(invalid("shape", format!("must be positive, got {shape}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid("scale", format!("must be positive, got {scale}")));
    }
    let g: f64 = Gamma::new(shape, 1.0)
        .map_err(|e| invalid("shape", e.to_string()))?
        .sample(rng);
    Ok(scale.ln() - g.ln())
}

/// `N` i.i.d. log-inverse-gamma entries with shape `gamma` and scale `β^{−2}`.
pub fn lig_vector<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    gamma: f64,
    beta: f64,
) -> Result<CyclicVector> {
    check_beta(beta)?;
    let scale = beta.powi(-2);
    let v = (0..n)
        .map(|_| log_inv_gamma(rng, gamma, scale))
        .collect::<Result<Vec<_>>>()?;
    CyclicVector::new(v)
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("must be positive, got {beta}")));
    }
    Ok(())
}

/// Tuning for the random-walk Metropolis sampler of ν.
#[derive(Clone, Debug, PartialEq)]
pub struct McmcConfig {
    /// Sweeps discarded before the first draw; the proposal scale adapts only here.
    pub burn_in: usize,
    /// Sweeps between successive draws of one chain.
    pub thin: usize,
    pub proposal_scale: f64,
    pub accept_low: f64,
    pub accept_high: f64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            burn_in: 400,
            thin: 10,
            proposal_scale: 1.0,
            accept_low: 0.30,
            accept_high: 0.45,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in + self.thin == 0 {
            return Err(invalid("mcmc", "chain length is zero"));
        }
        if !(self.proposal_scale > 0.0 && self.proposal_scale.is_finite()) {
            return Err(invalid("proposal_scale", "must be positive"));
        }
        if !(0.0 < self.accept_low && self.accept_low < self.accept_high && self.accept_high < 1.0) {
            return Err(invalid("acceptance band", "need 0 < low < high < 1"));
        }
        Ok(())
    }
}

const ADAPT_BATCH: usize = 25;

/// A Metropolis chain on the hyperplane `Σ x_i = θ` targeting `∏ e^{−β^{−2} e^{−x_i}}`.
///
/// Coordinates `1..N` are updated one at a time; `x_0 = θ − Σ_{i≥1} x_i` absorbs each move.
#[derive(Clone, Debug)]
pub struct NuChain {
    x: Vec<f64>,
    theta: f64,
    b: f64,
    scale: f64,
    thin: usize,
    proposed: u64,
    accepted: u64,
}

impl NuChain {
    /// Initializes from a shifted i.i.d. draw and runs the adaptive burn-in.
    pub fn new<R: Rng + ?Sized>(
        rng: &mut R,
        n: usize,
        theta: f64,
        beta: f64,
        cfg: &McmcConfig,
    ) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "period must be positive"));
        }
        if !theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        check_beta(beta)?;
        cfg.validate()?;
        let b = beta.powi(-2);
        let mut x = (0..n)
            .map(|_| log_inv_gamma(rng, 1.0, b))
            .collect::<Result<Vec<_>>>()?;
        let excess = (x.iter().sum::<f64>() - theta) / n as f64;
        for v in x.iter_mut() {
            *v -= excess;
        }
        let mut chain = Self {
            x,
            theta,
            b,
            scale: cfg.proposal_scale,
            thin: cfg.thin.max(1),
            proposed: 0,
            accepted: 0,
        };
        chain.fix_anchor();
        let mut done = 0;
        while done < cfg.burn_in {
            let batch = ADAPT_BATCH.min(cfg.burn_in - done);
            let (p0, a0) = (chain.proposed, chain.accepted);
            for _ in 0..batch {
                chain.sweep(rng);
            }
            done += batch;
            let p = chain.proposed - p0;
            if p > 0 {
                let rate = (chain.accepted - a0) as f64 / p as f64;
                if rate < cfg.accept_low {
                    chain.scale *= 0.75;
                } else if rate > cfg.accept_high {
                    chain.scale *= 1.3;
                }
            }
        }
        chain.proposed = 0;
        chain.accepted = 0;
        Ok(chain)
    }

    fn fix_anchor(&mut self) {
        let rest: f64 = self.x[1..].iter().sum();
        self.x[0] = self.theta - rest;
    }

    fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let n = self.x.len();
        for i in 1..n {
            let z: f64 = rng.sample(StandardNormal);
            let step = self.scale * z;
            let (xi, x0) = (self.x[i], self.x[0]);
            let (yi, y0) = (xi + step, x0 - step);
            let log_ratio =
                -self.b * ((-yi).exp() + (-y0).exp() - (-xi).exp() - (-x0).exp());
            let u: f64 = rng.random();
            self.proposed += 1;
            if log_ratio >= 0.0 || u.ln() < log_ratio {
                self.x[i] = yi;
                self.x[0] = y0;
                self.accepted += 1;
            }
        }
        self.fix_anchor();
    }

    /// Advances `thin` sweeps and returns the current state.
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> CyclicVector {
        for _ in 0..self.thin {
            self.sweep(rng);
        }
        self.state()
    }

    pub fn state(&self) -> CyclicVector {
        CyclicVector::from_raw(self.x.clone())
    }

    /// Acceptance rate since the end of burn-in.
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            f64::NAN
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }

    pub fn proposal_scale(&self) -> f64 {
        self.scale
    }
}

/// One draw from `ν_β^{N,(θ)}` from a fresh chain after burn-in.
pub fn sample_nu<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    theta: f64,
    beta: f64,
    cfg: &McmcConfig,
) -> Result<CyclicVector> {
    cfg.validate()?;
    if n == 1 {
        return CyclicVector::new(vec![theta]);
    }
    let chain = NuChain::new(rng, n, theta, beta, cfg)?;
    Ok(chain.state())
}

/// Draws independent `ν_β^{N,(θ_r)}` vectors, one per slope.
pub fn sample_nu_family<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    slopes: &[f64],
    beta: f64,
    cfg: &McmcConfig,
) -> Result<SlopedFamily> {
    if slopes.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let v = slopes
        .iter()
        .map(|&t| sample_nu(rng, n, t, beta, cfg))
        .collect::<Result<Vec<_>>>()?;
    SlopedFamily::new(v)
}

/// One draw from `μ_β^{N,(θ_1,…,θ_k)}`.
pub fn sample_mu<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    slopes: &[f64],
    beta: f64,
    cfg: &McmcConfig,
) -> Result<SlopedFamily> {
    dk_stack(&sample_nu_family(rng, n, slopes, beta, cfg)?)
}

/// Effective sample size of a scalar series by Geyer's initial positive sequence.
pub fn effective_sample_size(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 4 {
        return n as f64;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = series.iter().map(|v| v - mean).collect();
    let var = c.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if var == 0.0 {
        return n as f64;
    }
    let rho = |lag: usize| -> f64 {
        c[..n - lag].iter().zip(&c[lag..]).map(|(a, b)| a * b).sum::<f64>() / (n as f64 * var)
    };
    let mut tau = -1.0;
    let mut lag = 0;
    while lag + 1 < n {
        let pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        tau += 2.0 * pair;
        lag += 2;
    }
    n as f64 / tau.max(1.0 / n as f64)
}

/// A function on `[0,1]` sampled at `x_j = j/M`, pinned to `0` at the origin.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgePath {
    values: Vec<f64>,
}

impl BridgePath {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(invalid("grid", "need at least two grid points"));
        }
        if values[0] != 0.0 {
            return Err(invalid("values", "path must start at 0"));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { values })
    }

    fn from_raw(values: Vec<f64>) -> Self {
        Self { values }
    }

    /// Grid size `M`; there are `M + 1` values.
    pub fn grid(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn slope(&self) -> f64 {
        self.values[self.grid()]
    }

    pub fn x(&self, j: usize) -> f64 {
        j as f64 / self.grid() as f64
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::from_raw(self.values.iter().map(|v| c * v).collect())
    }

    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Paths on a common grid.
#[derive(Clone, Debug, PartialEq)]
pub struct BridgeFamily {
    paths: Vec<BridgePath>,
}

impl BridgeFamily {
    pub fn new(paths: Vec<BridgePath>) -> Result<Self> {
        let m = paths.first().ok_or(Error::EmptyFamily)?.grid();
        for p in &paths {
            if p.grid() != m {
                return Err(Error::GridMismatch(m, p.grid()));
            }
        }
        Ok(Self { paths })
    }

    pub fn paths(&self) -> &[BridgePath] {
        &self.paths
    }

    pub fn get(&self, r: usize) -> &BridgePath {
        &self.paths[r]
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }

    pub fn grid(&self) -> usize {
        self.paths[0].grid()
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.paths.iter().map(BridgePath::slope).collect()
    }
}

/// Brownian bridge with variance `β²` and slope `θ`, exact in law at the grid points.
pub fn sample_bridge<R: Rng + ?Sized>(rng: &mut R, m: usize, beta: f64, theta: f64) -> Result<BridgePath> {
    if m == 0 {
        return Err(invalid("grid", "M must be at least 1"));
    }
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(invalid("beta", format!("must be nonnegative, got {beta}")));
    }
    let step = beta / (m as f64).sqrt();
    let mut s = Vec::with_capacity(m + 1);
    s.push(0.0);
    let mut acc = 0.0;
    for _ in 0..m {
        let z: f64 = rng.sample(StandardNormal);
        acc += step * z;
        s.push(acc);
    }
    let end = s[m];
    let mf = m as f64;
    let values = s
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let x = j as f64 / mf;
            v - x * end + theta * x
        })
        .collect();
    Ok(BridgePath::from_raw(values))
}

fn check_grid(a: &BridgePath, b: &BridgePath) -> Result<()> {
    if a.grid() != b.grid() {
        return Err(Error::GridMismatch(a.grid(), b.grid()));
    }
    Ok(())
}

/// Forward and backward trapezoid integrals of `e^{g − max g}`.
fn split_integrals(g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let shift = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let fwd = cumulative_trapezoid_exp(g, shift);
    let rev: Vec<f64> = g.iter().rev().cloned().collect();
    let mut bwd = cumulative_trapezoid_exp(&rev, shift);
    bwd.reverse();
    (fwd, bwd)
}

/// `Φ²(f1, f2)` with trapezoid integrals on the shared grid.
pub fn phi2(f1: &BridgePath, f2: &BridgePath) -> Result<BridgePath> {
    check_grid(f1, f2)?;
    let m = f1.grid();
    let delta = f2.slope() - f1.slope();
    if delta == 0.0 {
        return Ok(f1.clone());
    }
    let g: Vec<f64> = f2.values.iter().zip(&f1.values).map(|(b, a)| b - a).collect();
    let (fwd, bwd) = split_integrals(&g);
    let mut out = Vec::with_capacity(m + 1);
    out.push(0.0);
    for j in 1..m {
        let (c, r) = (fwd[j], bwd[j]);
        let num = log_add_exp(r.ln(), c.ln() + delta);
        out.push(f1.values[j] + num - (c + r).ln());
    }
    out.push(f2.slope());
    Ok(BridgePath::from_raw(out))
}

/// `Φ^m(f_1, …, f_m)` by the right-nested `Φ²` recursion.
pub fn phi_m(fs: &[BridgePath]) -> Result<BridgePath> {
    let (last, rest) = fs.split_last().ok_or(Error::EmptyFamily)?;
    let mut acc = last.clone();
    for f in rest.iter().rev() {
        acc = phi2(f, &acc)?;
    }
    Ok(acc)
}

/// `Ψ^k`: the r-th output is `Φ^r(f_1, …, f_r)`.
pub fn psi_k(family: &BridgeFamily) -> Result<BridgeFamily> {
    let fs = family.paths();
    let out = (1..=fs.len())
        .map(|r| phi_m(&fs[..r]))
        .collect::<Result<Vec<_>>>()?;
    BridgeFamily::new(out)
}

/// Independent bridges of the given slopes mapped through `Ψ^k`.
pub fn sample_horizon<R: Rng + ?Sized>(
    rng: &mut R,
    m: usize,
    beta: f64,
    slopes: &[f64],
) -> Result<BridgeFamily> {
    if slopes.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let fs = slopes
        .iter()
        .map(|&t| sample_bridge(rng, m, beta, t))
        .collect::<Result<Vec<_>>>()?;
    psi_k(&BridgeFamily::new(fs)?)
}

/// Max-plus version of `Φ²`, maximizing over grid points.
pub fn phi2_trop(f1: &BridgePath, f2: &BridgePath) -> Result<BridgePath> {
    check_grid(f1, f2)?;
    let m = f1.grid();
    let g: Vec<f64> = f2.values.iter().zip(&f1.values).map(|(b, a)| b - a).collect();
    let delta = g[m];
    let mut suffix = g.clone();
    for j in (0..m).rev() {
        suffix[j] = suffix[j].max(suffix[j + 1]);
    }
    let at_origin = suffix[0];
    let mut out = Vec::with_capacity(m + 1);
    let mut prefix_below = f64::NEG_INFINITY;
    for j in 0..=m {
        let best = suffix[j].max(prefix_below + delta);
        out.push(if j == 0 { 0.0 } else { f1.values[j] + best - at_origin });
        prefix_below = prefix_below.max(g[j]);
    }
    Ok(BridgePath::from_raw(out))
}

/// Iterated max-plus map, the counterpart of [`phi_m`].
pub fn phi_m_trop(fs: &[BridgePath]) -> Result<BridgePath> {
    let (last, rest) = fs.split_last().ok_or(Error::EmptyFamily)?;
    let mut acc = last.clone();
    for f in rest.iter().rev() {
        acc = phi2_trop(f, &acc)?;
    }
    Ok(acc)
}

/// Normalized integral path `x ↦ ∫_0^x e^{β(B1+B2)} / ∫_0^1 e^{β(B1+B2)}` of two standard bridges.
pub fn derivative_limit_sample<R: Rng + ?Sized>(rng: &mut R, m: usize, beta: f64) -> Result<BridgePath> {
    let b1 = sample_bridge(rng, m, 1.0, 0.0)?;
    let b2 = sample_bridge(rng, m, 1.0, 0.0)?;
    let g: Vec<f64> = b1.values.iter().zip(&b2.values).map(|(a, b)| beta * (a + b)).collect();
    let shift = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let c = cumulative_trapezoid_exp(&g, shift);
    let total = c[m];
    Ok(BridgePath::from_raw(c.iter().map(|v| v / total).collect()))
}
