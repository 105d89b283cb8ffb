//! Euler–Maruyama integrators for the coupled Burgers system and its dual,
//! the coupled discrete-time chain, and the periodic polymer recursion.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cyclic::{coupled_step, CyclicVector, SlopedFamily};
use crate::error::{invalid, Error, Result};
use crate::numeric::log_sum_exp;
use crate::samplers::{lig_vector, sample_nu, McmcConfig};

/// A k-component state evolving in continuous time.
#[derive(Clone, Debug, PartialEq)]
pub struct SdeState {
    pub family: SlopedFamily,
    pub t: f64,
    pub beta: f64,
}

impl SdeState {
    pub fn new(family: SlopedFamily, beta: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(invalid("beta", format!("must be nonnegative, got {beta}")));
        }
        Ok(Self {
            family,
            t: 0.0,
            beta,
        })
    }
}

/// Brownian increments `ΔB_i` over one step, shared by every component.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseIncrement {
    pub db: Vec<f64>,
}

impl NoiseIncrement {
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, n: usize, dt: f64) -> Self {
        let sd = dt.sqrt();
        Self {
            db: (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect(),
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self { db: vec![0.0; n] }
    }

    /// Splits an increment over `dt` into two halves by Brownian-bridge sampling.
    pub fn split<R: Rng + ?Sized>(&self, rng: &mut R, dt: f64) -> (Self, Self) {
        let sd = (dt / 4.0).sqrt();
        let first: Vec<f64> = self
            .db
            .iter()
            .map(|&d| 0.5 * d + sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let second = self.db.iter().zip(&first).map(|(d, a)| d - a).collect();
        (Self { db: first }, Self { db: second })
    }
}

/// Which system of SDEs to integrate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Flow {
    /// `dU_{r,i} = ∇_i e^{−U_r} dt + β ∇_i dB`.
    Sbe,
    /// `dX_{r,i} = (∇_i e^{−X_r} − Σ_{m<r} Δ_i e^{−X_m}) dt + β ∇_i dB`.
    Dual,
}

fn noise_gradient(noise: &NoiseIncrement, beta: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| beta * (noise.db[i] - noise.db[(i + n - 1) % n]))
        .collect()
}

/// One explicit step of the coupled Burgers system.
pub fn em_step_sbe(state: &SdeState, dt: f64, noise: &NoiseIncrement) -> SdeState {
    let n = state.family.period();
    let g = noise_gradient(noise, state.beta, n);
    let vectors = state
        .family
        .vectors()
        .iter()
        .map(|u| {
            let e: Vec<f64> = u.values().iter().map(|v| (-v).exp()).collect();
            CyclicVector::from_raw(
                (0..n)
                    .map(|i| u.values()[i] + (e[i] - e[(i + n - 1) % n]) * dt + g[i])
                    .collect(),
            )
        })
        .collect();
    SdeState {
        family: SlopedFamily::new(vectors).expect("same shape"),
        t: state.t + dt,
        beta: state.beta,
    }
}

/// One explicit step of the dual system.
pub fn em_step_dual(state: &SdeState, dt: f64, noise: &NoiseIncrement) -> SdeState {
    let n = state.family.period();
    let g = noise_gradient(noise, state.beta, n);
    let mut lap_acc = vec![0.0; n];
    let mut vectors = Vec::with_capacity(state.family.len());
    for x in state.family.vectors() {
        let e: Vec<f64> = x.values().iter().map(|v| (-v).exp()).collect();
        let next = (0..n)
            .map(|i| {
                let drift = e[i] - e[(i + n - 1) % n] - lap_acc[i];
                x.values()[i] + drift * dt + g[i]
            })
            .collect();
        for i in 0..n {
            lap_acc[i] += (e[(i + 1) % n] + e[(i + n - 1) % n]) - 2.0 * e[i];
        }
        vectors.push(CyclicVector::from_raw(next));
    }
    SdeState {
        family: SlopedFamily::new(vectors).expect("same shape"),
        t: state.t + dt,
        beta: state.beta,
    }
}

fn step(flow: Flow, state: &SdeState, dt: f64, noise: &NoiseIncrement) -> SdeState {
    match flow {
        Flow::Sbe => em_step_sbe(state, dt, noise),
        Flow::Dual => em_step_dual(state, dt, noise),
    }
}

/// Largest halving depth of the stiffness guard.
pub const MAX_HALVINGS: u32 = 10;

fn is_stiff(state: &SdeState, dt: f64) -> bool {
    state
        .family
        .vectors()
        .iter()
        .any(|v| v.values().iter().any(|&x| (-x).exp() * dt > 1.0))
}

/// Takes one step, halving `dt` (up to [`MAX_HALVINGS`] times) while `e^{−x} dt > 1` somewhere.
pub fn guarded_step<R: Rng + ?Sized>(
    flow: Flow,
    state: &SdeState,
    dt: f64,
    noise: &NoiseIncrement,
    rng: &mut R,
) -> SdeState {
    guarded_inner(flow, state, dt, noise, rng, 0)
}

fn guarded_inner<R: Rng + ?Sized>(
    flow: Flow,
    state: &SdeState,
    dt: f64,
    noise: &NoiseIncrement,
    rng: &mut R,
    depth: u32,
) -> SdeState {
    if depth >= MAX_HALVINGS || !is_stiff(state, dt) {
        return step(flow, state, dt, noise);
    }
    let (a, b) = noise.split(rng, dt);
    let mid = guarded_inner(flow, state, dt / 2.0, &a, rng, depth + 1);
    guarded_inner(flow, &mid, dt / 2.0, &b, rng, depth + 1)
}

/// Final state plus snapshots taken every `stride` steps (including time 0).
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub final_state: SdeState,
    pub snapshots: Vec<SdeState>,
}

fn step_count(dt: f64, horizon: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(invalid("dt", format!("must be positive, got {dt}")));
    }
    if !(horizon >= 0.0 && horizon.is_finite()) {
        return Err(invalid("horizon", format!("must be nonnegative, got {horizon}")));
    }
    Ok((horizon / dt).round() as usize)
}

/// Integrates `flow` to time `horizon` with fresh noise each step.
pub fn evolve<R: Rng + ?Sized>(
    flow: Flow,
    state: &SdeState,
    dt: f64,
    horizon: f64,
    rng: &mut R,
    stride: Option<usize>,
) -> Result<Trajectory> {
    let steps = step_count(dt, horizon)?;
    let n = state.family.period();
    let mut cur = state.clone();
    let mut snapshots = Vec::new();
    if stride.is_some() {
        snapshots.push(cur.clone());
    }
    for s in 1..=steps {
        let noise = NoiseIncrement::sample(rng, n, dt);
        cur = guarded_step(flow, &cur, dt, &noise, rng);
        if let Some(k) = stride {
            if k > 0 && s % k == 0 {
                snapshots.push(cur.clone());
            }
        }
    }
    Ok(Trajectory {
        final_state: cur,
        snapshots,
    })
}

/// Integrates along a stored noise path; `rng` only feeds the stiffness guard.
pub fn evolve_with_noise<R: Rng + ?Sized>(
    flow: Flow,
    state: &SdeState,
    dt: f64,
    path: &[NoiseIncrement],
    rng: &mut R,
) -> SdeState {
    let mut cur = state.clone();
    for noise in path {
        cur = guarded_step(flow, &cur, dt, noise, rng);
    }
    cur
}

/// Law of the driving weights of the coupled chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightMode {
    /// `N` i.i.d. log-inverse-gamma weights with shape `gamma` and scale `β^{−2}`.
    IidLig { gamma: f64, beta: f64 },
    /// The same weights conditioned on summing to `alpha`.
    Conditioned { alpha: f64, beta: f64 },
}

impl WeightMode {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize, cfg: &McmcConfig) -> Result<CyclicVector> {
        match *self {
            WeightMode::IidLig { gamma, beta } => lig_vector(rng, n, gamma, beta),
            WeightMode::Conditioned { alpha, beta } => sample_nu(rng, n, alpha, beta, cfg),
        }
    }
}

/// One step of the coupled chain with freshly drawn weights.
pub fn chain_step<R: Rng + ?Sized>(
    state: &SlopedFamily,
    rng: &mut R,
    mode: WeightMode,
    cfg: &McmcConfig,
) -> Result<SlopedFamily> {
    let w = mode.sample(rng, state.period(), cfg)?;
    coupled_step(&w, state)
}

/// Layer-to-layer ratio update of the periodic inverse-gamma polymer.
///
/// With `log F(i) = Σ_{ℓ=1}^{i} U_ℓ` extended with slope `𝔰(U)` per period,
/// `log F'(i) = log Σ_{j=i−N}^{i−1} F(j) Π_{ℓ=j+1}^{i} e^{W_ℓ} − log(1 − e^{𝔰(W)−𝔰(U)})`
/// and the output is `log F'(i) − log F'(i−1)`.
pub fn polymer_ratio_layer(u_prev: &CyclicVector, w: &CyclicVector) -> Result<CyclicVector> {
    if u_prev.period() != w.period() {
        return Err(Error::PeriodMismatch(u_prev.period(), w.period()));
    }
    let (su, sw) = (u_prev.slope(), w.slope());
    if su <= sw {
        return Err(Error::Divergent { lower: sw, upper: su });
    }
    let n = u_prev.period() as i64;
    let cum = |v: &CyclicVector, j: i64| -> f64 {
        let q = j.div_euclid(n);
        let r = j.rem_euclid(n);
        q as f64 * v.slope() + (1..=r).map(|l| v.at(l)).sum::<f64>()
    };
    let geometric = -(-(sw - su).exp()).ln_1p();
    let log_f_next = |i: i64| -> f64 {
        let wi = cum(w, i);
        log_sum_exp((i - n..i).map(|j| cum(u_prev, j) + wi - cum(w, j))) + geometric
    };
    let lf: Vec<f64> = (-1..n).map(log_f_next).collect();
    Ok(CyclicVector::from_raw(
        (0..n as usize).map(|i| lf[i + 1] - lf[i]).collect(),
    ))
}
