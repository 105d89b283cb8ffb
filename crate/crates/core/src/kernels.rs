//! Gaussian, Poisson and semi-discrete heat kernels, their slope-weighted
//! periodizations, and the Dirichlet space-time integral of `ρ²`.

use statrs::function::gamma::{gamma, ln_gamma};
use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::numeric::gauss_legendre;

/// `ρ(t, x) = (2πt)^{−1/2} e^{−x²/2t}` for `t > 0`, else `0`.
pub fn gauss_kernel(t: f64, x: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    (-x * x / (2.0 * t)).exp() / (2.0 * PI * t).sqrt()
}

/// `log q(t, n)`; `-inf` outside `t ≥ 0, n ≥ 0`.
pub fn log_poisson_kernel(t: f64, n: i64) -> f64 {
    if t < 0.0 || n < 0 {
        return f64::NEG_INFINITY;
    }
    if t == 0.0 {
        return if n == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    -t + nf * t.ln() - ln_gamma(nf + 1.0)
}

/// `q(t, n) = e^{−t} tⁿ / n!`, evaluated in log-space.
pub fn poisson_kernel(t: f64, n: i64) -> f64 {
    log_poisson_kernel(t, n).exp()
}

/// `⌊tN² + yN⌋` as one fused multiply-add.
fn lattice_index(n: f64, t: f64, y: f64) -> i64 {
    (t * n).mul_add(n, y * n).floor() as i64
}

/// `p_N(t, y | s, x) = N · q((t−s)N², ⌊tN²+yN⌋ − ⌊sN²+xN⌋)`.
pub fn pn_kernel(n: usize, t: f64, y: f64, s: f64, x: f64) -> f64 {
    let nf = n as f64;
    let idx = lattice_index(nf, t, y) - lattice_index(nf, s, x);
    nf * poisson_kernel((t - s) * nf * nf, idx)
}

/// Truncation control for the periodized kernels.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelParams {
    pub theta: f64,
    pub eps: f64,
    pub r_max: u32,
}

impl KernelParams {
    pub fn new(theta: f64, eps: f64, r_max: u32) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(invalid("eps", format!("must lie in (0,1), got {eps}")));
        }
        if r_max < 3 {
            return Err(invalid("r_max", format!("must be at least 3, got {r_max}")));
        }
        if !theta.is_finite() {
            return Err(invalid("theta", "must be finite"));
        }
        Ok(Self { theta, eps, r_max })
    }
}

/// Outcome of a periodized sum.
#[derive(Clone, Debug, PartialEq)]
pub struct PeriodizedValue {
    pub value: f64,
    /// Largest `|r|` included.
    pub radius: u32,
    /// `false` when `r_max` was hit before the tolerance test succeeded.
    pub converged: bool,
}

fn periodize<F: Fn(i64) -> f64>(params: &KernelParams, term: F) -> PeriodizedValue {
    let mut acc = term(0);
    let mut prev = acc;
    for r in 1..=params.r_max {
        let ri = r as i64;
        let shell = (-params.theta * r as f64).exp() * term(ri)
            + (params.theta * r as f64).exp() * term(-ri);
        acc += shell;
        if shell <= params.eps * acc && shell <= prev {
            return PeriodizedValue {
                value: acc,
                radius: r,
                converged: true,
            };
        }
        prev = shell;
    }
    PeriodizedValue {
        value: acc,
        radius: params.r_max,
        converged: false,
    }
}

/// `Σ_r e^{−θr} ρ(t−s, y−x+r)` summed over growing symmetric radii.
pub fn periodized_kernel(params: &KernelParams, t: f64, y: f64, s: f64, x: f64) -> Result<PeriodizedValue> {
    if t <= s {
        return Err(invalid("t", "must exceed s"));
    }
    Ok(periodize(params, |r| gauss_kernel(t - s, y - x + r as f64)))
}

/// `Σ_r e^{−θr} p_N(t, y+r | s, x)` with the same truncation rule.
pub fn periodized_pn_kernel(
    params: &KernelParams,
    n: usize,
    t: f64,
    y: f64,
    s: f64,
    x: f64,
) -> Result<PeriodizedValue> {
    if t <= s {
        return Err(invalid("t", "must exceed s"));
    }
    Ok(periodize(params, |r| pn_kernel(n, t, y + r as f64, s, x)))
}

/// Closed form of `∫_{0<t_1<…<t_k<τ} ∫_{ℝ^k} Π_{i=0}^{k} ρ²(t_{i+1}−t_i, y_{i+1}−y_i)`
/// with `t_0 = y_0 = 0`, `t_{k+1} = τ`, `y_{k+1} = z`:
/// `τ^{k/2} Γ(1/2)^{k+1} / (Γ((k+1)/2) 2^k π^{k/2}) · ρ²(τ, z)`.
pub fn dirichlet_integral(k: u32, tau: f64, z: f64) -> Result<f64> {
    dirichlet_with_exponent(k, tau, z, k as f64 / 2.0)
}

/// The same prefactor with `τ^{(k+3)/2}` in place of `τ^{k/2}`; exceeds the quadrature by `τ^{3/2}`.
pub fn dirichlet_integral_exponent_variant(k: u32, tau: f64, z: f64) -> Result<f64> {
    dirichlet_with_exponent(k, tau, z, (k as f64 + 3.0) / 2.0)
}

fn dirichlet_with_exponent(k: u32, tau: f64, z: f64, power: f64) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k", "must be at least 1"));
    }
    if !(tau > 0.0) {
        return Err(invalid("tau", format!("must be positive, got {tau}")));
    }
    let kf = k as f64;
    let pref = tau.powf(power) * PI.sqrt().powf(kf + 1.0)
        / (gamma((kf + 1.0) / 2.0) * 2f64.powf(kf) * PI.powf(kf / 2.0));
    Ok(pref * gauss_kernel(tau, z).powi(2))
}

/// Gauss–Legendre rule on `[a, b]` built from a reference rule on `[-1, 1]`.
struct Rule {
    x: Vec<f64>,
    w: Vec<f64>,
}

impl Rule {
    fn new(n: usize) -> Self {
        let (x, w) = gauss_legendre(n);
        Self { x, w }
    }

    fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.x.iter().zip(&self.w).map(|(x, w)| w * f(c + h * x)).sum::<f64>() * h
    }
}

/// Independent quadrature of the Dirichlet integral for `k ∈ {1, 2}`.
///
/// Time variables use `t = a + (b−a)(1−cos u)/2` to absorb the inverse square-root
/// endpoint singularities. Each spatial integral is a Gauss–Legendre rule on a
/// window of ±`width` standard deviations around the centre of its Gaussian factor.
pub fn dirichlet_quadrature(k: u32, tau: f64, z: f64, points: usize) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(invalid("tau", format!("must be positive, got {tau}")));
    }
    let rule = Rule::new(points);
    let rho2 = |t: f64, y: f64| gauss_kernel(t, y).powi(2);
    let width = 12.0;
    let cos_map = |a: f64, b: f64, u: f64| (a + (b - a) * 0.5 * (1.0 - u.cos()), (b - a) * 0.5 * u.sin());
    match k {
        1 => Ok(rule.integrate(0.0, PI, |u| {
            let (t1, jac) = cos_map(0.0, tau, u);
            let (a, b) = (t1, tau - t1);
            let centre = z * a / tau;
            let sd = (a * b / (2.0 * tau)).sqrt();
            let inner = rule.integrate(centre - width * sd, centre + width * sd, |y1| {
                rho2(a, y1) * rho2(b, z - y1)
            });
            jac * inner
        })),
        2 => Ok(rule.integrate(0.0, PI, |u| {
            let (t1, jac1) = cos_map(0.0, tau, u);
            rule.integrate(0.0, PI, |v| {
                let (t2, jac2) = cos_map(t1, tau, v);
                let (a, b, c) = (t1, t2 - t1, tau - t2);
                let centre1 = z * a / tau;
                let sd1 = (a * (b + c) / (2.0 * tau)).sqrt();
                let outer = rule.integrate(centre1 - width * sd1, centre1 + width * sd1, |y1| {
                    let centre2 = y1 + (z - y1) * b / (b + c);
                    let sd2 = (b * c / (2.0 * (b + c))).sqrt();
                    let inner = rule.integrate(centre2 - width * sd2, centre2 + width * sd2, |y2| {
                        rho2(b, y2 - y1) * rho2(c, z - y2)
                    });
                    rho2(a, y1) * inner
                });
                jac1 * jac2 * outer
            })
        })),
        _ => Err(invalid("k", "quadrature oracle supports k = 1 or 2 only")),
    }
}

/// Poisson mass summed until the terms past the mode drop below `tol`.
pub fn poisson_total_mass(t: f64, tol: f64) -> f64 {
    let mut s = 0.0;
    let mut n = 0i64;
    loop {
        let q = poisson_kernel(t, n);
        s += q;
        if n as f64 > t && q < tol * s {
            return s;
        }
        n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_kernel_values() {
        assert!((gauss_kernel(1.0, 0.0) - 0.398_942_280_401_432_7).abs() < 1e-15);
        assert_eq!(gauss_kernel(-1.0, 0.0), 0.0);
        assert_eq!(gauss_kernel(0.0, 0.0), 0.0);
    }

    #[test]
    fn gauss_kernel_normalized() {
        let rule = Rule::new(64);
        let t = 0.5;
        let s: f64 = (-20..20)
            .map(|c| rule.integrate(c as f64 * 0.5, (c + 1) as f64 * 0.5, |x| gauss_kernel(t, x)))
            .sum();
        assert!((s - 1.0).abs() < 1e-8);
    }

    #[test]
    fn poisson_kernel_values() {
        assert!((poisson_kernel(2.3, 0) - (-2.3f64).exp()).abs() < 1e-15);
        assert_eq!(poisson_kernel(2.3, -1), 0.0);
        assert!((poisson_total_mass(2.0, 1e-17) - 1.0).abs() < 1e-10);
        let far = log_poisson_kernel(1e7, 10_000_000);
        assert!(far.is_finite());
        assert!((far - (-0.5 * (2.0 * PI * 1e7).ln())).abs() < 1e-6);
    }

    #[test]
    fn pn_kernel_vanishes_for_negative_index() {
        assert_eq!(pn_kernel(10, 0.0, -0.5, 0.0, 0.0), 0.0);
        assert_eq!(pn_kernel(10, 0.5, 0.0, 1.0, 0.0), 0.0);
    }

    #[test]
    fn pn_kernel_near_gaussian() {
        let d: Vec<f64> = [100usize, 300, 1000]
            .iter()
            .map(|&n| (pn_kernel(n, 1.0, 0.0, 0.0, 0.0) - gauss_kernel(1.0, 0.0)).abs())
            .collect();
        assert!(d[2] < 2e-2);
        assert!(d[0] > d[1] && d[1] > d[2], "{d:?}");
    }

    #[test]
    fn periodized_small_time_dominated_by_centre() {
        let p = KernelParams::new(0.0, 1e-30, 50).unwrap();
        let v = periodized_kernel(&p, 0.01, 0.3, 0.0, 0.3).unwrap();
        let centre = gauss_kernel(0.01, 0.0);
        assert!((v.value - centre) / centre < 1e-20);
    }

    #[test]
    fn periodized_two_ways_agree() {
        let p = KernelParams::new(0.0, 1e-17, 200).unwrap();
        let v = periodized_kernel(&p, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(v.converged);
        let fixed: f64 = (-50i64..=50).map(|r| gauss_kernel(1.0, r as f64)).sum();
        assert!((v.value - fixed).abs() < 1e-12);
    }

    #[test]
    fn periodized_slope_weight_increases_value() {
        let p0 = KernelParams::new(0.0, 1e-14, 100).unwrap();
        let p5 = KernelParams::new(5.0, 1e-14, 100).unwrap();
        let a = periodized_kernel(&p0, 1.0, 0.0, 0.0, 0.0).unwrap();
        let b = periodized_kernel(&p5, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(b.converged && b.value > a.value);
    }

    #[test]
    fn periodized_cap_is_reported() {
        let p = KernelParams::new(5.0, 1e-14, 3).unwrap();
        let v = periodized_kernel(&p, 1.0, 0.0, 0.0, 0.0).unwrap();
        assert!(!v.converged);
        assert_eq!(v.radius, 3);
        assert!(KernelParams::new(0.0, 0.0, 10).is_err());
        assert!(KernelParams::new(0.0, 0.1, 2).is_err());
    }

    #[test]
    fn dirichlet_example_value() {
        let v = dirichlet_integral(1, 1.0, 0.0).unwrap();
        let expect = PI.sqrt() / 2.0 * gauss_kernel(1.0, 0.0).powi(2);
        assert!((v - expect).abs() < 1e-15);
        assert!((v - 0.141_047).abs() < 1e-5);
        assert!(dirichlet_integral(1, 0.0, 0.0).is_err());
        assert!(dirichlet_integral(1, -1.0, 0.0).is_err());
    }

    #[test]
    fn dirichlet_ratio_shift_invariant() {
        for &z in &[0.0, 0.4, -1.3] {
            let r = dirichlet_integral(1, 0.7, z).unwrap() / gauss_kernel(0.7, z).powi(2);
            let r0 = dirichlet_integral(1, 0.7, 0.0).unwrap() / gauss_kernel(0.7, 0.0).powi(2);
            assert!((r / r0 - 1.0).abs() < 1e-14);
        }
    }
}
