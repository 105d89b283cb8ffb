//! Small numerical helpers shared by every module.

/// `log(e^a + e^b)` without overflow.
#[inline]
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Max-shifted `log Σ e^{x_i}`. Returns `-inf` for an empty iterator.
pub fn log_sum_exp<I>(values: I) -> f64
where
    I: IntoIterator<Item = f64>,
    I::IntoIter: Clone,
{
    let it = values.into_iter();
    let max = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let s: f64 = it.map(|v| (v - max).exp()).sum();
    max + s.ln()
}

/// `log|e^d − 1|` for `d ≠ 0`, accurate for both tiny and large `|d|`.
#[inline]
pub fn log_abs_expm1(d: f64) -> f64 {
    if d > 0.0 {
        if d > 1.0 {
            d + (-(-d).exp()).ln_1p()
        } else {
            d.exp_m1().ln()
        }
    } else if d < -1.0 {
        (-d.exp()).ln_1p()
    } else {
        (-d.exp_m1()).ln()
    }
}

/// Log of the trapezoid integral of `e^{g}` over `[0, 1]` with `g` sampled on a uniform grid.
pub fn log_trapezoid_exp(g: &[f64]) -> f64 {
    let m = g.len() - 1;
    let max = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut s = 0.0;
    for (j, &v) in g.iter().enumerate() {
        let w = if j == 0 || j == m { 0.5 } else { 1.0 };
        s += w * (v - max).exp();
    }
    max + (s / m as f64).ln()
}

/// Cumulative trapezoid integrals of `e^{g - shift}`; entry `j` is `∫_0^{x_j}`.
pub fn cumulative_trapezoid_exp(g: &[f64], shift: f64) -> Vec<f64> {
    let m = g.len() - 1;
    let h = 1.0 / m as f64;
    let mut out = Vec::with_capacity(g.len());
    out.push(0.0);
    let mut acc = 0.0;
    let mut prev = (g[0] - shift).exp();
    for &v in &g[1..] {
        let cur = (v - shift).exp();
        acc += 0.5 * h * (prev + cur);
        out.push(acc);
        prev = cur;
    }
    out
}

/// Pairwise summation; order-insensitive up to rounding for reductions.
pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 32 {
        return x.iter().sum();
    }
    let mid = x.len() / 2;
    pairwise_sum(&x[..mid]) + pairwise_sum(&x[mid..])
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Standard normal upper-tail probability `P(Z > z)`.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(z / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_add_exp_matches_direct() {
        let v = log_add_exp(0.5, 2.0);
        assert!((v - (0.5f64.exp() + 2f64.exp()).ln()).abs() < 1e-15);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 3.0), 3.0);
    }

    #[test]
    fn log_sum_exp_large_arguments() {
        let v = log_sum_exp([1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
    }

    #[test]
    fn log_abs_expm1_branches() {
        for &d in &[-50.0f64, -3.0, -0.5, -1e-9, 1e-9, 0.5, 3.0, 50.0, 800.0] {
            let expect = if d.abs() < 700.0 {
                d.exp_m1().abs().ln()
            } else {
                d
            };
            assert!((log_abs_expm1(d) - expect).abs() < 1e-12 * expect.abs().max(1.0), "{d}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(64);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-13);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((m - 2.0 / 11.0).abs() < 1e-13);
        let (x5, w5) = gauss_legendre(5);
        let q: f64 = x5.iter().zip(&w5).map(|(x, w)| w * x.powi(8)).sum();
        assert!((q - 2.0 / 9.0).abs() < 1e-13);
    }

    #[test]
    fn trapezoid_of_constant() {
        let g = vec![0.3; 11];
        assert!((log_trapezoid_exp(&g) - 0.3).abs() < 1e-14);
        let c = cumulative_trapezoid_exp(&g, 0.3);
        assert!((c[10] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normal_tail() {
        assert!((normal_sf(0.0) - 0.5).abs() < 1e-15);
        assert!((normal_sf(1.959963984540054) - 0.025).abs() < 1e-10);
    }
}
