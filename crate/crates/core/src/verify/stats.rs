//! Two-sample statistics and moment summaries.

use crate::error::{Error, Result};
use crate::numeric::{normal_sf, pairwise_sum};

/// Per-feature mean, variance and standard error of the mean.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSummary {
    pub count: usize,
    pub mean: Vec<f64>,
    pub var: Vec<f64>,
    pub se: Vec<f64>,
}

impl MomentSummary {
    /// Summarizes rows of equal length; each column is one feature.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let count = rows.len();
        if count < 2 {
            return Err(Error::InvalidParameter {
                name: "samples",
                reason: "need at least two rows".into(),
            });
        }
        let width = rows[0].len();
        let mut mean = Vec::with_capacity(width);
        let mut var = Vec::with_capacity(width);
        let mut col = vec![0.0; count];
        for f in 0..width {
            for (c, row) in col.iter_mut().zip(rows) {
                *c = row[f];
            }
            let m = pairwise_sum(&col) / count as f64;
            let dev: Vec<f64> = col.iter().map(|v| (v - m) * (v - m)).collect();
            mean.push(m);
            var.push(pairwise_sum(&dev) / (count - 1) as f64);
        }
        let se = var.iter().map(|v| (v / count as f64).sqrt()).collect();
        Ok(Self { count, mean, var, se })
    }
}

/// Two-sample z-scores per feature, after subtracting `allowance` from `|Δmean|`.
pub fn z_scores(a: &MomentSummary, b: &MomentSummary, allowance: f64) -> Vec<f64> {
    a.mean
        .iter()
        .zip(&b.mean)
        .zip(a.se.iter().zip(&b.se))
        .map(|((ma, mb), (sa, sb))| {
            let gap = ((ma - mb).abs() - allowance).max(0.0);
            let se = (sa * sa + sb * sb).sqrt();
            if gap == 0.0 {
                0.0
            } else if se == 0.0 {
                f64::INFINITY
            } else {
                gap / se
            }
        })
        .collect()
}

/// One-sample z-scores of the feature means against zero.
pub fn paired_z_scores(diff: &MomentSummary) -> Vec<f64> {
    diff.mean
        .iter()
        .zip(&diff.se)
        .map(|(m, s)| {
            if *m == 0.0 {
                0.0
            } else if *s == 0.0 {
                f64::INFINITY
            } else {
                m.abs() / s
            }
        })
        .collect()
}

/// Two-sided normal p-value.
pub fn two_sided_p(z: f64) -> f64 {
    (2.0 * normal_sf(z.abs())).min(1.0)
}

/// Survival function of the Kolmogorov distribution, `P(K > λ)`.
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        return 1.0;
    }
    let mut s = 0.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        s += if j % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn sorted(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    v
}

/// Two-sample Kolmogorov–Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter {
            name: "sample",
            reason: "both samples must be nonempty".into(),
        });
    }
    let (sa, sb) = (sorted(a), sorted(b));
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < sa.len() && j < sb.len() {
        let x = sa[i].min(sb[j]);
        while i < sa.len() && sa[i] <= x {
            i += 1;
        }
        while j < sb.len() && sb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    let ne = na * nb / (na + nb);
    let sq = ne.sqrt();
    let p = kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d);
    Ok((d, p))
}

/// `λ` with `P(K > λ) = alpha` for the Kolmogorov distribution.
pub fn kolmogorov_critical(alpha: f64) -> f64 {
    let (mut lo, mut hi) = (0.2f64, 10.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if kolmogorov_sf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Two-sample KS distance whose asymptotic p-value equals `alpha`.
pub fn ks_critical(na: usize, nb: usize, alpha: f64) -> f64 {
    let ne = (na * nb) as f64 / (na + nb) as f64;
    let sq = ne.sqrt();
    kolmogorov_critical(alpha) / (sq + 0.12 + 0.11 / sq)
}

/// One-sample KS distance between data and a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(data: &[f64], cdf: F) -> f64 {
    let s = sorted(data);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Bonferroni-adjusted two-sided normal threshold for `m` tests at family level `alpha`.
pub fn bonferroni_z(alpha: f64, m: usize) -> f64 {
    let target = alpha / (2.0 * m.max(1) as f64);
    let (mut lo, mut hi) = (0.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_sf(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
