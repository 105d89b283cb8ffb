//! Exact identity suites over random inputs, the polymer oracle and the
//! Jacobian determinant of the Pitman transform.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::report::TestReport;
use crate::cyclic::{
    coupled_step, d2, d_multi, d_multi_bruteforce, dk_stack, fullline_d_periodic, j2, jk_stack,
    l2, multiline_step, pitman_w, pitman_w_inverse, t2, CyclicVector, SlopedFamily,
};
use crate::dynamics::polymer_ratio_layer;
use crate::error::{invalid, Result};
use crate::rng::RngStream;

/// Check names of the algebra suite with their max-abs tolerances.
pub const ALGEBRA_CHECKS: &[(&str, f64)] = &[
    ("jk_after_dk", 1e-9),
    ("dk_after_jk", 1e-9),
    ("slope_preservation", 1e-9),
    ("additive_identity", 1e-12),
    ("exp_conservation", 1e-12),
    ("three_input_intertwining", 1e-10),
    ("pitman_composition", 1e-9),
    ("j2_inverts_d2", 1e-9),
    ("l2_inverts_t2", 1e-9),
    ("w_inverse", 1e-9),
    ("shift_equivariance", 1e-9),
    ("reflection", 1e-9),
    ("multisum_form", 1e-9),
    ("fullline_periodic", 1e-9),
    ("slot_swap", 1e-9),
    ("multiline_intertwining", 1e-9),
    ("sorting_violations", 0.0),
    ("monotonicity_violations", 0.0),
];

/// Sizes and seed of the algebra suite.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraConfig {
    pub n_max: usize,
    pub k_max: usize,
    pub families: usize,
    pub seed: u64,
}

impl Default for AlgebraConfig {
    fn default() -> Self {
        Self {
            n_max: 8,
            k_max: 5,
            families: 1000,
            seed: 1,
        }
    }
}

/// Gaussian cyclic vector shifted to have slope exactly `theta` (up to rounding).
pub fn random_vector<R: Rng + ?Sized>(rng: &mut R, n: usize, theta: f64) -> CyclicVector {
    let mut v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let excess = (v.iter().sum::<f64>() - theta) / n as f64;
    for x in v.iter_mut() {
        *x -= excess;
    }
    CyclicVector::new(v).expect("finite")
}

/// Family of `k` Gaussian vectors whose slopes are pairwise at least 0.4 apart, in random order.
pub fn random_family<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> SlopedFamily {
    let mut order: Vec<usize> = (0..k).collect();
    order.shuffle(rng);
    let centre = 0.4 * (k as f64 - 1.0);
    let vs = order
        .iter()
        .map(|&r| {
            let theta = 0.8 * r as f64 - centre + rng.random_range(-0.2..0.2);
            random_vector(rng, n, theta)
        })
        .collect();
    SlopedFamily::new(vs).expect("common period")
}

fn family_diff(a: &SlopedFamily, b: &SlopedFamily) -> f64 {
    a.max_abs_diff(b)
}

fn add(a: &CyclicVector, b: &CyclicVector) -> CyclicVector {
    CyclicVector::new(a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect()).expect("finite")
}

fn shifted_family(f: &SlopedFamily, s: i64) -> SlopedFamily {
    SlopedFamily::new(f.vectors().iter().map(|v| v.shift(s)).collect()).expect("common period")
}

/// Violations of `sign(U_r − U_m) = sign(θ_r − θ_m)` over all pairs and entries.
fn sorting_violations(u: &SlopedFamily, slopes: &[f64]) -> f64 {
    let mut bad = 0usize;
    for r in 0..u.len() {
        for m in r + 1..u.len() {
            let want = (slopes[r] - slopes[m]).signum();
            for (a, b) in u.get(r).values().iter().zip(u.get(m).values()) {
                if (a - b).signum() != want {
                    bad += 1;
                }
            }
        }
    }
    bad as f64
}

/// Max-abs errors of every identity in [`ALGEBRA_CHECKS`] for one random input.
fn family_errors(n: usize, k: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    let f = random_family(rng, n, k);
    let slopes = f.slopes();
    let g_src = random_family(rng, n, k);
    let pair = random_family(rng, n, 2);
    let (x1, x2) = (pair.get(0).clone(), pair.get(1).clone());
    let (s3, sw) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let x3 = random_vector(rng, n, s3);
    let w = random_vector(rng, n, sw);

    let u = dk_stack(&f)?;
    let jk_after_dk = family_diff(&jk_stack(&u)?, &f);
    let g = dk_stack(&g_src)?;
    let dk_after_jk = family_diff(&dk_stack(&jk_stack(&g)?)?, &g);

    let (t, d) = (t2(&x1, &x2)?, d2(&x1, &x2)?);
    let mut slope_err = u
        .slopes()
        .iter()
        .zip(&slopes)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    slope_err = slope_err.max((t.slope() - x1.slope()).abs());
    slope_err = slope_err.max((d.slope() - x2.slope()).abs());

    let additive_identity = (0..n as i64)
        .map(|i| (d.at(i) + t.at(i - 1) - x1.at(i) - x2.at(i - 1)).abs())
        .fold(0.0, f64::max);
    let exp_conservation = (0..n)
        .map(|i| {
            let lhs = (-x1.values()[i]).exp() + (-x2.values()[i]).exp();
            let rhs = (-t.values()[i]).exp() + (-d.values()[i]).exp();
            (lhs - rhs).abs() / lhs
        })
        .fold(0.0, f64::max);

    let three_input_intertwining = d_multi(&[x1.clone(), x2.clone(), x3.clone()])?
        .max_abs_diff(&d_multi(&[d.clone(), t.clone(), x3.clone()])?);
    let pitman_composition = j2(&d, &x1)?.max_abs_diff(&t);
    let j2_inverts_d2 = j2(&x1, &d)?.max_abs_diff(&x2);
    let l2_inverts_t2 = l2(&t, &x2)?.max_abs_diff(&x1);
    let (y1, y2) = pitman_w_inverse(&t, &d)?;
    let w_inverse = y1.max_abs_diff(&x1).max(y2.max_abs_diff(&x2));

    let s = rng.random_range(0..n as i64);
    let shift_equivariance = family_diff(&dk_stack(&shifted_family(&f, s))?, &shifted_family(&u, s));

    let (rx1, rx2) = (x1.reflect(), x2.reflect());
    let (rt, rd) = (t2(&rx1, &rx2)?.reflect(), d2(&rx1, &rx2)?.reflect());
    let ni = n as i64;
    let want1: Vec<f64> = (0..ni).map(|i| x2.at(i) - x2.at(i - 1) + t.at(i - 1)).collect();
    let want2: Vec<f64> = (0..ni).map(|i| x1.at(i) - x1.at(i + 1) + d.at(i + 1)).collect();
    let reflection = rt
        .max_abs_diff(&CyclicVector::new(want1)?)
        .max(rd.max_abs_diff(&CyclicVector::new(want2)?));

    let multisum_form = d_multi(f.vectors())?.max_abs_diff(&d_multi_bruteforce(f.vectors())?);

    let (lo, hi) = if x1.slope() < x2.slope() { (&x1, &x2) } else { (&x2, &x1) };
    let full = fullline_d_periodic(lo, hi, 1e-15)?;
    let lo_lagged = lo.shift(-1);
    let fullline_periodic = full.max_abs_diff(&d2(&lo_lagged, hi)?.shift(1));

    let slot_swap = if k >= 2 {
        let a = rng.random_range(0..k - 1);
        let mut swapped_in = f.vectors().to_vec();
        swapped_in[a] = d2(f.get(a), f.get(a + 1))?;
        swapped_in[a + 1] = t2(f.get(a), f.get(a + 1))?;
        let out = dk_stack(&SlopedFamily::new(swapped_in)?)?;
        let mut want = u.vectors().to_vec();
        want.swap(a, a + 1);
        family_diff(&out, &SlopedFamily::new(want)?)
    } else {
        0.0
    };

    let (moved, _) = multiline_step(&w, &f)?;
    let multiline_intertwining = family_diff(&coupled_step(&w, &u)?, &dk_stack(&moved)?);

    let sorting = sorting_violations(&u, &slopes);

    let bump: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..0.5)).collect();
    let mut raised = f.vectors().to_vec();
    raised[k - 1] = add(&raised[k - 1], &CyclicVector::new(bump)?);
    let (before, after) = (d_multi(f.vectors())?, d_multi(&raised)?);
    let monotonicity = before
        .values()
        .iter()
        .zip(after.values())
        .filter(|(b, a)| a <= b)
        .count() as f64;

    Ok(vec![
        jk_after_dk,
        dk_after_jk,
        slope_err,
        additive_identity,
        exp_conservation,
        three_input_intertwining,
        pitman_composition,
        j2_inverts_d2,
        l2_inverts_t2,
        w_inverse,
        shift_equivariance,
        reflection,
        multisum_form,
        fullline_periodic,
        slot_swap,
        multiline_intertwining,
        sorting,
        monotonicity,
    ])
}

/// Runs every exact identity over `families` random inputs per `(N, k)`.
pub fn algebra_suite(cfg: &AlgebraConfig) -> Result<TestReport> {
    if cfg.n_max == 0 || cfg.k_max == 0 || cfg.families == 0 {
        return Err(invalid("algebra", "sizes must be positive"));
    }
    let mut report = TestReport::new("algebra");
    let combos: Vec<(usize, usize)> = (1..=cfg.n_max)
        .flat_map(|n| (1..=cfg.k_max).map(move |k| (n, k)))
        .collect();
    let per = cfg.families;
    let rows: Vec<Vec<f64>> = (0..combos.len() * per)
        .into_par_iter()
        .map(|idx| {
            let (n, k) = combos[idx / per];
            let tag = (n * 16 + k) as u32;
            let mut rng = RngStream::for_replica(cfg.seed, tag, (idx % per) as u64);
            family_errors(n, k, &mut rng)
                .unwrap_or_else(|_| vec![f64::INFINITY; ALGEBRA_CHECKS.len()])
        })
        .collect();
    for (c, (name, tol)) in ALGEBRA_CHECKS.iter().enumerate() {
        let worst = rows.iter().map(|r| r[c]).fold(0.0, f64::max);
        report.at_most(*name, worst, *tol, rows.len());
        if worst > *tol {
            for (ci, (n, k)) in combos.iter().enumerate() {
                let w = rows[ci * per..(ci + 1) * per].iter().map(|r| r[c]).fold(0.0, f64::max);
                if w > *tol {
                    report.note(format!("{name}: N={n} k={k} worst {w:.3e}"));
                }
            }
        }
    }
    Ok(report.finish())
}

/// Compares the polymer recursion against `d2(W, U)` over random inputs with slope gap at least 0.5.
pub fn polymer_suite(samples: usize, n_max: usize, seed: u64) -> Result<TestReport> {
    if samples == 0 || n_max == 0 {
        return Err(invalid("polymer", "sizes must be positive"));
    }
    let mut report = TestReport::new("polymer");
    let errs: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(seed, 31, j as u64);
            let n = 1 + j % n_max;
            let sw = rng.random_range(-1.0..1.0);
            let su = sw + rng.random_range(0.5..2.0);
            let w = random_vector(&mut rng, n, sw);
            let u = random_vector(&mut rng, n, su);
            match (polymer_ratio_layer(&u, &w), d2(&w, &u)) {
                (Ok(a), Ok(b)) => a.max_abs_diff(&b),
                _ => f64::INFINITY,
            }
        })
        .collect();
    report.at_most("polymer_vs_d2", errs.iter().cloned().fold(0.0, f64::max), 1e-10, samples);
    Ok(report.finish())
}

fn w_flat(z: &[f64], n: usize) -> Result<Vec<f64>> {
    let x1 = CyclicVector::new(z[..n].to_vec())?;
    let x2 = CyclicVector::new(z[n..].to_vec())?;
    let (a, b) = pitman_w(&x1, &x2)?;
    let mut out = a.into_values();
    out.extend(b.into_values());
    Ok(out)
}

/// `|det|` of the central-difference Jacobian of the Pitman transform at `(X1, X2)`.
pub fn jacobian_det_check(x1: &CyclicVector, x2: &CyclicVector, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(invalid("h", format!("must be positive, got {h}")));
    }
    let n = x1.period();
    if x2.period() != n {
        return Err(crate::error::Error::PeriodMismatch(n, x2.period()));
    }
    let mut z: Vec<f64> = x1.values().to_vec();
    z.extend_from_slice(x2.values());
    let dim = 2 * n;
    let mut jac = DMatrix::<f64>::zeros(dim, dim);
    for c in 0..dim {
        let orig = z[c];
        z[c] = orig + h;
        let up = w_flat(&z, n)?;
        z[c] = orig - h;
        let down = w_flat(&z, n)?;
        z[c] = orig;
        for r in 0..dim {
            jac[(r, c)] = (up[r] - down[r]) / (2.0 * h);
        }
    }
    Ok(jac.determinant().abs())
}

/// `||det| − 1|` at `points` random inputs with `N` cycling through `1..=n_max`.
pub fn jacobian_suite(points: usize, n_max: usize, h: f64, seed: u64) -> Result<TestReport> {
    if points == 0 || n_max == 0 {
        return Err(invalid("jacobian", "sizes must be positive"));
    }
    let mut report = TestReport::new("jacobian");
    let devs: Vec<f64> = (0..points)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(seed, 41, j as u64);
            let n = 1 + j % n_max;
            let pair = random_family(&mut rng, n, 2);
            jacobian_det_check(pair.get(0), pair.get(1), h)
                .map(|d| (d - 1.0).abs())
                .unwrap_or(f64::INFINITY)
        })
        .collect();
    report.at_most("abs_det_minus_one", devs.iter().cloned().fold(0.0, f64::max), 1e-5, points);
    Ok(report.finish())
}
