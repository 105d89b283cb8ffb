//! Periodic geometric Pitman transform on cyclic vectors.
//!
//! Every cyclic exponential sum goes through a max-shifted log-sum-exp over a
//! prefix array of the difference sequence `Y = X2 − X1`, so each two-input map
//! costs `O(N²)`.

use crate::error::{Error, Result};
use crate::numeric::{log_abs_expm1, log_sum_exp};

/// A real vector indexed by `ℤ_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct CyclicVector {
    values: Vec<f64>,
}

impl CyclicVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptyVector);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "period must be positive");
        Self { values: vec![0.0; n] }
    }

    /// Builds a vector from trusted arithmetic; panics only on an empty input.
    pub(crate) fn from_raw(values: Vec<f64>) -> Self {
        debug_assert!(!values.is_empty());
        Self { values }
    }

    #[inline]
    pub fn period(&self) -> usize {
        self.values.len()
    }

    /// Entry at any integer index, reduced mod `N`.
    #[inline]
    pub fn at(&self, i: i64) -> f64 {
        self.values[i.rem_euclid(self.values.len() as i64) as usize]
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// The slope `𝔰(X)`.
    pub fn slope(&self) -> f64 {
        self.values.iter().sum()
    }

    /// `(τ_s X)_i = X_{i+s}`.
    pub fn shift(&self, s: i64) -> Self {
        let n = self.period() as i64;
        Self::from_raw((0..n).map(|i| self.at(i + s)).collect())
    }

    /// `(rX)_i = −X_{N−i}`.
    pub fn reflect(&self) -> Self {
        let n = self.period() as i64;
        Self::from_raw((0..n).map(|i| -self.at(n - i)).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// An ordered tuple of cyclic vectors sharing one period.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopedFamily {
    vectors: Vec<CyclicVector>,
}

impl SlopedFamily {
    pub fn new(vectors: Vec<CyclicVector>) -> Result<Self> {
        let first = vectors.first().ok_or(Error::EmptyFamily)?;
        let n = first.period();
        for v in &vectors {
            if v.period() != n {
                return Err(Error::PeriodMismatch(n, v.period()));
            }
        }
        Ok(Self { vectors })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let vs = rows
            .into_iter()
            .map(CyclicVector::new)
            .collect::<Result<Vec<_>>>()?;
        Self::new(vs)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn period(&self) -> usize {
        self.vectors[0].period()
    }

    pub fn vectors(&self) -> &[CyclicVector] {
        &self.vectors
    }

    pub fn into_vectors(self) -> Vec<CyclicVector> {
        self.vectors
    }

    pub fn get(&self, r: usize) -> &CyclicVector {
        &self.vectors[r]
    }

    pub fn slopes(&self) -> Vec<f64> {
        self.vectors.iter().map(CyclicVector::slope).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.vectors
            .iter()
            .zip(&other.vectors)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }
}

fn check_periods(a: &CyclicVector, b: &CyclicVector) -> Result<()> {
    if a.period() != b.period() {
        return Err(Error::PeriodMismatch(a.period(), b.period()));
    }
    Ok(())
}

/// Cyclic segment sum: `X_{(i,j]}` or, with `include_left`, `X_{[i,j]}`.
pub fn seg_sum(x: &CyclicVector, i: i64, j: i64, include_left: bool) -> f64 {
    let n = x.period() as i64;
    let len = (j - i).rem_euclid(n);
    let mut s = if include_left { x.at(i) } else { 0.0 };
    for l in 1..=len {
        s += x.at(i + l);
    }
    s
}

/// Prefix sums of `Y = X2 − X1` over two periods: `p[t] = Σ_{l<t} Y_l`.
fn doubled_prefix(x1: &CyclicVector, x2: &CyclicVector) -> Vec<f64> {
    let n = x1.period();
    let mut p = Vec::with_capacity(2 * n + 1);
    p.push(0.0);
    let mut acc = 0.0;
    for t in 0..2 * n {
        acc += x2.values[t % n] - x1.values[t % n];
        p.push(acc);
    }
    p
}

/// `Q_i = log Σ_j e^{Y_{(i,j]}}` for every residue `i`.
fn open_log_sums(p: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| log_sum_exp((0..n).map(|d| p[i + d + 1] - p[i + 1])))
        .collect()
}

/// `A_i = log Σ_j e^{Y_{[i,j]}}` for every residue `i`.
fn closed_log_sums(p: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| log_sum_exp((0..n).map(|d| p[i + d + 1] - p[i])))
        .collect()
}

/// `D^{N,2}(X1, X2)`.
pub fn d2(x1: &CyclicVector, x2: &CyclicVector) -> Result<CyclicVector> {
    check_periods(x1, x2)?;
    let n = x1.period();
    let p = doubled_prefix(x1, x2);
    let q = open_log_sums(&p, n);
    Ok(CyclicVector::from_raw(
        (0..n)
            .map(|i| x2.values[i] + (q[i] - q[(i + n - 1) % n]))
            .collect(),
    ))
}

/// `T^{N,2}(X1, X2)`.
pub fn t2(x1: &CyclicVector, x2: &CyclicVector) -> Result<CyclicVector> {
    check_periods(x1, x2)?;
    let n = x1.period();
    let p = doubled_prefix(x1, x2);
    let a = closed_log_sums(&p, n);
    Ok(CyclicVector::from_raw(
        (0..n).map(|i| x1.values[i] + (a[i] - a[(i + 1) % n])).collect(),
    ))
}

/// Checks strict entrywise ordering of `b − a` and returns the differences.
fn strict_differences(a: &CyclicVector, b: &CyclicVector) -> Result<Vec<f64>> {
    check_periods(a, b)?;
    let diffs: Vec<f64> = b.values.iter().zip(&a.values).map(|(b, a)| b - a).collect();
    let positive = diffs[0] > 0.0;
    for (index, &diff) in diffs.iter().enumerate() {
        let ok = if positive { diff > 0.0 } else { diff < 0.0 };
        if !ok {
            return Err(Error::NotOrdered { index, diff });
        }
    }
    Ok(diffs)
}

/// `J^{N,2}(U1, U2)`, defined for strictly ordered inputs.
pub fn j2(u1: &CyclicVector, u2: &CyclicVector) -> Result<CyclicVector> {
    let d = strict_differences(u1, u2)?;
    let n = u1.period();
    let l: Vec<f64> = d.iter().map(|&v| log_abs_expm1(v)).collect();
    Ok(CyclicVector::from_raw(
        (0..n).map(|i| u2.values[i] + (l[(i + 1) % n] - l[i])).collect(),
    ))
}

/// `L^{N,2}(U1, U2)`, the inverse of `T^{N,2}` in its first argument.
pub fn l2(u1: &CyclicVector, u2: &CyclicVector) -> Result<CyclicVector> {
    let d = strict_differences(u1, u2)?;
    let n = u1.period();
    let l: Vec<f64> = d.iter().map(|&v| log_abs_expm1(-v)).collect();
    Ok(CyclicVector::from_raw(
        (0..n).map(|i| u1.values[i] + (l[(i + n - 1) % n] - l[i])).collect(),
    ))
}

/// `D^{N,k}(X_1, …, X_k)` by right-to-left folding of `d2`.
pub fn d_multi(family: &[CyclicVector]) -> Result<CyclicVector> {
    let (last, rest) = family.split_last().ok_or(Error::EmptyFamily)?;
    let mut acc = last.clone();
    for x in rest.iter().rev() {
        acc = d2(x, &acc)?;
    }
    Ok(acc)
}

/// Direct multi-sum evaluation of `D^{N,m}`; cost `O(N^m)`.
pub fn d_multi_bruteforce(family: &[CyclicVector]) -> Result<CyclicVector> {
    let m = family.len();
    if m == 0 {
        return Err(Error::EmptyFamily);
    }
    let n = family[0].period();
    for v in family {
        check_periods(&family[0], v)?;
    }
    let xm = &family[m - 1];
    if m == 1 {
        return Ok(xm.clone());
    }
    let diffs: Vec<CyclicVector> = family[..m - 1]
        .iter()
        .map(|xr| {
            CyclicVector::from_raw(xm.values.iter().zip(&xr.values).map(|(a, b)| a - b).collect())
        })
        .collect();
    let q: Vec<f64> = (0..n as i64)
        .map(|i| {
            let total = n.pow((m - 1) as u32);
            let mut terms = Vec::with_capacity(total);
            let mut js = vec![0i64; m - 1];
            for code in 0..total {
                let mut c = code;
                for j in js.iter_mut() {
                    *j = (c % n) as i64;
                    c /= n;
                }
                let mut prev = i;
                let mut e = 0.0;
                for (r, &j) in js.iter().enumerate() {
                    e += seg_sum(&diffs[r], prev, j, false);
                    prev = j;
                }
                terms.push(e);
            }
            log_sum_exp(terms)
        })
        .collect();
    Ok(CyclicVector::from_raw(
        (0..n).map(|i| xm.values[i] + (q[i] - q[(i + n - 1) % n])).collect(),
    ))
}

/// `𝒟^{N,k}`: the r-th output is `D^{N,r}(X_1, …, X_r)`.
pub fn dk_stack(family: &SlopedFamily) -> Result<SlopedFamily> {
    let xs = family.vectors();
    let out = (1..=xs.len())
        .map(|r| d_multi(&xs[..r]))
        .collect::<Result<Vec<_>>>()?;
    SlopedFamily::new(out)
}

/// `𝒥^{N,k}`, the inverse of [`dk_stack`] on its range.
///
/// Uses the triangular scheme `Z(1,j) = U_j`, `Z(m+1,j) = J(Z(m,m), Z(m,j))`
/// with output `X_m = Z(m,m)`. A failing pair is reported as
/// [`Error::Domain`] with the 1-based stage `m+1` and column `j`.
pub fn jk_stack(family: &SlopedFamily) -> Result<SlopedFamily> {
    let k = family.len();
    let mut z: Vec<CyclicVector> = family.vectors().to_vec();
    for m in 0..k.saturating_sub(1) {
        let pivot = z[m].clone();
        for j in m + 1..k {
            z[j] = j2(&pivot, &z[j]).map_err(|e| match e {
                Error::NotOrdered { index, diff } => Error::Domain {
                    stage: m + 2,
                    column: j + 1,
                    index,
                    diff,
                },
                other => other,
            })?;
        }
    }
    SlopedFamily::new(z)
}

/// The periodic Pitman transform `W(X1, X2) = (T, D)`.
pub fn pitman_w(x1: &CyclicVector, x2: &CyclicVector) -> Result<(CyclicVector, CyclicVector)> {
    Ok((t2(x1, x2)?, d2(x1, x2)?))
}

/// Inverse of [`pitman_w`]: `(V1, V2) ↦ (D(V2, V1), T(V2, V1))`.
pub fn pitman_w_inverse(
    v1: &CyclicVector,
    v2: &CyclicVector,
) -> Result<(CyclicVector, CyclicVector)> {
    Ok((d2(v2, v1)?, t2(v2, v1)?))
}

/// One multiline update. Returns the new family and the carried inputs `W_1, …, W_{k+1}`.
pub fn multiline_step(
    w: &CyclicVector,
    state: &SlopedFamily,
) -> Result<(SlopedFamily, Vec<CyclicVector>)> {
    let mut carried = Vec::with_capacity(state.len() + 1);
    carried.push(w.clone());
    let mut out = Vec::with_capacity(state.len());
    for x in state.vectors() {
        let wr = carried.last().expect("nonempty");
        let (t, d) = pitman_w(wr, x)?;
        out.push(d);
        carried.push(t);
    }
    Ok((SlopedFamily::new(out)?, carried))
}

/// One coupled update `U_r ↦ D(W, U_r)` with a shared `W`.
pub fn coupled_step(w: &CyclicVector, state: &SlopedFamily) -> Result<SlopedFamily> {
    let out = state
        .vectors()
        .iter()
        .map(|u| d2(w, u))
        .collect::<Result<Vec<_>>>()?;
    SlopedFamily::new(out)
}

/// Truncated full-line transform for periodic inputs.
///
/// Evaluates `J_i = Σ_{j≥0} e^{X1_{i−j}} Π_{ℓ<j} e^{X1_{i−ℓ} − X2_{i−ℓ}}` block by
/// block of `N` terms and returns `X2_i + log(J_i / J_{i−1})`. Summation stops
/// once the next block is below `tol` times the running sum, or after `10⁶` terms.
pub fn fullline_d_periodic(
    x1: &CyclicVector,
    x2: &CyclicVector,
    tol: f64,
) -> Result<CyclicVector> {
    check_periods(x1, x2)?;
    let (s1, s2) = (x1.slope(), x2.slope());
    if s1 >= s2 {
        return Err(Error::Divergent { lower: s1, upper: s2 });
    }
    const CAP: usize = 1_000_000;
    let n = x1.period() as i64;
    let log_ratio = s1 - s2;
    let log_j: Vec<f64> = (0..n)
        .map(|i| {
            let mut acc = f64::NEG_INFINITY;
            let mut weight = 0.0;
            let mut j = 0i64;
            loop {
                let mut block = f64::NEG_INFINITY;
                for _ in 0..n {
                    let idx = i - j;
                    block = crate::numeric::log_add_exp(block, x1.at(idx) + weight);
                    weight += x1.at(idx) - x2.at(idx);
                    j += 1;
                }
                acc = crate::numeric::log_add_exp(acc, block);
                if block + log_ratio < tol.ln() + acc || j as usize >= CAP {
                    break;
                }
            }
            acc
        })
        .collect();
    let nu = n as usize;
    Ok(CyclicVector::from_raw(
        (0..nu)
            .map(|i| x2.values[i] + (log_j[i] - log_j[(i + nu - 1) % nu]))
            .collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(v: &[f64]) -> CyclicVector {
        CyclicVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn seg_sum_examples() {
        let x = cv(&[1.0, 2.0, 3.0]);
        assert_eq!(seg_sum(&x, 0, 2, false), 5.0);
        assert_eq!(seg_sum(&x, 1, 1, false), 0.0);
        assert_eq!(seg_sum(&x, 1, 1, true), 2.0);
        assert_eq!(seg_sum(&x, 2, 0, false), 1.0);
        assert_eq!(seg_sum(&x, 2, 1, true), 6.0);
    }

    #[test]
    fn constructor_rejects_bad_input() {
        assert_eq!(CyclicVector::new(vec![]), Err(Error::EmptyVector));
        assert!(matches!(
            CyclicVector::new(vec![0.0, f64::NAN]),
            Err(Error::NonFinite { index: 1, .. })
        ));
    }

    #[test]
    fn wrapping_index() {
        let x = cv(&[1.0, 2.0, 3.0]);
        assert_eq!(x.at(-1), 3.0);
        assert_eq!(x.at(7), 2.0);
        assert_eq!(x.shift(1).values(), &[2.0, 3.0, 1.0]);
        assert_eq!(x.reflect().values(), &[-1.0, -3.0, -2.0]);
    }

    #[test]
    fn d2_equal_sums_returns_first() {
        let out = d2(&cv(&[1.0, 2.0]), &cv(&[4.0, -1.0])).unwrap();
        assert!(out.max_abs_diff(&cv(&[1.0, 2.0])) < 1e-14);
    }

    #[test]
    fn d2_zero_fixed_point() {
        let z = cv(&[0.0, 0.0]);
        assert_eq!(d2(&z, &z).unwrap(), z);
    }

    #[test]
    fn d2_two_site_example() {
        let out = d2(&cv(&[0.0, 0.0]), &cv(&[0.0, 3f64.ln()])).unwrap();
        assert!(out.max_abs_diff(&cv(&[2f64.ln(), 1.5f64.ln()])) < 1e-15);
    }

    #[test]
    fn t2_examples() {
        let out = t2(&cv(&[1.0, 2.0]), &cv(&[4.0, -1.0])).unwrap();
        assert!(out.max_abs_diff(&cv(&[4.0, -1.0])) < 1e-14);
        let out = t2(&cv(&[0.0, 0.0]), &cv(&[0.0, 3f64.ln()])).unwrap();
        assert!(out.max_abs_diff(&cv(&[-(1.5f64.ln()), 1.5f64.ln()])) < 1e-15);
        let z = CyclicVector::zeros(4);
        assert!(t2(&z, &z).unwrap().max_abs_diff(&z) < 1e-15);
    }

    #[test]
    fn period_mismatch_is_reported() {
        assert_eq!(
            d2(&cv(&[0.0]), &cv(&[0.0, 1.0])),
            Err(Error::PeriodMismatch(1, 2))
        );
    }

    #[test]
    fn j2_examples() {
        assert!(j2(&cv(&[0.2]), &cv(&[1.5])).unwrap().max_abs_diff(&cv(&[1.5])) < 1e-15);
        let out = j2(&cv(&[0.0, 0.0]), &cv(&[2f64.ln(), 1.5f64.ln()])).unwrap();
        assert!(out.max_abs_diff(&cv(&[0.0, 3f64.ln()])) < 1e-14);
        assert!(matches!(
            j2(&cv(&[0.0, 0.0]), &cv(&[1.0, -1.0])),
            Err(Error::NotOrdered { index: 1, .. })
        ));
    }

    #[test]
    fn l2_examples() {
        let x1 = cv(&[0.0, 0.0]);
        let x2 = cv(&[0.0, 3f64.ln()]);
        let t = t2(&x1, &x2).unwrap();
        assert!(l2(&t, &x2).unwrap().max_abs_diff(&x1) < 1e-14);
        assert_eq!(l2(&cv(&[0.4]), &cv(&[2.0])).unwrap(), cv(&[0.4]));
        assert!(matches!(
            l2(&cv(&[0.0, 0.0]), &cv(&[0.0, 1.0])),
            Err(Error::NotOrdered { index: 0, .. })
        ));
    }

    #[test]
    fn d_multi_base_cases() {
        let a = cv(&[0.3, -0.1, 0.5]);
        let b = cv(&[1.0, 0.2, -0.4]);
        assert_eq!(d_multi(std::slice::from_ref(&a)).unwrap(), a);
        assert_eq!(d_multi(&[a.clone(), b.clone()]).unwrap(), d2(&a, &b).unwrap());
        assert_eq!(d_multi(&[]), Err(Error::EmptyFamily));
    }

    #[test]
    fn dk_stack_identical_inputs_collapse() {
        let a = cv(&[0.3, -0.1, 0.5]);
        let f = SlopedFamily::new(vec![a.clone(), a.clone(), a.clone()]).unwrap();
        let out = dk_stack(&f).unwrap();
        for v in out.vectors() {
            assert!(v.max_abs_diff(&a) < 1e-14);
        }
    }

    #[test]
    fn jk_stack_reports_stage() {
        let a = cv(&[0.3, -0.1, 0.5]);
        let b = cv(&[1.3, -0.1, 1.5]);
        let f = SlopedFamily::new(vec![a, b]).unwrap();
        assert!(matches!(
            jk_stack(&f),
            Err(Error::Domain { stage: 2, column: 2, index: 1, .. })
        ));
    }

    #[test]
    fn pitman_w_equal_sum_swap() {
        let x1 = cv(&[1.0, 2.0]);
        let x2 = cv(&[4.0, -1.0]);
        let (t, d) = pitman_w(&x1, &x2).unwrap();
        assert!(t.max_abs_diff(&x2) < 1e-14);
        assert!(d.max_abs_diff(&x1) < 1e-14);
    }

    #[test]
    fn exp_conservation_two_site() {
        let (t, d) = pitman_w(&cv(&[0.0, 0.0]), &cv(&[0.0, 3f64.ln()])).unwrap();
        let lhs = (-t.at(0)).exp() + (-d.at(0)).exp();
        assert!((lhs - 2.0).abs() < 1e-15);
        assert!(((-t.at(0)).exp() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn multiline_base_case() {
        let w = cv(&[0.2, -0.7, 1.1]);
        let x = cv(&[0.5, 0.1, -0.3]);
        let f = SlopedFamily::new(vec![x.clone()]).unwrap();
        let (out, carried) = multiline_step(&w, &f).unwrap();
        assert_eq!(out.get(0), &d2(&w, &x).unwrap());
        assert_eq!(carried[1], t2(&w, &x).unwrap());
        assert_eq!(carried[0], w);
    }

    #[test]
    fn multiline_equal_sum_swap() {
        let w = cv(&[1.0, 2.0]);
        let x = cv(&[4.0, -1.0]);
        let f = SlopedFamily::new(vec![x.clone()]).unwrap();
        let (out, carried) = multiline_step(&w, &f).unwrap();
        assert!(out.get(0).max_abs_diff(&w) < 1e-14);
        assert!(carried[1].max_abs_diff(&x) < 1e-14);
    }

    #[test]
    fn coupled_base_case() {
        let w = cv(&[0.2, -0.7, 1.1]);
        let u = cv(&[0.5, 0.1, -0.3]);
        let f = SlopedFamily::new(vec![u.clone()]).unwrap();
        assert_eq!(coupled_step(&w, &f).unwrap().get(0), &d2(&w, &u).unwrap());
        let eq = cv(&[0.9, -0.6, 0.3]);
        let g = SlopedFamily::new(vec![eq]).unwrap();
        assert!(coupled_step(&w, &g).unwrap().get(0).max_abs_diff(&w) < 1e-14);
    }

    #[test]
    fn fullline_scalar_geometric_series() {
        let out = fullline_d_periodic(&cv(&[-0.4]), &cv(&[0.9]), 1e-14).unwrap();
        assert!((out.at(0) - 0.9).abs() < 1e-14);
    }

    #[test]
    fn fullline_rejects_divergent() {
        assert!(matches!(
            fullline_d_periodic(&cv(&[1.0, 0.0]), &cv(&[0.5, 0.5]), 1e-12),
            Err(Error::Divergent { .. })
        ));
    }
}
