use rayon::prelude::*;

use super::report::TestReport;
use super::stats::{bonferroni_z, ks_critical, ks_two_sample, paired_z_scores, MomentSummary};
use crate::cyclic::{pitman_w, CyclicVector};
use crate::error::{invalid, Result};
use crate::rng::RngStream;
use crate::samplers::lig_vector;

/// Family-level significance used with the Bonferroni correction.
const FAMILY_ALPHA: f64 = 1e-3;

/// Inputs of the Burke test: `X1`, `X2` i.i.d. log-inverse-gamma with shapes `gamma1`, `gamma2`.
#[derive(Clone, Debug, PartialEq)]
pub struct BurkeConfig {
    pub n: usize,
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta: f64,
    pub samples: usize,
    pub seed: u64,
}

impl BurkeConfig {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n", "period must be positive"));
        }
        if self.samples < 1000 {
            return Err(invalid("samples", "need at least 1000"));
        }
        Ok(())
    }
}

struct Draws {
    inputs: Vec<(CyclicVector, CyclicVector)>,
    outputs: Vec<(CyclicVector, CyclicVector)>,
}

fn draw(cfg: &BurkeConfig) -> Result<Draws> {
    let pairs: Vec<Result<_>> = (0..cfg.samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(cfg.seed, 51, j as u64);
            let x1 = lig_vector(&mut rng, cfg.n, cfg.gamma1, cfg.beta)?;
            let x2 = lig_vector(&mut rng, cfg.n, cfg.gamma2, cfg.beta)?;
            let out = pitman_w(&x1, &x2)?;
            Ok(((x1, x2), out))
        })
        .collect();
    let mut inputs = Vec::with_capacity(cfg.samples);
    let mut outputs = Vec::with_capacity(cfg.samples);
    for p in pairs {
        let (i, o) = p?;
        inputs.push(i);
        outputs.push(o);
    }
    Ok(Draws { inputs, outputs })
}

fn column(v: &[(CyclicVector, CyclicVector)], second: bool, i: usize) -> Vec<f64> {
    v.iter()
        .map(|(a, b)| if second { b.values()[i] } else { a.values()[i] })
        .collect()
}

/// Products `V1_i V2_i`, `V1_i V1_{i+1}`, `V2_i V2_{i+1}`, `V1_i V2_{i+1}`, `V2_i V1_{i+1}`.
fn cross_features(a: &CyclicVector, b: &CyclicVector) -> Vec<f64> {
    let n = a.period() as i64;
    let mut out = Vec::with_capacity(5 * n as usize);
    for i in 0..n {
        out.push(a.at(i) * b.at(i));
        out.push(a.at(i) * a.at(i + 1));
        out.push(b.at(i) * b.at(i + 1));
        out.push(a.at(i) * b.at(i + 1));
        out.push(b.at(i) * a.at(i + 1));
    }
    out
}

/// Checks that the Pitman transform preserves the product log-inverse-gamma law.
///
/// Each output marginal is compared by a KS test with the input marginal of
/// the same draws, and cross-moments by paired z-tests. Every p-value must
/// exceed `0.001 / m` with `m` the number of tests. The mismatch control of
/// [`burke_mismatch_control`] runs alongside and must fail.
pub fn burke_test(cfg: &BurkeConfig) -> Result<TestReport> {
    cfg.validate()?;
    let mut report = TestReport::new("burke");
    let d = draw(cfg)?;
    let n = cfg.n;
    let diffs: Vec<Vec<f64>> = d
        .inputs
        .iter()
        .zip(&d.outputs)
        .map(|((x1, x2), (v1, v2))| {
            cross_features(v1, v2)
                .iter()
                .zip(cross_features(x1, x2))
                .map(|(a, b)| a - b)
                .collect()
        })
        .collect();
    let z = paired_z_scores(&MomentSummary::from_rows(&diffs)?);
    let tests = 2 * n + z.len();
    let cut = FAMILY_ALPHA / tests as f64;
    let d_crit = ks_critical(cfg.samples, cfg.samples, cut);
    for i in 0..n {
        for (label, second) in [("V1", false), ("V2", true)] {
            let (stat, _) = ks_two_sample(&column(&d.outputs, second, i), &column(&d.inputs, second, i))?;
            report.below(format!("ks_{label}[{i}]"), stat, d_crit, cfg.samples);
        }
    }
    let z_crit = bonferroni_z(FAMILY_ALPHA, tests);
    const LABELS: [&str; 5] = ["V1V2", "V1V1+", "V2V2+", "V1V2+", "V2V1+"];
    for (f, zf) in z.iter().enumerate() {
        report.below(format!("moment_{}[{}]", LABELS[f % 5], f / 5), *zf, z_crit, cfg.samples);
    }
    let control = burke_mismatch_control(cfg)?;
    let detected = !control.passed();
    let worst = control.checks.iter().map(|c| c.statistic / c.threshold).fold(0.0, f64::max);
    report.push("mismatch_control_detected", worst, 1.0, cfg.samples, detected);
    Ok(report.finish())
}

/// Compares the output `V1` marginals with an independent reference sample of
/// shape `gamma1 + 1`; a sensitive harness makes this report fail.
pub fn burke_mismatch_control(cfg: &BurkeConfig) -> Result<TestReport> {
    cfg.validate()?;
    let mut report = TestReport::new("burke_mismatch_control");
    let d = draw(cfg)?;
    let reference: Vec<CyclicVector> = (0..cfg.samples)
        .into_par_iter()
        .map(|j| {
            let mut rng = RngStream::for_replica(cfg.seed, 52, j as u64);
            lig_vector(&mut rng, cfg.n, cfg.gamma1 + 1.0, cfg.beta)
        })
        .collect::<Result<_>>()?;
    let d_crit = ks_critical(cfg.samples, cfg.samples, FAMILY_ALPHA / cfg.n as f64);
    for i in 0..cfg.n {
        let r: Vec<f64> = reference.iter().map(|v| v.values()[i]).collect();
        let (stat, _) = ks_two_sample(&column(&d.outputs, false, i), &r)?;
        report.below(format!("ks_V1[{i}]_vs_shape+1"), stat, d_crit, cfg.samples);
    }
    Ok(report.finish())
}
