//! Agreement statistics between estimated and reference pressures.
//!
//! Standard deviations are population (divide by `n`) throughout.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio::write_atomic;

pub const IEEE_MAX_ABS_ME: f64 = 5.0;
pub const IEEE_MAX_STD: f64 = 8.0;
const LOA_Z: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorStats {
    pub me: f64,
    pub mae: f64,
    pub std: f64,
}

fn check_pair(est: &[f64], reference: &[f64], min_len: usize) -> Result<()> {
    if est.len() != reference.len() {
        return Err(Error::LengthMismatch {
            left: est.len(),
            right: reference.len(),
        });
    }
    if est.len() < min_len {
        return Err(Error::param(
            "n",
            format!("need at least {min_len} pairs, got {}", est.len()),
        ));
    }
    if !est.iter().chain(reference).all(|v| v.is_finite()) {
        return Err(Error::param("values", "must be finite"));
    }
    Ok(())
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn pop_std(x: &[f64], m: f64) -> f64 {
    (x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / x.len() as f64).sqrt()
}

fn diffs(est: &[f64], reference: &[f64]) -> Vec<f64> {
    est.iter().zip(reference).map(|(e, r)| e - r).collect()
}

/// Mean error, mean absolute error and standard deviation of `est - ref`.
pub fn error_stats(est: &[f64], reference: &[f64]) -> Result<ErrorStats> {
    check_pair(est, reference, 1)?;
    let e = diffs(est, reference);
    let me = mean(&e);
    Ok(ErrorStats {
        me,
        mae: e.iter().map(|v| v.abs()).sum::<f64>() / e.len() as f64,
        std: pop_std(&e, me),
    })
}

/// Pearson correlation; undefined when either sequence is constant.
pub fn pearson(est: &[f64], reference: &[f64]) -> Result<f64> {
    check_pair(est, reference, 2)?;
    let (mx, my) = (mean(est), mean(reference));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in est.iter().zip(reference) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Undefined("correlation of a constant sequence"));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlandAltman {
    pub bias: f64,
    pub sd: f64,
    pub loa_low: f64,
    pub loa_high: f64,
    /// Per pair `(est + ref) / 2`.
    pub means: Vec<f64>,
    /// Per pair `est - ref`.
    pub diffs: Vec<f64>,
}

impl BlandAltman {
    pub fn coverage(&self) -> f64 {
        let inside = self
            .diffs
            .iter()
            .filter(|&&d| d >= self.loa_low && d <= self.loa_high)
            .count();
        inside as f64 / self.diffs.len() as f64
    }
}

/// Bias and `bias ± 1.96 s` limits of agreement.
pub fn bland_altman(est: &[f64], reference: &[f64]) -> Result<BlandAltman> {
    check_pair(est, reference, 2)?;
    let d = diffs(est, reference);
    let bias = mean(&d);
    let sd = pop_std(&d, bias);
    Ok(BlandAltman {
        bias,
        sd,
        loa_low: bias - LOA_Z * sd,
        loa_high: bias + LOA_Z * sd,
        means: est
            .iter()
            .zip(reference)
            .map(|(e, r)| 0.5 * (e + r))
            .collect(),
        diffs: d,
    })
}

/// Inclusive `|ME| <= 5 mmHg` and `STD <= 8 mmHg`.
pub fn ieee_check(me: f64, std: f64) -> bool {
    me.abs() <= IEEE_MAX_ABS_ME && std <= IEEE_MAX_STD
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    #[serde(rename = "me_mmHg")]
    pub me_mmhg: f64,
    #[serde(rename = "mae_mmHg")]
    pub mae_mmhg: f64,
    #[serde(rename = "std_mmHg")]
    pub std_mmhg: f64,
    /// `None` when either sequence is constant.
    pub pearson_r: Option<f64>,
    #[serde(rename = "ba_bias_mmHg")]
    pub ba_bias_mmhg: f64,
    #[serde(rename = "ba_loa_low_mmHg")]
    pub ba_loa_low_mmhg: f64,
    #[serde(rename = "ba_loa_high_mmHg")]
    pub ba_loa_high_mmhg: f64,
    pub ieee_pass: bool,
    pub n: usize,
}

/// All statistics for one estimate/reference pairing.
pub fn evaluate(est: &[f64], reference: &[f64]) -> Result<(EvalReport, BlandAltman)> {
    let s = error_stats(est, reference)?;
    let ba = bland_altman(est, reference)?;
    let r = match pearson(est, reference) {
        Ok(r) => Some(r),
        Err(Error::Undefined(_)) => None,
        Err(e) => return Err(e),
    };
    Ok((
        EvalReport {
            me_mmhg: s.me,
            mae_mmhg: s.mae,
            std_mmhg: s.std,
            pearson_r: r,
            ba_bias_mmhg: ba.bias,
            ba_loa_low_mmhg: ba.loa_low,
            ba_loa_high_mmhg: ba.loa_high,
            ieee_pass: ieee_check(s.me, s.std),
            n: est.len(),
        },
        ba,
    ))
}

impl EvalReport {
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }
}

/// `mean_mmHg,diff_mmHg` rows for a Bland-Altman plot.
pub fn write_bland_altman_csv(ba: &BlandAltman, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mean_mmHg", "diff_mmHg"])?;
    for (m, d) in ba.means.iter().zip(&ba.diffs) {
        w.write_record([m.to_string(), d.to_string()])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

/// `reference_mmHg,estimated_mmHg` rows for a regression plot.
pub fn write_regression_csv(est: &[f64], reference: &[f64], path: &Path) -> Result<()> {
    check_pair(est, reference, 0)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["reference_mmHg", "estimated_mmHg"])?;
    for (e, r) in est.iter().zip(reference) {
        w.write_record([r.to_string(), e.to_string()])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}
