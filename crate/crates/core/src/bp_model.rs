//! Per-subject calibration of `BP = a * ln(LVET') + b * HR + c` and
//! beat-by-beat estimation.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio::{read_to_string, write_atomic};
use crate::peaks::PeakList;
use crate::signal::SampledSignal;

/// Plausible beat-level pressure range in mmHg.
pub const BP_BOUNDS_MMHG: (f64, f64) = (40.0, 220.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    Sbp,
    Dbp,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Target::Sbp => "sbp",
            Target::Dbp => "dbp",
        })
    }
}

impl std::str::FromStr for Target {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sbp" => Ok(Target::Sbp),
            "dbp" => Ok(Target::Dbp),
            other => Err(Error::param(
                "target",
                format!("expected sbp or dbp, got {other:?}"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LvetUnits {
    #[serde(rename = "ms")]
    Milliseconds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BpModel {
    pub subject_id: String,
    pub target: Target,
    /// mmHg per ln(ms).
    pub a: f64,
    /// mmHg per bpm.
    pub b: f64,
    pub c: f64,
    pub n_train: usize,
    pub lvet_units: LvetUnits,
    /// Ratio of the largest to smallest diagonal of R for the column-scaled
    /// design matrix.
    pub condition_estimate: f64,
    /// First beat index not used for calibration, when split chronologically.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_from_beat_index: Option<usize>,
}

impl BpModel {
    pub fn predict(&self, lvet_ms: f64, hr_bpm: f64) -> f64 {
        self.a * lvet_ms.ln() + self.b * hr_bpm + self.c
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let m: BpModel = serde_json::from_str(&read_to_string(path)?)?;
        if ![m.a, m.b, m.c].iter().all(|v| v.is_finite()) {
            return Err(Error::Config(format!(
                "{}: model coefficients must be finite",
                path.display()
            )));
        }
        Ok(m)
    }
}

/// Beat-level reference pressures taken from the ABP channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefBeatBp {
    pub beat_index: usize,
    #[serde(rename = "sbp_mmHg")]
    pub sbp_mmhg: f64,
    #[serde(rename = "dbp_mmHg")]
    pub dbp_mmhg: f64,
}

impl RefBeatBp {
    pub fn value(&self, target: Target) -> f64 {
        match target {
            Target::Sbp => self.sbp_mmhg,
            Target::Dbp => self.dbp_mmhg,
        }
    }
}

/// SBP and DBP as the ABP maximum and minimum over each `[AO_i, AO_{i+1}]`.
/// Beats with `sbp <= dbp` or values outside the plausible range are skipped.
pub fn reference_bp(abp: Option<&SampledSignal>, aos: &PeakList) -> Result<Vec<RefBeatBp>> {
    let windows = aos.windows(2).enumerate().map(|(i, w)| (i, w[0], w[1]));
    reference_windows(abp, windows)
}

/// Reference pressures over explicit `(beat_index, start, end)` sample windows.
pub fn reference_windows(
    abp: Option<&SampledSignal>,
    windows: impl IntoIterator<Item = (usize, usize, usize)>,
) -> Result<Vec<RefBeatBp>> {
    let abp = abp.ok_or(Error::MissingReference)?;
    let x = abp.samples();
    let (lo, hi) = BP_BOUNDS_MMHG;
    let mut out = Vec::new();
    for (beat_index, start, end) in windows {
        if end >= x.len() || start >= end {
            return Err(Error::param(
                "aos",
                format!(
                    "beat window [{start}, {end}] does not fit an ABP channel of {} samples",
                    x.len()
                ),
            ));
        }
        let win = &x[start..=end];
        let sbp = win.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let dbp = win.iter().copied().fold(f64::INFINITY, f64::min);
        if sbp > dbp && (lo..=hi).contains(&sbp) && (lo..=hi).contains(&dbp) {
            out.push(RefBeatBp {
                beat_index,
                sbp_mmhg: sbp,
                dbp_mmhg: dbp,
            });
        }
    }
    Ok(out)
}

/// Number of training items for a chronological split: `ceil(frac * n)`.
pub fn train_count(n: usize, frac: f64) -> Result<usize> {
    if !(frac > 0.0 && frac < 1.0) {
        return Err(Error::param(
            "frac",
            format!("must lie in (0, 1), got {frac}"),
        ));
    }
    // The small slack keeps products such as 0.7 * 10 from rounding up.
    let train = ((frac * n as f64) - 1e-9).ceil().max(0.0) as usize;
    if train < 3 {
        return Err(Error::SplitTooSmall { train });
    }
    Ok(train.min(n))
}

/// Chronological split: the first `ceil(frac * n)` items train, the rest test.
pub fn split_calibration<T>(items: &[T], frac: f64) -> Result<(&[T], &[T])> {
    Ok(items.split_at(train_count(items.len(), frac)?))
}

const RANK_TOL: f64 = 1e-10;

/// Least-squares fit of `bp = a ln(lvet_ms) + b hr_bpm + c` through a
/// Householder QR factorisation of the column-scaled design matrix.
pub fn calibrate(
    subject_id: &str,
    lvet_ms: &[f64],
    hr_bpm: &[f64],
    bp_mmhg: &[f64],
    target: Target,
) -> Result<BpModel> {
    let n = bp_mmhg.len();
    if lvet_ms.len() != n || hr_bpm.len() != n {
        return Err(Error::LengthMismatch {
            left: lvet_ms.len().min(hr_bpm.len()),
            right: n,
        });
    }
    if n < 3 {
        return Err(Error::TooFewPeaks {
            needed: 3,
            found: n,
        });
    }
    let mut cols = [Vec::with_capacity(n), hr_bpm.to_vec(), vec![1.0; n]];
    for &l in lvet_ms {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::param(
                "lvet_ms",
                format!("must be positive and finite, got {l}"),
            ));
        }
        cols[0].push(l.ln());
    }
    if !hr_bpm.iter().chain(bp_mmhg).all(|v| v.is_finite()) {
        return Err(Error::param("calibration data", "must be finite"));
    }
    let (x, cond) = least_squares(cols, bp_mmhg.to_vec())?;
    Ok(BpModel {
        subject_id: subject_id.to_owned(),
        target,
        a: x[0],
        b: x[1],
        c: x[2],
        n_train: n,
        lvet_units: LvetUnits::Milliseconds,
        condition_estimate: cond,
        test_from_beat_index: None,
    })
}

/// Solves `min |A x - y|` for a tall matrix given by its three columns.
/// Returns the solution and `max |R_ii| / min |R_ii|` after scaling the
/// columns to unit norm.
fn least_squares(mut cols: [Vec<f64>; 3], mut y: Vec<f64>) -> Result<([f64; 3], f64)> {
    let n = y.len();
    let mut scale = [1.0; 3];
    for (j, c) in cols.iter_mut().enumerate() {
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Singular(f64::INFINITY));
        }
        c.iter_mut().for_each(|v| *v /= norm);
        scale[j] = norm;
    }
    let mut r = [[0.0; 3]; 3];
    for k in 0..3 {
        // Householder vector for column k, rows k..n.
        let alpha = {
            let norm = cols[k][k..].iter().map(|v| v * v).sum::<f64>().sqrt();
            if cols[k][k] > 0.0 {
                -norm
            } else {
                norm
            }
        };
        let mut v: Vec<f64> = cols[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm2 = v.iter().map(|x| x * x).sum::<f64>();
        let reflect = |w: &mut [f64]| {
            if vnorm2 == 0.0 {
                return;
            }
            let dot: f64 = v.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            w.iter_mut().zip(&v).for_each(|(wi, vi)| *wi -= f * vi);
        };
        for col in cols.iter_mut().skip(k) {
            reflect(&mut col[k..]);
        }
        reflect(&mut y[k..]);
        for (j, col) in cols.iter().enumerate().skip(k) {
            r[k][j] = col[k];
        }
    }
    let diag: Vec<f64> = (0..3).map(|i| r[i][i].abs()).collect();
    let dmax = diag.iter().copied().fold(0.0, f64::max);
    let dmin = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let cond = if dmin > 0.0 {
        dmax / dmin
    } else {
        f64::INFINITY
    };
    if !(dmin > RANK_TOL * dmax) || n < 3 {
        return Err(Error::Singular(cond));
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let s: f64 = (i + 1..3).map(|j| r[i][j] * x[j]).sum();
        x[i] = (y[i] - s) / r[i][i];
    }
    for j in 0..3 {
        x[j] /= scale[j];
    }
    Ok((x, cond))
}

/// `a ln(lvet_ms) + b hr_bpm + c` per beat.
pub fn estimate(model: &BpModel, lvet_ms: &[f64], hr_bpm: &[f64]) -> Result<Vec<f64>> {
    if lvet_ms.len() != hr_bpm.len() {
        return Err(Error::LengthMismatch {
            left: lvet_ms.len(),
            right: hr_bpm.len(),
        });
    }
    lvet_ms
        .iter()
        .zip(hr_bpm)
        .map(|(&l, &h)| {
            if l > 0.0 && l.is_finite() && h.is_finite() {
                Ok(model.predict(l, h))
            } else {
                Err(Error::param(
                    "beats",
                    format!("invalid beat (lvet_ms {l}, hr_bpm {h})"),
                ))
            }
        })
        .collect()
}
