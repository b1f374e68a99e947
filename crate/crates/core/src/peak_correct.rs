//! Interval-based repair of an AO peak list: fills missed beats and drops
//! false detections on the systolic and diastolic profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::peaks::{median, PeakList};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorrectionParams {
    /// `TH = th_frac * M`.
    pub th_frac: f64,
    /// Exclusion margin next to existing peaks when searching for a missed one.
    pub tau_search_ms: f64,
    pub max_passes: usize,
    /// `M` for an interval is the median of this many intervals on each side
    /// of it (fewer only when the list is short); 0 uses every interval.
    pub median_half_window: usize,
}

impl Default for CorrectionParams {
    fn default() -> Self {
        Self {
            th_frac: 0.25,
            tau_search_ms: 60.0,
            max_passes: 3,
            median_half_window: 8,
        }
    }
}

impl CorrectionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.th_frac > 0.0 && self.th_frac < 1.0) {
            return Err(Error::param(
                "th_frac",
                format!("must lie in (0, 1), got {}", self.th_frac),
            ));
        }
        if !(self.tau_search_ms > 0.0) {
            return Err(Error::param("tau_search_ms", "must be > 0"));
        }
        if self.max_passes == 0 {
            return Err(Error::param("max_passes", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrectionReport {
    pub inserted: Vec<usize>,
    pub removed_systole: Vec<usize>,
    pub removed_diastole: Vec<usize>,
    /// Median of all inter-peak intervals after the last change, in samples.
    pub median_interval_samples: f64,
    pub passes: usize,
}

impl CorrectionReport {
    pub fn changes(&self) -> usize {
        self.inserted.len() + self.removed_systole.len() + self.removed_diastole.len()
    }

    fn record_insert(&mut self, idx: usize) {
        if !take(&mut self.removed_systole, idx) && !take(&mut self.removed_diastole, idx) {
            self.inserted.push(idx);
        }
    }

    fn record_removal(&mut self, idx: usize, systole: bool) {
        if !take(&mut self.inserted, idx) {
            if systole {
                self.removed_systole.push(idx);
            } else {
                self.removed_diastole.push(idx);
            }
        }
    }
}

fn take(v: &mut Vec<usize>, idx: usize) -> bool {
    match v.iter().position(|&x| x == idx) {
        Some(pos) => {
            v.remove(pos);
            true
        }
        None => false,
    }
}

fn median_interval(p: &[usize]) -> f64 {
    let d: Vec<f64> = p.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    median(&d)
}

/// Reference interval `M` around interval `i` (between `p[i]` and `p[i+1]`).
fn local_median(p: &[usize], i: usize, half: usize) -> f64 {
    let gaps = p.len() - 1;
    if half == 0 || 2 * half + 1 >= gaps {
        return median_interval(p);
    }
    let lo = i.saturating_sub(half).min(gaps - (2 * half + 1));
    median_interval(&p[lo..=lo + 2 * half + 1])
}

fn gap(p: &[usize], i: usize) -> f64 {
    (p[i + 1] - p[i]) as f64
}

/// Applies the three repair rules to `pks`, using `x` for the maxima search.
pub fn correct_peaks(
    x: &SampledSignal,
    pks: &PeakList,
    p: &CorrectionParams,
) -> Result<(PeakList, CorrectionReport)> {
    p.validate()?;
    if pks.len() < 3 {
        return Err(Error::TooFewPeaks {
            needed: 3,
            found: pks.len(),
        });
    }
    if let Some(&last) = pks.last() {
        if last >= x.len() {
            return Err(Error::param(
                "pks",
                format!("peak {last} is outside a signal of {} samples", x.len()),
            ));
        }
    }
    let samples = x.samples();
    let tau = x.ms_to_samples(p.tau_search_ms);
    let mut peaks = pks.to_vec();
    let mut report = CorrectionReport::default();

    for _ in 0..p.max_passes {
        let before = peaks.clone();
        report.passes += 1;
        let h = p.median_half_window;
        missing_beats(&mut peaks, samples, tau, p.th_frac, h, &mut report);
        systole_false_positives(&mut peaks, h, &mut report);
        diastole_false_positives(&mut peaks, p.th_frac, h, &mut report);
        if peaks == before {
            break;
        }
    }
    report.median_interval_samples = median_interval(&peaks);
    for v in [
        &mut report.inserted,
        &mut report.removed_systole,
        &mut report.removed_diastole,
    ] {
        v.sort_unstable();
    }
    Ok((PeakList::new(peaks)?, report))
}

/// Rule 1: a gap longer than `M + 3 TH` hides `round(d / M) - 1` beats
/// (at least one); each is the signal maximum in its share of the gap,
/// `tau` away from the share's edges.
fn missing_beats(
    peaks: &mut Vec<usize>,
    x: &[f64],
    tau: usize,
    th_frac: f64,
    half: usize,
    r: &mut CorrectionReport,
) {
    let mut i = 0;
    while i + 1 < peaks.len() {
        let m = local_median(peaks, i, half);
        let d = gap(peaks, i);
        if d - m <= 3.0 * th_frac * m {
            i += 1;
            continue;
        }
        let missing = ((d / m).round() as usize).saturating_sub(1).max(1);
        let share = d / (missing + 1) as f64;
        let start = peaks[i] as f64;
        let mut found = Vec::with_capacity(missing);
        for j in 1..=missing {
            let lo = if j == 1 {
                peaks[i]
            } else {
                (start + (j as f64 - 0.5) * share) as usize
            };
            let hi = if j == missing {
                peaks[i + 1]
            } else {
                (start + (j as f64 + 0.5) * share) as usize
            };
            if let Some(k) = argmax_open(x, lo + tau, hi.saturating_sub(tau)) {
                found.push(k);
            }
        }
        let added = found.len();
        for (offset, k) in found.into_iter().enumerate() {
            peaks.insert(i + 1 + offset, k);
            r.record_insert(k);
        }
        i += added + 1;
    }
}

/// Index of the (earliest) maximum of `x` strictly inside `(lo, hi)`.
fn argmax_open(x: &[f64], lo: usize, hi: usize) -> Option<usize> {
    let (a, b) = (lo + 1, hi.min(x.len()));
    if a >= b {
        return None;
    }
    let mut best = a;
    for k in a..b {
        if x[k] > x[best] {
            best = k;
        }
    }
    Some(best)
}

/// Rule 2: an interval shorter than `0.3 M` ends on a false peak.
fn systole_false_positives(peaks: &mut Vec<usize>, half: usize, r: &mut CorrectionReport) {
    let mut i = 0;
    while i + 1 < peaks.len() && peaks.len() >= 3 {
        let m = local_median(peaks, i, half);
        if gap(peaks, i) - m < -0.7 * m {
            let idx = peaks.remove(i + 1);
            r.record_removal(idx, true);
        } else {
            i += 1;
        }
    }
}

/// Rule 3: two consecutive short intervals share a false middle peak.
fn diastole_false_positives(
    peaks: &mut Vec<usize>,
    th_frac: f64,
    half: usize,
    r: &mut CorrectionReport,
) {
    let mut i = 0;
    while i + 2 < peaks.len() && peaks.len() >= 3 {
        let m = local_median(peaks, i, half);
        let th = th_frac * m;
        if gap(peaks, i) - m < -th && gap(peaks, i + 1) - m < -th {
            let idx = peaks.remove(i + 1);
            r.record_removal(idx, false);
        } else {
            i += 1;
        }
    }
}
