//! Peak-of-AC (pAC) detection between consecutive AO instants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::peaks::PeakList;
use crate::signal::{moving_average_slice, odd_samples, ButterworthHighpass, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacParams {
    pub hp_cutoff_hz: f64,
    pub hp_order: usize,
    pub ma_window_ms: f64,
}

impl Default for PacParams {
    fn default() -> Self {
        Self {
            hp_cutoff_hz: 10.0,
            hp_order: 4,
            ma_window_ms: 15.0,
        }
    }
}

impl PacParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.hp_cutoff_hz > 0.0) {
            return Err(Error::param("hp_cutoff_hz", "must be > 0"));
        }
        if !(self.ma_window_ms > 0.0) {
            return Err(Error::param("ma_window_ms", "must be > 0"));
        }
        if self.hp_order == 0 {
            return Err(Error::param("hp_order", "must be >= 1"));
        }
        Ok(())
    }
}

/// One optional pAC per AO-AO interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PacList {
    pub per_interval: Vec<Option<usize>>,
}

impl PacList {
    pub fn found(&self) -> PeakList {
        PeakList::from_unsorted(self.per_interval.iter().flatten().copied().collect())
    }

    pub fn missing(&self) -> usize {
        self.per_interval.iter().filter(|p| p.is_none()).count()
    }

    pub fn len(&self) -> usize {
        self.per_interval.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_interval.is_empty()
    }
}

/// `(M2, M1) = (round((3 p_i + p_next) / 4), round((p_i + p_next) / 2))`.
pub fn segment_bounds(p_i: usize, p_next: usize) -> Result<(usize, usize)> {
    if p_next <= p_i {
        return Err(Error::NonIncreasing(p_i, p_next));
    }
    let (a, b) = (p_i as f64, p_next as f64);
    let m1 = ((a + b) / 2.0).round() as usize;
    let m2 = ((3.0 * a + b) / 4.0).round() as usize;
    Ok((m2, m1))
}

const DEGENERATE_PTP: f64 = 1e-9;

/// Finds the pAC in `[M2, M1]` of every AO-AO interval: the segment is
/// mean-removed, scaled to unit peak magnitude, smoothed, high-passed, and
/// its largest interior sample is taken.
pub fn detect_pac(x: &SampledSignal, aos: &PeakList, p: &PacParams) -> Result<PacList> {
    p.validate()?;
    if aos.len() < 2 {
        return Err(Error::TooFewPeaks {
            needed: 2,
            found: aos.len(),
        });
    }
    if let Some(&last) = aos.last() {
        if last >= x.len() {
            return Err(Error::param(
                "aos",
                format!("AO {last} is outside a signal of {} samples", x.len()),
            ));
        }
    }
    let hp = ButterworthHighpass::design(p.hp_cutoff_hz, x.fs(), p.hp_order)?;
    let ma = odd_samples(p.ma_window_ms, x.fs()).max(1);
    let per_interval = aos
        .windows(2)
        .map(|w| {
            let (m2, m1) = segment_bounds(w[0], w[1])?;
            Ok(segment_peak(&x.samples()[m2..=m1], &hp, ma).map(|k| m2 + k))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PacList { per_interval })
}

fn segment_peak(seg: &[f64], hp: &ButterworthHighpass, ma: usize) -> Option<usize> {
    if seg.len() < 3 {
        return None;
    }
    let mean = seg.iter().sum::<f64>() / seg.len() as f64;
    let centred: Vec<f64> = seg.iter().map(|v| v - mean).collect();
    let peak = centred.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(peak > 0.0) {
        return None;
    }
    let unit: Vec<f64> = centred.iter().map(|v| v / peak).collect();
    let y = hp.filtfilt(&moving_average_slice(&unit, ma));
    let interior = &y[1..y.len() - 1];
    let (lo, hi) = interior
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if !(hi - lo >= DEGENERATE_PTP) {
        return None;
    }
    let mut best = 0;
    for (k, &v) in interior.iter().enumerate() {
        if v > interior[best] {
            best = k;
        }
    }
    Some(best + 1)
}
