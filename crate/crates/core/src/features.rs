//! Per-beat ejection-time surrogate and heart rate.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio::write_atomic;
use crate::pac_detect::PacList;
use crate::peaks::PeakList;

pub const HR_GUARD_BPM: (f64, f64) = (20.0, 250.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatFeature {
    /// Position of the beat among the AO intervals it was derived from.
    pub beat_index: usize,
    pub ao_idx: usize,
    pub pac_idx: usize,
    /// `pAC - AO` in milliseconds.
    pub lvet_ms: f64,
    /// From the interval to the next AO.
    pub hr_bpm: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DropCounts {
    pub missing_pac: usize,
    pub hr_out_of_range: usize,
    pub bad_lvet: usize,
}

impl DropCounts {
    pub fn total(&self) -> usize {
        self.missing_pac + self.hr_out_of_range + self.bad_lvet
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeatTable {
    pub fs: f64,
    pub beats: Vec<BeatFeature>,
    pub dropped: DropCounts,
}

/// One beat per AO interval that has a pAC and passes the guards.
pub fn extract_beats(aos: &PeakList, pacs: &PacList, fs: f64) -> Result<BeatTable> {
    if aos.len() < 2 {
        return Err(Error::TooFewPeaks {
            needed: 2,
            found: aos.len(),
        });
    }
    if pacs.len() != aos.len() - 1 {
        return Err(Error::LengthMismatch {
            left: aos.len() - 1,
            right: pacs.len(),
        });
    }
    if !(fs > 0.0) {
        return Err(Error::param("fs", "must be > 0"));
    }
    let mut beats = Vec::new();
    let mut dropped = DropCounts::default();
    for (i, (w, pac)) in aos.windows(2).zip(&pacs.per_interval).enumerate() {
        let Some(pac) = *pac else {
            dropped.missing_pac += 1;
            continue;
        };
        let (ao, next) = (w[0], w[1]);
        let rr_ms = (next - ao) as f64 * 1000.0 / fs;
        let hr_bpm = 60_000.0 / rr_ms;
        if !(HR_GUARD_BPM.0..=HR_GUARD_BPM.1).contains(&hr_bpm) {
            dropped.hr_out_of_range += 1;
            continue;
        }
        if pac <= ao || pac >= next {
            dropped.bad_lvet += 1;
            continue;
        }
        beats.push(BeatFeature {
            beat_index: i,
            ao_idx: ao,
            pac_idx: pac,
            lvet_ms: (pac - ao) as f64 * 1000.0 / fs,
            hr_bpm,
        });
    }
    Ok(BeatTable { fs, beats, dropped })
}

/// Beat row as stored on disk, times in ms from the start of the recording.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeatRow {
    pub beat_index: usize,
    pub ao_ms: f64,
    pub pac_ms: f64,
    pub lvet_ms: f64,
    pub hr_bpm: f64,
}

impl BeatTable {
    pub fn rows(&self) -> Vec<BeatRow> {
        let to_ms = |i: usize| i as f64 * 1000.0 / self.fs;
        self.beats
            .iter()
            .map(|b| BeatRow {
                beat_index: b.beat_index,
                ao_ms: to_ms(b.ao_idx),
                pac_ms: to_ms(b.pac_idx),
                lvet_ms: b.lvet_ms,
                hr_bpm: b.hr_bpm,
            })
            .collect()
    }

    pub fn lvet_ms(&self) -> Vec<f64> {
        self.beats.iter().map(|b| b.lvet_ms).collect()
    }

    pub fn hr_bpm(&self) -> Vec<f64> {
        self.beats.iter().map(|b| b.hr_bpm).collect()
    }
}

pub fn write_beats_csv(rows: &[BeatRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        w.write_record(["beat_index", "ao_ms", "pac_ms", "lvet_ms", "hr_bpm"])?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn read_beats_csv(path: &Path) -> Result<Vec<BeatRow>> {
    let text = crate::fsio::read_to_string(path)?;
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let rows = r
        .deserialize()
        .collect::<std::result::Result<Vec<BeatRow>, _>>()?;
    for (k, row) in rows.iter().enumerate() {
        for (column, v) in [
            ("ao_ms", row.ao_ms),
            ("pac_ms", row.pac_ms),
            ("lvet_ms", row.lvet_ms),
            ("hr_bpm", row.hr_bpm),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: k + 1,
                    column: column.into(),
                });
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pacs(v: Vec<Option<usize>>) -> PacList {
        PacList { per_interval: v }
    }

    #[test]
    fn lvet_and_hr_arithmetic() {
        let aos = PeakList::new(vec![1000, 2000]).unwrap();
        let t = extract_beats(&aos, &pacs(vec![Some(1350)]), 1000.0).unwrap();
        assert_eq!(t.beats.len(), 1);
        assert_eq!(t.beats[0].lvet_ms, 350.0);
        assert_eq!(t.beats[0].hr_bpm, 60.0);
    }

    #[test]
    fn half_second_spacing_is_120_bpm() {
        let aos = PeakList::new(vec![0, 500, 1000]).unwrap();
        let t = extract_beats(&aos, &pacs(vec![Some(200), Some(700)]), 1000.0).unwrap();
        assert!(t.beats.iter().all(|b| b.hr_bpm == 120.0));
    }

    #[test]
    fn missing_pac_is_counted() {
        let aos = PeakList::new(vec![0, 1000, 2000]).unwrap();
        let t = extract_beats(&aos, &pacs(vec![None, Some(1300)]), 1000.0).unwrap();
        assert_eq!(t.beats.len(), 1);
        assert_eq!(t.beats[0].beat_index, 1);
        assert_eq!(t.dropped.missing_pac, 1);
    }

    #[test]
    fn guard_drops_implausible_rate() {
        // 200 ms interval is 300 bpm; 4 s interval is 15 bpm.
        let aos = PeakList::new(vec![0, 200, 4200]).unwrap();
        let t = extract_beats(&aos, &pacs(vec![Some(100), Some(1000)]), 1000.0).unwrap();
        assert!(t.beats.is_empty());
        assert_eq!(t.dropped.hr_out_of_range, 2);
    }

    #[test]
    fn mismatched_lengths() {
        let aos = PeakList::new(vec![0, 1000, 2000]).unwrap();
        assert!(extract_beats(&aos, &pacs(vec![None]), 1000.0).is_err());
        assert!(extract_beats(&PeakList::new(vec![1]).unwrap(), &pacs(vec![]), 1000.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.beats.csv");
        let rows = vec![BeatRow {
            beat_index: 3,
            ao_ms: 1000.0,
            pac_ms: 1312.5,
            lvet_ms: 312.5,
            hr_bpm: 72.5,
        }];
        write_beats_csv(&rows, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("beat_index,ao_ms,pac_ms,lvet_ms,hr_bpm"));
        assert_eq!(read_beats_csv(&path).unwrap(), rows);
    }
}
