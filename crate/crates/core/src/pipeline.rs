//! Composition of the stages into the detect, calibrate, estimate and
//! evaluate steps, plus their file formats.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ao_detect::{detect_ao_staged, AoDetection};
use crate::bp_model::{
    calibrate, reference_windows, split_calibration, BpModel, RefBeatBp, Target,
};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::features::{extract_beats, BeatRow, BeatTable, DropCounts};
use crate::fsio::{read_to_string, write_atomic};
use crate::metrics::{evaluate, BlandAltman, EvalReport};
use crate::pac_detect::{detect_pac, PacList};
use crate::peak_correct::{correct_peaks, CorrectionReport};
use crate::peaks::PeakList;
use crate::signal::{Recording, SampledSignal};

/// Everything produced by the fiducial pipeline on one SCG channel.
#[derive(Debug, Clone)]
pub struct Fiducials {
    pub detection: AoDetection,
    pub aos: PeakList,
    pub correction: CorrectionReport,
    pub pacs: PacList,
    pub beats: BeatTable,
}

/// AO detection, peak correction, pAC detection and beat features.
pub fn detect_fiducials(x: &SampledSignal, cfg: &PipelineConfig) -> Result<Fiducials> {
    let detection = detect_ao_staged(x, &cfg.ao_detect)?;
    let (aos, correction) =
        correct_peaks(&detection.detrended, &detection.peaks, &cfg.peak_correct)?;
    let pacs = detect_pac(x, &aos, &cfg.pac_detect)?;
    let beats = extract_beats(&aos, &pacs, x.fs())?;
    Ok(Fiducials {
        detection,
        aos,
        correction,
        pacs,
        beats,
    })
}

/// Summary written next to the beat table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectReport {
    pub subject_id: String,
    pub fs: f64,
    pub ao_detected: usize,
    pub ao_corrected: usize,
    pub correction: CorrectionReport,
    pub pac_missing: usize,
    pub beats: usize,
    pub dropped: DropCounts,
    pub beat_coherence: f64,
}

impl Fiducials {
    pub fn report(&self, subject_id: &str) -> DetectReport {
        DetectReport {
            subject_id: subject_id.to_owned(),
            fs: self.beats.fs,
            ao_detected: self.detection.peaks.len(),
            ao_corrected: self.aos.len(),
            correction: self.correction.clone(),
            pac_missing: self.pacs.missing(),
            beats: self.beats.beats.len(),
            dropped: self.beats.dropped.clone(),
            beat_coherence: self.detection.coherence,
        }
    }

    /// Intermediate signals as CSV: `time_s,detrended,s,t_env,cce`.
    pub fn write_stages_csv(&self, path: &Path) -> Result<()> {
        let d = &self.detection;
        let fs = d.detrended.fs();
        let s = d.systolic_profile();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["time_s", "detrended", "s", "t_env", "cce"])?;
        for i in 0..d.detrended.len() {
            w.write_record([
                (i as f64 / fs).to_string(),
                d.detrended.samples()[i].to_string(),
                s.get(i).copied().unwrap_or(0.0).to_string(),
                d.t_env.get(i).copied().unwrap_or(0.0).to_string(),
                d.cce.get(i).copied().unwrap_or(0.0).to_string(),
            ])?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::io(path, e.into_error()))?;
        write_atomic(path, &bytes)
    }
}

impl DetectReport {
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }
}

fn ms_to_index(ms: f64, fs: f64) -> usize {
    (ms * fs / 1000.0).round().max(0.0) as usize
}

/// Reference pressures for beat rows, each over `[AO, next AO]` with the
/// next AO recovered from the row's heart rate.
pub fn references_for_rows(
    abp: Option<&SampledSignal>,
    rows: &[BeatRow],
) -> Result<Vec<RefBeatBp>> {
    let abp = abp.ok_or(Error::MissingReference)?;
    let fs = abp.fs();
    reference_windows(
        Some(abp),
        rows.iter().map(|r| {
            (
                r.beat_index,
                ms_to_index(r.ao_ms, fs),
                ms_to_index(r.ao_ms + 60_000.0 / r.hr_bpm, fs),
            )
        }),
    )
}

/// Beats that have a reference, in chronological order.
fn pair_with_references<'a>(
    rows: &'a [BeatRow],
    refs: &[RefBeatBp],
) -> Vec<(&'a BeatRow, RefBeatBp)> {
    let mut out = Vec::with_capacity(refs.len());
    let mut it = refs.iter().peekable();
    for r in rows {
        while it.peek().is_some_and(|x| x.beat_index < r.beat_index) {
            it.next();
        }
        if let Some(x) = it.peek().filter(|x| x.beat_index == r.beat_index) {
            out.push((r, **x));
        }
    }
    out
}

/// Fits a model on the leading `frac` of the beats that have a reference.
pub fn calibrate_rows(
    subject_id: &str,
    rows: &[BeatRow],
    abp: Option<&SampledSignal>,
    target: Target,
    frac: f64,
) -> Result<BpModel> {
    let refs = references_for_rows(abp, rows)?;
    let paired = pair_with_references(rows, &refs);
    let (train, test) = split_calibration(&paired, frac)?;
    let lvet: Vec<f64> = train.iter().map(|(r, _)| r.lvet_ms).collect();
    let hr: Vec<f64> = train.iter().map(|(r, _)| r.hr_bpm).collect();
    let bp: Vec<f64> = train.iter().map(|(_, x)| x.value(target)).collect();
    let mut model = calibrate(subject_id, &lvet, &hr, &bp, target)?;
    model.test_from_beat_index = Some(match test.first() {
        Some((r, _)) => r.beat_index,
        None => train.last().map_or(0, |(r, _)| r.beat_index + 1),
    });
    Ok(model)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub beat_index: usize,
    pub predicted_mmhg: f64,
    pub reference_mmhg: Option<f64>,
}

/// Applies `model` to every row; references are attached where available.
pub fn predict_rows(
    model: &BpModel,
    rows: &[BeatRow],
    refs: Option<&[RefBeatBp]>,
) -> Result<Vec<Prediction>> {
    let lvet: Vec<f64> = rows.iter().map(|r| r.lvet_ms).collect();
    let hr: Vec<f64> = rows.iter().map(|r| r.hr_bpm).collect();
    let pred = crate::bp_model::estimate(model, &lvet, &hr)?;
    let paired: Vec<(usize, f64)> = match refs {
        Some(refs) => pair_with_references(rows, refs)
            .into_iter()
            .map(|(r, x)| (r.beat_index, x.value(model.target)))
            .collect(),
        None => Vec::new(),
    };
    Ok(rows
        .iter()
        .zip(pred)
        .map(|(r, p)| Prediction {
            beat_index: r.beat_index,
            predicted_mmhg: p,
            reference_mmhg: paired
                .binary_search_by_key(&r.beat_index, |&(i, _)| i)
                .ok()
                .map(|k| paired[k].1),
        })
        .collect())
}

/// Writes `beat_index,predicted_mmHg[,reference_mmHg]`; the reference
/// column is present when every prediction has one.
pub fn write_predictions_csv(preds: &[Prediction], path: &Path) -> Result<()> {
    let with_ref = !preds.is_empty() && preds.iter().all(|p| p.reference_mmhg.is_some());
    let mut w = csv::Writer::from_writer(Vec::new());
    if with_ref {
        w.write_record(["beat_index", "predicted_mmHg", "reference_mmHg"])?;
    } else {
        w.write_record(["beat_index", "predicted_mmHg"])?;
    }
    for p in preds {
        let mut rec = vec![p.beat_index.to_string(), p.predicted_mmhg.to_string()];
        if let (true, Some(r)) = (with_ref, p.reference_mmhg) {
            rec.push(r.to_string());
        }
        w.write_record(&rec)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::io(path, e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn read_predictions_csv(path: &Path) -> Result<Vec<Prediction>> {
    let text = read_to_string(path)?;
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let bi = col("beat_index").ok_or(Error::MissingChannel("beat_index"))?;
    let pi = col("predicted_mmHg").ok_or(Error::MissingChannel("predicted_mmHg"))?;
    let ri = col("reference_mmHg");
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = k + 1;
        let num = |i: usize, column: &str| -> Result<f64> {
            let raw = rec.get(i).unwrap_or("");
            let v: f64 = raw.parse().map_err(|_| Error::Malformed {
                row,
                column: column.into(),
                value: raw.into(),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row,
                    column: column.into(),
                });
            }
            Ok(v)
        };
        let raw_idx = rec.get(bi).unwrap_or("");
        let beat_index = raw_idx.parse().map_err(|_| Error::Malformed {
            row,
            column: "beat_index".into(),
            value: raw_idx.into(),
        })?;
        out.push(Prediction {
            beat_index,
            predicted_mmhg: num(pi, "predicted_mmHg")?,
            reference_mmhg: ri.map(|i| num(i, "reference_mmHg")).transpose()?,
        });
    }
    Ok(out)
}

/// Reference values keyed by beat index. Uses the `reference_mmHg` column,
/// or `predicted_mmHg` when the file is another estimator's output.
pub fn read_references_csv(path: &Path) -> Result<Vec<(usize, f64)>> {
    let text = read_to_string(path)?;
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let bi = col("beat_index").ok_or(Error::MissingChannel("beat_index"))?;
    let (vi, name) = match (col("reference_mmHg"), col("predicted_mmHg")) {
        (Some(i), _) => (i, "reference_mmHg"),
        (None, Some(i)) => (i, "predicted_mmHg"),
        (None, None) => return Err(Error::MissingChannel("reference_mmHg")),
    };
    let mut out = Vec::new();
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let row = k + 1;
        let field = |i: usize, column: &str| {
            let raw = rec.get(i).unwrap_or("");
            Error::Malformed {
                row,
                column: column.into(),
                value: raw.into(),
            }
        };
        let beat: usize = rec
            .get(bi)
            .unwrap_or("")
            .parse()
            .map_err(|_| field(bi, "beat_index"))?;
        let v: f64 = rec
            .get(vi)
            .unwrap_or("")
            .parse()
            .map_err(|_| field(vi, name))?;
        if !v.is_finite() {
            return Err(Error::NonFinite {
                row,
                column: name.into(),
            });
        }
        out.push((beat, v));
    }
    Ok(out)
}

/// Replaces the reference of every prediction with the value for the same
/// beat in `refs`. Both sides must cover exactly the same beats.
pub fn attach_references(preds: &[Prediction], refs: &[(usize, f64)]) -> Result<Vec<Prediction>> {
    if preds.len() != refs.len() {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: refs.len(),
        });
    }
    let mut sorted = refs.to_vec();
    sorted.sort_unstable_by_key(|&(i, _)| i);
    preds
        .iter()
        .map(|p| {
            let k = sorted
                .binary_search_by_key(&p.beat_index, |&(i, _)| i)
                .map_err(|_| {
                    Error::param(
                        "references",
                        format!("no reference for beat {}", p.beat_index),
                    )
                })?;
            Ok(Prediction {
                reference_mmhg: Some(sorted[k].1),
                ..*p
            })
        })
        .collect()
}

/// Statistics over predictions that carry references.
pub fn evaluate_predictions(preds: &[Prediction]) -> Result<(EvalReport, BlandAltman)> {
    let missing = preds.iter().filter(|p| p.reference_mmhg.is_none()).count();
    if missing > 0 {
        return Err(Error::LengthMismatch {
            left: preds.len(),
            right: preds.len() - missing,
        });
    }
    let est: Vec<f64> = preds.iter().map(|p| p.predicted_mmhg).collect();
    let reference: Vec<f64> = preds.iter().filter_map(|p| p.reference_mmhg).collect();
    evaluate(&est, &reference)
}

/// Result of calibrating and testing one target on one recording.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetEvaluation {
    pub model: BpModel,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectEvaluation {
    pub subject_id: String,
    pub beats: usize,
    pub sbp: TargetEvaluation,
    pub dbp: TargetEvaluation,
}

/// Detect, calibrate on the leading beats, estimate the rest and score them
/// against the ABP channel.
pub fn evaluate_recording(rec: &Recording, cfg: &PipelineConfig) -> Result<SubjectEvaluation> {
    let fid = detect_fiducials(&rec.scg_z, cfg)?;
    let rows = fid.beats.rows();
    let refs = references_for_rows(rec.abp.as_ref(), &rows)?;
    let run = |target: Target| -> Result<TargetEvaluation> {
        let model = calibrate_rows(
            &rec.subject_id,
            &rows,
            rec.abp.as_ref(),
            target,
            cfg.calibration.train_frac,
        )?;
        let from = model.test_from_beat_index.unwrap_or(0);
        let test: Vec<BeatRow> = rows
            .iter()
            .filter(|r| r.beat_index >= from)
            .copied()
            .collect();
        let preds: Vec<Prediction> = predict_rows(&model, &test, Some(&refs))?
            .into_iter()
            .filter(|p| p.reference_mmhg.is_some())
            .collect();
        let (report, _) = evaluate_predictions(&preds)?;
        Ok(TargetEvaluation { model, report })
    };
    Ok(SubjectEvaluation {
        subject_id: rec.subject_id.clone(),
        beats: rows.len(),
        sbp: run(Target::Sbp)?,
        dbp: run(Target::Dbp)?,
    })
}
