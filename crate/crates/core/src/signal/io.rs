use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Channel, Recording, SampledSignal};
use crate::error::{Error, Result};
use crate::fsio::{read_to_string, sibling_with_suffix, with_added_suffix, write_atomic};

/// Sidecar metadata stored next to a recording as `<name>.meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordingMeta {
    pub subject_id: String,
    pub fs_hz: f64,
}

/// Reads `<name>.csv` and, if present, `<name>.meta.json`.
///
/// The sampling rate comes from `fs_override`, then the sidecar, then the
/// spacing of the `time_s` column. The subject id comes from the sidecar and
/// falls back to the file stem.
pub fn parse_recording(path: &Path, fs_override: Option<f64>) -> Result<Recording> {
    let meta_path = sibling_with_suffix(path, "meta.json");
    let meta: Option<RecordingMeta> = if meta_path.exists() {
        Some(serde_json::from_str(&read_to_string(&meta_path)?)?)
    } else {
        None
    };

    let text = read_to_string(path)?;
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

    let col_of = |name: &str| header.iter().position(|h| h == name);
    let scg_col = col_of(Channel::ScgZ.name()).ok_or(Error::MissingChannel("scg_z"))?;
    let time_col = col_of("time_s");
    let wanted: Vec<(Channel, usize)> = Channel::ALL
        .into_iter()
        .filter_map(|c| col_of(c.name()).map(|i| (c, i)))
        .collect();
    debug_assert!(wanted.iter().any(|&(_, i)| i == scg_col));

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); wanted.len()];
    let mut times = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let row = k + 1;
        let rec = rec?;
        if rec.len() != header.len() {
            return Err(Error::RaggedRow {
                row,
                expected: header.len(),
                found: rec.len(),
            });
        }
        for (slot, &(ch, col)) in wanted.iter().enumerate() {
            columns[slot].push(parse_finite(&rec[col], row, ch.name())?);
        }
        if let Some(tc) = time_col {
            times.push(parse_finite(&rec[tc], row, "time_s")?);
        }
    }

    let fs = match (fs_override, &meta) {
        (Some(fs), _) => fs,
        (None, Some(m)) => m.fs_hz,
        (None, None) => infer_fs(&times).ok_or_else(|| Error::UnknownSamplingRate(path.into()))?,
    };
    let subject_id = meta.map(|m| m.subject_id).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });

    let mut rec: Option<Recording> = None;
    let mut extras = Vec::new();
    for ((ch, _), samples) in wanted.into_iter().zip(columns) {
        let sig = SampledSignal::new(samples, fs, ch.name())?;
        if ch == Channel::ScgZ {
            rec = Some(Recording::new(subject_id.clone(), sig));
        } else {
            extras.push((ch, sig));
        }
    }
    let mut rec = rec.ok_or(Error::MissingChannel("scg_z"))?;
    for (ch, sig) in extras {
        match ch {
            Channel::Abp => rec.abp = Some(sig),
            Channel::Ecg => rec.ecg = Some(sig),
            Channel::Ppg => rec.ppg = Some(sig),
            Channel::ScgZ => unreachable!(),
        }
    }
    rec.validate()?;
    Ok(rec)
}

fn parse_finite(field: &str, row: usize, column: &str) -> Result<f64> {
    let v: f64 = field.parse().map_err(|_| Error::Malformed {
        row,
        column: column.to_string(),
        value: field.to_string(),
    })?;
    if !v.is_finite() {
        return Err(Error::NonFinite {
            row,
            column: column.to_string(),
        });
    }
    Ok(v)
}

/// Rate implied by a uniformly spaced time column, if it is one.
fn infer_fs(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) {
        return None;
    }
    let uniform = times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-3 * dt);
    if !uniform {
        return None;
    }
    let fs = 1.0 / dt;
    // Undo decimal round-off in the time stamps (0.001 -> 1000, not 999.9999).
    let rounded = fs.round();
    Some(if (fs - rounded).abs() <= 1e-6 * fs {
        rounded
    } else {
        fs
    })
}

/// Writes `<prefix>.csv` and `<prefix>.meta.json`.
pub fn write_recording(rec: &Recording, prefix: &Path) -> Result<()> {
    rec.validate()?;
    let fs = rec.fs();
    let chans: Vec<(Channel, &SampledSignal)> = rec.channels().collect();

    let mut out = String::with_capacity(rec.scg_z.len() * 16 * (chans.len() + 1));
    out.push_str("time_s");
    for (c, _) in &chans {
        out.push(',');
        out.push_str(c.name());
    }
    out.push('\n');
    for n in 0..rec.scg_z.len() {
        out.push_str(&format!("{}", n as f64 / fs));
        for (_, s) in &chans {
            out.push(',');
            // `{}` on f64 is the shortest representation that parses back exactly.
            out.push_str(&format!("{}", s.samples()[n]));
        }
        out.push('\n');
    }
    write_atomic(&with_added_suffix(prefix, "csv"), out.as_bytes())?;

    let meta = RecordingMeta {
        subject_id: rec.subject_id.clone(),
        fs_hz: fs,
    };
    write_atomic(
        &with_added_suffix(prefix, "meta.json"),
        serde_json::to_string_pretty(&meta)?.as_bytes(),
    )
}
