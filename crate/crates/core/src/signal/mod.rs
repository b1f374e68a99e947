//! Recording ingestion and the DSP primitives shared by the fiducial
//! detectors.

mod envelope;
mod filter;
mod hilbert;
mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use envelope::{local_maxima, local_minima, peak_envelopes, Envelopes};
pub use filter::{highpass_iir, moving_average, Biquad, ButterworthHighpass};
pub use hilbert::{hilbert_analytic, AnalyticParts};
pub use io::{parse_recording, write_recording, RecordingMeta};

pub(crate) use envelope::envelopes_slice as envelopes_slice_for;
pub(crate) use filter::moving_average_slice;
pub(crate) use hilbert::analytic_parts;

/// A uniformly sampled, finite, real-valued channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    samples: Vec<f64>,
    fs: f64,
    label: String,
}

impl SampledSignal {
    pub fn new(samples: Vec<f64>, fs: f64, label: impl Into<String>) -> Result<Self> {
        if !(fs.is_finite() && fs > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "sampling rate must be positive, got {fs}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidSignal(format!(
                "need at least 2 samples, got {}",
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSignal(format!(
                "non-finite sample at index {i}"
            )));
        }
        Ok(Self {
            samples,
            fs,
            label: label.into(),
        })
    }

    /// Same rate and label, new samples.
    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(samples, self.fs, self.label.clone())
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        self.with_samples(self.samples.iter().map(|v| v * c).collect())
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    /// Converts a duration in milliseconds to a whole number of samples.
    pub fn ms_to_samples(&self, ms: f64) -> usize {
        ms_to_samples(ms, self.fs)
    }
}

pub(crate) fn ms_to_samples(ms: f64, fs: f64) -> usize {
    (ms * fs / 1000.0).round().max(0.0) as usize
}

/// Smallest odd sample count covering `ms` at `fs`.
pub(crate) fn odd_samples(ms: f64, fs: f64) -> usize {
    let n = ms_to_samples(ms, fs).max(1);
    if n.is_multiple_of(2) {
        n + 1
    } else {
        n
    }
}

/// Channel names accepted in recording files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    ScgZ,
    Abp,
    Ecg,
    Ppg,
}

impl Channel {
    pub const ALL: [Channel; 4] = [Channel::ScgZ, Channel::Abp, Channel::Ecg, Channel::Ppg];

    pub fn name(self) -> &'static str {
        match self {
            Channel::ScgZ => "scg_z",
            Channel::Abp => "abp",
            Channel::Ecg => "ecg",
            Channel::Ppg => "ppg",
        }
    }
}

/// One subject's synchronously sampled channels. Only `scg_z` drives the
/// pipeline; `abp` is the calibration reference and `ecg`/`ppg` are carried
/// through untouched.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub subject_id: String,
    pub scg_z: SampledSignal,
    pub abp: Option<SampledSignal>,
    pub ecg: Option<SampledSignal>,
    pub ppg: Option<SampledSignal>,
}

impl Recording {
    pub fn new(subject_id: impl Into<String>, scg_z: SampledSignal) -> Self {
        Self {
            subject_id: subject_id.into(),
            scg_z,
            abp: None,
            ecg: None,
            ppg: None,
        }
    }

    pub fn with_abp(mut self, abp: SampledSignal) -> Result<Self> {
        self.check_aligned(&abp)?;
        self.abp = Some(abp);
        Ok(self)
    }

    pub fn fs(&self) -> f64 {
        self.scg_z.fs()
    }

    pub fn channel(&self, ch: Channel) -> Option<&SampledSignal> {
        match ch {
            Channel::ScgZ => Some(&self.scg_z),
            Channel::Abp => self.abp.as_ref(),
            Channel::Ecg => self.ecg.as_ref(),
            Channel::Ppg => self.ppg.as_ref(),
        }
    }

    /// Present channels in file column order.
    pub fn channels(&self) -> impl Iterator<Item = (Channel, &SampledSignal)> {
        Channel::ALL
            .into_iter()
            .filter_map(|c| self.channel(c).map(|s| (c, s)))
    }

    /// Checks the all-channels-aligned invariant.
    pub fn validate(&self) -> Result<()> {
        for (_, s) in self.channels() {
            self.check_aligned(s)?;
        }
        Ok(())
    }

    fn check_aligned(&self, other: &SampledSignal) -> Result<()> {
        if other.len() != self.scg_z.len() {
            return Err(Error::ChannelMismatch {
                channel: other.label().to_string(),
                expected: self.scg_z.len(),
                found: other.len(),
            });
        }
        if (other.fs() - self.scg_z.fs()).abs() > 1e-9 * self.scg_z.fs() {
            return Err(Error::InvalidSignal(format!(
                "channel `{}` sampled at {} Hz, scg_z at {} Hz",
                other.label(),
                other.fs(),
                self.scg_z.fs()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_construction() {
        assert!(SampledSignal::new(vec![1.0, 2.0], 0.0, "x").is_err());
        assert!(SampledSignal::new(vec![1.0], 100.0, "x").is_err());
        assert!(SampledSignal::new(vec![1.0, f64::NAN], 100.0, "x").is_err());
        assert!(SampledSignal::new(vec![1.0, f64::INFINITY], 100.0, "x").is_err());
    }

    #[test]
    fn odd_sample_conversion() {
        assert_eq!(odd_samples(61.0, 1000.0), 61);
        assert_eq!(odd_samples(15.0, 1000.0), 15);
        assert_eq!(odd_samples(60.0, 1000.0), 61);
        assert_eq!(odd_samples(0.1, 1000.0), 1);
    }

    #[test]
    fn misaligned_abp_rejected() {
        let scg = SampledSignal::new(vec![0.0; 10], 100.0, "scg_z").unwrap();
        let abp = SampledSignal::new(vec![0.0; 9], 100.0, "abp").unwrap();
        assert!(Recording::new("s", scg).with_abp(abp).is_err());
    }
}
