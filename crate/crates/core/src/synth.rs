//! Synthetic SCG + ABP recordings with exact fiducial ground truth.
//!
//! Each beat contributes a Gaussian-modulated cosine centred on the AO
//! instant and a smaller Gaussian-modulated sine centred on the AC instant.
//! The pAC instant is the first positive peak of the AC wavelet after its
//! centre. Beat timing follows an HR profile, the ejection-time surrogate
//! `LVET' = pAC - AO` follows an inverse-HR law, and every beat's pressure
//! targets follow `a * ln(LVET') + b * HR + c` for SBP and DBP.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsio::{with_added_suffix, write_atomic};
use crate::signal::{write_recording, Recording, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum HrProfile {
    Constant {
        bpm: f64,
    },
    LinearSweep {
        start_bpm: f64,
        end_bpm: f64,
    },
    Sinusoidal {
        min_bpm: f64,
        max_bpm: f64,
        period_s: f64,
    },
}

impl HrProfile {
    pub fn bpm_at(&self, t: f64, duration_s: f64) -> f64 {
        match *self {
            HrProfile::Constant { bpm } => bpm,
            HrProfile::LinearSweep { start_bpm, end_bpm } => {
                start_bpm + (end_bpm - start_bpm) * (t / duration_s).clamp(0.0, 1.0)
            }
            HrProfile::Sinusoidal {
                min_bpm,
                max_bpm,
                period_s,
            } => {
                let mid = 0.5 * (min_bpm + max_bpm);
                let amp = 0.5 * (max_bpm - min_bpm);
                mid - amp * (2.0 * PI * t / period_s).cos()
            }
        }
    }

    fn bounds(&self) -> (f64, f64) {
        match *self {
            HrProfile::Constant { bpm } => (bpm, bpm),
            HrProfile::LinearSweep { start_bpm, end_bpm } => {
                (start_bpm.min(end_bpm), start_bpm.max(end_bpm))
            }
            HrProfile::Sinusoidal {
                min_bpm, max_bpm, ..
            } => (min_bpm, max_bpm),
        }
    }
}

/// `LVET'(hr) = base_ms - slope_ms_per_bpm * (hr - ref_hr_bpm) + N(0, jitter_ms)`,
/// clamped to `[min_ms, max_ms]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LvetLaw {
    pub base_ms: f64,
    pub ref_hr_bpm: f64,
    pub slope_ms_per_bpm: f64,
    pub jitter_ms: f64,
    pub min_ms: f64,
    pub max_ms: f64,
}

impl Default for LvetLaw {
    fn default() -> Self {
        Self {
            base_ms: 320.0,
            ref_hr_bpm: 60.0,
            slope_ms_per_bpm: 1.7,
            jitter_ms: 6.0,
            min_ms: 150.0,
            max_ms: 450.0,
        }
    }
}

impl LvetLaw {
    pub fn mean_ms(&self, hr_bpm: f64) -> f64 {
        (self.base_ms - self.slope_ms_per_bpm * (hr_bpm - self.ref_hr_bpm))
            .clamp(self.min_ms, self.max_ms)
    }
}

/// Beat wavelet shapes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Morphology {
    pub ao_amplitude: f64,
    /// Standard deviation of the AO wavelet's Gaussian envelope.
    pub ao_width_ms: f64,
    pub ao_freq_hz: f64,
    pub ac_amplitude: f64,
    pub ac_width_ms: f64,
    pub ac_freq_hz: f64,
    /// Relative beat-to-beat amplitude variation, uniform in `±jitter`.
    pub amplitude_jitter: f64,
}

impl Default for Morphology {
    fn default() -> Self {
        Self {
            ao_amplitude: 1.0,
            ao_width_ms: 12.0,
            ao_freq_hz: 22.0,
            ac_amplitude: 0.45,
            ac_width_ms: 10.0,
            ac_freq_hz: 30.0,
            amplitude_jitter: 0.1,
        }
    }
}

/// Additive white noise at `snr_db` relative to the clean SCG power.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Noise {
    pub enabled: bool,
    pub snr_db: f64,
}

impl Default for Noise {
    fn default() -> Self {
        Self {
            enabled: true,
            snr_db: 20.0,
        }
    }
}

impl Noise {
    pub fn off() -> Self {
        Self {
            enabled: false,
            ..Self::default()
        }
    }

    pub fn snr(snr_db: f64) -> Self {
        Self {
            enabled: true,
            snr_db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Wander {
    pub amplitude: f64,
    pub freq_hz: f64,
}

impl Wander {
    pub fn off() -> Self {
        Self {
            amplitude: 0.0,
            freq_hz: 0.0,
        }
    }
}

impl Default for Wander {
    fn default() -> Self {
        Self {
            amplitude: 0.5,
            freq_hz: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl LawCoeffs {
    pub fn eval(&self, lvet_ms: f64, hr_bpm: f64) -> f64 {
        self.a * lvet_ms.ln() + self.b * hr_bpm + self.c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BpLaw {
    pub sbp: LawCoeffs,
    pub dbp: LawCoeffs,
    /// Per-beat Gaussian deviation added to both targets.
    pub noise_sigma_mmhg: f64,
}

impl Default for BpLaw {
    fn default() -> Self {
        Self {
            sbp: LawCoeffs {
                a: -20.0,
                b: 0.5,
                c: 200.0,
            },
            dbp: LawCoeffs {
                a: -8.0,
                b: 0.35,
                c: 105.0,
            },
            noise_sigma_mmhg: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub subject_id: String,
    pub duration_s: f64,
    pub fs: f64,
    pub hr_profile: HrProfile,
    pub lvet_law: LvetLaw,
    pub morphology: Morphology,
    pub noise: Noise,
    pub baseline_wander: Wander,
    pub bp_law: BpLaw,
    /// Time of the first AO instant.
    pub first_beat_s: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            subject_id: "synthetic".into(),
            duration_s: 60.0,
            fs: 1000.0,
            hr_profile: HrProfile::Sinusoidal {
                min_bpm: 60.0,
                max_bpm: 85.0,
                period_s: 20.0,
            },
            lvet_law: LvetLaw::default(),
            morphology: Morphology::default(),
            noise: Noise::default(),
            baseline_wander: Wander::default(),
            bp_law: BpLaw::default(),
            first_beat_s: 0.4,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.hr_profile.bounds();
        if !(lo >= 40.0 && hi <= 180.0) {
            return Err(Error::param(
                "synth.hr_profile",
                format!("heart rate bounds must lie within [40, 180] bpm, got [{lo}, {hi}]"),
            ));
        }
        if let HrProfile::Sinusoidal { period_s, .. } = self.hr_profile {
            if !(period_s > 0.0) {
                return Err(Error::param("synth.hr_profile.period_s", "must be > 0"));
            }
        }
        if !(self.fs >= 200.0) {
            return Err(Error::param(
                "synth.fs",
                format!("must be >= 200 Hz, got {}", self.fs),
            ));
        }
        if !(self.duration_s >= 10.0) {
            return Err(Error::param(
                "synth.duration_s",
                format!("must be >= 10 s, got {}", self.duration_s),
            ));
        }
        if !(self.first_beat_s >= 0.0 && self.first_beat_s < self.duration_s) {
            return Err(Error::param(
                "synth.first_beat_s",
                "must lie inside the recording",
            ));
        }
        let m = &self.morphology;
        for (name, v) in [
            ("synth.morphology.ao_width_ms", m.ao_width_ms),
            ("synth.morphology.ao_freq_hz", m.ao_freq_hz),
            ("synth.morphology.ac_width_ms", m.ac_width_ms),
            ("synth.morphology.ac_freq_hz", m.ac_freq_hz),
        ] {
            if !(v > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&m.amplitude_jitter) {
            return Err(Error::param(
                "synth.morphology.amplitude_jitter",
                "must lie in [0, 1)",
            ));
        }
        let l = &self.lvet_law;
        if !(l.min_ms > 0.0 && l.min_ms <= l.max_ms && l.jitter_ms >= 0.0) {
            return Err(Error::param(
                "synth.lvet_law",
                "need 0 < min_ms <= max_ms and jitter_ms >= 0",
            ));
        }
        if self.noise.enabled && !self.noise.snr_db.is_finite() {
            return Err(Error::param("synth.noise.snr_db", "must be finite"));
        }
        if !(self.bp_law.noise_sigma_mmhg >= 0.0) {
            return Err(Error::param(
                "synth.bp_law.noise_sigma_mmhg",
                "must be >= 0",
            ));
        }
        if !(self.baseline_wander.amplitude >= 0.0 && self.baseline_wander.freq_hz >= 0.0) {
            return Err(Error::param(
                "synth.baseline_wander",
                "must be non-negative",
            ));
        }
        Ok(())
    }
}

/// Exact per-beat fiducials and targets, all times in ms from the start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthGroundTruth {
    pub ao_ms: Vec<f64>,
    pub ac_ms: Vec<f64>,
    pub pac_ms: Vec<f64>,
    pub lvet_ms: Vec<f64>,
    pub hr_bpm: Vec<f64>,
    #[serde(rename = "sbp_mmHg")]
    pub sbp_mmhg: Vec<f64>,
    #[serde(rename = "dbp_mmHg")]
    pub dbp_mmhg: Vec<f64>,
}

impl SynthGroundTruth {
    pub fn beats(&self) -> usize {
        self.ao_ms.len()
    }

    /// AO instants as sample indices at `fs`.
    pub fn ao_samples(&self, fs: f64) -> Vec<usize> {
        to_samples(&self.ao_ms, fs)
    }

    pub fn pac_samples(&self, fs: f64) -> Vec<usize> {
        to_samples(&self.pac_ms, fs)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, serde_json::to_string_pretty(self)?.as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&crate::fsio::read_to_string(path)?)?)
    }
}

fn to_samples(ms: &[f64], fs: f64) -> Vec<usize> {
    ms.iter()
        .map(|t| (t * fs / 1000.0).round() as usize)
        .collect()
}

/// Offset (s) from a Gaussian-modulated sine's centre to its first positive
/// peak, found on a 1 µs grid.
fn first_positive_peak_offset(width_s: f64, freq_hz: f64) -> f64 {
    let f = |t: f64| (-(t * t) / (2.0 * width_s * width_s)).exp() * (2.0 * PI * freq_hz * t).sin();
    let step = 1e-6;
    let mut t = step;
    let end = 0.5 / freq_hz;
    while t < end {
        if f(t) >= f(t - step) && f(t) >= f(t + step) {
            return t;
        }
        t += step;
    }
    0.25 / freq_hz
}

// Independent random streams, so that switching one component off leaves
// the others unchanged.
const STREAM_TIMING: u64 = 1;
const STREAM_AMPLITUDE: u64 = 2;
const STREAM_NOISE: u64 = 3;
const STREAM_BP: u64 = 4;
const STREAM_WANDER: u64 = 5;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Generates a recording (`scg_z` + `abp`) and its ground truth.
pub fn generate(cfg: &SynthConfig) -> Result<(Recording, SynthGroundTruth)> {
    cfg.validate()?;
    let fs = cfg.fs;
    let n = (cfg.duration_s * fs).round() as usize;
    let dur = cfg.duration_s;

    // AO instants: step through the HR profile.
    let mut ao_s = Vec::new();
    let mut t = cfg.first_beat_s;
    while t < dur {
        ao_s.push(t);
        t += 60.0 / cfg.hr_profile.bpm_at(t, dur);
    }
    let next_after_last = t;
    let beats = ao_s.len();

    let mut timing_rng = stream(cfg.seed, STREAM_TIMING);
    let jitter = Normal::new(0.0, cfg.lvet_law.jitter_ms.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::param("synth.lvet_law.jitter_ms", e.to_string()))?;
    let m = &cfg.morphology;
    let pac_offset = first_positive_peak_offset(m.ac_width_ms / 1000.0, m.ac_freq_hz);

    let mut truth = SynthGroundTruth {
        ao_ms: Vec::with_capacity(beats),
        ac_ms: Vec::with_capacity(beats),
        pac_ms: Vec::with_capacity(beats),
        lvet_ms: Vec::with_capacity(beats),
        hr_bpm: Vec::with_capacity(beats),
        sbp_mmhg: Vec::with_capacity(beats),
        dbp_mmhg: Vec::with_capacity(beats),
    };
    let mut bp_rng = stream(cfg.seed, STREAM_BP);
    let bp_noise = Normal::new(0.0, cfg.bp_law.noise_sigma_mmhg.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::param("synth.bp_law.noise_sigma_mmhg", e.to_string()))?;
    for k in 0..beats {
        let next = ao_s.get(k + 1).copied().unwrap_or(next_after_last);
        let rr = next - ao_s[k];
        let hr = 60.0 / rr;
        let mut lvet = cfg.lvet_law.mean_ms(hr);
        if cfg.lvet_law.jitter_ms > 0.0 {
            lvet += jitter.sample(&mut timing_rng);
        }
        let lvet = lvet.clamp(cfg.lvet_law.min_ms, cfg.lvet_law.max_ms);
        let ao_ms = ao_s[k] * 1000.0;
        let pac_ms = ao_ms + lvet;
        let (ds, dd) = if cfg.bp_law.noise_sigma_mmhg > 0.0 {
            (bp_noise.sample(&mut bp_rng), bp_noise.sample(&mut bp_rng))
        } else {
            (0.0, 0.0)
        };
        truth.ao_ms.push(ao_ms);
        truth.pac_ms.push(pac_ms);
        truth.ac_ms.push(pac_ms - pac_offset * 1000.0);
        truth.lvet_ms.push(lvet);
        truth.hr_bpm.push(hr);
        truth.sbp_mmhg.push(cfg.bp_law.sbp.eval(lvet, hr) + ds);
        truth.dbp_mmhg.push(cfg.bp_law.dbp.eval(lvet, hr) + dd);
    }
    for k in 0..beats {
        if truth.sbp_mmhg[k] <= truth.dbp_mmhg[k] {
            return Err(Error::param(
                "synth.bp_law",
                format!("beat {k} has SBP <= DBP; check the law coefficients"),
            ));
        }
    }

    // SCG: beat wavelets.
    let mut amp_rng = stream(cfg.seed, STREAM_AMPLITUDE);
    let mut scg = vec![0.0; n];
    for k in 0..beats {
        let ja = 1.0 + m.amplitude_jitter * amp_rng.random_range(-1.0..=1.0);
        let jc = 1.0 + m.amplitude_jitter * amp_rng.random_range(-1.0..=1.0);
        add_wavelet(
            &mut scg,
            fs,
            truth.ao_ms[k] / 1000.0,
            m.ao_amplitude * ja,
            m.ao_width_ms / 1000.0,
            m.ao_freq_hz,
            0.0,
        );
        add_wavelet(
            &mut scg,
            fs,
            truth.ac_ms[k] / 1000.0,
            m.ac_amplitude * jc,
            m.ac_width_ms / 1000.0,
            m.ac_freq_hz,
            -PI / 2.0,
        );
    }

    let clean_power = scg.iter().map(|v| v * v).sum::<f64>() / n as f64;
    if cfg.noise.enabled {
        let snr = cfg.noise.snr_db;
        let sigma = (clean_power / 10f64.powf(snr / 10.0)).sqrt();
        if sigma > 0.0 {
            let normal = Normal::new(0.0, sigma)
                .map_err(|e| Error::param("synth.noise.snr_db", e.to_string()))?;
            let mut rng = stream(cfg.seed, STREAM_NOISE);
            for v in scg.iter_mut() {
                *v += normal.sample(&mut rng);
            }
        }
    }
    let w = cfg.baseline_wander;
    if w.amplitude > 0.0 {
        let phase = stream(cfg.seed, STREAM_WANDER).random_range(0.0..2.0 * PI);
        for (i, v) in scg.iter_mut().enumerate() {
            *v += w.amplitude * (2.0 * PI * w.freq_hz * i as f64 / fs + phase).sin();
        }
    }

    let abp = synth_abp(&truth, n, fs, next_after_last);
    let rec = Recording::new(
        cfg.subject_id.clone(),
        SampledSignal::new(scg, fs, "scg_z")?,
    )
    .with_abp(SampledSignal::new(abp, fs, "abp")?)?;
    Ok((rec, truth))
}

/// Adds `amp * exp(-u^2 / 2w^2) * cos(2 pi f u + phase)`, `u = t - centre`,
/// over ±6 widths.
fn add_wavelet(x: &mut [f64], fs: f64, centre: f64, amp: f64, width: f64, freq: f64, phase: f64) {
    let lo = ((centre - 6.0 * width) * fs).floor().max(0.0) as usize;
    let hi = (((centre + 6.0 * width) * fs).ceil() as usize).min(x.len().saturating_sub(1));
    for (i, v) in x.iter_mut().enumerate().take(hi + 1).skip(lo) {
        let u = i as f64 / fs - centre;
        *v += amp * (-(u * u) / (2.0 * width * width)).exp() * (2.0 * PI * freq * u + phase).cos();
    }
}

/// Delay from AO to the pressure upstroke.
const FOOT_DELAY_S: f64 = 0.02;

/// Per-beat pressure pulse: a raised-cosine upstroke from the beat's DBP to
/// its SBP, then an exponential decay reaching the next beat's DBP at the
/// next foot. Foot and peak fall on sample instants so both extrema are
/// sampled exactly. Within `[AO_k, AO_{k+1}]` the maximum is `SBP_k` and the
/// minimum is `DBP_k` up to the beat-to-beat change in DBP.
fn synth_abp(truth: &SynthGroundTruth, n: usize, fs: f64, next_after_last: f64) -> Vec<f64> {
    let beats = truth.beats();
    let foot_idx = |ao_s: f64| ((ao_s + FOOT_DELAY_S) * fs).round() as usize;
    let mut out = vec![truth.dbp_mmhg.first().copied().unwrap_or(80.0); n];
    for k in 0..beats {
        let foot = foot_idx(truth.ao_ms[k] / 1000.0);
        let next_foot = foot_idx(
            truth
                .ao_ms
                .get(k + 1)
                .map_or(next_after_last, |t| t / 1000.0),
        );
        let rr = next_foot.saturating_sub(foot).max(2);
        let rise = ((0.3 * rr as f64).min(0.12 * fs).round() as usize).clamp(1, rr - 1);
        let decay = (rr - rise) as f64 / fs;
        let tau = 0.35 * decay;
        let (dbp, sbp) = (truth.dbp_mmhg[k], truth.sbp_mmhg[k]);
        let next_dbp = truth.dbp_mmhg.get(k + 1).copied().unwrap_or(dbp);
        let end_term = (-decay / tau).exp();
        for (i, v) in out.iter_mut().enumerate().take(next_foot.min(n)).skip(foot) {
            let j = i - foot;
            *v = if j <= rise {
                dbp + (sbp - dbp) * 0.5 * (1.0 - (PI * j as f64 / rise as f64).cos())
            } else {
                let e = (-((j - rise) as f64 / fs) / tau).exp();
                next_dbp + (sbp - next_dbp) * (e - end_term) / (1.0 - end_term)
            };
        }
    }
    out
}

/// Writes `<prefix>.csv`, `<prefix>.meta.json` and `<prefix>.truth.json`.
pub fn write_synthetic(rec: &Recording, truth: &SynthGroundTruth, prefix: &Path) -> Result<()> {
    write_recording(rec, prefix)?;
    truth.write(&with_added_suffix(prefix, "truth.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> SynthConfig {
        SynthConfig {
            noise: Noise::off(),
            baseline_wander: Wander::off(),
            ..SynthConfig::default()
        }
    }

    #[test]
    fn constant_hr_beat_count_and_spacing() {
        let cfg = SynthConfig {
            hr_profile: HrProfile::Constant { bpm: 60.0 },
            first_beat_s: 0.0,
            ..quiet()
        };
        let (rec, truth) = generate(&cfg).unwrap();
        assert_eq!(rec.scg_z.len(), 60_000);
        assert!((59..=61).contains(&truth.beats()), "{}", truth.beats());
        for w in truth.ao_samples(cfg.fs).windows(2) {
            assert!((w[1] as i64 - w[0] as i64 - 1000).abs() <= 1);
        }
    }

    #[test]
    fn ordering_invariant() {
        let cfg = SynthConfig {
            hr_profile: HrProfile::LinearSweep {
                start_bpm: 50.0,
                end_bpm: 140.0,
            },
            ..SynthConfig::default()
        };
        let (_, t) = generate(&cfg).unwrap();
        for k in 0..t.beats() {
            assert!(t.ao_ms[k] < t.ac_ms[k] && t.ac_ms[k] < t.pac_ms[k]);
            if k + 1 < t.beats() {
                assert!(t.pac_ms[k] < t.ao_ms[k + 1]);
            }
            assert!(t.sbp_mmhg[k] > t.dbp_mmhg[k]);
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let cfg = SynthConfig::default();
        let (a, ta) = generate(&cfg).unwrap();
        let (b, tb) = generate(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(ta, tb);
        let (c, _) = generate(&SynthConfig { seed: 2, ..cfg }).unwrap();
        assert_ne!(a.scg_z, c.scg_z);
    }

    #[test]
    fn noiseless_law_is_exact() {
        let mut cfg = quiet();
        cfg.bp_law.noise_sigma_mmhg = 0.0;
        let (_, t) = generate(&cfg).unwrap();
        for k in 0..t.beats() {
            let want = -20.0 * t.lvet_ms[k].ln() + 0.5 * t.hr_bpm[k] + 200.0;
            assert!((t.sbp_mmhg[k] - want).abs() < 1e-9);
        }
    }

    #[test]
    fn validation_names_the_field() {
        let err = generate(&SynthConfig {
            duration_s: 5.0,
            ..SynthConfig::default()
        })
        .unwrap_err();
        assert!(err.to_string().contains("duration_s"), "{err}");
        assert!(generate(&SynthConfig {
            fs: 100.0,
            ..SynthConfig::default()
        })
        .is_err());
        assert!(generate(&SynthConfig {
            hr_profile: HrProfile::Constant { bpm: 200.0 },
            ..SynthConfig::default()
        })
        .is_err());
    }

    #[test]
    fn pac_offset_matches_wavelet_peak() {
        let off = first_positive_peak_offset(0.010, 30.0);
        // Positive lobe of a 30 Hz sine peaks a little before a quarter period.
        assert!(off > 0.005 && off < 1.0 / 120.0, "{off}");
    }
}
