//! Aortic-valve-opening (AO) detection.
//!
//! 1. Stage-one VMD isolates low-frequency drift, which is subtracted.
//! 2. Stage-two VMD splits the detrended signal into modes; each mode is
//!    convolved with a Gaussian first-difference kernel (GDFM).
//! 3. The mode with the largest relative GDFM energy (RGE), plus at most one
//!    neighbour of similar energy, is recombined into the systolic profile
//!    `s[n]` with squared-energy weights.
//! 4. The spread between the upper and lower envelopes of `s` is thresholded;
//!    negative-to-positive zero crossings of its Hilbert transform mark AO
//!    candidates (the centres of the envelope lobes).
//! 5. A cardiac cycle envelope (CCE) built by repeated integration of `|s|`
//!    yields one peak per cycle; the first candidate inside each gate
//!    `(peak, peak + ao_gate_ms]` is the AO.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::peaks::{median, PeakList};
use crate::signal::{
    analytic_parts, envelopes_slice_for, local_maxima, ms_to_samples, odd_samples, SampledSignal,
};
use crate::vmd::{vmd_decompose, OmegaInit, VmdParams, VmdResult};

/// Policy for the envelope threshold `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum EnvTauMode {
    /// `tau = factor * mean(D_env^2)` over the segment; scale invariant.
    RelativeMean { factor: f64 },
    /// Fixed `tau` in squared signal units.
    Absolute { tau: f64 },
}

impl Default for EnvTauMode {
    fn default() -> Self {
        EnvTauMode::RelativeMean { factor: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AoDetectParams {
    /// Drift-removal decomposition.
    pub stage1: VmdParams,
    /// Stage-one modes centred below this frequency are treated as drift.
    pub drift_cutoff_hz: f64,
    /// Systolic-profile decomposition.
    pub stage2: VmdParams,
    /// Gaussian window length `L` (rounded up to an odd sample count).
    pub gauss_len_ms: f64,
    pub gauss_sigma: f64,
    /// Neighbour-mode admission threshold on RGE differences, in [0, 1].
    pub rho: f64,
    pub env_tau: EnvTauMode,
    /// Length of each CCE integration window.
    pub cce_window_ms: f64,
    pub cce_min_separation_ms: f64,
    /// CCE peaks must also be this fraction of the local cycle length apart.
    pub cce_relative_separation: f64,
    /// CCE peaks below `p10 + frac * (p90 - p10)` of the CCE are ignored.
    pub cce_min_height_frac: f64,
    pub ao_gate_ms: f64,
    /// No fiducials are reported this close to either end of the segment.
    pub guard_ms: f64,
    /// Minimum beat-synchronous coherence of `s` around the detected AOs.
    pub min_coherence: f64,
}

impl Default for AoDetectParams {
    fn default() -> Self {
        Self {
            stage1: VmdParams {
                k: 2,
                alpha: 50_000.0,
                init: OmegaInit::Zero,
                ..VmdParams::default()
            },
            drift_cutoff_hz: 1.5,
            stage2: VmdParams {
                k: 5,
                alpha: 2000.0,
                init: OmegaInit::Uniform,
                ..VmdParams::default()
            },
            gauss_len_ms: 61.0,
            gauss_sigma: 1.0,
            rho: 0.1,
            env_tau: EnvTauMode::default(),
            cce_window_ms: 150.0,
            cce_min_separation_ms: 300.0,
            cce_relative_separation: 0.5,
            cce_min_height_frac: 0.35,
            ao_gate_ms: 350.0,
            guard_ms: 250.0,
            min_coherence: 0.2,
        }
    }
}

impl AoDetectParams {
    pub fn validate(&self) -> Result<()> {
        self.stage1.validate()?;
        self.stage2.validate()?;
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::param(
                "rho",
                format!("must lie in [0, 1], got {}", self.rho),
            ));
        }
        if !(self.gauss_len_ms > 0.0) {
            return Err(Error::param("gauss_len_ms", "must be > 0"));
        }
        if !(self.gauss_sigma > 0.0) {
            return Err(Error::param("gauss_sigma", "must be > 0"));
        }
        if !(self.drift_cutoff_hz >= 0.0) {
            return Err(Error::param("drift_cutoff_hz", "must be >= 0"));
        }
        match self.env_tau {
            EnvTauMode::RelativeMean { factor } if !(factor > 0.0) => {
                return Err(Error::param("env_tau.factor", "must be > 0"))
            }
            EnvTauMode::Absolute { tau } if !(tau > 0.0) => {
                return Err(Error::param("env_tau.tau", "must be > 0"))
            }
            _ => {}
        }
        for (name, v) in [
            ("cce_window_ms", self.cce_window_ms),
            ("cce_min_separation_ms", self.cce_min_separation_ms),
            ("ao_gate_ms", self.ao_gate_ms),
        ] {
            if !(v > 0.0) {
                return Err(Error::param(name, format!("must be > 0, got {v}")));
            }
        }
        if !(0.0..1.0).contains(&self.cce_relative_separation) {
            return Err(Error::param(
                "cce_relative_separation",
                "must lie in [0, 1)",
            ));
        }
        if !(0.0..1.0).contains(&self.cce_min_height_frac) {
            return Err(Error::param("cce_min_height_frac", "must lie in [0, 1)"));
        }
        if !(self.guard_ms >= 0.0) {
            return Err(Error::param("guard_ms", "must be >= 0"));
        }
        if !(0.0..=1.0).contains(&self.min_coherence) {
            return Err(Error::param("min_coherence", "must lie in [0, 1]"));
        }
        Ok(())
    }

    /// Gaussian window length in samples at `fs` (odd, >= 3).
    pub fn gauss_len_samples(&self, fs: f64) -> usize {
        odd_samples(self.gauss_len_ms, fs).max(3)
    }
}

/// Removes low-frequency drift: `x - sum(drift modes)`, where the drift modes
/// are the stage-one VMD modes centred below `drift_cutoff_hz`.
pub fn detrend(
    x: &SampledSignal,
    stage1: &VmdParams,
    drift_cutoff_hz: f64,
) -> Result<SampledSignal> {
    let r = vmd_decompose(x, stage1)?;
    let mut out = x.samples().to_vec();
    for (mode, &f) in r.modes.iter().zip(&r.center_freqs) {
        if f < drift_cutoff_hz {
            for (o, v) in out.iter_mut().zip(mode) {
                *o -= v;
            }
        }
    }
    x.with_samples(out)
}

/// First differences `d[m] = g[m+1] - g[m]` of the Gaussian window
/// `g[l] = exp(-(l / ((L-1)/2))^2 / sigma^2)`, `|l| <= (L-1)/2`.
///
/// The returned taps correspond to `m = -(L-1)/2 ..= (L-1)/2 - 1`.
pub fn gaussian_derivative_kernel(len: usize, sigma: f64) -> Vec<f64> {
    let half = (len - 1) as f64 / 2.0;
    let g: Vec<f64> = (0..len)
        .map(|i| {
            let l = i as f64 - half;
            (-(l / half).powi(2) / (sigma * sigma)).exp()
        })
        .collect();
    g.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Gaussian-derivative-filtered modes and their relative energies.
#[derive(Debug, Clone, PartialEq)]
pub struct GdfmSet {
    pub gdfms: Vec<Vec<f64>>,
    /// Relative GDFM energies; non-negative and summing to one.
    pub rge: Vec<f64>,
    /// Reconstructed systolic profile `s[n]`, once selected.
    pub selected: Option<Selection>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub signal: Vec<f64>,
    /// Index of the dominant mode `j*`.
    pub dominant: usize,
    /// Whether the lower (`P`) or upper (`Q`) neighbour was admitted.
    pub lower_neighbour: bool,
    pub upper_neighbour: bool,
}

/// Convolves every mode with the Gaussian derivative kernel. The kernel is
/// applied centred, with edge samples held constant beyond the ends.
pub fn gdfm(modes: &VmdResult, fs: f64, gauss_len_ms: f64, gauss_sigma: f64) -> Result<GdfmSet> {
    let len = odd_samples(gauss_len_ms, fs).max(3);
    gdfm_with_len(&modes.modes, len, gauss_sigma)
}

pub(crate) fn gdfm_with_len(modes: &[Vec<f64>], len: usize, sigma: f64) -> Result<GdfmSet> {
    if len.is_multiple_of(2) || len < 3 {
        return Err(Error::param(
            "gauss_len",
            format!("must be odd and >= 3, got {len}"),
        ));
    }
    if let Some(m) = modes.iter().find(|m| m.len() <= len) {
        return Err(Error::param(
            "gauss_len",
            format!(
                "kernel of {len} samples is not shorter than mode of {}",
                m.len()
            ),
        ));
    }
    if modes.is_empty() {
        return Err(Error::param("modes", "need at least one mode"));
    }
    let kernel = gaussian_derivative_kernel(len, sigma);
    let gdfms: Vec<Vec<f64>> = modes
        .iter()
        .map(|m| convolve_centered(m, &kernel))
        .collect();
    let energies: Vec<f64> = gdfms
        .iter()
        .map(|g| g.iter().map(|v| v * v).sum())
        .collect();
    let total: f64 = energies.iter().sum();
    let rge = if total > 0.0 {
        energies.iter().map(|e| e / total).collect()
    } else {
        vec![1.0 / modes.len() as f64; modes.len()]
    };
    Ok(GdfmSet {
        gdfms,
        rge,
        selected: None,
    })
}

/// `y[n] = sum_m d[m] * x[n - m]` with `m` running over the kernel's
/// offsets, `x` held at its end values outside the signal.
fn convolve_centered(x: &[f64], kernel: &[f64]) -> Vec<f64> {
    let n = x.len() as isize;
    let half = (kernel.len() / 2) as isize; // kernel has L-1 taps, L odd
    (0..n)
        .map(|i| {
            kernel
                .iter()
                .enumerate()
                .map(|(t, &d)| {
                    let m = t as isize - half;
                    let j = (i - m).clamp(0, n - 1);
                    d * x[j as usize]
                })
                .sum()
        })
        .collect()
}

impl GdfmSet {
    /// Builds the systolic profile from the dominant mode and, when its RGE
    /// is within `rho` of a neighbour's, that neighbour (lower one first).
    ///
    /// `s = e*^2 g* + P e_{j*-1}^2 g_{j*-1} + Q e_{j*+1}^2 g_{j*+1}`.
    pub fn select(mut self, rho: f64) -> Self {
        self.selected = Some(rge_select(&self, rho));
        self
    }

    pub fn signal(&self) -> Option<&[f64]> {
        self.selected.as_ref().map(|s| s.signal.as_slice())
    }
}

/// See [`GdfmSet::select`].
pub fn rge_select(set: &GdfmSet, rho: f64) -> Selection {
    let e = &set.rge;
    let k = e.len();
    let j = (0..k).fold(0, |best, i| if e[i] > e[best] { i } else { best });
    let lower = j > 0 && (e[j] - e[j - 1]).abs() < rho;
    let upper = !lower && j + 1 < k && (e[j] - e[j + 1]).abs() < rho;

    let mut s: Vec<f64> = set.gdfms[j].iter().map(|v| e[j] * e[j] * v).collect();
    let mut add = |idx: usize| {
        let w = e[idx] * e[idx];
        for (o, v) in s.iter_mut().zip(&set.gdfms[idx]) {
            *o += w * v;
        }
    };
    if lower {
        add(j - 1);
    }
    if upper {
        add(j + 1);
    }
    Selection {
        signal: s,
        dominant: j,
        lower_neighbour: lower,
        upper_neighbour: upper,
    }
}

/// `T_env[n] = D_env[n]` where `D_env[n]^2 > tau`, else 0.
pub fn threshold_envelope(d_env: &[f64], mode: EnvTauMode) -> Vec<f64> {
    let tau = match mode {
        EnvTauMode::RelativeMean { factor } => {
            factor * d_env.iter().map(|d| d * d).sum::<f64>() / d_env.len().max(1) as f64
        }
        EnvTauMode::Absolute { tau } => tau,
    };
    d_env
        .iter()
        .map(|&d| if d * d > tau { d } else { 0.0 })
        .collect()
}

/// Thresholded envelope spread of the systolic profile.
pub fn envelope_threshold(s: &SampledSignal, mode: EnvTauMode) -> Result<Vec<f64>> {
    envelope_threshold_slice(s.samples(), mode)
}

pub(crate) fn envelope_threshold_slice(s: &[f64], mode: EnvTauMode) -> Result<Vec<f64>> {
    let first = s.first().copied().unwrap_or(0.0);
    if s.iter().all(|&v| v == first) {
        return Ok(vec![0.0; s.len()]);
    }
    let env = envelopes_slice_for(s)?;
    Ok(threshold_envelope(&env.difference(), mode))
}

/// Negative-to-positive zero crossings of the Hilbert transform of `T_env`.
pub fn approx_ao(t_env: &[f64]) -> Result<Vec<usize>> {
    if t_env.iter().all(|&v| v == 0.0) {
        return Err(Error::EmptyEnvelope);
    }
    let h = analytic_parts(t_env).transform;
    Ok((1..h.len())
        .filter(|&n| h[n - 1] < 0.0 && h[n] >= 0.0)
        .map(|n| {
            if h[n - 1].abs() < h[n].abs() {
                n - 1
            } else {
                n
            }
        })
        .collect())
}

/// Three cascaded integrations of `|s|`, each summing the next
/// `window` samples, so the envelope of a cycle rises ahead of its energy.
pub fn cardiac_cycle_envelope(s: &[f64], window: usize) -> Vec<f64> {
    let mut y: Vec<f64> = s.iter().map(|v| v.abs()).collect();
    for _ in 0..3 {
        y = leading_sum(&y, window.max(1));
    }
    y
}

fn leading_sum(x: &[f64], window: usize) -> Vec<f64> {
    let n = x.len();
    let mut prefix = Vec::with_capacity(n + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for v in x {
        acc += v;
        prefix.push(acc);
    }
    (0..n)
        .map(|i| prefix[(i + window).min(n)] - prefix[i])
        .collect()
}

/// CCE peaks: local maxima above the height floor, accepted tallest first.
/// Accepted peaks are at least `min_sep` samples apart and, when
/// `rel_sep > 0`, at least `rel_sep` times the local cycle length, taken as
/// the median spacing of nearby peaks from a first pass.
pub fn cce_peaks(cce: &[f64], min_sep: usize, min_height_frac: f64, rel_sep: f64) -> Vec<usize> {
    if cce.is_empty() {
        return Vec::new();
    }
    let mut sorted = cce.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = |p: f64| sorted[((sorted.len() - 1) as f64 * p).round() as usize];
    let (lo, hi) = (q(0.10), q(0.90));
    let floor = lo + min_height_frac * (hi - lo);

    let mut cands: Vec<usize> = local_maxima(cce)
        .into_iter()
        .filter(|&i| cce[i] >= floor && cce[i] > 0.0)
        .collect();
    cands.sort_by(|&a, &b| cce[b].total_cmp(&cce[a]).then(a.cmp(&b)));

    let first = greedy_separated(&cands, |_, _| min_sep);
    if rel_sep <= 0.0 || first.len() < 3 {
        return first;
    }
    let gaps: Vec<f64> = first.windows(2).map(|w| (w[1] - w[0]) as f64).collect();
    // Local cycle length at a sample: median of up to 9 spacings around it.
    let local = |i: usize| -> f64 {
        let at = first.partition_point(|&p| p < i).min(gaps.len() - 1);
        let lo = at.saturating_sub(4);
        let hi = (at + 5).min(gaps.len());
        median(&gaps[lo..hi])
    };
    greedy_separated(&cands, |a, b| {
        min_sep.max((rel_sep * local(a).min(local(b))).round() as usize)
    })
}

fn greedy_separated(ordered: &[usize], sep: impl Fn(usize, usize) -> usize) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::new();
    for &c in ordered {
        if kept.iter().all(|&k| c.abs_diff(k) >= sep(c, k)) {
            kept.push(c);
        }
    }
    kept.sort_unstable();
    kept
}

fn cce_with_peaks(s: &[f64], fs: f64, p: &AoDetectParams) -> (Vec<f64>, Vec<usize>) {
    let cce = cardiac_cycle_envelope(s, ms_to_samples(p.cce_window_ms, fs).max(1));
    let peaks = cce_peaks(
        &cce,
        ms_to_samples(p.cce_min_separation_ms, fs),
        p.cce_min_height_frac,
        p.cce_relative_separation,
    );
    (cce, peaks)
}

/// Keeps the first candidate in `(peak, peak + gate]` for each CCE peak.
/// A candidate is used at most once and the output is strictly increasing.
pub fn gate_candidates(candidates: &[usize], cce_peaks: &[usize], gate: usize) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(cce_peaks.len());
    for &p in cce_peaks {
        let after = out.last().copied();
        let hit = candidates
            .iter()
            .copied()
            .find(|&c| c > p && c <= p + gate && after.is_none_or(|a| c > a));
        if let Some(c) = hit {
            out.push(c);
        }
    }
    out
}

/// Gates AO candidates with the cardiac cycle envelope of the selected
/// systolic profile.
pub fn cce_gate(
    set: &GdfmSet,
    candidates: &[usize],
    fs: f64,
    p: &AoDetectParams,
) -> Result<PeakList> {
    if candidates.is_empty() {
        return Err(Error::param("candidates", "no AO candidates to gate"));
    }
    let s = set
        .signal()
        .ok_or_else(|| Error::param("gdfm", "systolic profile has not been selected"))?;
    let (_, peaks) = cce_with_peaks(s, fs, p);
    if peaks.is_empty() {
        return Err(Error::NoCcePeaks);
    }
    PeakList::new(gate_candidates(
        candidates,
        &peaks,
        ms_to_samples(p.ao_gate_ms, fs),
    ))
}

/// Everything computed on the way to the AO list, for inspection and plots.
#[derive(Debug, Clone)]
pub struct AoDetection {
    pub peaks: PeakList,
    pub detrended: SampledSignal,
    pub stage2_center_freqs: Vec<f64>,
    pub gdfm: GdfmSet,
    pub t_env: Vec<f64>,
    pub candidates: Vec<usize>,
    pub cce: Vec<f64>,
    pub cce_peaks: Vec<usize>,
    pub coherence: f64,
}

impl AoDetection {
    pub fn systolic_profile(&self) -> &[f64] {
        self.gdfm.signal().unwrap_or_default()
    }
}

/// Runs the full AO detector.
pub fn detect_ao(x: &SampledSignal, p: &AoDetectParams) -> Result<PeakList> {
    detect_ao_staged(x, p).map(|d| d.peaks)
}

pub fn detect_ao_staged(x: &SampledSignal, p: &AoDetectParams) -> Result<AoDetection> {
    p.validate()?;
    let fs = x.fs();
    let n = x.len();
    let guard = ms_to_samples(p.guard_ms, fs);
    if n <= 2 * guard + p.gauss_len_samples(fs) {
        return Err(Error::InvalidSignal(format!(
            "{n} samples is too short for guard bands of {guard} samples"
        )));
    }

    let detrended = detrend(x, &p.stage1, p.drift_cutoff_hz)?;
    let stage2 = vmd_decompose(&detrended, &p.stage2)?;
    let set = gdfm(&stage2, fs, p.gauss_len_ms, p.gauss_sigma)?.select(p.rho);
    let s = set.signal().unwrap_or_default().to_vec();

    let t_env = envelope_threshold_slice(&s, p.env_tau)?;
    let candidates: Vec<usize> = match approx_ao(&t_env) {
        Ok(c) => c,
        Err(Error::EmptyEnvelope) => {
            return Err(Error::NoCardiacStructure("flat systolic profile".into()))
        }
        Err(e) => return Err(e),
    };
    let candidates: Vec<usize> = candidates
        .into_iter()
        .filter(|&c| c >= guard && c < n - guard && t_env[c] != 0.0)
        .collect();

    let (cce, cce_pk) = cce_with_peaks(&s, fs, p);
    if cce_pk.is_empty() {
        return Err(Error::NoCcePeaks);
    }
    let peaks = PeakList::new(gate_candidates(
        &candidates,
        &cce_pk,
        ms_to_samples(p.ao_gate_ms, fs),
    ))?;
    if peaks.len() < 3 {
        return Err(Error::NoCardiacStructure(format!(
            "only {} AO instants found",
            peaks.len()
        )));
    }
    let coherence = beat_coherence(&s, &peaks, ms_to_samples(150.0, fs));
    if coherence < p.min_coherence {
        return Err(Error::NoCardiacStructure(format!(
            "beat coherence {coherence:.3} below {}",
            p.min_coherence
        )));
    }

    Ok(AoDetection {
        peaks,
        detrended,
        stage2_center_freqs: stage2.center_freqs,
        gdfm: set,
        t_env,
        candidates,
        cce,
        cce_peaks: cce_pk,
        coherence,
    })
}

/// Energy of the beat-synchronous average of `s` relative to the mean
/// per-beat energy, over windows of `±half` samples around each peak.
/// Near 1 for repeatable beats; near `1/beats` for unrelated windows.
pub fn beat_coherence(s: &[f64], peaks: &[usize], half: usize) -> f64 {
    let windows: Vec<&[f64]> = peaks
        .iter()
        .filter(|&&p| p >= half && p + half < s.len())
        .map(|&p| &s[p - half..=p + half])
        .collect();
    if windows.is_empty() {
        return 0.0;
    }
    let len = 2 * half + 1;
    let mut mean = vec![0.0; len];
    let mut energy = 0.0;
    for w in &windows {
        for (m, v) in mean.iter_mut().zip(w.iter()) {
            *m += v;
        }
        energy += w.iter().map(|v| v * v).sum::<f64>();
    }
    let k = windows.len() as f64;
    let mean_energy: f64 = mean.iter().map(|m| (m / k).powi(2)).sum();
    let per_beat = energy / k;
    if per_beat > 0.0 {
        mean_energy / per_beat
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_sums_to_zero_and_is_antisymmetric() {
        let d = gaussian_derivative_kernel(61, 1.0);
        assert_eq!(d.len(), 60);
        assert!(d.iter().sum::<f64>().abs() < 1e-12);
        for i in 0..30 {
            assert!((d[i] + d[59 - i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rge_rule_examples() {
        let g = vec![vec![1.0; 4], vec![2.0; 4], vec![3.0; 4]];
        let mk = |rge: Vec<f64>| GdfmSet {
            gdfms: g.clone(),
            rge,
            selected: None,
        };

        let s = rge_select(&mk(vec![0.1, 0.8, 0.1]), 0.1);
        assert_eq!(s.dominant, 1);
        assert!(!s.lower_neighbour && !s.upper_neighbour);
        for v in &s.signal {
            assert!((v - 0.64 * 2.0).abs() < 1e-12);
        }

        let s = rge_select(&mk(vec![0.45, 0.50, 0.05]), 0.1);
        assert!(s.lower_neighbour && !s.upper_neighbour);
        for v in &s.signal {
            assert!((v - (0.25 * 2.0 + 0.2025 * 1.0)).abs() < 1e-12);
        }

        let s = rge_select(&mk(vec![0.05, 0.50, 0.45]), 0.1);
        assert!(!s.lower_neighbour && s.upper_neighbour);

        let single = GdfmSet {
            gdfms: vec![vec![1.5, -2.0]],
            rge: vec![1.0],
            selected: None,
        };
        assert_eq!(rge_select(&single, 0.1).signal, vec![1.5, -2.0]);
    }

    #[test]
    fn threshold_plateaus() {
        let d: Vec<f64> = (0..100)
            .map(|i| if (i / 10) % 2 == 0 { 0.1 } else { 1.0 })
            .collect();
        let t = threshold_envelope(&d, EnvTauMode::default());
        for (dv, tv) in d.iter().zip(&t) {
            if *dv == 1.0 {
                assert_eq!(*tv, 1.0);
            } else {
                assert_eq!(*tv, 0.0);
            }
        }
        let t = threshold_envelope(&d, EnvTauMode::Absolute { tau: 0.25 });
        assert_eq!(t.iter().filter(|v| **v > 0.0).count(), 50);
    }

    #[test]
    fn constant_profile_gives_zero_envelope() {
        let t = envelope_threshold_slice(&[0.7; 50], EnvTauMode::default()).unwrap();
        assert!(t.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn zero_envelope_is_an_error() {
        assert!(matches!(approx_ao(&[0.0; 32]), Err(Error::EmptyEnvelope)));
    }

    #[test]
    fn gating_rule_examples() {
        assert_eq!(
            gate_candidates(&[500, 510, 1500], &[400, 1400], 350),
            vec![500, 1500]
        );
        assert!(gate_candidates(&[800], &[400], 350).is_empty());
        // Overlapping gates never reuse a candidate.
        assert_eq!(gate_candidates(&[720], &[400, 700], 350), vec![720]);
        // The gate is open on the left and closed on the right.
        assert_eq!(gate_candidates(&[400, 750], &[400], 350), vec![750]);
    }

    #[test]
    fn cce_peak_separation() {
        let mut cce = vec![0.0; 1000];
        for (c, h) in [(100usize, 1.0), (250, 0.9), (500, 1.0), (900, 0.95)] {
            for i in c.saturating_sub(20)..(c + 20).min(1000) {
                cce[i] = h * (1.0 - (i as f64 - c as f64).abs() / 20.0);
            }
        }
        assert_eq!(cce_peaks(&cce, 300, 0.0, 0.0), vec![100, 500, 900]);
    }

    #[test]
    fn coherence_extremes() {
        let s: Vec<f64> = (0..2000)
            .map(|i| ((i % 200) as f64 / 200.0 * std::f64::consts::TAU).sin())
            .collect();
        let peaks: Vec<usize> = (1..9).map(|k| k * 200 + 50).collect();
        assert!((beat_coherence(&s, &peaks, 50) - 1.0).abs() < 1e-9);
        assert_eq!(beat_coherence(&s, &[], 50), 0.0);
    }
}
