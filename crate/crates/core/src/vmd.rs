//! Variational mode decomposition.
//!
//! ADMM iterations run on the one-sided spectrum of the mirror-extended
//! signal. Each sweep updates the modes in turn with a Wiener-like filter
//! centred on the mode's current frequency, moves each centre frequency to
//! the power-weighted mean frequency of its mode, and optionally takes a
//! dual-ascent step on the reconstruction constraint.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

/// How centre frequencies are seeded before the first sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum OmegaInit {
    /// Evenly spaced over [0, fs/2).
    Uniform,
    /// All modes start at DC.
    Zero,
    /// Sorted uniform draws over [0, fs/2) from a seeded generator.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VmdParams {
    /// Number of modes.
    pub k: usize,
    /// Bandwidth penalty; larger values give narrower modes.
    pub alpha: f64,
    /// Dual-ascent step. Zero turns the reconstruction constraint into a
    /// soft one, which is more tolerant of noise.
    pub tau_dual: f64,
    /// Stop once the relative squared change of the mode spectra drops below
    /// this (and, with dual ascent, the relative squared residual too).
    pub tol: f64,
    pub max_iter: usize,
    pub init: OmegaInit,
}

impl Default for VmdParams {
    fn default() -> Self {
        Self {
            k: 3,
            alpha: 2000.0,
            tau_dual: 0.0,
            tol: 1e-6,
            max_iter: 500,
            init: OmegaInit::Uniform,
        }
    }
}

impl VmdParams {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::param("k", "must be >= 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::param(
                "alpha",
                format!("must be > 0, got {}", self.alpha),
            ));
        }
        if !(self.tau_dual >= 0.0 && self.tau_dual.is_finite()) {
            return Err(Error::param(
                "tau_dual",
                format!("must be >= 0, got {}", self.tau_dual),
            ));
        }
        if !(self.tol > 0.0) {
            return Err(Error::param(
                "tol",
                format!("must be > 0, got {}", self.tol),
            ));
        }
        if self.max_iter == 0 {
            return Err(Error::param("max_iter", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VmdResult {
    /// Modes in ascending order of centre frequency, each as long as the input.
    pub modes: Vec<Vec<f64>>,
    /// Centre frequencies in Hz, non-decreasing.
    pub center_freqs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl VmdResult {
    /// Pointwise sum of all modes.
    pub fn sum(&self) -> Vec<f64> {
        let n = self.modes.first().map_or(0, Vec::len);
        let mut out = vec![0.0; n];
        for m in &self.modes {
            for (o, v) in out.iter_mut().zip(m) {
                *o += v;
            }
        }
        out
    }
}

/// Decomposes `x` into `p.k` band-limited modes.
///
/// Failing to converge within `max_iter` is reported through
/// [`VmdResult::converged`], not as an error.
pub fn vmd_decompose(x: &SampledSignal, p: &VmdParams) -> Result<VmdResult> {
    p.validate()?;
    let n = x.len();
    if n < 8 * p.k {
        return Err(Error::InvalidSignal(format!(
            "VMD with k = {} needs at least {} samples, got {n}",
            p.k,
            8 * p.k
        )));
    }

    // Mirror half the signal onto each side.
    let half = n / 2;
    let samples = x.samples();
    let mut ext: Vec<Complex64> = Vec::with_capacity(2 * n);
    ext.extend(
        samples[..half]
            .iter()
            .rev()
            .map(|&v| Complex64::new(v, 0.0)),
    );
    ext.extend(samples.iter().map(|&v| Complex64::new(v, 0.0)));
    ext.extend(
        samples[half..]
            .iter()
            .rev()
            .map(|&v| Complex64::new(v, 0.0)),
    );
    let t_len = ext.len();

    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(t_len).process(&mut ext);

    // One-sided spectrum, bins 0..=T/2, frequencies in cycles/sample.
    let bins = t_len / 2 + 1;
    let f_hat: Vec<Complex64> = ext[..bins].to_vec();
    let freqs: Vec<f64> = (0..bins).map(|b| b as f64 / t_len as f64).collect();

    let f_energy: f64 = f_hat.iter().map(|c| c.norm_sqr()).sum();
    let k = p.k;
    let mut omega = initial_omegas(k, p.init);
    let mut modes = vec![vec![Complex64::new(0.0, 0.0); bins]; k];
    let mut lambda = vec![Complex64::new(0.0, 0.0); bins];
    let mut total = vec![Complex64::new(0.0, 0.0); bins];

    let mut iterations = 0;
    let mut converged = false;
    let mut prev_energy = 0.0;
    while iterations < p.max_iter {
        iterations += 1;
        let mut change = 0.0;
        for (i, mode) in modes.iter_mut().enumerate() {
            let mut num = 0.0;
            let mut den = 0.0;
            for b in 0..bins {
                let others = total[b] - mode[b];
                let dw = freqs[b] - omega[i];
                let updated =
                    (f_hat[b] - others - lambda[b] * 0.5) / (1.0 + 2.0 * p.alpha * dw * dw);
                change += (updated - mode[b]).norm_sqr();
                total[b] = others + updated;
                mode[b] = updated;
                let pw = updated.norm_sqr();
                num += freqs[b] * pw;
                den += pw;
            }
            if den > 0.0 {
                omega[i] = num / den;
            }
        }
        // With dual ascent the modes can settle while the multiplier is still
        // moving, so the reconstruction residual has to be small as well.
        let mut residual = 0.0;
        if p.tau_dual > 0.0 {
            for b in 0..bins {
                let r = total[b] - f_hat[b];
                residual += r.norm_sqr();
                lambda[b] += r * p.tau_dual;
            }
        }
        let energy: f64 = modes.iter().flatten().map(|c| c.norm_sqr()).sum();
        // The first sweep has no previous iterate to compare against.
        if iterations > 1 {
            let rel = if prev_energy > 0.0 {
                (change / prev_energy).max(if f_energy > 0.0 {
                    residual / f_energy
                } else {
                    0.0
                })
            } else if change == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            if rel < p.tol {
                converged = true;
                break;
            }
        }
        prev_energy = energy;
    }

    // Back to the time domain through the Hermitian extension.
    let inverse = planner.plan_fft_inverse(t_len);
    let scale = 1.0 / t_len as f64;
    let mut out: Vec<(f64, Vec<f64>)> = modes
        .iter()
        .zip(&omega)
        .map(|(spec, &w)| {
            let mut full = vec![Complex64::new(0.0, 0.0); t_len];
            full[..bins].copy_from_slice(spec);
            for b in 1..bins {
                let mirror = t_len - b;
                if mirror >= bins {
                    full[mirror] = spec[b].conj();
                }
            }
            inverse.process(&mut full);
            let mode: Vec<f64> = full[half..half + n].iter().map(|z| z.re * scale).collect();
            ((w * x.fs()).clamp(0.0, x.fs() / 2.0), mode)
        })
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (center_freqs, modes) = out.into_iter().unzip();
    Ok(VmdResult {
        modes,
        center_freqs,
        iterations,
        converged,
    })
}

fn initial_omegas(k: usize, init: OmegaInit) -> Vec<f64> {
    match init {
        OmegaInit::Uniform => (0..k).map(|i| 0.5 * i as f64 / k as f64).collect(),
        OmegaInit::Zero => vec![0.0; k],
        OmegaInit::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.5)).collect();
            w.sort_by(f64::total_cmp);
            w
        }
    }
}
