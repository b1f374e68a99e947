use std::f64::consts::PI;

use super::SampledSignal;
use crate::error::{Error, Result};

/// Centered moving average with an odd window. Near the edges the window is
/// truncated to the samples that exist, so the output keeps the input length.
pub fn moving_average(x: &SampledSignal, window_len: usize) -> Result<SampledSignal> {
    if window_len == 0 || window_len.is_multiple_of(2) {
        return Err(Error::param(
            "window_len",
            format!("must be odd and >= 1, got {window_len}"),
        ));
    }
    if window_len > x.len() {
        return Err(Error::param(
            "window_len",
            format!("{window_len} exceeds signal length {}", x.len()),
        ));
    }
    x.with_samples(moving_average_slice(x.samples(), window_len))
}

pub(crate) fn moving_average_slice(x: &[f64], window_len: usize) -> Vec<f64> {
    // Direct sums: windows are short, and a running prefix sum would leak
    // round-off from distant samples into every output.
    let half = window_len / 2;
    (0..x.len())
        .map(|n| {
            let lo = n.saturating_sub(half);
            let hi = (n + half + 1).min(x.len());
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Normalized second-order section (a0 = 1), run in transposed direct form II.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 2],
}

impl Biquad {
    fn is_first_order(&self) -> bool {
        self.b[2] == 0.0 && self.a[1] == 0.0
    }

    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (1.0 + self.a[0] + self.a[1])
    }

    /// State that makes a unit step input look like it has always been there.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[1] * g;
        let z1 = self.b[1] - self.a[0] * g + z2;
        [z1, z2]
    }

    fn run(&self, x: &mut [f64], mut z: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [a1, a2] = self.a;
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + z[0];
            z[0] = b1 * input - a1 * y + z[1];
            z[1] = b2 * input - a2 * y;
            *v = y;
        }
    }
}

/// Butterworth high-pass as a cascade of bilinear-transformed sections.
#[derive(Debug, Clone, PartialEq)]
pub struct ButterworthHighpass {
    sections: Vec<Biquad>,
    cutoff_hz: f64,
    fs: f64,
    order: usize,
}

impl ButterworthHighpass {
    pub fn design(cutoff_hz: f64, fs: f64, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("order", "must be >= 1"));
        }
        if !(cutoff_hz > 0.0 && cutoff_hz < fs / 2.0) {
            return Err(Error::param(
                "cutoff_hz",
                format!(
                    "must lie in (0, {}) for fs = {fs}, got {cutoff_hz}",
                    fs / 2.0
                ),
            ));
        }
        let w0 = 2.0 * PI * cutoff_hz / fs;
        let (sin_w0, cos_w0) = w0.sin_cos();
        let mut sections = Vec::with_capacity(order.div_ceil(2));
        for k in 1..=order / 2 {
            // Pole pair k of the analog prototype sets the section Q.
            let q = 1.0 / (2.0 * ((2 * k - 1) as f64 * PI / (2 * order) as f64).sin());
            let alpha = sin_w0 / (2.0 * q);
            let a0 = 1.0 + alpha;
            sections.push(Biquad {
                b: [
                    (1.0 + cos_w0) / 2.0 / a0,
                    -(1.0 + cos_w0) / a0,
                    (1.0 + cos_w0) / 2.0 / a0,
                ],
                a: [-2.0 * cos_w0 / a0, (1.0 - alpha) / a0],
            });
        }
        if order % 2 == 1 {
            let k = (w0 / 2.0).tan();
            let b0 = 1.0 / (1.0 + k);
            sections.push(Biquad {
                b: [b0, -b0, 0.0],
                a: [(k - 1.0) / (k + 1.0), 0.0],
            });
        }
        Ok(Self {
            sections,
            cutoff_hz,
            fs,
            order,
        })
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    pub fn cutoff_hz(&self) -> f64 {
        self.cutoff_hz
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Zero-phase application; see [`filtfilt`].
    pub fn filtfilt(&self, x: &[f64]) -> Vec<f64> {
        // Pad long enough for the start-up transient to die out before the
        // real samples: a few cutoff periods.
        let settle = (3.0 * self.fs / self.cutoff_hz).ceil() as usize;
        filtfilt(&self.sections, x, settle)
    }
}

/// Butterworth high-pass applied forward and backward (zero phase).
pub fn highpass_iir(x: &SampledSignal, cutoff_hz: f64, order: usize) -> Result<SampledSignal> {
    let hp = ButterworthHighpass::design(cutoff_hz, x.fs(), order)?;
    x.with_samples(hp.filtfilt(x.samples()))
}

/// Forward-backward cascade filtering with mirror padding of at
/// least `min_pad` samples and steady-state initial conditions at both ends.
pub(crate) fn filtfilt(sections: &[Biquad], x: &[f64], min_pad: usize) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let taps = 2 * sections.len() + 1 - sections.iter().filter(|s| s.is_first_order()).count();
    let pad = (3 * taps).max(min_pad).min(n - 1);

    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| x[n - 1 - i]));

    cascade(sections, &mut ext);
    ext.reverse();
    cascade(sections, &mut ext);
    ext.reverse();
    ext[pad..pad + n].to_vec()
}

fn cascade(sections: &[Biquad], x: &mut [f64]) {
    // Each section starts in the steady state it would reach if the first
    // input sample had been applied forever.
    let x0 = x[0];
    let mut gain = 1.0;
    for s in sections {
        let [z1, z2] = s.step_state();
        s.run(x, [z1 * gain * x0, z2 * gain * x0]);
        gain *= s.dc_gain();
    }
}
