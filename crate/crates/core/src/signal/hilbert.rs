use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use super::SampledSignal;

/// Magnitude and imaginary part of the analytic signal.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticParts {
    pub envelope: Vec<f64>,
    /// The Hilbert transform of the input.
    pub transform: Vec<f64>,
}

/// Analytic signal by zeroing the negative-frequency half of the spectrum of
/// the whole segment. The segment is treated as periodic, so values near the
/// ends carry wrap-around transients.
pub fn hilbert_analytic(x: &SampledSignal) -> AnalyticParts {
    analytic_parts(x.samples())
}

pub(crate) fn analytic_parts(x: &[f64]) -> AnalyticParts {
    let n = x.len();
    if n == 0 {
        return AnalyticParts {
            envelope: Vec::new(),
            transform: Vec::new(),
        };
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);

    // h = [1, 2, ..., 2, (1 at Nyquist if n even), 0, ..., 0]
    let half = n / 2;
    for (k, v) in buf.iter_mut().enumerate().skip(1) {
        if k < half || (k == half && n % 2 == 1) {
            *v *= 2.0;
        } else if k > half {
            *v = Complex64::new(0.0, 0.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    AnalyticParts {
        envelope: buf.iter().map(|z| z.norm() * scale).collect(),
        transform: buf.iter().map(|z| z.im * scale).collect(),
    }
}
