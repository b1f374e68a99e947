use super::SampledSignal;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Envelopes {
    pub upper: Vec<f64>,
    pub lower: Vec<f64>,
}

impl Envelopes {
    /// `upper - lower`, the envelope spread.
    pub fn difference(&self) -> Vec<f64> {
        self.upper
            .iter()
            .zip(&self.lower)
            .map(|(u, l)| u - l)
            .collect()
    }
}

/// Upper and lower envelopes through the local maxima and minima of `x`.
///
/// Knots are joined with a monotone piecewise cubic (no overshoot between
/// extrema) and held flat beyond the first and last knot. Both envelopes are
/// finally clamped against the signal so that `lower <= x <= upper`.
pub fn peak_envelopes(x: &SampledSignal) -> Result<Envelopes> {
    envelopes_slice(x.samples())
}

pub(crate) fn envelopes_slice(x: &[f64]) -> Result<Envelopes> {
    let maxima = local_maxima(x);
    let minima = local_minima(x);
    if maxima.len() < 2 || minima.len() < 2 {
        return Err(Error::TooFewExtrema {
            maxima: maxima.len(),
            minima: minima.len(),
        });
    }
    let mut upper = pchip_through(x, &maxima);
    let mut lower = pchip_through(x, &minima);
    for (i, &v) in x.iter().enumerate() {
        upper[i] = upper[i].max(v);
        lower[i] = lower[i].min(v);
    }
    Ok(Envelopes { upper, lower })
}

/// Indices of strict local maxima; a flat top counts once, at its middle.
pub fn local_maxima(x: &[f64]) -> Vec<usize> {
    extrema(x, |a, b| a > b)
}

/// Indices of strict local minima; a flat bottom counts once, at its middle.
pub fn local_minima(x: &[f64]) -> Vec<usize> {
    extrema(x, |a, b| a < b)
}

fn extrema(x: &[f64], beyond: impl Fn(f64, f64) -> bool) -> Vec<usize> {
    let mut out = Vec::new();
    let n = x.len();
    let mut i = 1;
    while i + 1 < n {
        if beyond(x[i], x[i - 1]) {
            let mut j = i + 1;
            while j < n && x[j] == x[i] {
                j += 1;
            }
            if j < n && beyond(x[i], x[j]) {
                out.push((i + j - 1) / 2);
            }
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

fn pchip_through(x: &[f64], knots: &[usize]) -> Vec<f64> {
    let xs: Vec<f64> = knots.iter().map(|&k| k as f64).collect();
    let ys: Vec<f64> = knots.iter().map(|&k| x[k]).collect();
    let slopes = pchip_slopes(&xs, &ys);

    let mut out = vec![0.0; x.len()];
    let first = knots[0];
    let last = knots[knots.len() - 1];
    out[..=first].fill(ys[0]);
    out[last..].fill(ys[ys.len() - 1]);
    for seg in 0..knots.len() - 1 {
        let (x0, x1) = (xs[seg], xs[seg + 1]);
        let h = x1 - x0;
        let (y0, y1) = (ys[seg], ys[seg + 1]);
        let (m0, m1) = (slopes[seg], slopes[seg + 1]);
        for n in knots[seg]..knots[seg + 1] {
            let t = (n as f64 - x0) / h;
            let t2 = t * t;
            let t3 = t2 * t;
            out[n] = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
                + (t3 - 2.0 * t2 + t) * h * m0
                + (-2.0 * t3 + 3.0 * t2) * y1
                + (t3 - t2) * h * m1;
        }
    }
    out
}

/// Fritsch-Carlson derivative estimates with the shape-preserving
/// three-point end conditions.
fn pchip_slopes(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|k| (ys[k + 1] - ys[k]) / h[k]).collect();
    if n == 2 {
        return vec![delta[0]; 2];
    }
    let mut m = vec![0.0; n];
    for k in 1..n - 1 {
        if delta[k - 1] * delta[k] > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            m[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
        }
    }
    m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    m
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m.signum() != d0.signum() || d0 == 0.0 {
        0.0
    } else if d0.signum() != d1.signum() && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}
