#![allow(dead_code)]

use scgbp_core::synth::{HrProfile, Noise, SynthConfig, Wander};

/// One-to-one matching of detections to reference events within `tol`
/// samples, nearest pairs first. Returns `(truth index, detection index)`.
pub fn match_events(truth: &[usize], det: &[usize], tol: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
    for (i, &t) in truth.iter().enumerate() {
        for (j, &d) in det.iter().enumerate() {
            let dist = t.abs_diff(d);
            if dist <= tol {
                pairs.push((dist, i, j));
            }
        }
    }
    pairs.sort_unstable();
    let mut used_t = vec![false; truth.len()];
    let mut used_d = vec![false; det.len()];
    let mut out = Vec::new();
    for (_, i, j) in pairs {
        if !used_t[i] && !used_d[j] {
            used_t[i] = true;
            used_d[j] = true;
            out.push((i, j));
        }
    }
    out.sort_unstable();
    out
}

/// Reference events that a detector with `guard` samples of edge guard
/// can report.
pub fn inside_guard(events: &[usize], n: usize, guard: usize) -> Vec<usize> {
    events
        .iter()
        .copied()
        .filter(|&e| e >= guard && e + guard < n)
        .collect()
}

pub fn quiet(seed: u64, hr: HrProfile) -> SynthConfig {
    SynthConfig {
        seed,
        hr_profile: hr,
        noise: Noise::off(),
        baseline_wander: Wander::off(),
        ..SynthConfig::default()
    }
}

pub fn sweep_profiles() -> [HrProfile; 4] {
    [
        HrProfile::LinearSweep {
            start_bpm: 50.0,
            end_bpm: 140.0,
        },
        HrProfile::LinearSweep {
            start_bpm: 140.0,
            end_bpm: 50.0,
        },
        HrProfile::Sinusoidal {
            min_bpm: 50.0,
            max_bpm: 140.0,
            period_s: 40.0,
        },
        HrProfile::Sinusoidal {
            min_bpm: 50.0,
            max_bpm: 140.0,
            period_s: 25.0,
        },
    ]
}
