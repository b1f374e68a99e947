//! Seismocardiogram (SCG) fiducial detection and cuffless blood-pressure
//! estimation from left-ventricular ejection time.
//!
//! The pipeline finds aortic-valve-opening (AO) instants with a two-stage
//! variational mode decomposition, repairs the AO list, locates the peak
//! following aortic valve closure (pAC) in every AO-AO interval, and turns
//! each beat into an ejection-time surrogate `LVET' = pAC - AO` plus a heart
//! rate. A per-subject log-linear model
//! `BP = a * ln(LVET') + b * HR + c` is then calibrated against a reference
//! pressure channel and used for beat-to-beat SBP/DBP estimates.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ao_detect;
pub mod bp_model;
pub mod config;
pub mod error;
pub mod features;
pub mod fsio;
pub mod metrics;
pub mod pac_detect;
pub mod peak_correct;
pub mod peaks;
pub mod pipeline;
pub mod signal;
pub mod synth;
pub mod vmd;

pub use ao_detect::{detect_ao, AoDetectParams};
pub use bp_model::{calibrate, estimate, BpModel, RefBeatBp, Target};
pub use config::PipelineConfig;
pub use error::{Error, Result};
pub use features::{extract_beats, BeatFeature, BeatRow, BeatTable};
pub use metrics::{evaluate, EvalReport};
pub use pac_detect::{detect_pac, PacList, PacParams};
pub use peak_correct::{correct_peaks, CorrectionParams, CorrectionReport};
pub use peaks::PeakList;
pub use pipeline::{detect_fiducials, evaluate_recording, Fiducials};
pub use signal::{Channel, Recording, SampledSignal};
pub use synth::{generate, SynthConfig, SynthGroundTruth};
pub use vmd::{vmd_decompose, OmegaInit, VmdParams, VmdResult};
