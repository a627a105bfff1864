//! Trainable HMM-based text-to-speech for Bengali.
//!
//! The crate is organized around the classic statistical-parametric pipeline:
//!
//! * [`frontend`] — POS-tagged Bengali text to full-context labels (G2P,
//!   syllabification, prosodic-word grouping, tones, label serialization).
//! * [`signal`] — waveform processing: framing, mel-cepstral analysis, F0
//!   extraction, delta features, excitation generation and the MLSA filter.
//! * [`model`] — model data structures (stream Gaussians, MSD distributions,
//!   decision trees, GV statistics) and binary persistence.
//! * [`train`] — flat start, embedded Baum-Welch re-estimation, full-context
//!   cloning, MDL decision-tree state tying, duration and GV estimation.
//! * [`synth`] — labels to waveform: duration assignment, ML parameter
//!   generation with dynamic-feature constraints, optional GV, vocoding.
//! * [`corpus`] — annotated-corpus parsing and validation, the synthetic
//!   verification corpus, and the feature cache.
//! * [`eval`] — MOS aggregation, F0 and spectral comparison metrics.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod frontend;
pub mod model;
pub mod signal;
pub mod synth;
pub mod train;

pub(crate) mod par;
pub(crate) mod util;

pub use error::{Error, Result};
