//! Waveform-domain processing: framing, mel-cepstral analysis, F0 extraction,
//! delta features, excitation generation and MLSA-filter synthesis.

mod delta;
mod excitation;
mod f0;
mod features;
mod framing;
mod mcep;
mod mlsa;
mod wav;

pub use delta::{apply_window_segment, compute_deltas};
pub use excitation::generate_excitation;
pub use f0::estimate_f0;
pub use features::{FeatureRecord, ObservationSequence};
pub use framing::{blackman, frame_signal};
pub use mcep::{b2mc, freqt, mc2b, mel_cepstral_analysis, mel_log_spectrum, warped_frequency};
pub use mlsa::{mlsa_synthesize, pade_coefficients, MlsaFilter};
pub use wav::{read_wav, write_wav};

use crate::{Error, Result};

/// A mono audio signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    pub samples: Vec<f64>,
    pub sample_rate: u32,
}

impl Waveform {
    pub fn new(samples: Vec<f64>, sample_rate: u32) -> Self {
        Waveform {
            samples,
            sample_rate,
        }
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }
}

/// Analysis settings shared by feature extraction, training and synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub sample_rate: u32,
    pub frame_length: usize,
    pub frame_shift: usize,
    pub mcep_order: usize,
    pub alpha: f64,
    pub fft_size: usize,
    /// Power-spectrum floor applied before the log.
    pub spectrum_floor: f64,
    /// Number of raw cepstral coefficients kept before warping.
    pub cepstrum_len: usize,
    pub f0_min_hz: f64,
    pub f0_max_hz: f64,
    pub voicing_threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            sample_rate: 16_000,
            frame_length: 400,
            frame_shift: 80,
            mcep_order: 24,
            alpha: 0.42,
            fft_size: 512,
            spectrum_floor: 1e-10,
            cepstrum_len: 128,
            f0_min_hz: 60.0,
            f0_max_hz: 400.0,
            voicing_threshold: 0.3,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sample_rate == 0 {
            return Err(Error::Config("sample_rate must be positive".into()));
        }
        if !(self.alpha.abs() < 1.0) {
            return Err(Error::Config(format!("|alpha| must be < 1, got {}", self.alpha)));
        }
        if self.frame_shift == 0 || self.frame_shift > self.frame_length {
            return Err(Error::Config("frame_shift must be in 1..=frame_length".into()));
        }
        if self.fft_size < self.frame_length {
            return Err(Error::Config("fft_size must be >= frame_length".into()));
        }
        if self.cepstrum_len > self.fft_size / 2 {
            return Err(Error::Config("cepstrum_len must be <= fft_size/2".into()));
        }
        if !(self.f0_min_hz > 0.0 && self.f0_min_hz < self.f0_max_hz) {
            return Err(Error::Config("f0 range must be positive and ordered".into()));
        }
        if self.mcep_order == 0 {
            return Err(Error::Config("mcep_order must be >= 1".into()));
        }
        Ok(())
    }

    /// Canonical byte serialization, used for cache invalidation hashes.
    pub fn canonical_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64);
        out.extend_from_slice(&self.sample_rate.to_le_bytes());
        for v in [
            self.frame_length as u64,
            self.frame_shift as u64,
            self.mcep_order as u64,
            self.fft_size as u64,
            self.cepstrum_len as u64,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in [
            self.alpha,
            self.spectrum_floor,
            self.f0_min_hz,
            self.f0_max_hz,
            self.voicing_threshold,
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }
}

/// Static / delta / delta-delta regression windows.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaWindows {
    pub windows: [Vec<f64>; 3],
}

impl Default for DeltaWindows {
    fn default() -> Self {
        DeltaWindows {
            windows: [
                vec![1.0],
                vec![-0.5, 0.0, 0.5],
                vec![0.25, -0.5, 0.25],
            ],
        }
    }
}

impl DeltaWindows {
    pub fn validate(&self) -> Result<()> {
        for w in &self.windows {
            if w.len() % 2 == 0 {
                return Err(Error::Config("delta windows must have odd length".into()));
            }
        }
        if self.windows[0].len() != 1 || self.windows[0][0] == 0.0 {
            return Err(Error::Config("static window must be a single nonzero tap".into()));
        }
        Ok(())
    }

    pub fn half_width(&self) -> usize {
        self.windows.iter().map(|w| w.len() / 2).max().unwrap_or(0)
    }
}

/// Per-frame F0 in natural-log Hz; `None` marks unvoiced frames.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track(pub Vec<Option<f64>>);

impl F0Track {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn voiced_count(&self) -> usize {
        self.0.iter().filter(|v| v.is_some()).count()
    }

    /// Per-frame F0 in Hz, 0.0 on unvoiced frames.
    pub fn to_hz(&self) -> Vec<f64> {
        self.0
            .iter()
            .map(|v| v.map(|l| l.exp()).unwrap_or(0.0))
            .collect()
    }
}
