use std::path::Path;

use super::delta::{apply_window_segment, compute_deltas};
use super::f0::estimate_f0;
use super::framing::frame_signal;
use super::mcep::mel_cepstral_analysis;
use super::{AnalysisConfig, DeltaWindows, F0Track, Waveform};
use crate::par::ordered_map;
use crate::util::write_atomic;
use crate::{Error, Result};

const MAGIC: &[u8; 6] = b"BHTSF1";

/// Per-utterance acoustic features: mel-cepstra plus a log-F0 track.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub order: usize,
    pub alpha: f64,
    pub mcep: Vec<Vec<f64>>,
    pub log_f0: Vec<Option<f64>>,
}

/// Frame-synchronous training observations: stacked spectral rows and the
/// multi-space excitation stream (static, delta, delta-delta log-F0 on
/// voiced frames).
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSequence {
    pub spectral: Vec<Vec<f64>>,
    pub excitation: Vec<Option<[f64; 3]>>,
}

impl ObservationSequence {
    pub fn num_frames(&self) -> usize {
        self.spectral.len()
    }
}

impl FeatureRecord {
    /// Runs the full analysis front: framing, per-frame mel-cepstral
    /// analysis and F0 tracking on the same frame grid.
    pub fn extract(waveform: &Waveform, config: &AnalysisConfig) -> Result<Self> {
        let frames = frame_signal(waveform, config)?;
        let mcep = ordered_map(&frames, |frame| mel_cepstral_analysis(frame, config))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        let f0 = estimate_f0(waveform, config)?;
        debug_assert_eq!(mcep.len(), f0.len());
        Ok(FeatureRecord {
            order: config.mcep_order,
            alpha: config.alpha,
            mcep,
            log_f0: f0.0,
        })
    }

    pub fn num_frames(&self) -> usize {
        self.mcep.len()
    }

    pub fn f0_track(&self) -> F0Track {
        F0Track(self.log_f0.clone())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let dim = self.order + 1;
        let mut out = Vec::with_capacity(22 + self.mcep.len() * (dim + 1) * 8);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.mcep.len() as u32).to_le_bytes());
        out.extend_from_slice(&(self.order as u32).to_le_bytes());
        out.extend_from_slice(&self.alpha.to_le_bytes());
        for frame in &self.mcep {
            for &v in frame {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        for v in &self.log_f0 {
            out.extend_from_slice(&v.unwrap_or(f64::NAN).to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let fail = |msg: &str| Error::Corpus(format!("feature record: {msg}"));
        if bytes.len() < 22 || &bytes[..6] != MAGIC {
            return Err(fail("bad magic"));
        }
        let frames = u32::from_le_bytes(bytes[6..10].try_into().unwrap()) as usize;
        let order = u32::from_le_bytes(bytes[10..14].try_into().unwrap()) as usize;
        let alpha = f64::from_le_bytes(bytes[14..22].try_into().unwrap());
        let dim = order + 1;
        let expect = 22 + frames * (dim + 1) * 8;
        if bytes.len() != expect {
            return Err(fail(&format!(
                "expected {expect} bytes for {frames} frames, got {}",
                bytes.len()
            )));
        }
        let mut at = 22;
        let mut read_f64 = || {
            let v = f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
            at += 8;
            v
        };
        let mcep = (0..frames)
            .map(|_| (0..dim).map(|_| read_f64()).collect())
            .collect();
        let log_f0 = (0..frames)
            .map(|_| {
                let v = read_f64();
                if v.is_nan() {
                    None
                } else {
                    Some(v)
                }
            })
            .collect();
        Ok(FeatureRecord {
            order,
            alpha,
            mcep,
            log_f0,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.to_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    /// Builds the two training streams. Log-F0 derivatives are taken inside
    /// each maximal voiced run so no window ever spans a voicing boundary.
    pub fn to_observations(&self, windows: &DeltaWindows) -> Result<ObservationSequence> {
        let spectral = compute_deltas(&self.mcep, windows)?;
        let mut excitation: Vec<Option<[f64; 3]>> = vec![None; self.log_f0.len()];
        let mut t = 0;
        while t < self.log_f0.len() {
            if self.log_f0[t].is_none() {
                t += 1;
                continue;
            }
            let start = t;
            while t < self.log_f0.len() && self.log_f0[t].is_some() {
                t += 1;
            }
            let run: Vec<f64> = self.log_f0[start..t].iter().map(|v| v.unwrap()).collect();
            let d = apply_window_segment(&run, &windows.windows[1]);
            let a = apply_window_segment(&run, &windows.windows[2]);
            for (i, slot) in excitation[start..t].iter_mut().enumerate() {
                *slot = Some([run[i], d[i], a[i]]);
            }
        }
        Ok(ObservationSequence {
            spectral,
            excitation,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sample_record() -> FeatureRecord {
        FeatureRecord {
            order: 2,
            alpha: 0.42,
            mcep: vec![
                vec![-1.0, 0.5, 0.25],
                vec![-0.5, 0.4, 0.2],
                vec![-0.25, 0.3, 0.1],
            ],
            log_f0: vec![None, Some(200.0f64.ln()), Some(210.0f64.ln())],
        }
    }

    #[test]
    fn byte_round_trip_is_exact_including_unvoiced() {
        let rec = sample_record();
        let back = FeatureRecord::from_bytes(&rec.to_bytes()).unwrap();
        assert_eq!(rec, back);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("utt.feat");
        let rec = sample_record();
        rec.save(&path).unwrap();
        assert_eq!(FeatureRecord::load(&path).unwrap(), rec);
    }

    #[test]
    fn corrupt_bytes_rejected() {
        let rec = sample_record();
        let mut bytes = rec.to_bytes();
        bytes[0] = b'X';
        assert!(FeatureRecord::from_bytes(&bytes).is_err());
        let mut truncated = rec.to_bytes();
        truncated.pop();
        assert!(FeatureRecord::from_bytes(&truncated).is_err());
    }

    #[test]
    fn extraction_aligns_streams() {
        let cfg = AnalysisConfig::default();
        let samples: Vec<f64> = (0..8000)
            .map(|i| 0.4 * (2.0 * std::f64::consts::PI * 150.0 * i as f64 / 16_000.0).sin())
            .collect();
        let rec = FeatureRecord::extract(&Waveform::new(samples, 16_000), &cfg).unwrap();
        assert_eq!(rec.num_frames(), (8000 - 400) / 80 + 1);
        assert_eq!(rec.mcep[0].len(), 25);
        assert_eq!(rec.log_f0.len(), rec.num_frames());
        assert!(rec.f0_track().voiced_count() > rec.num_frames() / 2);
    }

    #[test]
    fn observations_respect_voicing_runs() {
        let windows = DeltaWindows::default();
        let rec = FeatureRecord {
            order: 1,
            alpha: 0.42,
            mcep: vec![vec![0.0, 0.0]; 6],
            log_f0: vec![None, Some(1.0), Some(2.0), Some(3.0), None, Some(5.0)],
        };
        let obs = rec.to_observations(&windows).unwrap();
        assert_eq!(obs.spectral.len(), 6);
        assert_eq!(obs.spectral[0].len(), 6);
        assert!(obs.excitation[0].is_none());
        assert!(obs.excitation[4].is_none());
        let mid = obs.excitation[2].unwrap();
        assert_relative_eq!(mid[0], 2.0);
        assert_relative_eq!(mid[1], 1.0);
        assert_relative_eq!(mid[2], 0.0, epsilon = 1e-12);
        // Run edges replicate inside the run, never across the gap.
        let first = obs.excitation[1].unwrap();
        assert_relative_eq!(first[1], 0.5);
        // A single-frame run has zero derivatives.
        let lone = obs.excitation[5].unwrap();
        assert_relative_eq!(lone[0], 5.0);
        assert_relative_eq!(lone[1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(lone[2], 0.0, epsilon = 1e-12);
    }
}
