use super::{AnalysisConfig, Waveform};
use crate::{Error, Result};

/// Blackman window of length `n`.
pub fn blackman(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let x = i as f64 / denom;
            0.42 - 0.5 * (2.0 * std::f64::consts::PI * x).cos()
                + 0.08 * (4.0 * std::f64::consts::PI * x).cos()
        })
        .collect()
}

fn frame_starts(num_samples: usize, length: usize, shift: usize) -> usize {
    if num_samples < length {
        1
    } else {
        (num_samples - length) / shift + 1
    }
}

fn slice_frame(samples: &[f64], start: usize, length: usize) -> Vec<f64> {
    let mut frame = vec![0.0; length];
    let end = (start + length).min(samples.len());
    if start < samples.len() {
        frame[..end - start].copy_from_slice(&samples[start..end]);
    }
    frame
}

/// Splits a waveform into Blackman-windowed frames.
pub fn frame_signal(waveform: &Waveform, config: &AnalysisConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    if waveform.samples.is_empty() {
        return Err(Error::Signal("cannot frame an empty waveform".into()));
    }
    let window = blackman(config.frame_length);
    Ok(raw_frames(waveform, config)
        .into_iter()
        .map(|mut frame| {
            for (s, w) in frame.iter_mut().zip(&window) {
                *s *= w;
            }
            frame
        })
        .collect())
}

/// Same segmentation as `frame_signal` but without the window, for F0 analysis.
pub(crate) fn raw_frames(waveform: &Waveform, config: &AnalysisConfig) -> Vec<Vec<f64>> {
    let n = frame_starts(
        waveform.samples.len(),
        config.frame_length,
        config.frame_shift,
    );
    (0..n)
        .map(|i| slice_frame(&waveform.samples, i * config.frame_shift, config.frame_length))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn blackman_endpoints_and_center() {
        let w = blackman(401);
        assert_relative_eq!(w[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(w[400], 0.0, epsilon = 1e-12);
        assert_relative_eq!(w[200], 1.0, epsilon = 1e-12);
        let ws = blackman(400);
        for i in 0..400 {
            assert_relative_eq!(ws[i], ws[399 - i], epsilon = 1e-12);
        }
    }

    #[test]
    fn frame_count_matches_shift_arithmetic() {
        let cfg = AnalysisConfig::default();
        let w = Waveform::new(vec![0.5; 16_000], 16_000);
        let frames = frame_signal(&w, &cfg).unwrap();
        assert_eq!(frames.len(), (16_000 - 400) / 80 + 1);
        assert_eq!(frames[0].len(), 400);
    }

    #[test]
    fn short_signal_zero_pads_single_frame() {
        let cfg = AnalysisConfig::default();
        let w = Waveform::new(vec![1.0; 100], 16_000);
        let frames = frame_signal(&w, &cfg).unwrap();
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].len(), 400);
        assert_eq!(frames[0][350], 0.0);
    }

    #[test]
    fn empty_waveform_is_an_error() {
        let cfg = AnalysisConfig::default();
        let w = Waveform::new(vec![], 16_000);
        assert!(frame_signal(&w, &cfg).is_err());
    }

    #[test]
    fn windowing_applies_per_sample() {
        let cfg = AnalysisConfig::default();
        let w = Waveform::new(vec![2.0; 800], 16_000);
        let frames = frame_signal(&w, &cfg).unwrap();
        let win = blackman(400);
        for (i, &v) in frames[0].iter().enumerate() {
            assert_relative_eq!(v, 2.0 * win[i], epsilon = 1e-12);
        }
    }
}
