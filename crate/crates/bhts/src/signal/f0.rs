use super::framing::raw_frames;
use super::{AnalysisConfig, F0Track, Waveform};
use crate::Result;

fn autocorrelation(frame: &[f64], max_lag: usize) -> Vec<f64> {
    let n = frame.len();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|tau| frame[..n - tau].iter().zip(&frame[tau..]).map(|(a, b)| a * b).sum())
        .collect()
}

/// Autocorrelation F0 tracker.
///
/// Voicing and the initial peak search use the biased normalized
/// autocorrelation, whose taper penalizes long lags and so suppresses
/// octave-down errors; the sub-sample refinement interpolates the unbiased
/// values around the chosen peak.
pub fn estimate_f0(waveform: &Waveform, config: &AnalysisConfig) -> Result<F0Track> {
    config.validate()?;
    let fs = config.sample_rate as f64;
    let lag_min = (fs / config.f0_max_hz).ceil() as usize;
    let lag_max = (fs / config.f0_min_hz).floor() as usize;
    let frames = raw_frames(waveform, config);
    let mut track = Vec::with_capacity(frames.len());
    for frame in &frames {
        track.push(frame_f0(frame, config, lag_min, lag_max));
    }
    Ok(F0Track(track))
}

fn frame_f0(
    frame: &[f64],
    config: &AnalysisConfig,
    lag_min: usize,
    lag_max: usize,
) -> Option<f64> {
    let n = frame.len();
    let lag_max = lag_max.min(n.saturating_sub(2));
    if lag_min == 0 || lag_min > lag_max {
        return None;
    }
    let r = autocorrelation(frame, lag_max + 1);
    let r0 = r[0];
    if !(r0 > 0.0) || !r0.is_finite() {
        return None;
    }
    let (mut best_lag, mut best_val) = (0usize, f64::NEG_INFINITY);
    for tau in lag_min..=lag_max {
        let v = r[tau] / r0;
        if v > best_val {
            best_val = v;
            best_lag = tau;
        }
    }
    if best_val < config.voicing_threshold {
        return None;
    }
    let unbiased = |tau: usize| r[tau] / r0 * n as f64 / (n - tau) as f64;
    // The taper that makes the peak search octave-safe also skews it toward
    // shorter lags, so walk to the nearest unbiased local maximum first.
    let mut best_lag = best_lag;
    loop {
        let here = unbiased(best_lag);
        let left = if best_lag > lag_min { unbiased(best_lag - 1) } else { f64::NEG_INFINITY };
        let right = if best_lag < lag_max { unbiased(best_lag + 1) } else { f64::NEG_INFINITY };
        if left > here && left >= right {
            best_lag -= 1;
        } else if right > here {
            best_lag += 1;
        } else {
            break;
        }
    }
    let mut lag = best_lag as f64;
    if best_lag > lag_min && best_lag < lag_max {
        let (lo, mid, hi) = (unbiased(best_lag - 1), unbiased(best_lag), unbiased(best_lag + 1));
        let denom = lo - 2.0 * mid + hi;
        if denom.abs() > 1e-12 {
            let delta = 0.5 * (lo - hi) / denom;
            if delta.is_finite() {
                lag += delta.clamp(-1.0, 1.0);
            }
        }
    }
    let f0 = (config.sample_rate as f64 / lag).clamp(config.f0_min_hz, config.f0_max_hz);
    Some(f0.ln())
}
