use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::AnalysisConfig;
use crate::{Error, Result};

type FftPair = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

fn fft_pair(size: usize) -> FftPair {
    static CACHE: OnceLock<Mutex<HashMap<usize, FftPair>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("fft plan cache poisoned");
    guard
        .entry(size)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            (planner.plan_fft_forward(size), planner.plan_fft_inverse(size))
        })
        .clone()
}

/// Frequency-warps a cepstrum by expanding it in powers of the all-pass
/// variable `(z^-1 - alpha) / (1 - alpha z^-1)`, returning `order + 1`
/// coefficients.
pub fn freqt(c: &[f64], order: usize, alpha: f64) -> Vec<f64> {
    let aa = 1.0 - alpha * alpha;
    let mut g = vec![0.0; order + 1];
    let mut prev = vec![0.0; order + 1];
    for &ci in c.iter().rev() {
        prev.copy_from_slice(&g);
        g[0] = ci + alpha * prev[0];
        if order >= 1 {
            g[1] = aa * prev[0] + alpha * prev[1];
        }
        for m in 2..=order {
            g[m] = prev[m - 1] + alpha * (prev[m] - g[m - 1]);
        }
    }
    g
}

/// Converts mel-cepstrum to MLSA filter coefficients.
pub fn mc2b(c: &[f64], alpha: f64) -> Vec<f64> {
    let mut b = c.to_vec();
    for m in (0..c.len().saturating_sub(1)).rev() {
        b[m] = c[m] - alpha * b[m + 1];
    }
    b
}

/// Inverse of `mc2b`.
pub fn b2mc(b: &[f64], alpha: f64) -> Vec<f64> {
    let mut c = b.to_vec();
    for m in 0..b.len().saturating_sub(1) {
        c[m] = b[m] + alpha * b[m + 1];
    }
    c
}

/// The warped angular frequency corresponding to linear frequency `omega`.
pub fn warped_frequency(omega: f64, alpha: f64) -> f64 {
    omega + 2.0 * (alpha * omega.sin() / (1.0 - alpha * omega.cos())).atan()
}

/// Evaluates the log-magnitude spectrum of a mel-cepstrum on `n_points`
/// frequencies spaced uniformly over `[0, pi]`.
pub fn mel_log_spectrum(c: &[f64], alpha: f64, n_points: usize) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::Signal("mel_log_spectrum needs at least 2 points".into()));
    }
    let denom = (n_points - 1) as f64;
    Ok((0..n_points)
        .map(|i| {
            let omega = std::f64::consts::PI * i as f64 / denom;
            let warped = warped_frequency(omega, alpha);
            c.iter()
                .enumerate()
                .map(|(m, &cm)| cm * (m as f64 * warped).cos())
                .sum()
        })
        .collect())
}

pub(crate) fn mcep_from_log_magnitude(
    log_mag: &[f64],
    order: usize,
    alpha: f64,
    cepstrum_len: usize,
) -> Vec<f64> {
    let n = log_mag.len();
    let (_, ifft) = fft_pair(n);
    let mut buf: Vec<Complex<f64>> = log_mag.iter().map(|&v| Complex::new(v, 0.0)).collect();
    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    let keep = cepstrum_len.min(n / 2);
    let mut cep = vec![0.0; keep];
    cep[0] = buf[0].re * scale;
    for m in 1..keep {
        cep[m] = 2.0 * buf[m].re * scale;
    }
    freqt(&cep, order, alpha)
}

/// Mel-cepstral analysis of one (already windowed) frame.
///
/// Returns `mcep_order + 1` coefficients such that the modeled spectrum is
/// `exp(sum_m c[m] e^{-j m warped_omega})`.
pub fn mel_cepstral_analysis(frame: &[f64], config: &AnalysisConfig) -> Result<Vec<f64>> {
    if frame.len() > config.fft_size {
        return Err(Error::Signal(format!(
            "frame of {} samples exceeds fft_size {}",
            frame.len(),
            config.fft_size
        )));
    }
    if frame.iter().any(|v| !v.is_finite()) {
        return Err(Error::Signal("frame contains non-finite samples".into()));
    }
    let n = config.fft_size;
    let (fft, _) = fft_pair(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    for (slot, &s) in buf.iter_mut().zip(frame) {
        slot.re = s;
    }
    fft.process(&mut buf);
    let log_mag: Vec<f64> = buf
        .iter()
        .map(|x| 0.5 * x.norm_sqr().max(config.spectrum_floor).ln())
        .collect();
    Ok(mcep_from_log_magnitude(
        &log_mag,
        config.mcep_order,
        config.alpha,
        config.cepstrum_len,
    ))
}
