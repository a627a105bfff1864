use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use super::{F0Track, Waveform};

fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Builds the source signal for MLSA synthesis: a phase-continuous impulse
/// train of amplitude `sqrt(period)` on voiced frames and unit-variance
/// Gaussian noise on unvoiced frames. The first sample of every voiced run
/// carries an impulse.
pub fn generate_excitation(
    f0: &F0Track,
    frame_shift: usize,
    sample_rate: u32,
    seed: u64,
) -> Waveform {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut samples = Vec::with_capacity(f0.len() * frame_shift);
    let mut phase: Option<f64> = None;
    for value in &f0.0 {
        match value {
            None => {
                phase = None;
                for _ in 0..frame_shift {
                    samples.push(standard_normal(&mut rng));
                }
            }
            Some(log_f0) => {
                let period = sample_rate as f64 / log_f0.exp();
                let mut p = phase.unwrap_or(period);
                for _ in 0..frame_shift {
                    if p + 1e-9 >= period {
                        samples.push(period.sqrt());
                        p -= period;
                    } else {
                        samples.push(0.0);
                    }
                    p += 1.0;
                }
                phase = Some(p);
            }
        }
    }
    Waveform::new(samples, sample_rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn constant_track(hz: f64, frames: usize) -> F0Track {
        F0Track(vec![Some(hz.ln()); frames])
    }

    #[test]
    fn impulse_train_spacing_and_amplitude() {
        let track = constant_track(200.0, 100);
        let exc = generate_excitation(&track, 80, 16_000, 7);
        assert_eq!(exc.samples.len(), 8000);
        let impulses: Vec<usize> = exc
            .samples
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect();
        assert_eq!(impulses.len(), 100);
        assert_eq!(impulses[0], 0);
        for pair in impulses.windows(2) {
            assert_eq!(pair[1] - pair[0], 80);
        }
        assert_relative_eq!(exc.samples[0], 80.0f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn fractional_period_stays_phase_continuous() {
        let track = constant_track(210.0, 200);
        let exc = generate_excitation(&track, 80, 16_000, 7);
        let impulses: Vec<usize> = exc
            .samples
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0.0)
            .map(|(i, _)| i)
            .collect();
        let period = 16_000.0 / 210.0;
        let gaps: Vec<usize> = impulses.windows(2).map(|p| p[1] - p[0]).collect();
        let mean_gap = gaps.iter().sum::<usize>() as f64 / gaps.len() as f64;
        assert!((mean_gap - period).abs() < 0.1, "mean gap {mean_gap}");
        for &g in &gaps {
            assert!((g as f64 - period).abs() <= 1.0);
        }
    }

    #[test]
    fn unvoiced_noise_is_seeded_unit_variance() {
        let track = F0Track(vec![None; 200]);
        let a = generate_excitation(&track, 80, 16_000, 42);
        let b = generate_excitation(&track, 80, 16_000, 42);
        assert_eq!(a.samples, b.samples);
        let c = generate_excitation(&track, 80, 16_000, 43);
        assert_ne!(a.samples, c.samples);
        let n = a.samples.len() as f64;
        let mean = a.samples.iter().sum::<f64>() / n;
        let var = a.samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        assert!(mean.abs() < 0.05, "noise mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "noise variance {var}");
    }

    #[test]
    fn voiced_run_restarts_with_impulse() {
        let mut frames = vec![Some(200.0f64.ln()); 3];
        frames.extend(vec![None; 2]);
        frames.extend(vec![Some(100.0f64.ln()); 3]);
        let exc = generate_excitation(&F0Track(frames), 80, 16_000, 1);
        assert_relative_eq!(exc.samples[400], 160.0f64.sqrt(), epsilon = 1e-12);
    }
}
