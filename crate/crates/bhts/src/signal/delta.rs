use super::DeltaWindows;
use crate::{Error, Result};

/// Applies one regression window to a scalar sequence with edge replication.
pub fn apply_window_segment(values: &[f64], window: &[f64]) -> Vec<f64> {
    let half = window.len() / 2;
    let last = values.len().saturating_sub(1);
    (0..values.len())
        .map(|t| {
            window
                .iter()
                .enumerate()
                .map(|(j, &w)| {
                    let idx = (t + j).saturating_sub(half).min(last);
                    w * values[idx]
                })
                .sum()
        })
        .collect()
}

/// Stacks static, delta and delta-delta rows for every frame:
/// output dimension is three times the input dimension.
pub fn compute_deltas(frames: &[Vec<f64>], windows: &DeltaWindows) -> Result<Vec<Vec<f64>>> {
    windows.validate()?;
    if frames.is_empty() {
        return Ok(Vec::new());
    }
    let dim = frames[0].len();
    if frames.iter().any(|f| f.len() != dim) {
        return Err(Error::Signal("inconsistent frame dimensions".into()));
    }
    let last = frames.len() - 1;
    let mut out = vec![vec![0.0; dim * 3]; frames.len()];
    for (w_idx, window) in windows.windows.iter().enumerate() {
        let half = window.len() / 2;
        for t in 0..frames.len() {
            for (j, &w) in window.iter().enumerate() {
                let src = (t + j).saturating_sub(half).min(last);
                for d in 0..dim {
                    out[t][w_idx * dim + d] += w * frames[src][d];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ramp_frames() -> Vec<Vec<f64>> {
        (0..5).map(|t| vec![t as f64]).collect()
    }

    #[test]
    fn ramp_deltas_with_edge_replication() {
        let out = compute_deltas(&ramp_frames(), &DeltaWindows::default()).unwrap();
        let statics: Vec<f64> = out.iter().map(|f| f[0]).collect();
        let deltas: Vec<f64> = out.iter().map(|f| f[1]).collect();
        let accels: Vec<f64> = out.iter().map(|f| f[2]).collect();
        assert_eq!(statics, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let expect_d = [0.5, 1.0, 1.0, 1.0, 0.5];
        let expect_a = [0.25, 0.0, 0.0, 0.0, -0.25];
        for t in 0..5 {
            assert_relative_eq!(deltas[t], expect_d[t], epsilon = 1e-12);
            assert_relative_eq!(accels[t], expect_a[t], epsilon = 1e-12);
        }
    }

    #[test]
    fn parabola_has_linear_delta_constant_accel() {
        let frames: Vec<Vec<f64>> = (0..7).map(|t| vec![(t * t) as f64]).collect();
        let out = compute_deltas(&frames, &DeltaWindows::default()).unwrap();
        for t in 1..6 {
            assert_relative_eq!(out[t][1], 2.0 * t as f64, epsilon = 1e-12);
            assert_relative_eq!(out[t][2], 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_sequence_has_zero_derivatives() {
        let frames: Vec<Vec<f64>> = (0..4).map(|_| vec![3.0, -1.5]).collect();
        let out = compute_deltas(&frames, &DeltaWindows::default()).unwrap();
        for f in &out {
            assert_eq!(f.len(), 6);
            assert_relative_eq!(f[0], 3.0);
            assert_relative_eq!(f[1], -1.5);
            for &v in &f[2..] {
                assert_relative_eq!(v, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn single_frame_replicates_itself() {
        let out = compute_deltas(&[vec![2.0]], &DeltaWindows::default()).unwrap();
        assert_relative_eq!(out[0][0], 2.0);
        assert_relative_eq!(out[0][1], 0.0, epsilon = 1e-12);
        assert_relative_eq!(out[0][2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn scalar_segment_matches_vector_path() {
        let xs = [0.0, 2.0, 1.0, -1.0, 4.0];
        let windows = DeltaWindows::default();
        let frames: Vec<Vec<f64>> = xs.iter().map(|&x| vec![x]).collect();
        let stacked = compute_deltas(&frames, &windows).unwrap();
        let d = apply_window_segment(&xs, &windows.windows[1]);
        let a = apply_window_segment(&xs, &windows.windows[2]);
        for t in 0..xs.len() {
            assert_relative_eq!(d[t], stacked[t][1], epsilon = 1e-12);
            assert_relative_eq!(a[t], stacked[t][2], epsilon = 1e-12);
        }
    }

    #[test]
    fn ragged_input_rejected() {
        let frames = vec![vec![1.0, 2.0], vec![1.0]];
        assert!(compute_deltas(&frames, &DeltaWindows::default()).is_err());
    }
}
