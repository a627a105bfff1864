use super::stats::{duration_from_stats, GaussStats};
use crate::model::{DurationGaussian, GVModel, VARIANCE_FLOOR};
use crate::{Error, Result};

/// Consecutive-frame run lengths per chain state from one Viterbi path.
pub fn state_runs(path: &[usize], num_chain_states: usize) -> Vec<Vec<usize>> {
    let mut runs = vec![Vec::new(); num_chain_states];
    let mut iter = path.iter();
    let Some(&first) = iter.next() else {
        return runs;
    };
    let mut current = first;
    let mut length = 1usize;
    for &j in iter {
        if j == current {
            length += 1;
        } else {
            runs[current].push(length);
            current = j;
            length = 1;
        }
    }
    runs[current].push(length);
    runs
}

/// Duration Gaussian per state from collected run lengths; unvisited states
/// fall back to the (1, 0.25) default.
pub fn estimate_durations(runs: &[Vec<usize>]) -> Vec<DurationGaussian> {
    runs.iter()
        .map(|lengths| {
            let mut stats = GaussStats::zeros(1);
            for &len in lengths {
                stats.add(1.0, &[len as f64]);
            }
            duration_from_stats(&stats)
        })
        .collect()
}

/// Global variance model over per-utterance variances of the static
/// mel-cepstrum trajectories.
pub fn estimate_gv(utterance_statics: &[Vec<Vec<f64>>]) -> Result<GVModel> {
    if utterance_statics.len() < 2 {
        return Err(Error::Train(format!(
            "global variance needs at least 2 utterances, got {}",
            utterance_statics.len()
        )));
    }
    let dim = utterance_statics
        .first()
        .and_then(|u| u.first())
        .map_or(0, Vec::len);
    if dim == 0 {
        return Err(Error::Train("global variance needs non-empty frames".into()));
    }

    // Two-pass variances: exact zeros for constant trajectories.
    let mut vs: Vec<Vec<f64>> = Vec::with_capacity(utterance_statics.len());
    for (ui, frames) in utterance_statics.iter().enumerate() {
        if frames.is_empty() {
            return Err(Error::Train(format!("utterance {ui} has no frames")));
        }
        if frames.iter().any(|f| f.len() != dim) {
            return Err(Error::Train("inconsistent static dimension".into()));
        }
        // Shifting by the first frame keeps the pass exact for constant
        // trajectories and well-conditioned otherwise.
        let n = frames.len() as f64;
        let shift = &frames[0];
        let mut mean = vec![0.0; dim];
        for frame in frames {
            for d in 0..dim {
                mean[d] += frame[d] - shift[d];
            }
        }
        for m in &mut mean {
            *m /= n;
        }
        let mut v = vec![0.0; dim];
        for frame in frames {
            for d in 0..dim {
                v[d] += (frame[d] - shift[d] - mean[d]).powi(2);
            }
        }
        for x in &mut v {
            *x /= n;
        }
        vs.push(v);
    }

    let n = vs.len() as f64;
    let mut mean = vec![0.0; dim];
    for v in &vs {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    for m in &mut mean {
        *m /= n;
    }
    let mut variance = vec![0.0; dim];
    for v in &vs {
        for d in 0..dim {
            variance[d] += (v[d] - mean[d]).powi(2);
        }
    }
    for x in &mut variance {
        *x = (*x / n).max(VARIANCE_FLOOR);
    }
    Ok(GVModel { mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn runs_split_on_state_changes() {
        let runs = state_runs(&[0, 0, 0, 1, 1, 2], 4);
        assert_eq!(runs, vec![vec![3], vec![2], vec![1], vec![]]);
    }

    #[test]
    fn two_runs_give_mean_and_sample_variance() {
        let d = estimate_durations(&[vec![3, 5]]);
        assert_eq!(d.len(), 1);
        assert!((d[0].mean - 4.0).abs() < 1e-12);
        assert!((d[0].variance - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_run_hits_the_variance_floor() {
        let d = estimate_durations(&[vec![4]]);
        assert!((d[0].mean - 4.0).abs() < 1e-12);
        assert!((d[0].variance - 0.25).abs() < 1e-12);
    }

    #[test]
    fn unvisited_state_gets_the_default() {
        let d = estimate_durations(&[vec![]]);
        assert!((d[0].mean - 1.0).abs() < 1e-12);
        assert!((d[0].variance - 0.25).abs() < 1e-12);
    }

    #[test]
    fn gv_mean_of_hand_set_variances() {
        // Utterance A: dim-0 values +-1 (variance 1), dim-1 +-sqrt(2) (variance 2).
        let a = vec![vec![1.0, 2.0_f64.sqrt()], vec![-1.0, -(2.0_f64.sqrt())]];
        // Utterance B: dim-0 +-sqrt(3), dim-1 +-2.
        let b = vec![vec![3.0_f64.sqrt(), 2.0], vec![-(3.0_f64.sqrt()), -2.0]];
        let gv = estimate_gv(&[a, b]).unwrap();
        assert!((gv.mean[0] - 2.0).abs() < 1e-12);
        assert!((gv.mean[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_trajectories_have_zero_gv_mean() {
        let a = vec![vec![0.7, -0.2]; 5];
        let b = vec![vec![1.7, 0.4]; 8];
        let gv = estimate_gv(&[a, b]).unwrap();
        assert_eq!(gv.mean, vec![0.0, 0.0]);
    }

    #[test]
    fn matches_a_two_pass_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(17);
        let utts: Vec<Vec<Vec<f64>>> = (0..3)
            .map(|_| {
                (0..rng.gen_range(6..12))
                    .map(|_| (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect())
                    .collect()
            })
            .collect();

        let mut vs = Vec::new();
        for frames in &utts {
            let n = frames.len() as f64;
            let mut v = vec![0.0; 4];
            for d in 0..4 {
                let mean = frames.iter().map(|f| f[d]).sum::<f64>() / n;
                v[d] = frames.iter().map(|f| (f[d] - mean).powi(2)).sum::<f64>() / n;
            }
            vs.push(v);
        }
        let mut expect_mean = vec![0.0; 4];
        let mut expect_var = vec![0.0; 4];
        for d in 0..4 {
            expect_mean[d] = vs.iter().map(|v| v[d]).sum::<f64>() / 3.0;
            expect_var[d] = vs.iter().map(|v| (v[d] - expect_mean[d]).powi(2)).sum::<f64>() / 3.0;
        }

        let gv = estimate_gv(&utts).unwrap();
        for d in 0..4 {
            assert!((gv.mean[d] - expect_mean[d]).abs() < 1e-10);
            assert!((gv.variance[d] - expect_var[d]).abs() < 1e-10);
        }
    }

    #[test]
    fn fewer_than_two_utterances_is_an_error() {
        let err = estimate_gv(&[vec![vec![1.0]]]).unwrap_err();
        assert!(err.to_string().contains("at least 2"), "{err}");
    }
}
