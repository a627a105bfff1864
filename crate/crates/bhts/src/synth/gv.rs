use super::SynthesisConfig;
use crate::model::GVModel;
use crate::{Error, Result};

/// Gradient-ascent global-variance compensation of the static trajectories.
/// The HMM likelihood is held as a quadratic around the ML solution, so the
/// input trajectory doubles as the anchor; per-dimension means are
/// preserved, and a zero weight is the identity.
pub fn apply_gv(
    trajectory: &[Vec<f64>],
    gv: &GVModel,
    cfg: &SynthesisConfig,
) -> Result<Vec<Vec<f64>>> {
    if cfg.gv_weight < 0.0 {
        return Err(Error::Synth("GV weight must be non-negative".into()));
    }
    if trajectory.is_empty() {
        return Err(Error::Synth("empty trajectory".into()));
    }
    let dim = trajectory[0].len();
    if trajectory.iter().any(|f| f.len() != dim) {
        return Err(Error::Synth("ragged trajectory".into()));
    }
    if trajectory.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Synth("non-finite trajectory".into()));
    }
    if cfg.gv_weight == 0.0 {
        return Ok(trajectory.to_vec());
    }
    if gv.mean.len() != dim || gv.variance.len() != dim {
        return Err(Error::Synth(format!(
            "GV model dimension {} does not match trajectory dimension {dim}",
            gv.mean.len()
        )));
    }

    let t_len = trajectory.len();
    let t_f = t_len as f64;
    let mut out = trajectory.to_vec();
    for d in 0..dim {
        let anchor: Vec<f64> = trajectory.iter().map(|f| f[d]).collect();
        let mut c = anchor.clone();
        let target_mean = anchor.iter().sum::<f64>() / t_f;
        for _ in 0..cfg.gv_iterations {
            let mean = c.iter().sum::<f64>() / t_f;
            let v = c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / t_f;
            let dv = -(v - gv.mean[d]) / gv.variance[d];
            for t in 0..t_len {
                let gv_grad = cfg.gv_weight * dv * 2.0 * (c[t] - mean) / t_f;
                let hmm_grad = -(c[t] - anchor[t]) / t_f;
                c[t] += cfg.gv_step * (gv_grad + hmm_grad);
            }
            let drift = c.iter().sum::<f64>() / t_f - target_mean;
            for x in &mut c {
                *x -= drift;
            }
        }
        for t in 0..t_len {
            out[t][d] = c[t];
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn variance(col: &[f64]) -> f64 {
        let n = col.len() as f64;
        let m = col.iter().sum::<f64>() / n;
        col.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n
    }

    fn column(traj: &[Vec<f64>], d: usize) -> Vec<f64> {
        traj.iter().map(|f| f[d]).collect()
    }

    fn random_trajectory(rng: &mut ChaCha12Rng, t_len: usize, dim: usize) -> Vec<Vec<f64>> {
        (0..t_len)
            .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect()
    }

    #[test]
    fn zero_weight_is_the_identity() {
        let mut rng = ChaCha12Rng::seed_from_u64(2);
        let traj = random_trajectory(&mut rng, 20, 3);
        let gv = GVModel {
            mean: vec![1.0; 3],
            variance: vec![0.5; 3],
        };
        let out = apply_gv(&traj, &gv, &SynthesisConfig::default()).unwrap();
        assert_eq!(out, traj);
    }

    #[test]
    fn on_target_input_barely_moves() {
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let traj = random_trajectory(&mut rng, 30, 2);
        let gv = GVModel {
            mean: (0..2).map(|d| variance(&column(&traj, d))).collect(),
            variance: vec![0.3; 2],
        };
        let cfg = SynthesisConfig {
            gv_weight: 0.7,
            ..SynthesisConfig::default()
        };
        let out = apply_gv(&traj, &gv, &cfg).unwrap();
        for (a, b) in traj.iter().flatten().zip(out.iter().flatten()) {
            assert!((a - b).abs() <= 1e-6, "moved {a} -> {b}");
        }
    }

    #[test]
    fn under_varianced_input_moves_toward_the_target() {
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        let dim = 3;
        let traj = random_trajectory(&mut rng, 40, dim);
        // GV target: four times the actual variance, so v_in = 0.25 * mean.
        let gv = GVModel {
            mean: (0..dim).map(|d| 4.0 * variance(&column(&traj, d))).collect(),
            variance: vec![1.0; dim],
        };
        let cfg = SynthesisConfig {
            gv_weight: 0.7,
            ..SynthesisConfig::default()
        };
        let out = apply_gv(&traj, &gv, &cfg).unwrap();
        for d in 0..dim {
            let before = variance(&column(&traj, d)) / gv.mean[d];
            let after = variance(&column(&out, d)) / gv.mean[d];
            assert!(
                (after - 1.0).abs() < (before - 1.0).abs(),
                "dim {d}: ratio went {before} -> {after}"
            );
            let mean_in = column(&traj, d).iter().sum::<f64>() / 40.0;
            let mean_out = column(&out, d).iter().sum::<f64>() / 40.0;
            assert!((mean_in - mean_out).abs() < 1e-9, "mean drifted");
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let gv = GVModel {
            mean: vec![1.0],
            variance: vec![1.0],
        };
        let cfg = SynthesisConfig {
            gv_weight: 0.7,
            ..SynthesisConfig::default()
        };
        let err = apply_gv(&[vec![f64::NAN]], &gv, &cfg).unwrap_err();
        assert!(err.to_string().contains("non-finite"), "{err}");
    }
}
