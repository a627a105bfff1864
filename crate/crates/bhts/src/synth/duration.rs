use super::{RateMode, StateChain, SynthesisConfig};
use crate::{Error, Result};

/// Per-state frame counts maximizing the duration likelihood, optionally
/// under a total-length constraint.
pub fn determine_durations(chain: &StateChain, cfg: &SynthesisConfig) -> Result<Vec<usize>> {
    if chain.states.is_empty() {
        return Err(Error::Synth("empty state chain".into()));
    }
    let n = chain.states.len();
    match cfg.rate {
        RateMode::Unconstrained => Ok(chain
            .states
            .iter()
            .map(|s| (s.duration.mean.round().max(1.0)) as usize)
            .collect()),
        RateMode::TargetFrames(target) => {
            if target < n {
                return Err(Error::Synth(format!(
                    "target duration {target} frames is shorter than the {n}-state chain"
                )));
            }
            let sum_mean: f64 = chain.states.iter().map(|s| s.duration.mean).sum();
            let sum_var: f64 = chain.states.iter().map(|s| s.duration.variance).sum();
            let rho = (target as f64 - sum_mean) / sum_var;
            let ideal: Vec<f64> = chain
                .states
                .iter()
                .map(|s| s.duration.mean + rho * s.duration.variance)
                .collect();
            let mut d: Vec<i64> = ideal.iter().map(|x| (x.round() as i64).max(1)).collect();

            // Rounding drift: nudge the states farthest from their ideal
            // until the total matches exactly.
            let mut total: i64 = d.iter().sum();
            while total != target as i64 {
                if total > target as i64 {
                    let k = (0..n)
                        .filter(|&k| d[k] > 1)
                        .max_by(|&a, &b| {
                            (d[a] as f64 - ideal[a]).total_cmp(&(d[b] as f64 - ideal[b]))
                        })
                        .expect("total above target implies a shrinkable state");
                    d[k] -= 1;
                    total -= 1;
                } else {
                    let k = (0..n)
                        .max_by(|&a, &b| {
                            (ideal[a] - d[a] as f64).total_cmp(&(ideal[b] - d[b] as f64))
                        })
                        .expect("chain is non-empty");
                    d[k] += 1;
                    total += 1;
                }
            }
            Ok(d.into_iter().map(|v| v as usize).collect())
        }
    }
}

/// Voiced flag per frame: every frame of a state is voiced iff that state's
/// MSD voiced weight exceeds one half.
pub fn decide_voicing(chain: &StateChain, durations: &[usize]) -> Vec<bool> {
    chain
        .states
        .iter()
        .zip(durations)
        .flat_map(|(s, &d)| std::iter::repeat_n(s.excitation.voiced_weight > 0.5, d))
        .collect()
}
