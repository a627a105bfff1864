use crate::model::{msd_log_prob, HmmState};
use crate::signal::ObservationSequence;
use crate::{Error, Result};

/// Per-utterance posteriors from one forward-backward pass over a
/// left-to-right no-skip chain.
#[derive(Debug, Clone)]
pub struct Occupancy {
    /// gamma[t][j]: posterior of chain state j at frame t.
    pub gamma: Vec<Vec<f64>>,
    /// Sum over t < T-1 of the self-transition posterior of state j.
    pub xi_self: Vec<f64>,
    /// Sum over t < T-1 of gamma[t][j]: denominator for the self-loop update.
    pub xi_total: Vec<f64>,
}

pub fn chain_log_emissions(obs: &ObservationSequence, states: &[&HmmState]) -> Vec<Vec<f64>> {
    obs.spectral
        .iter()
        .zip(&obs.excitation)
        .map(|(spec, exc)| {
            let exc = exc.as_ref().map(|a| a.as_slice());
            states
                .iter()
                .map(|s| s.spectrum.log_density(spec) + msd_log_prob(exc, &s.excitation))
                .collect()
        })
        .collect()
}

pub fn forward_backward(
    obs: &ObservationSequence,
    states: &[&HmmState],
) -> Result<(Occupancy, f64)> {
    let log_emissions = chain_log_emissions(obs, states);
    let self_loops: Vec<f64> = states.iter().map(|s| s.self_loop).collect();
    forward_backward_scaled(&log_emissions, &self_loops)
}

/// Scaled forward-backward. Paths start in state 0, move by 0 or +1 per
/// frame, and must end in the last state; the log-likelihood is exact.
pub fn forward_backward_scaled(
    log_emissions: &[Vec<f64>],
    self_loops: &[f64],
) -> Result<(Occupancy, f64)> {
    let (t_len, n) = check_shape(log_emissions, self_loops)?;

    // Per-frame max-shifted emission weights keep the scaled recursion in a
    // safe linear range even for very unlikely frames.
    let mut shift = vec![0.0; t_len];
    let mut weight = vec![vec![0.0; n]; t_len];
    for t in 0..t_len {
        let m = log_emissions[t].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !m.is_finite() {
            return Err(Error::Train(format!(
                "utterance has zero likelihood at frame {t}"
            )));
        }
        shift[t] = m;
        for j in 0..n {
            weight[t][j] = (log_emissions[t][j] - m).exp();
        }
    }

    let stay = self_loops;
    let advance: Vec<f64> = stay.iter().map(|a| 1.0 - a).collect();

    let mut alpha = vec![vec![0.0; n]; t_len];
    let mut scale = vec![0.0; t_len];
    alpha[0][0] = weight[0][0];
    normalize(&mut alpha[0], &mut scale[0], 0)?;
    for t in 1..t_len {
        for j in 0..n {
            let from_self = alpha[t - 1][j] * stay[j];
            let from_prev = if j > 0 { alpha[t - 1][j - 1] * advance[j - 1] } else { 0.0 };
            alpha[t][j] = (from_self + from_prev) * weight[t][j];
        }
        normalize(&mut alpha[t], &mut scale[t], t)?;
    }

    let exit = alpha[t_len - 1][n - 1];
    if !(exit > 0.0) {
        return Err(Error::Train(
            "utterance has zero likelihood: no path reaches the final state".into(),
        ));
    }
    let log_likelihood: f64 =
        scale.iter().map(|c| c.ln()).sum::<f64>() + shift.iter().sum::<f64>() + exit.ln();

    let mut beta = vec![vec![0.0; n]; t_len];
    beta[t_len - 1][n - 1] = 1.0;
    for t in (0..t_len - 1).rev() {
        for i in 0..n {
            let via_self = stay[i] * weight[t + 1][i] * beta[t + 1][i];
            let via_next = if i + 1 < n {
                advance[i] * weight[t + 1][i + 1] * beta[t + 1][i + 1]
            } else {
                0.0
            };
            beta[t][i] = (via_self + via_next) / scale[t + 1];
        }
    }

    let mut gamma = vec![vec![0.0; n]; t_len];
    for t in 0..t_len {
        for j in 0..n {
            gamma[t][j] = alpha[t][j] * beta[t][j] / exit;
        }
    }

    let mut xi_self = vec![0.0; n];
    let mut xi_total = vec![0.0; n];
    for t in 0..t_len - 1 {
        for j in 0..n {
            xi_self[j] +=
                alpha[t][j] * stay[j] * weight[t + 1][j] * beta[t + 1][j] / (scale[t + 1] * exit);
            xi_total[j] += gamma[t][j];
        }
    }

    Ok((
        Occupancy {
            gamma,
            xi_self,
            xi_total,
        },
        log_likelihood,
    ))
}

/// Most likely state path under the same topology, with its log-probability.
pub fn viterbi(log_emissions: &[Vec<f64>], self_loops: &[f64]) -> Result<(Vec<usize>, f64)> {
    let (t_len, n) = check_shape(log_emissions, self_loops)?;
    let ln_stay: Vec<f64> = self_loops.iter().map(|a| a.ln()).collect();
    let ln_adv: Vec<f64> = self_loops.iter().map(|a| (1.0 - a).ln()).collect();

    let mut delta = vec![vec![f64::NEG_INFINITY; n]; t_len];
    let mut from_prev = vec![vec![false; n]; t_len];
    delta[0][0] = log_emissions[0][0];
    for t in 1..t_len {
        for j in 0..n {
            let stay_score = delta[t - 1][j] + ln_stay[j];
            let move_score = if j > 0 {
                delta[t - 1][j - 1] + ln_adv[j - 1]
            } else {
                f64::NEG_INFINITY
            };
            let (best, moved) = if move_score > stay_score {
                (move_score, true)
            } else {
                (stay_score, false)
            };
            delta[t][j] = best + log_emissions[t][j];
            from_prev[t][j] = moved;
        }
    }
    let best = delta[t_len - 1][n - 1];
    if !best.is_finite() {
        return Err(Error::Train(
            "utterance has zero likelihood: no Viterbi path".into(),
        ));
    }
    let mut path = vec![0usize; t_len];
    let mut j = n - 1;
    for t in (0..t_len).rev() {
        path[t] = j;
        if t > 0 && from_prev[t][j] {
            j -= 1;
        }
    }
    Ok((path, best))
}

pub fn viterbi_align(
    obs: &ObservationSequence,
    states: &[&HmmState],
) -> Result<(Vec<usize>, f64)> {
    let log_emissions = chain_log_emissions(obs, states);
    let self_loops: Vec<f64> = states.iter().map(|s| s.self_loop).collect();
    viterbi(&log_emissions, &self_loops)
}

fn check_shape(log_emissions: &[Vec<f64>], self_loops: &[f64]) -> Result<(usize, usize)> {
    let n = self_loops.len();
    let t_len = log_emissions.len();
    if n == 0 || t_len == 0 {
        return Err(Error::Train("empty chain or observation sequence".into()));
    }
    if log_emissions.iter().any(|row| row.len() != n) {
        return Err(Error::Train("emission matrix does not match chain".into()));
    }
    if t_len < n {
        return Err(Error::Train(format!(
            "utterance too short: {t_len} frames for {n} states"
        )));
    }
    Ok((t_len, n))
}

fn normalize(row: &mut [f64], scale: &mut f64, t: usize) -> Result<()> {
    let total: f64 = row.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Train(format!(
            "utterance has zero likelihood at frame {t}"
        )));
    }
    for v in row.iter_mut() {
        *v /= total;
    }
    *scale = total;
    Ok(())
}
