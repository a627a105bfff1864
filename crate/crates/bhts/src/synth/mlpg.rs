use crate::signal::DeltaWindows;
use crate::{Error, Result};

/// Symmetric positive-definite band matrix, upper bands stored by diagonal:
/// `a[i][k]` holds A[i][i+k].
struct BandMatrix {
    n: usize,
    hbw: usize,
    a: Vec<Vec<f64>>,
}

impl BandMatrix {
    fn new(n: usize, hbw: usize) -> Self {
        BandMatrix {
            n,
            hbw,
            a: vec![vec![0.0; hbw + 1]; n],
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        if j >= i {
            self.a[i][j - i] += v;
        }
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        if hi - lo > self.hbw {
            0.0
        } else {
            self.a[lo][hi - lo]
        }
    }

    /// In-place banded Cholesky solve of A x = b.
    fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let hbw = self.hbw;
        // l[i][k] = L[i][i-k]
        let mut l = vec![vec![0.0; hbw + 1]; n];
        for i in 0..n {
            let j_lo = i.saturating_sub(hbw);
            for j in j_lo..=i {
                let m_lo = j.saturating_sub(hbw).max(j_lo);
                let mut s = self.get(i, j);
                for m in m_lo..j {
                    s -= l[i][i - m] * l[j][j - m];
                }
                if j < i {
                    l[i][i - j] = s / l[j][0];
                } else {
                    if !(s > 0.0) {
                        return Err(Error::Synth(
                            "parameter generation system is not positive definite".into(),
                        ));
                    }
                    l[i][0] = s.sqrt();
                }
            }
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut s = b[i];
            for j in i.saturating_sub(hbw)..i {
                s -= l[i][i - j] * y[j];
            }
            y[i] = s / l[i][0];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..(i + hbw + 1).min(n) {
                s -= l[j][j - i] * x[j];
            }
            x[i] = s / l[i][0];
        }
        Ok(x)
    }
}

/// Maximum-likelihood static trajectories from stacked per-frame means and
/// diagonal variances (layout: one block of `static_dim` values per window,
/// in window order). Window taps past the ends replicate the edge frames.
pub fn solve_mlpg(
    means: &[Vec<f64>],
    variances: &[Vec<f64>],
    windows: &DeltaWindows,
) -> Result<Vec<Vec<f64>>> {
    let t_len = means.len();
    if t_len == 0 {
        return Err(Error::Synth("no frames to generate".into()));
    }
    if variances.len() != t_len {
        return Err(Error::Synth("means and variances disagree on frame count".into()));
    }
    let streams = windows.windows.len();
    let total_dim = means[0].len();
    if total_dim == 0 || total_dim % streams != 0 {
        return Err(Error::Synth(format!(
            "stacked dimension {total_dim} is not a multiple of {streams} windows"
        )));
    }
    if means.iter().any(|m| m.len() != total_dim)
        || variances.iter().any(|v| v.len() != total_dim)
    {
        return Err(Error::Synth("ragged mean or variance rows".into()));
    }
    let static_dim = total_dim / streams;

    let max_half = windows
        .windows
        .iter()
        .map(|w| w.len() / 2)
        .max()
        .unwrap_or(0);
    let hbw = (2 * max_half).min(t_len - 1);

    let mut out = vec![vec![0.0; static_dim]; t_len];
    let mut taps: Vec<(usize, f64)> = Vec::with_capacity(8);
    for m in 0..static_dim {
        let mut a = BandMatrix::new(t_len, hbw);
        let mut b = vec![0.0; t_len];
        for t in 0..t_len {
            for (s, window) in windows.windows.iter().enumerate() {
                let idx = s * static_dim + m;
                let inv_var = 1.0 / variances[t][idx];
                let mu = means[t][idx];
                let half = window.len() / 2;
                taps.clear();
                for (o, &w) in window.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let pos = (t + o).saturating_sub(half).min(t_len - 1);
                    match taps.iter_mut().find(|(p, _)| *p == pos) {
                        Some((_, acc)) => *acc += w,
                        None => taps.push((pos, w)),
                    }
                }
                for &(pi, wi) in &taps {
                    b[pi] += wi * inv_var * mu;
                    for &(pj, wj) in &taps {
                        a.add(pi, pj, wi * inv_var * wj);
                    }
                }
            }
        }
        let c = a.solve(&b)?;
        for t in 0..t_len {
            out[t][m] = c[t];
        }
    }
    Ok(out)
}
