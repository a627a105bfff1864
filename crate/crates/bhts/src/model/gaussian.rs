use std::f64::consts::TAU;

pub const VARIANCE_FLOOR: f64 = 1e-6;
pub const DURATION_VARIANCE_FLOOR: f64 = 0.25;
pub const DURATION_MEAN_FLOOR: f64 = 1.0;

/// Single diagonal Gaussian over one observation stream.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamGaussian {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl StreamGaussian {
    /// Builds a Gaussian with the variance floor applied.
    pub fn new(mean: Vec<f64>, variance: Vec<f64>) -> Self {
        assert_eq!(mean.len(), variance.len());
        let variance = variance.into_iter().map(|v| v.max(VARIANCE_FLOOR)).collect();
        StreamGaussian { mean, variance }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim());
        let mut acc = 0.0;
        for i in 0..self.mean.len() {
            let d = x[i] - self.mean[i];
            acc += (TAU * self.variance[i]).ln() + d * d / self.variance[i];
        }
        -0.5 * acc
    }
}

/// Multi-space distribution for the excitation stream: a point mass on the
/// unvoiced space with weight 1 − w_v, and a diagonal Gaussian over
/// (logF0, delta, delta-delta) with weight w_v.
#[derive(Debug, Clone, PartialEq)]
pub struct MSDGaussian {
    pub voiced_weight: f64,
    pub gaussian: StreamGaussian,
}

impl MSDGaussian {
    pub fn new(voiced_weight: f64, gaussian: StreamGaussian) -> Self {
        assert!((0.0..=1.0).contains(&voiced_weight));
        MSDGaussian {
            voiced_weight,
            gaussian,
        }
    }

    pub fn log_prob(&self, obs: Option<&[f64]>) -> f64 {
        match obs {
            None => (1.0 - self.voiced_weight).ln(),
            Some(x) => self.voiced_weight.ln() + self.gaussian.log_density(x),
        }
    }
}

/// Log probability of one frame under an MSD distribution; −∞ when a
/// degenerate weight contradicts the observation.
pub fn msd_log_prob(obs: Option<&[f64]>, g: &MSDGaussian) -> f64 {
    g.log_prob(obs)
}

/// State-duration model in frames.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DurationGaussian {
    pub mean: f64,
    pub variance: f64,
}

impl DurationGaussian {
    /// Builds a duration model with the mean and variance floors applied.
    pub fn new(mean: f64, variance: f64) -> Self {
        DurationGaussian {
            mean: mean.max(DURATION_MEAN_FLOOR),
            variance: variance.max(DURATION_VARIANCE_FLOOR),
        }
    }

    pub fn log_density(&self, d: f64) -> f64 {
        let diff = d - self.mean;
        -0.5 * ((TAU * self.variance).ln() + diff * diff / self.variance)
    }
}
