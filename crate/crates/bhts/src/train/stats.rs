use crate::model::{
    DurationGaussian, MSDGaussian, StreamGaussian, DURATION_MEAN_FLOOR, DURATION_VARIANCE_FLOOR,
};

/// Weighted diagonal-Gaussian sufficient statistics: Σγ, Σγ·x, Σγ·x².
#[derive(Debug, Clone, PartialEq)]
pub struct GaussStats {
    pub occ: f64,
    pub sum: Vec<f64>,
    pub sq: Vec<f64>,
}

impl GaussStats {
    pub fn zeros(dim: usize) -> Self {
        GaussStats {
            occ: 0.0,
            sum: vec![0.0; dim],
            sq: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.sum.len()
    }

    pub fn add(&mut self, weight: f64, x: &[f64]) {
        self.occ += weight;
        for (i, &v) in x.iter().enumerate() {
            self.sum[i] += weight * v;
            self.sq[i] += weight * v * v;
        }
    }

    pub fn merge(&mut self, other: &GaussStats) {
        self.occ += other.occ;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sq[i] += other.sq[i];
        }
    }

    /// Mean and variance with the variance floored; occ must be positive.
    pub fn mean_variance(&self, floor: f64) -> (Vec<f64>, Vec<f64>) {
        let mean: Vec<f64> = self.sum.iter().map(|s| s / self.occ).collect();
        let variance: Vec<f64> = self
            .sq
            .iter()
            .zip(&mean)
            .map(|(q, m)| (q / self.occ - m * m).max(floor))
            .collect();
        (mean, variance)
    }

    pub fn to_gaussian(&self, floor: f64) -> StreamGaussian {
        let (mean, variance) = self.mean_variance(floor);
        StreamGaussian::new(mean, variance)
    }
}

/// MSD stream statistics: Gaussian stats over voiced frames plus the total
/// occupancy (voiced + unvoiced) that normalizes the voiced weight.
#[derive(Debug, Clone, PartialEq)]
pub struct MsdStats {
    pub voiced: GaussStats,
    pub total_occ: f64,
}

impl MsdStats {
    pub fn zeros(dim: usize) -> Self {
        MsdStats {
            voiced: GaussStats::zeros(dim),
            total_occ: 0.0,
        }
    }

    pub fn add(&mut self, weight: f64, x: Option<&[f64]>) {
        self.total_occ += weight;
        if let Some(x) = x {
            self.voiced.add(weight, x);
        }
    }

    pub fn merge(&mut self, other: &MsdStats) {
        self.total_occ += other.total_occ;
        self.voiced.merge(&other.voiced);
    }

    pub fn to_msd(&self, floor: f64, fallback: &MSDGaussian) -> MSDGaussian {
        let weight = if self.total_occ > 0.0 {
            self.voiced.occ / self.total_occ
        } else {
            return fallback.clone();
        };
        let gaussian = if self.voiced.occ > 0.0 {
            self.voiced.to_gaussian(floor)
        } else {
            fallback.gaussian.clone()
        };
        MSDGaussian::new(weight.clamp(0.0, 1.0), gaussian)
    }
}

/// Everything one EM pass accumulates for one state of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct StateStats {
    pub spectrum: GaussStats,
    pub excitation: MsdStats,
    pub self_num: f64,
    pub self_den: f64,
}

impl StateStats {
    pub fn zeros(spectral_dim: usize) -> Self {
        StateStats {
            spectrum: GaussStats::zeros(spectral_dim),
            excitation: MsdStats::zeros(3),
            self_num: 0.0,
            self_den: 0.0,
        }
    }

    pub fn merge(&mut self, other: &StateStats) {
        self.spectrum.merge(&other.spectrum);
        self.excitation.merge(&other.excitation);
        self.self_num += other.self_num;
        self.self_den += other.self_den;
    }
}

/// Duration Gaussian from run-length stats; the stated defaults cover states
/// Viterbi never visited.
pub fn duration_from_stats(stats: &GaussStats) -> DurationGaussian {
    if stats.occ <= 0.0 {
        return DurationGaussian::new(DURATION_MEAN_FLOOR, DURATION_VARIANCE_FLOOR);
    }
    let mean = stats.sum[0] / stats.occ;
    let variance = (stats.sq[0] / stats.occ - mean * mean).max(DURATION_VARIANCE_FLOOR);
    DurationGaussian::new(mean, variance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weighted_moments_match_direct_computation() {
        let mut s = GaussStats::zeros(2);
        s.add(1.0, &[1.0, 10.0]);
        s.add(3.0, &[5.0, -2.0]);
        let (mean, var) = s.mean_variance(1e-6);
        assert!((mean[0] - 4.0).abs() < 1e-12);
        assert!((mean[1] - 1.0).abs() < 1e-12);
        // E[x^2] - m^2 with weights (1,3): dim0 = (1+75)/4 - 16 = 3,
        // dim1 = (100+12)/4 - 1 = 27.
        assert!((var[0] - 3.0).abs() < 1e-12);
        assert!((var[1] - 27.0).abs() < 1e-12);
    }

    #[test]
    fn merge_equals_joint_accumulation() {
        let mut a = GaussStats::zeros(1);
        let mut b = GaussStats::zeros(1);
        let mut joint = GaussStats::zeros(1);
        for (w, x) in [(0.5, 2.0), (1.5, -1.0), (2.0, 4.0)] {
            joint.add(w, &[x]);
            if x > 0.0 {
                a.add(w, &[x]);
            } else {
                b.add(w, &[x]);
            }
        }
        a.merge(&b);
        assert_eq!(a, joint);
    }

    #[test]
    fn duration_examples_from_run_lengths() {
        let mut runs = GaussStats::zeros(1);
        runs.add(1.0, &[3.0]);
        runs.add(1.0, &[5.0]);
        let d = duration_from_stats(&runs);
        assert_eq!((d.mean, d.variance), (4.0, 1.0));

        let mut single = GaussStats::zeros(1);
        single.add(1.0, &[4.0]);
        let d = duration_from_stats(&single);
        assert_eq!((d.mean, d.variance), (4.0, 0.25));

        let d = duration_from_stats(&GaussStats::zeros(1));
        assert_eq!((d.mean, d.variance), (1.0, 0.25));
    }

    #[test]
    fn msd_weight_is_voiced_share() {
        let mut s = MsdStats::zeros(1);
        s.add(2.0, Some(&[1.0]));
        s.add(3.0, None);
        let fallback = MSDGaussian::new(0.5, StreamGaussian::new(vec![0.0], vec![1.0]));
        let g = s.to_msd(1e-6, &fallback);
        assert!((g.voiced_weight - 0.4).abs() < 1e-12);
        assert!((g.gaussian.mean[0] - 1.0).abs() < 1e-12);
    }
}
