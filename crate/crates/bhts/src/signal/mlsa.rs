use super::mcep::mc2b;
use super::Waveform;
use crate::{Error, Result};

const DEFAULT_PADE_ORDER: usize = 5;

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Coefficients of the order-`l` Pade approximation of `exp`,
/// `A_k = (2l-k)! l! / ((2l)! k! (l-k)!)` for `k = 0..=l`.
pub fn pade_coefficients(l: usize) -> Result<Vec<f64>> {
    if !(1..=8).contains(&l) {
        return Err(Error::Signal(format!("pade order {l} outside 1..=8")));
    }
    Ok((0..=l)
        .map(|k| {
            let num = factorial(2 * l - k) * factorial(l);
            let den = factorial(2 * l) * factorial(k) * factorial(l - k);
            num as f64 / den as f64
        })
        .collect())
}

/// One all-pass chain realizing `F(z) = sum_m b[m] Phi_m(z)` over the tap
/// range it was built with. Inputs arrive already delayed by one sample, so
/// the filter has no delay-free path and can sit inside the Pade feedback
/// loop.
#[derive(Debug, Clone)]
struct BasicFilter {
    alpha: f64,
    first_tap_only: bool,
    s: Vec<f64>,
}

impl BasicFilter {
    fn new(order: usize, alpha: f64, first_tap_only: bool) -> Self {
        BasicFilter {
            alpha,
            first_tap_only,
            s: vec![0.0; order + 1],
        }
    }

    fn step(&mut self, delayed_input: f64, b: &[f64]) -> f64 {
        let a = self.alpha;
        let aa = 1.0 - a * a;
        let mut prev_old = self.s[1];
        self.s[1] = aa * delayed_input + a * self.s[1];
        if self.first_tap_only {
            return b[1] * self.s[1];
        }
        let mut acc = 0.0;
        for m in 2..self.s.len() {
            let old = self.s[m];
            self.s[m] = a * old + prev_old - a * self.s[m - 1];
            acc += b[m] * self.s[m];
            prev_old = old;
        }
        acc
    }
}

/// Feedback realization of the rational Pade approximation `R_l(F)` of
/// `exp(F)` around one basic filter.
#[derive(Debug, Clone)]
struct PadeStage {
    pade: Vec<f64>,
    sections: Vec<BasicFilter>,
    pt: Vec<f64>,
}

impl PadeStage {
    fn new(order: usize, alpha: f64, pade: &[f64], first_tap_only: bool) -> Self {
        let l = pade.len() - 1;
        PadeStage {
            pade: pade.to_vec(),
            sections: (0..l)
                .map(|_| BasicFilter::new(order, alpha, first_tap_only))
                .collect(),
            pt: vec![0.0; l + 1],
        }
    }

    fn step(&mut self, input: f64, b: &[f64]) -> f64 {
        let l = self.sections.len();
        let mut x = input;
        let mut out = 0.0;
        for i in (1..=l).rev() {
            let g = self.sections[i - 1].step(self.pt[i - 1], b);
            let v = self.pade[i] * g;
            if i % 2 == 1 {
                x += v;
            } else {
                x -= v;
            }
            out += v;
            self.pt[i] = g;
        }
        self.pt[0] = x;
        out + x
    }
}

/// Mel log spectrum approximation filter: `H(z) = exp sum_m b[m] Phi_m(z)`,
/// split as `exp(b[0]) * R(b[1] Phi_1) * R(sum_{m>=2} b[m] Phi_m)`.
#[derive(Debug, Clone)]
pub struct MlsaFilter {
    order: usize,
    stage1: PadeStage,
    stage2: PadeStage,
}

impl MlsaFilter {
    pub fn new(order: usize, alpha: f64) -> Result<Self> {
        Self::with_pade_order(order, alpha, DEFAULT_PADE_ORDER)
    }

    pub fn with_pade_order(order: usize, alpha: f64, pade_order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Signal("mlsa order must be >= 1".into()));
        }
        if !(alpha.abs() < 1.0) {
            return Err(Error::Signal(format!("|alpha| must be < 1, got {alpha}")));
        }
        let pade = pade_coefficients(pade_order)?;
        Ok(MlsaFilter {
            order,
            stage1: PadeStage::new(1, alpha, &pade, true),
            stage2: PadeStage::new(order, alpha, &pade, false),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Filters one sample with MLSA coefficients `b` (length `order + 1`).
    pub fn step(&mut self, sample: f64, b: &[f64]) -> f64 {
        debug_assert_eq!(b.len(), self.order + 1);
        let scaled = sample * b[0].exp();
        let mid = self.stage1.step(scaled, b);
        self.stage2.step(mid, b)
    }
}

/// Renders a waveform by exciting the MLSA filter with `excitation`,
/// switching mel-cepstral coefficients at frame boundaries.
pub fn mlsa_synthesize(
    mcep_frames: &[Vec<f64>],
    alpha: f64,
    frame_shift: usize,
    excitation: &Waveform,
) -> Result<Waveform> {
    if mcep_frames.is_empty() {
        return Err(Error::Signal("no frames to synthesize".into()));
    }
    let order = mcep_frames[0].len().saturating_sub(1);
    if order == 0 || mcep_frames.iter().any(|f| f.len() != order + 1) {
        return Err(Error::Signal("inconsistent mel-cepstrum dimensions".into()));
    }
    let expect = mcep_frames.len() * frame_shift;
    if excitation.samples.len() != expect {
        return Err(Error::Signal(format!(
            "excitation length {} does not match {} frames * shift {}",
            excitation.samples.len(),
            mcep_frames.len(),
            frame_shift
        )));
    }
    let b_frames: Vec<Vec<f64>> = mcep_frames.iter().map(|c| mc2b(c, alpha)).collect();
    let mut filter = MlsaFilter::new(order, alpha)?;
    let mut samples = Vec::with_capacity(expect);
    for (b, chunk) in b_frames.iter().zip(excitation.samples.chunks(frame_shift)) {
        for &x in chunk {
            samples.push(filter.step(x, b));
        }
    }
    Ok(Waveform::new(samples, excitation.sample_rate))
}
