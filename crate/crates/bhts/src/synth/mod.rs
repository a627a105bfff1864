mod duration;
mod gv;
mod mlpg;

use crate::frontend::{build_context_labels, phoneme, ContextLabel, Frontend, UtteranceAnnotation};
use crate::model::{DurationGaussian, MSDGaussian, ModelSet, StreamGaussian, NUM_STATES};
use crate::signal::{generate_excitation, mlsa_synthesize, DeltaWindows, F0Track, Waveform};
use crate::{Error, Result};

pub use duration::{decide_voicing, determine_durations};
pub use gv::apply_gv;
pub use mlpg::solve_mlpg;

/// One position in the concatenated utterance HMM: tied distributions plus
/// where it came from.
#[derive(Debug, Clone, Copy)]
pub struct ChainState<'a> {
    pub spectrum: &'a StreamGaussian,
    pub excitation: &'a MSDGaussian,
    pub duration: &'a DurationGaussian,
    /// Index of the source label in the synthesized sequence.
    pub label: usize,
    /// State index within the phone model, 1-based.
    pub state: usize,
}

#[derive(Debug, Clone)]
pub struct StateChain<'a> {
    pub states: Vec<ChainState<'a>>,
}

/// Speaking-rate control: free per-state durations or an exact total.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    Unconstrained,
    TargetFrames(usize),
}

#[derive(Debug, Clone)]
pub struct SynthesisConfig {
    pub rate: RateMode,
    /// GV compensation weight; 0 disables it, 0.7 is a reasonable strength.
    pub gv_weight: f64,
    pub gv_step: f64,
    pub gv_iterations: usize,
    pub seed: u64,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            rate: RateMode::Unconstrained,
            gv_weight: 0.0,
            gv_step: 0.01,
            gv_iterations: 50,
            seed: 0,
        }
    }
}

/// Static trajectories from parameter generation; unvoiced frames carry no
/// log-F0 value.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectories {
    pub mcep: Vec<Vec<f64>>,
    pub log_f0: Vec<Option<f64>>,
}

pub fn labels_to_chain<'a>(
    labels: &[ContextLabel],
    models: &'a ModelSet,
) -> Result<StateChain<'a>> {
    let mut states = Vec::with_capacity(labels.len() * NUM_STATES);
    for (i, label) in labels.iter().enumerate() {
        if phoneme(&label.p3).is_none() {
            return Err(Error::Synth(format!(
                "unknown phoneme symbol '{}' in label {i}",
                label.p3
            )));
        }
        for s in 0..NUM_STATES {
            let dist = models.resolve_state(label, s)?;
            states.push(ChainState {
                spectrum: dist.spectrum,
                excitation: dist.excitation,
                duration: dist.duration,
                label: i,
                state: s + 1,
            });
        }
    }
    Ok(StateChain { states })
}

/// ML static trajectories for the expanded chain: mel-cepstra over all
/// frames, log-F0 independently per contiguous voiced segment.
pub fn generate_parameters(
    chain: &StateChain,
    durations: &[usize],
    windows: &DeltaWindows,
) -> Result<Trajectories> {
    if chain.states.is_empty() {
        return Err(Error::Synth("empty state chain".into()));
    }
    if durations.len() != chain.states.len() {
        return Err(Error::Synth("durations do not match the chain".into()));
    }
    let mut frame_state = Vec::new();
    for (k, &d) in durations.iter().enumerate() {
        frame_state.extend(std::iter::repeat_n(k, d));
    }
    if frame_state.is_empty() {
        return Err(Error::Synth("zero total duration".into()));
    }

    let spec_means: Vec<Vec<f64>> = frame_state
        .iter()
        .map(|&k| chain.states[k].spectrum.mean.clone())
        .collect();
    let spec_vars: Vec<Vec<f64>> = frame_state
        .iter()
        .map(|&k| chain.states[k].spectrum.variance.clone())
        .collect();
    let mcep = solve_mlpg(&spec_means, &spec_vars, windows)?;

    let voiced = decide_voicing(chain, durations);
    let mut log_f0 = vec![None; frame_state.len()];
    let mut t = 0;
    while t < frame_state.len() {
        if !voiced[t] {
            t += 1;
            continue;
        }
        let start = t;
        while t < frame_state.len() && voiced[t] {
            t += 1;
        }
        let seg_means: Vec<Vec<f64>> = frame_state[start..t]
            .iter()
            .map(|&k| chain.states[k].excitation.gaussian.mean.clone())
            .collect();
        let seg_vars: Vec<Vec<f64>> = frame_state[start..t]
            .iter()
            .map(|&k| chain.states[k].excitation.gaussian.variance.clone())
            .collect();
        let seg = solve_mlpg(&seg_means, &seg_vars, windows)?;
        for (offset, value) in seg.iter().enumerate() {
            log_f0[start + offset] = Some(value[0]);
        }
    }

    Ok(Trajectories { mcep, log_f0 })
}

/// Everything synthesis produces, for callers that want the trajectories
/// alongside the audio.
#[derive(Debug, Clone)]
pub struct SynthesisOutput {
    pub waveform: Waveform,
    pub mcep: Vec<Vec<f64>>,
    pub log_f0: Vec<Option<f64>>,
    pub durations: Vec<usize>,
}

pub fn synth_labels(
    labels: &[ContextLabel],
    models: &ModelSet,
    cfg: &SynthesisConfig,
) -> Result<SynthesisOutput> {
    if labels.is_empty() {
        return Err(Error::Synth("no labels to synthesize".into()));
    }
    let chain = labels_to_chain(labels, models)?;
    let durations = determine_durations(&chain, cfg)?;
    let mut traj = generate_parameters(&chain, &durations, &models.windows)?;
    if cfg.gv_weight > 0.0 {
        let gv = models.gv.as_ref().ok_or_else(|| {
            Error::Synth("GV compensation requested but the model has no GV statistics".into())
        })?;
        traj.mcep = apply_gv(&traj.mcep, gv, cfg)?;
    }
    let track = F0Track(traj.log_f0.clone());
    let excitation = generate_excitation(
        &track,
        models.config.frame_shift,
        models.config.sample_rate,
        cfg.seed,
    );
    let waveform = mlsa_synthesize(
        &traj.mcep,
        models.config.alpha,
        models.config.frame_shift,
        &excitation,
    )?;
    Ok(SynthesisOutput {
        waveform,
        mcep: traj.mcep,
        log_f0: traj.log_f0,
        durations,
    })
}

pub fn synth_utterance(
    annotation: &UtteranceAnnotation,
    models: &ModelSet,
    cfg: &SynthesisConfig,
) -> Result<Waveform> {
    let labels = build_context_labels(annotation)?;
    Ok(synth_labels(&labels, models, cfg)?.waveform)
}

/// One-call synthesis from a tagged text line.
pub fn synth_tagged_text(
    id: &str,
    line: &str,
    models: &ModelSet,
    cfg: &SynthesisConfig,
) -> Result<Waveform> {
    if line.trim().is_empty() {
        return Err(Error::Synth("empty input text".into()));
    }
    let annotation = Frontend::with_defaults().annotate(id, line)?;
    synth_utterance(&annotation, models, cfg)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::corpus::parse_annotation;
    use crate::model::{DecisionTree, Stream, TiedPools};
    use crate::signal::AnalysisConfig;

    /// Owns one set of distributions per state so tests can hand-build a
    /// StateChain without a trained ModelSet.
    pub(crate) struct ChainFixture {
        spectra: Vec<StreamGaussian>,
        excitations: Vec<MSDGaussian>,
        durations: Vec<DurationGaussian>,
    }

    impl ChainFixture {
        pub(crate) fn with_weights(mut self, weights: &[f64]) -> Self {
            assert_eq!(weights.len(), self.excitations.len());
            for (e, &w) in self.excitations.iter_mut().zip(weights) {
                *e = MSDGaussian::new(w, e.gaussian.clone());
            }
            self
        }

        pub(crate) fn chain(&self) -> StateChain<'_> {
            StateChain {
                states: (0..self.durations.len())
                    .map(|k| ChainState {
                        spectrum: &self.spectra[k],
                        excitation: &self.excitations[k],
                        duration: &self.durations[k],
                        label: k / NUM_STATES,
                        state: k % NUM_STATES + 1,
                    })
                    .collect(),
            }
        }
    }

    pub(crate) fn chain_with_durations(specs: &[(f64, f64)]) -> ChainFixture {
        ChainFixture {
            spectra: specs
                .iter()
                .enumerate()
                .map(|(k, _)| StreamGaussian::new(vec![k as f64, 0.0, 0.0], vec![1.0; 3]))
                .collect(),
            excitations: specs
                .iter()
                .map(|_| {
                    MSDGaussian::new(
                        0.9,
                        StreamGaussian::new(vec![5.0, 0.0, 0.0], vec![0.01; 3]),
                    )
                })
                .collect(),
            durations: specs
                .iter()
                .map(|&(m, v)| DurationGaussian::new(m, v))
                .collect(),
        }
    }

    const TINY_UTT: &str = "\
UTT t1 TYPE=simple-affirmative-verb
PHRASE 0.0000 0.4000 ENDTONE=L-L%
PWORD 0.0000 0.4000 POS=VF TONE=low
SYL 0.0000 0.4000 STRESS=1
PHONE 0.0000 0.2000 a
PHONE 0.2000 0.4000 m
";

    pub(crate) fn tiny_annotation() -> UtteranceAnnotation {
        parse_annotation(TINY_UTT).unwrap()
    }

    /// Single-leaf model: every (state, stream) resolves to pool entry 0.
    pub(crate) fn tiny_model_set(voiced_weight: f64) -> ModelSet {
        let config = AnalysisConfig::default();
        let windows = DeltaWindows::default();
        let mut set = ModelSet::new(config, windows);
        let dim = set.spectral_dim();
        let mut mean = vec![0.0; dim];
        mean[0] = -3.0;
        mean[1] = 0.9;
        set.tied = TiedPools {
            spectrum: vec![StreamGaussian::new(mean, vec![0.05; dim])],
            excitation: vec![MSDGaussian::new(
                voiced_weight,
                StreamGaussian::new(vec![150.0_f64.ln(), 0.0, 0.0], vec![0.01, 1e-4, 1e-4]),
            )],
            duration: vec![DurationGaussian::new(4.0, 1.0)],
        };
        for s in 0..NUM_STATES {
            for stream in Stream::ALL {
                set.trees.insert((s as u8, stream), DecisionTree::single_leaf(0));
            }
        }
        set
    }

    #[test]
    fn chain_has_five_states_per_label() {
        let set = tiny_model_set(0.9);
        let labels = build_context_labels(&tiny_annotation()).unwrap();
        let chain = labels_to_chain(&labels, &set).unwrap();
        assert_eq!(chain.states.len(), labels.len() * NUM_STATES);
        assert_eq!(chain.states[0].state, 1);
        assert_eq!(chain.states[NUM_STATES - 1].state, NUM_STATES);
        assert_eq!(chain.states[NUM_STATES].label, 1);
    }

    #[test]
    fn unknown_center_phone_is_rejected() {
        let set = tiny_model_set(0.9);
        let mut labels = build_context_labels(&tiny_annotation()).unwrap();
        labels[0].p3 = "zz".into();
        let err = labels_to_chain(&labels, &set).unwrap_err();
        assert!(err.to_string().contains("zz"), "{err}");
    }

    #[test]
    fn trajectories_cover_voiced_frames_only() {
        let fixture = chain_with_durations(&[(2.0, 1.0), (3.0, 1.0)]).with_weights(&[0.9, 0.1]);
        let chain = fixture.chain();
        let windows = DeltaWindows::default();
        let traj = generate_parameters(&chain, &[2, 3], &windows).unwrap();
        assert_eq!(traj.mcep.len(), 5);
        assert_eq!(traj.log_f0.len(), 5);
        assert!(traj.log_f0[..2].iter().all(Option::is_some));
        assert!(traj.log_f0[2..].iter().all(Option::is_none));
    }

    #[test]
    fn synthesis_length_is_total_frames_times_shift() {
        let set = tiny_model_set(0.9);
        let labels = build_context_labels(&tiny_annotation()).unwrap();
        let out = synth_labels(&labels, &set, &SynthesisConfig::default()).unwrap();
        let total: usize = out.durations.iter().sum();
        assert_eq!(total, labels.len() * NUM_STATES * 4);
        assert_eq!(out.waveform.samples.len(), total * set.config.frame_shift);
        assert_eq!(out.mcep.len(), total);
        // All states share one voiced distribution, so all frames carry F0.
        assert!(out.log_f0.iter().all(Option::is_some));
    }

    #[test]
    fn target_duration_is_hit_exactly() {
        let set = tiny_model_set(0.9);
        let labels = build_context_labels(&tiny_annotation()).unwrap();
        let cfg = SynthesisConfig {
            rate: RateMode::TargetFrames(57),
            ..SynthesisConfig::default()
        };
        let out = synth_labels(&labels, &set, &cfg).unwrap();
        assert_eq!(out.durations.iter().sum::<usize>(), 57);
        assert_eq!(out.waveform.samples.len(), 57 * set.config.frame_shift);
    }

    #[test]
    fn gv_needs_model_statistics() {
        let set = tiny_model_set(0.9);
        let labels = build_context_labels(&tiny_annotation()).unwrap();
        let cfg = SynthesisConfig {
            gv_weight: 0.7,
            ..SynthesisConfig::default()
        };
        let err = synth_labels(&labels, &set, &cfg).unwrap_err();
        assert!(err.to_string().contains("GV"), "{err}");
    }
}
