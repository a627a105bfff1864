use std::collections::BTreeMap;

use super::fb::forward_backward;
use super::stats::StateStats;
use super::TrainingUtterance;
use crate::frontend::{format_label, ContextLabel};
use crate::model::{
    DurationGaussian, HmmState, MSDGaussian, ModelSet, PhoneHMM, StreamGaussian, NUM_STATES,
    SELF_LOOP_MAX, SELF_LOOP_MIN,
};
use crate::par::ordered_map;
use crate::signal::{AnalysisConfig, DeltaWindows};
use crate::{Error, Result};

/// Which table a training pass reads and writes, and how utterance labels
/// map to model keys.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKey {
    Monophone,
    FullContext,
}

impl ModelKey {
    pub fn key_of(self, label: &ContextLabel) -> String {
        match self {
            ModelKey::Monophone => label.p3.clone(),
            ModelKey::FullContext => format_label(label),
        }
    }
}

pub fn flat_start(
    utterances: &[TrainingUtterance],
    config: &AnalysisConfig,
    windows: &DeltaWindows,
) -> Result<ModelSet> {
    if utterances.is_empty() {
        return Err(Error::Train("flat start requires a non-empty corpus".into()));
    }
    let spectral_dim = utterances[0].obs.spectral.first().map_or(0, Vec::len);
    if spectral_dim == 0 {
        return Err(Error::Train("flat start requires non-empty observations".into()));
    }

    let mut stats = StateStats::zeros(spectral_dim);
    let mut total_frames = 0usize;
    let mut total_phones = 0usize;
    for utt in utterances {
        total_phones += utt.labels.len();
        total_frames += utt.obs.spectral.len();
        for (spec, exc) in utt.obs.spectral.iter().zip(&utt.obs.excitation) {
            stats.spectrum.add(1.0, spec);
            stats.excitation.add(1.0, exc.as_ref().map(|a| a.as_slice()));
        }
    }
    if total_frames == 0 || total_phones == 0 {
        return Err(Error::Train("flat start requires non-empty observations".into()));
    }

    let spectrum = stats.spectrum.to_gaussian(crate::model::VARIANCE_FLOOR);
    let fallback = MSDGaussian::new(0.5, StreamGaussian::new(vec![0.0; 3], vec![1.0; 3]));
    let excitation = stats.excitation.to_msd(crate::model::VARIANCE_FLOOR, &fallback);
    let duration_mean = total_frames as f64 / (NUM_STATES as f64 * total_phones as f64);
    let duration = DurationGaussian::new(duration_mean, duration_mean);

    let mut set = ModelSet::new(config.clone(), windows.clone());
    for ph in crate::frontend::phoneme_inventory() {
        let hmm = PhoneHMM {
            states: (0..NUM_STATES)
                .map(|_| HmmState {
                    spectrum: spectrum.clone(),
                    excitation: excitation.clone(),
                    self_loop: 0.5,
                })
                .collect(),
            durations: vec![duration.clone(); NUM_STATES],
        };
        set.monophones.insert(ph.symbol.to_string(), hmm);
    }
    Ok(set)
}

/// Forward-backward statistics for one utterance against the given table.
fn accumulate_utterance(
    models: &BTreeMap<String, PhoneHMM>,
    mode: ModelKey,
    utt: &TrainingUtterance,
    spectral_dim: usize,
) -> Result<(BTreeMap<String, Vec<StateStats>>, f64)> {
    let keys: Vec<String> = utt.labels.iter().map(|l| mode.key_of(l)).collect();
    let mut chain: Vec<&HmmState> = Vec::with_capacity(keys.len() * NUM_STATES);
    for key in &keys {
        let hmm = models.get(key).ok_or_else(|| {
            Error::Train(format!("utterance {}: no model for '{key}'", utt.id))
        })?;
        chain.extend(hmm.states.iter());
    }
    let (occ, ll) = forward_backward(&utt.obs, &chain)
        .map_err(|e| Error::Train(format!("utterance {}: {e}", utt.id)))?;

    let mut stats: BTreeMap<String, Vec<StateStats>> = BTreeMap::new();
    for (k, key) in keys.iter().enumerate() {
        let entry = stats
            .entry(key.clone())
            .or_insert_with(|| (0..NUM_STATES).map(|_| StateStats::zeros(spectral_dim)).collect());
        for s in 0..NUM_STATES {
            let j = k * NUM_STATES + s;
            let st = &mut entry[s];
            for (t, (spec, exc)) in utt.obs.spectral.iter().zip(&utt.obs.excitation).enumerate() {
                let g = occ.gamma[t][j];
                if g > 0.0 {
                    st.spectrum.add(g, spec);
                    st.excitation.add(g, exc.as_ref().map(|a| a.as_slice()));
                }
            }
            st.self_num += occ.xi_self[j];
            st.self_den += occ.xi_total[j];
        }
    }
    Ok((stats, ll))
}

/// Parallel E-step over the corpus: merged per-model statistics and the
/// total log-likelihood under the given models.
pub fn accumulate_corpus(
    models: &BTreeMap<String, PhoneHMM>,
    mode: ModelKey,
    utterances: &[TrainingUtterance],
) -> Result<(BTreeMap<String, Vec<StateStats>>, f64)> {
    if utterances.is_empty() {
        return Err(Error::Train("EM requires a non-empty corpus".into()));
    }
    let spectral_dim = utterances[0].obs.spectral.first().map_or(0, Vec::len);
    let per_utt = ordered_map(utterances, |utt| {
        accumulate_utterance(models, mode, utt, spectral_dim)
    });

    let mut merged: BTreeMap<String, Vec<StateStats>> = BTreeMap::new();
    let mut total_ll = 0.0;
    for result in per_utt {
        let (stats, ll) = result?;
        total_ll += ll;
        for (key, states) in stats {
            match merged.get_mut(&key) {
                Some(acc) => {
                    for (a, b) in acc.iter_mut().zip(&states) {
                        a.merge(b);
                    }
                }
                None => {
                    merged.insert(key, states);
                }
            }
        }
    }
    Ok((merged, total_ll))
}

/// One embedded EM iteration over the corpus. Returns the corpus
/// log-likelihood under the models as passed in (before the update).
pub fn reestimate(
    models: &mut BTreeMap<String, PhoneHMM>,
    mode: ModelKey,
    utterances: &[TrainingUtterance],
    variance_floor: f64,
) -> Result<f64> {
    let (merged, total_ll) = accumulate_corpus(models, mode, utterances)?;
    for (key, states) in &merged {
        let hmm = models.get_mut(key).expect("accumulated key exists");
        for (state, st) in hmm.states.iter_mut().zip(states) {
            if st.spectrum.occ > 0.0 {
                state.spectrum = st.spectrum.to_gaussian(variance_floor);
            }
            if st.excitation.total_occ > 0.0 {
                state.excitation = st.excitation.to_msd(variance_floor, &state.excitation);
            }
            if st.self_den > 0.0 {
                state.self_loop = (st.self_num / st.self_den).clamp(SELF_LOOP_MIN, SELF_LOOP_MAX);
            }
        }
    }
    Ok(total_ll)
}

/// Corpus log-likelihood without updating anything.
pub fn score_corpus(
    models: &BTreeMap<String, PhoneHMM>,
    mode: ModelKey,
    utterances: &[TrainingUtterance],
) -> Result<f64> {
    let spectral_dim = utterances
        .first()
        .and_then(|u| u.obs.spectral.first())
        .map_or(0, Vec::len);
    let per_utt = ordered_map(utterances, |utt| {
        accumulate_utterance(models, mode, utt, spectral_dim).map(|(_, ll)| ll)
    });
    let mut total = 0.0;
    for ll in per_utt {
        total += ll?;
    }
    Ok(total)
}

pub fn clone_to_fullcontext(
    monophones: &BTreeMap<String, PhoneHMM>,
    labels: &[&ContextLabel],
) -> Result<BTreeMap<String, PhoneHMM>> {
    let mut table = BTreeMap::new();
    for label in labels {
        let key = format_label(label);
        if table.contains_key(&key) {
            continue;
        }
        let source = monophones.get(&label.p3).ok_or_else(|| {
            Error::Train(format!("no monophone for center phone '{}'", label.p3))
        })?;
        table.insert(key, source.clone());
    }
    Ok(table)
}
