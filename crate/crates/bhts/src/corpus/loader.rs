use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::utt::parse_annotation;
use crate::frontend::annotation::UtteranceAnnotation;
use crate::par::ordered_map;
use crate::signal::{read_wav, AnalysisConfig};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub id: String,
    pub wav_path: PathBuf,
    pub annotation: UtteranceAnnotation,
}

fn ids_with_extension(dir: &Path, ext: &str) -> Result<BTreeSet<String>> {
    let mut ids = BTreeSet::new();
    let entries = fs::read_dir(dir)
        .map_err(|e| Error::Corpus(format!("cannot read {}: {e}", dir.display())))?;
    for entry in entries {
        let path = entry
            .map_err(|e| Error::Corpus(format!("cannot read {}: {e}", dir.display())))?
            .path();
        if path.extension().and_then(|s| s.to_str()) == Some(ext) {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                ids.insert(stem.to_string());
            }
        }
    }
    Ok(ids)
}

/// Loads every `utt/<id>.utt` + `wav/<id>.wav` pair under `root`, sorted by id.
pub fn load_corpus(root: &Path, config: &AnalysisConfig) -> Result<Vec<CorpusEntry>> {
    let utt_dir = root.join("utt");
    let wav_dir = root.join("wav");
    let utt_ids = ids_with_extension(&utt_dir, "utt")?;
    let wav_ids = ids_with_extension(&wav_dir, "wav")?;
    if let Some(id) = utt_ids.difference(&wav_ids).next() {
        return Err(Error::Corpus(format!("utterance {id}: missing WAV file")));
    }
    if let Some(id) = wav_ids.difference(&utt_ids).next() {
        return Err(Error::Corpus(format!("utterance {id}: missing annotation")));
    }
    if utt_ids.is_empty() {
        return Err(Error::Corpus(format!("no utterances under {}", root.display())));
    }

    let ids: Vec<String> = utt_ids.into_iter().collect();
    let entries = ordered_map(&ids, |id| -> Result<CorpusEntry> {
        let utt_path = utt_dir.join(format!("{id}.utt"));
        let wav_path = wav_dir.join(format!("{id}.wav"));
        let text = fs::read_to_string(&utt_path)
            .map_err(|e| Error::Corpus(format!("cannot read {}: {e}", utt_path.display())))?;
        let annotation = parse_annotation(&text)
            .map_err(|e| Error::Corpus(format!("{}: {e}", utt_path.display())))?;
        if annotation.id != *id {
            return Err(Error::Corpus(format!(
                "{}: header id {:?} does not match filename",
                utt_path.display(),
                annotation.id
            )));
        }
        let waveform = read_wav(&wav_path)?;
        if waveform.sample_rate != config.sample_rate {
            return Err(Error::Corpus(format!(
                "utterance {id}: sample-rate mismatch ({} Hz, expected {})",
                waveform.sample_rate, config.sample_rate
            )));
        }
        let duration = waveform.duration_secs();
        let last_end = annotation
            .alignments
            .as_ref()
            .and_then(|t| t.last())
            .map(|t| t.end)
            .unwrap_or(0.0);
        if last_end > duration + 1e-3 {
            return Err(Error::Corpus(format!(
                "utterance {id}: annotation ends at {last_end:.4} s but audio lasts {duration:.4} s"
            )));
        }
        Ok(CorpusEntry {
            id: id.clone(),
            wav_path,
            annotation,
        })
    });
    entries.into_iter().collect()
}
