use std::collections::HashSet;
use std::ops::Range;
use std::path::Path;
use std::sync::OnceLock;

use super::phoneme::{is_vowel, phoneme, PhonemeClass};
use crate::{Error, Result};

const DEFAULT_ONSETS: &str = include_str!("../../data/onsets_default.txt");

/// The set of consonant sequences allowed to open a syllable.
#[derive(Debug, Clone)]
pub struct OnsetList {
    onsets: HashSet<Vec<String>>,
    max_len: usize,
}

impl OnsetList {
    pub fn parse(text: &str) -> Result<Self> {
        let mut onsets = HashSet::new();
        let mut max_len = 0;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let seq: Vec<String> = line.split_whitespace().map(str::to_string).collect();
            for sym in &seq {
                let ok = phoneme(sym).is_some_and(|p| p.class == PhonemeClass::Consonant);
                if !ok {
                    return Err(Error::Frontend(format!(
                        "onset list line {}: {sym:?} is not a consonant",
                        i + 1
                    )));
                }
            }
            max_len = max_len.max(seq.len());
            onsets.insert(seq);
        }
        Ok(OnsetList { onsets, max_len })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn default_list() -> &'static OnsetList {
        static LIST: OnceLock<OnsetList> = OnceLock::new();
        LIST.get_or_init(|| OnsetList::parse(DEFAULT_ONSETS).expect("shipped onset list must parse"))
    }

    fn is_onset(&self, seq: &[String]) -> bool {
        self.onsets.contains(seq)
    }
}

/// Groups a phoneme sequence into syllables: every vowel nucleates one
/// syllable and intervocalic consonants attach by onset maximization.
pub fn syllabify(phonemes: &[String], onsets: &OnsetList) -> Result<Vec<Range<usize>>> {
    for sym in phonemes {
        if phoneme(sym).is_none() {
            return Err(Error::Frontend(format!("unknown phoneme {sym:?}")));
        }
        if sym == "sil" {
            return Err(Error::Frontend("silence inside a word".into()));
        }
    }
    let nuclei: Vec<usize> = phonemes
        .iter()
        .enumerate()
        .filter(|(_, s)| is_vowel(s))
        .map(|(i, _)| i)
        .collect();
    if nuclei.is_empty() {
        return Err(Error::Frontend("word has no vowel".into()));
    }
    let mut boundaries = vec![0];
    for pair in nuclei.windows(2) {
        let (prev, next) = (pair[0], pair[1]);
        // Consonants strictly between the nuclei: give the next syllable the
        // longest legal onset, at most the whole cluster.
        let cluster = &phonemes[prev + 1..next];
        let mut onset_len = cluster.len().min(onsets.max_len);
        while onset_len > 0 && !onsets.is_onset(&cluster[cluster.len() - onset_len..]) {
            onset_len -= 1;
        }
        boundaries.push(next - onset_len);
    }
    boundaries.push(phonemes.len());
    Ok(boundaries.windows(2).map(|w| w[0]..w[1]).collect())
}
