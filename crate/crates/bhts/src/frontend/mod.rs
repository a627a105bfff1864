pub mod annotation;
pub mod g2p;
pub mod label;
pub mod phoneme;
pub mod prosody;
pub mod syllabify;
pub mod text;

pub use annotation::{
    EndTone, PhoneTiming, PhraseAnnotation, PosTag, ProsodicWord, SentenceType, Syllable, Tone,
    UtteranceAnnotation, WordToken,
};
pub use g2p::{g2p, G2pRuleTable};
pub use label::{build_context_labels, format_label, parse_label, ContextLabel};
pub use phoneme::{is_silence, is_vowel, phoneme, phoneme_inventory, Phoneme, PhonemeClass};
pub use prosody::{assign_stress, assign_tones, mark_prosodic_words};
pub use syllabify::{syllabify, OnsetList};
pub use text::{parse_tagged_line, TaggedSentence, TaggedWord};

use crate::{Error, Result};

/// Text-to-annotation pipeline: tagged text in, fully annotated utterances
/// and full-context labels out.
#[derive(Debug, Clone)]
pub struct Frontend {
    rules: G2pRuleTable,
    onsets: OnsetList,
}

impl Frontend {
    pub fn new(rules: G2pRuleTable, onsets: OnsetList) -> Self {
        Frontend { rules, onsets }
    }

    pub fn with_defaults() -> Self {
        Frontend {
            rules: G2pRuleTable::default_table().clone(),
            onsets: OnsetList::default_list().clone(),
        }
    }

    fn word_token(&self, word: &TaggedWord) -> Result<WordToken> {
        let phonemes = g2p(&word.orthography, &self.rules)?;
        let spans = syllabify(&phonemes, &self.onsets)?;
        Ok(WordToken {
            orthography: word.orthography.clone(),
            pos: word.pos,
            hyphenated: word.hyphenated(),
            phonemes,
            syllables: spans
                .into_iter()
                .map(|span| Syllable {
                    phonemes: span,
                    stressed: false,
                })
                .collect(),
        })
    }

    /// Runs the whole pipeline on one tagged line: G2P, syllabification,
    /// prosodic-word grouping, stress, and tones. The utterance is bracketed
    /// by leading and trailing silence.
    pub fn annotate(&self, id: &str, line: &str) -> Result<UtteranceAnnotation> {
        let sentence = parse_tagged_line(line)?;
        let mut focus_word: Option<(usize, usize)> = None;
        for (pi, phrase) in sentence.phrases.iter().enumerate() {
            for (wi, word) in phrase.iter().enumerate() {
                if word.focused {
                    if focus_word.is_some() {
                        return Err(Error::Frontend("more than one focused word".into()));
                    }
                    focus_word = Some((pi, wi));
                }
            }
        }

        let token_phrases: Vec<Vec<WordToken>> = sentence
            .phrases
            .iter()
            .map(|phrase| phrase.iter().map(|w| self.word_token(w)).collect())
            .collect::<Result<_>>()?;
        let mut pw_phrases = mark_prosodic_words(&token_phrases);

        let mut focus_pw = None;
        let mut gpw = 0;
        for (pi, phrase) in pw_phrases.iter_mut().enumerate() {
            let mut word_base = 0;
            for pw in phrase.iter_mut() {
                pw.stress_syllable = assign_stress(pw);
                let mut local_syl = 0;
                for word in &mut pw.words {
                    for syl in &mut word.syllables {
                        syl.stressed = local_syl == pw.stress_syllable;
                        local_syl += 1;
                    }
                }
                if let Some((fp, fw)) = focus_word {
                    if fp == pi && (word_base..word_base + pw.words.len()).contains(&fw) {
                        focus_pw = Some(gpw);
                    }
                }
                word_base += pw.words.len();
                gpw += 1;
            }
        }

        let total_pws: usize = pw_phrases.iter().map(|p| p.len()).sum();
        let (tones, endtone) = assign_tones(sentence.sentence_type, total_pws, focus_pw)?;
        let mut tone_iter = tones.into_iter();
        let phrases: Vec<PhraseAnnotation> = pw_phrases
            .into_iter()
            .map(|mut pws| {
                for pw in &mut pws {
                    pw.tone = tone_iter.next().expect("one tone per prosodic word");
                }
                PhraseAnnotation {
                    prosodic_words: pws,
                    endtone,
                }
            })
            .collect();

        let utt = UtteranceAnnotation {
            id: id.to_string(),
            sentence_type: sentence.sentence_type,
            phrases,
            initial_silence: true,
            final_silence: true,
            alignments: None,
        };
        utt.validate()?;
        Ok(utt)
    }

    pub fn labels(&self, utt: &UtteranceAnnotation) -> Result<Vec<ContextLabel>> {
        build_context_labels(utt)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotates_declarative_line() {
        let fe = Frontend::with_defaults();
        let utt = fe
            .annotate("u1", "type=simple-affirmative-verb কলম/NN | ভালো/ADJ আছে/VF")
            .unwrap();
        assert_eq!(utt.phrases.len(), 2);
        assert!(utt.initial_silence && utt.final_silence);
        // ADJ(2syl)+VF joins under the content-word/verb rule.
        assert_eq!(utt.phrases[1].prosodic_words.len(), 1);
        assert_eq!(utt.phrases[1].prosodic_words[0].words.len(), 2);
        let tones: Vec<Tone> = utt
            .phrases
            .iter()
            .flat_map(|p| p.prosodic_words.iter().map(|pw| pw.tone))
            .collect();
        assert_eq!(tones, vec![Tone::Rising, Tone::Low]);
        assert_eq!(utt.phrases[0].endtone, EndTone::LowLow);

        let labels = fe.labels(&utt).unwrap();
        assert_eq!(labels.len(), utt.phone_sequence().len());
        assert!(labels[0].is_silence());
        assert!(labels.last().unwrap().is_silence());
        for l in &labels {
            assert_eq!(parse_label(&format_label(l)).unwrap(), *l);
        }
    }

    #[test]
    fn yesno_line_rises_everywhere() {
        let fe = Frontend::with_defaults();
        let utt = fe
            .annotate("u2", "type=yesno-question সে/PRON গেল/VF ?/PUNC")
            .unwrap();
        assert_eq!(utt.phrases[0].endtone, EndTone::HighHigh);
        for pw in &utt.phrases[0].prosodic_words {
            assert_eq!(pw.tone, Tone::Rising);
        }
    }

    #[test]
    fn focus_marks_following_words_low() {
        let fe = Frontend::with_defaults();
        let utt = fe
            .annotate("u3", "type=simple-affirmative-verb সে/PRON *কলম/NN দিল/VF")
            .unwrap();
        let tones: Vec<Tone> = utt.phrases[0]
            .prosodic_words
            .iter()
            .map(|pw| pw.tone)
            .collect();
        // NN+VF join by rule 8, and the focused NN sits in that group.
        assert_eq!(tones, vec![Tone::Rising, Tone::Rising]);

        let utt = fe
            .annotate("u4", "type=simple-affirmative-verb *সে/PRON কলম/NN দিল/VF")
            .unwrap();
        let tones: Vec<Tone> = utt.phrases[0]
            .prosodic_words
            .iter()
            .map(|pw| pw.tone)
            .collect();
        assert_eq!(tones, vec![Tone::Rising, Tone::Low]);
    }

    #[test]
    fn hyphenated_word_passes_g2p() {
        let fe = Frontend::with_defaults();
        let utt = fe
            .annotate("u5", "type=exclamatory ঘর-বাড়ি/NN")
            .unwrap();
        let pw = &utt.phrases[0].prosodic_words[0];
        assert!(pw.words[0].hyphenated);
        assert!(pw.words[0].phonemes.iter().all(|p| phoneme(p).is_some()));
    }

    #[test]
    fn double_focus_is_rejected() {
        let fe = Frontend::with_defaults();
        assert!(fe
            .annotate("u6", "type=simple-affirmative-noverb *সে/PRON *কলম/NN")
            .is_err());
    }

    #[test]
    fn stress_lands_on_first_syllable_of_group() {
        let fe = Frontend::with_defaults();
        let utt = fe
            .annotate("u7", "type=simple-affirmative-verb কলম/NN দিল/VF")
            .unwrap();
        let pw = &utt.phrases[0].prosodic_words[0];
        assert_eq!(pw.stress_syllable, 0);
        assert!(pw.words[0].syllables[0].stressed);
        assert!(pw.words[0].syllables[1..].iter().all(|s| !s.stressed));
        assert!(pw.words[1].syllables.iter().all(|s| !s.stressed));
    }
}
