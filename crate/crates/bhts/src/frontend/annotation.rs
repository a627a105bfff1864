use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use crate::{Error, Result};

macro_rules! string_enum {
    ($(#[$doc:meta])* $name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        $(#[$doc])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(&self) -> &'static str {
                match self {
                    $($name::$variant => $text),+
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }

        impl FromStr for $name {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self> {
                match s {
                    $($text => Ok($name::$variant)),+,
                    other => Err(Error::Frontend(format!(
                        concat!("unknown ", stringify!($name), " {:?}"),
                        other
                    ))),
                }
            }
        }
    };
}

string_enum! {
    /// Part-of-speech tags carried by the pre-tagged input.
    PosTag {
        Nn => "NN",
        Nnp => "NNP",
        Vf => "VF",
        Vaux => "VAUX",
        Vn => "VN",
        Adj => "ADJ",
        Adv => "ADV",
        Pp => "PP",
        Prt => "PRT",
        Pron => "PRON",
        Conj => "CONJ",
        Num => "NUM",
        Punc => "PUNC",
    }
}

impl PosTag {
    pub fn is_content(&self) -> bool {
        matches!(
            self,
            PosTag::Nn | PosTag::Nnp | PosTag::Vf | PosTag::Vaux | PosTag::Vn | PosTag::Adj | PosTag::Adv
        )
    }
}

string_enum! {
    /// The twelve sentence categories of the training corpus.
    SentenceType {
        ComplexAffirmative => "complex-affirmative",
        ComplexNegative => "complex-negative",
        SimpleAffirmativeVerb => "simple-affirmative-verb",
        SimpleAffirmativeNoverb => "simple-affirmative-noverb",
        SimpleNegative => "simple-negative",
        CompoundAffirmative => "compound-affirmative",
        CompoundNegative => "compound-negative",
        Exclamatory => "exclamatory",
        Imperative => "imperative",
        Passive => "passive",
        WhQuestion => "wh-question",
        YesnoQuestion => "yesno-question",
    }
}

string_enum! {
    /// Prosodic-word tone.
    Tone {
        Rising => "rising",
        Low => "low",
    }
}

string_enum! {
    /// TOBI phrase endtone.
    EndTone {
        LowLow => "L-L%",
        HighHigh => "H-H%",
        LowHigh => "L-H%",
        HighLow => "H-L%",
    }
}

/// One syllable inside a word: a span of the word's phoneme sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Syllable {
    pub phonemes: Range<usize>,
    pub stressed: bool,
}

/// One syntactic word with its pronunciation.
#[derive(Debug, Clone, PartialEq)]
pub struct WordToken {
    pub orthography: String,
    pub pos: PosTag,
    pub hyphenated: bool,
    pub phonemes: Vec<String>,
    pub syllables: Vec<Syllable>,
}

impl WordToken {
    pub fn syllable_count(&self) -> usize {
        self.syllables.len()
    }
}

/// One or more words grouped by the prosodic-word rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ProsodicWord {
    pub words: Vec<WordToken>,
    pub tone: Tone,
    pub stress_syllable: usize,
}

impl ProsodicWord {
    pub fn syllable_count(&self) -> usize {
        self.words.iter().map(|w| w.syllable_count()).sum()
    }

    /// POS of the prosodic word: the tag of its first token.
    pub fn pos(&self) -> PosTag {
        self.words[0].pos
    }

    pub fn is_content(&self) -> bool {
        self.pos().is_content()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhraseAnnotation {
    pub prosodic_words: Vec<ProsodicWord>,
    pub endtone: EndTone,
}

impl PhraseAnnotation {
    pub fn word_count(&self) -> usize {
        self.prosodic_words.len()
    }

    pub fn syllable_count(&self) -> usize {
        self.prosodic_words.iter().map(|w| w.syllable_count()).sum()
    }
}

/// Start and end of one phone, in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhoneTiming {
    pub start: f64,
    pub end: f64,
}

/// A fully annotated utterance, ready for label building.
#[derive(Debug, Clone, PartialEq)]
pub struct UtteranceAnnotation {
    pub id: String,
    pub sentence_type: SentenceType,
    pub phrases: Vec<PhraseAnnotation>,
    pub initial_silence: bool,
    pub final_silence: bool,
    /// One timing per phone of `phone_sequence`, when the utterance comes
    /// from an aligned corpus.
    pub alignments: Option<Vec<PhoneTiming>>,
}

impl UtteranceAnnotation {
    /// All phone symbols in order, including boundary silences.
    pub fn phone_sequence(&self) -> Vec<&str> {
        let mut out = Vec::new();
        if self.initial_silence {
            out.push("sil");
        }
        for phrase in &self.phrases {
            for pw in &phrase.prosodic_words {
                for word in &pw.words {
                    out.extend(word.phonemes.iter().map(String::as_str));
                }
            }
        }
        if self.final_silence {
            out.push("sil");
        }
        out
    }

    pub fn syllable_count(&self) -> usize {
        self.phrases.iter().map(|p| p.syllable_count()).sum()
    }

    pub fn word_count(&self) -> usize {
        self.phrases.iter().map(|p| p.word_count()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.phrases.is_empty() {
            return Err(Error::Frontend(format!("utterance {}: no phrases", self.id)));
        }
        for phrase in &self.phrases {
            if phrase.prosodic_words.is_empty() {
                return Err(Error::Frontend(format!("utterance {}: empty phrase", self.id)));
            }
            for pw in &phrase.prosodic_words {
                if pw.words.is_empty() {
                    return Err(Error::Frontend(format!(
                        "utterance {}: empty prosodic word",
                        self.id
                    )));
                }
                if pw.stress_syllable >= pw.syllable_count() {
                    return Err(Error::Frontend(format!(
                        "utterance {}: stress index {} out of {} syllables",
                        self.id,
                        pw.stress_syllable,
                        pw.syllable_count()
                    )));
                }
                for word in &pw.words {
                    let mut covered = 0;
                    for syl in &word.syllables {
                        if syl.phonemes.start != covered {
                            return Err(Error::Frontend(format!(
                                "utterance {}: syllables do not partition {:?}",
                                self.id, word.orthography
                            )));
                        }
                        covered = syl.phonemes.end;
                    }
                    if covered != word.phonemes.len() {
                        return Err(Error::Frontend(format!(
                            "utterance {}: syllables do not cover {:?}",
                            self.id, word.orthography
                        )));
                    }
                }
            }
        }
        if let Some(times) = &self.alignments {
            let phones = self.phone_sequence();
            if times.len() != phones.len() {
                return Err(Error::Frontend(format!(
                    "utterance {}: {} timings for {} phones",
                    self.id,
                    times.len(),
                    phones.len()
                )));
            }
            let mut prev_end = 0.0;
            for t in times {
                if !(t.start >= prev_end - 1e-9 && t.end > t.start) {
                    return Err(Error::Frontend(format!(
                        "utterance {}: non-monotone phone times",
                        self.id
                    )));
                }
                prev_end = t.end;
            }
        }
        Ok(())
    }
}
