use super::annotation::{EndTone, PosTag, ProsodicWord, SentenceType, Tone, WordToken};
use crate::{Error, Result};

/// Returns the number of the first grouping rule that joins `a` and `b`,
/// if any. Hyphenated words stand alone unless the pair is a repetition.
fn merge_rule(a: &WordToken, b: &WordToken) -> Option<u8> {
    if a.orthography == b.orthography {
        return Some(1);
    }
    if a.hyphenated || b.hyphenated {
        return None;
    }
    let (pa, pb) = (a.pos, b.pos);
    if pa == PosTag::Nnp && pb == PosTag::Nnp {
        return Some(2);
    }
    if pa == PosTag::Adj && pb == PosTag::Nn && a.syllable_count() >= 3 && b.syllable_count() >= 3 {
        return Some(3);
    }
    if pa == PosTag::Nn && pb == PosTag::Vn {
        return Some(4);
    }
    if pb == PosTag::Pp {
        return Some(5);
    }
    if matches!(pa, PosTag::Vf | PosTag::Vaux) && pb == PosTag::Prt {
        return Some(6);
    }
    if pa == PosTag::Vf && pb == PosTag::Vaux {
        return Some(7);
    }
    if matches!(pa, PosTag::Nn | PosTag::Adj | PosTag::Vn) && matches!(pb, PosTag::Vf | PosTag::Vaux)
    {
        return Some(8);
    }
    None
}

/// Groups each phrase's words into prosodic words: scan left to right, join
/// the current word with the next one when a rule matches, otherwise emit a
/// singleton. A word joins at most one prosodic word; no group crosses a
/// phrase boundary. Tone and stress carry placeholder values until
/// `assign_tones` and `assign_stress` run.
pub fn mark_prosodic_words(phrases: &[Vec<WordToken>]) -> Vec<Vec<ProsodicWord>> {
    phrases
        .iter()
        .map(|words| {
            let mut out = Vec::new();
            let mut i = 0;
            while i < words.len() {
                let joined = words
                    .get(i + 1)
                    .is_some_and(|next| merge_rule(&words[i], next).is_some());
                let take = if joined { 2 } else { 1 };
                out.push(ProsodicWord {
                    words: words[i..i + take].to_vec(),
                    tone: Tone::Rising,
                    stress_syllable: 0,
                });
                i += take;
            }
            out
        })
        .collect()
}

/// Bound stress: the first syllable of every prosodic word.
pub fn assign_stress(pw: &ProsodicWord) -> usize {
    debug_assert!(!pw.words.is_empty());
    0
}

/// Tone pattern over the utterance's prosodic words plus the shared phrase
/// endtone. Yes-No questions rise throughout; WH and focused sentences rise
/// through the focused word and stay low after it; everything else rises
/// except the final word.
pub fn assign_tones(
    sentence_type: SentenceType,
    word_count: usize,
    focus_index: Option<usize>,
) -> Result<(Vec<Tone>, EndTone)> {
    if word_count == 0 {
        return Err(Error::Frontend("no prosodic words to tone".into()));
    }
    if let Some(f) = focus_index {
        if f >= word_count {
            return Err(Error::Frontend(format!(
                "focus index {f} out of {word_count} prosodic words"
            )));
        }
    }
    if sentence_type == SentenceType::YesnoQuestion {
        return Ok((vec![Tone::Rising; word_count], EndTone::HighHigh));
    }
    let focus = match (sentence_type, focus_index) {
        (_, Some(f)) => Some(f),
        (SentenceType::WhQuestion, None) => Some(0),
        _ => None,
    };
    let tones = match focus {
        Some(f) => (0..word_count)
            .map(|i| if i <= f { Tone::Rising } else { Tone::Low })
            .collect(),
        None => (0..word_count)
            .map(|i| {
                if i + 1 == word_count {
                    Tone::Low
                } else {
                    Tone::Rising
                }
            })
            .collect(),
    };
    Ok((tones, EndTone::LowLow))
}
