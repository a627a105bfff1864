use std::fmt::Write as _;

use crate::frontend::annotation::{
    PhoneTiming, PhraseAnnotation, PosTag, ProsodicWord, SentenceType, Syllable, Tone,
    UtteranceAnnotation, WordToken,
};
use crate::frontend::{is_silence, phoneme, EndTone};
use crate::{Error, Result};

const EPS: f64 = 5e-5;

fn ann_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Annotation {
        line,
        msg: msg.into(),
    }
}

/// Times are carried at 1e-4 s resolution; quantizing on parse makes
/// format/parse round trips bit-exact.
fn quantize(t: f64) -> f64 {
    (t * 1e4).round() / 1e4
}

#[derive(Clone, Copy)]
struct Span {
    start: f64,
    end: f64,
}

impl Span {
    fn contains(&self, other: &Span) -> bool {
        other.start >= self.start - EPS && other.end <= self.end + EPS
    }
}

fn parse_span(line_no: usize, s: &str, e: &str) -> Result<Span> {
    let parse = |v: &str| {
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite() && *x >= 0.0)
            .map(quantize)
            .ok_or_else(|| ann_err(line_no, format!("bad time {v:?}")))
    };
    let (start, end) = (parse(s)?, parse(e)?);
    if end <= start {
        return Err(ann_err(
            line_no,
            format!("end {end:.4} not after start {start:.4}"),
        ));
    }
    Ok(Span { start, end })
}

fn keyed<'a>(line_no: usize, token: &'a str, key: &str) -> Result<&'a str> {
    token
        .strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .ok_or_else(|| ann_err(line_no, format!("expected {key}=<value>, got {token:?}")))
}

struct SylBuilder {
    span: Span,
    stressed: bool,
    phones: Vec<(String, Span)>,
}

struct PwordBuilder {
    span: Span,
    pos: PosTag,
    tone: Tone,
    syls: Vec<SylBuilder>,
}

struct PhraseBuilder {
    span: Span,
    endtone: EndTone,
    pwords: Vec<PwordBuilder>,
}

/// Parses one `.utt` annotation file.
pub fn parse_annotation(text: &str) -> Result<UtteranceAnnotation> {
    let mut id: Option<(String, SentenceType)> = None;
    let mut phrases: Vec<PhraseBuilder> = Vec::new();
    let mut leading: Vec<Span> = Vec::new();
    let mut trailing: Vec<Span> = Vec::new();
    let mut last_phone_end = 0.0f64;

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        match fields[0] {
            "UTT" => {
                if id.is_some() {
                    return Err(ann_err(line_no, "duplicate UTT header"));
                }
                if fields.len() != 3 {
                    return Err(ann_err(line_no, "expected UTT <id> TYPE=<sentence-type>"));
                }
                let stype: SentenceType = keyed(line_no, fields[2], "TYPE")?
                    .parse()
                    .map_err(|e: Error| ann_err(line_no, e.to_string()))?;
                id = Some((fields[1].to_string(), stype));
            }
            "PHRASE" => {
                if id.is_none() {
                    return Err(ann_err(line_no, "PHRASE before UTT header"));
                }
                if !trailing.is_empty() {
                    return Err(ann_err(
                        line_no,
                        "utterance-level silence is only allowed before the first phrase and after the last",
                    ));
                }
                if fields.len() != 4 {
                    return Err(ann_err(line_no, "expected PHRASE <start> <end> ENDTONE=<t>"));
                }
                let span = parse_span(line_no, fields[1], fields[2])?;
                if let Some(prev) = phrases.last() {
                    if span.start < prev.span.end - EPS {
                        return Err(ann_err(line_no, "PHRASE overlaps previous phrase"));
                    }
                }
                let endtone: EndTone = keyed(line_no, fields[3], "ENDTONE")?
                    .parse()
                    .map_err(|e: Error| ann_err(line_no, e.to_string()))?;
                phrases.push(PhraseBuilder {
                    span,
                    endtone,
                    pwords: Vec::new(),
                });
            }
            "PWORD" => {
                if fields.len() != 5 {
                    return Err(ann_err(
                        line_no,
                        "expected PWORD <start> <end> POS=<tag> TONE=<tone>",
                    ));
                }
                let span = parse_span(line_no, fields[1], fields[2])?;
                let pos: PosTag = keyed(line_no, fields[3], "POS")?
                    .parse()
                    .map_err(|e: Error| ann_err(line_no, e.to_string()))?;
                let tone: Tone = keyed(line_no, fields[4], "TONE")?
                    .parse()
                    .map_err(|e: Error| ann_err(line_no, e.to_string()))?;
                let phrase = phrases
                    .last_mut()
                    .ok_or_else(|| ann_err(line_no, "PWORD outside any PHRASE"))?;
                if !phrase.span.contains(&span) {
                    return Err(ann_err(line_no, "PWORD not nested in its PHRASE"));
                }
                if let Some(prev) = phrase.pwords.last() {
                    if span.start < prev.span.end - EPS {
                        return Err(ann_err(line_no, "PWORD overlaps previous PWORD"));
                    }
                }
                phrase.pwords.push(PwordBuilder {
                    span,
                    pos,
                    tone,
                    syls: Vec::new(),
                });
            }
            "SYL" => {
                if fields.len() != 4 {
                    return Err(ann_err(line_no, "expected SYL <start> <end> STRESS=<0|1>"));
                }
                let span = parse_span(line_no, fields[1], fields[2])?;
                let stressed = match keyed(line_no, fields[3], "STRESS")? {
                    "0" => false,
                    "1" => true,
                    other => return Err(ann_err(line_no, format!("bad STRESS value {other:?}"))),
                };
                let pword = phrases
                    .last_mut()
                    .and_then(|p| p.pwords.last_mut())
                    .ok_or_else(|| ann_err(line_no, "SYL outside any PWORD"))?;
                if !pword.span.contains(&span) {
                    return Err(ann_err(line_no, "SYL not nested in its PWORD"));
                }
                if stressed && pword.syls.iter().any(|s| s.stressed) {
                    return Err(ann_err(line_no, "more than one stressed SYL in a PWORD"));
                }
                if let Some(prev) = pword.syls.last() {
                    if span.start < prev.span.end - EPS {
                        return Err(ann_err(line_no, "SYL overlaps previous SYL"));
                    }
                }
                pword.syls.push(SylBuilder {
                    span,
                    stressed,
                    phones: Vec::new(),
                });
            }
            "PHONE" => {
                if fields.len() != 4 {
                    return Err(ann_err(line_no, "expected PHONE <start> <end> <symbol>"));
                }
                let span = parse_span(line_no, fields[1], fields[2])?;
                let sym = fields[3];
                if phoneme(sym).is_none() {
                    return Err(ann_err(line_no, format!("unknown phoneme {sym:?}")));
                }
                if span.start < last_phone_end - EPS {
                    return Err(ann_err(line_no, "PHONE overlaps previous PHONE"));
                }
                last_phone_end = span.end;
                if is_silence(sym) {
                    if phrases.is_empty() {
                        if !leading.is_empty() {
                            return Err(ann_err(line_no, "more than one leading silence"));
                        }
                        leading.push(span);
                    } else {
                        if span.start < phrases.last().unwrap().span.end - EPS {
                            return Err(ann_err(line_no, "silence inside a phrase"));
                        }
                        if !trailing.is_empty() {
                            return Err(ann_err(line_no, "more than one trailing silence"));
                        }
                        trailing.push(span);
                    }
                } else {
                    let syl = phrases
                        .last_mut()
                        .and_then(|p| p.pwords.last_mut())
                        .and_then(|w| w.syls.last_mut())
                        .ok_or_else(|| ann_err(line_no, "PHONE outside any SYL"))?;
                    if !syl.span.contains(&span) {
                        return Err(ann_err(line_no, "PHONE not nested in its SYL"));
                    }
                    syl.phones.push((sym.to_string(), span));
                }
            }
            other => return Err(ann_err(line_no, format!("unknown record {other:?}"))),
        }
    }

    let (id, sentence_type) = id.ok_or_else(|| ann_err(1, "missing UTT header"))?;
    if phrases.is_empty() {
        return Err(ann_err(1, format!("utterance {id}: no phrases")));
    }

    let mut alignments: Vec<PhoneTiming> = Vec::new();
    let mut push_span = |s: &Span| {
        alignments.push(PhoneTiming {
            start: s.start,
            end: s.end,
        })
    };
    for s in &leading {
        push_span(s);
    }
    let mut out_phrases = Vec::with_capacity(phrases.len());
    for phrase in &phrases {
        let mut prosodic_words = Vec::with_capacity(phrase.pwords.len());
        for pword in &phrase.pwords {
            if pword.syls.is_empty() {
                return Err(ann_err(1, format!("utterance {id}: PWORD without SYL")));
            }
            let mut phonemes = Vec::new();
            let mut syllables = Vec::new();
            for syl in &pword.syls {
                if syl.phones.is_empty() {
                    return Err(ann_err(1, format!("utterance {id}: SYL without PHONE")));
                }
                let start = phonemes.len();
                for (sym, span) in &syl.phones {
                    phonemes.push(sym.clone());
                    push_span(span);
                }
                syllables.push(Syllable {
                    phonemes: start..phonemes.len(),
                    stressed: syl.stressed,
                });
            }
            let stress_syllable = pword.syls.iter().position(|s| s.stressed).unwrap_or(0);
            prosodic_words.push(ProsodicWord {
                words: vec![WordToken {
                    orthography: String::new(),
                    pos: pword.pos,
                    hyphenated: false,
                    phonemes,
                    syllables,
                }],
                tone: pword.tone,
                stress_syllable,
            });
        }
        out_phrases.push(PhraseAnnotation {
            prosodic_words,
            endtone: phrase.endtone,
        });
    }
    for s in &trailing {
        push_span(s);
    }

    let utt = UtteranceAnnotation {
        id,
        sentence_type,
        phrases: out_phrases,
        initial_silence: !leading.is_empty(),
        final_silence: !trailing.is_empty(),
        alignments: Some(alignments),
    };
    utt.validate()?;
    Ok(utt)
}

/// Serializes an annotation with time alignments back to `.utt` text.
pub fn format_annotation(utt: &UtteranceAnnotation) -> Result<String> {
    let times = utt
        .alignments
        .as_ref()
        .ok_or_else(|| Error::Corpus(format!("utterance {}: no time alignments", utt.id)))?;
    utt.validate()?;
    let mut out = String::new();
    let _ = writeln!(out, "UTT {} TYPE={}", utt.id, utt.sentence_type);
    let mut idx = 0usize;
    if utt.initial_silence {
        let t = times[idx];
        idx += 1;
        let _ = writeln!(out, "PHONE {:.4} {:.4} sil", t.start, t.end);
    }
    for phrase in &utt.phrases {
        let phrase_phones: usize = phrase
            .prosodic_words
            .iter()
            .flat_map(|pw| &pw.words)
            .map(|w| w.phonemes.len())
            .sum();
        let start = times[idx].start;
        let end = times[idx + phrase_phones - 1].end;
        let _ = writeln!(out, "PHRASE {start:.4} {end:.4} ENDTONE={}", phrase.endtone);
        for pw in &phrase.prosodic_words {
            let pw_phones: usize = pw.words.iter().map(|w| w.phonemes.len()).sum();
            let start = times[idx].start;
            let end = times[idx + pw_phones - 1].end;
            let _ = writeln!(
                out,
                "PWORD {start:.4} {end:.4} POS={} TONE={}",
                pw.pos(),
                pw.tone
            );
            for word in &pw.words {
                for syl in &word.syllables {
                    let n = syl.phonemes.len();
                    let start = times[idx].start;
                    let end = times[idx + n - 1].end;
                    let _ = writeln!(
                        out,
                        "SYL {start:.4} {end:.4} STRESS={}",
                        if syl.stressed { 1 } else { 0 }
                    );
                    for sym in &word.phonemes[syl.phonemes.clone()] {
                        let t = times[idx];
                        idx += 1;
                        let _ = writeln!(out, "PHONE {:.4} {:.4} {}", t.start, t.end, sym);
                    }
                }
            }
        }
    }
    if utt.final_silence {
        let t = times[idx];
        let _ = writeln!(out, "PHONE {:.4} {:.4} sil", t.start, t.end);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
UTT s1 TYPE=simple-affirmative-verb
PHONE 0.0000 0.0750 sil
PHRASE 0.0750 0.3250 ENDTONE=L-L%
PWORD 0.0750 0.3250 POS=NN TONE=low
SYL 0.0750 0.1750 STRESS=1
PHONE 0.0750 0.1250 k
PHONE 0.1250 0.1750 O
SYL 0.1750 0.3250 STRESS=0
PHONE 0.1750 0.2250 l
PHONE 0.2250 0.2750 O
PHONE 0.2750 0.3250 m
PHONE 0.3250 0.4000 sil
";

    #[test]
    fn sample_file_builds_expected_structure() {
        let utt = parse_annotation(SAMPLE).unwrap();
        assert_eq!(utt.id, "s1");
        assert_eq!(utt.sentence_type, SentenceType::SimpleAffirmativeVerb);
        assert!(utt.initial_silence && utt.final_silence);
        assert_eq!(utt.phrases.len(), 1);
        assert_eq!(utt.word_count(), 1);
        assert_eq!(utt.syllable_count(), 2);
        let pw = &utt.phrases[0].prosodic_words[0];
        assert_eq!(pw.stress_syllable, 0);
        assert_eq!(pw.words[0].phonemes, vec!["k", "O", "l", "O", "m"]);
        assert_eq!(
            utt.phone_sequence(),
            vec!["sil", "k", "O", "l", "O", "m", "sil"]
        );
        let times = utt.alignments.as_ref().unwrap();
        assert_eq!(times.len(), 7);
        assert_eq!(times[0].start, 0.0);
        assert_eq!(times[6].end, 0.4);
    }

    #[test]
    fn format_parse_round_trip_is_exact() {
        let utt = parse_annotation(SAMPLE).unwrap();
        let text = format_annotation(&utt).unwrap();
        assert_eq!(text, SAMPLE);
        assert_eq!(parse_annotation(&text).unwrap(), utt);
    }

    #[test]
    fn reversed_phone_times_error_with_line() {
        let bad = SAMPLE.replace("PHONE 0.1250 0.1750 O", "PHONE 0.1750 0.1250 O");
        match parse_annotation(&bad).unwrap_err() {
            Error::Annotation { line, msg } => {
                assert_eq!(line, 7);
                assert!(msg.contains("not after"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_phoneme_is_named() {
        let bad = SAMPLE.replace("PHONE 0.1250 0.1750 O", "PHONE 0.1250 0.1750 zz");
        match parse_annotation(&bad).unwrap_err() {
            Error::Annotation { line, msg } => {
                assert_eq!(line, 7);
                assert!(msg.contains("unknown phoneme"), "{msg}");
                assert!(msg.contains("zz"), "{msg}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn structural_errors_are_line_anchored() {
        assert!(parse_annotation("").is_err());
        assert!(parse_annotation("UTT a TYPE=imperative\n").is_err());
        let orphan = "UTT a TYPE=imperative\nPWORD 0.0 0.1 POS=NN TONE=low\n";
        assert!(matches!(
            parse_annotation(orphan).unwrap_err(),
            Error::Annotation { line: 2, .. }
        ));
        let bad_type = SAMPLE.replace("simple-affirmative-verb", "statement");
        assert!(parse_annotation(&bad_type).is_err());
        let out_of_parent = SAMPLE.replace("PHONE 0.2750 0.3250 m", "PHONE 0.2750 0.3300 m");
        assert!(parse_annotation(&out_of_parent).is_err());
        let two_stress = SAMPLE.replace("SYL 0.1750 0.3250 STRESS=0", "SYL 0.1750 0.3250 STRESS=1");
        assert!(parse_annotation(&two_stress).is_err());
    }

    #[test]
    fn silence_between_phrases_is_rejected() {
        let text = "\
UTT a TYPE=imperative
PHRASE 0.0000 0.1000 ENDTONE=L-L%
PWORD 0.0000 0.1000 POS=VF TONE=low
SYL 0.0000 0.1000 STRESS=1
PHONE 0.0000 0.1000 i
PHONE 0.1000 0.1500 sil
PHRASE 0.1500 0.2500 ENDTONE=L-L%
PWORD 0.1500 0.2500 POS=VF TONE=low
SYL 0.1500 0.2500 STRESS=1
PHONE 0.1500 0.2500 u
";
        assert!(matches!(
            parse_annotation(text).unwrap_err(),
            Error::Annotation { line: 7, .. }
        ));
    }
}
