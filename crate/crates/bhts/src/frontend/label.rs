use std::fmt::Write as _;

use super::annotation::{EndTone, PosTag, UtteranceAnnotation};
use super::phoneme::phoneme;
use crate::{Error, Result};

/// Full-context label: one per phone, every field from the context-feature
/// table. Categorical fields use the sentinel "x", numeric fields use 0,
/// when the referent does not exist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextLabel {
    pub p1: String,
    pub p2: String,
    pub p3: String,
    pub p4: String,
    pub p5: String,
    /// Phone position in syllable, forward and backward (1-based).
    pub pp: u32,
    pub ps: u32,
    /// Stress flags of previous / current / next syllable.
    pub sstr_p: u32,
    pub sstr_c: u32,
    pub sstr_n: u32,
    /// Phone counts of previous / current / next syllable.
    pub sph_p: u32,
    pub sph_c: u32,
    pub sph_n: u32,
    /// Syllable position in its prosodic word (1-based).
    pub spw: u32,
    /// Stressed syllables before / after within the phrase.
    pub ssb: u32,
    pub ssa: u32,
    /// Syllable distance from the previous / to the next stressed syllable.
    pub sds: u32,
    pub sns: u32,
    /// POS of previous / current / next prosodic word.
    pub wpos_p: String,
    pub wpos_c: String,
    pub wpos_n: String,
    /// Syllable counts of previous / current / next prosodic word.
    pub wsy_p: u32,
    pub wsy_c: u32,
    pub wsy_n: u32,
    /// Word position in its phrase (1-based).
    pub wpp: u32,
    /// Content words before / after within the phrase.
    pub wcb: u32,
    pub wca: u32,
    /// Word distance from the previous / to the next content word.
    pub wdc: u32,
    pub wnc: u32,
    /// Syllable counts of previous / current / next phrase.
    pub fsy_p: u32,
    pub fsy_c: u32,
    pub fsy_n: u32,
    /// Word counts of previous / current / next phrase.
    pub fw_p: u32,
    pub fw_c: u32,
    pub fw_n: u32,
    /// Phrase position in the utterance (1-based).
    pub fpu: u32,
    /// TOBI endtone of the phrase.
    pub ftone: String,
    /// Utterance totals: syllables, prosodic words, phrases.
    pub usy: u32,
    pub uw: u32,
    pub up: u32,
}

/// Typed view of one label field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldValue<'a> {
    Sym(&'a str),
    Num(u32),
}

impl ContextLabel {
    /// The center phone symbol.
    pub fn center(&self) -> &str {
        &self.p3
    }

    pub fn is_silence(&self) -> bool {
        self.p3 == "sil"
    }
}

macro_rules! label_fields {
    ($m:ident) => {
        $m!(
            (p1, sym),
            (p2, sym),
            (p3, sym),
            (p4, sym),
            (p5, sym),
            (pp, num),
            (ps, num),
            (sstr_p, num),
            (sstr_c, num),
            (sstr_n, num),
            (sph_p, num),
            (sph_c, num),
            (sph_n, num),
            (spw, num),
            (ssb, num),
            (ssa, num),
            (sds, num),
            (sns, num),
            (wpos_p, pos),
            (wpos_c, pos),
            (wpos_n, pos),
            (wsy_p, num),
            (wsy_c, num),
            (wsy_n, num),
            (wpp, num),
            (wcb, num),
            (wca, num),
            (wdc, num),
            (wnc, num),
            (fsy_p, num),
            (fsy_c, num),
            (fsy_n, num),
            (fw_p, num),
            (fw_c, num),
            (fw_n, num),
            (fpu, num),
            (ftone, tone),
            (usy, num),
            (uw, num),
            (up, num)
        );
    };
}

/// The 40 field names in serialization order.
pub fn label_field_names() -> &'static [&'static str] {
    macro_rules! names {
        ($(($field:ident, $kind:ident)),+) => {
            return &[$(stringify!($field)),+];
        };
    }
    label_fields!(names);
}

impl ContextLabel {
    /// Looks a field up by its serialized name.
    pub fn field(&self, name: &str) -> Option<FieldValue<'_>> {
        macro_rules! lookup {
            ($(($field:ident, $kind:ident)),+) => {
                return match name {
                    $(stringify!($field) => Some(lookup!(@val $kind, $field)),)+
                    _ => None,
                };
            };
            (@val num, $field:ident) => { FieldValue::Num(self.$field) };
            (@val sym, $field:ident) => { FieldValue::Sym(&self.$field) };
            (@val pos, $field:ident) => { FieldValue::Sym(&self.$field) };
            (@val tone, $field:ident) => { FieldValue::Sym(&self.$field) };
        }
        label_fields!(lookup);
    }
}

/// Serializes a label as `key=value` fields joined by `/`, in fixed order.
pub fn format_label(label: &ContextLabel) -> String {
    let mut out = String::with_capacity(256);
    macro_rules! emit {
        ($(($field:ident, $kind:ident)),+) => {
            $(
                if !out.is_empty() {
                    out.push('/');
                }
                let _ = write!(out, concat!(stringify!($field), "={}"), label.$field);
            )+
        };
    }
    label_fields!(emit);
    out
}

fn parse_sym(value: &str) -> bool {
    value == "x" || phoneme(value).is_some()
}

fn parse_pos(value: &str) -> bool {
    value == "x" || value.parse::<PosTag>().is_ok()
}

fn parse_tone(value: &str) -> bool {
    value == "x" || value.parse::<EndTone>().is_ok()
}

/// Parses the fixed-order serialization produced by `format_label`.
pub fn parse_label(text: &str) -> Result<ContextLabel> {
    let parts: Vec<&str> = text.split('/').collect();
    let err = |index: usize, key: &str, msg: String| Error::LabelParse {
        index,
        key: key.to_string(),
        msg,
    };
    let mut label = ContextLabel {
        p1: String::new(),
        p2: String::new(),
        p3: String::new(),
        p4: String::new(),
        p5: String::new(),
        pp: 0,
        ps: 0,
        sstr_p: 0,
        sstr_c: 0,
        sstr_n: 0,
        sph_p: 0,
        sph_c: 0,
        sph_n: 0,
        spw: 0,
        ssb: 0,
        ssa: 0,
        sds: 0,
        sns: 0,
        wpos_p: String::new(),
        wpos_c: String::new(),
        wpos_n: String::new(),
        wsy_p: 0,
        wsy_c: 0,
        wsy_n: 0,
        wpp: 0,
        wcb: 0,
        wca: 0,
        wdc: 0,
        wnc: 0,
        fsy_p: 0,
        fsy_c: 0,
        fsy_n: 0,
        fw_p: 0,
        fw_c: 0,
        fw_n: 0,
        fpu: 0,
        ftone: String::new(),
        usy: 0,
        uw: 0,
        up: 0,
    };
    let mut index = 0;
    macro_rules! take {
        ($(($field:ident, $kind:ident)),+) => {
            $(
                {
                    let key = stringify!($field);
                    let part = parts.get(index).copied().ok_or_else(|| {
                        err(index, key, "missing field".into())
                    })?;
                    let value = part
                        .strip_prefix(key)
                        .and_then(|r| r.strip_prefix('='))
                        .ok_or_else(|| {
                            err(index, key, format!("expected {key}=..., got {part:?}"))
                        })?;
                    take!(@assign $kind, $field, key, value);
                    index += 1;
                }
            )+
        };
        (@assign num, $field:ident, $key:ident, $value:ident) => {
            label.$field = $value.parse::<u32>().map_err(|_| {
                err(index, $key, format!("invalid number {:?}", $value))
            })?;
        };
        (@assign sym, $field:ident, $key:ident, $value:ident) => {
            if !parse_sym($value) {
                return Err(err(index, $key, format!("unknown phoneme {:?}", $value)));
            }
            label.$field = $value.to_string();
        };
        (@assign pos, $field:ident, $key:ident, $value:ident) => {
            if !parse_pos($value) {
                return Err(err(index, $key, format!("unknown POS {:?}", $value)));
            }
            label.$field = $value.to_string();
        };
        (@assign tone, $field:ident, $key:ident, $value:ident) => {
            if !parse_tone($value) {
                return Err(err(index, $key, format!("unknown endtone {:?}", $value)));
            }
            label.$field = $value.to_string();
        };
    }
    label_fields!(take);
    if index != parts.len() {
        return Err(err(index, "", format!("{} extra fields", parts.len() - index)));
    }
    Ok(label)
}

struct SylInfo {
    phrase: usize,
    pw: usize,
    idx_in_pw: usize,
    phone_count: usize,
    stressed: bool,
}

struct PwInfo {
    phrase: usize,
    idx_in_phrase: usize,
    pos: PosTag,
    syl_count: usize,
    content: bool,
}

struct PhraseInfo {
    syl_count: usize,
    word_count: usize,
    endtone: EndTone,
}

struct Slot {
    symbol: String,
    syl: Option<usize>,
    pos_in_syl: usize,
}

/// Builds one full-context label per phone, boundary silences included.
pub fn build_context_labels(utt: &UtteranceAnnotation) -> Result<Vec<ContextLabel>> {
    utt.validate()?;
    let mut syls: Vec<SylInfo> = Vec::new();
    let mut pws: Vec<PwInfo> = Vec::new();
    let mut phrases: Vec<PhraseInfo> = Vec::new();
    let mut slots: Vec<Slot> = Vec::new();

    if utt.initial_silence {
        slots.push(Slot {
            symbol: "sil".into(),
            syl: None,
            pos_in_syl: 0,
        });
    }
    for (pi, phrase) in utt.phrases.iter().enumerate() {
        for (wi, pw) in phrase.prosodic_words.iter().enumerate() {
            let gpw = pws.len();
            pws.push(PwInfo {
                phrase: pi,
                idx_in_phrase: wi,
                pos: pw.pos(),
                syl_count: pw.syllable_count(),
                content: pw.is_content(),
            });
            let mut local_syl = 0;
            for word in &pw.words {
                for syl in &word.syllables {
                    let gsyl = syls.len();
                    syls.push(SylInfo {
                        phrase: pi,
                        pw: gpw,
                        idx_in_pw: local_syl,
                        phone_count: syl.phonemes.len(),
                        stressed: local_syl == pw.stress_syllable,
                    });
                    for (k, sym) in word.phonemes[syl.phonemes.clone()].iter().enumerate() {
                        slots.push(Slot {
                            symbol: sym.clone(),
                            syl: Some(gsyl),
                            pos_in_syl: k + 1,
                        });
                    }
                    local_syl += 1;
                }
            }
        }
        phrases.push(PhraseInfo {
            syl_count: phrase.syllable_count(),
            word_count: phrase.word_count(),
            endtone: phrase.endtone,
        });
    }
    if utt.final_silence {
        slots.push(Slot {
            symbol: "sil".into(),
            syl: None,
            pos_in_syl: 0,
        });
    }

    let usy = syls.len() as u32;
    let uw = pws.len() as u32;
    let up = phrases.len() as u32;
    let sym_at = |i: isize| -> String {
        if i < 0 || i as usize >= slots.len() {
            "x".into()
        } else {
            slots[i as usize].symbol.clone()
        }
    };

    let mut labels = Vec::with_capacity(slots.len());
    for (t, slot) in slots.iter().enumerate() {
        let ti = t as isize;
        let mut label = ContextLabel {
            p1: sym_at(ti - 2),
            p2: sym_at(ti - 1),
            p3: slot.symbol.clone(),
            p4: sym_at(ti + 1),
            p5: sym_at(ti + 2),
            pp: 0,
            ps: 0,
            sstr_p: 0,
            sstr_c: 0,
            sstr_n: 0,
            sph_p: 0,
            sph_c: 0,
            sph_n: 0,
            spw: 0,
            ssb: 0,
            ssa: 0,
            sds: 0,
            sns: 0,
            wpos_p: "x".into(),
            wpos_c: "x".into(),
            wpos_n: "x".into(),
            wsy_p: 0,
            wsy_c: 0,
            wsy_n: 0,
            wpp: 0,
            wcb: 0,
            wca: 0,
            wdc: 0,
            wnc: 0,
            fsy_p: 0,
            fsy_c: 0,
            fsy_n: 0,
            fw_p: 0,
            fw_c: 0,
            fw_n: 0,
            fpu: 0,
            ftone: "x".into(),
            usy,
            uw,
            up,
        };
        if let Some(gsyl) = slot.syl {
            let syl = &syls[gsyl];
            let pw = &pws[syl.pw];
            label.pp = slot.pos_in_syl as u32;
            label.ps = (syl.phone_count - slot.pos_in_syl + 1) as u32;
            label.sstr_c = syl.stressed as u32;
            label.sph_c = syl.phone_count as u32;
            if gsyl > 0 {
                label.sstr_p = syls[gsyl - 1].stressed as u32;
                label.sph_p = syls[gsyl - 1].phone_count as u32;
            }
            if gsyl + 1 < syls.len() {
                label.sstr_n = syls[gsyl + 1].stressed as u32;
                label.sph_n = syls[gsyl + 1].phone_count as u32;
            }
            label.spw = (syl.idx_in_pw + 1) as u32;
            label.ssb = syls[..gsyl]
                .iter()
                .filter(|s| s.phrase == syl.phrase && s.stressed)
                .count() as u32;
            label.ssa = syls[gsyl + 1..]
                .iter()
                .filter(|s| s.phrase == syl.phrase && s.stressed)
                .count() as u32;
            label.sds = syls[..gsyl]
                .iter()
                .rposition(|s| s.stressed)
                .map(|j| (gsyl - j) as u32)
                .unwrap_or(0);
            label.sns = syls[gsyl + 1..]
                .iter()
                .position(|s| s.stressed)
                .map(|j| (j + 1) as u32)
                .unwrap_or(0);
            let gpw = syl.pw;
            label.wpos_c = pw.pos.to_string();
            label.wsy_c = pw.syl_count as u32;
            if gpw > 0 {
                label.wpos_p = pws[gpw - 1].pos.to_string();
                label.wsy_p = pws[gpw - 1].syl_count as u32;
            }
            if gpw + 1 < pws.len() {
                label.wpos_n = pws[gpw + 1].pos.to_string();
                label.wsy_n = pws[gpw + 1].syl_count as u32;
            }
            label.wpp = (pw.idx_in_phrase + 1) as u32;
            label.wcb = pws[..gpw]
                .iter()
                .filter(|w| w.phrase == pw.phrase && w.content)
                .count() as u32;
            label.wca = pws[gpw + 1..]
                .iter()
                .filter(|w| w.phrase == pw.phrase && w.content)
                .count() as u32;
            label.wdc = pws[..gpw]
                .iter()
                .rposition(|w| w.content)
                .map(|j| (gpw - j) as u32)
                .unwrap_or(0);
            label.wnc = pws[gpw + 1..]
                .iter()
                .position(|w| w.content)
                .map(|j| (j + 1) as u32)
                .unwrap_or(0);
            let pi = pw.phrase;
            label.fsy_c = phrases[pi].syl_count as u32;
            label.fw_c = phrases[pi].word_count as u32;
            if pi > 0 {
                label.fsy_p = phrases[pi - 1].syl_count as u32;
                label.fw_p = phrases[pi - 1].word_count as u32;
            }
            if pi + 1 < phrases.len() {
                label.fsy_n = phrases[pi + 1].syl_count as u32;
                label.fw_n = phrases[pi + 1].word_count as u32;
            }
            label.fpu = (pi + 1) as u32;
            label.ftone = phrases[pi].endtone.to_string();
        }
        labels.push(label);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::annotation::{
        PhraseAnnotation, ProsodicWord, Syllable, Tone, WordToken,
    };
    use crate::frontend::SentenceType;

    fn tiny_utterance() -> UtteranceAnnotation {
        UtteranceAnnotation {
            id: "tiny".into(),
            sentence_type: SentenceType::SimpleAffirmativeNoverb,
            phrases: vec![PhraseAnnotation {
                prosodic_words: vec![ProsodicWord {
                    words: vec![WordToken {
                        orthography: "ই".into(),
                        pos: PosTag::Nn,
                        hyphenated: false,
                        phonemes: vec!["i".into()],
                        syllables: vec![Syllable {
                            phonemes: 0..1,
                            stressed: true,
                        }],
                    }],
                    tone: Tone::Low,
                    stress_syllable: 0,
                }],
                endtone: EndTone::LowLow,
            }],
            initial_silence: false,
            final_silence: false,
            alignments: None,
        }
    }

    #[test]
    fn single_phone_label_by_hand() {
        let labels = build_context_labels(&tiny_utterance()).unwrap();
        assert_eq!(labels.len(), 1);
        let l = &labels[0];
        assert_eq!((l.p1.as_str(), l.p2.as_str()), ("x", "x"));
        assert_eq!(l.p3, "i");
        assert_eq!((l.p4.as_str(), l.p5.as_str()), ("x", "x"));
        assert_eq!((l.pp, l.ps), (1, 1));
        assert_eq!((l.sstr_p, l.sstr_c, l.sstr_n), (0, 1, 0));
        assert_eq!((l.sph_p, l.sph_c, l.sph_n), (0, 1, 0));
        assert_eq!(l.spw, 1);
        assert_eq!((l.ssb, l.ssa, l.sds, l.sns), (0, 0, 0, 0));
        assert_eq!(l.wpos_c, "NN");
        assert_eq!((l.wsy_p, l.wsy_c, l.wsy_n), (0, 1, 0));
        assert_eq!(l.wpp, 1);
        assert_eq!((l.wcb, l.wca, l.wdc, l.wnc), (0, 0, 0, 0));
        assert_eq!((l.fsy_c, l.fw_c, l.fpu), (1, 1, 1));
        assert_eq!(l.ftone, "L-L%");
        assert_eq!((l.usy, l.uw, l.up), (1, 1, 1));
    }

    #[test]
    fn serialization_starts_with_quinphone() {
        let labels = build_context_labels(&tiny_utterance()).unwrap();
        let text = format_label(&labels[0]);
        assert!(text.starts_with("p1=x/p2=x/p3=i/p4=x/p5=x/pp=1/ps=1/"));
        assert!(text.ends_with("/usy=1/uw=1/up=1"));
        assert_eq!(text.split('/').count(), 40);
    }

    #[test]
    fn round_trip_identity() {
        let labels = build_context_labels(&tiny_utterance()).unwrap();
        for l in &labels {
            let back = parse_label(&format_label(l)).unwrap();
            assert_eq!(*l, back);
        }
    }

    #[test]
    fn field_lookup_matches_serialization() {
        let label = &build_context_labels(&tiny_utterance()).unwrap()[0];
        assert_eq!(label_field_names().len(), 40);
        for (name, part) in label_field_names().iter().zip(format_label(label).split('/')) {
            let rendered = match label.field(name).unwrap() {
                FieldValue::Sym(s) => s.to_string(),
                FieldValue::Num(n) => n.to_string(),
            };
            assert_eq!(format!("{name}={rendered}"), part);
        }
        assert!(label.field("zz").is_none());
    }

    #[test]
    fn parse_rejects_malformed_input() {
        let good = format_label(&build_context_labels(&tiny_utterance()).unwrap()[0]);
        assert!(parse_label(&good.replace("p3=i", "zz=1")).is_err());
        assert!(parse_label(&good.replace("pp=1", "pp=x")).is_err());
        assert!(parse_label(&good.replace("p3=i", "p3=qq")).is_err());
        assert!(parse_label(good.rsplit_once('/').unwrap().0).is_err());
        assert!(parse_label(&format!("{good}/extra=1")).is_err());
        assert!(parse_label(&good.replace("ftone=L-L%", "ftone=M-M%")).is_err());
    }

    fn two_phrase_utterance() -> UtteranceAnnotation {
        let word = |orth: &str, pos: PosTag, phones: &[&str], spans: &[(usize, usize)]| WordToken {
            orthography: orth.into(),
            pos,
            hyphenated: false,
            phonemes: phones.iter().map(|s| s.to_string()).collect(),
            syllables: spans
                .iter()
                .enumerate()
                .map(|(i, &(a, b))| Syllable {
                    phonemes: a..b,
                    stressed: i == 0,
                })
                .collect(),
        };
        UtteranceAnnotation {
            id: "two".into(),
            sentence_type: SentenceType::SimpleAffirmativeVerb,
            phrases: vec![
                PhraseAnnotation {
                    prosodic_words: vec![ProsodicWord {
                        words: vec![word("কলম", PosTag::Nn, &["k", "O", "l", "O", "m"], &[(0, 2), (2, 5)])],
                        tone: Tone::Rising,
                        stress_syllable: 0,
                    }],
                    endtone: EndTone::LowLow,
                },
                PhraseAnnotation {
                    prosodic_words: vec![
                        ProsodicWord {
                            words: vec![word("সে", PosTag::Pron, &["s", "e"], &[(0, 2)])],
                            tone: Tone::Rising,
                            stress_syllable: 0,
                        },
                        ProsodicWord {
                            words: vec![word("গেল", PosTag::Vf, &["g", "e", "l", "O"], &[(0, 2), (2, 4)])],
                            tone: Tone::Low,
                            stress_syllable: 0,
                        },
                    ],
                    endtone: EndTone::LowLow,
                },
            ],
            initial_silence: true,
            final_silence: true,
            alignments: None,
        }
    }

    #[test]
    fn multi_phrase_counts_and_silence() {
        let utt = two_phrase_utterance();
        let labels = build_context_labels(&utt).unwrap();
        assert_eq!(labels.len(), 13);
        let first = &labels[0];
        assert!(first.is_silence());
        assert_eq!((first.pp, first.spw, first.fpu), (0, 0, 0));
        assert_eq!(first.ftone, "x");
        assert_eq!((first.usy, first.uw, first.up), (5, 3, 2));
        assert_eq!(first.p4, "k");

        // First real phone: quinphone spans the silence.
        let k = &labels[1];
        assert_eq!((k.p1.as_str(), k.p2.as_str(), k.p3.as_str()), ("x", "sil", "k"));
        assert_eq!(k.fpu, 1);
        assert_eq!((k.fsy_c, k.fsy_n), (2, 3));
        assert_eq!((k.fw_c, k.fw_n), (1, 2));

        // "g" of the last word: check cross-phrase word context.
        let g = labels.iter().find(|l| l.p3 == "g").unwrap();
        assert_eq!(g.wpos_p, "PRON");
        assert_eq!(g.wpos_c, "VF");
        assert_eq!(g.wpos_n, "x");
        assert_eq!(g.wpp, 2);
        assert_eq!((g.wdc, g.wnc), (2, 0));
        assert_eq!(g.fpu, 2);

        // Utterance totals agree with per-phrase sums.
        let total: u32 = utt.phrases.iter().map(|p| p.syllable_count() as u32).sum();
        assert_eq!(g.usy, total);
    }

    #[test]
    fn positions_within_counts() {
        let labels = build_context_labels(&two_phrase_utterance()).unwrap();
        for l in &labels {
            if l.is_silence() {
                continue;
            }
            assert!(l.pp >= 1 && l.pp <= l.sph_c);
            assert!(l.ps >= 1 && l.ps <= l.sph_c);
            assert!(l.spw >= 1 && l.spw <= l.wsy_c);
            assert!(l.wpp >= 1 && l.wpp <= l.fw_c);
            assert!(l.fpu >= 1 && l.fpu <= l.up);
        }
    }
}
