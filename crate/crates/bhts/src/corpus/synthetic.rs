use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::corpus::utt::format_annotation;
use crate::frontend::annotation::{
    PhoneTiming, PhraseAnnotation, PosTag, ProsodicWord, SentenceType, Syllable,
    UtteranceAnnotation, WordToken,
};
use crate::frontend::{assign_tones, phoneme, phoneme_inventory, PhonemeClass};
use crate::signal::{generate_excitation, mlsa_synthesize, write_wav, AnalysisConfig, F0Track};
use crate::{Error, Result};

const SPEAKER_SEED: u64 = 0x5bea_ce01;
const SIL_FRAMES: usize = 8;

pub struct SyntheticCorpusSpec {
    pub phones: Vec<String>,
    pub num_utterances: usize,
    pub seed: u64,
    pub config: AnalysisConfig,
}

impl SyntheticCorpusSpec {
    /// Default phone subset: voiced consonants only, so that every non-silence
    /// frame carries pitch and spectra stay comparable across renderings.
    pub fn new(num_utterances: usize, seed: u64) -> Self {
        let phones = ["b", "d", "g", "j", "m", "n", "l", "r", "a", "i", "u", "e", "O"];
        SyntheticCorpusSpec {
            phones: phones.iter().map(|s| s.to_string()).collect(),
            num_utterances,
            seed,
            config: AnalysisConfig::default(),
        }
    }
}

/// Fixed simulated speaker: per-phone target mel-cepstrum and duration.
/// Drawn over the whole inventory in inventory order from a constant seed, so
/// a phone's voice is the same no matter which subset a corpus uses.
struct Speaker {
    targets: BTreeMap<String, Vec<f64>>,
    durations: BTreeMap<String, usize>,
}

fn build_speaker(order: usize) -> Speaker {
    let mut rng = ChaCha12Rng::seed_from_u64(SPEAKER_SEED);
    let mut targets = BTreeMap::new();
    let mut durations = BTreeMap::new();
    for ph in phoneme_inventory() {
        let mut mcep = vec![0.0; order + 1];
        mcep[0] = rng.gen_range(-3.4..-2.8);
        // c1 stays positive: the spectral tilt keeps pulse energy low-pass,
        // which real voices have and pitch tracking on click trains needs.
        mcep[1] = rng.gen_range(0.8..1.1);
        for (m, c) in mcep.iter_mut().enumerate().skip(2) {
            let bound = 0.3 * 0.8f64.powi(m as i32 - 1);
            *c = rng.gen_range(-bound..bound);
        }
        let frames = match ph.class {
            PhonemeClass::Vowel => rng.gen_range(10..=16),
            PhonemeClass::Consonant => rng.gen_range(6..=10),
            PhonemeClass::Silence => SIL_FRAMES,
        };
        if ph.class == PhonemeClass::Silence {
            mcep = vec![0.0; order + 1];
            mcep[0] = -8.0;
        }
        targets.insert(ph.symbol.to_string(), mcep);
        durations.insert(ph.symbol.to_string(), frames);
    }
    Speaker { targets, durations }
}

/// Planted F0 contour endpoints in Hz, by sentence type.
fn contour(sentence_type: SentenceType) -> (f64, f64) {
    if sentence_type == SentenceType::YesnoQuestion {
        (155.0, 178.0)
    } else {
        (175.0, 155.0)
    }
}

struct Draft {
    annotation: UtteranceAnnotation,
    phone_frames: Vec<(String, usize, Option<usize>)>,
}

fn draw_utterance(id: String, rng: &mut ChaCha12Rng, spec: &SyntheticCorpusSpec, speaker: &Speaker) -> Result<Draft> {
    let consonants: Vec<&String> = spec
        .phones
        .iter()
        .filter(|p| phoneme(p).map(|ph| ph.class) == Some(PhonemeClass::Consonant))
        .collect();
    let vowels: Vec<&String> = spec
        .phones
        .iter()
        .filter(|p| phoneme(p).map(|ph| ph.class) == Some(PhonemeClass::Vowel))
        .collect();
    if consonants.is_empty() || vowels.is_empty() {
        return Err(Error::Corpus(
            "synthetic phone subset needs at least one consonant and one vowel".into(),
        ));
    }

    let sentence_type = if rng.gen_range(0..4) == 0 {
        SentenceType::YesnoQuestion
    } else {
        SentenceType::SimpleAffirmativeVerb
    };
    let n_words = rng.gen_range(2..=4);
    let nonfinal_pos = [PosTag::Nn, PosTag::Nn, PosTag::Adj, PosTag::Pron, PosTag::Adv];

    let mut words: Vec<WordToken> = Vec::with_capacity(n_words);
    for w in 0..n_words {
        let pos = if w + 1 == n_words {
            PosTag::Vf
        } else {
            nonfinal_pos[rng.gen_range(0..nonfinal_pos.len())]
        };
        let n_syls = rng.gen_range(1..=2);
        let mut phonemes = Vec::new();
        let mut syllables = Vec::new();
        for s in 0..n_syls {
            let start = phonemes.len();
            phonemes.push(consonants[rng.gen_range(0..consonants.len())].clone());
            phonemes.push(vowels[rng.gen_range(0..vowels.len())].clone());
            if rng.gen_range(0..10) < 3 {
                phonemes.push(consonants[rng.gen_range(0..consonants.len())].clone());
            }
            syllables.push(Syllable {
                phonemes: start..phonemes.len(),
                stressed: s == 0,
            });
        }
        words.push(WordToken {
            orthography: String::new(),
            pos,
            hyphenated: false,
            phonemes,
            syllables,
        });
    }

    let (tones, endtone) = assign_tones(sentence_type, n_words, None)?;
    let prosodic_words: Vec<ProsodicWord> = words
        .into_iter()
        .zip(tones)
        .map(|(word, tone)| ProsodicWord {
            words: vec![word],
            tone,
            stress_syllable: 0,
        })
        .collect();

    let total_syls: usize = prosodic_words.iter().map(|pw| pw.syllable_count()).sum();
    // (symbol, frames, global syllable index) per phone, silences excluded
    // from the syllable count.
    let mut phone_frames: Vec<(String, usize, Option<usize>)> = Vec::new();
    phone_frames.push(("sil".to_string(), SIL_FRAMES, None));
    let mut syl_index = 0usize;
    for pw in &prosodic_words {
        for word in &pw.words {
            for syl in &word.syllables {
                for sym in &word.phonemes[syl.phonemes.clone()] {
                    phone_frames.push((sym.clone(), speaker.durations[sym], Some(syl_index)));
                }
                syl_index += 1;
            }
        }
    }
    debug_assert_eq!(syl_index, total_syls);
    phone_frames.push(("sil".to_string(), SIL_FRAMES, None));

    let frame_secs = spec.config.frame_shift as f64 / spec.config.sample_rate as f64;
    let mut alignments = Vec::with_capacity(phone_frames.len());
    let mut cursor = 0usize;
    for (_, frames, _) in &phone_frames {
        let start_ms = (cursor as f64 * frame_secs * 1000.0).round() as u64;
        cursor += frames;
        let end_ms = (cursor as f64 * frame_secs * 1000.0).round() as u64;
        alignments.push(PhoneTiming {
            start: start_ms as f64 / 1000.0,
            end: end_ms as f64 / 1000.0,
        });
    }

    let annotation = UtteranceAnnotation {
        id,
        sentence_type,
        phrases: vec![PhraseAnnotation {
            prosodic_words,
            endtone,
        }],
        initial_silence: true,
        final_silence: true,
        alignments: Some(alignments),
    };
    annotation.validate()?;
    Ok(Draft {
        annotation,
        phone_frames,
    })
}

fn render(draft: &Draft, spec: &SyntheticCorpusSpec, speaker: &Speaker, noise_seed: u64) -> Result<crate::signal::Waveform> {
    let (start_hz, end_hz) = contour(draft.annotation.sentence_type);
    let total_syls = draft
        .phone_frames
        .iter()
        .filter_map(|(_, _, s)| *s)
        .max()
        .map_or(1, |m| m + 1);
    let mut mcep_frames = Vec::new();
    let mut f0 = Vec::new();
    for (sym, frames, syl) in &draft.phone_frames {
        let log_f0 = syl.filter(|_| phoneme(sym).is_some_and(|p| p.voiced)).map(|s| {
            let rel = if total_syls > 1 {
                s as f64 / (total_syls - 1) as f64
            } else {
                0.5
            };
            start_hz.ln() + rel * (end_hz.ln() - start_hz.ln())
        });
        let target = &speaker.targets[sym];
        for _ in 0..*frames {
            mcep_frames.push(target.clone());
            f0.push(log_f0);
        }
    }
    let track = F0Track(f0);
    let excitation = generate_excitation(
        &track,
        spec.config.frame_shift,
        spec.config.sample_rate,
        noise_seed,
    );
    mlsa_synthesize(
        &mcep_frames,
        spec.config.alpha,
        spec.config.frame_shift,
        &excitation,
    )
}

/// Writes `num_utterances` rendered utterances under `root` in the corpus
/// layout (`wav/<id>.wav`, `utt/<id>.utt`) and returns the ids.
pub fn generate_synthetic_corpus(spec: &SyntheticCorpusSpec, root: &Path) -> Result<Vec<String>> {
    if spec.num_utterances == 0 {
        return Err(Error::Corpus("num_utterances must be at least 1".into()));
    }
    spec.config.validate()?;
    let speaker = build_speaker(spec.config.mcep_order);
    fs::create_dir_all(root.join("wav"))
        .and_then(|_| fs::create_dir_all(root.join("utt")))
        .map_err(|e| Error::Corpus(format!("cannot create corpus dirs under {}: {e}", root.display())))?;

    let mut ids = Vec::with_capacity(spec.num_utterances);
    for i in 0..spec.num_utterances {
        let id = format!("syn{:04}", i + 1);
        let mut rng = ChaCha12Rng::seed_from_u64(spec.seed.wrapping_add(i as u64));
        let draft = draw_utterance(id.clone(), &mut rng, spec, &speaker)?;
        let noise_seed = rng.gen::<u64>();
        let waveform = render(&draft, spec, &speaker, noise_seed)?;
        write_wav(&root.join("wav").join(format!("{id}.wav")), &waveform)?;
        let text = format_annotation(&draft.annotation)?;
        fs::write(root.join("utt").join(format!("{id}.utt")), text)
            .map_err(|e| Error::Corpus(format!("cannot write {id}.utt: {e}")))?;
        ids.push(id);
    }
    Ok(ids)
}
