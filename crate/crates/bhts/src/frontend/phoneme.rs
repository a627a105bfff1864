use std::collections::HashMap;
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhonemeClass {
    Vowel,
    Consonant,
    Silence,
}

/// One entry of the fixed 48-phoneme inventory. Attribute strings are empty
/// where an attribute does not apply (e.g. vowel fields on consonants).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Phoneme {
    pub symbol: &'static str,
    pub class: PhonemeClass,
    pub place: &'static str,
    pub manner: &'static str,
    pub voiced: bool,
    pub aspirated: bool,
    pub nasal: bool,
    pub vowel_height: &'static str,
    pub vowel_backness: &'static str,
    pub vowel_rounding: &'static str,
}

const fn consonant(
    symbol: &'static str,
    place: &'static str,
    manner: &'static str,
    voiced: bool,
    aspirated: bool,
) -> Phoneme {
    Phoneme {
        symbol,
        class: PhonemeClass::Consonant,
        place,
        manner,
        voiced,
        aspirated,
        nasal: false,
        vowel_height: "",
        vowel_backness: "",
        vowel_rounding: "",
    }
}

const fn nasal_consonant(symbol: &'static str, place: &'static str) -> Phoneme {
    Phoneme {
        symbol,
        class: PhonemeClass::Consonant,
        place,
        manner: "nasal",
        voiced: true,
        aspirated: false,
        nasal: true,
        vowel_height: "",
        vowel_backness: "",
        vowel_rounding: "",
    }
}

const fn vowel(
    symbol: &'static str,
    height: &'static str,
    backness: &'static str,
    rounding: &'static str,
    nasal: bool,
) -> Phoneme {
    Phoneme {
        symbol,
        class: PhonemeClass::Vowel,
        place: "",
        manner: "",
        voiced: true,
        aspirated: false,
        nasal,
        vowel_height: height,
        vowel_backness: backness,
        vowel_rounding: rounding,
    }
}

/// 33 consonants, 7 oral vowels, 7 nasal vowels, 1 silence.
static INVENTORY: [Phoneme; 48] = [
    consonant("p", "bilabial", "plosive", false, false),
    consonant("ph", "bilabial", "plosive", false, true),
    consonant("b", "bilabial", "plosive", true, false),
    consonant("bh", "bilabial", "plosive", true, true),
    consonant("t", "dental", "plosive", false, false),
    consonant("th", "dental", "plosive", false, true),
    consonant("d", "dental", "plosive", true, false),
    consonant("dh", "dental", "plosive", true, true),
    consonant("tt", "retroflex", "plosive", false, false),
    consonant("tth", "retroflex", "plosive", false, true),
    consonant("dd", "retroflex", "plosive", true, false),
    consonant("ddh", "retroflex", "plosive", true, true),
    consonant("k", "velar", "plosive", false, false),
    consonant("kh", "velar", "plosive", false, true),
    consonant("g", "velar", "plosive", true, false),
    consonant("gh", "velar", "plosive", true, true),
    consonant("c", "alveolar", "affricate", false, false),
    consonant("ch", "alveolar", "affricate", false, true),
    consonant("j", "alveolar", "affricate", true, false),
    consonant("jh", "alveolar", "affricate", true, true),
    consonant("s", "alveolar", "fricative", false, false),
    consonant("sh", "postalveolar", "fricative", false, false),
    consonant("h", "glottal", "fricative", false, false),
    nasal_consonant("m", "bilabial"),
    nasal_consonant("n", "dental"),
    nasal_consonant("ng", "velar"),
    nasal_consonant("nn", "palatal"),
    consonant("l", "dental", "lateral", true, false),
    consonant("r", "alveolar", "trill", true, false),
    consonant("rr", "postalveolar", "flap", true, false),
    consonant("rrh", "postalveolar", "flap", true, true),
    consonant("y", "palatal", "approximant", true, false),
    consonant("w", "bilabial", "approximant", true, false),
    vowel("u", "close", "back", "rounded", false),
    vowel("o", "close-mid", "back", "rounded", false),
    vowel("O", "open", "back", "rounded", false),
    vowel("a", "open", "central", "unrounded", false),
    vowel("E", "open-mid", "front", "unrounded", false),
    vowel("e", "close-mid", "front", "unrounded", false),
    vowel("i", "close", "front", "unrounded", false),
    vowel("u~", "close", "back", "rounded", true),
    vowel("o~", "close-mid", "back", "rounded", true),
    vowel("O~", "open", "back", "rounded", true),
    vowel("a~", "open", "central", "unrounded", true),
    vowel("E~", "open-mid", "front", "unrounded", true),
    vowel("e~", "close-mid", "front", "unrounded", true),
    vowel("i~", "close", "front", "unrounded", true),
    Phoneme {
        symbol: "sil",
        class: PhonemeClass::Silence,
        place: "",
        manner: "",
        voiced: false,
        aspirated: false,
        nasal: false,
        vowel_height: "",
        vowel_backness: "",
        vowel_rounding: "",
    },
];

/// The fixed inventory in stable order.
pub fn phoneme_inventory() -> &'static [Phoneme] {
    &INVENTORY
}

/// Looks up one phoneme by symbol.
pub fn phoneme(symbol: &str) -> Option<&'static Phoneme> {
    static INDEX: OnceLock<HashMap<&'static str, &'static Phoneme>> = OnceLock::new();
    INDEX
        .get_or_init(|| INVENTORY.iter().map(|p| (p.symbol, p)).collect())
        .get(symbol)
        .copied()
}

pub fn is_vowel(symbol: &str) -> bool {
    phoneme(symbol).is_some_and(|p| p.class == PhonemeClass::Vowel)
}

pub fn is_silence(symbol: &str) -> bool {
    symbol == "sil"
}
