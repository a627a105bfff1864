use std::collections::BTreeSet;

use crate::frontend::annotation::{EndTone, PosTag};
use crate::frontend::label::FieldValue;
use crate::frontend::{ContextLabel, Phoneme, PhonemeClass};

/// Yes/no test on a single label field: set membership for categorical
/// fields, threshold or equality for numeric ones. Total over the field's
/// domain; a kind mismatch answers "no".
#[derive(Debug, Clone, PartialEq)]
pub enum Predicate {
    InSet(BTreeSet<String>),
    LessEq(u32),
    Eq(u32),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Question {
    pub name: String,
    pub field: String,
    pub predicate: Predicate,
}

impl Question {
    pub fn answer(&self, label: &ContextLabel) -> bool {
        match (label.field(&self.field), &self.predicate) {
            (Some(FieldValue::Sym(v)), Predicate::InSet(set)) => set.contains(v),
            (Some(FieldValue::Num(n)), Predicate::LessEq(t)) => n <= *t,
            (Some(FieldValue::Num(n)), Predicate::Eq(t)) => n == *t,
            _ => false,
        }
    }
}

const QUINPHONE_SLOTS: [&str; 5] = ["p1", "p2", "p3", "p4", "p5"];

const NUMERIC_FIELDS: [&str; 28] = [
    "pp", "ps", "sph_p", "sph_c", "sph_n", "spw", "ssb", "ssa", "sds", "sns", "wsy_p", "wsy_c",
    "wsy_n", "wpp", "wcb", "wca", "wdc", "wnc", "fsy_p", "fsy_c", "fsy_n", "fw_p", "fw_c", "fw_n",
    "fpu", "usy", "uw", "up",
];

const STRESS_FIELDS: [&str; 3] = ["sstr_p", "sstr_c", "sstr_n"];
const POS_FIELDS: [&str; 3] = ["wpos_p", "wpos_c", "wpos_n"];

fn title_case(attr: &str) -> String {
    attr.split('-')
        .map(|part| {
            let mut chars = part.chars();
            match chars.next() {
                Some(first) => first.to_uppercase().chain(chars).collect::<String>(),
                None => String::new(),
            }
        })
        .collect::<Vec<_>>()
        .join("-")
}

fn distinct<'a>(values: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = Vec::new();
    for v in values {
        if !v.is_empty() && !seen.contains(&v) {
            seen.push(v);
        }
    }
    seen
}

fn membership(slot: &str, name: &str, symbols: impl Iterator<Item = &'static str>) -> Question {
    Question {
        name: format!("{slot}-{name}"),
        field: slot.to_string(),
        predicate: Predicate::InSet(symbols.map(str::to_string).collect()),
    }
}

/// The full question inventory: phonetic-class and identity questions for
/// every quinphone slot, threshold questions for the numeric fields, and
/// per-value questions for POS, endtone and stress fields.
pub fn generate_question_set(inventory: &[Phoneme]) -> Vec<Question> {
    let consonants = |pred: &dyn Fn(&Phoneme) -> bool| {
        inventory
            .iter()
            .filter(|p| p.class == PhonemeClass::Consonant)
            .filter(|p| pred(p))
            .map(|p| p.symbol)
            .collect::<Vec<_>>()
    };
    let vowels = |pred: &dyn Fn(&Phoneme) -> bool| {
        inventory
            .iter()
            .filter(|p| p.class == PhonemeClass::Vowel)
            .filter(|p| pred(p))
            .map(|p| p.symbol)
            .collect::<Vec<_>>()
    };
    let places = distinct(inventory.iter().map(|p| p.place));
    let manners = distinct(inventory.iter().map(|p| p.manner));
    let heights = distinct(inventory.iter().map(|p| p.vowel_height));
    let backnesses = distinct(inventory.iter().map(|p| p.vowel_backness));
    let roundings = distinct(inventory.iter().map(|p| p.vowel_rounding));

    let mut questions = Vec::new();
    for slot in QUINPHONE_SLOTS {
        for p in inventory {
            questions.push(membership(slot, &format!("PH-{}", p.symbol), std::iter::once(p.symbol)));
        }
        questions.push(membership(
            slot,
            "Consonant",
            consonants(&|_| true).into_iter(),
        ));
        questions.push(membership(slot, "Vowel", vowels(&|_| true).into_iter()));
        questions.push(membership(slot, "Silence", std::iter::once("sil")));
        for place in &places {
            questions.push(membership(
                slot,
                &format!("C-{}", title_case(place)),
                consonants(&|p| p.place == *place).into_iter(),
            ));
        }
        for manner in &manners {
            questions.push(membership(
                slot,
                &format!("C-{}", title_case(manner)),
                consonants(&|p| p.manner == *manner).into_iter(),
            ));
        }
        questions.push(membership(
            slot,
            "C-Voiced",
            consonants(&|p| p.voiced).into_iter(),
        ));
        questions.push(membership(
            slot,
            "C-Aspirated",
            consonants(&|p| p.aspirated).into_iter(),
        ));
        questions.push(membership(
            slot,
            "C-Voiced-Plosive",
            consonants(&|p| p.voiced && p.manner == "plosive").into_iter(),
        ));
        questions.push(membership(
            slot,
            "C-Unvoiced-Plosive",
            consonants(&|p| !p.voiced && p.manner == "plosive").into_iter(),
        ));
        for height in &heights {
            questions.push(membership(
                slot,
                &format!("V-{}", title_case(height)),
                vowels(&|p| p.vowel_height == *height).into_iter(),
            ));
        }
        for backness in &backnesses {
            questions.push(membership(
                slot,
                &format!("V-{}", title_case(backness)),
                vowels(&|p| p.vowel_backness == *backness).into_iter(),
            ));
        }
        for rounding in &roundings {
            questions.push(membership(
                slot,
                &format!("V-{}", title_case(rounding)),
                vowels(&|p| p.vowel_rounding == *rounding).into_iter(),
            ));
        }
        questions.push(membership(
            slot,
            "V-Nasal",
            vowels(&|p| p.nasal).into_iter(),
        ));
    }

    for field in NUMERIC_FIELDS {
        for t in 1..=10u32 {
            questions.push(Question {
                name: format!("{field}<={t}"),
                field: field.to_string(),
                predicate: Predicate::LessEq(t),
            });
        }
    }
    for field in POS_FIELDS {
        for tag in PosTag::ALL {
            questions.push(Question {
                name: format!("{field}={tag}"),
                field: field.to_string(),
                predicate: Predicate::InSet(std::iter::once(tag.to_string()).collect()),
            });
        }
    }
    for tone in EndTone::ALL {
        questions.push(Question {
            name: format!("ftone={tone}"),
            field: "ftone".to_string(),
            predicate: Predicate::InSet(std::iter::once(tone.to_string()).collect()),
        });
    }
    for field in STRESS_FIELDS {
        for v in 0..=1u32 {
            questions.push(Question {
                name: format!("{field}={v}"),
                field: field.to_string(),
                predicate: Predicate::Eq(v),
            });
        }
    }
    questions
}
