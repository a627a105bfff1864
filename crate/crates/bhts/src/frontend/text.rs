use super::annotation::{PosTag, SentenceType};
use crate::{Error, Result};

/// One token of pre-tagged input text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedWord {
    pub orthography: String,
    pub pos: PosTag,
    pub focused: bool,
}

impl TaggedWord {
    pub fn hyphenated(&self) -> bool {
        self.orthography.contains('-')
    }
}

/// One parsed input line: sentence type plus phrases of tagged words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaggedSentence {
    pub sentence_type: SentenceType,
    pub phrases: Vec<Vec<TaggedWord>>,
}

/// Parses one line of tagged text: `type=<sentence-type>` followed by
/// `orthography/POS` tokens, `|` between phrases, `*` prefixing a focused
/// word. Punctuation tokens are dropped; they carry no phones.
pub fn parse_tagged_line(line: &str) -> Result<TaggedSentence> {
    let mut tokens = line.split_whitespace();
    let head = tokens
        .next()
        .ok_or_else(|| Error::Frontend("empty input line".into()))?;
    let type_str = head
        .strip_prefix("type=")
        .ok_or_else(|| Error::Frontend(format!("expected type=<sentence-type>, got {head:?}")))?;
    let sentence_type: SentenceType = type_str.parse()?;

    let mut phrases: Vec<Vec<TaggedWord>> = Vec::new();
    let mut current: Vec<TaggedWord> = Vec::new();
    for token in tokens {
        if token == "|" {
            if !current.is_empty() {
                phrases.push(std::mem::take(&mut current));
            }
            continue;
        }
        let (focused, body) = match token.strip_prefix('*') {
            Some(rest) => (true, rest),
            None => (false, token),
        };
        let (orth, tag) = body
            .rsplit_once('/')
            .ok_or_else(|| Error::Frontend(format!("token {token:?} lacks /POS")))?;
        if orth.is_empty() {
            return Err(Error::Frontend(format!("token {token:?} has empty orthography")));
        }
        let pos: PosTag = tag.parse()?;
        if pos == PosTag::Punc {
            continue;
        }
        current.push(TaggedWord {
            orthography: orth.to_string(),
            pos,
            focused,
        });
    }
    if !current.is_empty() {
        phrases.push(current);
    }
    if phrases.is_empty() {
        return Err(Error::Frontend("line contains no words".into()));
    }
    Ok(TaggedSentence {
        sentence_type,
        phrases,
    })
}
