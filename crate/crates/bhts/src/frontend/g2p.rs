use std::path::Path;
use std::sync::OnceLock;

use super::phoneme::{is_vowel, phoneme};
use crate::{Error, Result};

const DEFAULT_RULES: &str = include_str!("../../data/g2p_default.rules");

#[derive(Debug, Clone)]
struct Rule {
    graphemes: String,
    char_len: usize,
    symbols: Vec<String>,
}

/// Ordered longest-match rewrite rules: at each position the longest matching
/// grapheme sequence wins, ties broken by file order.
#[derive(Debug, Clone)]
pub struct G2pRuleTable {
    rules: Vec<Rule>,
    inherent: Option<String>,
}

impl G2pRuleTable {
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules = Vec::new();
        let mut inherent = None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches(['\r', '\n']);
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("!inherent") {
                let sym = rest.trim();
                if phoneme(sym).is_none() || !is_vowel(sym) {
                    return Err(Error::G2pRules {
                        line: line_no,
                        msg: format!("inherent symbol {sym:?} is not a vowel"),
                    });
                }
                inherent = Some(sym.to_string());
                continue;
            }
            let (graphemes, output) = line.split_once('\t').ok_or_else(|| Error::G2pRules {
                line: line_no,
                msg: "expected <graphemes> TAB <symbols>".into(),
            })?;
            if graphemes.is_empty() {
                return Err(Error::G2pRules {
                    line: line_no,
                    msg: "empty grapheme sequence".into(),
                });
            }
            let symbols: Vec<String> = output.split_whitespace().map(str::to_string).collect();
            for sym in &symbols {
                if phoneme(sym).is_none() {
                    return Err(Error::G2pRules {
                        line: line_no,
                        msg: format!("unknown phoneme symbol {sym:?}"),
                    });
                }
            }
            rules.push(Rule {
                char_len: graphemes.chars().count(),
                graphemes: graphemes.to_string(),
                symbols,
            });
        }
        // Stable sort keeps file order among equal lengths.
        rules.sort_by(|a, b| b.char_len.cmp(&a.char_len));
        Ok(G2pRuleTable { rules, inherent })
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// The table shipped with the crate.
    pub fn default_table() -> &'static G2pRuleTable {
        static TABLE: OnceLock<G2pRuleTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            G2pRuleTable::parse(DEFAULT_RULES).expect("shipped g2p table must parse")
        })
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// Rewrites one orthographic word into phoneme symbols.
pub fn g2p(word: &str, rules: &G2pRuleTable) -> Result<Vec<String>> {
    let mut out: Vec<String> = Vec::new();
    let mut rest = word;
    let mut offset = 0;
    while !rest.is_empty() {
        let hit = rules
            .rules
            .iter()
            .find(|r| rest.starts_with(r.graphemes.as_str()));
        match hit {
            Some(rule) => {
                out.extend(rule.symbols.iter().cloned());
                offset += rule.graphemes.len();
                rest = &rest[rule.graphemes.len()..];
            }
            None => {
                let grapheme: String = rest.chars().take(1).collect();
                return Err(Error::G2pNoRule { grapheme, offset });
            }
        }
    }
    if let Some(inherent) = &rules.inherent {
        let vowels = out.iter().filter(|s| is_vowel(s)).count();
        if vowels >= 2 && out.last() == Some(inherent) {
            out.pop();
        }
    }
    Ok(out)
}
