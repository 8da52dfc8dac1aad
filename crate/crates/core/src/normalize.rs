//! Name romanization.
//!
//! Every name entering the engine, in Cyrillic or Latin script, is reduced to
//! a [`CanonicalName`]: lowercase ASCII letters, hyphens, apostrophes and
//! single spaces between tokens. Cyrillic letters are mapped through a
//! [`RomanizationTable`]; the default one is the BGN/PCGN Russian table shipped
//! in `data/bgn_russian.tsv`.

use std::borrow::Borrow;
use std::collections::HashMap;
use std::fmt;
use std::ops::Deref;
use std::sync::OnceLock;

use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};

const BGN_RUSSIAN: &str = include_str!("../data/bgn_russian.tsv");

/// Letters after which a flagged `after-vowel` rule applies.
const VOWEL_CONTEXT: &[char] = &['а', 'е', 'ё', 'и', 'о', 'у', 'ы', 'э', 'ю', 'я', 'й', 'ъ', 'ь'];

/// A name in canonical form. Construct with [`romanize`] or
/// [`RomanizationTable::romanize`].
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalName(String);

impl CanonicalName {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// First character of the name. Canonical names never start with
    /// punctuation, so this is always a letter.
    pub fn first_letter(&self) -> char {
        first_letter(&self.0)
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl Deref for CanonicalName {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl AsRef<str> for CanonicalName {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for CanonicalName {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CanonicalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for CanonicalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(&self.0, f)
    }
}

/// First character of a canonical name string. Used as the blocking key.
pub fn first_letter(name: &str) -> char {
    name.chars().next().expect("canonical names are non-empty")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Position {
    Initial,
    AfterVowel,
}

#[derive(Debug, Clone, Default)]
struct LetterRules {
    default: Option<String>,
    initial: Option<String>,
    after_vowel: Option<String>,
}

/// Cyrillic to Latin letter table with positional rules.
#[derive(Debug, Clone)]
pub struct RomanizationTable {
    rules: HashMap<char, LetterRules>,
}

impl RomanizationTable {
    /// The embedded BGN/PCGN Russian table.
    pub fn bgn() -> &'static RomanizationTable {
        static TABLE: OnceLock<RomanizationTable> = OnceLock::new();
        TABLE.get_or_init(|| RomanizationTable::parse(BGN_RUSSIAN).expect("embedded romanization table is valid"))
    }

    /// Parses the `<cyrillic>\t<latin>[\t<flag>]` line format. `#` starts a
    /// comment line; a lone letter maps to the empty string.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rules: HashMap<char, LetterRules> = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end_matches('\r');
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split('\t');
            let source = fields.next().unwrap_or_default();
            let mut chars = source.chars();
            let letter = match (chars.next(), chars.next()) {
                (Some(c), None) => c,
                _ => {
                    return Err(Error::Table {
                        line: line_no,
                        message: format!("expected a single source letter, got {source:?}"),
                    })
                }
            };
            let latin = fields.next().unwrap_or_default();
            if !latin.chars().all(|c| c.is_ascii_lowercase() || c == '\'') {
                return Err(Error::Table {
                    line: line_no,
                    message: format!("replacement {latin:?} is not lowercase ASCII"),
                });
            }
            let position = match fields.next() {
                None | Some("") => None,
                Some("initial") => Some(Position::Initial),
                Some("after-vowel") => Some(Position::AfterVowel),
                Some(other) => {
                    return Err(Error::Table {
                        line: line_no,
                        message: format!("unknown position flag {other:?}"),
                    })
                }
            };
            if fields.next().is_some() {
                return Err(Error::Table {
                    line: line_no,
                    message: "too many fields".into(),
                });
            }
            let entry = rules.entry(letter).or_default();
            let slot = match position {
                None => &mut entry.default,
                Some(Position::Initial) => &mut entry.initial,
                Some(Position::AfterVowel) => &mut entry.after_vowel,
            };
            if slot.is_some() {
                return Err(Error::Table {
                    line: line_no,
                    message: format!("duplicate rule for {letter:?}"),
                });
            }
            *slot = Some(latin.to_string());
        }
        for (letter, r) in &rules {
            if r.default.is_none() {
                return Err(Error::Table {
                    line: 0,
                    message: format!("{letter:?} has positional rules but no default"),
                });
            }
        }
        Ok(RomanizationTable { rules })
    }

    fn lookup(&self, letter: char, prev: Option<char>) -> Option<&str> {
        let r = self.rules.get(&letter)?;
        let initial = prev.is_none_or(|p| !p.is_alphabetic());
        if initial {
            if let Some(s) = &r.initial {
                return Some(s);
            }
        }
        if prev.is_some_and(|p| VOWEL_CONTEXT.contains(&p)) {
            if let Some(s) = &r.after_vowel {
                return Some(s);
            }
        }
        r.default.as_deref()
    }

    /// Romanizes and canonicalizes a raw name.
    pub fn romanize(&self, raw: &str) -> Result<CanonicalName> {
        let lowered: Vec<char> = raw.trim().chars().flat_map(char::to_lowercase).collect();
        let mut out = String::with_capacity(lowered.len() + 4);
        let mut prev: Option<char> = None;
        for &c in &lowered {
            if let Some(latin) = self.lookup(c, prev) {
                out.push_str(latin);
            } else if c.is_ascii_lowercase() || c == '-' {
                out.push(c);
            } else if matches!(c, '\'' | '\u{2019}' | '\u{02bc}' | '`' | '\u{02b9}') {
                out.push('\'');
            } else if c.is_whitespace() {
                out.push(' ');
            } else if c.is_alphabetic() {
                fold_latin(c, &mut out);
            }
            prev = Some(c);
        }

        let mut canonical = String::with_capacity(out.len());
        for token in out.split(' ') {
            let token = token.trim_matches(|c| c == '-' || c == '\'');
            if token.is_empty() {
                continue;
            }
            if !canonical.is_empty() {
                canonical.push(' ');
            }
            canonical.push_str(token);
        }
        if canonical.is_empty() {
            return Err(Error::EmptyName(raw.to_string()));
        }
        Ok(CanonicalName(canonical))
    }
}

/// Folds an accented or special Latin letter to ASCII; letters of other
/// scripts are dropped.
fn fold_latin(c: char, out: &mut String) {
    let special = match c {
        'ß' => "ss",
        'æ' => "ae",
        'œ' => "oe",
        'ø' => "o",
        'ł' => "l",
        'đ' | 'ð' => "d",
        'þ' => "th",
        'ı' => "i",
        _ => "",
    };
    if !special.is_empty() {
        out.push_str(special);
        return;
    }
    for d in std::iter::once(c).nfd() {
        if d.is_ascii_lowercase() {
            out.push(d);
        }
    }
}

/// Romanizes with the default BGN table.
pub fn romanize(raw: &str) -> Result<CanonicalName> {
    RomanizationTable::bgn().romanize(raw)
}
