//! Language identifiers and language-tagged words.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A language identifier, conventionally a lowercase ISO code ("eng", "kaz").
///
/// Must be nonempty and contain neither whitespace nor `':'` — the colon
/// separates the language tag from the word in multilingual keys.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lang(Arc<str>);

impl Lang {
    pub fn new(id: &str) -> Result<Self> {
        if id.is_empty() || id.contains(':') || id.chars().any(char::is_whitespace) {
            return Err(Error::InvalidLang(id.to_string()));
        }
        Ok(Lang(Arc::from(id)))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Lang {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Lang {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Lang::new(s)
    }
}

/// A word tagged with the language it belongs to.
///
/// Serialized as `lang:word`; the split is at the first colon, so words may
/// themselves contain colons. Tagging keeps cross-language homographs
/// ("gift" in English vs German) apart once spaces are merged.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TaggedWord {
    pub lang: Lang,
    pub word: String,
}

impl TaggedWord {
    pub fn new(lang: Lang, word: impl Into<String>) -> Self {
        TaggedWord {
            lang,
            word: word.into(),
        }
    }

    /// Parse a `lang:word` key.
    pub fn parse(key: &str) -> Result<Self> {
        let (lang, word) = key
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("key {key:?} is missing the lang: tag")))?;
        Ok(TaggedWord::new(Lang::new(lang)?, word))
    }
}

impl fmt::Display for TaggedWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.lang, self.word)
    }
}
