//! Bilingual dictionaries: loading, pivoting, accumulation, vocabulary
//! restriction.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::{debug, warn};

use crate::corpus::Vocabulary;
use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::lang::{Lang, TaggedWord};

/// A set of translation pairs between two languages.
///
/// Translation is many-to-many: a source word may map to several target
/// words and vice versa. Pairs are a set — duplicates collapse.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    src_lang: Lang,
    trg_lang: Lang,
    pairs: BTreeSet<(String, String)>,
}

impl Lexicon {
    pub fn new(src_lang: Lang, trg_lang: Lang) -> Result<Self> {
        if src_lang == trg_lang {
            return Err(Error::Config(format!(
                "lexicon source and target language are both {src_lang:?}"
            )));
        }
        Ok(Lexicon {
            src_lang,
            trg_lang,
            pairs: BTreeSet::new(),
        })
    }

    pub fn from_pairs<I, S, T>(src_lang: Lang, trg_lang: Lang, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut lex = Lexicon::new(src_lang, trg_lang)?;
        for (s, t) in pairs {
            lex.pairs.insert((s.into(), t.into()));
        }
        Ok(lex)
    }

    pub fn src_lang(&self) -> &Lang {
        &self.src_lang
    }

    pub fn trg_lang(&self) -> &Lang {
        &self.trg_lang
    }

    /// Number of unique pairs.
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, src: &str, trg: &str) -> bool {
        self.pairs.contains(&(src.to_string(), trg.to_string()))
    }

    /// Pairs in (src word, trg word) codepoint order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.pairs.iter().map(|(s, t)| (s.as_str(), t.as_str()))
    }

    pub fn insert(&mut self, src: impl Into<String>, trg: impl Into<String>) -> bool {
        self.pairs.insert((src.into(), trg.into()))
    }

    /// Count of distinct source words.
    pub fn unique_source_words(&self) -> usize {
        self.pairs
            .iter()
            .map(|(s, _)| s.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// Count of distinct target words.
    pub fn unique_target_words(&self) -> usize {
        self.pairs
            .iter()
            .map(|(_, t)| t.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    /// The same pairs with source and target swapped.
    pub fn reversed(&self) -> Lexicon {
        Lexicon {
            src_lang: self.trg_lang.clone(),
            trg_lang: self.src_lang.clone(),
            pairs: self
                .pairs
                .iter()
                .map(|(s, t)| (t.clone(), s.clone()))
                .collect(),
        }
    }

    /// Gold target words for a source word.
    pub fn translations_of(&self, src: &str) -> Vec<&str> {
        self.pairs
            .iter()
            .filter(|(s, _)| s == src)
            .map(|(_, t)| t.as_str())
            .collect()
    }
}

/// Load a dictionary file: UTF-8, one pair per line,
/// `src_word<whitespace>trg_word`. Duplicate lines collapse; an empty file
/// yields an empty lexicon with a warning.
pub fn load_lexicon(path: impl AsRef<Path>, src_lang: Lang, trg_lang: Lang) -> Result<Lexicon> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);

    let mut lex = Lexicon::new(src_lang, trg_lang)?;
    let mut lines = 0usize;
    let mut duplicates = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let (src, trg) = match (fields.next(), fields.next(), fields.next()) {
            (Some(s), Some(t), None) => (s, t),
            _ => {
                return Err(Error::parse(
                    path,
                    idx + 1,
                    format!("expected exactly 2 whitespace-separated fields, got line {line:?}"),
                ))
            }
        };
        lines += 1;
        if !lex.insert(src, trg) {
            duplicates += 1;
        }
    }
    if lines == 0 {
        warn!("lexicon {} is empty", path.display());
    }
    if duplicates > 0 {
        debug!(
            "lexicon {}: collapsed {duplicates} duplicate pairs",
            path.display()
        );
    }
    debug!(
        "lexicon {}: {} pairs, {} unique source words, {} unique target words",
        path.display(),
        lex.len(),
        lex.unique_source_words(),
        lex.unique_target_words()
    );
    Ok(lex)
}

/// Derive a dictionary between two languages by joining their dictionaries
/// with a shared pivot language on the pivot word.
///
/// Both inputs must have the same source (pivot) language; the result maps
/// `l_ek.trg_lang` to `l_ei.trg_lang` and contains exactly the pairs
/// `(t_k, t_i)` such that some pivot word translates to both.
pub fn pivot(l_ek: &Lexicon, l_ei: &Lexicon) -> Result<Lexicon> {
    if l_ek.src_lang != l_ei.src_lang {
        return Err(Error::Config(format!(
            "pivot languages differ: {} vs {}",
            l_ek.src_lang, l_ei.src_lang
        )));
    }
    if l_ek.trg_lang == l_ei.trg_lang {
        return Err(Error::Config(format!(
            "pivoting {}-{} and {}-{} would relate {} to itself",
            l_ek.src_lang, l_ek.trg_lang, l_ei.src_lang, l_ei.trg_lang, l_ek.trg_lang
        )));
    }

    let mut by_pivot: HashMap<&str, Vec<&str>> = HashMap::new();
    for (p, t_k) in l_ek.iter() {
        by_pivot.entry(p).or_default().push(t_k);
    }
    let mut out = Lexicon::new(l_ek.trg_lang.clone(), l_ei.trg_lang.clone())?;
    for (p, t_i) in l_ei.iter() {
        if let Some(lefts) = by_pivot.get(p) {
            for t_k in lefts {
                out.insert(*t_k, t_i);
            }
        }
    }
    Ok(out)
}

/// A multi-source seed lexicon: source words carry their language tag so
/// anchors from different languages never collide. This is the union of the
/// seed lexicons of all earlier chain languages paired with the one being
/// trained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccumulatedLexicon {
    trg_lang: Lang,
    pairs: BTreeSet<(TaggedWord, String)>,
}

impl AccumulatedLexicon {
    pub fn trg_lang(&self) -> &Lang {
        &self.trg_lang
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TaggedWord, &str)> {
        self.pairs.iter().map(|(s, t)| (s, t.as_str()))
    }

    pub fn contains(&self, src: &TaggedWord, trg: &str) -> bool {
        self.pairs.contains(&(src.clone(), trg.to_string()))
    }
}

/// Union the given lexicons into one multi-source lexicon targeting
/// `trg_lang`. Source languages must be pairwise distinct and every input
/// must already target `trg_lang`.
pub fn accumulate(lexicons: &[&Lexicon], trg_lang: &Lang) -> Result<AccumulatedLexicon> {
    let mut seen_sources = BTreeSet::new();
    for lex in lexicons {
        if lex.trg_lang() != trg_lang {
            return Err(Error::Config(format!(
                "cannot accumulate {}-{} lexicon into a lexicon targeting {}",
                lex.src_lang(),
                lex.trg_lang(),
                trg_lang
            )));
        }
        if !seen_sources.insert(lex.src_lang().clone()) {
            return Err(Error::Config(format!(
                "duplicate source language {} in accumulation",
                lex.src_lang()
            )));
        }
    }
    let mut pairs = BTreeSet::new();
    for lex in lexicons {
        for (s, t) in lex.iter() {
            pairs.insert((TaggedWord::new(lex.src_lang().clone(), s), t.to_string()));
        }
    }
    Ok(AccumulatedLexicon {
        trg_lang: trg_lang.clone(),
        pairs,
    })
}

/// Why pairs were dropped by [`restrict_to_vocab`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DropReport {
    pub source_oov: usize,
    pub target_oov: usize,
}

impl DropReport {
    pub fn total(&self) -> usize {
        self.source_oov + self.target_oov
    }
}

/// Keep only pairs whose tagged source word exists in `src_space` and whose
/// target word is in `trg_vocab`. A pair missing on both sides counts as a
/// source drop.
pub fn restrict_to_vocab(
    lexicon: &AccumulatedLexicon,
    src_space: &EmbeddingSpace,
    trg_vocab: &Vocabulary,
) -> (AccumulatedLexicon, DropReport) {
    let mut report = DropReport::default();
    let mut pairs = BTreeSet::new();
    for (src, trg) in lexicon.iter() {
        if !src_space.contains(src) {
            report.source_oov += 1;
        } else if !trg_vocab.contains(trg) {
            report.target_oov += 1;
        } else {
            pairs.insert((src.clone(), trg.to_string()));
        }
    }
    (
        AccumulatedLexicon {
            trg_lang: lexicon.trg_lang.clone(),
            pairs,
        },
        report,
    )
}
