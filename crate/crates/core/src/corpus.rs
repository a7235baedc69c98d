//! Tokenized corpora and frequency-constrained vocabularies.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lang::Lang;

/// A monolingual corpus: one sentence per line, tokens separated by
/// whitespace. Corpora are assumed pre-tokenized; no case folding or
/// punctuation stripping happens here unless `lowercase` is requested.
#[derive(Debug, Clone)]
pub struct Corpus {
    language: Lang,
    source: Source,
    lowercase: bool,
}

#[derive(Debug, Clone)]
enum Source {
    Path(PathBuf),
    Memory(Arc<str>),
}

impl Corpus {
    pub fn from_path(language: Lang, path: impl Into<PathBuf>) -> Self {
        Corpus {
            language,
            source: Source::Path(path.into()),
            lowercase: false,
        }
    }

    /// In-memory corpus, mainly for tests and the synthetic generator.
    pub fn from_text(language: Lang, text: impl Into<String>) -> Self {
        Corpus {
            language,
            source: Source::Memory(Arc::from(text.into())),
            lowercase: false,
        }
    }

    /// Lowercase every token on read. Off by default.
    pub fn with_lowercase(mut self, lowercase: bool) -> Self {
        self.lowercase = lowercase;
        self
    }

    pub fn language(&self) -> &Lang {
        &self.language
    }

    pub fn path(&self) -> Option<&Path> {
        match &self.source {
            Source::Path(p) => Some(p),
            Source::Memory(_) => None,
        }
    }

    /// Stream sentences, invoking `f` with the tokens of each non-empty line.
    pub fn for_each_sentence<F>(&self, mut f: F) -> Result<()>
    where
        F: FnMut(&[&str]),
    {
        let lowercase = self.lowercase;
        let handle_line = |line: &str, f: &mut F| {
            if lowercase {
                let lowered: Vec<String> =
                    line.split_whitespace().map(str::to_lowercase).collect();
                let refs: Vec<&str> = lowered.iter().map(String::as_str).collect();
                if !refs.is_empty() {
                    f(&refs);
                }
            } else {
                let tokens: Vec<&str> = line.split_whitespace().collect();
                if !tokens.is_empty() {
                    f(&tokens);
                }
            }
        };
        match &self.source {
            Source::Path(path) => {
                let file = File::open(path).map_err(|e| Error::io(path, e))?;
                let mut reader = BufReader::new(file);
                let mut line = String::new();
                loop {
                    line.clear();
                    let n = reader
                        .read_line(&mut line)
                        .map_err(|e| Error::io(path, e))?;
                    if n == 0 {
                        break;
                    }
                    handle_line(&line, &mut f);
                }
            }
            Source::Memory(text) => {
                for line in text.lines() {
                    handle_line(line, &mut f);
                }
            }
        }
        Ok(())
    }

    /// Total tokens over a full pass.
    pub fn token_count(&self) -> Result<u64> {
        let mut total = 0u64;
        self.for_each_sentence(|sent| total += sent.len() as u64)?;
        Ok(total)
    }
}

/// A frequency-ranked token table.
///
/// Entries are sorted by count descending, ties broken by token codepoint
/// order, and truncated to `max_vocab`; every retained count is at least
/// `min_count`. Immutable after construction and safe to share across
/// threads.
#[derive(Debug, Clone)]
pub struct Vocabulary {
    entries: Vec<(String, u64)>,
    index: HashMap<String, usize>,
    total_tokens: u64,
    min_count: u64,
    max_vocab: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Rank of a token (0 = most frequent), if present.
    pub fn rank(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, rank: usize) -> &str {
        &self.entries[rank].0
    }

    pub fn count(&self, rank: usize) -> u64 {
        self.entries[rank].1
    }

    /// Corpus token count before any filtering.
    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn min_count(&self) -> u64 {
        self.min_count
    }

    pub fn max_vocab(&self) -> usize {
        self.max_vocab
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.entries.iter().map(|(t, c)| (t.as_str(), *c))
    }
}

/// Count tokens and build a [`Vocabulary`].
///
/// Streams the corpus once to count, then filters by `min_count`, sorts by
/// (count desc, token asc) and keeps the top `max_vocab` entries. Fails with
/// [`Error::EmptyVocabulary`] when nothing survives.
pub fn build_vocab(corpus: &Corpus, min_count: u64, max_vocab: usize) -> Result<Vocabulary> {
    assert!(min_count >= 1, "min_count must be at least 1");
    assert!(max_vocab >= 1, "max_vocab must be at least 1");

    let mut counts: HashMap<String, u64> = HashMap::new();
    let mut total_tokens = 0u64;
    corpus.for_each_sentence(|sent| {
        total_tokens += sent.len() as u64;
        for token in sent {
            match counts.get_mut(*token) {
                Some(c) => *c += 1,
                None => {
                    counts.insert((*token).to_string(), 1);
                }
            }
        }
    })?;

    let mut entries: Vec<(String, u64)> = counts
        .into_iter()
        .filter(|(_, c)| *c >= min_count)
        .collect();
    if entries.is_empty() {
        return Err(Error::EmptyVocabulary);
    }
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(max_vocab);

    let index = entries
        .iter()
        .enumerate()
        .map(|(i, (t, _))| (t.clone(), i))
        .collect();
    Ok(Vocabulary {
        entries,
        index,
        total_tokens,
        min_count,
        max_vocab,
    })
}

/// Probability of keeping an occurrence of a token during subsampling.
///
/// With `f = count / total_tokens`, returns
/// `min(1, (sqrt(f / threshold) + 1) * threshold / f)`. Rare tokens
/// (`f <= threshold`) are always kept; the keep probability decreases
/// monotonically beyond that.
pub fn keep_probability(count: u64, total_tokens: u64, threshold: f64) -> f64 {
    debug_assert!(count >= 1 && count <= total_tokens);
    debug_assert!(threshold > 0.0 && threshold <= 1.0);
    let f = count as f64 / total_tokens as f64;
    let p = ((f / threshold).sqrt() + 1.0) * threshold / f;
    p.min(1.0)
}
