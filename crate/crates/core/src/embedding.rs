//! Language-tagged embedding spaces and the word2vec text interchange
//! format.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use indexmap::IndexMap;

use crate::error::{Error, Result};
use crate::lang::{Lang, TaggedWord};

/// A map from language-tagged word to a d-dimensional vector.
///
/// Entry order is preserved: concatenation appends, so a grown space
/// serializes with every earlier snapshot as a literal prefix. Vectors are
/// stored unnormalized; evaluation normalizes its own working copies.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSpace {
    dim: usize,
    entries: IndexMap<TaggedWord, Vec<f64>>,
    languages: BTreeMap<Lang, usize>,
}

impl EmbeddingSpace {
    pub fn new(dim: usize) -> Self {
        assert!(dim >= 1, "dim must be at least 1");
        EmbeddingSpace {
            dim,
            entries: IndexMap::new(),
            languages: BTreeMap::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, key: &TaggedWord) -> bool {
        self.entries.contains_key(key)
    }

    pub fn get(&self, key: &TaggedWord) -> Option<&[f64]> {
        self.entries.get(key).map(Vec::as_slice)
    }

    /// Languages present, in codepoint order.
    pub fn languages(&self) -> impl Iterator<Item = &Lang> {
        self.languages.keys()
    }

    pub fn has_language(&self, lang: &Lang) -> bool {
        self.languages.contains_key(lang)
    }

    /// Number of entries tagged with `lang`.
    pub fn language_len(&self, lang: &Lang) -> usize {
        self.languages.get(lang).copied().unwrap_or(0)
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = (&TaggedWord, &[f64])> {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn insert(&mut self, key: TaggedWord, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        if let Some(bad) = vector.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("vector for {key} contains {bad}")));
        }
        if self.entries.contains_key(&key) {
            return Err(Error::Config(format!("duplicate key {key}")));
        }
        *self.languages.entry(key.lang.clone()).or_insert(0) += 1;
        self.entries.insert(key, vector);
        Ok(())
    }

    /// The sub-space of entries tagged `lang`, in their original order.
    pub fn language_slice(&self, lang: &Lang) -> Result<EmbeddingSpace> {
        if !self.has_language(lang) {
            return Err(Error::UnknownLanguage(lang.to_string()));
        }
        let mut out = EmbeddingSpace::new(self.dim);
        for (key, vec) in &self.entries {
            if &key.lang == lang {
                out.insert(key.clone(), vec.clone())?;
            }
        }
        Ok(out)
    }
}

/// Disjoint union of two spaces: every entry of `m_prev` followed by every
/// entry of `e_new`, vectors bit-identical to their sources. The new space
/// must not share a language with the old one — a chain never revisits a
/// language.
pub fn concat(m_prev: &EmbeddingSpace, e_new: &EmbeddingSpace) -> Result<EmbeddingSpace> {
    if m_prev.dim != e_new.dim {
        return Err(Error::DimMismatch {
            expected: m_prev.dim,
            actual: e_new.dim,
        });
    }
    for lang in e_new.languages() {
        if m_prev.has_language(lang) {
            return Err(Error::LanguageCollision(lang.to_string()));
        }
    }
    let mut out = m_prev.clone();
    for (key, vec) in e_new.iter() {
        out.insert(key.clone(), vec.to_vec())?;
    }
    Ok(out)
}

/// Write the word2vec text format: a `<count> <dim>` header, then one line
/// per entry, `lang:word v1 ... v_dim`. Floats use the shortest decimal
/// representation that parses back to the identical value, so a save/load
/// round trip is exact.
pub fn save_text(space: &EmbeddingSpace, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if space.is_empty() {
        return Err(Error::Config(format!(
            "refusing to save empty embedding space to {}",
            path.display()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io_err = |e| Error::io(path, e);
    writeln!(w, "{} {}", space.len(), space.dim()).map_err(io_err)?;
    for (key, vec) in space.iter() {
        write!(w, "{key}").map_err(io_err)?;
        for v in vec {
            write!(w, " {v}").map_err(io_err)?;
        }
        writeln!(w).map_err(io_err)?;
    }
    w.flush().map_err(io_err)?;
    Ok(())
}

/// Read the format written by [`save_text`].
pub fn load_text(path: impl AsRef<Path>) -> Result<EmbeddingSpace> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);

    let mut header = String::new();
    reader
        .read_line(&mut header)
        .map_err(|e| Error::io(path, e))?;
    let mut fields = header.split_whitespace();
    let (count, dim) = match (
        fields.next().map(str::parse::<usize>),
        fields.next().map(str::parse::<usize>),
        fields.next(),
    ) {
        (Some(Ok(c)), Some(Ok(d)), None) if d >= 1 => (c, d),
        _ => {
            return Err(Error::parse(
                path,
                1,
                format!("expected header `<count> <dim>`, got {:?}", header.trim_end()),
            ))
        }
    };

    let mut space = EmbeddingSpace::new(dim);
    let mut line = String::new();
    let mut lineno = 1usize;
    loop {
        line.clear();
        let n = reader.read_line(&mut line).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        lineno += 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let key = fields.next().expect("non-empty line has a first field");
        let key = TaggedWord::parse(key)
            .map_err(|e| Error::parse(path, lineno, format!("bad key: {e}")))?;
        let mut vector = Vec::with_capacity(dim);
        for field in fields {
            let v: f64 = field.parse().map_err(|_| {
                Error::parse(path, lineno, format!("bad float {field:?}"))
            })?;
            vector.push(v);
        }
        if vector.len() != dim {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {dim} vector components, got {}", vector.len()),
            ));
        }
        space
            .insert(key, vector)
            .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
    }
    if space.len() != count {
        return Err(Error::parse(
            path,
            lineno,
            format!("header promised {count} entries, file has {}", space.len()),
        ));
    }
    Ok(space)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn lang(s: &str) -> Lang {
        Lang::new(s).unwrap()
    }

    fn key(s: &str) -> TaggedWord {
        TaggedWord::parse(s).unwrap()
    }

    fn space_of(dim: usize, entries: &[(&str, &[f64])]) -> EmbeddingSpace {
        let mut s = EmbeddingSpace::new(dim);
        for (k, v) in entries {
            s.insert(key(k), v.to_vec()).unwrap();
        }
        s
    }

    #[test]
    fn concat_disjoint_union() {
        let m = space_of(
            2,
            &[
                ("eng:a", &[1.0, 0.0]),
                ("eng:b", &[0.0, 1.0]),
                ("eng:c", &[1.0, 1.0]),
            ],
        );
        let e = space_of(2, &[("rus:x", &[2.0, 0.0]), ("rus:y", &[0.0, 2.0])]);
        let out = concat(&m, &e).unwrap();
        assert_eq!(out.len(), 5);
        let langs: Vec<String> = out.languages().map(|l| l.to_string()).collect();
        assert_eq!(langs, vec!["eng", "rus"]);
        // inputs untouched, vectors bit-equal
        assert_eq!(m.len(), 3);
        assert_eq!(out.get(&key("eng:a")).unwrap(), &[1.0, 0.0]);
        assert_eq!(out.get(&key("rus:y")).unwrap(), &[0.0, 2.0]);
    }

    #[test]
    fn concat_with_empty_is_identity() {
        let m = space_of(3, &[("eng:a", &[1.0, 2.0, 3.0])]);
        let out = concat(&m, &EmbeddingSpace::new(3)).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn concat_rejects_dim_mismatch() {
        let m = space_of(3, &[("eng:a", &[1.0, 2.0, 3.0])]);
        let e = space_of(2, &[("rus:x", &[1.0, 2.0])]);
        assert!(matches!(
            concat(&m, &e),
            Err(Error::DimMismatch {
                expected: 3,
                actual: 2
            })
        ));
    }

    #[test]
    fn concat_rejects_language_revisit() {
        let m = space_of(2, &[("eng:a", &[1.0, 0.0])]);
        let e = space_of(2, &[("eng:b", &[0.0, 1.0])]);
        assert!(matches!(concat(&m, &e), Err(Error::LanguageCollision(_))));
    }

    #[test]
    fn insert_rejects_non_finite_and_duplicates() {
        let mut s = EmbeddingSpace::new(2);
        assert!(s.insert(key("eng:a"), vec![f64::NAN, 0.0]).is_err());
        s.insert(key("eng:a"), vec![1.0, 0.0]).unwrap();
        assert!(s.insert(key("eng:a"), vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn save_shape() {
        let s = space_of(3, &[("eng:a", &[1.0, 2.0, 3.0]), ("eng:b", &[4.0, 5.0, 6.0])]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.vec");
        save_text(&s, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "2 3");
        assert_eq!(lines[1], "eng:a 1 2 3");
    }

    #[test]
    fn round_trip_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut s = EmbeddingSpace::new(300);
        for i in 0..1000 {
            let v: Vec<f64> = (0..300).map(|_| rng.random_range(-1.0..1.0)).collect();
            s.insert(key(&format!("aa:w{i}")), v).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.vec");
        save_text(&s, &path).unwrap();
        let loaded = load_text(&path).unwrap();
        assert_eq!(loaded.len(), s.len());
        let mut max_err = 0f64;
        for (k, v) in s.iter() {
            let lv = loaded.get(k).expect("key survives round trip");
            for (a, b) in v.iter().zip(lv) {
                max_err = max_err.max((a - b).abs());
            }
        }
        assert!(max_err < 1e-7, "max abs error {max_err}");
        // in fact the round trip is bit-exact
        assert_eq!(loaded, s);
    }

    #[test]
    fn load_rejects_short_row_with_line_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.vec");
        std::fs::write(&path, "2 3\neng:a 1 2 3\neng:b 1 2\n").unwrap();
        match load_text(&path).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_rejects_bad_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.vec");
        std::fs::write(&path, "banana\n").unwrap();
        assert!(matches!(load_text(&path), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn slice_then_concat_with_complement_restores_space() {
        let s = space_of(
            2,
            &[
                ("eng:a", &[1.0, 0.0]),
                ("rus:x", &[0.5, 0.5]),
                ("eng:b", &[0.0, 1.0]),
            ],
        );
        let eng = s.language_slice(&lang("eng")).unwrap();
        let rus = s.language_slice(&lang("rus")).unwrap();
        assert_eq!(eng.len(), 2);
        assert_eq!(rus.len(), 1);
        let merged = concat(&eng, &rus).unwrap();
        assert_eq!(merged.len(), s.len());
        for (k, v) in s.iter() {
            assert_eq!(merged.get(k).unwrap(), v);
        }
        assert!(s.language_slice(&lang("deu")).is_err());
    }

    #[test]
    fn slice_matches_key_filter_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let langs = ["aa", "bb", "cc"];
        let mut s = EmbeddingSpace::new(5);
        let mut expected = 0usize;
        for i in 0..300 {
            let l = langs[rng.random_range(0..3)];
            if l == "bb" {
                expected += 1;
            }
            let v: Vec<f64> = (0..5).map(|_| rng.random::<f64>()).collect();
            s.insert(TaggedWord::new(lang(l), format!("w{i}")), v).unwrap();
        }
        let slice = s.language_slice(&lang("bb")).unwrap();
        assert_eq!(slice.len(), expected);
        for (k, v) in slice.iter() {
            assert_eq!(k.lang, lang("bb"));
            assert_eq!(s.get(k).unwrap(), v);
        }
    }

    proptest! {
        /// concat is associative over pairwise-disjoint language sets.
        #[test]
        fn concat_is_associative(
            na in 1usize..6, nb in 1usize..6, nc in 1usize..6,
        ) {
            let make = |l: &str, n: usize| {
                let mut s = EmbeddingSpace::new(2);
                for i in 0..n {
                    s.insert(
                        TaggedWord::new(lang(l), format!("w{i}")),
                        vec![i as f64, n as f64],
                    ).unwrap();
                }
                s
            };
            let a = make("aa", na);
            let b = make("bb", nb);
            let c = make("cc", nc);
            let left = concat(&concat(&a, &b).unwrap(), &c).unwrap();
            let right = concat(&a, &concat(&b, &c).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }
    }
}
