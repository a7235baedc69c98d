//! Bilingual lexicon induction evaluation: retrieve translations for test
//! source words from the target-language slice of a multilingual space and
//! score precision at k.

use std::collections::BTreeSet;

use log::warn;

use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::lang::{Lang, TaggedWord};
use crate::lexicon::Lexicon;

/// Retrieval criterion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Retrieval {
    /// Plain cosine nearest neighbor.
    Nn,
    /// Cross-domain similarity local scaling: cosine corrected by each
    /// point's mean similarity to its k nearest neighbors, which counters
    /// hubness.
    Csls,
}

impl std::str::FromStr for Retrieval {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "nn" => Ok(Retrieval::Nn),
            "csls" => Ok(Retrieval::Csls),
            other => Err(Error::Config(format!(
                "unknown retrieval {other:?}, expected nn or csls"
            ))),
        }
    }
}

/// Evaluation settings.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub retrieval: Retrieval,
    pub csls_k: usize,
    /// Cutoffs, ascending.
    pub ks: Vec<usize>,
    pub src_lang: Lang,
    pub trg_lang: Lang,
    /// Collect per-query top-10 lists.
    pub dump_predictions: bool,
}

impl EvalConfig {
    pub fn new(src_lang: Lang, trg_lang: Lang) -> Self {
        EvalConfig {
            retrieval: Retrieval::Nn,
            csls_k: 10,
            ks: vec![1, 5, 10],
            src_lang,
            trg_lang,
            dump_predictions: false,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.ks.is_empty() {
            return Err(Error::Config("no precision cutoffs given".into()));
        }
        if self.ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "cutoffs must be strictly ascending, got {:?}",
                self.ks
            )));
        }
        if self.ks[0] < 1 {
            return Err(Error::Config("cutoffs must be at least 1".into()));
        }
        if self.csls_k < 1 {
            return Err(Error::Config("csls_k must be at least 1".into()));
        }
        if self.src_lang == self.trg_lang {
            return Err(Error::Config(
                "source and target language must differ".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of one query, kept when prediction dumping is on.
#[derive(Debug, Clone)]
pub struct QueryRecord {
    pub query: String,
    /// 1-based rank of the best-ranked gold translation, if any gold word is
    /// in the candidate slice.
    pub gold_rank: Option<usize>,
    /// Top retrieved candidates with scores, best first.
    pub top: Vec<(String, f64)>,
}

/// Precision-at-k report.
#[derive(Debug, Clone)]
pub struct EvalReport {
    /// (k, precision) in ascending k.
    pub precisions: Vec<(usize, f64)>,
    pub evaluated: usize,
    pub skipped_oov: usize,
    pub per_query: Option<Vec<QueryRecord>>,
}

impl EvalReport {
    pub fn precision(&self, k: usize) -> Option<f64> {
        self.precisions.iter().find(|(kk, _)| *kk == k).map(|(_, p)| *p)
    }

    /// `metric<TAB>k<TAB>value` lines.
    pub fn machine_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .precisions
            .iter()
            .map(|(k, p)| format!("precision\t{k}\t{p:.6}"))
            .collect();
        lines.push(format!("evaluated\t-\t{}", self.evaluated));
        lines.push(format!("skipped_oov\t-\t{}", self.skipped_oov));
        lines
    }

    /// Human-readable table.
    pub fn human_lines(&self) -> Vec<String> {
        let mut lines: Vec<String> = self
            .precisions
            .iter()
            .map(|(k, p)| format!("P@{k} {p:.4}"))
            .collect();
        lines.push(format!(
            "queries evaluated: {}  skipped (source OOV): {}",
            self.evaluated, self.skipped_oov
        ));
        lines
    }
}

fn normalized(v: &[f64], what: &TaggedWord) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        warn!("zero-norm vector for {what}; cosine treated as 0");
        vec![0.0; v.len()]
    } else {
        v.iter().map(|x| x / norm).collect()
    }
}

fn normalize_query(v: &[f64]) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        warn!("zero-norm query vector; cosine treated as 0");
        return vec![0.0; v.len()];
    }
    v.iter().map(|x| x / norm).collect()
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mean of the `k` largest values.
fn mean_top_k(values: &[f64], k: usize) -> f64 {
    debug_assert!(k >= 1 && k <= values.len());
    let mut sorted = values.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    sorted[..k].iter().sum::<f64>() / k as f64
}

/// A borrowed view of one language slice: keys and unit-normalized vectors.
struct Slice<'a> {
    keys: Vec<&'a TaggedWord>,
    vectors: Vec<Vec<f64>>,
}

impl<'a> Slice<'a> {
    fn of(space: &'a EmbeddingSpace, lang: &Lang) -> Result<Self> {
        if !space.has_language(lang) {
            return Err(Error::UnknownLanguage(lang.to_string()));
        }
        let mut keys = Vec::new();
        let mut vectors = Vec::new();
        for (key, vec) in space.iter() {
            if &key.lang == lang {
                keys.push(key);
                vectors.push(normalized(vec, key));
            }
        }
        Ok(Slice { keys, vectors })
    }

    fn whole(space: &'a EmbeddingSpace) -> Self {
        let mut keys = Vec::new();
        let mut vectors = Vec::new();
        for (key, vec) in space.iter() {
            keys.push(key);
            vectors.push(normalized(vec, key));
        }
        Slice { keys, vectors }
    }

    fn len(&self) -> usize {
        self.keys.len()
    }

    fn cosines_to(&self, query: &[f64]) -> Vec<f64> {
        self.vectors.iter().map(|v| dot(query, v)).collect()
    }
}

/// Rank candidates by `scores` descending, ties broken by key codepoint
/// order; returns candidate indices.
fn ranked_indices(keys: &[&TaggedWord], scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_unstable_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| keys[a].cmp(keys[b]))
    });
    idx
}

/// The `k` candidates most cosine-similar to `query`, best first. Ties
/// break by key order; zero-norm vectors score 0.
pub fn topk_cosine(
    query: &[f64],
    candidates: &EmbeddingSpace,
    k: usize,
) -> Result<Vec<(TaggedWord, f64)>> {
    if query.len() != candidates.dim() {
        return Err(Error::DimMismatch {
            expected: candidates.dim(),
            actual: query.len(),
        });
    }
    if k < 1 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    let slice = Slice::whole(candidates);
    let q = normalize_query(query);
    let scores = slice.cosines_to(&q);
    let order = ranked_indices(&slice.keys, &scores);
    Ok(order
        .into_iter()
        .take(k)
        .map(|i| (slice.keys[i].clone(), scores[i]))
        .collect())
}

/// CSLS score of `query` against every entry of `trg_space`, in entry
/// order: `2 cos(x, y) - r_T(x) - r_S(y)`, where `r_T(x)` is the mean
/// cosine of the query to its `csls_k` nearest target candidates and
/// `r_S(y)` the mean cosine of candidate `y` to its `csls_k` nearest
/// vectors in `src_space`.
pub fn csls_scores(
    query: &[f64],
    src_space: &EmbeddingSpace,
    trg_space: &EmbeddingSpace,
    csls_k: usize,
) -> Result<Vec<(TaggedWord, f64)>> {
    if query.len() != trg_space.dim() || src_space.dim() != trg_space.dim() {
        return Err(Error::DimMismatch {
            expected: trg_space.dim(),
            actual: query.len(),
        });
    }
    if trg_space.len() < csls_k {
        return Err(Error::Config(format!(
            "{} candidates but csls_k is {csls_k}; lower csls_k",
            trg_space.len()
        )));
    }
    if src_space.len() < csls_k {
        return Err(Error::Config(format!(
            "{} source vectors but csls_k is {csls_k}; lower csls_k",
            src_space.len()
        )));
    }
    let src = Slice::whole(src_space);
    let trg = Slice::whole(trg_space);
    let q = normalize_query(query);

    let cos_q = trg.cosines_to(&q);
    let r_t = mean_top_k(&cos_q, csls_k);
    let mut out = Vec::with_capacity(trg.len());
    for (i, y) in trg.vectors.iter().enumerate() {
        let cos_to_src = src.cosines_to(y);
        let r_s = mean_top_k(&cos_to_src, csls_k);
        out.push((trg.keys[i].clone(), 2.0 * cos_q[i] - r_t - r_s));
    }
    Ok(out)
}

/// Evaluate bilingual lexicon induction.
///
/// Queries are the unique source words of `test_lexicon` found in the
/// source-language slice; candidates are the full target-language slice. A
/// query counts as correct at cutoff `k` when any of its gold translations
/// ranks in the top k (gold words missing from the space simply cannot
/// match). Precision is averaged over evaluated queries; source words
/// missing from the space are skipped and counted.
pub fn precision_at_k(
    space: &EmbeddingSpace,
    test_lexicon: &Lexicon,
    config: &EvalConfig,
) -> Result<EvalReport> {
    config.validate()?;
    if test_lexicon.src_lang() != &config.src_lang || test_lexicon.trg_lang() != &config.trg_lang {
        return Err(Error::Config(format!(
            "test lexicon is {}-{} but evaluation is configured for {}-{}",
            test_lexicon.src_lang(),
            test_lexicon.trg_lang(),
            config.src_lang,
            config.trg_lang
        )));
    }
    if !space.has_language(&config.src_lang) {
        return Err(Error::UnknownLanguage(config.src_lang.to_string()));
    }
    let candidates = Slice::of(space, &config.trg_lang)?;

    // Unique source words, in codepoint order for determinism.
    let source_words: BTreeSet<&str> = test_lexicon.iter().map(|(s, _)| s).collect();
    let mut queries: Vec<(&str, Vec<f64>)> = Vec::new();
    let mut skipped_oov = 0usize;
    for word in &source_words {
        let key = TaggedWord::new(config.src_lang.clone(), *word);
        match space.get(&key) {
            Some(v) => queries.push((word, normalized(v, &key))),
            None => skipped_oov += 1,
        }
    }
    if queries.is_empty() {
        return Err(Error::NoQueries);
    }

    // CSLS corrections: r_S per candidate over the query vectors, r_T per
    // query over the candidates.
    let r_s: Option<Vec<f64>> = match config.retrieval {
        Retrieval::Nn => None,
        Retrieval::Csls => {
            if candidates.len() < config.csls_k {
                return Err(Error::Config(format!(
                    "{} candidates but csls_k is {}; lower csls_k",
                    candidates.len(),
                    config.csls_k
                )));
            }
            if queries.len() < config.csls_k {
                return Err(Error::Config(format!(
                    "{} evaluable queries but csls_k is {}; lower csls_k",
                    queries.len(),
                    config.csls_k
                )));
            }
            Some(
                candidates
                    .vectors
                    .iter()
                    .map(|y| {
                        let cos: Vec<f64> = queries.iter().map(|(_, q)| dot(q, y)).collect();
                        mean_top_k(&cos, config.csls_k)
                    })
                    .collect(),
            )
        }
    };

    let max_k = *config.ks.last().expect("validated nonempty");
    let mut hits = vec![0usize; config.ks.len()];
    let mut per_query: Option<Vec<QueryRecord>> =
        config.dump_predictions.then(Vec::new);

    for (word, qvec) in &queries {
        let cos = candidates.cosines_to(qvec);
        let scores: Vec<f64> = match (&config.retrieval, &r_s) {
            (Retrieval::Nn, _) => cos,
            (Retrieval::Csls, Some(r_s)) => {
                let r_t = mean_top_k(&cos, config.csls_k);
                cos.iter()
                    .zip(r_s)
                    .map(|(c, rs)| 2.0 * c - r_t - rs)
                    .collect()
            }
            (Retrieval::Csls, None) => unreachable!(),
        };

        // Rank of the best gold translation: 1 + number of candidates that
        // beat it under (score desc, key asc).
        let mut gold_rank: Option<usize> = None;
        for gold in test_lexicon.translations_of(word) {
            let gold_key = TaggedWord::new(config.trg_lang.clone(), gold);
            let Some(gi) = candidates.keys.iter().position(|k| **k == gold_key) else {
                continue;
            };
            let gs = scores[gi];
            let better = (0..candidates.len())
                .filter(|&i| {
                    scores[i] > gs
                        || (scores[i] == gs && candidates.keys[i].cmp(&gold_key).is_lt())
                })
                .count();
            let rank = better + 1;
            if gold_rank.is_none_or(|r| rank < r) {
                gold_rank = Some(rank);
            }
        }

        for (slot, k) in config.ks.iter().enumerate() {
            if gold_rank.is_some_and(|r| r <= *k) {
                hits[slot] += 1;
            }
        }

        if let Some(records) = per_query.as_mut() {
            let order = ranked_indices(&candidates.keys, &scores);
            let top: Vec<(String, f64)> = order
                .into_iter()
                .take(max_k.max(10))
                .map(|i| (candidates.keys[i].word.clone(), scores[i]))
                .collect();
            records.push(QueryRecord {
                query: word.to_string(),
                gold_rank,
                top,
            });
        }
    }

    let evaluated = queries.len();
    let precisions = config
        .ks
        .iter()
        .zip(&hits)
        .map(|(k, h)| (*k, *h as f64 / evaluated as f64))
        .collect();
    Ok(EvalReport {
        precisions,
        evaluated,
        skipped_oov,
        per_query,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn lang(s: &str) -> Lang {
        Lang::new(s).unwrap()
    }

    fn key(s: &str) -> TaggedWord {
        TaggedWord::parse(s).unwrap()
    }

    fn space_of(dim: usize, entries: &[(&str, Vec<f64>)]) -> EmbeddingSpace {
        let mut s = EmbeddingSpace::new(dim);
        for (k, v) in entries {
            s.insert(key(k), v.clone()).unwrap();
        }
        s
    }

    #[test]
    fn exact_match_ranks_first_with_score_one() {
        let cands = space_of(
            3,
            &[
                ("tt:a", vec![1.0, 0.0, 0.0]),
                ("tt:b", vec![0.0, 1.0, 0.0]),
                ("tt:c", vec![0.0, 0.0, 1.0]),
            ],
        );
        let top = topk_cosine(&[1.0, 0.0, 0.0], &cands, 2).unwrap();
        assert_eq!(top[0].0, key("tt:a"));
        assert!((top[0].1 - 1.0).abs() < 1e-12);
        // orthogonal ties broken by key order
        assert_eq!(top[1].0, key("tt:b"));
    }

    #[test]
    fn scaling_the_query_changes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let entries: Vec<(String, Vec<f64>)> = (0..50)
            .map(|i| {
                (
                    format!("tt:w{i}"),
                    (0..8).map(|_| rng.random_range(-1.0..1.0)).collect(),
                )
            })
            .collect();
        let refs: Vec<(&str, Vec<f64>)> =
            entries.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
        let cands = space_of(8, &refs);
        let q: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
        let q3: Vec<f64> = q.iter().map(|v| 3.0 * v).collect();
        let a = topk_cosine(&q, &cands, 10).unwrap();
        let b = topk_cosine(&q3, &cands, 10).unwrap();
        for ((ka, sa), (kb, sb)) in a.iter().zip(&b) {
            assert_eq!(ka, kb);
            assert!((sa - sb).abs() < 1e-12);
        }
    }

    #[test]
    fn topk_matches_exhaustive_sort_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for round in 0..20 {
            let dim = rng.random_range(3..20);
            let n = rng.random_range(20..100);
            let entries: Vec<(String, Vec<f64>)> = (0..n)
                .map(|i| {
                    (
                        format!("tt:w{i:03}"),
                        (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    )
                })
                .collect();
            let refs: Vec<(&str, Vec<f64>)> =
                entries.iter().map(|(k, v)| (k.as_str(), v.clone())).collect();
            let cands = space_of(dim, &refs);
            let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();

            // oracle: compute every cosine from scratch, full sort
            let qn = {
                let norm = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                q.iter().map(|v| v / norm).collect::<Vec<f64>>()
            };
            let mut oracle: Vec<(String, f64)> = entries
                .iter()
                .map(|(k, v)| {
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let cos = v.iter().zip(&qn).map(|(a, b)| a / norm * b).sum::<f64>();
                    (k.clone(), cos)
                })
                .collect();
            oracle.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));

            let got = topk_cosine(&q, &cands, 10).unwrap();
            for (g, o) in got.iter().zip(&oracle) {
                assert_eq!(g.0.to_string(), *o.0, "round {round}");
                assert!((g.1 - o.1).abs() < 1e-9, "round {round}");
            }
        }
    }

    #[test]
    fn zero_norm_candidate_scores_zero() {
        let cands = space_of(
            2,
            &[("tt:zero", vec![0.0, 0.0]), ("tt:anti", vec![-1.0, 0.0])],
        );
        let top = topk_cosine(&[1.0, 0.0], &cands, 2).unwrap();
        assert_eq!(top[0].0, key("tt:zero"));
        assert_eq!(top[0].1, 0.0);
        assert!((top[1].1 + 1.0).abs() < 1e-12);
    }

    #[test]
    fn csls_complete_tie_on_symmetric_instance() {
        // two sources and two targets, all cross cosines equal
        let src = space_of(2, &[("ss:x1", vec![1.0, 0.0]), ("ss:x2", vec![0.0, 1.0])]);
        let trg = space_of(
            2,
            &[("tt:y1", vec![1.0, 1.0]), ("tt:y2", vec![1.0, 1.0])],
        );
        for csls_k in [1, 2] {
            let scores = csls_scores(&[1.0, 0.0], &src, &trg, csls_k).unwrap();
            assert!((scores[0].1 - scores[1].1).abs() < 1e-12);
        }
    }

    #[test]
    fn csls_with_k_equal_to_all_candidates_is_global_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let dim = 6;
        let mk = |tag: &str, n: usize, rng: &mut ChaCha8Rng| {
            let entries: Vec<(String, Vec<f64>)> = (0..n)
                .map(|i| {
                    (
                        format!("{tag}:w{i}"),
                        (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(),
                    )
                })
                .collect();
            entries
        };
        let se = mk("ss", 7, &mut rng);
        let te = mk("tt", 7, &mut rng);
        let src = space_of(dim, &se.iter().map(|(k, v)| (k.as_str(), v.clone())).collect::<Vec<_>>());
        let trg = space_of(dim, &te.iter().map(|(k, v)| (k.as_str(), v.clone())).collect::<Vec<_>>());
        let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let scores = csls_scores(&q, &src, &trg, 7).unwrap();

        // direct formula with global means
        let norm = |v: &[f64]| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / n).collect::<Vec<f64>>()
        };
        let qn = norm(&q);
        let tn: Vec<Vec<f64>> = te.iter().map(|(_, v)| norm(v)).collect();
        let sn: Vec<Vec<f64>> = se.iter().map(|(_, v)| norm(v)).collect();
        let r_t: f64 = tn.iter().map(|y| dot(&qn, y)).sum::<f64>() / 7.0;
        for (i, y) in tn.iter().enumerate() {
            let r_s: f64 = sn.iter().map(|x| dot(x, y)).sum::<f64>() / 7.0;
            let expected = 2.0 * dot(&qn, y) - r_t - r_s;
            assert!((scores[i].1 - expected).abs() < 1e-10);
        }
    }

    #[test]
    fn csls_requires_enough_candidates() {
        let src = space_of(2, &[("ss:x", vec![1.0, 0.0])]);
        let trg = space_of(2, &[("tt:y", vec![0.0, 1.0])]);
        let err = csls_scores(&[1.0, 0.0], &src, &trg, 5).unwrap_err();
        assert!(err.to_string().contains("lower csls_k"), "{err}");
    }

    /// Quadratic reference CSLS used by the oracle-equivalence tests.
    fn csls_oracle(
        q: &[f64],
        srcs: &[Vec<f64>],
        trgs: &[Vec<f64>],
        k: usize,
    ) -> Vec<f64> {
        let norm = |v: &[f64]| {
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if n == 0.0 {
                vec![0.0; v.len()]
            } else {
                v.iter().map(|x| x / n).collect::<Vec<f64>>()
            }
        };
        let qn = norm(q);
        let sn: Vec<Vec<f64>> = srcs.iter().map(|v| norm(v)).collect();
        let tn: Vec<Vec<f64>> = trgs.iter().map(|v| norm(v)).collect();
        let top_mean = |mut xs: Vec<f64>| {
            xs.sort_by(|a, b| b.total_cmp(a));
            xs[..k].iter().sum::<f64>() / k as f64
        };
        let r_t = top_mean(tn.iter().map(|y| dot(&qn, y)).collect());
        tn.iter()
            .map(|y| {
                let r_s = top_mean(sn.iter().map(|x| dot(x, y)).collect());
                2.0 * dot(&qn, y) - r_t - r_s
            })
            .collect()
    }

    #[test]
    fn csls_matches_quadratic_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for round in 0..20 {
            let dim = rng.random_range(4..30);
            let n = 50;
            let srcs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let trgs: Vec<Vec<f64>> = (0..n)
                .map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect())
                .collect();
            let src = {
                let mut s = EmbeddingSpace::new(dim);
                for (i, v) in srcs.iter().enumerate() {
                    s.insert(key(&format!("ss:w{i}")), v.clone()).unwrap();
                }
                s
            };
            let trg = {
                let mut s = EmbeddingSpace::new(dim);
                for (i, v) in trgs.iter().enumerate() {
                    s.insert(key(&format!("tt:w{i}")), v.clone()).unwrap();
                }
                s
            };
            let q: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            let k = rng.random_range(1..=10);
            let got = csls_scores(&q, &src, &trg, k).unwrap();
            let expected = csls_oracle(&q, &srcs, &trgs, k);
            for (g, e) in got.iter().zip(&expected) {
                assert!((g.1 - e).abs() < 1e-9, "round {round}: {} vs {e}", g.1);
            }
            // rankings must agree exactly
            let keys: Vec<&TaggedWord> = got.iter().map(|(k, _)| k).collect();
            let got_scores: Vec<f64> = got.iter().map(|(_, s)| *s).collect();
            let got_rank = ranked_indices(&keys, &got_scores);
            let exp_rank = ranked_indices(&keys, &expected);
            assert_eq!(got_rank, exp_rank, "round {round}");
        }
    }

    fn perfect_space() -> (EmbeddingSpace, Lexicon) {
        let space = space_of(
            3,
            &[
                ("ss:one", vec![1.0, 0.0, 0.0]),
                ("ss:two", vec![0.0, 1.0, 0.0]),
                ("ss:three", vec![0.0, 0.0, 1.0]),
                ("tt:uno", vec![1.0, 0.1, 0.0]),
                ("tt:dos", vec![0.0, 1.0, 0.1]),
                ("tt:tres", vec![0.1, 0.0, 1.0]),
            ],
        );
        let lex = Lexicon::from_pairs(
            lang("ss"),
            lang("tt"),
            [("one", "uno"), ("two", "dos"), ("three", "tres")],
        )
        .unwrap();
        (space, lex)
    }

    #[test]
    fn perfect_space_scores_one_everywhere() {
        let (space, lex) = perfect_space();
        let mut config = EvalConfig::new(lang("ss"), lang("tt"));
        config.ks = vec![1, 2, 3];
        let report = precision_at_k(&space, &lex, &config).unwrap();
        for (_, p) in &report.precisions {
            assert_eq!(*p, 1.0);
        }
        assert_eq!(report.evaluated, 3);
        assert_eq!(report.skipped_oov, 0);
    }

    #[test]
    fn oov_gold_cannot_match_but_query_counts() {
        let space = space_of(
            2,
            &[("ss:one", vec![1.0, 0.0]), ("tt:other", vec![1.0, 0.0])],
        );
        let lex =
            Lexicon::from_pairs(lang("ss"), lang("tt"), [("one", "missing")]).unwrap();
        let mut config = EvalConfig::new(lang("ss"), lang("tt"));
        config.ks = vec![1];
        let report = precision_at_k(&space, &lex, &config).unwrap();
        assert_eq!(report.evaluated, 1);
        assert_eq!(report.precision(1), Some(0.0));
    }

    #[test]
    fn oov_queries_are_skipped_and_counted() {
        let (space, mut lex) = perfect_space();
        lex.insert("fantasma", "uno");
        let config = EvalConfig {
            ks: vec![1],
            ..EvalConfig::new(lang("ss"), lang("tt"))
        };
        let report = precision_at_k(&space, &lex, &config).unwrap();
        assert_eq!(report.evaluated, 3);
        assert_eq!(report.skipped_oov, 1);
    }

    #[test]
    fn all_queries_oov_is_an_error() {
        let (space, _) = perfect_space();
        let lex = Lexicon::from_pairs(lang("ss"), lang("tt"), [("ghost", "uno")]).unwrap();
        let config = EvalConfig::new(lang("ss"), lang("tt"));
        assert!(matches!(
            precision_at_k(&space, &lex, &config),
            Err(Error::NoQueries)
        ));
    }

    #[test]
    fn precision_is_monotone_in_k_and_counts_add_up() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for round in 0..20 {
            let dim = 8;
            let n_src = rng.random_range(5..30);
            let n_trg = rng.random_range(10..40);
            let mut space = EmbeddingSpace::new(dim);
            for i in 0..n_src {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                space.insert(key(&format!("ss:s{i}")), v).unwrap();
            }
            for i in 0..n_trg {
                let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
                space.insert(key(&format!("tt:t{i}")), v).unwrap();
            }
            let mut lex = Lexicon::new(lang("ss"), lang("tt")).unwrap();
            for _ in 0..rng.random_range(5..40) {
                let s = format!("s{}", rng.random_range(0..n_src + 5)); // some OOV
                let t = format!("t{}", rng.random_range(0..n_trg));
                lex.insert(s, t);
            }
            let config = EvalConfig::new(lang("ss"), lang("tt"));
            match precision_at_k(&space, &lex, &config) {
                Err(Error::NoQueries) => continue,
                Err(e) => panic!("round {round}: {e}"),
                Ok(report) => {
                    let ps: Vec<f64> = report.precisions.iter().map(|(_, p)| *p).collect();
                    assert!(ps.windows(2).all(|w| w[0] <= w[1]), "round {round}: {ps:?}");
                    assert_eq!(
                        report.evaluated + report.skipped_oov,
                        lex.unique_source_words(),
                        "round {round}"
                    );
                }
            }
        }
    }

    #[test]
    fn nn_and_csls_agree_on_constant_correction_instance() {
        // all candidates equidistant from each other: r_S constant
        let space = space_of(
            4,
            &[
                ("ss:q1", vec![1.0, 0.0, 0.0, 0.0]),
                ("ss:q2", vec![0.0, 1.0, 0.0, 0.0]),
                ("tt:c1", vec![1.0, 0.0, 0.0, 0.1]),
                ("tt:c2", vec![0.0, 1.0, 0.0, 0.1]),
            ],
        );
        let lex = Lexicon::from_pairs(lang("ss"), lang("tt"), [("q1", "c1"), ("q2", "c2")])
            .unwrap();
        let nn = EvalConfig {
            ks: vec![1, 2],
            ..EvalConfig::new(lang("ss"), lang("tt"))
        };
        let csls = EvalConfig {
            retrieval: Retrieval::Csls,
            csls_k: 2,
            ks: vec![1, 2],
            ..EvalConfig::new(lang("ss"), lang("tt"))
        };
        let a = precision_at_k(&space, &lex, &nn).unwrap();
        let b = precision_at_k(&space, &lex, &csls).unwrap();
        assert_eq!(a.precisions, b.precisions);
    }

    #[test]
    fn batched_csls_evaluation_matches_single_query_op() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let dim = 6;
        let mut space = EmbeddingSpace::new(dim);
        for i in 0..12 {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            space.insert(key(&format!("ss:s{i}")), v).unwrap();
        }
        for i in 0..15 {
            let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
            space.insert(key(&format!("tt:t{i}")), v).unwrap();
        }
        let mut lex = Lexicon::new(lang("ss"), lang("tt")).unwrap();
        for i in 0..12 {
            lex.insert(format!("s{i}"), format!("t{}", (i * 7) % 15));
        }
        let config = EvalConfig {
            retrieval: Retrieval::Csls,
            csls_k: 3,
            ks: vec![1, 5, 10],
            dump_predictions: true,
            ..EvalConfig::new(lang("ss"), lang("tt"))
        };
        let report = precision_at_k(&space, &lex, &config).unwrap();

        // the per-query winner must match the standalone csls_scores op,
        // with the query set as the source side
        let mut src_queries = EmbeddingSpace::new(dim);
        for i in 0..12 {
            let k = key(&format!("ss:s{i}"));
            src_queries.insert(k.clone(), space.get(&k).unwrap().to_vec()).unwrap();
        }
        let trg = space.language_slice(&lang("tt")).unwrap();
        for record in report.per_query.as_ref().unwrap() {
            let q = key(&format!("ss:{}", record.query));
            let scores = csls_scores(space.get(&q).unwrap(), &src_queries, &trg, 3).unwrap();
            let best = scores
                .iter()
                .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(&a.0)))
                .unwrap();
            assert_eq!(record.top[0].0, best.0.word);
            assert!((record.top[0].1 - best.1).abs() < 1e-10);
        }
    }
}
