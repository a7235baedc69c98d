//! word2vec training (CBOW or skip-gram with negative sampling) with
//! anchor-point initialization.
//!
//! Words that appear in the seed lexicon start at the mean of their anchor
//! vectors — the vectors their translations already have in the multilingual
//! space — and remain trainable. Everything else about the algorithm is
//! ordinary word2vec, so the target space comes out aligned with the source
//! space without ever modifying it.

mod matrix;
mod sgns;
mod unigram;

pub use matrix::Matrix;
pub use sgns::{sigmoid, step_loss_and_grads, Sample, StepGrads};
pub use unigram::{unigram_table, UnigramTable};

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use log::{debug, warn};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{keep_probability, Corpus, Vocabulary};
use crate::embedding::EmbeddingSpace;
use crate::error::{Error, Result};
use crate::lang::{Lang, TaggedWord};
use crate::lexicon::{AccumulatedLexicon, DropReport};
use matrix::SharedMatrix;
use sgns::step_terms;

/// Training architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Cbow,
    SkipGram,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cbow" => Ok(Mode::Cbow),
            "sg" | "skipgram" | "skip-gram" => Ok(Mode::SkipGram),
            other => Err(Error::Config(format!(
                "unknown mode {other:?}, expected cbow or sg"
            ))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mode::Cbow => f.write_str("cbow"),
            Mode::SkipGram => f.write_str("sg"),
        }
    }
}

/// Hyperparameters for one training run.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub dim: usize,
    pub window: usize,
    pub epochs: usize,
    pub negatives: usize,
    pub mode: Mode,
    pub initial_lr: f64,
    pub min_lr: f64,
    /// Subsampling threshold; values <= 0 disable subsampling.
    pub subsample_threshold: f64,
    pub unigram_exponent: f64,
    pub table_size: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 300,
            window: 5,
            epochs: 5,
            negatives: 5,
            mode: Mode::Cbow,
            initial_lr: 0.025,
            min_lr: 1e-4,
            subsample_threshold: 1e-3,
            unigram_exponent: 0.75,
            table_size: 10_000_000,
            seed: 42,
            threads: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::Config("dim must be at least 1".into()));
        }
        if self.window < 1 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.threads < 1 {
            return Err(Error::Config("threads must be at least 1".into()));
        }
        if self.min_lr >= self.initial_lr {
            return Err(Error::Config(format!(
                "min_lr {} must be below initial_lr {}",
                self.min_lr, self.initial_lr
            )));
        }
        if self.table_size < 1 {
            return Err(Error::Config("table_size must be at least 1".into()));
        }
        Ok(())
    }
}

/// Anchor vectors per target word, collected from the existing multilingual
/// space through the accumulated seed lexicon. A word may have several
/// anchors (one per source language pairing it); initialization averages
/// them.
#[derive(Debug, Clone)]
pub struct AnchorSet {
    dim: usize,
    anchors: BTreeMap<String, Vec<Vec<f64>>>,
    drops: DropReport,
}

impl AnchorSet {
    /// No anchors: plain monolingual word2vec.
    pub fn empty(dim: usize) -> Self {
        AnchorSet {
            dim,
            anchors: BTreeMap::new(),
            drops: DropReport::default(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of anchored target words.
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Total anchor vectors across all words (in-vocabulary lexicon pairs).
    pub fn pair_count(&self) -> usize {
        self.anchors.values().map(Vec::len).sum()
    }

    pub fn get(&self, word: &str) -> Option<&[Vec<f64>]> {
        self.anchors.get(word).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[Vec<f64>])> {
        self.anchors.iter().map(|(w, v)| (w.as_str(), v.as_slice()))
    }

    pub fn drop_report(&self) -> DropReport {
        self.drops
    }
}

/// Collect anchors for every target word of `lexicon` that is in
/// `trg_vocab`, from the tagged source vectors present in `m_prev`. Pairs
/// with an out-of-vocabulary side are dropped and counted. An empty result
/// only warns: training then degrades to plain word2vec.
pub fn build_anchor_set(
    m_prev: &EmbeddingSpace,
    lexicon: &AccumulatedLexicon,
    trg_vocab: &Vocabulary,
) -> AnchorSet {
    let mut anchors: BTreeMap<String, Vec<Vec<f64>>> = BTreeMap::new();
    let mut drops = DropReport::default();
    for (src, trg) in lexicon.iter() {
        match m_prev.get(src) {
            None => drops.source_oov += 1,
            Some(vec) => {
                if trg_vocab.contains(trg) {
                    anchors.entry(trg.to_string()).or_default().push(vec.to_vec());
                } else {
                    drops.target_oov += 1;
                }
            }
        }
    }
    let multi = anchors.values().filter(|v| v.len() > 1).count();
    if multi > 0 {
        debug!("{multi} target words have multiple anchors and will be averaged");
    }
    if anchors.is_empty() {
        warn!(
            "anchor set for {} is empty ({} pairs dropped); training proceeds unanchored",
            lexicon.trg_lang(),
            drops.total()
        );
    }
    AnchorSet {
        dim: m_prev.dim(),
        anchors,
        drops,
    }
}

/// Initial weights: anchored words start exactly at the componentwise mean
/// of their anchor vectors; all other input vectors are i.i.d. uniform on
/// [-0.5/dim, +0.5/dim] from the seeded generator; output vectors are zero.
pub fn init_weights(
    vocab: &Vocabulary,
    config: &TrainConfig,
    anchors: &AnchorSet,
) -> Result<(Matrix, Matrix)> {
    if !anchors.is_empty() && anchors.dim() != config.dim {
        return Err(Error::DimMismatch {
            expected: config.dim,
            actual: anchors.dim(),
        });
    }
    let dim = config.dim;
    let mut input = Matrix::zeros(vocab.len(), dim);
    let output = Matrix::zeros(vocab.len(), dim);

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let bound = 0.5 / dim as f64;
    for rank in 0..vocab.len() {
        let row = input.row_mut(rank);
        match anchors.get(vocab.token(rank)) {
            Some(vectors) => {
                let n = vectors.len() as f64;
                for v in vectors {
                    for (c, x) in v.iter().enumerate() {
                        row[c] += x;
                    }
                }
                for x in row.iter_mut() {
                    *x /= n;
                }
            }
            None => {
                for x in row.iter_mut() {
                    *x = rng.random_range(-bound..bound);
                }
            }
        }
    }
    Ok((input, output))
}

/// Per-epoch statistics of a finished run.
#[derive(Debug, Clone, Default)]
pub struct TrainSummary {
    /// Mean step loss per epoch.
    pub epoch_mean_loss: Vec<f64>,
    /// Post-subsampling words processed across all epochs.
    pub processed_words: u64,
    pub anchored_words: usize,
    pub anchor_pairs: usize,
}

/// The result of training: the input matrix is the embedding.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    pub input_vectors: Matrix,
    pub output_vectors: Matrix,
    pub vocab: Vocabulary,
    pub language: Lang,
    pub summary: TrainSummary,
}

impl TrainedModel {
    /// The input vectors as a single-language embedding space, in vocabulary
    /// rank order.
    pub fn to_embedding_space(&self) -> Result<EmbeddingSpace> {
        let mut space = EmbeddingSpace::new(self.input_vectors.dim());
        for rank in 0..self.vocab.len() {
            space.insert(
                TaggedWord::new(self.language.clone(), self.vocab.token(rank)),
                self.input_vectors.row(rank).to_vec(),
            )?;
        }
        Ok(space)
    }
}

/// Train embeddings for `corpus` over `vocab`.
///
/// Runs `config.epochs` passes. Each kept token becomes one center; the
/// effective window is drawn uniformly from 1..=window per center; frequent
/// tokens are dropped stochastically with [`keep_probability`]; the learning
/// rate decays linearly from `initial_lr` to `min_lr` over the expected
/// total of processed words. With `threads == 1` runs are bit-reproducible
/// for a fixed seed; with more threads workers update the shared matrices
/// lock-free and results are nondeterministic.
pub fn train(
    corpus: &Corpus,
    vocab: &Vocabulary,
    config: &TrainConfig,
    anchors: &AnchorSet,
) -> Result<TrainedModel> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary);
    }

    let (input, output) = init_weights(vocab, config, anchors)?;

    // Encode the corpus once; out-of-vocabulary tokens vanish and windows
    // close over the survivors.
    let mut sentences: Vec<Vec<u32>> = Vec::new();
    corpus.for_each_sentence(|sent| {
        let ids: Vec<u32> = sent
            .iter()
            .filter_map(|t| vocab.rank(t).map(|r| r as u32))
            .collect();
        if !ids.is_empty() {
            sentences.push(ids);
        }
    })?;

    let keep_probs: Vec<f64> = (0..vocab.len())
        .map(|r| {
            if config.subsample_threshold > 0.0 {
                keep_probability(vocab.count(r), vocab.total_tokens(), config.subsample_threshold)
            } else {
                1.0
            }
        })
        .collect();

    // Decay horizon: expected kept occurrences per epoch, over all epochs.
    let expected_kept: f64 = (0..vocab.len())
        .map(|r| vocab.count(r) as f64 * keep_probs[r])
        .sum();
    let decay_span = (config.epochs as f64 * expected_kept).max(1.0);

    let table = unigram_table(vocab, config.unigram_exponent, config.table_size);

    let shared_input = SharedMatrix::from_matrix(&input);
    let shared_output = SharedMatrix::from_matrix(&output);
    drop(input);
    drop(output);

    let clock = AtomicU64::new(0);
    let threads = config.threads;
    let mut summary = TrainSummary {
        anchored_words: anchors.len(),
        anchor_pairs: anchors.pair_count(),
        ..TrainSummary::default()
    };

    for epoch in 0..config.epochs {
        let epoch_stats: Vec<(f64, u64)> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..threads)
                .map(|tid| {
                    let sentences = &sentences;
                    let keep_probs = &keep_probs;
                    let table = &table;
                    let clock = &clock;
                    let shared_input = &shared_input;
                    let shared_output = &shared_output;
                    scope.spawn(move || {
                        let mut worker = Worker::new(
                            config,
                            shared_input,
                            shared_output,
                            table,
                            keep_probs,
                            clock,
                            decay_span,
                        );
                        // ChaCha streams keep worker generators independent;
                        // stream 0 is reserved for initialization.
                        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
                        rng.set_stream((epoch * threads + tid + 1) as u64);
                        let mut loss = 0.0;
                        let mut samples = 0u64;
                        for sentence in sentences.iter().skip(tid).step_by(threads) {
                            let (l, s) = worker.run_sentence(sentence, &mut rng);
                            loss += l;
                            samples += s;
                        }
                        (loss, samples)
                    })
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("training worker panicked"))
                .collect()
        });

        let loss_sum: f64 = epoch_stats.iter().map(|(l, _)| l).sum();
        let samples: u64 = epoch_stats.iter().map(|(_, s)| s).sum();
        let mean = if samples > 0 {
            loss_sum / samples as f64
        } else {
            warn!("epoch {epoch}: no training samples (corpus too sparse?)");
            0.0
        };
        if !mean.is_finite() {
            return Err(Error::NonFinite(format!(
                "mean loss {mean} at epoch {epoch} for language {}",
                corpus.language()
            )));
        }
        summary.epoch_mean_loss.push(mean);
        debug!(
            "lang {} epoch {epoch}: mean loss {mean:.6} over {samples} samples",
            corpus.language()
        );
    }

    summary.processed_words = clock.load(Ordering::Relaxed);
    let input_vectors = shared_input.to_matrix();
    let output_vectors = shared_output.to_matrix();
    if !input_vectors.is_finite() || !output_vectors.is_finite() {
        return Err(Error::NonFinite(format!(
            "non-finite weights after training language {} (lr too high?)",
            corpus.language()
        )));
    }

    Ok(TrainedModel {
        input_vectors,
        output_vectors,
        vocab: vocab.clone(),
        language: corpus.language().clone(),
        summary,
    })
}

/// Per-thread training state and scratch buffers.
struct Worker<'a> {
    config: &'a TrainConfig,
    input: &'a SharedMatrix,
    output: &'a SharedMatrix,
    table: &'a UnigramTable,
    keep_probs: &'a [f64],
    clock: &'a AtomicU64,
    decay_span: f64,
    lr_range: f64,
    sen: Vec<u32>,
    projection: Vec<f64>,
    err: Vec<f64>,
    coeffs: Vec<(usize, f64)>,
    negatives: Vec<usize>,
    context: Vec<u32>,
}

impl<'a> Worker<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        config: &'a TrainConfig,
        input: &'a SharedMatrix,
        output: &'a SharedMatrix,
        table: &'a UnigramTable,
        keep_probs: &'a [f64],
        clock: &'a AtomicU64,
        decay_span: f64,
    ) -> Self {
        let dim = config.dim;
        Worker {
            config,
            input,
            output,
            table,
            keep_probs,
            clock,
            decay_span,
            lr_range: config.initial_lr - config.min_lr,
            sen: Vec::with_capacity(64),
            projection: vec![0.0; dim],
            err: vec![0.0; dim],
            coeffs: Vec::with_capacity(config.negatives + 1),
            negatives: Vec::with_capacity(config.negatives),
            context: Vec::with_capacity(2 * config.window),
        }
    }

    #[inline]
    fn lr_at(&self, processed: u64) -> f64 {
        let frac = (processed as f64 / self.decay_span).min(1.0);
        self.config.initial_lr - self.lr_range * frac
    }

    /// Noise words for one sample; a draw equal to the positive word is
    /// retried up to 8 times, then that slot is skipped.
    fn draw_negatives(&mut self, positive: u32, rng: &mut ChaCha8Rng) {
        self.negatives.clear();
        for _ in 0..self.config.negatives {
            for _attempt in 0..8 {
                let w = self.table.sample(rng);
                if w as u32 != positive {
                    self.negatives.push(w);
                    break;
                }
            }
        }
    }

    /// Returns (loss sum, sample count) for one sentence.
    fn run_sentence(&mut self, sentence: &[u32], rng: &mut ChaCha8Rng) -> (f64, u64) {
        self.sen.clear();
        for &w in sentence {
            if rng.random::<f64>() < self.keep_probs[w as usize] {
                self.sen.push(w);
            }
        }
        if self.sen.is_empty() {
            return (0.0, 0);
        }
        let t0 = self.clock.fetch_add(self.sen.len() as u64, Ordering::Relaxed);

        let mut loss = 0.0;
        let mut samples = 0u64;
        for i in 0..self.sen.len() {
            let lr = self.lr_at(t0 + i as u64);
            let b = rng.random_range(1..=self.config.window);
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(self.sen.len() - 1);
            let center = self.sen[i];

            match self.config.mode {
                Mode::Cbow => {
                    self.context.clear();
                    for j in lo..=hi {
                        if j != i {
                            self.context.push(self.sen[j]);
                        }
                    }
                    if self.context.is_empty() {
                        continue;
                    }
                    self.draw_negatives(center, rng);
                    let context = std::mem::take(&mut self.context);
                    loss += self.apply(&context, center as usize, lr);
                    self.context = context;
                    samples += 1;
                }
                Mode::SkipGram => {
                    for j in lo..=hi {
                        if j == i {
                            continue;
                        }
                        let predicted = self.sen[j];
                        self.draw_negatives(predicted, rng);
                        loss += self.apply(&[center], predicted as usize, lr);
                        samples += 1;
                    }
                }
            }
        }
        (loss, samples)
    }

    /// One SGD step: projection from `input_words`, coefficients against the
    /// positive and the drawn negatives, then the updates.
    fn apply(&mut self, input_words: &[u32], positive: usize, lr: f64) -> f64 {
        let n = input_words.len() as f64;
        self.projection.fill(0.0);
        for &w in input_words {
            self.input.add_row_into(w as usize, &mut self.projection);
        }
        if input_words.len() > 1 {
            for v in &mut self.projection {
                *v /= n;
            }
        }

        let loss = step_terms(
            &self.projection,
            positive,
            &self.negatives,
            self.output,
            &mut self.coeffs,
        );

        self.err.fill(0.0);
        for &(row, a) in &self.coeffs {
            self.output
                .accumulate_and_update(row, a, lr * a, &self.projection, &mut self.err);
        }
        let scale = lr / n;
        for &w in input_words {
            self.input.add_scaled_row(w as usize, scale, &self.err);
        }
        loss
    }
}
