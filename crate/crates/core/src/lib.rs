//! Multilingual static word embeddings for low-resource languages.
//!
//! The library grows a shared embedding space one language at a time along a
//! user-defined chain. The first language is trained monolingually with
//! word2vec; every later language is trained with its seed-dictionary words
//! initialized at the vectors of their translations already in the space, so
//! the new language comes out aligned with everything trained before it.
//! Alignment quality is measured with bilingual lexicon induction (precision
//! at k under cosine or CSLS retrieval).
//!
//! Module map:
//!
//! - [`corpus`]: tokenized corpora and frequency-constrained vocabularies
//! - [`lexicon`]: bilingual dictionaries — loading, pivoting, accumulation
//! - [`embedding`]: language-tagged vector spaces and the text interchange format
//! - [`trainer`]: CBOW / skip-gram negative sampling with anchor initialization
//! - [`chain`]: the sequential multi-language training procedure
//! - [`eval`]: bilingual lexicon induction evaluation
//! - [`synth`]: synthetic cipher corpora for end-to-end experiments

pub mod chain;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod lang;
pub mod lexicon;
pub mod synth;
pub mod trainer;

pub use chain::{parse_config, run_chain, run_chain_from, ChainConfig, ChainReport, StepRecord};
pub use corpus::{build_vocab, keep_probability, Corpus, Vocabulary};
pub use embedding::EmbeddingSpace;
pub use error::{Error, Result};
pub use eval::{precision_at_k, EvalConfig, EvalReport, Retrieval};
pub use lang::{Lang, TaggedWord};
pub use lexicon::{accumulate, load_lexicon, pivot, AccumulatedLexicon, Lexicon};
pub use synth::{generate, SynthOutput, SynthSpec};
pub use trainer::{
    build_anchor_set, init_weights, train, AnchorSet, Mode, TrainConfig, TrainedModel,
};

/// Crate version, stamped into reproducibility headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
