//! The sequential multi-language training procedure.
//!
//! A chain starts from a well-resourced language and walks toward the
//! low-resource target through related intermediates. Step 1 trains the
//! first language monolingually; every later step gathers the seed lexicons
//! pairing the new language with the languages already in the space
//! (all of them by default, only the immediate predecessor with
//! accumulation off), anchors the new language on them, trains it, and
//! appends the result to the multilingual space. The space only ever grows:
//! earlier languages' vectors are never touched again.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use sha2::{Digest, Sha256};

use crate::corpus::{build_vocab, Corpus};
use crate::embedding::{concat, load_text, save_text, EmbeddingSpace};
use crate::error::{Error, Result};
use crate::lang::Lang;
use crate::lexicon::{accumulate, load_lexicon, Lexicon};
use crate::trainer::{build_anchor_set, train, AnchorSet, Mode, TrainConfig};

/// Default minimum word frequency; kept low because target corpora are
/// small.
pub const DEFAULT_MIN_COUNT: u64 = 3;
/// Default vocabulary cap.
pub const DEFAULT_MAX_VOCAB: usize = 200_000;

/// Per-language overrides of the training and vocabulary settings.
#[derive(Debug, Clone, Default)]
pub struct TrainOverrides {
    pub dim: Option<usize>,
    pub window: Option<usize>,
    pub epochs: Option<usize>,
    pub negatives: Option<usize>,
    pub mode: Option<Mode>,
    pub initial_lr: Option<f64>,
    pub min_lr: Option<f64>,
    pub subsample: Option<f64>,
    pub unigram_exponent: Option<f64>,
    pub table_size: Option<usize>,
    pub min_count: Option<u64>,
    pub max_vocab: Option<usize>,
}

impl TrainOverrides {
    fn is_empty(&self) -> bool {
        self.dim.is_none()
            && self.window.is_none()
            && self.epochs.is_none()
            && self.negatives.is_none()
            && self.mode.is_none()
            && self.initial_lr.is_none()
            && self.min_lr.is_none()
            && self.subsample.is_none()
            && self.unigram_exponent.is_none()
            && self.table_size.is_none()
            && self.min_count.is_none()
            && self.max_vocab.is_none()
    }
}

/// A fully resolved chain run: languages in order, file locations, training
/// settings and the accumulation switch.
#[derive(Debug, Clone)]
pub struct ChainConfig {
    pub languages: Vec<Lang>,
    pub corpora: BTreeMap<Lang, PathBuf>,
    /// Dictionary files keyed by (earlier, later) chain position; the file's
    /// first column belongs to the earlier language.
    pub lexicons: BTreeMap<(Lang, Lang), PathBuf>,
    pub defaults: TrainConfig,
    pub min_count: u64,
    pub max_vocab: usize,
    pub overrides: BTreeMap<Lang, TrainOverrides>,
    /// Use the seed lexicons of all earlier languages (true) or only the
    /// immediate predecessor (false).
    pub accumulate: bool,
    pub checkpoint_dir: PathBuf,
    pub lowercase: bool,
}

impl ChainConfig {
    pub fn new(languages: Vec<Lang>, checkpoint_dir: impl Into<PathBuf>) -> Self {
        ChainConfig {
            languages,
            corpora: BTreeMap::new(),
            lexicons: BTreeMap::new(),
            defaults: TrainConfig::default(),
            min_count: DEFAULT_MIN_COUNT,
            max_vocab: DEFAULT_MAX_VOCAB,
            overrides: BTreeMap::new(),
            accumulate: true,
            checkpoint_dir: checkpoint_dir.into(),
            lowercase: false,
        }
    }

    /// Effective settings for one language: defaults plus its overrides.
    /// The training seed is offset by the chain position so every step gets
    /// its own deterministic stream.
    pub fn effective(&self, lang: &Lang) -> (TrainConfig, u64, usize) {
        let step = self
            .languages
            .iter()
            .position(|l| l == lang)
            .expect("language is in the chain");
        let mut config = self.defaults.clone();
        config.seed = config.seed.wrapping_add(step as u64);
        let mut min_count = self.min_count;
        let mut max_vocab = self.max_vocab;
        if let Some(ov) = self.overrides.get(lang) {
            if let Some(v) = ov.dim {
                config.dim = v;
            }
            if let Some(v) = ov.window {
                config.window = v;
            }
            if let Some(v) = ov.epochs {
                config.epochs = v;
            }
            if let Some(v) = ov.negatives {
                config.negatives = v;
            }
            if let Some(v) = ov.mode {
                config.mode = v;
            }
            if let Some(v) = ov.initial_lr {
                config.initial_lr = v;
            }
            if let Some(v) = ov.min_lr {
                config.min_lr = v;
            }
            if let Some(v) = ov.subsample {
                config.subsample_threshold = v;
            }
            if let Some(v) = ov.unigram_exponent {
                config.unigram_exponent = v;
            }
            if let Some(v) = ov.table_size {
                config.table_size = v;
            }
            if let Some(v) = ov.min_count {
                min_count = v;
            }
            if let Some(v) = ov.max_vocab {
                max_vocab = v;
            }
        }
        (config, min_count, max_vocab)
    }

    fn lexicon_path(&self, a: &Lang, b: &Lang) -> Option<&PathBuf> {
        self.lexicons
            .get(&(a.clone(), b.clone()))
            .or_else(|| self.lexicons.get(&(b.clone(), a.clone())))
    }

    /// Is a dictionary for (earlier, later) obtainable — directly or by
    /// pivoting the two head-language dictionaries?
    fn lexicon_available(&self, earlier: &Lang, later: &Lang) -> bool {
        if self.lexicon_path(earlier, later).is_some() {
            return true;
        }
        let head = &self.languages[0];
        earlier != head
            && self.lexicon_path(head, earlier).is_some()
            && self.lexicon_path(head, later).is_some()
    }

    /// Load (or derive by pivoting through the chain head) the lexicon from
    /// `earlier` to `later`.
    fn load_pair(&self, earlier: &Lang, later: &Lang) -> Result<Lexicon> {
        if let Some(path) = self.lexicons.get(&(earlier.clone(), later.clone())) {
            return load_lexicon(path, earlier.clone(), later.clone());
        }
        if let Some(path) = self.lexicons.get(&(later.clone(), earlier.clone())) {
            return Ok(load_lexicon(path, later.clone(), earlier.clone())?.reversed());
        }
        let head = &self.languages[0];
        let head_earlier = self.lexicon_path(head, earlier).ok_or_else(|| {
            Error::Config(format!("no lexicon for {earlier}-{later} and no pivot route"))
        })?;
        let head_later = self.lexicon_path(head, later).ok_or_else(|| {
            Error::Config(format!("no lexicon for {earlier}-{later} and no pivot route"))
        })?;
        let l_he = load_lexicon(head_earlier, head.clone(), earlier.clone())?;
        let l_hl = load_lexicon(head_later, head.clone(), later.clone())?;
        let derived = crate::lexicon::pivot(&l_he, &l_hl)?;
        info!(
            "derived {earlier}-{later} lexicon by pivoting through {head}: {} pairs",
            derived.len()
        );
        Ok(derived)
    }
}

/// Severity of a validation issue. Errors block the run; warnings do not.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone)]
pub struct Issue {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.severity {
            Severity::Error => write!(f, "error: {}", self.message),
            Severity::Warning => write!(f, "warning: {}", self.message),
        }
    }
}

fn err(message: impl Into<String>) -> Issue {
    Issue {
        severity: Severity::Error,
        message: message.into(),
    }
}

fn warn_issue(message: impl Into<String>) -> Issue {
    Issue {
        severity: Severity::Warning,
        message: message.into(),
    }
}

/// Check a configuration without running it. An output free of
/// `Severity::Error` issues means the chain is runnable.
pub fn validate(config: &ChainConfig) -> Vec<Issue> {
    let mut issues = Vec::new();

    if config.languages.len() < 2 {
        issues.push(err(format!(
            "a chain needs at least 2 languages, got {}",
            config.languages.len()
        )));
    }
    {
        let mut seen = std::collections::BTreeSet::new();
        for lang in &config.languages {
            if !seen.insert(lang) {
                issues.push(err(format!("language {lang} appears twice in the chain")));
            }
        }
    }

    let mut sizes: Vec<Option<u64>> = Vec::new();
    for lang in &config.languages {
        match config.corpora.get(lang) {
            None => {
                issues.push(err(format!("no corpus configured for {lang}")));
                sizes.push(None);
            }
            Some(path) => match fs::metadata(path) {
                Ok(meta) => sizes.push(Some(meta.len())),
                Err(e) => {
                    issues.push(err(format!(
                        "corpus for {lang} unreadable at {}: {e}",
                        path.display()
                    )));
                    sizes.push(None);
                }
            },
        }
    }
    // the head of the chain should be its best-resourced language
    for (i, pair) in sizes.windows(2).enumerate() {
        if let (Some(a), Some(b)) = (pair[0], pair[1]) {
            if b > a {
                issues.push(warn_issue(format!(
                    "corpus for {} ({b} bytes) is larger than its predecessor {} ({a} bytes); \
                     chains usually run from larger to smaller corpora",
                    config.languages[i + 1],
                    config.languages[i]
                )));
            }
        }
    }

    for ((a, b), path) in &config.lexicons {
        if !config.languages.contains(a) || !config.languages.contains(b) {
            issues.push(err(format!(
                "lexicon {a}-{b} references a language outside the chain"
            )));
        }
        if let Err(e) = fs::metadata(path) {
            issues.push(err(format!(
                "lexicon {a}-{b} unreadable at {}: {e}",
                path.display()
            )));
        }
    }

    // every step beyond the first needs at least one usable seed lexicon
    for (i, lang) in config.languages.iter().enumerate().skip(1) {
        let usable = if config.accumulate {
            config.languages[..i]
                .iter()
                .any(|earlier| config.lexicon_available(earlier, lang))
        } else {
            config.lexicon_available(&config.languages[i - 1], lang)
        };
        if !usable {
            let need = if config.accumulate {
                "any earlier chain language".to_string()
            } else {
                format!("its predecessor {}", config.languages[i - 1])
            };
            issues.push(err(format!(
                "{lang} has no seed lexicon pairing it with {need} (directly or via pivoting)"
            )));
        }
    }

    // embedding dimensions must agree across the whole chain
    let dims: Vec<(Lang, usize)> = config
        .languages
        .iter()
        .map(|l| (l.clone(), config.effective(l).0.dim))
        .collect();
    if let Some(first) = dims.first() {
        for (lang, dim) in &dims[1..] {
            if dim != &first.1 {
                issues.push(err(format!(
                    "dim override mismatch: {} has dim {} but {} has dim {dim}",
                    first.0, first.1, lang
                )));
            }
        }
    }

    for lang in &config.languages {
        let (tc, min_count, max_vocab) = config.effective(lang);
        if let Err(e) = tc.validate() {
            issues.push(err(format!("settings for {lang}: {e}")));
        }
        if min_count < 1 || max_vocab < 1 {
            issues.push(err(format!(
                "settings for {lang}: min_count and max_vocab must be at least 1"
            )));
        }
    }

    issues
}

/// One anchored training step in the report.
#[derive(Debug, Clone)]
pub struct StepRecord {
    /// 1-based chain position (the first anchored step is 2).
    pub step: usize,
    pub language: Lang,
    pub vocab_size: usize,
    pub anchored_words: usize,
    pub anchor_pairs: usize,
    pub dropped_source_oov: usize,
    pub dropped_target_oov: usize,
    pub epochs: usize,
    pub wall_ms: u128,
    pub checkpoint: PathBuf,
}

/// What happened during a chain run.
#[derive(Debug, Clone)]
pub struct ChainReport {
    pub base_language: Lang,
    pub base_vocab_size: usize,
    /// The first step was loaded from a cache or resume checkpoint.
    pub base_cached: bool,
    pub steps: Vec<StepRecord>,
    pub final_space_path: PathBuf,
}

impl ChainReport {
    /// Tab-separated record lines, one per chain step.
    pub fn machine_lines(&self) -> Vec<String> {
        let mut lines = vec![format!(
            "base\t{}\tvocab\t{}\tcached\t{}",
            self.base_language, self.base_vocab_size, self.base_cached
        )];
        for s in &self.steps {
            lines.push(format!(
                "step\t{}\t{}\tvocab\t{}\tanchored_words\t{}\tanchor_pairs\t{}\t\
                 dropped_src_oov\t{}\tdropped_trg_oov\t{}\tepochs\t{}\twall_ms\t{}",
                s.step,
                s.language,
                s.vocab_size,
                s.anchored_words,
                s.anchor_pairs,
                s.dropped_source_oov,
                s.dropped_target_oov,
                s.epochs,
                s.wall_ms
            ));
        }
        lines.push(format!("space\t{}", self.final_space_path.display()));
        lines
    }
}

fn checkpoint_path(config: &ChainConfig, step: usize) -> PathBuf {
    config.checkpoint_dir.join(format!("m{step}.vec"))
}

/// Fingerprint of everything that determines the first step's output:
/// corpus bytes plus the resolved settings. Used to reuse a cached first
/// checkpoint.
fn base_fingerprint(config: &ChainConfig) -> Result<String> {
    let lang = &config.languages[0];
    let corpus_path = config
        .corpora
        .get(lang)
        .ok_or_else(|| Error::Config(format!("no corpus for {lang}")))?;
    let bytes = fs::read(corpus_path).map_err(|e| Error::io(corpus_path, e))?;
    let (tc, min_count, max_vocab) = config.effective(lang);
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    hasher.update(
        format!(
            "{lang}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{}|{min_count}|{max_vocab}|{}",
            tc.dim,
            tc.window,
            tc.epochs,
            tc.negatives,
            tc.mode,
            tc.initial_lr,
            tc.min_lr,
            tc.subsample_threshold,
            tc.unigram_exponent,
            tc.table_size,
            tc.seed,
            config.lowercase,
        )
        .as_bytes(),
    );
    hasher.update([if tc.threads == 1 { 1u8 } else { 0u8 }]);
    Ok(hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

fn open_corpus(config: &ChainConfig, lang: &Lang) -> Corpus {
    Corpus::from_path(lang.clone(), &config.corpora[lang]).with_lowercase(config.lowercase)
}

/// Run the whole chain. See [`run_chain_from`] for resuming.
pub fn run_chain(config: &ChainConfig) -> Result<(EmbeddingSpace, ChainReport)> {
    run_chain_from(config, None)
}

/// Run the chain, optionally resuming at 1-based step `resume_from` from
/// the checkpoint written for the step before it. Validation failures abort
/// before any training starts.
pub fn run_chain_from(
    config: &ChainConfig,
    resume_from: Option<usize>,
) -> Result<(EmbeddingSpace, ChainReport)> {
    let issues = validate(config);
    for issue in issues.iter().filter(|i| i.severity == Severity::Warning) {
        warn!("{issue}");
    }
    let errors: Vec<String> = issues
        .iter()
        .filter(|i| i.severity == Severity::Error)
        .map(|i| i.message.clone())
        .collect();
    if !errors.is_empty() {
        return Err(Error::Config(errors.join("; ")));
    }

    fs::create_dir_all(&config.checkpoint_dir)
        .map_err(|e| Error::io(&config.checkpoint_dir, e))?;

    let n = config.languages.len();
    let start_step = match resume_from {
        None => 2,
        Some(s) => {
            if !(2..=n).contains(&s) {
                return Err(Error::Config(format!(
                    "resume step {s} out of range 2..={n}"
                )));
            }
            s
        }
    };

    let mut report_steps = Vec::new();
    let mut base_cached = false;

    // Establish M_{start_step - 1}.
    let mut space = if let Some(s) = resume_from {
        let path = checkpoint_path(config, s - 1);
        let space = load_text(&path)?;
        let expected: Vec<&Lang> = config.languages[..s - 1].iter().collect();
        let present: Vec<&Lang> = space.languages().collect();
        if present != expected {
            return Err(Error::Config(format!(
                "checkpoint {} holds languages {:?}, expected {:?}",
                path.display(),
                present.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                expected.iter().map(|l| l.to_string()).collect::<Vec<_>>()
            )));
        }
        base_cached = true;
        info!("resumed from {}", path.display());
        space
    } else {
        train_base(config, &mut base_cached)?
    };

    let base_language = config.languages[0].clone();
    let base_vocab_size = space.language_len(&base_language);

    // Anchored steps.
    for (idx, lang) in config.languages.iter().enumerate() {
        let step = idx + 1;
        if step < start_step {
            continue;
        }
        let started = Instant::now();
        let (tc, min_count, max_vocab) = config.effective(lang);
        let corpus = open_corpus(config, lang);
        let vocab = build_vocab(&corpus, min_count, max_vocab)?;

        let earlier: Vec<&Lang> = if config.accumulate {
            config.languages[..idx].iter().collect()
        } else {
            vec![&config.languages[idx - 1]]
        };
        let mut seed_lexicons = Vec::new();
        for e in earlier {
            if config.lexicon_available(e, lang) {
                seed_lexicons.push(config.load_pair(e, lang)?);
            }
        }
        let refs: Vec<&Lexicon> = seed_lexicons.iter().collect();
        let accumulated = accumulate(&refs, lang)?;
        let anchors = build_anchor_set(&space, &accumulated, &vocab);
        info!(
            "step {step} ({lang}): vocab {}, {} anchored words from {} pairs",
            vocab.len(),
            anchors.len(),
            anchors.pair_count()
        );

        let model = train(&corpus, &vocab, &tc, &anchors)
            .map_err(|e| Error::Config(format!("training step {step} ({lang}) failed: {e}")))?;
        let new_space = model.to_embedding_space()?;
        space = concat(&space, &new_space)?;

        let checkpoint = checkpoint_path(config, step);
        save_text(&space, &checkpoint)?;

        report_steps.push(StepRecord {
            step,
            language: lang.clone(),
            vocab_size: vocab.len(),
            anchored_words: anchors.len(),
            anchor_pairs: anchors.pair_count(),
            dropped_source_oov: anchors.drop_report().source_oov,
            dropped_target_oov: anchors.drop_report().target_oov,
            epochs: tc.epochs,
            wall_ms: started.elapsed().as_millis(),
            checkpoint,
        });
    }

    let report = ChainReport {
        base_language,
        base_vocab_size,
        base_cached,
        steps: report_steps,
        final_space_path: checkpoint_path(config, n),
    };
    Ok((space, report))
}

/// Train (or reuse) the first, monolingual step and write its checkpoint
/// and fingerprint sidecar.
fn train_base(config: &ChainConfig, cached: &mut bool) -> Result<EmbeddingSpace> {
    let lang = &config.languages[0];
    let checkpoint = checkpoint_path(config, 1);
    let hash_path = config.checkpoint_dir.join("m1.hash");
    let fingerprint = base_fingerprint(config)?;

    if checkpoint.exists() {
        if let Ok(stored) = fs::read_to_string(&hash_path) {
            if stored.trim() == fingerprint {
                info!("reusing cached first checkpoint {}", checkpoint.display());
                *cached = true;
                return load_text(&checkpoint);
            }
        }
    }

    let (tc, min_count, max_vocab) = config.effective(lang);
    let corpus = open_corpus(config, lang);
    let vocab = build_vocab(&corpus, min_count, max_vocab)?;
    let model = train(&corpus, &vocab, &tc, &AnchorSet::empty(tc.dim))
        .map_err(|e| Error::Config(format!("training step 1 ({lang}) failed: {e}")))?;
    let space = model.to_embedding_space()?;
    save_text(&space, &checkpoint)?;
    fs::write(&hash_path, &fingerprint).map_err(|e| Error::io(&hash_path, e))?;
    Ok(space)
}

// ---------------------------------------------------------------------------
// Configuration file parsing
// ---------------------------------------------------------------------------

/// Parse a chain configuration file.
///
/// The format is line-oriented `key = value` with one `[language]` section
/// per chain member; `#` starts a comment. The preamble sets the chain
/// (`languages = l1 l2 l3`), `checkpoint_dir`, `accumulate`, `seed`,
/// `threads`, `lowercase` and default training settings (`dim`, `window`,
/// `epochs`, `negatives`, `mode`, `initial_lr`, `min_lr`, `subsample`,
/// `unigram_exponent`, `table_size`, `min_count`, `max_vocab`). Each
/// language section sets `corpus = path`, optional `lexicon <other> = path`
/// entries (the file's first column belongs to whichever of the two
/// languages comes earlier in the chain) and any per-language training
/// overrides. Relative paths resolve against the config file's directory.
pub fn parse_config(path: impl AsRef<Path>) -> Result<ChainConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base_dir = path.parent().unwrap_or(Path::new("."));

    let mut languages: Option<Vec<Lang>> = None;
    let mut preamble: Vec<(usize, String, String)> = Vec::new();
    let mut sections: Vec<(Lang, Vec<(usize, String, String)>)> = Vec::new();
    let mut current: Option<usize> = None;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let lang = Lang::new(name.trim())
                .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
            sections.push((lang, Vec::new()));
            current = Some(sections.len() - 1);
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected `key = value` or `[language]`, got {line:?}"),
            ));
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if value.is_empty() {
            return Err(Error::parse(path, lineno, format!("empty value for {key:?}")));
        }
        if key == "languages" {
            let langs: Result<Vec<Lang>> = value.split_whitespace().map(Lang::new).collect();
            languages = Some(langs.map_err(|e| Error::parse(path, lineno, e.to_string()))?);
            continue;
        }
        match current {
            None => preamble.push((lineno, key, value)),
            Some(i) => sections[i].1.push((lineno, key, value)),
        }
    }

    let languages = languages
        .ok_or_else(|| Error::Config(format!("{}: missing `languages =` line", path.display())))?;
    let mut config = ChainConfig::new(languages.clone(), base_dir.join("checkpoints"));

    let parse_err =
        |lineno: usize, msg: String| Error::parse(path, lineno, msg);

    // Defaults in the preamble.
    for (lineno, key, value) in preamble {
        let mut overrides = TrainOverrides::default();
        if apply_override_key(&mut overrides, &key, &value)
            .map_err(|m| parse_err(lineno, m))?
        {
            apply_overrides_to_defaults(&mut config, &overrides);
            continue;
        }
        match key.as_str() {
            "checkpoint_dir" => config.checkpoint_dir = base_dir.join(&value),
            "accumulate" => {
                config.accumulate = parse_bool(&value).map_err(|m| parse_err(lineno, m))?
            }
            "lowercase" => {
                config.lowercase = parse_bool(&value).map_err(|m| parse_err(lineno, m))?
            }
            "seed" => {
                config.defaults.seed =
                    value.parse().map_err(|_| parse_err(lineno, format!("bad seed {value:?}")))?
            }
            "threads" => {
                config.defaults.threads = value
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad threads {value:?}")))?
            }
            other => {
                return Err(parse_err(lineno, format!("unknown key {other:?}")));
            }
        }
    }

    // Language sections.
    for (lang, entries) in sections {
        if !languages.contains(&lang) {
            return Err(Error::Config(format!(
                "{}: section [{lang}] is not in the chain",
                path.display()
            )));
        }
        let mut overrides = TrainOverrides::default();
        for (lineno, key, value) in entries {
            if apply_override_key(&mut overrides, &key, &value)
                .map_err(|m| parse_err(lineno, m))?
            {
                continue;
            }
            if key == "corpus" {
                config.corpora.insert(lang.clone(), base_dir.join(&value));
                continue;
            }
            if let Some(other) = key.strip_prefix("lexicon ") {
                let other = Lang::new(other.trim())
                    .map_err(|e| parse_err(lineno, e.to_string()))?;
                if !languages.contains(&other) {
                    return Err(parse_err(
                        lineno,
                        format!("lexicon partner {other} is not in the chain"),
                    ));
                }
                // normalize the key to chain order
                let ai = languages.iter().position(|l| l == &other).unwrap();
                let bi = languages.iter().position(|l| l == &lang).unwrap();
                let key = if ai < bi {
                    (other.clone(), lang.clone())
                } else {
                    (lang.clone(), other.clone())
                };
                if config
                    .lexicons
                    .insert(key, base_dir.join(&value))
                    .is_some()
                {
                    return Err(parse_err(
                        lineno,
                        format!("lexicon {other}-{lang} configured twice"),
                    ));
                }
                continue;
            }
            return Err(parse_err(lineno, format!("unknown key {key:?}")));
        }
        if !overrides.is_empty() {
            config.overrides.insert(lang.clone(), overrides);
        }
    }

    Ok(config)
}

fn parse_bool(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected true/false, got {other:?}")),
    }
}

/// Apply one training-settings key to `overrides`; returns false when the
/// key is not a training setting.
fn apply_override_key(
    overrides: &mut TrainOverrides,
    key: &str,
    value: &str,
) -> std::result::Result<bool, String> {
    macro_rules! parse_into {
        ($slot:expr) => {{
            $slot = Some(
                value
                    .parse()
                    .map_err(|_| format!("bad value {value:?} for {key:?}"))?,
            );
            Ok(true)
        }};
    }
    match key {
        "dim" => parse_into!(overrides.dim),
        "window" => parse_into!(overrides.window),
        "epochs" => parse_into!(overrides.epochs),
        "negatives" => parse_into!(overrides.negatives),
        "mode" => parse_into!(overrides.mode),
        "initial_lr" => parse_into!(overrides.initial_lr),
        "min_lr" => parse_into!(overrides.min_lr),
        "subsample" => parse_into!(overrides.subsample),
        "unigram_exponent" => parse_into!(overrides.unigram_exponent),
        "table_size" => parse_into!(overrides.table_size),
        "min_count" => parse_into!(overrides.min_count),
        "max_vocab" => parse_into!(overrides.max_vocab),
        _ => Ok(false),
    }
}

fn apply_overrides_to_defaults(config: &mut ChainConfig, ov: &TrainOverrides) {
    if let Some(v) = ov.dim {
        config.defaults.dim = v;
    }
    if let Some(v) = ov.window {
        config.defaults.window = v;
    }
    if let Some(v) = ov.epochs {
        config.defaults.epochs = v;
    }
    if let Some(v) = ov.negatives {
        config.defaults.negatives = v;
    }
    if let Some(v) = ov.mode {
        config.defaults.mode = v;
    }
    if let Some(v) = ov.initial_lr {
        config.defaults.initial_lr = v;
    }
    if let Some(v) = ov.min_lr {
        config.defaults.min_lr = v;
    }
    if let Some(v) = ov.subsample {
        config.defaults.subsample_threshold = v;
    }
    if let Some(v) = ov.unigram_exponent {
        config.defaults.unigram_exponent = v;
    }
    if let Some(v) = ov.table_size {
        config.defaults.table_size = v;
    }
    if let Some(v) = ov.min_count {
        config.min_count = v;
    }
    if let Some(v) = ov.max_vocab {
        config.max_vocab = v;
    }
}
