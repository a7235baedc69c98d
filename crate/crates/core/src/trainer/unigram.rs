//! Negative-sampling distribution table.

use rand::Rng;

use crate::corpus::Vocabulary;

/// Precomputed table for drawing noise words with probability proportional
/// to `count^exponent`. Drawing a uniform slot approximates the smoothed
/// unigram distribution to within one slot per word.
#[derive(Debug, Clone)]
pub struct UnigramTable {
    table: Vec<u32>,
}

/// Build the sampling table over the whole vocabulary. Slot assignment uses
/// the midpoint rule: slot `a` belongs to the word whose cumulative
/// probability interval contains `(a + 0.5) / table_size`, so each word's
/// slot share deviates from its exact probability by at most one slot.
pub fn unigram_table(vocab: &Vocabulary, exponent: f64, table_size: usize) -> UnigramTable {
    assert!(!vocab.is_empty(), "unigram table needs a nonempty vocabulary");
    assert!(table_size >= 1);

    let weights: Vec<f64> = (0..vocab.len())
        .map(|r| (vocab.count(r) as f64).powf(exponent))
        .collect();
    let total: f64 = weights.iter().sum();

    let mut table = Vec::with_capacity(table_size);
    let mut word = 0usize;
    let mut cumulative = weights[0] / total;
    for slot in 0..table_size {
        let midpoint = (slot as f64 + 0.5) / table_size as f64;
        while midpoint > cumulative && word + 1 < vocab.len() {
            word += 1;
            cumulative += weights[word] / total;
        }
        table.push(word as u32);
    }
    UnigramTable { table }
}

impl UnigramTable {
    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    /// Draw one word rank.
    #[inline]
    pub fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        self.table[rng.random_range(0..self.table.len())] as usize
    }

    /// Slots occupied by each word rank (for tests and inspection).
    pub fn slot_counts(&self, vocab_len: usize) -> Vec<usize> {
        let mut counts = vec![0usize; vocab_len];
        for &w in &self.table {
            counts[w as usize] += 1;
        }
        counts
    }
}
