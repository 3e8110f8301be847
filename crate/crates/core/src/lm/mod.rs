//! Interpolated modified Kneser-Ney n-gram language models.
//!
//! Training pads each sentence with `order - 1` start symbols and one end
//! symbol, counts every n-gram ending at a predicted position, and stores
//! the interpolated conditional probabilities together with the backoff
//! weights needed to reconstruct unseen events. All probabilities are
//! log10, as in the ARPA format.

mod arpa;
mod counts;
mod estimate;

use std::collections::BTreeMap;

use thiserror::Error;

use crate::corpus::Sentence;

pub use arpa::{read_arpa, write_arpa};
pub use counts::{count_ngrams, NGramCounts};
pub use estimate::{estimate_mkn, Discounts, MknOptions};

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<unk>";

pub const MAX_ORDER: usize = 5;
pub const DEFAULT_ORDER: usize = 5;

/// Log10 probability given to events that cannot occur, such as predicting
/// the start symbol.
pub const LOG_ZERO: f64 = -99.0;

#[derive(Debug, Error, PartialEq)]
pub enum LmError {
    #[error("n-gram order must be between 1 and {MAX_ORDER}, got {0}")]
    InvalidOrder(usize),

    #[error("cannot estimate a model from an empty corpus")]
    EmptyCounts,

    #[error("ARPA line {line}: {message}")]
    Arpa { line: usize, message: String },
}

pub(crate) fn check_order(order: usize) -> Result<(), LmError> {
    if (1..=MAX_ORDER).contains(&order) {
        Ok(())
    } else {
        Err(LmError::InvalidOrder(order))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NGramEntry {
    pub log10_prob: f64,
    /// Present when the n-gram is a context for the next order up.
    pub log10_backoff: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGramModel {
    order: usize,
    /// `entries[k - 1]` holds the k-grams.
    entries: Vec<BTreeMap<Vec<String>, NGramEntry>>,
    /// Estimation-time discounts, one per order; empty for models read
    /// from ARPA.
    discounts: Vec<Discounts>,
}

impl NGramModel {
    pub(crate) fn from_parts(
        order: usize,
        entries: Vec<BTreeMap<Vec<String>, NGramEntry>>,
        discounts: Vec<Discounts>,
    ) -> Self {
        debug_assert_eq!(entries.len(), order);
        NGramModel {
            order,
            entries,
            discounts,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self, k: usize) -> &BTreeMap<Vec<String>, NGramEntry> {
        &self.entries[k - 1]
    }

    pub fn discounts(&self) -> &[Discounts] {
        &self.discounts
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.entries[0].contains_key([word.to_owned()].as_slice())
    }

    /// Words that can be predicted: every unigram except the start symbol.
    /// Includes `</s>` and `<unk>`.
    pub fn vocabulary(&self) -> impl Iterator<Item = &str> {
        self.entries[0].keys().map(|k| k[0].as_str()).filter(|w| *w != BOS)
    }

    /// Every stored context: the empty context plus each n-gram carrying a
    /// backoff weight.
    pub fn contexts(&self) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for level in &self.entries[..self.order - 1] {
            out.extend(
                level
                    .iter()
                    .filter(|(_, e)| e.log10_backoff.is_some())
                    .map(|(k, _)| k.clone()),
            );
        }
        out
    }

    fn lookup(&self, ngram: &[String]) -> Option<&NGramEntry> {
        self.entries.get(ngram.len().checked_sub(1)?)?.get(ngram)
    }

    fn map_word(&self, word: &str) -> String {
        if self.contains_word(word) {
            word.to_owned()
        } else {
            UNK.to_owned()
        }
    }

    /// log10 p(word | context). Only the rightmost `order - 1` context
    /// tokens are used; unknown words map to `<unk>`.
    pub fn logprob<S: AsRef<str>>(&self, word: &str, context: &[S]) -> f64 {
        let keep = context.len().min(self.order - 1);
        let mut gram: Vec<String> = context[context.len() - keep..]
            .iter()
            .map(|w| self.map_word(w.as_ref()))
            .collect();
        gram.push(self.map_word(word));

        let mut backoff = 0.0;
        for start in 0..gram.len() {
            if let Some(e) = self.lookup(&gram[start..]) {
                return backoff + e.log10_prob;
            }
            if let Some(bo) = self.lookup(&gram[start..gram.len() - 1]).and_then(|e| e.log10_backoff) {
                backoff += bo;
            }
        }
        // <unk> is always a unigram unless the model was hand-edited
        backoff + LOG_ZERO
    }

    /// Per-token log10 probabilities of `sentence` followed by `</s>`,
    /// starting from a full start-symbol context.
    pub fn token_logprobs<S: AsRef<str>>(&self, sentence: &[S]) -> Vec<f64> {
        let mut history: Vec<String> = vec![BOS.to_owned(); self.order - 1];
        let mut out = Vec::with_capacity(sentence.len() + 1);
        for w in sentence.iter().map(AsRef::as_ref).chain([EOS]) {
            out.push(self.logprob(w, &history));
            history.push(w.to_owned());
        }
        out
    }

    pub fn score_sentence(&self, sentence: &Sentence) -> f64 {
        self.token_logprobs(sentence.tokens()).iter().sum()
    }

    /// 10^(-total / N) with N counting one `</s>` per sentence.
    pub fn perplexity<'a>(&self, corpus: impl IntoIterator<Item = &'a Sentence>) -> f64 {
        let (mut total, mut n) = (0.0, 0usize);
        for s in corpus {
            total += self.score_sentence(s);
            n += s.len() + 1;
        }
        if n == 0 {
            return 1.0;
        }
        10f64.powf(-total / n as f64)
    }
}

/// Counts and estimates in one step.
pub fn train<'a>(
    corpus: impl IntoIterator<Item = &'a Sentence>,
    order: usize,
    options: &MknOptions,
) -> Result<NGramModel, LmError> {
    let counts = count_ngrams(corpus, order)?;
    estimate_mkn(&counts, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corpus(lines: &[&str]) -> Vec<Sentence> {
        lines.iter().map(|l| Sentence::from_whitespace(l)).collect()
    }

    fn model(lines: &[&str], order: usize) -> NGramModel {
        train(&corpus(lines), order, &MknOptions::default()).unwrap()
    }

    fn mass(m: &NGramModel, context: &[String]) -> f64 {
        m.vocabulary().map(|w| 10f64.powf(m.logprob(w, context))).sum()
    }

    #[test]
    fn unigram_table_by_hand() {
        // counts a:2 b:1 </s>:1; n1=2 n2=1 n3=0 so D1=0.5, D2=2; gamma=3/4
        // spread over {a, b, </s>, <unk>}
        let m = model(&["a a b"], 1);
        let p = |w: &str| 10f64.powf(m.logprob::<&str>(w, &[]));
        assert!((p("a") - 0.1875).abs() < 1e-12);
        assert!((p("b") - 0.3125).abs() < 1e-12);
        assert!((p(EOS) - 0.3125).abs() < 1e-12);
        assert!((p(UNK) - 0.1875).abs() < 1e-12);
        assert!((p("zebra") - 0.1875).abs() < 1e-12);
    }

    #[test]
    fn normalized_everywhere() {
        let lines = [
            "the cat sat on the mat",
            "the dog sat",
            "a cat and a dog",
            "the the the",
        ];
        for order in 1..=5 {
            let m = model(&lines, order);
            for ctx in m.contexts() {
                let total = mass(&m, &ctx);
                assert!((total - 1.0).abs() < 1e-9, "order {order} ctx {ctx:?} sums to {total}");
            }
        }
    }

    #[test]
    fn all_distinct_words_takes_fallback() {
        let m = model(&["one two three four five"], 3);
        assert!(m.discounts().iter().any(|d| d.fallback));
        for ctx in m.contexts() {
            assert!((mass(&m, &ctx) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn context_is_truncated() {
        let m = model(&["a b c d", "a b d c"], 2);
        let long = ["x", "y", "a", "b"];
        assert_eq!(m.logprob("c", &long), m.logprob("c", &["b"]));
    }

    #[test]
    fn oov_is_finite() {
        let m = model(&["a b", "b a"], 3);
        let lp = m.logprob("nope", &["a"]);
        assert!(lp.is_finite() && lp < 0.0);
        assert_eq!(lp, m.logprob(UNK, &["a"]));
    }

    #[test]
    fn sentence_score_is_sum_of_tokens() {
        let m = model(&["a b c", "b c a", "c a b"], 3);
        let s = Sentence::from(["a", "c", "b"]);
        let by_hand = m.logprob(EOS, &["c", "b"])
            + m.logprob("b", &["a", "c"])
            + m.logprob("c", &[BOS, "a"])
            + m.logprob("a", &[BOS, BOS]);
        assert!((m.score_sentence(&s) - by_hand).abs() < 1e-12);
        let empty = Sentence::default();
        assert_eq!(m.score_sentence(&empty), m.logprob(EOS, &[BOS, BOS]));
    }

    #[test]
    fn bigram_beats_unigram_on_training_text() {
        let text = include_str!("../../data/toy_lm_corpus.txt");
        let c: Vec<Sentence> = text.lines().map(Sentence::from_whitespace).collect();
        let p1 = train(&c, 1, &MknOptions::default()).unwrap().perplexity(&c);
        let p2 = train(&c, 2, &MknOptions::default()).unwrap().perplexity(&c);
        assert!(p2 <= p1, "bigram {p2} vs unigram {p1}");
    }

    #[test]
    fn closed_vocabulary() {
        let opts = MknOptions {
            closed_vocabulary: true,
        };
        let m = train(&corpus(&["a b", "b a a"]), 2, &opts).unwrap();
        assert_eq!(m.logprob::<&str>(UNK, &[]), LOG_ZERO);
        let seen: f64 = m
            .vocabulary()
            .filter(|w| *w != UNK)
            .map(|w| 10f64.powf(m.logprob::<&str>(w, &[])))
            .sum();
        assert!((seen - 1.0).abs() < 1e-9);
    }

    #[test]
    fn deterministic_training() {
        let a = model(&["x y z", "y z x"], 4);
        let b = model(&["x y z", "y z x"], 4);
        assert_eq!(write_arpa(&a), write_arpa(&b));
    }
}
