use std::collections::BTreeMap;

use super::{check_order, LmError, BOS, EOS};
use crate::corpus::Sentence;

/// Raw n-gram counts of a padded corpus. Only n-grams ending at a predicted
/// position (a word or `</s>`) are counted, so `<s>` never appears as a
/// unigram.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct NGramCounts {
    order: usize,
    counts: Vec<BTreeMap<Vec<String>, u64>>,
}

pub fn count_ngrams<'a>(corpus: impl IntoIterator<Item = &'a Sentence>, order: usize) -> Result<NGramCounts, LmError> {
    check_order(order)?;
    let mut counts = vec![BTreeMap::new(); order];
    for sentence in corpus {
        let mut padded: Vec<&str> = vec![BOS; order - 1];
        padded.extend(sentence.iter().map(String::as_str));
        padded.push(EOS);
        for end in order - 1..padded.len() {
            for k in 1..=order {
                let gram: Vec<String> = padded[end + 1 - k..=end].iter().map(|w| w.to_string()).collect();
                *counts[k - 1].entry(gram).or_insert(0) += 1;
            }
        }
    }
    Ok(NGramCounts { order, counts })
}

impl NGramCounts {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(BTreeMap::is_empty)
    }

    /// Raw counts of the k-grams, `1 <= k <= order`.
    pub fn raw(&self, k: usize) -> &BTreeMap<Vec<String>, u64> {
        &self.counts[k - 1]
    }

    pub fn get(&self, gram: &[&str]) -> u64 {
        let key: Vec<String> = gram.iter().map(|w| w.to_string()).collect();
        self.counts
            .get(gram.len().wrapping_sub(1))
            .and_then(|m| m.get(&key))
            .copied()
            .unwrap_or(0)
    }

    /// Number of distinct words seen immediately before each k-gram, for
    /// `k < order`.
    pub fn continuation(&self, k: usize) -> BTreeMap<Vec<String>, u64> {
        assert!(k < self.order);
        let mut out = BTreeMap::new();
        for gram in self.counts[k].keys() {
            *out.entry(gram[1..].to_vec()).or_insert(0) += 1;
        }
        out
    }

    /// Counts used by the estimator at order k: raw at the highest order,
    /// continuation counts below it.
    pub fn adjusted(&self, k: usize) -> BTreeMap<Vec<String>, u64> {
        if k == self.order {
            self.counts[k - 1].clone()
        } else {
            self.continuation(k)
        }
    }

    /// Occurrences of each (k-1)-token history before a predicted position.
    pub fn context_totals(&self, k: usize) -> BTreeMap<Vec<String>, u64> {
        let mut out = BTreeMap::new();
        for (gram, c) in &self.counts[k - 1] {
            *out.entry(gram[..k - 1].to_vec()).or_insert(0) += c;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(line: &str) -> Sentence {
        Sentence::from_whitespace(line)
    }

    #[test]
    fn unigram_counts() {
        let c = count_ngrams(&[s("a")], 1).unwrap();
        assert_eq!(c.raw(1).len(), 2);
        assert_eq!(c.get(&["a"]), 1);
        assert_eq!(c.get(&[EOS]), 1);
        assert_eq!(c.get(&[BOS]), 0);
    }

    #[test]
    fn bigram_counts() {
        let c = count_ngrams(&[s("a a")], 2).unwrap();
        assert_eq!(c.raw(2).len(), 3);
        assert_eq!(c.get(&["a", "a"]), 1);
        assert_eq!(c.get(&[BOS, "a"]), 1);
        assert_eq!(c.get(&["a", EOS]), 1);
        assert_eq!(c.get(&["a"]), 2);
    }

    #[test]
    fn empty_corpus() {
        let c = count_ngrams(&[], 3).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn order_range() {
        assert_eq!(count_ngrams(&[], 0), Err(LmError::InvalidOrder(0)));
        assert_eq!(count_ngrams(&[], 6), Err(LmError::InvalidOrder(6)));
    }

    #[test]
    fn full_padding() {
        let c = count_ngrams(&[s("x")], 3).unwrap();
        assert_eq!(c.get(&[BOS, BOS, "x"]), 1);
        assert_eq!(c.get(&[BOS, "x", EOS]), 1);
        assert_eq!(c.get(&[BOS, BOS]), 0);
    }

    #[test]
    fn extension_counts_are_consistent() {
        let corpus = [s("a b a b c"), s("b a"), s(""), s("c c c")];
        for order in 2..=4 {
            let c = count_ngrams(&corpus, order).unwrap();
            for k in 2..=order {
                // count each history independently from the padded text
                let mut hist: BTreeMap<Vec<String>, u64> = BTreeMap::new();
                for sent in &corpus {
                    let mut padded: Vec<String> = vec![BOS.to_string(); order - 1];
                    padded.extend(sent.iter().cloned());
                    padded.push(EOS.into());
                    for end in order - 1..padded.len() {
                        *hist.entry(padded[end + 1 - k..end].to_vec()).or_default() += 1;
                    }
                }
                assert_eq!(c.context_totals(k), hist);
            }
        }
    }

    #[test]
    fn continuation_counts() {
        let c = count_ngrams(&[s("a c"), s("b c"), s("a c")], 2).unwrap();
        let cont = c.continuation(1);
        // c is preceded by a and b
        assert_eq!(cont[&vec!["c".to_string()]], 2);
        assert_eq!(cont[&vec![EOS.to_string()]], 1);
        assert_eq!(cont[&vec!["a".to_string()]], 1);
    }
}
