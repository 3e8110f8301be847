use super::{CorpusError, ParallelCorpus, SentencePair};

/// Length and length-ratio thresholds for discarding sentence pairs that
/// are too long for EM alignment or likely misaligned.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterPolicy {
    max_words: usize,
    max_ratio: f64,
}

impl FilterPolicy {
    pub const DEFAULT_MAX_WORDS: usize = 80;
    pub const DEFAULT_MAX_RATIO: f64 = 9.0;

    pub fn new(max_words: usize, max_ratio: f64) -> Result<Self, CorpusError> {
        if max_words < 1 {
            return Err(CorpusError::InvalidPolicy("max_words must be >= 1".into()));
        }
        if !(max_ratio >= 1.0) {
            return Err(CorpusError::InvalidPolicy(format!(
                "max_ratio must be >= 1, got {max_ratio}"
            )));
        }
        Ok(FilterPolicy { max_words, max_ratio })
    }

    pub fn max_words(&self) -> usize {
        self.max_words
    }

    pub fn max_ratio(&self) -> f64 {
        self.max_ratio
    }

    /// True when the pair should be discarded. The ratio test is symmetric:
    /// whichever side is longer is compared against the shorter one.
    pub fn rejects(&self, pair: &SentencePair) -> bool {
        let (s, t) = (pair.source.len(), pair.target.len());
        if s == 0 || t == 0 {
            return true;
        }
        if s > self.max_words || t > self.max_words {
            return true;
        }
        let (long, short) = if s >= t { (s, t) } else { (t, s) };
        long as f64 > self.max_ratio * short as f64
    }
}

impl Default for FilterPolicy {
    fn default() -> Self {
        FilterPolicy {
            max_words: Self::DEFAULT_MAX_WORDS,
            max_ratio: Self::DEFAULT_MAX_RATIO,
        }
    }
}

/// Partitions `corpus` into `(kept, removed)`, both in input order.
pub fn filter_pairs(corpus: &ParallelCorpus, policy: &FilterPolicy) -> (ParallelCorpus, ParallelCorpus) {
    let (removed, kept): (Vec<SentencePair>, Vec<SentencePair>) =
        corpus.pairs.iter().cloned().partition(|p| policy.rejects(p));
    (corpus.with_pairs(kept), corpus.with_pairs(removed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;
    use proptest::prelude::*;

    fn pair(id: usize, s: usize, t: usize) -> SentencePair {
        let side = |n: usize| Sentence::new((0..n).map(|i| format!("w{i}")).collect());
        SentencePair {
            id,
            source: side(s),
            target: side(t),
        }
    }

    fn corpus(lens: &[(usize, usize)]) -> ParallelCorpus {
        ParallelCorpus {
            pairs: lens.iter().enumerate().map(|(i, &(s, t))| pair(i, s, t)).collect(),
            ..Default::default()
        }
    }

    #[test]
    fn over_long_side_removed() {
        let p = FilterPolicy::default();
        assert!(p.rejects(&pair(0, 81, 10)));
        assert!(p.rejects(&pair(0, 10, 81)));
        assert!(!p.rejects(&pair(0, 80, 10)));
    }

    #[test]
    fn ratio_threshold_is_strict() {
        let p = FilterPolicy::default();
        assert!(p.rejects(&pair(0, 2, 19)));
        assert!(p.rejects(&pair(0, 19, 2)));
        assert!(!p.rejects(&pair(0, 9, 1)));
        assert!(!p.rejects(&pair(0, 1, 9)));
        assert!(p.rejects(&pair(0, 10, 1)));
    }

    #[test]
    fn empty_side_removed() {
        let p = FilterPolicy::default();
        assert!(p.rejects(&pair(0, 0, 3)));
        assert!(p.rejects(&pair(0, 3, 0)));
    }

    #[test]
    fn invalid_policies() {
        assert!(FilterPolicy::new(0, 9.0).is_err());
        assert!(FilterPolicy::new(10, 0.5).is_err());
        assert!(FilterPolicy::new(10, f64::NAN).is_err());
        assert!(FilterPolicy::new(1, 1.0).is_ok());
    }

    #[test]
    fn order_preserved() {
        let c = corpus(&[(3, 3), (81, 3), (2, 2), (0, 1), (4, 5)]);
        let (kept, removed) = filter_pairs(&c, &FilterPolicy::default());
        let ids = |c: &ParallelCorpus| c.pairs.iter().map(|p| p.id).collect::<Vec<_>>();
        assert_eq!(ids(&kept), [0, 2, 4]);
        assert_eq!(ids(&removed), [1, 3]);
    }

    proptest! {
        #[test]
        fn partitions_exactly(lens in prop::collection::vec((0usize..100, 0usize..100), 0..40),
                              max_words in 1usize..90, ratio in 1.0f64..12.0) {
            let c = corpus(&lens);
            let policy = FilterPolicy::new(max_words, ratio).unwrap();
            let (kept, removed) = filter_pairs(&c, &policy);
            prop_assert_eq!(kept.len() + removed.len(), c.len());
            let mut ids: Vec<usize> = kept.pairs.iter().chain(&removed.pairs).map(|p| p.id).collect();
            ids.sort_unstable();
            prop_assert_eq!(ids, (0..c.len()).collect::<Vec<_>>());
        }

        #[test]
        fn lax_policy_only_drops_empty(lens in prop::collection::vec((0usize..100, 0usize..100), 0..40)) {
            let c = corpus(&lens);
            let policy = FilterPolicy::new(usize::MAX, 1e12).unwrap();
            let (_, removed) = filter_pairs(&c, &policy);
            for p in &removed.pairs {
                prop_assert!(p.source.is_empty() || p.target.is_empty());
            }
            let empties = lens.iter().filter(|(s, t)| *s == 0 || *t == 0).count();
            prop_assert_eq!(removed.len(), empties);
        }
    }
}
