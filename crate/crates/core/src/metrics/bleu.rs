use std::collections::HashMap;

use super::MetricError;
use crate::corpus::Sentence;

pub const DEFAULT_MAX_N: usize = 4;

/// Count floor used for zero n-gram matches in smoothed mode.
pub const BLEU_SMOOTHING_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BleuSmoothing {
    /// Any order without matches gives 0.
    #[default]
    Strict,
    /// Zero match counts are floored at [`BLEU_SMOOTHING_FLOOR`].
    Floor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BleuScore {
    pub score: f64,
    pub precisions: Vec<f64>,
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub brevity_penalty: f64,
    pub hyp_len: usize,
    pub ref_len: usize,
}

fn ngram_counts(tokens: &[String], n: usize) -> HashMap<&[String], usize> {
    let mut m = HashMap::new();
    if tokens.len() >= n {
        for w in tokens.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// Corpus BLEU with clipped counts, geometric mean over orders 1..=max_n and
/// the brevity penalty exp(1 - r/c) for c <= r.
pub fn bleu(
    hyps: &[Sentence],
    refs: &[Sentence],
    max_n: usize,
    smoothing: BleuSmoothing,
) -> Result<BleuScore, MetricError> {
    if hyps.len() != refs.len() {
        return Err(MetricError::LengthMismatch {
            hypotheses: hyps.len(),
            references: refs.len(),
        });
    }
    if hyps.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    let max_n = max_n.max(1);
    let mut matches = vec![0usize; max_n];
    let mut totals = vec![0usize; max_n];
    let (mut hyp_len, mut ref_len) = (0, 0);
    for (h, r) in hyps.iter().zip(refs) {
        hyp_len += h.len();
        ref_len += r.len();
        for n in 1..=max_n {
            let rc = ngram_counts(r.tokens(), n);
            for (gram, c) in ngram_counts(h.tokens(), n) {
                matches[n - 1] += c.min(rc.get(gram).copied().unwrap_or(0));
                totals[n - 1] += c;
            }
        }
    }

    let precisions: Vec<f64> = matches
        .iter()
        .zip(&totals)
        .map(|(&m, &t)| match smoothing {
            BleuSmoothing::Strict if t == 0 => 0.0,
            BleuSmoothing::Strict => m as f64 / t as f64,
            BleuSmoothing::Floor => (m as f64).max(BLEU_SMOOTHING_FLOOR) / t.max(1) as f64,
        })
        .collect();
    let brevity_penalty = if hyp_len == 0 {
        0.0
    } else if hyp_len <= ref_len {
        (1.0 - ref_len as f64 / hyp_len as f64).exp()
    } else {
        1.0
    };
    let score = if precisions.iter().any(|&p| p == 0.0) {
        0.0
    } else {
        let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / max_n as f64;
        (brevity_penalty * log_mean.exp()).clamp(0.0, 1.0)
    };
    Ok(BleuScore {
        score,
        precisions,
        matches,
        totals,
        brevity_penalty,
        hyp_len,
        ref_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s(line: &str) -> Sentence {
        Sentence::from_whitespace(line)
    }

    #[test]
    fn identity_is_one() {
        let c = vec![s("the cat sat on the mat"), s("a b c d")];
        assert_eq!(bleu(&c, &c, 4, BleuSmoothing::Strict).unwrap().score, 1.0);
    }

    #[test]
    fn clipping() {
        let b = bleu(
            &[s("the the the the")],
            &[s("the cat sat down")],
            1,
            BleuSmoothing::Strict,
        )
        .unwrap();
        assert_eq!(b.matches, [1]);
        assert_eq!(b.brevity_penalty, 1.0);
        assert_eq!(b.score, 0.25);
    }

    #[test]
    fn disjoint_is_zero_strict_and_tiny_smoothed() {
        let h = [s("x y z w")];
        let r = [s("a b c d")];
        assert_eq!(bleu(&h, &r, 4, BleuSmoothing::Strict).unwrap().score, 0.0);
        let sm = bleu(&h, &r, 4, BleuSmoothing::Floor).unwrap().score;
        assert!(sm > 0.0 && sm < 1e-8);
    }

    #[test]
    fn brevity_penalty() {
        let b = bleu(&[s("a b")], &[s("a b c d")], 1, BleuSmoothing::Strict).unwrap();
        assert!((b.brevity_penalty - (-1.0f64).exp()).abs() < 1e-15);
        assert!((b.score - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn mismatch() {
        assert!(matches!(
            bleu(&[s("a")], &[], 4, BleuSmoothing::Strict),
            Err(MetricError::LengthMismatch { .. })
        ));
    }

    proptest! {
        #[test]
        fn bounded(h in prop::collection::vec("[a-d]{1,2}", 0..8), r in prop::collection::vec("[a-d]{1,2}", 1..8)) {
            let b = bleu(&[Sentence::new(h)], &[Sentence::new(r)], 4, BleuSmoothing::Floor).unwrap();
            prop_assert!((0.0..=1.0).contains(&b.score));
        }
    }
}
