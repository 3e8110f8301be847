use std::collections::{BTreeMap, BTreeSet};

use log::warn;

use super::{LmError, NGramCounts, NGramEntry, NGramModel, LOG_ZERO, UNK};

/// Discount used when count-of-counts cannot support the closed-form
/// estimate.
pub const FALLBACK_DISCOUNT: f64 = 0.75;

/// Per-order absolute discounts for n-grams seen once, twice, and three or
/// more times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discounts {
    pub d1: f64,
    pub d2: f64,
    pub d3plus: f64,
    /// True when the fixed fallback replaced the estimate.
    pub fallback: bool,
}

impl Discounts {
    /// `n[r - 1]` is the number of n-grams with (adjusted) count exactly r,
    /// for r = 1..=4.
    pub fn from_count_of_counts(n: [u64; 4]) -> Self {
        let [n1, n2, n3, n4] = n.map(|x| x as f64);
        let fallback = Discounts {
            d1: FALLBACK_DISCOUNT,
            d2: FALLBACK_DISCOUNT,
            d3plus: FALLBACK_DISCOUNT,
            fallback: true,
        };
        if n1 == 0.0 || n2 == 0.0 {
            return fallback;
        }
        let y = n1 / (n1 + 2.0 * n2);
        let d1 = 1.0 - 2.0 * y * n2 / n1;
        let d2 = 2.0 - 3.0 * y * n3 / n2;
        let d3plus = if n3 == 0.0 { 3.0 } else { 3.0 - 4.0 * y * n4 / n3 };
        let d = Discounts {
            d1: d1.clamp(0.0, 1.0),
            d2: d2.clamp(0.0, 2.0),
            d3plus: d3plus.clamp(0.0, 3.0),
            fallback: false,
        };
        // a zero discount would leave no mass for unseen continuations
        if d.d1 <= 0.0 || d.d2 <= 0.0 || d.d3plus <= 0.0 {
            return fallback;
        }
        d
    }

    pub fn for_count(&self, count: u64) -> f64 {
        match count {
            0 => 0.0,
            1 => self.d1,
            2 => self.d2,
            _ => self.d3plus,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MknOptions {
    /// Give `<unk>` no probability mass; the uniform base distribution
    /// then covers only seen words.
    pub closed_vocabulary: bool,
}

#[derive(Default)]
struct ContextStats {
    total: u64,
    n: [u64; 3],
}

/// Interpolated probability of `gram` from the already-estimated lower
/// orders, backing off through unseen n-grams.
fn interpolated(
    probs: &[BTreeMap<Vec<String>, f64>],
    gammas: &[BTreeMap<Vec<String>, f64>],
    uniform: f64,
    gram: &[String],
) -> f64 {
    if gram.is_empty() {
        return uniform;
    }
    let k = gram.len();
    if let Some(&p) = probs[k - 1].get(gram) {
        return p;
    }
    let gamma = gammas[k - 1].get(&gram[..k - 1]).copied().unwrap_or(1.0);
    if k == 1 {
        gamma * uniform
    } else {
        gamma * interpolated(probs, gammas, uniform, &gram[1..])
    }
}

pub fn estimate_mkn(counts: &NGramCounts, options: &MknOptions) -> Result<NGramModel, LmError> {
    if counts.is_empty() {
        return Err(LmError::EmptyCounts);
    }
    let order = counts.order();

    let mut vocab: BTreeSet<String> = counts.raw(1).keys().map(|g| g[0].clone()).collect();
    let unk_seen = vocab.contains(UNK);
    vocab.insert(UNK.to_owned());
    let closed = options.closed_vocabulary && !unk_seen;
    let uniform_size = if closed { vocab.len() - 1 } else { vocab.len() };
    let uniform = 1.0 / uniform_size as f64;

    // probs[k-1]: interpolated p(w | h) of seen k-grams
    // gammas[k-1]: interpolation weight of each (k-1)-token context
    let mut probs: Vec<BTreeMap<Vec<String>, f64>> = Vec::with_capacity(order);
    let mut gammas: Vec<BTreeMap<Vec<String>, f64>> = Vec::with_capacity(order);
    let mut discounts = Vec::with_capacity(order);

    for k in 1..=order {
        let adjusted = counts.adjusted(k);
        let mut coc = [0u64; 4];
        for &c in adjusted.values() {
            if (1..=4).contains(&c) {
                coc[c as usize - 1] += 1;
            }
        }
        let d = Discounts::from_count_of_counts(coc);
        if d.fallback {
            warn!(
                "order {k}: count-of-counts {coc:?} cannot support modified Kneser-Ney \
                 discounts, using {FALLBACK_DISCOUNT}"
            );
        }

        let mut stats: BTreeMap<&[String], ContextStats> = BTreeMap::new();
        for (gram, &c) in &adjusted {
            let s = stats.entry(&gram[..k - 1]).or_default();
            s.total += c;
            s.n[(c.min(3) - 1) as usize] += 1;
        }
        let level_gammas: BTreeMap<Vec<String>, f64> = stats
            .iter()
            .map(|(ctx, s)| {
                let mass = d.d1 * s.n[0] as f64 + d.d2 * s.n[1] as f64 + d.d3plus * s.n[2] as f64;
                (ctx.to_vec(), mass / s.total as f64)
            })
            .collect();

        let mut level = BTreeMap::new();
        for (gram, &c) in &adjusted {
            let ctx = &gram[..k - 1];
            let total = stats[ctx].total as f64;
            let lower = if k == 1 {
                uniform
            } else {
                interpolated(&probs, &gammas, uniform, &gram[1..])
            };
            let p = (c as f64 - d.for_count(c)) / total + level_gammas[ctx] * lower;
            level.insert(gram.clone(), p);
        }
        if k == 1 && !closed && !level.contains_key([UNK.to_owned()].as_slice()) {
            level.insert(vec![UNK.to_owned()], level_gammas[&Vec::new()] * uniform);
        }

        probs.push(level);
        gammas.push(level_gammas);
        discounts.push(d);
    }

    let mut entries: Vec<BTreeMap<Vec<String>, NGramEntry>> = Vec::with_capacity(order);
    for k in 1..=order {
        let backoffs = gammas.get(k);
        let mut level: BTreeMap<Vec<String>, NGramEntry> = probs[k - 1]
            .iter()
            .map(|(g, &p)| {
                let log10_backoff = backoffs.and_then(|b| b.get(g)).map(|x| x.log10());
                (
                    g.clone(),
                    NGramEntry {
                        log10_prob: p.log10(),
                        log10_backoff,
                    },
                )
            })
            .collect();
        // contexts that are never predicted themselves (<s> runs)
        if let Some(b) = backoffs {
            for (ctx, gamma) in b {
                level.entry(ctx.clone()).or_insert(NGramEntry {
                    log10_prob: LOG_ZERO,
                    log10_backoff: Some(gamma.log10()),
                });
            }
        }
        if k == 1 && closed {
            level.insert(
                vec![UNK.to_owned()],
                NGramEntry {
                    log10_prob: LOG_ZERO,
                    log10_backoff: None,
                },
            );
        }
        entries.push(level);
    }

    Ok(NGramModel::from_parts(order, entries, discounts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_discounts() {
        let d = Discounts::from_count_of_counts([10, 5, 3, 2]);
        let y = 10.0 / 20.0;
        assert!((d.d1 - (1.0 - 2.0 * y * 5.0 / 10.0)).abs() < 1e-12);
        assert!((d.d2 - (2.0 - 3.0 * y * 3.0 / 5.0)).abs() < 1e-12);
        assert!((d.d3plus - (3.0 - 4.0 * y * 2.0 / 3.0)).abs() < 1e-12);
        assert!(!d.fallback);
    }

    #[test]
    fn degenerate_count_of_counts() {
        assert!(Discounts::from_count_of_counts([0, 3, 1, 1]).fallback);
        assert!(Discounts::from_count_of_counts([4, 0, 1, 1]).fallback);
        // D2 would be negative
        assert!(Discounts::from_count_of_counts([1, 1, 5, 0]).fallback);
        let d = Discounts::from_count_of_counts([2, 1, 0, 0]);
        assert_eq!((d.d1, d.d2, d.d3plus), (0.5, 2.0, 3.0));
    }

    #[test]
    fn discount_by_count() {
        let d = Discounts {
            d1: 0.1,
            d2: 0.2,
            d3plus: 0.3,
            fallback: false,
        };
        assert_eq!([0, 1, 2, 3, 40].map(|c| d.for_count(c)), [0.0, 0.1, 0.2, 0.3, 0.3]);
    }

    #[test]
    fn empty_counts_rejected() {
        let c = super::super::count_ngrams(&[], 2).unwrap();
        assert_eq!(estimate_mkn(&c, &MknOptions::default()), Err(LmError::EmptyCounts));
    }
}
