use std::collections::HashMap;
use std::hash::Hash;

use super::{check_reference, MetricError};

/// Levenshtein distance with unit costs.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// `max(|hyp|, |ref|)` minus the size of the multiset intersection.
pub fn per_edits<T: Eq + Hash>(hyp: &[T], reference: &[T]) -> usize {
    let mut counts: HashMap<&T, isize> = HashMap::new();
    for t in reference {
        *counts.entry(t).or_insert(0) += 1;
    }
    let mut common = 0;
    for t in hyp {
        if let Some(c) = counts.get_mut(t) {
            if *c > 0 {
                *c -= 1;
                common += 1;
            }
        }
    }
    hyp.len().max(reference.len()) - common
}

pub fn per<T: Eq + Hash>(hyp: &[T], reference: &[T]) -> Result<f64, MetricError> {
    check_reference(reference)?;
    Ok(per_edits(hyp, reference) as f64 / reference.len() as f64)
}
