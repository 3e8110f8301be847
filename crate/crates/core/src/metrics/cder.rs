use super::{check_reference, MetricError};

/// CDER edit count. The reference is covered left to right; each reference
/// word is deleted (cost 1) or aligned to some hypothesis word (cost 0 on a
/// match, 1 otherwise). Moving the hypothesis cursor forward is free and
/// moving it backward is a long jump of cost 1.
pub fn cder_edits<T: PartialEq>(hyp: &[T], reference: &[T]) -> usize {
    const INF: usize = usize::MAX / 4;
    let j = hyp.len();
    // cur[l]: cheapest cost with the cursor before hypothesis position l
    let mut cur = vec![INF; j + 1];
    cur[0] = 0;
    let mut prefix = vec![INF; j + 1];
    let mut suffix = vec![INF; j + 2];
    for r in reference {
        let mut run = INF;
        for l in 0..=j {
            run = run.min(cur[l]);
            prefix[l] = run;
        }
        suffix[j + 1] = INF;
        for l in (0..=j).rev() {
            suffix[l] = suffix[l + 1].min(cur[l]);
        }
        let mut next: Vec<usize> = cur.iter().map(|&c| c.saturating_add(1)).collect();
        for (l, h) in hyp.iter().enumerate() {
            let reach = prefix[l].min(suffix[l + 1] + 1);
            let cost = reach + usize::from(h != r);
            if cost < next[l + 1] {
                next[l + 1] = cost;
            }
        }
        cur = next;
    }
    cur.into_iter().min().unwrap_or(0)
}

pub fn cder<T: PartialEq>(hyp: &[T], reference: &[T]) -> Result<f64, MetricError> {
    check_reference(reference)?;
    Ok(cder_edits(hyp, reference) as f64 / reference.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::{edit_distance, ter_edits, TerMode};
    use proptest::prelude::*;

    fn w(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn examples() {
        assert_eq!(cder(&w("a b c d"), &w("a b c d")).unwrap(), 0.0);
        assert_eq!(cder(&w("c d a b"), &w("a b c d")).unwrap(), 0.25);
        assert_eq!(cder(&w("x"), &w("a")).unwrap(), 1.0);
        assert_eq!(cder(&w(""), &w("a b")).unwrap(), 1.0);
        assert_eq!(cder_edits(&w("a x b"), &w("a b")), 0);
        assert_eq!(cder_edits(&w("b a"), &w("a b")), 1);
        assert!(cder(&w("a"), &w("")).is_err());
    }

    #[test]
    fn can_exceed_exact_ter() {
        // two shifts reach the reference, but every cover needs three jumps
        let (h, r) = ([0, 0, 1, 1, 2], [1, 0, 2, 1, 0]);
        assert_eq!(cder_edits(&h, &r), 3);
        assert_eq!(ter_edits(&h, &r, TerMode::Exact).unwrap().total(), 2);
    }

    proptest! {
        #[test]
        fn ordering(h in prop::collection::vec(0u8..3, 0..7), r in prop::collection::vec(0u8..3, 1..7)) {
            let c = cder_edits(&h, &r);
            prop_assert!(c <= edit_distance(&h, &r));
            prop_assert!(c <= r.len());
        }
    }
}
