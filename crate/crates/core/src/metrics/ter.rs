use std::collections::HashSet;
use std::hash::Hash;

use super::edit::{edit_distance, per_edits};
use super::{check_reference, MetricError};

/// Longest side accepted by [`TerMode::Exact`].
pub const EXACT_TER_MAX_LEN: usize = 8;

/// Longest block the greedy search considers shifting.
pub const GREEDY_MAX_BLOCK: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TerMode {
    /// Repeatedly apply the best single shift while it lowers the edit
    /// distance.
    #[default]
    Greedy,
    /// Minimum over all shift sequences; small inputs only.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TerEdits {
    pub shifts: usize,
    /// Edit distance remaining after the shifts.
    pub edits: usize,
}

impl TerEdits {
    pub fn total(&self) -> usize {
        self.shifts + self.edits
    }
}

/// Moves `seq[start..start + len]` so that it begins at index `dest` of the
/// result.
fn shifted<T: Clone>(seq: &[T], start: usize, len: usize, dest: usize) -> Vec<T> {
    let mut rest: Vec<T> = Vec::with_capacity(seq.len());
    rest.extend_from_slice(&seq[..start]);
    rest.extend_from_slice(&seq[start + len..]);
    let mut out = Vec::with_capacity(seq.len());
    out.extend_from_slice(&rest[..dest]);
    out.extend_from_slice(&seq[start..start + len]);
    out.extend_from_slice(&rest[dest..]);
    out
}

fn occurs_in<T: PartialEq>(haystack: &[T], needle: &[T]) -> bool {
    needle.len() <= haystack.len() && haystack.windows(needle.len()).any(|w| w == needle)
}

fn greedy<T: Eq + Hash + Clone>(hyp: &[T], reference: &[T]) -> TerEdits {
    // shifts never change the multiset, so this bound is never beaten
    let floor = per_edits(hyp, reference);
    let mut cur = hyp.to_vec();
    let mut cur_ed = edit_distance(&cur, reference);
    let mut shifts = 0;
    while cur_ed > floor {
        let n = cur.len();
        let mut best: Option<(usize, Vec<T>)> = None;
        for start in 0..n {
            for len in 1..=GREEDY_MAX_BLOCK.min(n - start) {
                if !occurs_in(reference, &cur[start..start + len]) {
                    continue;
                }
                for dest in 0..=n - len {
                    if dest == start {
                        continue;
                    }
                    let cand = shifted(&cur, start, len, dest);
                    let ed = edit_distance(&cand, reference);
                    if ed < best.as_ref().map_or(cur_ed, |b| b.0) {
                        best = Some((ed, cand));
                    }
                }
            }
        }
        match best {
            Some((ed, cand)) => {
                cur = cand;
                cur_ed = ed;
                shifts += 1;
            }
            None => break,
        }
    }
    TerEdits { shifts, edits: cur_ed }
}

/// Breadth-first search over shift sequences, pruned by the shift-invariant
/// bound `per_edits`.
fn exact<T: Eq + Hash + Clone>(hyp: &[T], reference: &[T]) -> TerEdits {
    let floor = per_edits(hyp, reference);
    let mut best = TerEdits {
        shifts: 0,
        edits: edit_distance(hyp, reference),
    };
    let mut seen: HashSet<Vec<T>> = HashSet::from([hyp.to_vec()]);
    let mut frontier = vec![hyp.to_vec()];
    let mut depth = 0;
    while depth + 1 + floor < best.total() && !frontier.is_empty() {
        depth += 1;
        let mut next = Vec::new();
        for state in &frontier {
            let n = state.len();
            for start in 0..n {
                for len in 1..=n - start {
                    for dest in 0..=n - len {
                        if dest == start {
                            continue;
                        }
                        let cand = shifted(state, start, len, dest);
                        if seen.contains(&cand) {
                            continue;
                        }
                        let ed = edit_distance(&cand, reference);
                        if depth + ed < best.total() {
                            best = TerEdits {
                                shifts: depth,
                                edits: ed,
                            };
                        }
                        seen.insert(cand.clone());
                        next.push(cand);
                    }
                }
            }
        }
        frontier = next;
    }
    best
}

pub fn ter_edits<T: Eq + Hash + Clone>(hyp: &[T], reference: &[T], mode: TerMode) -> Result<TerEdits, MetricError> {
    match mode {
        TerMode::Greedy => Ok(greedy(hyp, reference)),
        TerMode::Exact => {
            if hyp.len() > EXACT_TER_MAX_LEN || reference.len() > EXACT_TER_MAX_LEN {
                return Err(MetricError::TooLongForExact {
                    hyp_len: hyp.len(),
                    ref_len: reference.len(),
                    limit: EXACT_TER_MAX_LEN,
                });
            }
            Ok(exact(hyp, reference))
        }
    }
}

pub fn ter<T: Eq + Hash + Clone>(hyp: &[T], reference: &[T], mode: TerMode) -> Result<f64, MetricError> {
    check_reference(reference)?;
    Ok(ter_edits(hyp, reference, mode)?.total() as f64 / reference.len() as f64)
}
