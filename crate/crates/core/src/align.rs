//! IBM Model 1 alignment trained with EM, over word surface forms or stem
//! factors.
//!
//! The trainer is generic over the symbol type so the character-level
//! transliteration model shares it. Every source sentence gets an implicit
//! NULL token at position zero of the translation table.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;
use std::hash::Hash;

use thiserror::Error;

use crate::corpus::{ParallelCorpus, Sentence, SentencePair};
use crate::morph::{stem_sentence, StemRuleTable};

/// Spelling of the empty source token in persisted tables.
pub const NULL_TOKEN: &str = "NULL";

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("cannot train on an empty corpus")]
    EmptyCorpus,

    #[error("iterations must be at least 1")]
    InvalidIterations,

    #[error("translation table line {line}: {message}")]
    Table { line: usize, message: String },
}

/// Translation probabilities t(target | source) with a NULL source row.
/// Rows are sparse: pairs that never co-occurred have probability zero,
/// except in a freshly initialized uniform table.
#[derive(Debug, Clone, PartialEq)]
pub struct TransTable<T: Ord> {
    /// Source symbols in sorted order; row `i + 1` belongs to `sources[i]`,
    /// row 0 to NULL.
    sources: Vec<T>,
    targets: Vec<T>,
    source_ids: BTreeMap<T, usize>,
    target_ids: BTreeMap<T, usize>,
    rows: Vec<BTreeMap<usize, f64>>,
    uniform: bool,
}

pub type TTable = TransTable<String>;

impl<T: Ord + Clone> TransTable<T> {
    /// Every source row uniform over the target vocabulary.
    pub fn uniform(sources: BTreeSet<T>, targets: BTreeSet<T>) -> Self {
        let sources: Vec<T> = sources.into_iter().collect();
        let targets: Vec<T> = targets.into_iter().collect();
        TransTable {
            source_ids: sources.iter().cloned().enumerate().map(|(i, s)| (s, i + 1)).collect(),
            target_ids: targets.iter().cloned().enumerate().map(|(i, t)| (t, i)).collect(),
            rows: vec![BTreeMap::new(); sources.len() + 1],
            sources,
            targets,
            uniform: true,
        }
    }

    /// Builds a table from explicit `(source, target, prob)` entries; `None`
    /// is the NULL source.
    pub fn from_entries(entries: impl IntoIterator<Item = (Option<T>, T, f64)>) -> Self {
        let entries: Vec<(Option<T>, T, f64)> = entries.into_iter().collect();
        let sources: BTreeSet<T> = entries.iter().filter_map(|e| e.0.clone()).collect();
        let targets: BTreeSet<T> = entries.iter().map(|e| e.1.clone()).collect();
        let mut table = TransTable::uniform(sources, targets);
        table.uniform = false;
        for (s, t, p) in entries {
            let sid = table.source_id(s.as_ref()).expect("source interned");
            let tid = table.target_ids[&t];
            table.rows[sid].insert(tid, p);
        }
        table
    }

    /// True when `source` has a row (trained or loaded).
    pub fn has_source(&self, source: &T) -> bool {
        self.source_ids.contains_key(source)
    }

    pub fn sources(&self) -> &[T] {
        &self.sources
    }

    pub fn targets(&self) -> &[T] {
        &self.targets
    }

    fn source_id(&self, source: Option<&T>) -> Option<usize> {
        match source {
            None => Some(0),
            Some(s) => self.source_ids.get(s).copied(),
        }
    }

    fn prob_ids(&self, source: usize, target: usize) -> f64 {
        if self.uniform {
            1.0 / self.targets.len() as f64
        } else {
            self.rows[source].get(&target).copied().unwrap_or(0.0)
        }
    }

    /// t(target | source); `None` is the NULL source. Unknown symbols get 0.
    pub fn prob(&self, target: &T, source: Option<&T>) -> f64 {
        match (self.source_id(source), self.target_ids.get(target)) {
            (Some(s), Some(&t)) => self.prob_ids(s, t),
            _ => 0.0,
        }
    }

    /// Nonzero entries of one source row, in target order.
    pub fn row(&self, source: Option<&T>) -> Vec<(&T, f64)> {
        let Some(s) = self.source_id(source) else {
            return Vec::new();
        };
        if self.uniform {
            let p = 1.0 / self.targets.len() as f64;
            return self.targets.iter().map(|t| (t, p)).collect();
        }
        self.rows[s].iter().map(|(&t, &p)| (&self.targets[t], p)).collect()
    }

    /// Σ_target t(target | source) for every row, NULL first.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.rows.len())
            .map(|s| {
                if self.uniform {
                    if self.targets.is_empty() {
                        0.0
                    } else {
                        1.0
                    }
                } else {
                    self.rows[s].values().sum()
                }
            })
            .collect()
    }

    /// Mean Shannon entropy in bits of the non-NULL rows.
    pub fn mean_entropy_bits(&self) -> f64 {
        if self.sources.is_empty() {
            return 0.0;
        }
        let total: f64 = self
            .sources
            .iter()
            .map(|s| {
                self.row(Some(s))
                    .iter()
                    .filter(|(_, p)| *p > 0.0)
                    .map(|(_, p)| -p * p.log2())
                    .sum::<f64>()
            })
            .sum();
        total / self.sources.len() as f64
    }
}

/// Corpus log-likelihood (natural log) after each EM step; entry 0 is the
/// uniform initialization, entry i the table after iteration i.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainLog {
    pub log_likelihoods: Vec<f64>,
    /// Number of target symbols the likelihood is summed over.
    pub target_tokens: usize,
}

impl TrainLog {
    pub fn final_log_likelihood(&self) -> f64 {
        self.log_likelihoods.last().copied().unwrap_or(0.0)
    }

    pub fn per_token(&self) -> f64 {
        if self.target_tokens == 0 {
            0.0
        } else {
            self.final_log_likelihood() / self.target_tokens as f64
        }
    }

    /// True when no step lowers the likelihood by more than `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        self.log_likelihoods.windows(2).all(|w| w[1] >= w[0] - tol)
    }
}

/// Fixed prior over which source position generates target position `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlignmentPrior {
    /// Model 1: all `l + 1` positions (NULL included) equally likely.
    Uniform,
    /// NULL gets `null_prob`; real positions share the rest in proportion
    /// to `exp(-tension * |(i + 0.5) / l - (j + 0.5) / m|)`.
    Diagonal { tension: f64, null_prob: f64 },
}

impl AlignmentPrior {
    /// Prior weights for target position `j` of `m`, NULL first.
    fn weights(&self, l: usize, j: usize, m: usize, out: &mut Vec<f64>) {
        out.clear();
        match *self {
            AlignmentPrior::Uniform => out.resize(l + 1, 1.0 / (l + 1) as f64),
            AlignmentPrior::Diagonal { tension, null_prob } => {
                if l == 0 {
                    out.push(1.0);
                    return;
                }
                out.push(null_prob);
                let tj = (j as f64 + 0.5) / m as f64;
                let raw: Vec<f64> = (0..l)
                    .map(|i| (-tension * ((i as f64 + 0.5) / l as f64 - tj).abs()).exp())
                    .collect();
                let z: f64 = raw.iter().sum();
                out.extend(raw.into_iter().map(|w| (1.0 - null_prob) * w / z));
            }
        }
    }
}

struct Encoded {
    /// Row ids of each source sentence, NULL (0) first.
    sources: Vec<Vec<usize>>,
    targets: Vec<Vec<usize>>,
}

/// E-step: expected link counts and the log-likelihood of the current
/// table.
fn expectation<T: Ord + Clone>(
    table: &TransTable<T>,
    data: &Encoded,
    prior: AlignmentPrior,
) -> (Vec<BTreeMap<usize, f64>>, f64) {
    let mut counts = vec![BTreeMap::new(); table.rows.len()];
    let mut ll = 0.0;
    let mut probs = Vec::new();
    let mut weights = Vec::new();
    for (src, tgt) in data.sources.iter().zip(&data.targets) {
        let uniform_norm = (src.len() as f64).ln();
        for (j, &t) in tgt.iter().enumerate() {
            probs.clear();
            match prior {
                AlignmentPrior::Uniform => probs.extend(src.iter().map(|&s| table.prob_ids(s, t))),
                _ => {
                    prior.weights(src.len() - 1, j, tgt.len(), &mut weights);
                    probs.extend(src.iter().zip(&weights).map(|(&s, &w)| w * table.prob_ids(s, t)));
                }
            }
            let denom: f64 = probs.iter().sum();
            ll += match prior {
                AlignmentPrior::Uniform => denom.ln() - uniform_norm,
                _ => denom.ln(),
            };
            if denom <= 0.0 {
                continue;
            }
            for (&s, &p) in src.iter().zip(&probs) {
                if p > 0.0 {
                    *counts[s].entry(t).or_insert(0.0) += p / denom;
                }
            }
        }
    }
    (counts, ll)
}

fn maximization<T: Ord>(table: &mut TransTable<T>, counts: Vec<BTreeMap<usize, f64>>) {
    for (row, mut c) in table.rows.iter_mut().zip(counts) {
        let total: f64 = c.values().sum();
        if total > 0.0 {
            for v in c.values_mut() {
                *v /= total;
            }
        }
        *row = c;
    }
    table.uniform = false;
}

/// Runs `iterations` rounds of Model 1 EM from a uniform table over
/// `(source, target)` symbol sequences.
pub fn train_em<T, I, S>(pairs: I, iterations: usize) -> Result<(TransTable<T>, TrainLog), AlignError>
where
    T: Ord + Clone + Hash,
    I: IntoIterator<Item = (S, S)>,
    S: AsRef<[T]>,
{
    train_em_with_prior(pairs, iterations, AlignmentPrior::Uniform)
}

/// EM for t(target | source) under a fixed alignment prior. Only the
/// translation table is re-estimated.
pub fn train_em_with_prior<T, I, S>(
    pairs: I,
    iterations: usize,
    prior: AlignmentPrior,
) -> Result<(TransTable<T>, TrainLog), AlignError>
where
    T: Ord + Clone + Hash,
    I: IntoIterator<Item = (S, S)>,
    S: AsRef<[T]>,
{
    if iterations == 0 {
        return Err(AlignError::InvalidIterations);
    }
    let pairs: Vec<(S, S)> = pairs.into_iter().collect();
    if pairs.is_empty() {
        return Err(AlignError::EmptyCorpus);
    }
    let src_vocab: BTreeSet<T> = pairs.iter().flat_map(|(s, _)| s.as_ref().iter().cloned()).collect();
    let tgt_vocab: BTreeSet<T> = pairs.iter().flat_map(|(_, t)| t.as_ref().iter().cloned()).collect();
    let mut table = TransTable::uniform(src_vocab, tgt_vocab);

    let data = Encoded {
        sources: pairs
            .iter()
            .map(|(s, _)| {
                std::iter::once(0)
                    .chain(s.as_ref().iter().map(|x| table.source_ids[x]))
                    .collect()
            })
            .collect(),
        targets: pairs
            .iter()
            .map(|(_, t)| t.as_ref().iter().map(|x| table.target_ids[x]).collect())
            .collect(),
    };
    let target_tokens = data.targets.iter().map(Vec::len).sum();

    let mut log = TrainLog {
        log_likelihoods: Vec::with_capacity(iterations + 1),
        target_tokens,
    };
    for _ in 0..iterations {
        let (counts, ll) = expectation(&table, &data, prior);
        log.log_likelihoods.push(ll);
        maximization(&mut table, counts);
    }
    let (_, ll) = expectation(&table, &data, prior);
    log.log_likelihoods.push(ll);
    Ok((table, log))
}

pub fn train_model1(corpus: &ParallelCorpus, iterations: usize) -> Result<(TTable, TrainLog), AlignError> {
    train_em(
        corpus.pairs.iter().map(|p| (p.source.tokens(), p.target.tokens())),
        iterations,
    )
}

/// Per target position, the aligned source position or `None` for NULL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentLinks {
    pub links: Vec<Option<usize>>,
}

impl AlignmentLinks {
    /// `i-j` pairs (source-target, 0-based) for non-NULL links.
    pub fn to_pharaoh(&self) -> String {
        let mut out = String::new();
        for (j, link) in self.links.iter().enumerate() {
            if let Some(i) = link {
                if !out.is_empty() {
                    out.push(' ');
                }
                let _ = write!(out, "{i}-{j}");
            }
        }
        out
    }
}

/// Links each target word to its most probable source word. Ties go to the
/// smaller source index; NULL wins only when strictly more probable than
/// every real source word.
pub fn viterbi_align(pair: &SentencePair, table: &TTable) -> AlignmentLinks {
    let links = pair
        .target
        .iter()
        .map(|t| {
            let mut best: Option<(usize, f64)> = None;
            for (i, s) in pair.source.iter().enumerate() {
                let p = table.prob(t, Some(s));
                if best.is_none_or(|(_, bp)| p > bp) {
                    best = Some((i, p));
                }
            }
            let null = table.prob(t, None);
            match best {
                Some((_, bp)) if null > bp => None,
                Some((i, _)) => Some(i),
                None => None,
            }
        })
        .collect();
    AlignmentLinks { links }
}

/// `source \t target \t prob`, sorted, NULL spelled [`NULL_TOKEN`].
pub fn write_ttable(table: &TTable) -> String {
    let mut lines: Vec<(String, String, f64)> = Vec::new();
    let mut push_row = |name: &str, src: Option<&String>| {
        for (t, p) in table.row(src) {
            if p > 0.0 {
                lines.push((name.to_owned(), t.clone(), p));
            }
        }
    };
    push_row(NULL_TOKEN, None);
    for s in table.sources() {
        push_row(s, Some(s));
    }
    lines.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let mut out = String::new();
    for (s, t, p) in lines {
        let _ = writeln!(out, "{s}\t{t}\t{p}");
    }
    out
}

pub fn read_ttable(text: &str) -> Result<TTable, AlignError> {
    let mut entries: Vec<(Option<String>, String, f64)> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let err = |message: String| AlignError::Table { line: i + 1, message };
        if fields.len() != 3 {
            return Err(err(format!("expected 3 tab-separated fields, got {}", fields.len())));
        }
        let p: f64 = fields[2]
            .parse()
            .map_err(|_| err(format!("bad probability {:?}", fields[2])))?;
        let src = (fields[0] != NULL_TOKEN).then(|| fields[0].to_owned());
        entries.push((src, fields[1].to_owned(), p));
    }
    Ok(TransTable::from_entries(entries))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorStats {
    pub source_types: usize,
    pub target_types: usize,
    pub final_log_likelihood: f64,
    pub log_likelihood_per_token: f64,
    pub mean_entropy_bits: f64,
}

impl FactorStats {
    fn from_training(corpus: &ParallelCorpus, table: &TTable, log: &TrainLog) -> Self {
        let types =
            |side: &mut dyn Iterator<Item = &Sentence>| side.flat_map(|s| s.iter()).collect::<BTreeSet<_>>().len();
        FactorStats {
            source_types: types(&mut corpus.sources()),
            target_types: types(&mut corpus.targets()),
            final_log_likelihood: log.final_log_likelihood(),
            log_likelihood_per_token: log.per_token(),
            mean_entropy_bits: table.mean_entropy_bits(),
        }
    }
}

/// Surface-form versus stem-factor Model 1 training on the same corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorReport {
    pub surface: FactorStats,
    pub stem: FactorStats,
}

impl FactorReport {
    pub fn render(&self) -> String {
        let rows: [(&str, String, String); 5] = [
            (
                "source types",
                self.surface.source_types.to_string(),
                self.stem.source_types.to_string(),
            ),
            (
                "target types",
                self.surface.target_types.to_string(),
                self.stem.target_types.to_string(),
            ),
            (
                "final log-likelihood",
                format!("{:.4}", self.surface.final_log_likelihood),
                format!("{:.4}", self.stem.final_log_likelihood),
            ),
            (
                "log-likelihood per token",
                format!("{:.4}", self.surface.log_likelihood_per_token),
                format!("{:.4}", self.stem.log_likelihood_per_token),
            ),
            (
                "mean t-table entropy (bits)",
                format!("{:.4}", self.surface.mean_entropy_bits),
                format!("{:.4}", self.stem.mean_entropy_bits),
            ),
        ];
        let mut out = format!("{:<28} {:>14} {:>14}\n", "", "surface", "stem");
        for (label, a, b) in rows {
            let _ = writeln!(out, "{label:<28} {a:>14} {b:>14}");
        }
        out
    }
}

pub fn stem_corpus(corpus: &ParallelCorpus, src_rules: &StemRuleTable, tgt_rules: &StemRuleTable) -> ParallelCorpus {
    corpus.with_pairs(
        corpus
            .pairs
            .iter()
            .map(|p| SentencePair {
                id: p.id,
                source: stem_sentence(&p.source, src_rules),
                target: stem_sentence(&p.target, tgt_rules),
            })
            .collect(),
    )
}

pub fn compare_factored(
    corpus: &ParallelCorpus,
    src_rules: &StemRuleTable,
    tgt_rules: &StemRuleTable,
    iterations: usize,
) -> Result<FactorReport, AlignError> {
    let (surface_table, surface_log) = train_model1(corpus, iterations)?;
    let stemmed = stem_corpus(corpus, src_rules, tgt_rules);
    let (stem_table, stem_log) = train_model1(&stemmed, iterations)?;
    Ok(FactorReport {
        surface: FactorStats::from_training(corpus, &surface_table, &surface_log),
        stem: FactorStats::from_training(&stemmed, &stem_table, &stem_log),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus(lines: &[(&str, &str)]) -> ParallelCorpus {
        ParallelCorpus::from_lines(lines.iter().copied())
    }

    fn t(table: &TTable, tgt: &str, src: &str) -> f64 {
        table.prob(&tgt.to_string(), Some(&src.to_string()))
    }

    #[test]
    fn unambiguous_pair_converges() {
        let (table, log) = train_model1(&corpus(&[("a", "x")]), 20).unwrap();
        assert!(t(&table, "x", "a") >= 0.99);
        assert_eq!(log.log_likelihoods.len(), 21);
    }

    #[test]
    fn pigeonhole_disambiguation() {
        let c = corpus(&[("a b", "x y"), ("a", "x")]);
        let (table, _) = train_model1(&c, 10).unwrap();
        assert!(t(&table, "x", "a") > t(&table, "y", "a"));
        let links = viterbi_align(&c.pairs[0], &table);
        assert_eq!(links.links, [Some(0), Some(1)]);
        assert_eq!(links.to_pharaoh(), "0-0 1-1");
    }

    #[test]
    fn converged_single_link() {
        let c = corpus(&[("a", "x")]);
        let (table, _) = train_model1(&c, 20).unwrap();
        assert_eq!(viterbi_align(&c.pairs[0], &table).to_pharaoh(), "0-0");
    }

    #[test]
    fn uniform_table_ties_to_first_source() {
        let c = corpus(&[("a b c", "x y z w")]);
        let table = TransTable::uniform(
            ["a", "b", "c"].map(String::from).into(),
            ["x", "y", "z", "w"].map(String::from).into(),
        );
        let links = viterbi_align(&c.pairs[0], &table);
        assert_eq!(links.links, vec![Some(0); 4]);
    }

    #[test]
    fn empty_source_links_to_null() {
        let c = corpus(&[("", "x"), ("a", "x")]);
        let (table, _) = train_model1(&c, 3).unwrap();
        assert_eq!(viterbi_align(&c.pairs[0], &table).links, [None]);
        assert_eq!(viterbi_align(&c.pairs[0], &table).to_pharaoh(), "");
    }

    #[test]
    fn errors() {
        assert_eq!(train_model1(&corpus(&[]), 3).unwrap_err(), AlignError::EmptyCorpus);
        assert_eq!(
            train_model1(&corpus(&[("a", "b")]), 0).unwrap_err(),
            AlignError::InvalidIterations
        );
    }

    #[test]
    fn ttable_text_round_trip() {
        let c = corpus(&[("a b", "x y"), ("a", "x"), ("b c", "y z")]);
        let (table, _) = train_model1(&c, 5).unwrap();
        let text = write_ttable(&table);
        assert!(text.lines().next().unwrap().starts_with("NULL\t"));
        let back = read_ttable(&text).unwrap();
        assert_eq!(write_ttable(&back), text);
        assert_eq!(t(&back, "y", "b"), t(&table, "y", "b"));
        assert!(matches!(read_ttable("a\tb\n"), Err(AlignError::Table { line: 1, .. })));
        assert!(matches!(
            read_ttable("a\tb\tzz\n"),
            Err(AlignError::Table { line: 1, .. })
        ));
    }

    #[test]
    fn identity_stemmer_changes_nothing() {
        let c = corpus(&[("in house", "veedil"), ("to house", "veedukku")]);
        let id = StemRuleTable::identity();
        let r = compare_factored(&c, &id, &id, 5).unwrap();
        assert_eq!(r.surface, r.stem);
        let text = r.render();
        for label in [
            "source types",
            "target types",
            "final log-likelihood",
            "log-likelihood per token",
            "mean t-table entropy (bits)",
        ] {
            assert!(text.contains(label));
        }
    }

    #[test]
    fn stemming_reduces_types_on_agglutinative_corpus() {
        use crate::corpus::synthetic::agglutinative_corpus;
        let a = agglutinative_corpus(6, 3, 80, 4);
        let rules = StemRuleTable::new(a.suffixes.clone(), 2).unwrap();
        let r = compare_factored(&a.corpus, &StemRuleTable::identity(), &rules, 10).unwrap();
        assert!(r.stem.target_types < r.surface.target_types);
        assert_eq!(r.stem.target_types, 6);
    }

    fn arb_corpus() -> impl Strategy<Value = Vec<(Vec<String>, Vec<String>)>> {
        let side = prop::collection::vec("[a-e]", 0..5);
        prop::collection::vec((side.clone(), side), 1..8)
    }

    #[test]
    fn diagonal_prior_breaks_symmetry() {
        let pairs = vec![(vec!['a', 'b'], vec!['a', 'b']); 3];
        let (model1, _) = train_em(pairs.iter().map(|(s, t)| (s.as_slice(), t.as_slice())), 20).unwrap();
        assert!((model1.prob(&'a', Some(&'a')) - 0.5).abs() < 1e-9);
        let prior = AlignmentPrior::Diagonal {
            tension: 4.0,
            null_prob: 0.08,
        };
        let (diag, log) =
            train_em_with_prior(pairs.iter().map(|(s, t)| (s.as_slice(), t.as_slice())), 20, prior).unwrap();
        assert!(diag.prob(&'a', Some(&'a')) >= 0.99);
        assert!(log.is_monotone(1e-9));
    }

    #[test]
    fn diagonal_weights_sum_to_one() {
        let prior = AlignmentPrior::Diagonal {
            tension: 4.0,
            null_prob: 0.08,
        };
        let mut w = Vec::new();
        for (l, m) in [(0, 3), (1, 1), (3, 5), (6, 2)] {
            for j in 0..m {
                prior.weights(l, j, m, &mut w);
                assert_eq!(w.len(), l + 1);
                assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn diagonal_em_is_monotone(pairs in arb_corpus(), iters in 1usize..12) {
            let prior = AlignmentPrior::Diagonal { tension: 4.0, null_prob: 0.08 };
            let (table, log) = train_em_with_prior(pairs.iter().map(|(s, t)| (s.as_slice(), t.as_slice())), iters, prior).unwrap();
            prop_assert!(log.is_monotone(1e-9), "{:?}", log.log_likelihoods);
            for sum in table.row_sums() {
                prop_assert!(sum == 0.0 || (sum - 1.0).abs() < 1e-6);
            }
        }

        #[test]
        fn em_is_monotone_and_normalized(pairs in arb_corpus(), iters in 1usize..12) {
            let (table, log) = train_em(pairs.iter().map(|(s, t)| (s.as_slice(), t.as_slice())), iters).unwrap();
            prop_assert!(log.is_monotone(1e-9), "{:?}", log.log_likelihoods);
            for (row, sum) in table.row_sums().into_iter().enumerate() {
                prop_assert!(sum == 0.0 || (sum - 1.0).abs() < 1e-6, "row {} sums to {}", row, sum);
            }
        }

        #[test]
        fn order_invariant(pairs in arb_corpus(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut shuffled = pairs.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let run = |p: &Vec<(Vec<String>, Vec<String>)>| {
                train_em(p.iter().map(|(s, t)| (s.as_slice(), t.as_slice())), 6).unwrap()
            };
            let (a, la) = run(&pairs);
            let (b, lb) = run(&shuffled);
            prop_assert_eq!(a.sources(), b.sources());
            for s in a.sources() {
                for tgt in a.targets() {
                    prop_assert!((a.prob(tgt, Some(s)) - b.prob(tgt, Some(s))).abs() < 1e-9);
                }
            }
            prop_assert!((la.final_log_likelihood() - lb.final_log_likelihood()).abs() < 1e-9);
        }

        #[test]
        fn viterbi_covers_each_target_once(pairs in arb_corpus()) {
            let c = ParallelCorpus::from_sides(
                pairs.iter().map(|(s, _)| Sentence::new(s.clone())).collect(),
                pairs.iter().map(|(_, t)| Sentence::new(t.clone())).collect(),
            ).unwrap();
            let (table, _) = train_model1(&c, 4).unwrap();
            for p in &c.pairs {
                let links = viterbi_align(p, &table);
                prop_assert_eq!(links.links.len(), p.target.len());
                for l in links.links.iter().flatten() {
                    prop_assert!(*l < p.source.len());
                }
            }
        }
    }
}
