//! Character-level transliteration of out-of-vocabulary words.
//!
//! A Model 1 channel t(target_char | source_char) is trained with the same
//! EM as word alignment, on a lexicon of word pairs. A target character
//! trigram model supplies the fluency term. Each source character emits
//! exactly one target character, so candidates have the source length.
//!
//! Candidate generation is an exact k-best search: A* over states
//! `(position, last two target chars)` with a heuristic equal to the best
//! completion score, so the top candidates do not depend on `k`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::align::{train_em_with_prior, AlignError, AlignmentPrior, TrainLog, TransTable, NULL_TOKEN};
use crate::corpus::{read_lines, write_lines, Sentence};
use crate::lm::{self, read_arpa, write_arpa, MknOptions, NGramModel, BOS, EOS};
use crate::Error;

pub const CHAR_LM_ORDER: usize = 3;
pub const DEFAULT_K: usize = 100;
pub const DEFAULT_CHAR_LM_WEIGHT: f64 = 1.0;
pub const TTABLE_FILE: &str = "ttable.tsv";
pub const CHARLM_FILE: &str = "charlm.arpa";
pub const TTABLE_HEADER: &str = "source_char\ttarget_char\tprob";

/// Alignment prior for character EM. Character correspondences run roughly
/// along the diagonal; without this, symbols that always co-occur stay
/// tied.
pub const CHAR_ALIGNMENT_PRIOR: AlignmentPrior = AlignmentPrior::Diagonal {
    tension: 4.0,
    null_prob: 0.08,
};

#[derive(Debug, Error, PartialEq)]
pub enum TranslitError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("lexicon pair {index} has an empty side")]
    EmptySide { index: usize },

    #[error(transparent)]
    Align(#[from] AlignError),

    #[error("model file line {line}: {message}")]
    Model { line: usize, message: String },
}

/// Source/target word pairs used as transliteration training data.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TranslitPairCorpus {
    pairs: Vec<(String, String)>,
}

impl TranslitPairCorpus {
    pub fn new(pairs: Vec<(String, String)>) -> Result<Self, TranslitError> {
        if let Some(index) = pairs.iter().position(|(s, t)| s.is_empty() || t.is_empty()) {
            return Err(TranslitError::EmptySide { index });
        }
        Ok(TranslitPairCorpus { pairs })
    }

    /// One `source<TAB>target` pair per line; blank lines are skipped.
    pub fn load(path: &Path) -> crate::Result<Self> {
        let mut pairs = Vec::new();
        for (i, line) in read_lines(path)?.iter().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
            if fields.len() != 2 || fields[0].is_empty() || fields[1].is_empty() {
                return Err(Error::data(path, i + 1, "expected `source<TAB>target`"));
            }
            pairs.push((fields[0].to_owned(), fields[1].to_owned()));
        }
        Ok(TranslitPairCorpus { pairs })
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Character channel plus target character language model.
#[derive(Debug, Clone)]
pub struct CharTransModel {
    pub table: TransTable<char>,
    pub char_lm: NGramModel,
    pub char_lm_weight: f64,
}

fn char_sentence(word: &str) -> Sentence {
    word.chars().map(String::from).collect()
}

pub fn train_char_model(
    corpus: &TranslitPairCorpus,
    iterations: usize,
) -> Result<(CharTransModel, TrainLog), TranslitError> {
    if corpus.is_empty() {
        return Err(AlignError::EmptyCorpus.into());
    }
    let seqs: Vec<(Vec<char>, Vec<char>)> = corpus
        .pairs
        .iter()
        .map(|(s, t)| (s.chars().collect(), t.chars().collect()))
        .collect();
    let (table, log) = train_em_with_prior(
        seqs.iter().map(|(s, t)| (s.as_slice(), t.as_slice())),
        iterations,
        CHAR_ALIGNMENT_PRIOR,
    )?;
    let targets: Vec<Sentence> = corpus.pairs.iter().map(|(_, t)| char_sentence(t)).collect();
    let char_lm = lm::train(&targets, CHAR_LM_ORDER, &MknOptions::default())
        .map_err(|e| TranslitError::InvalidArgument(format!("character LM: {e}")))?;
    Ok((
        CharTransModel {
            table,
            char_lm,
            char_lm_weight: DEFAULT_CHAR_LM_WEIGHT,
        },
        log,
    ))
}

impl CharTransModel {
    /// Writes `ttable.tsv` and `charlm.arpa` into `dir`.
    pub fn save(&self, dir: &Path) -> crate::Result<()> {
        let mut lines = vec![TTABLE_HEADER.to_owned()];
        let mut rows: Vec<(String, char, f64)> = Vec::new();
        for (t, p) in self.table.row(None) {
            rows.push((NULL_TOKEN.to_owned(), *t, p));
        }
        for s in self.table.sources() {
            for (t, p) in self.table.row(Some(s)) {
                rows.push((s.to_string(), *t, p));
            }
        }
        rows.retain(|r| r.2 > 0.0);
        rows.sort_by(|a, b| (&a.0, a.1).cmp(&(&b.0, b.1)));
        lines.extend(rows.into_iter().map(|(s, t, p)| format!("{s}\t{t}\t{p}")));
        write_lines(&dir.join(TTABLE_FILE), lines)?;
        let arpa = dir.join(CHARLM_FILE);
        std::fs::write(&arpa, write_arpa(&self.char_lm)).map_err(|e| Error::io(&arpa, e))
    }

    pub fn load(dir: &Path) -> crate::Result<Self> {
        let path = dir.join(TTABLE_FILE);
        let lines = read_lines(&path)?;
        if lines.first().map(String::as_str) != Some(TTABLE_HEADER) {
            return Err(Error::data(&path, 1, format!("expected header {TTABLE_HEADER:?}")));
        }
        let one_char = |s: &str| {
            let mut it = s.chars();
            match (it.next(), it.next()) {
                (Some(c), None) => Some(c),
                _ => None,
            }
        };
        let mut entries = Vec::new();
        for (i, line) in lines.iter().enumerate().skip(1) {
            if line.is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            let bad = || Error::data(&path, i + 1, "expected `source_char<TAB>target_char<TAB>prob`");
            if f.len() != 3 {
                return Err(bad());
            }
            let src = if f[0] == NULL_TOKEN {
                None
            } else {
                Some(one_char(f[0]).ok_or_else(bad)?)
            };
            let tgt = one_char(f[1]).ok_or_else(bad)?;
            let p: f64 = f[2].parse().map_err(|_| bad())?;
            entries.push((src, tgt, p));
        }
        let arpa = dir.join(CHARLM_FILE);
        let text = std::fs::read_to_string(&arpa).map_err(|e| Error::io(&arpa, e))?;
        Ok(CharTransModel {
            table: TransTable::from_entries(entries),
            char_lm: read_arpa(&text)?,
            char_lm_weight: DEFAULT_CHAR_LM_WEIGHT,
        })
    }

    pub fn with_char_lm_weight(mut self, weight: f64) -> Self {
        self.char_lm_weight = weight;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub text: String,
    /// log10 channel probability plus weighted log10 character LM score.
    pub score: f64,
}

/// Up to `k` distinct candidates, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateSet {
    pub word: String,
    pub candidates: Vec<Candidate>,
    /// Source characters without a trained row; they emit uniformly over
    /// the target alphabet.
    pub unseen_chars: Vec<char>,
}

impl CandidateSet {
    pub fn best(&self) -> Option<&Candidate> {
        self.candidates.first()
    }
}

/// Last two emitted characters; `None` is the start symbol.
type History = (Option<char>, Option<char>);

struct Scorer<'a> {
    model: &'a CharTransModel,
    lm_cache: HashMap<(History, Option<char>), f64>,
}

impl Scorer<'_> {
    /// Weighted LM term for emitting `next` (`None` = end of word).
    fn lm(&mut self, hist: History, next: Option<char>) -> f64 {
        if let Some(&v) = self.lm_cache.get(&(hist, next)) {
            return v;
        }
        let tok = |c: Option<char>| c.map_or(BOS.to_owned(), String::from);
        let word = next.map_or(EOS.to_owned(), String::from);
        let v = self.model.char_lm_weight * self.model.char_lm.logprob(&word, &[tok(hist.0), tok(hist.1)]);
        self.lm_cache.insert((hist, next), v);
        v
    }
}

#[derive(Debug)]
struct Node {
    f: f64,
    g: f64,
    text: Vec<char>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl Ord for Node {
    /// Max-heap: higher f first, then lexicographically smaller text.
    fn cmp(&self, other: &Self) -> Ordering {
        self.f.total_cmp(&other.f).then_with(|| other.text.cmp(&self.text))
    }
}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn history(text: &[char]) -> History {
    let n = text.len();
    (n.checked_sub(2).map(|i| text[i]), n.checked_sub(1).map(|i| text[i]))
}

pub fn generate_candidates(word: &str, model: &CharTransModel, k: usize) -> Result<CandidateSet, TranslitError> {
    if k == 0 {
        return Err(TranslitError::InvalidArgument("k must be at least 1".into()));
    }
    let source: Vec<char> = word.chars().collect();
    let mut unseen_chars: Vec<char> = Vec::new();
    let alphabet = model.table.targets();
    if alphabet.is_empty() {
        return Err(TranslitError::InvalidArgument(
            "model has an empty target alphabet".into(),
        ));
    }
    let uniform = (1.0 / alphabet.len() as f64).log10();
    // emissions[i]: (target char, log10 t) options for source position i
    let emissions: Vec<Vec<(char, f64)>> = source
        .iter()
        .map(|c| {
            if model.table.has_source(c) {
                let row: Vec<(char, f64)> = model
                    .table
                    .row(Some(c))
                    .into_iter()
                    .filter(|(_, p)| *p > 0.0)
                    .map(|(t, p)| (*t, p.log10()))
                    .collect();
                if !row.is_empty() {
                    return row;
                }
            }
            if !unseen_chars.contains(c) {
                unseen_chars.push(*c);
            }
            alphabet.iter().map(|&t| (t, uniform)).collect()
        })
        .collect();

    let mut scorer = Scorer {
        model,
        lm_cache: HashMap::new(),
    };
    let n = source.len();

    // reachable[i]: histories possible before emitting position i
    let mut reachable: Vec<BTreeSet<History>> = vec![BTreeSet::new(); n + 1];
    reachable[0].insert((None, None));
    for i in 0..n {
        let next: BTreeSet<History> = reachable[i]
            .iter()
            .flat_map(|h| emissions[i].iter().map(move |(c, _)| (h.1, Some(*c))))
            .collect();
        reachable[i + 1] = next;
    }
    // best[i][h]: best score of completing from position i with history h
    let mut best: Vec<HashMap<History, f64>> = vec![HashMap::new(); n + 1];
    for &h in &reachable[n] {
        let v = scorer.lm(h, None);
        best[n].insert(h, v);
    }
    for i in (0..n).rev() {
        for &h in &reachable[i] {
            let mut m = f64::NEG_INFINITY;
            for &(c, t) in &emissions[i] {
                let v = t + scorer.lm(h, Some(c)) + best[i + 1][&(h.1, Some(c))];
                m = m.max(v);
            }
            best[i].insert(h, m);
        }
    }

    let mut heap = BinaryHeap::new();
    heap.push(Node {
        f: best[0][&(None, None)],
        g: 0.0,
        text: Vec::new(),
    });
    let mut candidates = Vec::new();
    while let Some(node) = heap.pop() {
        let i = node.text.len();
        if i == n {
            candidates.push(Candidate {
                text: node.text.iter().collect(),
                score: node.f,
            });
            if candidates.len() == k {
                break;
            }
            continue;
        }
        let h = history(&node.text);
        for &(c, t) in &emissions[i] {
            let g = node.g + t + scorer.lm(h, Some(c));
            let mut text = node.text.clone();
            text.push(c);
            let rest = if i + 1 == n {
                scorer.lm((h.1, Some(c)), None)
            } else {
                best[i + 1][&(h.1, Some(c))]
            };
            // rounding must not let a child outrank its parent
            let f = (g + rest).min(node.f);
            let g = if i + 1 == n { g + rest } else { g };
            heap.push(Node { f, g, text });
        }
    }
    Ok(CandidateSet {
        word: word.to_owned(),
        candidates,
        unseen_chars,
    })
}

/// Indices of tokens missing from `vocab`.
pub fn detect_oovs(sentence: &Sentence, vocab: &HashSet<String>) -> BTreeSet<usize> {
    sentence
        .iter()
        .enumerate()
        .filter(|(_, w)| !vocab.contains(*w))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescoreWeights {
    pub translit: f64,
    pub lm: f64,
}

impl Default for RescoreWeights {
    fn default() -> Self {
        RescoreWeights { translit: 1.0, lm: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rescored {
    /// Index into the candidate list.
    pub index: usize,
    pub lm_score: f64,
    pub combined: f64,
}

/// Picks the candidate maximizing `translit * score + lm * LM(sentence with
/// the candidate at position)`. Ties keep the earlier candidate.
pub fn rescore_position(
    sentence: &Sentence,
    position: usize,
    candidates: &CandidateSet,
    lm: &NGramModel,
    weights: RescoreWeights,
) -> Option<Rescored> {
    let mut tokens = sentence.tokens().to_vec();
    let mut best: Option<Rescored> = None;
    for (index, cand) in candidates.candidates.iter().enumerate() {
        tokens[position].clone_from(&cand.text);
        let lm_score: f64 = lm.token_logprobs(&tokens).iter().sum();
        let combined = weights.translit * cand.score + weights.lm * lm_score;
        if best.as_ref().is_none_or(|b| combined > b.combined) {
            best = Some(Rescored {
                index,
                lm_score,
                combined,
            });
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct Replacement {
    pub position: usize,
    pub original: String,
    /// `None` when the original token was kept.
    pub chosen: Option<String>,
    pub unseen_chars: Vec<char>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplaceOutcome {
    pub sentence: Sentence,
    pub replacements: Vec<Replacement>,
}

/// Replaces each OOV position independently; every other position keeps
/// its original token, including while rescoring.
pub fn replace_oovs(
    translated: &Sentence,
    oov_positions: &BTreeSet<usize>,
    model: &CharTransModel,
    lm: &NGramModel,
    weights: RescoreWeights,
    k: usize,
) -> Result<ReplaceOutcome, TranslitError> {
    if let Some(&bad) = oov_positions.iter().find(|&&p| p >= translated.len()) {
        return Err(TranslitError::InvalidArgument(format!(
            "OOV position {bad} outside a sentence of {} tokens",
            translated.len()
        )));
    }
    let mut out = translated.tokens().to_vec();
    let mut replacements = Vec::with_capacity(oov_positions.len());
    for &position in oov_positions {
        let original = translated.tokens()[position].clone();
        let cands = generate_candidates(&original, model, k)?;
        let chosen =
            rescore_position(translated, position, &cands, lm, weights).map(|r| cands.candidates[r.index].text.clone());
        if let Some(c) = &chosen {
            out[position].clone_from(c);
        }
        replacements.push(Replacement {
            position,
            original,
            chosen,
            unseen_chars: cands.unseen_chars,
        });
    }
    Ok(ReplaceOutcome {
        sentence: Sentence::new(out),
        replacements,
    })
}

/// Human-readable diagnostics, one line per replaced position.
pub fn render_replacements(replacements: &[Replacement]) -> String {
    let mut out = String::new();
    for r in replacements {
        let chosen = r.chosen.as_deref().unwrap_or("<kept>");
        let _ = write!(out, "{}\t{}\t{}", r.position, r.original, chosen);
        if !r.unseen_chars.is_empty() {
            let chars: String = r.unseen_chars.iter().collect();
            let _ = write!(out, "\tunseen={chars}");
        }
        out.push('\n');
    }
    out
}
