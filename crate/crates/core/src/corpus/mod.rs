//! Parallel corpora: reading, normalization, tokenization, filtering,
//! splitting and summary statistics.

mod filter;
mod io;
mod normalize;
mod split;
mod stats;
pub mod synthetic;
mod tokenize;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use filter::{filter_pairs, FilterPolicy};
pub use io::{read_lines, read_parallel, read_sentences, write_lines, write_sentences};
pub use normalize::{decode_utf8, normalize_text};
pub use split::{split_corpus, CorpusSplit, DEFAULT_HELDOUT};
pub use stats::{compute_stats, render_stats_table, CorpusStats};
pub use tokenize::{is_detached_punct, tokenize};

#[derive(Debug, Error, PartialEq)]
pub enum CorpusError {
    #[error("invalid UTF-8 at byte offset {offset}")]
    Decode { offset: usize },

    #[error("invalid filter policy: {0}")]
    InvalidPolicy(String),

    #[error("corpus has {available} pairs but {requested} were requested for dev+test")]
    InsufficientData { requested: usize, available: usize },

    #[error("parallel sides differ in length: {source_lines} source vs {target_lines} target lines")]
    SideMismatch { source_lines: usize, target_lines: usize },
}

/// Script family of a text, selecting the digit and punctuation tables used
/// by normalization and tokenization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ScriptClass {
    #[default]
    Latin,
    Indic,
}

impl FromStr for ScriptClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "latin" => Ok(ScriptClass::Latin),
            "indic" => Ok(ScriptClass::Indic),
            other => Err(format!("unknown script class {other:?} (expected latin or indic)")),
        }
    }
}

/// An ordered sequence of tokens. Tokens are nonempty and carry no
/// whitespace; a sentence round-trips through single-space joining.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sentence {
    tokens: Vec<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<String>) -> Self {
        debug_assert!(tokens
            .iter()
            .all(|t| !t.is_empty() && !t.chars().any(char::is_whitespace)));
        Sentence { tokens }
    }

    /// Splits on Unicode whitespace only.
    pub fn from_whitespace(line: &str) -> Self {
        Sentence {
            tokens: line.split_whitespace().map(str::to_owned).collect(),
        }
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn into_tokens(self) -> Vec<String> {
        self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.tokens.iter()
    }

    pub fn to_line(&self) -> String {
        self.tokens.join(" ")
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_line())
    }
}

impl From<Vec<String>> for Sentence {
    fn from(tokens: Vec<String>) -> Self {
        Sentence::new(tokens)
    }
}

impl From<&[&str]> for Sentence {
    fn from(tokens: &[&str]) -> Self {
        Sentence::new(tokens.iter().map(|t| t.to_string()).collect())
    }
}

impl<const N: usize> From<[&str; N]> for Sentence {
    fn from(tokens: [&str; N]) -> Self {
        Sentence::from(&tokens[..])
    }
}

impl FromIterator<String> for Sentence {
    fn from_iter<I: IntoIterator<Item = String>>(iter: I) -> Self {
        Sentence::new(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Sentence {
    type Item = &'a String;
    type IntoIter = std::slice::Iter<'a, String>;

    fn into_iter(self) -> Self::IntoIter {
        self.tokens.iter()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentencePair {
    /// Position of the pair in the corpus it was first read from. Survives
    /// filtering and splitting so outputs can be traced back to input lines.
    pub id: usize,
    pub source: Sentence,
    pub target: Sentence,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub pairs: Vec<SentencePair>,
    pub source_lang: String,
    pub target_lang: String,
}

impl ParallelCorpus {
    /// Builds a corpus from aligned sides, numbering pairs from zero.
    pub fn from_sides(source: Vec<Sentence>, target: Vec<Sentence>) -> Result<Self, CorpusError> {
        if source.len() != target.len() {
            return Err(CorpusError::SideMismatch {
                source_lines: source.len(),
                target_lines: target.len(),
            });
        }
        let pairs = source
            .into_iter()
            .zip(target)
            .enumerate()
            .map(|(id, (source, target))| SentencePair { id, source, target })
            .collect();
        Ok(ParallelCorpus {
            pairs,
            ..Default::default()
        })
    }

    /// Convenience constructor from `(source, target)` lines split on
    /// whitespace.
    pub fn from_lines<'a>(lines: impl IntoIterator<Item = (&'a str, &'a str)>) -> Self {
        let pairs = lines
            .into_iter()
            .enumerate()
            .map(|(id, (s, t))| SentencePair {
                id,
                source: Sentence::from_whitespace(s),
                target: Sentence::from_whitespace(t),
            })
            .collect();
        ParallelCorpus {
            pairs,
            ..Default::default()
        }
    }

    pub fn with_langs(mut self, source_lang: &str, target_lang: &str) -> Self {
        self.source_lang = source_lang.to_owned();
        self.target_lang = target_lang.to_owned();
        self
    }

    /// Same language tags, different pairs.
    pub fn with_pairs(&self, pairs: Vec<SentencePair>) -> Self {
        ParallelCorpus {
            pairs,
            source_lang: self.source_lang.clone(),
            target_lang: self.target_lang.clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|p| &p.source)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Sentence> {
        self.pairs.iter().map(|p| &p.target)
    }
}
