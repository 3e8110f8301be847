//! BLEU, PER, TER and CDER with micro-averaged corpus aggregation.
//!
//! Error rates are edit counts divided by reference length. Corpus-level
//! rates sum both over all sentence pairs before dividing.

mod bleu;
mod cder;
mod edit;
mod ter;

use std::fmt::Write;

use thiserror::Error;

use crate::corpus::Sentence;

pub use bleu::{bleu, BleuScore, BleuSmoothing, BLEU_SMOOTHING_FLOOR, DEFAULT_MAX_N};
pub use cder::{cder, cder_edits};
pub use edit::{edit_distance, per, per_edits};
pub use ter::{ter, ter_edits, TerEdits, TerMode, EXACT_TER_MAX_LEN, GREEDY_MAX_BLOCK};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("{hypotheses} hypotheses but {references} references")]
    LengthMismatch { hypotheses: usize, references: usize },

    #[error("reference {index} is empty")]
    EmptyReference { index: usize },

    #[error("no hypotheses to score")]
    EmptyCorpus,

    #[error("exact TER is limited to {limit} tokens per side (hyp {hyp_len}, ref {ref_len})")]
    TooLongForExact {
        hyp_len: usize,
        ref_len: usize,
        limit: usize,
    },
}

fn check_reference<T>(reference: &[T]) -> Result<(), MetricError> {
    if reference.is_empty() {
        Err(MetricError::EmptyReference { index: 0 })
    } else {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub lowercase: bool,
    pub ter_mode: TerMode,
    pub smoothing: BleuSmoothing,
    pub max_n: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            lowercase: false,
            ter_mode: TerMode::Greedy,
            smoothing: BleuSmoothing::Strict,
            max_n: DEFAULT_MAX_N,
        }
    }
}

/// Corpus scores plus their `(1 - X) * 100` presentation values.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub bleu: f64,
    pub ter: f64,
    pub per: f64,
    pub cder: f64,
    pub bleu_pct: f64,
    pub one_minus_ter: f64,
    pub one_minus_per: f64,
    pub one_minus_cder: f64,
    pub sentences: usize,
    pub reference_words: usize,
}

impl MetricReport {
    pub fn from_scores(bleu: f64, ter: f64, per: f64, cder: f64) -> Self {
        MetricReport {
            bleu,
            ter,
            per,
            cder,
            bleu_pct: bleu * 100.0,
            one_minus_ter: (1.0 - ter) * 100.0,
            one_minus_per: (1.0 - per) * 100.0,
            one_minus_cder: (1.0 - cder) * 100.0,
            sentences: 0,
            reference_words: 0,
        }
    }

    /// Column table followed by a `key=value` block.
    pub fn render(&self) -> String {
        let mut out = format!("{:>8} {:>8} {:>8} {:>8}\n", "BLEU", "1-TER", "1-PER", "1-CDER");
        let _ = writeln!(
            out,
            "{:>8} {:>8} {:>8} {:>8}",
            fmt2(self.bleu_pct),
            fmt2(self.one_minus_ter),
            fmt2(self.one_minus_per),
            fmt2(self.one_minus_cder)
        );
        out.push('\n');
        for (key, value) in [
            ("bleu", self.bleu),
            ("ter", self.ter),
            ("per", self.per),
            ("cder", self.cder),
            ("bleu_pct", self.bleu_pct),
            ("one_minus_ter", self.one_minus_ter),
            ("one_minus_per", self.one_minus_per),
            ("one_minus_cder", self.one_minus_cder),
        ] {
            let _ = writeln!(out, "{key}={value:.6}");
        }
        let _ = writeln!(out, "sentences={}", self.sentences);
        let _ = writeln!(out, "reference_words={}", self.reference_words);
        out
    }
}

/// Two decimals, rounding half away from zero.
pub fn fmt2(x: f64) -> String {
    let rounded = (x * 100.0).round() / 100.0;
    let s = format!("{rounded:.2}");
    if s == "-0.00" {
        "0.00".to_owned()
    } else {
        s
    }
}

fn lowercased(s: &Sentence) -> Sentence {
    s.iter().map(|w| w.to_lowercase()).collect()
}

pub fn report(hyps: &[Sentence], refs: &[Sentence], options: &EvalOptions) -> Result<MetricReport, MetricError> {
    if hyps.len() != refs.len() {
        return Err(MetricError::LengthMismatch {
            hypotheses: hyps.len(),
            references: refs.len(),
        });
    }
    if hyps.is_empty() {
        return Err(MetricError::EmptyCorpus);
    }
    if let Some(index) = refs.iter().position(Sentence::is_empty) {
        return Err(MetricError::EmptyReference { index });
    }
    let (hyps, refs): (Vec<Sentence>, Vec<Sentence>) = if options.lowercase {
        (
            hyps.iter().map(lowercased).collect(),
            refs.iter().map(lowercased).collect(),
        )
    } else {
        (hyps.to_vec(), refs.to_vec())
    };

    let bleu = bleu(&hyps, &refs, options.max_n, options.smoothing)?.score;
    let (mut ter_e, mut per_e, mut cder_e, mut ref_words) = (0usize, 0usize, 0usize, 0usize);
    for (h, r) in hyps.iter().zip(&refs) {
        ter_e += ter_edits(h.tokens(), r.tokens(), options.ter_mode)?.total();
        per_e += per_edits(h.tokens(), r.tokens());
        cder_e += cder_edits(h.tokens(), r.tokens());
        ref_words += r.len();
    }
    let rate = |e: usize| e as f64 / ref_words as f64;
    let mut report = MetricReport::from_scores(bleu, rate(ter_e), rate(per_e), rate(cder_e));
    report.sentences = hyps.len();
    report.reference_words = ref_words;
    Ok(report)
}
