use std::collections::HashSet;
use std::fmt::Write;

use super::Sentence;

/// Vocabulary and length summary of one side of a corpus. Word lengths are
/// counted in Unicode scalar values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusStats {
    pub n_sentences: usize,
    pub n_total_words: usize,
    pub n_unique_words: usize,
    /// Mean length over the distinct word types.
    pub avg_word_len_unique: f64,
    /// Mean length over all token occurrences.
    pub avg_word_len_total: f64,
    pub avg_sentence_len: f64,
}

pub fn compute_stats<'a>(side: impl IntoIterator<Item = &'a Sentence>) -> CorpusStats {
    let mut n_sentences = 0;
    let mut n_total_words = 0;
    let mut total_chars = 0usize;
    let mut types: HashSet<&str> = HashSet::new();
    for sentence in side {
        n_sentences += 1;
        for tok in sentence {
            n_total_words += 1;
            total_chars += tok.chars().count();
            types.insert(tok);
        }
    }
    if n_sentences == 0 {
        return CorpusStats::default();
    }
    let unique_chars: usize = types.iter().map(|t| t.chars().count()).sum();
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    CorpusStats {
        n_sentences,
        n_total_words,
        n_unique_words: types.len(),
        avg_word_len_unique: ratio(unique_chars, types.len()),
        avg_word_len_total: ratio(total_chars, n_total_words),
        avg_sentence_len: ratio(n_total_words, n_sentences),
    }
}

const ROW_LABELS: [&str; 5] = [
    "#sentences",
    "#total words",
    "#unique words",
    "average word length (#characters)",
    "average sentence length (#words)",
];

/// Renders one column per `(header, stats)` with the row labels of the
/// classic morphological-divergence table, followed by a note giving the
/// word length over all tokens.
pub fn render_stats_table(columns: &[(&str, &CorpusStats)]) -> String {
    let label_width = ROW_LABELS.iter().map(|l| l.len()).max().unwrap_or(0);
    let cells: Vec<[String; 5]> = columns
        .iter()
        .map(|(_, s)| {
            [
                s.n_sentences.to_string(),
                s.n_total_words.to_string(),
                s.n_unique_words.to_string(),
                format!("{:.2}", s.avg_word_len_unique),
                format!("{:.2}", s.avg_sentence_len),
            ]
        })
        .collect();
    let widths: Vec<usize> = columns
        .iter()
        .zip(&cells)
        .map(|((h, _), c)| c.iter().map(String::len).chain([h.chars().count()]).max().unwrap_or(0))
        .collect();

    let mut out = String::new();
    let _ = write!(out, "{:label_width$}", "");
    for ((header, _), w) in columns.iter().zip(&widths) {
        let _ = write!(out, " | {header:>w$}");
    }
    out.push('\n');
    for (row, label) in ROW_LABELS.iter().enumerate() {
        let _ = write!(out, "{label:label_width$}");
        for (col, w) in cells.iter().zip(&widths) {
            let _ = write!(out, " | {:>w$}", col[row]);
        }
        out.push('\n');
    }
    for (header, s) in columns {
        let _ = writeln!(
            out,
            "note: {header} average word length on total words = {:.2}",
            s.avg_word_len_total
        );
    }
    out
}
