//! Suffix separation with a continuation marker, its inverse, and
//! rule-table stemming.
//!
//! A word is split at most once, at the longest suffix from the table that
//! leaves a nonempty stem. The stem carries the marker (`mahiny@@ aaMnii`)
//! so that [`rejoin`] can glue decoder output back together.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::corpus::{read_lines, Sentence};

pub const DEFAULT_MARKER: &str = "@@";

#[derive(Debug, Error, PartialEq)]
pub enum MorphError {
    #[error("invalid table: {0}")]
    InvalidTable(String),

    #[error("word {word:?} already contains the marker {marker:?}")]
    MarkerCollision { word: String, marker: String },

    #[error("token {position}: {source}")]
    AtToken {
        position: usize,
        #[source]
        source: Box<MorphError>,
    },
}

/// Parses a one-entry-per-line table: blank lines and `#` comments are
/// skipped, surrounding whitespace trimmed.
fn parse_entries(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Longest first, ties lexicographic, duplicates removed.
fn sort_longest_first(entries: impl IntoIterator<Item = String>) -> Vec<String> {
    let set: BTreeSet<String> = entries.into_iter().collect();
    let mut v: Vec<String> = set.into_iter().collect();
    v.sort_by(|a, b| char_len(b).cmp(&char_len(a)).then_with(|| a.cmp(b)));
    v
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuffixTable {
    suffixes: Vec<String>,
    marker: String,
}

impl SuffixTable {
    pub fn new(suffixes: impl IntoIterator<Item = impl Into<String>>, marker: &str) -> Result<Self, MorphError> {
        if marker.is_empty() {
            return Err(MorphError::InvalidTable("marker must be nonempty".into()));
        }
        let entries: Vec<String> = suffixes.into_iter().map(Into::into).collect();
        for s in &entries {
            if s.is_empty() {
                return Err(MorphError::InvalidTable("empty suffix".into()));
            }
            if s.chars().any(char::is_whitespace) {
                return Err(MorphError::InvalidTable(format!("suffix {s:?} contains whitespace")));
            }
            if s.contains(marker) {
                return Err(MorphError::InvalidTable(format!(
                    "suffix {s:?} contains the marker {marker:?}"
                )));
            }
        }
        Ok(SuffixTable {
            suffixes: sort_longest_first(entries),
            marker: marker.to_owned(),
        })
    }

    pub fn parse(text: &str, marker: &str) -> Result<Self, MorphError> {
        SuffixTable::new(parse_entries(text), marker)
    }

    pub fn load(path: &Path, marker: &str) -> crate::Result<Self> {
        let lines = read_lines(path)?;
        Ok(SuffixTable::parse(&lines.join("\n"), marker)?)
    }

    /// Entries in match order.
    pub fn suffixes(&self) -> &[String] {
        &self.suffixes
    }

    pub fn marker(&self) -> &str {
        &self.marker
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    /// The word prefix with the marker appended, or the unchanged word when
    /// no suffix applied.
    pub stem: String,
    pub suffix: Option<String>,
}

impl SplitResult {
    pub fn is_split(&self) -> bool {
        self.suffix.is_some()
    }
}

/// Splits off the first (hence longest) table suffix that is strictly
/// shorter than `word`.
pub fn suffix_split(word: &str, table: &SuffixTable) -> Result<SplitResult, MorphError> {
    if word.contains(table.marker()) {
        return Err(MorphError::MarkerCollision {
            word: word.to_owned(),
            marker: table.marker().to_owned(),
        });
    }
    let word_len = char_len(word);
    for suffix in table.suffixes() {
        if word_len > char_len(suffix) {
            if let Some(prefix) = word.strip_suffix(suffix.as_str()) {
                return Ok(SplitResult {
                    stem: format!("{prefix}{}", table.marker()),
                    suffix: Some(suffix.clone()),
                });
            }
        }
    }
    Ok(SplitResult {
        stem: word.to_owned(),
        suffix: None,
    })
}

/// Applies [`suffix_split`] to every token not listed in `protected`; a
/// split token becomes two adjacent tokens.
pub fn split_sentence(
    sentence: &Sentence,
    table: &SuffixTable,
    protected: Option<&BTreeSet<usize>>,
) -> Result<Sentence, MorphError> {
    let mut out = Vec::with_capacity(sentence.len() + sentence.len() / 2);
    for (position, token) in sentence.iter().enumerate() {
        if protected.is_some_and(|p| p.contains(&position)) {
            out.push(token.clone());
            continue;
        }
        let split = suffix_split(token, table).map_err(|e| MorphError::AtToken {
            position,
            source: Box::new(e),
        })?;
        out.push(split.stem);
        out.extend(split.suffix);
    }
    Ok(Sentence::new(out))
}

/// Glues every marker-final token onto the token after it, left to right,
/// so chains collapse into one word. A marker on the last token is dropped.
/// Total: accepts any decoder output.
pub fn rejoin(sentence: &Sentence, marker: &str) -> Sentence {
    let mut out = Vec::with_capacity(sentence.len());
    let mut pending = String::new();
    for token in sentence {
        match token.strip_suffix(marker).filter(|_| !marker.is_empty()) {
            Some(stem) => pending.push_str(stem),
            None => {
                pending.push_str(token);
                out.push(std::mem::take(&mut pending));
            }
        }
    }
    if !pending.is_empty() {
        out.push(pending);
    }
    Sentence::new(out)
}

/// Per-table diagnostics of where splits happen, for inspecting bad splits
/// such as proper nouns that merely end in a listed suffix.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SplitDiagnostics {
    pub tokens: usize,
    pub split: usize,
    pub protected: usize,
    /// `(suffix, count)` in table order.
    pub by_suffix: Vec<(String, usize)>,
}

impl SplitDiagnostics {
    pub fn new(table: &SuffixTable) -> Self {
        SplitDiagnostics {
            by_suffix: table.suffixes().iter().map(|s| (s.clone(), 0)).collect(),
            ..Default::default()
        }
    }

    pub fn record(&mut self, result: &SplitResult) {
        self.tokens += 1;
        if let Some(suffix) = &result.suffix {
            self.split += 1;
            if let Some(slot) = self.by_suffix.iter_mut().find(|(s, _)| s == suffix) {
                slot.1 += 1;
            }
        }
    }

    pub fn record_protected(&mut self) {
        self.tokens += 1;
        self.protected += 1;
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StemRuleTable {
    strip_suffixes: Vec<String>,
    min_stem_len: usize,
}

impl StemRuleTable {
    pub const DEFAULT_MIN_STEM_LEN: usize = 2;

    pub fn new(
        strip_suffixes: impl IntoIterator<Item = impl Into<String>>,
        min_stem_len: usize,
    ) -> Result<Self, MorphError> {
        let entries: Vec<String> = strip_suffixes.into_iter().map(Into::into).collect();
        if entries.iter().any(String::is_empty) {
            return Err(MorphError::InvalidTable("empty stem rule".into()));
        }
        Ok(StemRuleTable {
            strip_suffixes: sort_longest_first(entries),
            min_stem_len,
        })
    }

    /// An empty table: [`stem`] becomes the identity.
    pub fn identity() -> Self {
        StemRuleTable {
            strip_suffixes: Vec::new(),
            min_stem_len: Self::DEFAULT_MIN_STEM_LEN,
        }
    }

    /// Rule file format: one suffix per line, `#` comments, and an optional
    /// `min_stem_len = N` directive.
    pub fn parse(text: &str) -> Result<Self, MorphError> {
        let mut min_stem_len = Self::DEFAULT_MIN_STEM_LEN;
        let mut rules = Vec::new();
        for entry in parse_entries(text) {
            if let Some(value) = entry.strip_prefix("min_stem_len") {
                let value = value.trim_start().trim_start_matches('=').trim();
                min_stem_len = value
                    .parse()
                    .map_err(|_| MorphError::InvalidTable(format!("bad min_stem_len value {value:?}")))?;
            } else {
                rules.push(entry);
            }
        }
        StemRuleTable::new(rules, min_stem_len)
    }

    pub fn load(path: &Path) -> crate::Result<Self> {
        let lines = read_lines(path)?;
        Ok(StemRuleTable::parse(&lines.join("\n"))?)
    }

    /// Conventional English inflectional and derivational endings.
    pub fn english() -> Self {
        StemRuleTable::parse(include_str!("../data/stem_rules_en.txt")).expect("shipped English stem rules are valid")
    }

    pub fn rules(&self) -> &[String] {
        &self.strip_suffixes
    }

    pub fn min_stem_len(&self) -> usize {
        self.min_stem_len
    }
}

/// Strips the longest rule suffix that leaves at least `min_stem_len`
/// characters. At most one suffix is removed.
pub fn stem(word: &str, rules: &StemRuleTable) -> String {
    let word_len = char_len(word);
    for suffix in rules.rules() {
        let suffix_len = char_len(suffix);
        if word_len >= suffix_len + rules.min_stem_len() {
            if let Some(prefix) = word.strip_suffix(suffix.as_str()) {
                return prefix.to_owned();
            }
        }
    }
    word.to_owned()
}

pub fn stem_sentence(sentence: &Sentence, rules: &StemRuleTable) -> Sentence {
    sentence.iter().map(|w| stem(w, rules)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table(entries: &[&str]) -> SuffixTable {
        SuffixTable::new(entries.iter().copied(), DEFAULT_MARKER).unwrap()
    }

    fn sent(tokens: &[&str]) -> Sentence {
        Sentence::from(tokens)
    }

    #[test]
    fn marathi_example() {
        let r = suffix_split("mahinyaaMnii", &table(&["aaMnii", "nii"])).unwrap();
        assert_eq!(r.stem, "mahiny@@");
        assert_eq!(r.suffix.as_deref(), Some("aaMnii"));
    }

    #[test]
    fn whole_word_is_not_a_suffix() {
        let r = suffix_split("stu", &table(&["stu", "tu"])).unwrap();
        // "stu" is excluded by the length guard, "tu" still applies
        assert_eq!(r.stem, "s@@");
        assert_eq!(r.suffix.as_deref(), Some("tu"));
        let r = suffix_split("stu", &table(&["stu"])).unwrap();
        assert_eq!(
            r,
            SplitResult {
                stem: "stu".into(),
                suffix: None
            }
        );
    }

    #[test]
    fn longest_match_wins() {
        let t = table(&["tu", "stu"]);
        assert_eq!(t.suffixes(), ["stu", "tu"]);
        let r = suffix_split("pqrstu", &t).unwrap();
        assert_eq!((r.stem.as_str(), r.suffix.as_deref()), ("pqr@@", Some("stu")));
    }

    #[test]
    fn table_ordering_and_validation() {
        let t = table(&["b", "aa", "a", "ab", "aa"]);
        assert_eq!(t.suffixes(), ["aa", "ab", "a", "b"]);
        assert!(SuffixTable::new(["x"], "").is_err());
        assert!(SuffixTable::new([""], "@@").is_err());
        assert!(SuffixTable::new(["a@@b"], "@@").is_err());
        let parsed = SuffixTable::parse("# comment\n\n  il \nukku\n", "@@").unwrap();
        assert_eq!(parsed.suffixes(), ["ukku", "il"]);
    }

    #[test]
    fn length_in_scalar_values() {
        // two scalar values but six bytes: the word is longer than the
        // one-character suffix only by character count
        let t = table(&["ம"]);
        let r = suffix_split("தம", &t).unwrap();
        assert_eq!(r.stem, "த@@");
    }

    #[test]
    fn marker_collision_rejected() {
        assert!(matches!(
            suffix_split("ab@@c", &table(&["c"])),
            Err(MorphError::MarkerCollision { .. })
        ));
        let err = split_sentence(&sent(&["ok", "x@@y"]), &table(&["y"]), None).unwrap_err();
        assert!(matches!(err, MorphError::AtToken { position: 1, .. }));
    }

    #[test]
    fn sentence_split_and_protection() {
        let t = table(&["aaMnii"]);
        assert_eq!(
            split_sentence(&sent(&["mahinyaaMnii"]), &t, None).unwrap(),
            sent(&["mahiny@@", "aaMnii"])
        );
        assert_eq!(
            split_sentence(&sent(&["abc"]), &table(&[]), None).unwrap(),
            sent(&["abc"])
        );
        let protected = BTreeSet::from([0]);
        assert_eq!(
            split_sentence(&sent(&["mahinyaaMnii"]), &t, Some(&protected)).unwrap(),
            sent(&["mahinyaaMnii"])
        );
    }

    #[test]
    fn rejoin_cases() {
        assert_eq!(rejoin(&sent(&["mahiny@@", "aaMnii"]), "@@"), sent(&["mahinyaaMnii"]));
        assert_eq!(rejoin(&sent(&["a@@", "b@@", "c"]), "@@"), sent(&["abc"]));
        assert_eq!(rejoin(&sent(&["ab@@"]), "@@"), sent(&["ab"]));
        assert_eq!(rejoin(&sent(&["x", "@@", "y"]), "@@"), sent(&["x", "y"]));
        assert_eq!(rejoin(&sent(&["@@"]), "@@"), Sentence::default());
        assert_eq!(rejoin(&sent(&[]), "@@"), Sentence::default());
        assert_eq!(rejoin(&sent(&["p+", "q"]), "+"), sent(&["pq"]));
    }

    #[test]
    fn diagnostics_count_splits() {
        let t = table(&["il", "ukku"]);
        let mut d = SplitDiagnostics::new(&t);
        for w in ["veedil", "veedukku", "abc", "ooril"] {
            d.record(&suffix_split(w, &t).unwrap());
        }
        d.record_protected();
        assert_eq!((d.tokens, d.split, d.protected), (5, 3, 1));
        assert_eq!(d.by_suffix, [("ukku".to_string(), 1), ("il".to_string(), 2)]);
    }

    #[test]
    fn stemming() {
        let rules = StemRuleTable::new(["aaMnii"], 2).unwrap();
        assert_eq!(stem("mahinyaaMnii", &rules), "mahiny");
        let short = StemRuleTable::new(["b"], 2).unwrap();
        assert_eq!(stem("ab", &short), "ab");
        assert_eq!(stem("abb", &short), "ab");
        assert_eq!(stem("walking", &StemRuleTable::english()), "walk");
        assert_eq!(stem("anything", &StemRuleTable::identity()), "anything");
    }

    #[test]
    fn stem_rule_file_directive() {
        let rules = StemRuleTable::parse("min_stem_len = 3\n# x\nkal\nil\n").unwrap();
        assert_eq!(rules.min_stem_len(), 3);
        assert_eq!(rules.rules(), ["kal", "il"]);
        assert!(StemRuleTable::parse("min_stem_len = many").is_err());
    }

    #[test]
    fn shipped_english_rules_are_idempotent() {
        let rules = StemRuleTable::english();
        let words = include_str!("../data/stem_check_words_en.txt");
        for w in words.split_whitespace() {
            let once = stem(w, &rules);
            assert_eq!(stem(&once, &rules), once, "{w} -> {once}");
        }
    }

    fn word() -> impl Strategy<Value = String> {
        "[abc@]{1,7}".prop_filter("marker-free", |w| !w.contains("@@"))
    }

    proptest! {
        #[test]
        fn rejoin_inverts_split(
            words in prop::collection::vec(word(), 0..8),
            suffixes in prop::collection::vec("[abc]{1,3}", 0..6),
        ) {
            let t = SuffixTable::new(suffixes, "@@").unwrap();
            let s = Sentence::new(words);
            let split = split_sentence(&s, &t, None).unwrap();
            prop_assert_eq!(rejoin(&split, "@@"), s.clone());
            // at most one marker per original token
            let markers = split.iter().filter(|t| t.ends_with("@@")).count();
            prop_assert!(markers <= s.len());
            prop_assert_eq!(split.len(), s.len() + markers);
        }

        #[test]
        fn never_returns_shorter_matching_suffix(
            w in "[ab]{1,8}",
            suffixes in prop::collection::vec("[ab]{1,4}", 1..6),
        ) {
            let t = SuffixTable::new(suffixes.clone(), "@@").unwrap();
            let r = suffix_split(&w, &t).unwrap();
            let longest = suffixes
                .iter()
                .filter(|s| w.len() > s.len() && w.ends_with(s.as_str()))
                .map(|s| s.len())
                .max();
            prop_assert_eq!(r.suffix.map(|s| s.len()), longest);
        }

        #[test]
        fn splitting_never_grows_vocabulary(n_stems in 1usize..10, n_suffixes in 1usize..6, seed in any::<u64>()) {
            use crate::corpus::synthetic::agglutinative_corpus;
            use std::collections::HashSet;
            let a = agglutinative_corpus(n_stems, n_suffixes, 60, seed);
            let t = SuffixTable::new(a.suffixes.clone(), "@@").unwrap();
            let before: HashSet<String> = a.corpus.targets().flat_map(|s| s.iter().cloned()).collect();
            let after: HashSet<String> = a
                .corpus
                .targets()
                .flat_map(|s| split_sentence(s, &t, None).unwrap().into_tokens())
                .collect();
            // one stem or one suffix alone gains nothing from splitting
            if n_stems >= 2 && n_suffixes >= 2 {
                prop_assert!(after.len() <= before.len());
            }
            if n_stems * n_suffixes > n_stems + n_suffixes {
                prop_assert!(after.len() < before.len());
            }
        }
    }
}
