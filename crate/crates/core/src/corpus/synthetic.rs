//! Seeded synthetic corpora with known morphological structure.
//!
//! The agglutinative generator pairs an analytic "source" language, where
//! a relation is a separate preposition word, with a "target" language
//! that glues the matching suffix onto the noun stem. Every target word is
//! `stem + suffix`, so the number of target types is stems × suffixes while
//! stemming collapses it back to the number of stems.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ParallelCorpus, Sentence, SentencePair};

const GLOSSES: &[&str] = &[
    "house", "river", "city", "school", "temple", "market", "village", "forest", "garden", "road", "mountain",
    "station", "office", "palace", "lake", "field", "bridge", "harbour", "library", "hospital", "kitchen", "island",
    "valley", "desert", "castle", "factory", "museum", "stadium", "tower", "farm",
];

const PREPOSITIONS: &[&str] = &["in", "to", "by", "with", "from", "of", "on", "for"];

const SUFFIXES: &[&str] = &["il", "ukku", "aal", "odu", "ilirunthu", "in", "meel", "kaaka"];

const ONSETS: &[&str] = &["k", "m", "p", "t", "v", "n", "r", "s", "ch", "th"];
const VOWELS: &[&str] = &["a", "aa", "i", "u", "e", "o"];
// stems end in a consonant so no stem+suffix junction creates another suffix
const CODAS: &[&str] = &["m", "r", "t", "l", "n", "k"];

#[derive(Debug, Clone)]
pub struct AgglutinativeCorpus {
    pub corpus: ParallelCorpus,
    pub stems: Vec<String>,
    pub suffixes: Vec<String>,
    pub glosses: Vec<String>,
    pub prepositions: Vec<String>,
}

/// Generates `n_pairs` sentence pairs over `n_stems` noun stems and
/// `n_suffixes` case suffixes (at most 30 and 8 respectively). Each
/// sentence holds one to three phrases; source phrase `prep gloss`
/// corresponds to target word `stem+suffix`.
pub fn agglutinative_corpus(n_stems: usize, n_suffixes: usize, n_pairs: usize, seed: u64) -> AgglutinativeCorpus {
    assert!(n_stems >= 1 && n_stems <= GLOSSES.len());
    assert!(n_suffixes >= 1 && n_suffixes <= SUFFIXES.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut stems = BTreeSet::new();
    let mut ordered = Vec::with_capacity(n_stems);
    while ordered.len() < n_stems {
        let mut stem = String::new();
        for _ in 0..2 {
            stem.push_str(ONSETS[rng.gen_range(0..ONSETS.len())]);
            stem.push_str(VOWELS[rng.gen_range(0..VOWELS.len())]);
        }
        stem.push_str(CODAS[rng.gen_range(0..CODAS.len())]);
        if stems.insert(stem.clone()) {
            ordered.push(stem);
        }
    }
    let suffixes: Vec<String> = SUFFIXES[..n_suffixes].iter().map(|s| s.to_string()).collect();
    let glosses: Vec<String> = GLOSSES[..n_stems].iter().map(|s| s.to_string()).collect();
    let prepositions: Vec<String> = PREPOSITIONS[..n_suffixes].iter().map(|s| s.to_string()).collect();

    let mut pairs = Vec::with_capacity(n_pairs);
    for id in 0..n_pairs {
        let n_phrases = rng.gen_range(1..=3);
        let mut src = Vec::new();
        let mut tgt = Vec::new();
        for _ in 0..n_phrases {
            // cycle through every combination before sampling so each
            // stem/suffix pair is attested
            let (i, s) = if id < n_stems * n_suffixes && src.is_empty() {
                (id % n_stems, (id / n_stems) % n_suffixes)
            } else {
                (rng.gen_range(0..n_stems), rng.gen_range(0..n_suffixes))
            };
            src.push(prepositions[s].clone());
            src.push(glosses[i].clone());
            tgt.push(format!("{}{}", ordered[i], suffixes[s]));
        }
        pairs.push(SentencePair {
            id,
            source: Sentence::new(src),
            target: Sentence::new(tgt),
        });
    }

    AgglutinativeCorpus {
        corpus: ParallelCorpus {
            pairs,
            source_lang: "en".into(),
            target_lang: "xx".into(),
        },
        stems: ordered,
        suffixes,
        glosses,
        prepositions,
    }
}
