use super::{ScriptClass, Sentence};

/// Punctuation characters split off as tokens of their own.
const DETACHED: &[char] = &['.', ',', ';', ':', '!', '?', '(', ')', '"', '\''];
/// Danda and double danda, detached only for Indic text.
const INDIC_DETACHED: &[char] = &['\u{0964}', '\u{0965}'];

pub fn is_detached_punct(c: char, script: ScriptClass) -> bool {
    DETACHED.contains(&c) || (script == ScriptClass::Indic && INDIC_DETACHED.contains(&c))
}

/// Whitespace split, then every detachable punctuation character becomes a
/// separate token. Runs of other characters are never broken.
pub fn tokenize(raw: &str, script: ScriptClass) -> Sentence {
    let mut tokens = Vec::new();
    for chunk in raw.split_whitespace() {
        let mut start = 0;
        for (i, c) in chunk.char_indices() {
            if is_detached_punct(c, script) {
                if start < i {
                    tokens.push(chunk[start..i].to_owned());
                }
                let end = i + c.len_utf8();
                tokens.push(chunk[i..end].to_owned());
                start = end;
            }
        }
        if start < chunk.len() {
            tokens.push(chunk[start..].to_owned());
        }
    }
    Sentence::new(tokens)
}
