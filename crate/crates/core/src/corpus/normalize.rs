use unicode_normalization::UnicodeNormalization;

use super::{CorpusError, ScriptClass};

/// Validates raw bytes as UTF-8, reporting the offset of the first bad byte.
pub fn decode_utf8(bytes: &[u8]) -> Result<&str, CorpusError> {
    std::str::from_utf8(bytes).map_err(|e| CorpusError::Decode {
        offset: e.valid_up_to(),
    })
}

// Zero-based digit blocks of the major Indic scripts.
const INDIC_DIGIT_ZEROS: &[u32] = &[
    0x0966, // Devanagari
    0x09E6, // Bengali
    0x0A66, // Gurmukhi
    0x0AE6, // Gujarati
    0x0B66, // Oriya
    0x0BE6, // Tamil
    0x0C66, // Telugu
    0x0CE6, // Kannada
    0x0D66, // Malayalam
];

const FULLWIDTH_ZERO: u32 = 0xFF10;

fn digit_value(c: char, script: ScriptClass) -> Option<char> {
    let cp = c as u32;
    if (FULLWIDTH_ZERO..FULLWIDTH_ZERO + 10).contains(&cp) {
        return char::from_digit(cp - FULLWIDTH_ZERO, 10);
    }
    if script == ScriptClass::Indic {
        for &zero in INDIC_DIGIT_ZEROS {
            if (zero..zero + 10).contains(&cp) {
                return char::from_digit(cp - zero, 10);
            }
        }
    }
    None
}

/// Appends the normalized form of `c`. Every replacement is ASCII, which
/// never takes part in canonical composition, so the whole normalization
/// stays idempotent.
fn push_mapped(c: char, script: ScriptClass, out: &mut String) {
    if let Some(d) = digit_value(c, script) {
        out.push(d);
        return;
    }
    match c {
        '\u{2018}' | '\u{2019}' | '\u{201A}' | '\u{201B}' | '\u{2032}' => out.push('\''),
        '\u{201C}' | '\u{201D}' | '\u{201E}' | '\u{201F}' | '\u{2033}' => out.push('"'),
        '\u{2010}'..='\u{2015}' | '\u{2212}' => out.push('-'),
        '\u{2026}' => out.push_str("..."),
        '\u{00A0}' | '\u{2000}'..='\u{200A}' | '\u{202F}' | '\u{205F}' | '\u{3000}' => out.push(' '),
        // zero width space and byte order mark; ZWJ/ZWNJ carry meaning in
        // Indic scripts and are kept
        '\u{200B}' | '\u{FEFF}' => {}
        _ => out.push(c),
    }
}

/// NFC-normalizes `raw` and maps digit forms and punctuation variants onto
/// their ASCII equivalents. Idempotent.
pub fn normalize_text(raw: &str, script: ScriptClass) -> String {
    let mut mapped = String::with_capacity(raw.len());
    for c in raw.nfc() {
        push_mapped(c, script, &mut mapped);
    }
    // removals can bring a base and a combining mark together
    mapped.nfc().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_stays_empty() {
        assert_eq!(normalize_text("", ScriptClass::Latin), "");
        assert_eq!(normalize_text("", ScriptClass::Indic), "");
    }

    #[test]
    fn ascii_is_untouched() {
        let s = "Ahmedabad was named after the sultan Ahmed Shah, who built the city in 1411.";
        assert_eq!(normalize_text(s, ScriptClass::Latin), s);
        assert_eq!(normalize_text(s, ScriptClass::Indic), s);
    }

    #[test]
    fn decomposed_input_is_composed() {
        // e + combining acute, and Devanagari KA + nukta stays as the
        // canonical sequence (U+0958 is a composition exclusion)
        let nfd = "caf\u{0065}\u{0301}";
        assert_eq!(normalize_text(nfd, ScriptClass::Latin), "caf\u{00E9}");
        let reference: String = nfd.nfc().collect();
        assert_eq!(normalize_text(nfd, ScriptClass::Latin), reference);
        assert_eq!(normalize_text("\u{0958}", ScriptClass::Indic), "\u{0915}\u{093C}");
    }

    #[test]
    fn digits_and_punctuation() {
        assert_eq!(normalize_text("१४११", ScriptClass::Indic), "1411");
        assert_eq!(normalize_text("௧௨", ScriptClass::Indic), "12");
        // Indic digits are left alone for Latin text
        assert_eq!(normalize_text("१", ScriptClass::Latin), "१");
        assert_eq!(normalize_text("\u{FF11}\u{FF12}", ScriptClass::Latin), "12");
        assert_eq!(
            normalize_text("\u{201C}don\u{2019}t\u{201D} \u{2014} wait\u{2026}", ScriptClass::Latin),
            "\"don't\" - wait..."
        );
        assert_eq!(normalize_text("a\u{00A0}b\u{200B}c", ScriptClass::Latin), "a bc");
    }

    #[test]
    fn removal_then_composition() {
        assert_eq!(normalize_text("e\u{200B}\u{0301}", ScriptClass::Latin), "\u{00E9}");
    }

    #[test]
    fn decode_reports_offset() {
        assert_eq!(decode_utf8(b"abc").unwrap(), "abc");
        assert_eq!(decode_utf8(b"ab\xffc"), Err(CorpusError::Decode { offset: 2 }));
        assert_eq!(
            decode_utf8(
                "é".as_bytes()
                    .iter()
                    .chain(b"\xc3")
                    .copied()
                    .collect::<Vec<_>>()
                    .as_slice()
            ),
            Err(CorpusError::Decode { offset: 2 })
        );
    }

    proptest! {
        #[test]
        fn idempotent_on_arbitrary_unicode(s in "\\PC*", indic in any::<bool>()) {
            let script = if indic { ScriptClass::Indic } else { ScriptClass::Latin };
            let once = normalize_text(&s, script);
            let twice = normalize_text(&once, script);
            prop_assert_eq!(once, twice);
        }

        #[test]
        fn idempotent_on_combining_heavy_input(
            chars in prop::collection::vec(
                prop_oneof![
                    Just('e'), Just('a'), Just('\u{0301}'), Just('\u{0308}'),
                    Just('\u{200B}'), Just('\u{2019}'), Just('\u{0915}'),
                    Just('\u{093C}'), Just('\u{0958}'), Just('\u{0966}'),
                    Just('\u{00A0}'), Just('='), Just('\u{0338}'),
                ],
                0..24,
            )
        ) {
            let s: String = chars.into_iter().collect();
            for script in [ScriptClass::Latin, ScriptClass::Indic] {
                let once = normalize_text(&s, script);
                prop_assert_eq!(normalize_text(&once, script), once);
            }
        }
    }
}
