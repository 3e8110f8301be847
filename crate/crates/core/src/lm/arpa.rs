use std::collections::BTreeMap;
use std::fmt::Write;

use super::{check_order, LmError, NGramEntry, NGramModel};

/// Shortest decimal that parses back to the same `f64`, so a written model
/// reads back bit-for-bit.
fn fmt_log(x: f64) -> String {
    format!("{x}")
}

/// Writes the model in ARPA format. Sections are sorted, so the output is a
/// deterministic function of the model.
pub fn write_arpa(model: &NGramModel) -> String {
    let mut out = String::from("\\data\\\n");
    for k in 1..=model.order() {
        let _ = writeln!(out, "ngram {k}={}", model.entries(k).len());
    }
    for k in 1..=model.order() {
        let _ = write!(out, "\n\\{k}-grams:\n");
        for (gram, e) in model.entries(k) {
            out.push_str(&fmt_log(e.log10_prob));
            out.push('\t');
            out.push_str(&gram.join(" "));
            if let Some(bo) = e.log10_backoff {
                out.push('\t');
                out.push_str(&fmt_log(bo));
            }
            out.push('\n');
        }
    }
    out.push_str("\n\\end\\\n");
    out
}

fn arpa_err(line: usize, message: impl Into<String>) -> LmError {
    LmError::Arpa {
        line,
        message: message.into(),
    }
}

fn parse_f64(field: &str, line: usize) -> Result<f64, LmError> {
    field
        .parse()
        .map_err(|_| arpa_err(line, format!("bad number {field:?}")))
}

/// Reads an ARPA model. Accepts tabs or spaces between fields, blank lines
/// anywhere, a missing `\end\` marker and text before `\data\`.
pub fn read_arpa(text: &str) -> Result<NGramModel, LmError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));

    for (_, line) in lines.by_ref() {
        if line == "\\data\\" {
            break;
        }
    }

    let mut declared: Vec<usize> = Vec::new();
    let mut section: Option<usize> = None;
    let mut entries: Vec<BTreeMap<Vec<String>, NGramEntry>> = Vec::new();

    for (no, line) in lines {
        if line.is_empty() {
            continue;
        }
        if line == "\\end\\" {
            break;
        }
        if let Some(spec) = line.strip_prefix("ngram ") {
            if section.is_some() {
                return Err(arpa_err(no, "ngram count after the first section"));
            }
            let (k, n) = spec
                .split_once('=')
                .ok_or_else(|| arpa_err(no, "expected 'ngram K=N'"))?;
            let k: usize = k.trim().parse().map_err(|_| arpa_err(no, "bad order"))?;
            let n: usize = n.trim().parse().map_err(|_| arpa_err(no, "bad count"))?;
            if k != declared.len() + 1 {
                return Err(arpa_err(no, format!("ngram {k} declared out of order")));
            }
            declared.push(n);
            continue;
        }
        if let Some(k) = line.strip_prefix('\\').and_then(|l| l.strip_suffix("-grams:")) {
            let k: usize = k.parse().map_err(|_| arpa_err(no, "bad section header"))?;
            if k != entries.len() + 1 || k > declared.len() {
                return Err(arpa_err(no, format!("unexpected section {k}-grams")));
            }
            entries.push(BTreeMap::new());
            section = Some(k);
            continue;
        }
        let k = section.ok_or_else(|| arpa_err(no, "n-gram line outside a section"))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let log10_backoff = match fields.len() {
            n if n == k + 1 => None,
            n if n == k + 2 => Some(parse_f64(fields[k + 1], no)?),
            n => return Err(arpa_err(no, format!("{n} fields in a {k}-gram line"))),
        };
        let log10_prob = parse_f64(fields[0], no)?;
        let gram: Vec<String> = fields[1..=k].iter().map(|w| w.to_string()).collect();
        entries[k - 1].insert(
            gram,
            NGramEntry {
                log10_prob,
                log10_backoff,
            },
        );
    }

    let order = declared.len();
    check_order(order).map_err(|_| arpa_err(0, format!("unsupported order {order}")))?;
    if entries.len() != order {
        return Err(arpa_err(0, format!("{} of {order} sections present", entries.len())));
    }
    for (k, (level, &n)) in entries.iter().zip(&declared).enumerate() {
        if level.len() != n {
            return Err(arpa_err(
                0,
                format!("{}-grams: header says {n}, found {}", k + 1, level.len()),
            ));
        }
    }
    Ok(NGramModel::from_parts(order, entries, Vec::new()))
}
