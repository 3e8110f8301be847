use std::fs;
use std::io::Write;
use std::path::Path;

use super::{decode_utf8, CorpusError, ParallelCorpus, Sentence};
use crate::Error;

/// Reads a UTF-8 text file as lines. Invalid UTF-8 is reported with the
/// 1-based line number and the byte offset inside that line.
pub fn read_lines(path: &Path) -> Result<Vec<String>, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut lines = Vec::new();
    let body = bytes.strip_suffix(b"\n").unwrap_or(&bytes);
    if bytes.is_empty() {
        return Ok(lines);
    }
    for (i, raw) in body.split(|&b| b == b'\n').enumerate() {
        let raw = raw.strip_suffix(b"\r").unwrap_or(raw);
        match decode_utf8(raw) {
            Ok(s) => lines.push(s.to_owned()),
            Err(CorpusError::Decode { offset }) => {
                return Err(Error::data(
                    path,
                    i + 1,
                    format!("invalid UTF-8 at byte offset {offset}"),
                ))
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(lines)
}

pub fn read_sentences(path: &Path) -> Result<Vec<Sentence>, Error> {
    Ok(read_lines(path)?.iter().map(|l| Sentence::from_whitespace(l)).collect())
}

/// Line `i` of `source` and line `i` of `target` form pair `i`.
pub fn read_parallel(source: &Path, target: &Path) -> Result<ParallelCorpus, Error> {
    let src = read_sentences(source)?;
    let tgt = read_sentences(target)?;
    Ok(ParallelCorpus::from_sides(src, tgt)?)
}

pub fn write_lines<S: AsRef<str>>(path: &Path, lines: impl IntoIterator<Item = S>) -> Result<(), Error> {
    let mut buf = String::new();
    for line in lines {
        buf.push_str(line.as_ref());
        buf.push('\n');
    }
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_sentences<'a>(path: &Path, side: impl IntoIterator<Item = &'a Sentence>) -> Result<(), Error> {
    write_lines(path, side.into_iter().map(Sentence::to_line))
}
