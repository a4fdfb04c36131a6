//! Sequence files: one line of symbol digits, or one byte per symbol.

use std::path::Path;

use mmdude_core::model::{Alphabet, ProbVector, Symbol};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SequenceFormat {
    #[default]
    Text,
    Binary,
}

pub fn read_sequence(
    path: &Path,
    format: SequenceFormat,
    alphabet: Alphabet,
) -> CliResult<Vec<Symbol>> {
    let bytes = std::fs::read(path).map_err(CliError::io(format!("reading {}", path.display())))?;
    let seq: Vec<Symbol> = match format {
        SequenceFormat::Binary => bytes,
        SequenceFormat::Text => {
            let text = std::str::from_utf8(&bytes).map_err(|_| {
                CliError::Config(format!("{} is not a text sequence", path.display()))
            })?;
            text.trim_end()
                .chars()
                .enumerate()
                .map(|(i, c)| {
                    c.to_digit(36).map(|d| d as Symbol).ok_or_else(|| {
                        CliError::Config(format!(
                            "{}: bad symbol {c:?} at position {i}",
                            path.display()
                        ))
                    })
                })
                .collect::<CliResult<_>>()?
        }
    };
    alphabet.check_sequence(&seq)?;
    Ok(seq)
}

pub fn encode_sequence(seq: &[Symbol], format: SequenceFormat) -> Vec<u8> {
    match format {
        SequenceFormat::Binary => seq.to_vec(),
        SequenceFormat::Text => {
            let mut out: Vec<u8> = seq
                .iter()
                .map(|&s| std::char::from_digit(s as u32, 36).expect("symbol below 36") as u8)
                .collect();
            out.push(b'\n');
            out
        }
    }
}

pub fn write_file(path: impl AsRef<Path>, contents: impl AsRef<[u8]>) -> CliResult<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)
                .map_err(CliError::io(format!("creating {}", parent.display())))?;
        }
    }
    std::fs::write(path, contents).map_err(CliError::io(format!("writing {}", path.display())))
}

pub fn write_sequence(path: &Path, seq: &[Symbol], format: SequenceFormat) -> CliResult<()> {
    write_file(path, encode_sequence(seq, format))
}

/// `position,p0,p1,..` with 12 significant digits.
pub fn distributions_csv(dists: &[ProbVector]) -> String {
    let m = dists.first().map_or(0, |d| d.len());
    let mut out = String::from("position");
    for a in 0..m {
        out.push_str(&format!(",p{a}"));
    }
    out.push('\n');
    for (t, d) in dists.iter().enumerate() {
        out.push_str(&t.to_string());
        for p in d.as_slice() {
            out.push_str(&format!(",{}", fmt_float(*p)));
        }
        out.push('\n');
    }
    out
}

/// Float with 12 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.11e}")
}
