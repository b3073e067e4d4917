//! Tape files: the bit length in decimal on the first line, then the bits as
//! hex digits, most significant nibble first. Tape bit 0 is the high bit of
//! the first digit; the last digit is padded with zero bits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::CliError;

pub fn parse(text: &str) -> Result<Vec<bool>, String> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let len_line = lines.next().ok_or("empty tape file")?;
    let len: usize = len_line.parse().map_err(|_| format!("bad length `{len_line}`"))?;
    let hex = lines.next().unwrap_or("");
    if let Some(extra) = lines.next() {
        return Err(format!("unexpected line `{extra}`"));
    }
    if hex.len() != len.div_ceil(4) {
        return Err(format!("length {len} needs {} hex digits, found {}", len.div_ceil(4), hex.len()));
    }
    let mut bits = Vec::with_capacity(hex.len() * 4);
    for ch in hex.chars() {
        let nibble = ch.to_digit(16).ok_or_else(|| format!("bad hex digit `{ch}`"))?;
        bits.extend((0..4).rev().map(|i| (nibble >> i) & 1 == 1));
    }
    if bits[len..].iter().any(|&b| b) {
        return Err("nonzero padding bits".into());
    }
    bits.truncate(len);
    Ok(bits)
}

pub fn format(bits: &[bool]) -> String {
    let mut out = format!("{}\n", bits.len());
    for chunk in bits.chunks(4) {
        let nibble = chunk.iter().enumerate().fold(0u32, |acc, (i, &b)| acc | (b as u32) << (3 - i));
        let _ = write!(out, "{nibble:x}");
    }
    out.push('\n');
    out
}

pub fn read(path: &Path) -> Result<Vec<bool>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text).map_err(|msg| CliError::malformed(format!("{}: {msg}", path.display())))
}

pub fn write(path: &Path, bits: &[bool]) -> Result<(), CliError> {
    fs::write(path, format(bits)).map_err(|e| CliError::io(path, e))
}

/// A string of `0`/`1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<bool>, String> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(format!("bad bit `{c}` in `{s}`")),
        })
        .collect()
}
