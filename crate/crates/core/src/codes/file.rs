//! Line-oriented code definition files.
//!
//! ```text
//! # Hamming [7,4,3]
//! code 7 4 3
//! 1000110
//! 0100101
//! 0010011
//! 0001111
//! ```
//!
//! The header is `code n k [d]` followed by `k` generator rows. An optional
//! `parity r` line with `r = n − k` rows may follow; otherwise the parity
//! check is derived by elimination. Blank lines and `#` comments are ignored
//! and a file may hold several entries.

use std::path::Path;

use crate::error::{Error, Result};
use crate::gf2::{BinaryMatrix, BitString};

use super::LinearCode;

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse(format!("line {line}: {}", msg.into()))
}

pub fn parse_codes(text: &str) -> Result<Vec<LinearCode>> {
    let lines: Vec<(usize, &str)> = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .collect();
    let mut codes = Vec::new();
    let mut i = 0;
    while i < lines.len() {
        let (lineno, header) = lines[i];
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.first() != Some(&"code") || !(3..=4).contains(&fields.len()) {
            return Err(err(lineno, format!("expected `code n k [d]`, found `{header}`")));
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| err(lineno, format!("bad integer `{s}`")));
        let n = num(fields[1])?;
        let k = num(fields[2])?;
        let d = fields.get(3).map(|s| num(s)).transpose()?;
        if k > n {
            return Err(err(lineno, format!("k = {k} exceeds n = {n}")));
        }
        i += 1;
        let generator = read_rows(&lines, &mut i, k, n)?;
        let parity = match lines.get(i) {
            Some((pl, l)) if l.starts_with("parity") => {
                let r: usize = l
                    .split_whitespace()
                    .nth(1)
                    .ok_or_else(|| err(*pl, "expected `parity r`"))?
                    .parse()
                    .map_err(|_| err(*pl, "bad parity row count"))?;
                i += 1;
                Some(read_rows(&lines, &mut i, r, n)?)
            }
            _ => None,
        };
        let code = match parity {
            Some(h) => LinearCode::with_parity_check(generator, h, d),
            None => LinearCode::from_generator(generator, d),
        }
        .map_err(|e| err(lineno, e.to_string()))?;
        codes.push(code);
    }
    Ok(codes)
}

fn read_rows(lines: &[(usize, &str)], i: &mut usize, count: usize, n: usize) -> Result<BinaryMatrix> {
    let mut rows = Vec::with_capacity(count);
    for _ in 0..count {
        let (lineno, l) = *lines
            .get(*i)
            .ok_or_else(|| err(lines.last().map_or(0, |x| x.0), "unexpected end of file"))?;
        let row: BitString = l.parse().map_err(|e: Error| err(lineno, e.to_string()))?;
        if row.len() != n {
            return Err(err(lineno, format!("row has length {}, expected {n}", row.len())));
        }
        rows.push(row);
        *i += 1;
    }
    BinaryMatrix::from_rows(n, rows)
}

/// Parses a file that must contain exactly one code.
pub fn parse_code(text: &str) -> Result<LinearCode> {
    let mut codes = parse_codes(text)?;
    match codes.len() {
        1 => Ok(codes.remove(0)),
        k => Err(Error::Parse(format!("expected one code entry, found {k}"))),
    }
}

pub fn read_codes(path: &Path) -> Result<Vec<LinearCode>> {
    parse_codes(&std::fs::read_to_string(path)?)
}

pub fn write_code(code: &LinearCode) -> String {
    let mut out = match code.d() {
        Some(d) => format!("code {} {} {d}\n", code.n(), code.k()),
        None => format!("code {} {}\n", code.n(), code.k()),
    };
    for r in code.generator().rows() {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out.push_str(&format!("parity {}\n", code.parity_check().num_rows()));
    for r in code.parity_check().rows() {
        out.push_str(&r.to_string());
        out.push('\n');
    }
    out
}
