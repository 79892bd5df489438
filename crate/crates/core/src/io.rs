//! Text formats for matrices, field matrices and state sets.
//!
//! All formats start with a header line, skip blank lines and lines whose
//! first non-blank character is `#`, and report errors with 1-based line and
//! column numbers.
//!
//! * Bit matrix: `n m delta`, then `n` rows of exactly `n` characters `0`/`1`.
//! * Field matrix: `delta m modulus_hex`, then `delta` rows of `delta` hex
//!   entries separated by whitespace.
//! * State set: `n m delta`, then one hex value per line.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gf::{GfField, GfMatrix};
use crate::gf2::{BitMatrix, BitVector, BlockView};
use crate::typesys::StateSet;

fn err(line: usize, col: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        col,
        msg: msg.into(),
    }
}

/// Content lines with their 1-based line numbers and leading indentation.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let trimmed = raw.trim_start();
        let indent = raw.len() - trimmed.len();
        let trimmed = trimmed.trim_end();
        (!trimmed.is_empty() && !trimmed.starts_with('#')).then_some((i + 1, indent, trimmed))
    })
}

/// Whitespace-separated tokens with their 1-based columns.
fn tokens(line: &str, indent: usize) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices().chain(std::iter::once((line.len(), ' '))) {
        match (c.is_whitespace(), start) {
            (true, Some(s)) => {
                out.push((indent + s + 1, &line[s..i]));
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    out
}

fn parse_header<const K: usize>(
    line: usize,
    indent: usize,
    text: &str,
    names: [&str; K],
    radix: [u32; K],
) -> Result<[u64; K]> {
    let toks = tokens(text, indent);
    if toks.len() != K {
        return Err(err(
            line,
            indent + 1,
            format!("header must be \"{}\"", names.join(" ")),
        ));
    }
    let mut out = [0u64; K];
    for (k, &(col, tok)) in toks.iter().enumerate() {
        let digits = if radix[k] == 16 {
            tok.strip_prefix("0x").unwrap_or(tok)
        } else {
            tok
        };
        out[k] = u64::from_str_radix(digits, radix[k])
            .map_err(|_| err(line, col, format!("bad {} {tok:?}", names[k])))?;
    }
    Ok(out)
}

fn missing(last_line: usize, what: &str) -> Error {
    err(last_line + 1, 1, format!("unexpected end of input: {what}"))
}

pub fn parse_matrix(text: &str) -> Result<BlockView> {
    let mut lines = content_lines(text);
    let (hl, hi, header) = lines.next().ok_or_else(|| err(1, 1, "empty input"))?;
    let [n, m, delta] = parse_header(hl, hi, header, ["n", "m", "delta"], [10, 10, 10])?;
    let (n, m, delta) = (n as usize, m as usize, delta as usize);
    if m == 0 || delta == 0 || n != m * delta {
        return Err(err(hl, hi + 1, format!("n = {n} is not m * delta = {m} * {delta}")));
    }
    let mut rows = Vec::with_capacity(n);
    let mut last = hl;
    for (ln, indent, text) in lines {
        if rows.len() == n {
            return Err(err(ln, indent + 1, format!("more than {n} rows")));
        }
        let mut row = BitVector::zeros(n);
        let mut width = 0;
        for (i, c) in text.chars().enumerate() {
            match c {
                '0' => {}
                '1' if i < n => row.set(i, true),
                '1' => {}
                _ => return Err(err(ln, indent + i + 1, format!("expected 0 or 1, found {c:?}"))),
            }
            width += 1;
        }
        if width != n {
            return Err(err(
                ln,
                indent + width.min(n) + 1,
                format!("row has {width} entries, expected {n}"),
            ));
        }
        rows.push(row);
        last = ln;
    }
    if rows.len() != n {
        return Err(missing(last, &format!("{} of {n} rows", rows.len())));
    }
    BlockView::new(BitMatrix::from_rows(rows)?, m, delta)
}

pub fn emit_matrix(view: &BlockView) -> String {
    let mut out = format!("{} {} {}\n", view.n(), view.m(), view.delta());
    for row in view.matrix().rows() {
        for i in 0..row.len() {
            out.push(if row.get(i) { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

pub fn parse_gf_matrix(text: &str) -> Result<GfMatrix> {
    let mut lines = content_lines(text);
    let (hl, hi, header) = lines.next().ok_or_else(|| err(1, 1, "empty input"))?;
    let [delta, m, modulus] =
        parse_header(hl, hi, header, ["delta", "m", "modulus_hex"], [10, 10, 16])?;
    let field = u32::try_from(m)
        .ok()
        .zip(u32::try_from(modulus).ok())
        .ok_or_else(|| err(hl, hi + 1, "field parameters out of range"))
        .and_then(|(m, p)| GfField::new(m, p).map_err(|e| err(hl, hi + 1, e.to_string())))?;
    let delta = delta as usize;
    if delta == 0 {
        return Err(err(hl, hi + 1, "delta must be positive"));
    }
    let mut entries = Vec::with_capacity(delta * delta);
    let mut last = hl;
    let mut count = 0;
    for (ln, indent, text) in lines {
        if count == delta {
            return Err(err(ln, indent + 1, format!("more than {delta} rows")));
        }
        let toks = tokens(text, indent);
        if toks.len() != delta {
            return Err(err(
                ln,
                indent + 1,
                format!("row has {} entries, expected {delta}", toks.len()),
            ));
        }
        for (col, tok) in toks {
            let v = u32::from_str_radix(tok.strip_prefix("0x").unwrap_or(tok), 16)
                .map_err(|_| err(ln, col, format!("bad hex entry {tok:?}")))?;
            if !field.contains(v) {
                return Err(err(ln, col, format!("entry {tok} is not reduced modulo {modulus:#x}")));
            }
            entries.push(v);
        }
        count += 1;
        last = ln;
    }
    if count != delta {
        return Err(missing(last, &format!("{count} of {delta} rows")));
    }
    GfMatrix::new(field, delta, delta, entries)
}

pub fn emit_gf_matrix(m: &GfMatrix) -> String {
    let f = m.field();
    let mut out = format!("{} {} {:x}\n", m.n_rows(), f.m(), f.modulus());
    for i in 0..m.n_rows() {
        let row: Vec<String> = (0..m.n_cols()).map(|j| format!("{:x}", m.get(i, j))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

/// A parsed set with the brick shape from its header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetFile {
    pub m: usize,
    pub delta: usize,
    pub set: StateSet,
}

pub fn parse_set(text: &str) -> Result<SetFile> {
    let mut lines = content_lines(text);
    let (hl, hi, header) = lines.next().ok_or_else(|| err(1, 1, "empty input"))?;
    let [n, m, delta] = parse_header(hl, hi, header, ["n", "m", "delta"], [10, 10, 10])?;
    let (n, m, delta) = (n as usize, m as usize, delta as usize);
    if m == 0 || delta == 0 || n != m * delta || n > 64 {
        return Err(err(hl, hi + 1, format!("need n = m * delta <= 64, got {n} {m} {delta}")));
    }
    let mut elems = Vec::new();
    for (ln, indent, text) in lines {
        let v = u64::from_str_radix(text.strip_prefix("0x").unwrap_or(text), 16)
            .map_err(|_| err(ln, indent + 1, format!("bad hex value {text:?}")))?;
        if n < 64 && v >> n != 0 {
            return Err(err(ln, indent + 1, format!("value {text} exceeds {n} bits")));
        }
        elems.push(v);
    }
    Ok(SetFile {
        m,
        delta,
        set: StateSet::new(n, elems)?,
    })
}

pub fn emit_set(set: &StateSet, m: usize, delta: usize) -> String {
    let mut out = format!("{} {m} {delta}\n", set.n());
    for x in set.as_slice() {
        let _ = writeln!(out, "{x:#x}");
    }
    out
}
