//! MacKay alist text format for sparse parity-check matrices.
//!
//! ```text
//! n m
//! max_col_weight max_row_weight
//! <n column weights>
//! <m row weights>
//! <n lines: 1-based row indices of each column, zero padded>
//! <m lines: 1-based column indices of each row, zero padded>
//! ```

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use super::ParityCheck;
use crate::{Error, Result};

pub fn to_alist(h: &ParityCheck) -> String {
    let cols = h.columns();
    let max_col = cols.iter().map(Vec::len).max().unwrap_or(0);
    let max_row = h.rows().iter().map(Vec::len).max().unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{} {}", h.n(), h.m());
    let _ = writeln!(out, "{max_col} {max_row}");
    write_weights(&mut out, cols.iter().map(Vec::len));
    write_weights(&mut out, h.rows().iter().map(Vec::len));
    for col in &cols {
        write_padded(&mut out, col, max_col);
    }
    for row in h.rows() {
        write_padded(&mut out, row, max_row);
    }
    out
}

fn write_weights(out: &mut String, weights: impl Iterator<Item = usize>) {
    let line: Vec<String> = weights.map(|w| format!("{w}")).collect();
    let _ = writeln!(out, "{}", line.join(" "));
}

fn write_padded(out: &mut String, idx: &[u32], width: usize) {
    let mut line: Vec<String> = idx.iter().map(|&i| format!("{}", i + 1)).collect();
    line.resize(width, String::from("0"));
    let _ = writeln!(out, "{}", line.join(" "));
}

struct Lines<'a> {
    inner: core::iter::Enumerate<core::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn next_numbers(&mut self, what: &str) -> Result<Vec<usize>> {
        for (i, text) in self.inner.by_ref() {
            self.line = i + 1;
            if text.trim().is_empty() {
                continue;
            }
            return text
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| Error::Alist {
                        line: i + 1,
                        msg: format!("{what}: '{tok}' is not a non-negative integer"),
                    })
                })
                .collect();
        }
        Err(Error::Alist {
            line: self.line + 1,
            msg: format!("unexpected end of input while reading {what}"),
        })
    }

    fn err(&self, msg: String) -> Error {
        Error::Alist {
            line: self.line,
            msg,
        }
    }
}

pub fn from_alist(text: &str) -> Result<ParityCheck> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
        line: 0,
    };
    let dims = lines.next_numbers("dimensions")?;
    let [n, m] = dims[..] else {
        return Err(lines.err("expected 'n m'".into()));
    };
    let maxes = lines.next_numbers("maximum weights")?;
    let [max_col, max_row] = maxes[..] else {
        return Err(lines.err("expected 'max_col_weight max_row_weight'".into()));
    };
    let col_w = lines.next_numbers("column weights")?;
    if col_w.len() != n {
        return Err(lines.err(format!("expected {n} column weights, got {}", col_w.len())));
    }
    let row_w = lines.next_numbers("row weights")?;
    if row_w.len() != m {
        return Err(lines.err(format!("expected {m} row weights, got {}", row_w.len())));
    }
    let mut cols = Vec::with_capacity(n);
    for (c, &w) in col_w.iter().enumerate() {
        let entries = lines.next_numbers("column list")?;
        cols.push(read_list(&lines, entries, w, max_col, m, "column", c)?);
    }
    let mut rows = Vec::with_capacity(m);
    for (r, &w) in row_w.iter().enumerate() {
        let entries = lines.next_numbers("row list")?;
        rows.push(read_list(&lines, entries, w, max_row, n, "row", r)?);
    }
    // Both views must describe the same matrix.
    let h = ParityCheck::from_rows(n, rows).map_err(|e| lines.err(format!("{e}")))?;
    let mut from_cols = h.columns();
    for (c, col) in cols.iter_mut().enumerate() {
        col.sort_unstable();
        from_cols[c].sort_unstable();
        if *col != from_cols[c] {
            return Err(lines.err(format!("column {c} disagrees with the row lists")));
        }
    }
    Ok(h)
}

fn read_list(
    lines: &Lines<'_>,
    entries: Vec<usize>,
    weight: usize,
    max_weight: usize,
    bound: usize,
    what: &str,
    idx: usize,
) -> Result<Vec<u32>> {
    if entries.len() < weight || entries.len() > max_weight.max(weight) {
        return Err(lines.err(format!(
            "{what} {idx}: expected {weight} entries (padded to {max_weight}), got {}",
            entries.len()
        )));
    }
    let (live, pad) = entries.split_at(weight);
    if pad.iter().any(|&p| p != 0) {
        return Err(lines.err(format!("{what} {idx}: non-zero padding")));
    }
    live.iter()
        .map(|&v| {
            if v == 0 || v > bound {
                Err(lines.err(format!("{what} {idx}: index {v} outside 1..={bound}")))
            } else {
                Ok((v - 1) as u32)
            }
        })
        .collect()
}
