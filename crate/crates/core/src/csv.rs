//! Instance files: an optional `object_1,...,object_m` header, then one row of
//! nonnegative disutilities per agent. Entries are decimals or `p/q`. Lines
//! starting with `#` and blank lines are ignored.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{Allocation, Instance};
use crate::rational::{is_nonnegative, parse_rational, to_fraction, Rational};

/// Raw rows of an instance file, unnormalized.
pub fn parse_rows(text: &str) -> Result<Vec<Vec<Rational>>> {
    let mut rows: Vec<Vec<Rational>> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim().trim_start_matches('\u{feff}');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.first().is_some_and(|c| c.starts_with("object_")) {
            if width.is_some() {
                return Err(Error::Csv {
                    line: line_no,
                    message: "header must come before the data rows".into(),
                });
            }
            for (j, c) in cells.iter().enumerate() {
                if *c != format!("object_{}", j + 1) {
                    return Err(Error::Csv {
                        line: line_no,
                        message: format!("expected header `object_{}`, found `{c}`", j + 1),
                    });
                }
            }
            width = Some(cells.len());
            continue;
        }
        let mut row = Vec::with_capacity(cells.len());
        for (j, c) in cells.iter().enumerate() {
            let x = parse_rational(c).map_err(|_| Error::Csv {
                line: line_no,
                message: format!("column {}: cannot parse `{c}`", j + 1),
            })?;
            if !is_nonnegative(&x) {
                return Err(Error::Csv {
                    line: line_no,
                    message: format!("column {}: negative disutility {c}", j + 1),
                });
            }
            row.push(x);
        }
        match width {
            Some(w) if w != row.len() => {
                return Err(Error::Csv {
                    line: line_no,
                    message: format!("expected {w} entries, found {}", row.len()),
                })
            }
            _ => width = Some(row.len()),
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Parses and normalizes an instance. Fails on a file with no rows.
pub fn parse_instance(text: &str) -> Result<Instance> {
    let rows = parse_rows(text)?;
    if rows.is_empty() {
        return Err(Error::Validation("instance file has no agent rows".into()));
    }
    Instance::normalize(&rows)
}

pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<Vec<Rational>>> {
    parse_rows(&fs::read_to_string(path)?)
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<Instance> {
    parse_instance(&fs::read_to_string(path)?)
}

/// Header plus one row per vector, entries as exact fractions.
pub fn write_rows<'a>(rows: impl IntoIterator<Item = &'a [Rational]>) -> String {
    let rows: Vec<&[Rational]> = rows.into_iter().collect();
    let m = rows.first().map_or(0, |r| r.len());
    let mut out = (1..=m)
        .map(|j| format!("object_{j}"))
        .collect::<Vec<_>>()
        .join(",");
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(to_fraction).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Allocation files: one line per agent, 1-based object indices separated by
/// spaces (an empty line is an empty bundle). `#` lines are ignored.
pub fn parse_allocation(text: &str, m: usize) -> Result<Allocation> {
    let mut bundles = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('#') {
            continue;
        }
        let mut bundle = Vec::new();
        for tok in line.split([' ', ',', '\t']) {
            if tok.is_empty() {
                continue;
            }
            let e: usize = tok.parse().map_err(|_| Error::Csv {
                line: idx + 1,
                message: format!("`{tok}` is not an object index"),
            })?;
            if e == 0 {
                return Err(Error::Csv {
                    line: idx + 1,
                    message: "object indices are 1-based".into(),
                });
            }
            bundle.push(e - 1);
        }
        bundles.push(bundle);
    }
    while bundles.last().is_some_and(Vec::is_empty) && bundles.len() > 1 {
        bundles.pop();
    }
    Allocation::new(bundles, m)
}

/// Inverse of [`parse_allocation`].
pub fn write_allocation(a: &Allocation) -> String {
    let mut out = String::new();
    for b in a.bundles() {
        let cells: Vec<String> = b.iter().map(|e| (e + 1).to_string()).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}
