//! Text vector files.
//!
//! ```text
//! m 1048576 p 1
//! 17 0.5
//! 900001 -0.25
//! ```
//!
//! Indices in files are 1-based. The dimension `2^64` is accepted and held as
//! `u64::MAX`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::vector::SparseVector;

/// A vector together with the `p` it is normalized for.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFile {
    pub p: f64,
    pub x: SparseVector,
}

/// Parses a dimension, allowing `2^k` and mapping `2^64` to `u64::MAX`.
pub fn parse_dim(s: &str) -> Result<u64> {
    let bad = || Error::invalid(format!("bad dimension {s:?}"));
    let v: u128 = match s.strip_prefix("2^") {
        Some(e) => {
            let e: u32 = e.parse().map_err(|_| bad())?;
            1u128.checked_shl(e).filter(|_| e <= 64).ok_or_else(bad)?
        }
        None => s.parse().map_err(|_| bad())?,
    };
    match v {
        v if v == 1u128 << 64 => Ok(u64::MAX),
        v => u64::try_from(v).map_err(|_| bad()),
    }
}

pub fn format_dim(m: u64) -> String {
    if m == u64::MAX {
        (1u128 << 64).to_string()
    } else {
        m.to_string()
    }
}

pub fn read_vector<R: BufRead>(reader: R) -> Result<VectorFile> {
    let mut lines = reader.lines().enumerate().filter_map(|(n, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        other => Some((n + 1, other)),
    });
    let (n, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let (dim, p) = match fields.as_slice() {
        ["m", dim, "p", p] => (
            parse_dim(dim).map_err(|e| Error::Parse { line: n, msg: e.to_string() })?,
            p.parse::<f64>().map_err(|e| Error::Parse { line: n, msg: e.to_string() })?,
        ),
        _ => {
            return Err(Error::Parse {
                line: n,
                msg: format!("expected `m <dim> p <p>`, got {header:?}"),
            })
        }
    };
    let mut entries = Vec::new();
    for (n, line) in lines {
        let line = line?;
        let mut it = line.split_whitespace();
        let parse_err = |msg: String| Error::Parse { line: n, msg };
        let (Some(i), Some(v), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_err(format!("expected `<index> <value>`, got {line:?}")));
        };
        let i: u64 = i.parse().map_err(|e| parse_err(format!("index: {e}")))?;
        let v: f64 = v.parse().map_err(|e| parse_err(format!("value: {e}")))?;
        if i == 0 {
            return Err(parse_err("indices are 1-based".into()));
        }
        entries.push((i - 1, v));
    }
    entries.sort_by_key(|&(i, _)| i);
    if let Some(w) = entries.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::DuplicateIndex { index: w[0].0 + 1 });
    }
    Ok(VectorFile {
        p,
        x: SparseVector::from_entries(dim, entries)?,
    })
}

pub fn write_vector<W: Write>(mut writer: W, x: &SparseVector, p: f64) -> Result<()> {
    let mut out = String::new();
    writeln!(out, "m {} p {}", format_dim(x.dim()), p).unwrap();
    for (i, v) in x.iter() {
        writeln!(out, "{} {:e}", i + 1, v).unwrap();
    }
    writer.write_all(out.as_bytes())?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<VectorFile> {
    let f = std::fs::File::open(path)?;
    read_vector(std::io::BufReader::new(f))
}

pub fn save(path: impl AsRef<Path>, x: &SparseVector, p: f64) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_vector(std::io::BufWriter::new(f), x, p)
}
