//! Matrix Market I/O.
//!
//! Reads and writes symmetric matrices in the coordinate `real symmetric`
//! Matrix Market format (1-based indices on disk, 0-based in memory), plus a
//! plain right-hand-side format with one decimal value per line.  All parse
//! failures carry the 1-based line number where they occurred.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::matrix::{LinalgError, SymmetricMatrix};

/// I/O or parse failure; `Parse` carries the offending 1-based line.
#[derive(Debug, thiserror::Error)]
pub enum MmError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn perr(line: usize, msg: impl Into<String>) -> MmError {
    MmError::Parse {
        line,
        msg: msg.into(),
    }
}

/// Reads a `matrix coordinate real symmetric` file.
pub fn read_matrix(path: impl AsRef<Path>) -> Result<SymmetricMatrix, MmError> {
    let file = File::open(path)?;
    parse_matrix(BufReader::new(file))
}

/// Parses Matrix Market content from any buffered reader.
pub fn parse_matrix(reader: impl BufRead) -> Result<SymmetricMatrix, MmError> {
    let mut lines = reader.lines().enumerate();

    // Header: %%MatrixMarket matrix coordinate real symmetric
    let (idx, header) = lines
        .next()
        .ok_or_else(|| perr(1, "empty file"))
        .and_then(|(i, r)| r.map(|s| (i, s)).map_err(MmError::from))?;
    let lineno = idx + 1;
    let fields: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() != 5 || !fields[0].eq_ignore_ascii_case("%%MatrixMarket") {
        return Err(perr(lineno, "expected '%%MatrixMarket matrix coordinate real symmetric' header"));
    }
    if fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(perr(lineno, format!("unsupported object/format '{} {}'; only 'matrix coordinate' is supported", fields[1], fields[2])));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(perr(lineno, format!("unsupported field type '{}'; only real (or integer) entries are supported", fields[3])));
    }
    if fields[4] != "symmetric" {
        return Err(perr(lineno, format!("unsupported symmetry '{}'; only symmetric matrices are supported", fields[4])));
    }

    // Size line (first non-comment, non-blank line after the header).
    let mut size: Option<(usize, usize, usize, usize)> = None;
    for (idx, line) in &mut lines {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(perr(lineno, "size line must be 'rows cols nnz'"));
        }
        let rows: usize = parts[0]
            .parse()
            .map_err(|_| perr(lineno, format!("bad row count '{}'", parts[0])))?;
        let cols: usize = parts[1]
            .parse()
            .map_err(|_| perr(lineno, format!("bad column count '{}'", parts[1])))?;
        let nnz: usize = parts[2]
            .parse()
            .map_err(|_| perr(lineno, format!("bad entry count '{}'", parts[2])))?;
        if rows != cols {
            return Err(perr(lineno, format!("matrix must be square, got {rows}x{cols}")));
        }
        size = Some((rows, cols, nnz, lineno));
        break;
    }
    let (n, _, nnz, size_lineno) = size.ok_or_else(|| perr(lineno + 1, "missing size line"))?;

    let mut entries = Vec::with_capacity(nnz);
    let mut last_lineno = size_lineno;
    for (idx, line) in &mut lines {
        let lineno = idx + 1;
        last_lineno = lineno;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if entries.len() == nnz {
            return Err(perr(lineno, format!("more than the declared {nnz} entries")));
        }
        let parts: Vec<&str> = t.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(perr(lineno, "entry line must be 'row col value'"));
        }
        let i: usize = parts[0]
            .parse()
            .map_err(|_| perr(lineno, format!("bad row index '{}'", parts[0])))?;
        let j: usize = parts[1]
            .parse()
            .map_err(|_| perr(lineno, format!("bad column index '{}'", parts[1])))?;
        let v: f64 = parts[2]
            .parse()
            .map_err(|_| perr(lineno, format!("bad value '{}'", parts[2])))?;
        if i == 0 || j == 0 || i > n || j > n {
            return Err(perr(lineno, format!("index ({i}, {j}) outside 1..={n}")));
        }
        entries.push((i - 1, j - 1, v));
    }
    if entries.len() != nnz {
        return Err(perr(
            last_lineno,
            format!("declared {nnz} entries but found {}", entries.len()),
        ));
    }

    SymmetricMatrix::from_coo(n, &entries).map_err(|e| match e {
        LinalgError::InvalidData(msg) => perr(size_lineno, msg),
        other => perr(size_lineno, other.to_string()),
    })
}

/// Writes a matrix in coordinate `real symmetric` format.  Only the lower
/// triangle is emitted, sorted by (row, col), zeros skipped; values use
/// Rust's shortest round-trip decimal form so read-back is exact.
pub fn write_matrix(path: impl AsRef<Path>, a: &SymmetricMatrix) -> Result<(), MmError> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    let n = a.dim();
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for i in 0..n {
        for j in 0..=i {
            let v = a.get(i, j);
            if v != 0.0 {
                entries.push((i, j, v));
            }
        }
    }
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{} {} {}", n, n, entries.len())?;
    for (i, j, v) in entries {
        writeln!(w, "{} {} {}", i + 1, j + 1, v)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a right-hand side: one decimal per line; blank lines and lines
/// starting with `%` or `#` are skipped.
pub fn read_rhs(path: impl AsRef<Path>) -> Result<Vec<f64>, MmError> {
    let file = File::open(path)?;
    parse_rhs(BufReader::new(file))
}

/// Parses a right-hand side from any buffered reader.
pub fn parse_rhs(reader: impl BufRead) -> Result<Vec<f64>, MmError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') || t.starts_with('#') {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| perr(lineno, format!("bad value '{t}'")))?;
        out.push(v);
    }
    if out.is_empty() {
        return Err(perr(1, "right-hand side file holds no values"));
    }
    Ok(out)
}

/// Writes a right-hand side, one value per line (shortest round-trip form).
pub fn write_rhs(path: impl AsRef<Path>, b: &[f64]) -> Result<(), MmError> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    for v in b {
        writeln!(w, "{v}")?;
    }
    w.flush()?;
    Ok(())
}
