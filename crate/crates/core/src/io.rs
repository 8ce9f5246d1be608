//! Plain-text file formats.
//!
//! * sparse matrix: header `n_rows n_cols nnz`, then `nnz` lines
//!   `row col value` (0-based). Written in canonical order; read in any order.
//! * dense matrix: header `n d`, then `n` lines of `d` values.
//! * edge list: one `i j` pair per line (0-based).
//! * labels: one integer per line. `-1` marks a node with no cluster (for
//!   example an isolated node removed before clustering).
//!
//! Values are written in the shortest form that parses back to the same
//! 64-bit float, so write/read round-trips are bit-exact.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::graph::EdgeList;
use crate::sparse::{CooMatrix, DupPolicy};

fn parse<T: FromStr>(tok: &str, line: usize, what: &str) -> Result<T> {
    tok.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("invalid {what} {tok:?}"),
    })
}

fn parse_value(tok: &str, line: usize) -> Result<f64> {
    let v: f64 = parse(tok, line, "value")?;
    if !v.is_finite() {
        return Err(Error::Parse {
            line,
            msg: format!("non-finite value {tok:?}"),
        });
    }
    Ok(v)
}

/// Non-blank lines with their 1-based line numbers.
fn content_lines<R: BufRead>(r: R) -> impl Iterator<Item = Result<(usize, String)>> {
    r.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(s) if s.trim().is_empty() => None,
        Ok(s) => Some(Ok((i + 1, s))),
        Err(e) => Some(Err(e.into())),
    })
}

fn expect_fields(line: &str, n: usize, lineno: usize) -> Result<Vec<&str>> {
    let f: Vec<&str> = line.split_whitespace().collect();
    if f.len() != n {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected {n} fields, found {}", f.len()),
        });
    }
    Ok(f)
}

fn header(
    lines: &mut impl Iterator<Item = Result<(usize, String)>>,
    fields: usize,
) -> Result<Vec<usize>> {
    let (no, line) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })??;
    expect_fields(&line, fields, no)?
        .into_iter()
        .map(|t| parse(t, no, "count"))
        .collect()
}

fn fmt_value(v: f64) -> String {
    format!("{v:?}")
}

pub fn read_coo<R: BufRead>(r: R) -> Result<CooMatrix> {
    let mut lines = content_lines(r);
    let h = header(&mut lines, 3)?;
    let (n_rows, n_cols, nnz) = (h[0], h[1], h[2]);
    let mut rows = Vec::with_capacity(nnz);
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    for item in lines {
        let (no, line) = item?;
        let f = expect_fields(&line, 3, no)?;
        rows.push(parse(f[0], no, "row index")?);
        cols.push(parse(f[1], no, "column index")?);
        vals.push(parse_value(f[2], no)?);
    }
    if vals.len() != nnz {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header declares {nnz} entries, found {}", vals.len()),
        });
    }
    CooMatrix::new(n_rows, n_cols, rows, cols, vals)
}

/// Writes `m` in canonical order. Duplicates are summed first.
pub fn write_coo<W: Write>(mut w: W, m: &CooMatrix) -> Result<()> {
    let owned;
    let m = if m.is_canonical() {
        m
    } else {
        owned = m.canonicalize(DupPolicy::Sum)?;
        &owned
    };
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for (r, c, v) in m.triplets() {
        writeln!(w, "{r} {c} {}", fmt_value(v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_dense<R: BufRead>(r: R) -> Result<DenseMatrix> {
    let mut lines = content_lines(r);
    let h = header(&mut lines, 2)?;
    let (n, d) = (h[0], h[1]);
    let mut data = Vec::with_capacity(n * d);
    let mut count = 0;
    for item in lines {
        let (no, line) = item?;
        for tok in expect_fields(&line, d, no)? {
            data.push(parse_value(tok, no)?);
        }
        count += 1;
    }
    if count != n {
        return Err(Error::Parse {
            line: 1,
            msg: format!("header declares {n} rows, found {count}"),
        });
    }
    DenseMatrix::new(n, d, data)
}

pub fn write_dense<W: Write>(mut w: W, m: &DenseMatrix) -> Result<()> {
    writeln!(w, "{} {}", m.n_rows(), m.n_cols())?;
    for i in 0..m.n_rows() {
        let row: Vec<String> = m.row(i).iter().map(|&v| fmt_value(v)).collect();
        writeln!(w, "{}", row.join(" "))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads raw pairs; validate against a node count with [`EdgeList::new`].
pub fn read_edges<R: BufRead>(r: R) -> Result<Vec<(usize, usize)>> {
    content_lines(r)
        .map(|item| {
            let (no, line) = item?;
            let f = expect_fields(&line, 2, no)?;
            Ok((parse(f[0], no, "node index")?, parse(f[1], no, "node index")?))
        })
        .collect()
}

pub fn write_edges<W: Write>(mut w: W, e: &EdgeList) -> Result<()> {
    for &(i, j) in e.pairs() {
        writeln!(w, "{i} {j}")?;
    }
    w.flush()?;
    Ok(())
}

/// Labels with `-1` read as `None`.
pub fn read_labels_opt<R: BufRead>(r: R) -> Result<Vec<Option<usize>>> {
    content_lines(r)
        .map(|item| {
            let (no, line) = item?;
            let f = expect_fields(&line, 1, no)?;
            let v: i64 = parse(f[0], no, "label")?;
            match v {
                -1 => Ok(None),
                v if v >= 0 => Ok(Some(v as usize)),
                _ => Err(Error::Parse {
                    line: no,
                    msg: format!("invalid label {v}"),
                }),
            }
        })
        .collect()
}

/// Labels where every node must be assigned.
pub fn read_labels<R: BufRead>(r: R) -> Result<Vec<usize>> {
    read_labels_opt(r)?
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.ok_or_else(|| Error::Parse {
                line: i + 1,
                msg: "node has no cluster (-1)".into(),
            })
        })
        .collect()
}

pub fn write_labels<W: Write>(w: W, labels: &[usize]) -> Result<()> {
    let opt: Vec<Option<usize>> = labels.iter().copied().map(Some).collect();
    write_labels_opt(w, &opt)
}

pub fn write_labels_opt<W: Write>(mut w: W, labels: &[Option<usize>]) -> Result<()> {
    for l in labels {
        match l {
            Some(v) => writeln!(w, "{v}")?,
            None => writeln!(w, "-1")?,
        }
    }
    w.flush()?;
    Ok(())
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| {
        Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display())))
    })
}

pub fn load_coo(path: impl AsRef<Path>) -> Result<CooMatrix> {
    read_coo(open(path.as_ref())?)
}

pub fn save_coo(path: impl AsRef<Path>, m: &CooMatrix) -> Result<()> {
    write_coo(create(path.as_ref())?, m)
}

pub fn load_dense(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    read_dense(open(path.as_ref())?)
}

pub fn save_dense(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    write_dense(create(path.as_ref())?, m)
}

pub fn load_edges(path: impl AsRef<Path>) -> Result<Vec<(usize, usize)>> {
    read_edges(open(path.as_ref())?)
}

pub fn save_edges(path: impl AsRef<Path>, e: &EdgeList) -> Result<()> {
    write_edges(create(path.as_ref())?, e)
}

pub fn load_labels(path: impl AsRef<Path>) -> Result<Vec<usize>> {
    read_labels(open(path.as_ref())?)
}

pub fn load_labels_opt(path: impl AsRef<Path>) -> Result<Vec<Option<usize>>> {
    read_labels_opt(open(path.as_ref())?)
}

pub fn save_labels(path: impl AsRef<Path>, labels: &[usize]) -> Result<()> {
    write_labels(create(path.as_ref())?, labels)
}

pub fn save_labels_opt(path: impl AsRef<Path>, labels: &[Option<usize>]) -> Result<()> {
    write_labels_opt(create(path.as_ref())?, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coo_reader_accepts_any_order_writer_is_canonical() {
        let text = "3 3 2\n2 1 4.5\n0 1 -1e-7\n";
        let m = read_coo(text.as_bytes()).unwrap();
        assert_eq!(m.nnz(), 2);
        let mut out = Vec::new();
        write_coo(&mut out, &m).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "3 3 2\n0 1 -1e-7\n2 1 4.5\n");
    }

    #[test]
    fn coo_reader_errors() {
        assert!(matches!(read_coo("".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_coo("2 2 2\n0 0 1\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_coo("2 2 1\n0 0 nan\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_coo("2 2 1\n0 x 1\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_coo("2 2 1\n0 5 1\n".as_bytes()), Err(Error::IndexOutOfBounds { .. })));
    }

    #[test]
    fn dense_roundtrip_text() {
        let text = "2 3\n0.1 -2.5 1e300\n0.0 3.0 -0.0\n";
        let m = read_dense(text.as_bytes()).unwrap();
        let mut out = Vec::new();
        write_dense(&mut out, &m).unwrap();
        let back = read_dense(out.as_slice()).unwrap();
        assert!(m.data().iter().zip(back.data()).all(|(a, b)| a.to_bits() == b.to_bits()));
        assert!(read_dense("2 2\n1 2\n".as_bytes()).is_err());
        assert!(read_dense("1 2\n1 2 3\n".as_bytes()).is_err());
    }

    #[test]
    fn labels_and_edges() {
        let l = read_labels_opt("0\n2\n-1\n1\n".as_bytes()).unwrap();
        assert_eq!(l, vec![Some(0), Some(2), None, Some(1)]);
        assert!(read_labels("0\n-1\n".as_bytes()).is_err());
        assert!(read_labels("0\n-3\n".as_bytes()).is_err());
        let mut out = Vec::new();
        write_labels_opt(&mut out, &l).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0\n2\n-1\n1\n");

        let e = read_edges("0 1\n\n2 3\n".as_bytes()).unwrap();
        assert_eq!(e, vec![(0, 1), (2, 3)]);
        assert!(read_edges("0 1 2\n".as_bytes()).is_err());
    }
}
