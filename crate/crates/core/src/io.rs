//! Line-based text formats for dense matrices, coordinate-format sparse
//! matrices and diagonal vectors. Numbers are written with 17 significant
//! digits so that a write/read round trip is exact.

use nalgebra::DMatrix;

use crate::linalg::CsrMatrix;
use crate::{Error, Result};

pub fn fmt_f64(v: f64) -> String {
    format!("{:.16e}", v)
}

/// `dense <rows> <cols>` followed by one row per line.
pub fn write_dense(a: &DMatrix<f64>) -> String {
    let mut s = format!("dense {} {}\n", a.nrows(), a.ncols());
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| fmt_f64(a[(i, j)])).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s
}

pub fn read_dense(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 3 || h[0] != "dense" {
        return Err(Error::Parse { line: ln + 1, msg: "expected `dense <rows> <cols>`".into() });
    }
    let r = parse_usize(h[1], ln)?;
    let c = parse_usize(h[2], ln)?;
    let mut a = DMatrix::zeros(r, c);
    for i in 0..r {
        let (ln, line) = lines.next().ok_or(Error::Parse { line: ln + 2 + i, msg: "missing row".into() })?;
        let vals: Vec<&str> = line.split_whitespace().collect();
        if vals.len() != c {
            return Err(Error::Parse { line: ln + 1, msg: format!("expected {c} values") });
        }
        for (j, v) in vals.iter().enumerate() {
            a[(i, j)] = parse_f64(v, ln)?;
        }
    }
    Ok(a)
}

/// `coo <rows> <cols> <nnz>` followed by `row col value` lines.
pub fn write_coo(a: &CsrMatrix) -> String {
    let mut s = format!("coo {} {} {}\n", a.nrows(), a.ncols(), a.nnz());
    for (i, j, v) in a.triplets() {
        s.push_str(&format!("{i} {j} {}\n", fmt_f64(v)));
    }
    s
}

pub fn read_coo(text: &str) -> Result<CsrMatrix> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 4 || h[0] != "coo" {
        return Err(Error::Parse { line: ln + 1, msg: "expected `coo <rows> <cols> <nnz>`".into() });
    }
    let (r, c, nnz) = (parse_usize(h[1], ln)?, parse_usize(h[2], ln)?, parse_usize(h[3], ln)?);
    let mut t = Vec::with_capacity(nnz);
    for (ln, line) in lines.take(nnz) {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::Parse { line: ln + 1, msg: "expected `row col value`".into() });
        }
        let (i, j) = (parse_usize(f[0], ln)?, parse_usize(f[1], ln)?);
        if i >= r || j >= c {
            return Err(Error::Parse { line: ln + 1, msg: "index out of range".into() });
        }
        t.push((i, j, parse_f64(f[2], ln)?));
    }
    if t.len() != nnz {
        return Err(Error::Parse { line: 0, msg: format!("expected {nnz} entries, found {}", t.len()) });
    }
    Ok(CsrMatrix::from_triplets(r, c, &t))
}

/// `diag <n>` followed by one value per line.
pub fn write_diag(d: &[f64]) -> String {
    let mut s = format!("diag {}\n", d.len());
    for v in d {
        s.push_str(&fmt_f64(*v));
        s.push('\n');
    }
    s
}

pub fn read_diag(text: &str) -> Result<Vec<f64>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (ln, header) = lines.next().ok_or(Error::Parse { line: 1, msg: "empty input".into() })?;
    let h: Vec<&str> = header.split_whitespace().collect();
    if h.len() != 2 || h[0] != "diag" {
        return Err(Error::Parse { line: ln + 1, msg: "expected `diag <n>`".into() });
    }
    let n = parse_usize(h[1], ln)?;
    let d: Vec<f64> = lines.take(n).map(|(ln, l)| parse_f64(l.trim(), ln)).collect::<Result<_>>()?;
    if d.len() != n {
        return Err(Error::Parse { line: 0, msg: format!("expected {n} values") });
    }
    Ok(d)
}

pub(crate) fn parse_usize(s: &str, line0: usize) -> Result<usize> {
    s.parse().map_err(|_| Error::Parse { line: line0 + 1, msg: format!("not an index: `{s}`") })
}

pub(crate) fn parse_f64(s: &str, line0: usize) -> Result<f64> {
    s.parse().map_err(|_| Error::Parse { line: line0 + 1, msg: format!("not a number: `{s}`") })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_round_trip_is_exact() {
        let a = DMatrix::from_fn(3, 2, |i, j| (i as f64 + 0.1).powf(j as f64 + 0.3) / 7.0);
        assert_eq!(read_dense(&write_dense(&a)).unwrap(), a);
    }

    #[test]
    fn coo_round_trip_is_exact() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 2, 1.0 / 3.0), (2, 1, -2.5e-17)]);
        assert_eq!(read_coo(&write_coo(&a)).unwrap(), a);
        let d = vec![0.1, 1.0 / 7.0];
        assert_eq!(read_diag(&write_diag(&d)).unwrap(), d);
    }

    #[test]
    fn bad_header_reports_line() {
        let e = read_dense("\nfoo 1 1\n1\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }
}
