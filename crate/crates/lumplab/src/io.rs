//! File formats: CSV tables, MatrixMarket, trajectory dumps and atomic writes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use lumplab_core::dynamics::Trajectory;
use lumplab_core::linalg::SymMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// A named output file held in memory until written.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: Vec<u8>) -> Self {
        Artifact { name: name.into(), bytes }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Self {
        let mut bytes = serde_json::to_vec_pretty(value).expect("summaries serialize");
        bytes.push(b'\n');
        Artifact::new(name, bytes)
    }
}

/// Shortest round-trip form in scientific notation.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

/// A CSV table preceded by a `# id=…, config_hash=…` comment line.
pub fn csv_bytes(id: &str, config_hash: &str, columns: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = format!("# id={id}, config_hash={config_hash}\n").into_bytes();
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(columns).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    w.flush().expect("in-memory write");
    drop(w);
    out
}

/// Parses [`csv_bytes`] output back into the hash line, header and numeric rows.
pub fn read_csv(bytes: &[u8]) -> Result<(String, Vec<String>, Vec<Vec<f64>>)> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::config(format!("csv: {e}")))?;
    let (first, rest) = text.split_once('\n').ok_or_else(|| Error::config("csv: missing header"))?;
    let mut r = csv::Reader::from_reader(rest.as_bytes());
    let header = r.headers().map_err(|e| Error::config(format!("csv: {e}")))?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| Error::config(format!("csv: {e}")))?;
        let row = rec
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| Error::config(format!("csv value `{s}`: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((first.trim_start_matches("# ").to_string(), header, rows))
}

/// Coordinate `real symmetric` format with the lower triangle's nonzeros.
pub fn matrix_market(m: &SymMatrix) -> Vec<u8> {
    let n = m.dim();
    let entries: Vec<(usize, usize, f64)> =
        (0..n).flat_map(|j| (j..n).map(move |i| (i, j))).map(|(i, j)| (i, j, m.get(i, j))).filter(|e| e.2 != 0.0).collect();
    let mut s = String::from("%%MatrixMarket matrix coordinate real symmetric\n");
    s.push_str(&format!("{n} {n} {}\n", entries.len()));
    for (i, j, v) in entries {
        s.push_str(&format!("{} {} {}\n", i + 1, j + 1, fmt_f64(v)));
    }
    s.into_bytes()
}

pub fn read_matrix_market(text: &str) -> Result<SymMatrix> {
    let bad = |msg: &str| Error::config(format!("MatrixMarket: {msg}"));
    let mut lines = text.lines();
    let banner = lines.next().ok_or_else(|| bad("empty input"))?;
    let lower = banner.to_ascii_lowercase();
    if !lower.starts_with("%%matrixmarket matrix coordinate real") {
        return Err(bad("unsupported banner"));
    }
    let symmetric = lower.ends_with("symmetric");
    let mut lines = lines.filter(|l| !l.starts_with('%') && !l.trim().is_empty());
    let size: Vec<usize> = lines
        .next()
        .ok_or_else(|| bad("missing size line"))?
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad("bad size line")))
        .collect::<Result<_>>()?;
    if size.len() != 3 || size[0] != size[1] {
        return Err(bad("expected a square size line"));
    }
    let mut m = SymMatrix::zeros(size[0]);
    for _ in 0..size[2] {
        let line = lines.next().ok_or_else(|| bad("truncated entries"))?;
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(bad("bad entry line"));
        }
        let i: usize = t[0].parse().map_err(|_| bad("bad row index"))?;
        let j: usize = t[1].parse().map_err(|_| bad("bad column index"))?;
        let v: f64 = t[2].parse().map_err(|_| bad("bad value"))?;
        if i == 0 || j == 0 || i > size[0] || j > size[0] {
            return Err(bad("index out of range"));
        }
        if !symmetric && i < j {
            continue;
        }
        m.set(i - 1, j - 1, v);
    }
    Ok(m)
}

/// Little-endian dump: `u64` dimension `n`, `u64` state count `S`, then for
/// every state `s` the vectors `u_s`, `v_s`, `a_s` as `n` `f64` each.
pub fn trajectory_bytes(t: &Trajectory) -> Vec<u8> {
    let n = t.dim();
    let mut out = Vec::with_capacity(16 + t.len() * 3 * n * 8);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&(t.len() as u64).to_le_bytes());
    for s in 0..t.len() {
        for v in [&t.u[s], &t.v[s], &t.a[s]] {
            for x in v.iter() {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    out
}

/// States `(u, v, a)` from a [`trajectory_bytes`] dump.
pub fn read_trajectory(bytes: &[u8]) -> Result<Vec<[Vec<f64>; 3]>> {
    let bad = || Error::config("trajectory dump is truncated");
    let word = |k: usize| -> Result<[u8; 8]> { bytes.get(8 * k..8 * k + 8).and_then(|b| b.try_into().ok()).ok_or_else(bad) };
    let n = u64::from_le_bytes(word(0)?) as usize;
    let count = u64::from_le_bytes(word(1)?) as usize;
    if bytes.len() != 16 + count * 3 * n * 8 {
        return Err(bad());
    }
    let mut k = 2;
    let mut states = Vec::with_capacity(count);
    for _ in 0..count {
        let mut next = || -> Result<Vec<f64>> {
            let v = (0..n).map(|i| word(k + i).map(f64::from_le_bytes)).collect::<Result<Vec<_>>>()?;
            k += n;
            Ok(v)
        };
        states.push([next()?, next()?, next()?]);
    }
    Ok(states)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(dir: &Path, artifact: &Artifact) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(&artifact.name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(&artifact.bytes).map_err(|e| Error::io(&path, e))?;
    tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use lumplab_core::dynamics::{newmark, NewmarkConfig};
    use lumplab_core::linalg::MassOperator;

    #[test]
    fn matrix_market_round_trip() {
        let m = SymMatrix::from_rows(&[&[2.0, -1.0, 0.0], &[-1.0, 2.0, 0.125], &[0.0, 0.125, 1e-300]]);
        let text = String::from_utf8(matrix_market(&m)).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric\n3 3 5\n"));
        assert_eq!(read_matrix_market(&text).unwrap(), m);
        assert!(read_matrix_market("%%MatrixMarket matrix array real general\n").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let cols = vec!["k".to_string(), "M".to_string()];
        let rows = vec![vec!["1".into(), fmt_f64(0.1)], vec!["2".into(), fmt_f64(2.5e-17)]];
        let bytes = csv_bytes("x", "abc", &cols, &rows);
        let (meta, header, data) = read_csv(&bytes).unwrap();
        assert_eq!(meta, "id=x, config_hash=abc");
        assert_eq!(header, cols);
        assert_eq!(data, vec![vec![1.0, 0.1], vec![2.0, 2.5e-17]]);
    }

    #[test]
    fn trajectory_round_trip() {
        let m = MassOperator::Dense(SymMatrix::identity(2));
        let k = SymMatrix::from_rows(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        let cfg = NewmarkConfig::central_difference(1.0, 5).unwrap();
        let t = newmark(&m, &k, &|_| vec![0.0, 1.0], &[1.0, 0.0], &[0.0, 0.5], &cfg).unwrap();
        let bytes = trajectory_bytes(&t);
        assert_eq!(bytes.len(), 16 + 6 * 3 * 2 * 8);
        let states = read_trajectory(&bytes).unwrap();
        for (s, st) in states.iter().enumerate() {
            assert_eq!(st[0], t.u[s]);
            assert_eq!(st[1], t.v[s]);
            assert_eq!(st[2], t.a[s]);
        }
        assert!(read_trajectory(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = write_atomic(dir.path(), &Artifact::new("a.txt", b"one".to_vec())).unwrap();
        write_atomic(dir.path(), &Artifact::new("a.txt", b"two".to_vec())).unwrap();
        assert_eq!(fs::read(p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
