//! On-disk formats: matrices, pairs and reports.
//!
//! Matrix files are row-major JSON: `{"rows": m, "cols": n, "data": [[re,
//! im], …]}` with IEEE-754 doubles. A q-commuting pair file is
//! `{"T1": matrix, "T2": matrix, "q": [re, im]}`; an intertwining file
//! additionally carries the intertwiner under `"A"`. The path `-` means
//! stdin or stdout.

use std::collections::BTreeMap;
use std::fs;
use std::io::{Read, Write};

use qlift_core::linalg::{c, MatrixOp, Scalar, Tolerances};
use qlift_core::verify::CheckEntry;
use serde::{Deserialize, Serialize};

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixFile {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<[f64; 2]>,
}

impl MatrixFile {
    pub fn from_op(m: &MatrixOp) -> Self {
        let mut data = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                data.push([z.re, z.im]);
            }
        }
        MatrixFile {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_op(&self) -> Result<MatrixOp, String> {
        if self.data.len() != self.rows * self.cols {
            return Err(format!(
                "matrix file has {} entries, expected {}",
                self.data.len(),
                self.rows * self.cols
            ));
        }
        Ok(MatrixOp::from_fn(self.rows, self.cols, |i, j| {
            let [re, im] = self.data[i * self.cols + j];
            c(re, im)
        }))
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PairFile {
    #[serde(rename = "T1")]
    pub t1: MatrixFile,
    #[serde(rename = "T2")]
    pub t2: MatrixFile,
    pub q: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IntertwiningFile {
    #[serde(rename = "A")]
    pub a: MatrixFile,
    #[serde(rename = "T1")]
    pub t1: MatrixFile,
    #[serde(rename = "T2")]
    pub t2: MatrixFile,
    pub q: [f64; 2],
}

pub fn scalar_to_pair(q: Scalar) -> [f64; 2] {
    [q.re, q.im]
}

pub fn pair_to_scalar(q: [f64; 2]) -> Scalar {
    c(q[0], q[1])
}

/// The machine-readable report every command emits.
#[derive(Debug, Serialize)]
pub struct Report {
    pub construction: String,
    pub version: String,
    pub config: serde_json::Value,
    pub tolerances: Tolerances,
    pub checks: Vec<CheckEntry>,
    pub norms: BTreeMap<String, f64>,
    pub condition_numbers: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(construction: &str, config: serde_json::Value, tol: &Tolerances) -> Self {
        Report {
            construction: construction.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            tolerances: *tol,
            checks: Vec::new(),
            norms: BTreeMap::new(),
            condition_numbers: BTreeMap::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|chk| chk.pass)
    }
}

pub fn read_input(path: &str) -> Result<String, String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| format!("reading stdin: {e}"))?;
        Ok(buf)
    } else {
        fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))
    }
}

pub fn write_output(path: &str, contents: &str) -> Result<(), String> {
    if path == "-" {
        std::io::stdout()
            .write_all(contents.as_bytes())
            .map_err(|e| format!("writing stdout: {e}"))
    } else {
        fs::write(path, contents).map_err(|e| format!("writing {path}: {e}"))
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    let mut out = serde_json::to_string_pretty(value).map_err(|e| format!("serializing: {e}"))?;
    out.push('\n');
    Ok(out)
}

/// Parses a complex scalar from Cartesian `re,im`, polar `r@degrees`, or a
/// bare real.
pub fn parse_complex(text: &str) -> Result<Scalar, String> {
    let trimmed = text.trim();
    if let Some((r, deg)) = trimmed.split_once('@') {
        let r: f64 = r
            .trim()
            .parse()
            .map_err(|e| format!("bad modulus in {trimmed:?}: {e}"))?;
        let deg: f64 = deg
            .trim()
            .parse()
            .map_err(|e| format!("bad angle in {trimmed:?}: {e}"))?;
        let rad = deg.to_radians();
        return Ok(c(r * rad.cos(), r * rad.sin()));
    }
    if let Some((re, im)) = trimmed.split_once(',') {
        let re: f64 = re
            .trim()
            .parse()
            .map_err(|e| format!("bad real part in {trimmed:?}: {e}"))?;
        let im: f64 = im
            .trim()
            .parse()
            .map_err(|e| format!("bad imaginary part in {trimmed:?}: {e}"))?;
        return Ok(c(re, im));
    }
    let re: f64 = trimmed
        .parse()
        .map_err(|e| format!("bad scalar {trimmed:?}: {e}"))?;
    Ok(c(re, 0.0))
}
