//! Matrix files: Matrix Market dense array text (`.mtx`) and the GLUM
//! binary format (`.glum`, `.bin`).
//!
//! GLUM layout: the 4 bytes `GLUM`, rows and cols as little-endian `u64`,
//! then `rows * cols` little-endian `f64` values in column-major order.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};

pub const GLUM_MAGIC: &[u8; 4] = b"GLUM";
const MM_HEADER: &str = "%%MatrixMarket matrix array real general";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    MatrixMarket,
    Glum,
}

impl Format {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
            Some("mtx") => Ok(Format::MatrixMarket),
            Some("glum") | Some("bin") => Ok(Format::Glum),
            _ => Err(Error::Parse(format!(
                "cannot infer matrix format of '{}' (use .mtx, .glum or .bin)",
                path.display()
            ))),
        }
    }
}

pub fn write_matrix_market<W: Write>(a: &Matrix, mut w: W) -> Result<()> {
    writeln!(w, "{MM_HEADER}")?;
    writeln!(w, "{} {}", a.nrows(), a.ncols())?;
    for v in a.iter() {
        // shortest representation that parses back to the same bits
        writeln!(w, "{v:e}")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market<R: Read>(r: R) -> Result<Matrix> {
    let mut lines = BufReader::new(r).lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty Matrix Market file".into()))??;
    let lower = header.to_ascii_lowercase();
    let fields: Vec<&str> = lower.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "array" || fields[3] != "real" || fields[4] != "general" {
        return Err(Error::Parse(format!("unsupported Matrix Market header '{header}'")));
    }
    let mut tokens = Vec::new();
    for line in lines {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        tokens.extend(t.split_whitespace().map(str::to_owned));
    }
    let mut it = tokens.into_iter();
    let mut dim = |what: &str| -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("missing {what}")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad {what}")))
    };
    let rows = dim("row count")?;
    let cols = dim("column count")?;
    let data = it
        .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad value '{t}'"))))
        .collect::<Result<Vec<_>>>()?;
    if data.len() != rows * cols {
        return Err(Error::Parse(format!(
            "expected {} values for {rows}x{cols}, found {}",
            rows * cols,
            data.len()
        )));
    }
    linalg::from_col_major(rows, cols, data)
}

pub fn write_glum<W: Write>(a: &Matrix, mut w: W) -> Result<()> {
    w.write_all(GLUM_MAGIC)?;
    w.write_all(&(a.nrows() as u64).to_le_bytes())?;
    w.write_all(&(a.ncols() as u64).to_le_bytes())?;
    for v in a.iter() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_glum<R: Read>(mut r: R) -> Result<Matrix> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != GLUM_MAGIC {
        return Err(Error::Parse("missing GLUM magic".into()));
    }
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let rows = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let cols = u64::from_le_bytes(word) as usize;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| Error::Parse("GLUM dimensions overflow".into()))?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != count * 8 {
        return Err(Error::Parse(format!(
            "GLUM payload has {} bytes, expected {}",
            bytes.len(),
            count * 8
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    linalg::from_col_major(rows, cols, data)
}

pub fn write_matrix(path: &Path, a: &Matrix) -> Result<()> {
    let format = Format::from_path(path)?;
    let w = BufWriter::new(File::create(path)?);
    match format {
        Format::MatrixMarket => write_matrix_market(a, w),
        Format::Glum => write_glum(a, w),
    }
}

pub fn read_matrix(path: &Path) -> Result<Matrix> {
    let format = Format::from_path(path)?;
    let r = File::open(path)?;
    match format {
        Format::MatrixMarket => read_matrix_market(r),
        Format::Glum => read_glum(BufReader::new(r)),
    }
}
