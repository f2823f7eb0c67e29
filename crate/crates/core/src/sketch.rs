//! Sketching operators: SRHT, Gaussian, Haar, row selection and explicit
//! dense matrices, plus the oversampling calculator.
//!
//! An operator `S` is `out_dim x in_dim`. `apply_left(A) = S A` sketches
//! rows, `apply_right(A) = A S^T` sketches columns, so a right sketch `V1`
//! of size `n x l` is the operator with `in_dim = n`, `out_dim = l`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng::{gaussian_matrix, Rng64};

/// In-place unnormalized Walsh-Hadamard butterfly.
fn fwht_raw(x: &mut [f64]) {
    let n = x.len();
    let mut h = 1;
    while h < n {
        for start in (0..n).step_by(2 * h) {
            for i in start..start + h {
                let a = x[i];
                let b = x[i + h];
                x[i] = a + b;
                x[i + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Orthonormal Walsh-Hadamard transform of a power-of-two length vector.
pub fn fwht(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut y = x.to_vec();
    fwht_raw(&mut y);
    let s = 1.0 / (n as f64).sqrt();
    y.iter_mut().for_each(|v| *v *= s);
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SketchKind {
    Srht,
    Gaussian,
    Haar,
    RowSelection,
    Explicit,
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SketchKind::Srht => "srht",
            SketchKind::Gaussian => "gaussian",
            SketchKind::Haar => "haar",
            SketchKind::RowSelection => "rows",
            SketchKind::Explicit => "explicit",
        })
    }
}

impl FromStr for SketchKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srht" => Ok(SketchKind::Srht),
            "gaussian" => Ok(SketchKind::Gaussian),
            "haar" => Ok(SketchKind::Haar),
            "rows" | "row_selection" | "row-selection" => Ok(SketchKind::RowSelection),
            "explicit" => Ok(SketchKind::Explicit),
            other => Err(Error::Parse(format!("unknown sketch kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Payload {
    Srht {
        padded: usize,
        signs: Vec<f64>,
        rows: Vec<usize>,
        scale: f64,
    },
    Dense(Matrix),
    Rows(Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct SketchOperator {
    kind: SketchKind,
    in_dim: usize,
    out_dim: usize,
    seed: u64,
    payload: Payload,
}

/// Serializable summary of an operator.
#[derive(Debug, Clone, Serialize)]
pub struct SketchDescriptor {
    pub kind: SketchKind,
    pub in_dim: usize,
    pub out_dim: usize,
    pub seed: u64,
}

/// `n x k` matrix with Haar-distributed orthonormal columns.
pub fn haar_columns(n: usize, k: usize, rng: &mut Rng64) -> Matrix {
    let g = gaussian_matrix(n, k, rng);
    linalg::thin_qr(&g).expect("tall finite Gaussian").q
}

impl SketchOperator {
    /// Draws a random operator. `Explicit` operators are built with
    /// [`SketchOperator::explicit`] instead.
    pub fn new(kind: SketchKind, in_dim: usize, out_dim: usize, seed: u64) -> Result<Self> {
        if in_dim == 0 || out_dim == 0 {
            return Err(Error::InvalidParameter(format!(
                "sketch dims must be positive, got {out_dim}x{in_dim}"
            )));
        }
        let mut rng = Rng64::seed(seed);
        let payload = match kind {
            SketchKind::Srht => {
                let padded = in_dim.next_power_of_two();
                if out_dim > padded {
                    return Err(dim_err(
                        "make_sketch",
                        format!("SRHT out_dim {out_dim} > padded dim {padded}"),
                    ));
                }
                if out_dim > in_dim {
                    return Err(dim_err(
                        "make_sketch",
                        format!("SRHT out_dim {out_dim} > in_dim {in_dim}"),
                    ));
                }
                let signs: Vec<f64> = (0..padded).map(|_| rng.sign()).collect();
                let mut perm: Vec<usize> = (0..padded).collect();
                rng.shuffle(&mut perm);
                perm.truncate(out_dim);
                Payload::Srht {
                    padded,
                    signs,
                    rows: perm,
                    scale: (padded as f64 / out_dim as f64).sqrt(),
                }
            }
            SketchKind::Gaussian => Payload::Dense(gaussian_matrix(out_dim, in_dim, &mut rng)),
            SketchKind::Haar => {
                if out_dim > in_dim {
                    return Err(dim_err(
                        "make_sketch",
                        format!("Haar out_dim {out_dim} > in_dim {in_dim}"),
                    ));
                }
                Payload::Dense(haar_columns(in_dim, out_dim, &mut rng).transpose())
            }
            SketchKind::RowSelection => {
                if out_dim > in_dim {
                    return Err(dim_err(
                        "make_sketch",
                        format!("row selection out_dim {out_dim} > in_dim {in_dim}"),
                    ));
                }
                let mut perm: Vec<usize> = (0..in_dim).collect();
                rng.shuffle(&mut perm);
                perm.truncate(out_dim);
                Payload::Rows(perm)
            }
            SketchKind::Explicit => {
                return Err(Error::InvalidParameter(
                    "explicit sketches need a matrix; use SketchOperator::explicit".into(),
                ))
            }
        };
        Ok(SketchOperator {
            kind,
            in_dim,
            out_dim,
            seed,
            payload,
        })
    }

    /// Selects the given rows (`S = P`); `indices` must be distinct.
    pub fn row_selection(in_dim: usize, indices: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; in_dim];
        for &i in &indices {
            if i >= in_dim || seen[i] {
                return Err(Error::InvalidParameter(format!(
                    "row index {i} out of range or repeated (in_dim {in_dim})"
                )));
            }
            seen[i] = true;
        }
        if indices.is_empty() {
            return Err(Error::InvalidParameter("empty row selection".into()));
        }
        Ok(SketchOperator {
            kind: SketchKind::RowSelection,
            in_dim,
            out_dim: indices.len(),
            seed: 0,
            payload: Payload::Rows(indices),
        })
    }

    /// Wraps a dense `out_dim x in_dim` matrix.
    pub fn explicit(s: Matrix) -> Result<Self> {
        linalg::check_finite(&s)?;
        if s.nrows() == 0 || s.ncols() == 0 {
            return Err(Error::InvalidParameter("empty explicit sketch".into()));
        }
        Ok(SketchOperator {
            kind: SketchKind::Explicit,
            in_dim: s.ncols(),
            out_dim: s.nrows(),
            seed: 0,
            payload: Payload::Dense(s),
        })
    }

    /// Right sketch given as the `n x l` matrix `V1`.
    pub fn explicit_right(v1: &Matrix) -> Result<Self> {
        Self::explicit(v1.transpose())
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }
    pub fn in_dim(&self) -> usize {
        self.in_dim
    }
    pub fn out_dim(&self) -> usize {
        self.out_dim
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn descriptor(&self) -> SketchDescriptor {
        SketchDescriptor {
            kind: self.kind,
            in_dim: self.in_dim,
            out_dim: self.out_dim,
            seed: self.seed,
        }
    }

    /// Selected indices for SRHT (within the padded range) and row selection.
    pub fn selected_rows(&self) -> Option<&[usize]> {
        match &self.payload {
            Payload::Srht { rows, .. } | Payload::Rows(rows) => Some(rows),
            Payload::Dense(_) => None,
        }
    }

    /// Padded length, sign diagonal `D` and scale `sqrt(n'/s)` of an SRHT.
    pub fn srht_parts(&self) -> Option<(usize, &[f64], f64)> {
        match &self.payload {
            Payload::Srht {
                padded, signs, scale, ..
            } => Some((*padded, signs, *scale)),
            _ => None,
        }
    }

    /// `S A`, an `out_dim x cols(A)` matrix.
    pub fn apply_left(&self, a: &Matrix) -> Result<Matrix> {
        if a.nrows() != self.in_dim {
            return Err(dim_err(
                "apply_left",
                format!("sketch in_dim {} vs {} rows", self.in_dim, a.nrows()),
            ));
        }
        let c = a.ncols();
        Ok(match &self.payload {
            Payload::Dense(s) => s * a,
            Payload::Rows(rows) => {
                Matrix::from_fn(rows.len(), c, |i, j| a[(rows[i], j)])
            }
            Payload::Srht {
                padded,
                signs,
                rows,
                scale,
            } => {
                let norm = scale / (*padded as f64).sqrt();
                let mut out = Matrix::zeros(rows.len(), c);
                let mut buf = vec![0.0; *padded];
                for j in 0..c {
                    let col = a.column(j);
                    for i in 0..self.in_dim {
                        buf[i] = signs[i] * col[i];
                    }
                    buf[self.in_dim..].iter_mut().for_each(|v| *v = 0.0);
                    fwht_raw(&mut buf);
                    for (r, &p) in rows.iter().enumerate() {
                        out[(r, j)] = norm * buf[p];
                    }
                }
                out
            }
        })
    }

    /// `A S^T`, an `rows(A) x out_dim` matrix.
    pub fn apply_right(&self, a: &Matrix) -> Result<Matrix> {
        if a.ncols() != self.in_dim {
            return Err(dim_err(
                "apply_right",
                format!("sketch in_dim {} vs {} cols", self.in_dim, a.ncols()),
            ));
        }
        Ok(match &self.payload {
            Payload::Dense(s) => a * s.transpose(),
            Payload::Rows(rows) => {
                Matrix::from_fn(a.nrows(), rows.len(), |i, j| a[(i, rows[j])])
            }
            Payload::Srht { .. } => self.apply_left(&a.transpose())?.transpose(),
        })
    }

    /// `S^T B` for `B` with `out_dim` rows.
    pub fn adjoint_apply(&self, b: &Matrix) -> Result<Matrix> {
        if b.nrows() != self.out_dim {
            return Err(dim_err(
                "adjoint_apply",
                format!("sketch out_dim {} vs {} rows", self.out_dim, b.nrows()),
            ));
        }
        let c = b.ncols();
        Ok(match &self.payload {
            Payload::Dense(s) => s.tr_mul(b),
            Payload::Rows(rows) => {
                let mut out = Matrix::zeros(self.in_dim, c);
                for (r, &p) in rows.iter().enumerate() {
                    out.row_mut(p).copy_from(&b.row(r));
                }
                out
            }
            Payload::Srht {
                padded,
                signs,
                rows,
                scale,
            } => {
                let norm = scale / (*padded as f64).sqrt();
                let mut out = Matrix::zeros(self.in_dim, c);
                let mut buf = vec![0.0; *padded];
                for j in 0..c {
                    buf.iter_mut().for_each(|v| *v = 0.0);
                    for (r, &p) in rows.iter().enumerate() {
                        buf[p] = b[(r, j)];
                    }
                    fwht_raw(&mut buf);
                    for i in 0..self.in_dim {
                        out[(i, j)] = norm * signs[i] * buf[i];
                    }
                }
                out
            }
        })
    }

    /// `S^+ B`. Uses the scaled adjoint when the rows of `S` are orthogonal
    /// with equal norms (unpadded SRHT, Haar, row selection), a dense
    /// pseudo-inverse otherwise.
    pub fn pinv_apply(&self, b: &Matrix) -> Result<Matrix> {
        match &self.payload {
            Payload::Srht { padded, scale, .. } if *padded == self.in_dim => {
                let mut out = self.adjoint_apply(b)?;
                out.scale_mut(1.0 / (scale * scale));
                Ok(out)
            }
            Payload::Rows(_) => self.adjoint_apply(b),
            Payload::Dense(_) if self.kind == SketchKind::Haar => self.adjoint_apply(b),
            _ => {
                if b.nrows() != self.out_dim {
                    return Err(dim_err(
                        "pinv_apply",
                        format!("sketch out_dim {} vs {} rows", self.out_dim, b.nrows()),
                    ));
                }
                Ok(linalg::pinv(&self.to_dense()?, None)? * b)
            }
        }
    }

    /// Dense `out_dim x in_dim` matrix of the operator.
    pub fn to_dense(&self) -> Result<Matrix> {
        match &self.payload {
            Payload::Dense(s) => Ok(s.clone()),
            _ => self.apply_left(&Matrix::identity(self.in_dim, self.in_dim)),
        }
    }
}

/// Convenience constructor matching [`SketchOperator::new`].
pub fn make_sketch(kind: SketchKind, in_dim: usize, out_dim: usize, seed: u64) -> Result<SketchOperator> {
    SketchOperator::new(kind, in_dim, out_dim, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SketchDims {
    pub k: usize,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub l: usize,
    pub lp: usize,
    /// Set when a formula value exceeded the ambient dimension.
    pub clamped: bool,
}

impl SketchDims {
    /// Explicit `(k, l, l')` with `k <= l <= l'` and `l >= 1`.
    pub fn new(k: usize, l: usize, lp: usize) -> Result<Self> {
        if l == 0 || k > l || l > lp {
            return Err(Error::InvalidParameter(format!(
                "need k <= l <= lp and l >= 1, got k={k}, l={l}, lp={lp}"
            )));
        }
        Ok(SketchDims {
            k,
            eps: None,
            delta: None,
            l,
            lp,
            clamped: false,
        })
    }
}

/// Oversampling sizes `l` and `l'` from the accuracy target `eps` and failure
/// probability `delta` (natural logarithms), clamped to `l <= min(m, n)` and
/// `l' <= m`. The `l'` formula is evaluated at the clamped `l`.
pub fn sketch_dims(k: usize, eps: f64, delta: f64, n: usize, m: usize) -> Result<SketchDims> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParameter(format!("eps = {eps} not in (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} not in (0, 1)")));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let cap = m.min(n);
    if k > cap {
        return Err(Error::RankOutOfRange { k, max: cap });
    }
    let kf = k as f64;
    let log_k = (kf / delta).ln();
    let raw_l = (10.0 / eps * (kf.sqrt() + (8.0 * (n as f64 / delta).ln()).sqrt()).powi(2) * log_k).ceil();
    let mut clamped = false;
    let l = if raw_l > cap as f64 {
        clamped = true;
        cap
    } else {
        (raw_l as usize).max(k)
    };
    let raw_lp =
        (10.0 / eps * ((l as f64).sqrt() + (8.0 * (m as f64 / delta).ln()).sqrt()).powi(2) * log_k).ceil();
    let lp = if raw_lp > m as f64 {
        clamped = true;
        m
    } else {
        (raw_lp as usize).max(l)
    };
    Ok(SketchDims {
        k,
        eps: Some(eps),
        delta: Some(delta),
        l,
        lp,
        clamped,
    })
}

/// Extreme singular values of `S Q` for `Q` with orthonormal columns.
pub fn ose_check(s: &SketchOperator, q: &Matrix) -> Result<(f64, f64)> {
    let k = q.ncols();
    let dev = (q.tr_mul(q) - Matrix::identity(k, k))
        .iter()
        .fold(0.0_f64, |acc, x| acc.max(x.abs()));
    if dev > 1e-8 {
        return Err(Error::NotOrthonormal { deviation: dev });
    }
    let sq = s.apply_left(q)?;
    let sv = linalg::singular_values(&sq)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = if sv.len() < k {
        0.0
    } else {
        sv.last().copied().unwrap_or(0.0)
    };
    Ok((smin, smax))
}
