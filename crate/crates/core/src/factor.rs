//! Low-rank factorizations `A_k = T S`: GLU, RLU, randomized QR, panel
//! rank-revealing RLU and Clarkson-Woodruff.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Dyn, LU};
use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{self, default_tol, Matrix};
use crate::rng::derive_seed;
use crate::sketch::{SketchDescriptor, SketchDims, SketchKind, SketchOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    Glu,
    Rlu,
    Rqr,
    PrrRlu,
    Cw,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Glu,
        Algorithm::Rlu,
        Algorithm::Rqr,
        Algorithm::PrrRlu,
        Algorithm::Cw,
    ];
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Glu => "glu",
            Algorithm::Rlu => "rlu",
            Algorithm::Rqr => "rqr",
            Algorithm::PrrRlu => "prr_rlu",
            Algorithm::Cw => "cw",
        })
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "glu" => Ok(Algorithm::Glu),
            "rlu" => Ok(Algorithm::Rlu),
            "rqr" => Ok(Algorithm::Rqr),
            "prr_rlu" | "prr" => Ok(Algorithm::PrrRlu),
            "cw" => Ok(Algorithm::Cw),
            other => Err(Error::Parse(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FactorDims {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub lp: usize,
}

#[derive(Debug, Clone)]
enum Core {
    Identity,
    /// `T mid^{-1} S`
    Solve { mid: Matrix, lu: LU<f64, Dyn, Dyn> },
    /// `T mid S` with `mid` already a pseudo-inverse
    Multiply { mid: Matrix, ahat: Matrix },
}

/// `A_k = T * core * S` with the sketches that produced it.
#[derive(Debug, Clone)]
pub struct GluFactorization {
    t: Matrix,
    s: Matrix,
    core: Core,
    algo: Algorithm,
    left: Option<SketchDescriptor>,
    right: SketchDescriptor,
    selected_rows: Option<Vec<usize>>,
    dims: FactorDims,
}

impl GluFactorization {
    pub fn t(&self) -> &Matrix {
        &self.t
    }
    pub fn s(&self) -> &Matrix {
        &self.s
    }
    pub fn algo(&self) -> Algorithm {
        self.algo
    }
    pub fn dims(&self) -> FactorDims {
        self.dims
    }
    pub fn left_sketch(&self) -> Option<&SketchDescriptor> {
        self.left.as_ref()
    }
    pub fn right_sketch(&self) -> &SketchDescriptor {
        &self.right
    }
    /// Rows chosen by PRR_RLU.
    pub fn selected_rows(&self) -> Option<&[usize]> {
        self.selected_rows.as_deref()
    }

    /// `U1 A V1` for RLU and CW.
    pub fn mid(&self) -> Option<&Matrix> {
        match &self.core {
            Core::Identity => None,
            Core::Solve { mid, .. } => Some(mid),
            Core::Multiply { ahat, .. } => Some(ahat),
        }
    }

    /// Middle factor folded into `S`: `core * S`.
    fn core_times(&self, b: &Matrix) -> Matrix {
        match &self.core {
            Core::Identity => b.clone(),
            Core::Solve { lu, .. } => lu.solve(b).expect("mid checked invertible"),
            Core::Multiply { mid, .. } => mid * b,
        }
    }

    pub fn reconstruct(&self) -> Matrix {
        &self.t * self.core_times(&self.s)
    }

    /// `A_k x` in `O((m + n) l')` without forming `A_k`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dims.n {
            return Err(dim_err(
                "apply",
                format!("vector length {} vs {} columns", x.len(), self.dims.n),
            ));
        }
        let sx = &self.s * nalgebra::DVector::from_column_slice(x);
        let y = self.core_times(&Matrix::from_column_slice(sx.len(), 1, sx.as_slice()));
        Ok((&self.t * y).column(0).iter().copied().collect())
    }
}

fn check_left(u1: &SketchOperator, m: usize, out: usize, what: &'static str) -> Result<()> {
    if u1.in_dim() != m || u1.out_dim() != out {
        return Err(dim_err(
            what,
            format!(
                "U1 must be {out}x{m}, got {}x{}",
                u1.out_dim(),
                u1.in_dim()
            ),
        ));
    }
    Ok(())
}

fn check_right(v1: &SketchOperator, n: usize, l: usize, what: &'static str) -> Result<()> {
    if v1.in_dim() != n || v1.out_dim() != l {
        return Err(dim_err(
            what,
            format!(
                "V1 must be {n}x{l}, got {}x{}",
                v1.in_dim(),
                v1.out_dim()
            ),
        ));
    }
    Ok(())
}

/// Fails unless `sigma_min > max(rows, cols) * eps * sigma_max`.
fn require_full_rank(sigma: &[f64], rows: usize, cols: usize, what: &'static str) -> Result<()> {
    let smax = sigma.first().copied().unwrap_or(0.0);
    let smin = sigma.last().copied().unwrap_or(0.0);
    let tol = default_tol(rows, cols, smax);
    if sigma.len() < rows.min(cols) || smin <= tol || smax == 0.0 {
        return Err(Error::RankDeficient {
            what,
            sigma_min: smin,
            tol,
        });
    }
    Ok(())
}

/// Generalized LU: `T = U1^+ (I - Ahat Ahat^+) + (A V1) Ahat^+`, `S = U1 A`
/// with `Ahat = U1 A V1` of full column rank.
pub fn glu(
    a: &Matrix,
    dims: &SketchDims,
    u1: &SketchOperator,
    v1: &SketchOperator,
) -> Result<GluFactorization> {
    let (m, n) = a.shape();
    check_left(u1, m, dims.lp, "glu")?;
    check_right(v1, n, dims.l, "glu")?;
    let av = v1.apply_right(a)?;
    let s = u1.apply_left(a)?;
    let ahat = u1.apply_left(&av)?;
    let dec = linalg::svd(&ahat, true)?;
    require_full_rank(&dec.sigma, dims.lp, dims.l, "U1 A V1")?;
    let mut ahat_pinv = dec.v.clone();
    for (j, sv) in dec.sigma.iter().enumerate() {
        ahat_pinv.column_mut(j).scale_mut(1.0 / sv);
    }
    let ahat_pinv = ahat_pinv * dec.u.transpose();
    let proj = Matrix::identity(dims.lp, dims.lp) - &dec.u * dec.u.transpose();
    let t = u1.pinv_apply(&proj)? + &av * &ahat_pinv;
    Ok(GluFactorization {
        t,
        s,
        core: Core::Identity,
        algo: Algorithm::Glu,
        left: Some(u1.descriptor()),
        right: v1.descriptor(),
        selected_rows: None,
        dims: FactorDims {
            m,
            n,
            k: dims.k,
            l: dims.l,
            lp: dims.lp,
        },
    })
}

/// Randomized LU: `A_k = (A V1) (U1 A V1)^{-1} (U1 A)` with square `l x l` core.
pub fn rlu(
    a: &Matrix,
    l: usize,
    u1: &SketchOperator,
    v1: &SketchOperator,
) -> Result<GluFactorization> {
    let (m, n) = a.shape();
    check_left(u1, m, l, "rlu")?;
    check_right(v1, n, l, "rlu")?;
    let av = v1.apply_right(a)?;
    let s = u1.apply_left(a)?;
    let ahat = u1.apply_left(&av)?;
    require_full_rank(&linalg::singular_values(&ahat)?, l, l, "U1 A V1")?;
    let lu = ahat.clone().lu();
    Ok(GluFactorization {
        t: av,
        s,
        core: Core::Solve { mid: ahat, lu },
        algo: Algorithm::Rlu,
        left: Some(u1.descriptor()),
        right: v1.descriptor(),
        selected_rows: None,
        dims: FactorDims {
            m,
            n,
            k: l,
            l,
            lp: l,
        },
    })
}

fn sketched_columns(a: &Matrix, l: usize, v1: &SketchOperator, what: &'static str) -> Result<Matrix> {
    let (m, n) = a.shape();
    check_right(v1, n, l, what)?;
    if l > m {
        return Err(dim_err(what, format!("l = {l} exceeds {m} rows")));
    }
    let av = v1.apply_right(a)?;
    require_full_rank(&linalg::singular_values(&av)?, m, l, "A V1")?;
    Ok(av)
}

/// Randomized QR: `T = Q` from the thin QR of `A V1`, `S = Q^T A`.
pub fn rqr(a: &Matrix, l: usize, v1: &SketchOperator) -> Result<GluFactorization> {
    let (m, n) = a.shape();
    let av = sketched_columns(a, l, v1, "rqr")?;
    let q = linalg::thin_qr(&av)?.q;
    let s = q.tr_mul(a);
    Ok(GluFactorization {
        t: q,
        s,
        core: Core::Identity,
        algo: Algorithm::Rqr,
        left: None,
        right: v1.descriptor(),
        selected_rows: None,
        dims: FactorDims {
            m,
            n,
            k: l,
            l,
            lp: l,
        },
    })
}

/// Bound on `|(Qbar21 Qbar11^{-1})_{ij}|` enforced by [`row_select`].
pub const ROW_SELECT_F: f64 = 2.0;

/// `Q Qbar11^{-1}` where `Qbar11` holds the rows `idx` of `Q`.
fn interpolation_matrix(q: &Matrix, idx: &[usize]) -> Result<Matrix> {
    let l = q.ncols();
    let q11 = Matrix::from_fn(l, l, |i, j| q[(idx[i], j)]);
    let lu = q11.transpose().lu();
    // (Q Q11^{-1})^T = Q11^{-T} Q^T
    let bt = lu
        .solve(&q.transpose())
        .ok_or_else(|| Error::Selection("selected block is singular".into()))?;
    Ok(bt.transpose())
}

/// `||Qbar21 Qbar11^{-1}||_max` for the selection `idx`.
pub fn selection_max_ratio(q: &Matrix, idx: &[usize]) -> Result<f64> {
    let b = interpolation_matrix(q, idx)?;
    let mut chosen = vec![false; q.nrows()];
    idx.iter().for_each(|&i| chosen[i] = true);
    let mut best = 0.0_f64;
    for i in (0..q.nrows()).filter(|&i| !chosen[i]) {
        for j in 0..q.ncols() {
            best = best.max(b[(i, j)].abs());
        }
    }
    Ok(best)
}

/// Chooses `l` rows of the `m x l` matrix `Q` so that
/// `||Qbar21 Qbar11^{-1}||_max <= 2`: column-pivoted QR on `Q^T` followed
/// by determinant-increasing row swaps. Returns sorted row indices.
pub fn row_select(q: &Matrix) -> Result<Vec<usize>> {
    let (m, l) = q.shape();
    if l == 0 || l > m {
        return Err(dim_err("row_select", format!("need 1 <= l <= m, got {m}x{l}")));
    }
    // greedy pivoting on the rows of Q (columns of Q^T), modified Gram-Schmidt
    let mut w = q.transpose();
    let mut chosen = vec![false; m];
    let mut idx = Vec::with_capacity(l);
    let scale = q.norm();
    for _ in 0..l {
        let mut best = None;
        let mut best_norm = 0.0;
        for c in (0..m).filter(|&c| !chosen[c]) {
            let nrm = w.column(c).norm();
            if nrm > best_norm {
                best_norm = nrm;
                best = Some(c);
            }
        }
        let Some(p) = best else {
            return Err(Error::Selection("Q is rank deficient".into()));
        };
        if best_norm <= f64::EPSILON * scale * m as f64 {
            return Err(Error::Selection("Q is rank deficient".into()));
        }
        chosen[p] = true;
        idx.push(p);
        let u = w.column(p) / best_norm;
        for c in (0..m).filter(|&c| !chosen[c]) {
            let d = u.dot(&w.column(c));
            w.column_mut(c).axpy(-d, &u, 1.0);
        }
    }
    let max_swaps = m * l;
    let mut swaps = 0;
    loop {
        let b = interpolation_matrix(q, &idx)?;
        let mut worst = (0.0_f64, 0, 0);
        for i in (0..m).filter(|&i| !chosen[i]) {
            for j in 0..l {
                let v = b[(i, j)].abs();
                if v > worst.0 {
                    worst = (v, i, j);
                }
            }
        }
        if worst.0 <= ROW_SELECT_F {
            break;
        }
        if swaps >= max_swaps {
            return Err(Error::Selection(format!(
                "no bounded selection after {swaps} swaps (max ratio {:e})",
                worst.0
            )));
        }
        let (_, i, j) = worst;
        chosen[idx[j]] = false;
        chosen[i] = true;
        idx[j] = i;
        swaps += 1;
    }
    idx.sort_unstable();
    Ok(idx)
}

/// Panel rank-revealing RLU: `T = A V1 (P1 A V1)^{-1}`, `S = P1 A` with
/// `P1` chosen by [`row_select`] on the thin QR factor of `A V1`.
pub fn prr_rlu(a: &Matrix, l: usize, v1: &SketchOperator) -> Result<GluFactorization> {
    let (m, n) = a.shape();
    let av = sketched_columns(a, l, v1, "prr_rlu")?;
    let q = linalg::thin_qr(&av)?.q;
    let idx = row_select(&q)?;
    let t = interpolation_matrix(&q, &idx)?;
    let s = Matrix::from_fn(l, n, |i, j| a[(idx[i], j)]);
    Ok(GluFactorization {
        t,
        s,
        core: Core::Identity,
        algo: Algorithm::PrrRlu,
        left: None,
        right: v1.descriptor(),
        selected_rows: Some(idx),
        dims: FactorDims {
            m,
            n,
            k: l,
            l,
            lp: l,
        },
    })
}

/// Clarkson-Woodruff: `A_k' = (A V1) (U1 A V1)^+ (U1 A)`.
pub fn cw(
    a: &Matrix,
    dims: &SketchDims,
    u1: &SketchOperator,
    v1: &SketchOperator,
) -> Result<GluFactorization> {
    let (m, n) = a.shape();
    check_left(u1, m, dims.lp, "cw")?;
    check_right(v1, n, dims.l, "cw")?;
    let av = v1.apply_right(a)?;
    let s = u1.apply_left(a)?;
    let ahat = u1.apply_left(&av)?;
    let mid = linalg::pinv(&ahat, None)?;
    Ok(GluFactorization {
        t: av,
        s,
        core: Core::Multiply { mid, ahat },
        algo: Algorithm::Cw,
        left: Some(u1.descriptor()),
        right: v1.descriptor(),
        selected_rows: None,
        dims: FactorDims {
            m,
            n,
            k: dims.k,
            l: dims.l,
            lp: dims.lp,
        },
    })
}

/// Draws the sketches for `algo` from `seed` and runs it. Left sketches use
/// stream 1 and right sketches stream 2 of `seed`. RLU, RQR and PRR_RLU
/// use `l` only.
pub fn factorize(
    a: &Matrix,
    algo: Algorithm,
    dims: &SketchDims,
    left: SketchKind,
    right: SketchKind,
    seed: u64,
) -> Result<GluFactorization> {
    let (m, n) = a.shape();
    if dims.l > m.min(n) || dims.lp > m {
        return Err(dim_err(
            "factorize",
            format!("l = {}, lp = {} do not fit a {m}x{n} matrix", dims.l, dims.lp),
        ));
    }
    let v1 = SketchOperator::new(right, n, dims.l, derive_seed(seed, 0, 2))?;
    let left_op = |out| SketchOperator::new(left, m, out, derive_seed(seed, 0, 1));
    let mut f = match algo {
        Algorithm::Glu => glu(a, dims, &left_op(dims.lp)?, &v1)?,
        Algorithm::Cw => cw(a, dims, &left_op(dims.lp)?, &v1)?,
        Algorithm::Rlu => rlu(a, dims.l, &left_op(dims.l)?, &v1)?,
        Algorithm::Rqr => rqr(a, dims.l, &v1)?,
        Algorithm::PrrRlu => prr_rlu(a, dims.l, &v1)?,
    };
    f.dims.k = dims.k;
    Ok(f)
}
