//! Dense kernels: Householder QR, SVD, pseudo-inverse, truncated SVD and the
//! generalized (rectangular) Schur complement.
//!
//! Matrices are `nalgebra::DMatrix<f64>`, stored column-major. Every routine
//! here is a pure function of its input and deterministic for a fixed input.

use nalgebra::{DMatrix, SVD};

use crate::error::{dim_err, Error, Result};

pub type Matrix = DMatrix<f64>;

/// Iteration cap handed to the bidiagonal SVD; exceeding it is reported.
const SVD_MAX_ITER_PER_DIM: usize = 200;

/// Builds a matrix from column-major data, rejecting NaN/Inf.
pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Matrix> {
    if data.len() != rows * cols {
        return Err(dim_err(
            "from_col_major",
            format!("{rows}x{cols} needs {} entries, got {}", rows * cols, data.len()),
        ));
    }
    let m = Matrix::from_vec(rows, cols, data);
    check_finite(&m)?;
    Ok(m)
}

pub fn check_finite(a: &Matrix) -> Result<()> {
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}

/// Copy of the `nr x nc` block starting at `(r0, c0)`.
pub fn block(a: &Matrix, r0: usize, c0: usize, nr: usize, nc: usize) -> Matrix {
    a.view((r0, c0), (nr, nc)).into_owned()
}

/// Default pseudo-inverse / rank cutoff: `max(rows, cols) * eps * sigma_max`.
pub fn default_tol(rows: usize, cols: usize, sigma_max: f64) -> f64 {
    rows.max(cols) as f64 * f64::EPSILON * sigma_max
}

#[derive(Debug, Clone)]
pub struct QrResult {
    pub q: Matrix,
    pub r: Matrix,
    pub thin: bool,
}

/// Householder reflectors for `a`, applied in place. Returns the unit
/// reflector vectors (stored full length, zero above the pivot row) and
/// leaves the upper trapezoidal factor in `a`.
fn householder(a: &mut Matrix) -> Vec<Option<Vec<f64>>> {
    let (m, n) = a.shape();
    let steps = m.min(n);
    let mut reflectors = Vec::with_capacity(steps);
    for j in 0..steps {
        let norm = (j..m).map(|i| a[(i, j)] * a[(i, j)]).sum::<f64>().sqrt();
        let below = (j + 1..m).map(|i| a[(i, j)].abs()).fold(0.0, f64::max);
        if norm == 0.0 || below == 0.0 {
            // column already reduced
            for i in j + 1..m {
                a[(i, j)] = 0.0;
            }
            reflectors.push(None);
            continue;
        }
        let x0 = a[(j, j)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let mut v = vec![0.0; m];
        v[j] = x0 - alpha;
        for i in j + 1..m {
            v[i] = a[(i, j)];
        }
        let vnorm = v[j..].iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in v[j..].iter_mut() {
            *x /= vnorm;
        }
        a[(j, j)] = alpha;
        for i in j + 1..m {
            a[(i, j)] = 0.0;
        }
        for c in j + 1..n {
            let col = a.column(c);
            let dot: f64 = (j..m).map(|i| v[i] * col[i]).sum();
            if dot != 0.0 {
                let mut col = a.column_mut(c);
                for i in j..m {
                    col[i] -= 2.0 * dot * v[i];
                }
            }
        }
        reflectors.push(Some(v));
    }
    reflectors
}

/// Accumulates `H_1 ... H_k` applied to the first `width` columns of `I_m`.
fn form_q(m: usize, width: usize, reflectors: &[Option<Vec<f64>>]) -> Matrix {
    let mut q = Matrix::identity(m, width);
    for (j, v) in reflectors.iter().enumerate().rev() {
        let Some(v) = v else { continue };
        for c in 0..width {
            let col = q.column(c);
            let dot: f64 = (j..m).map(|i| v[i] * col[i]).sum();
            if dot != 0.0 {
                let mut col = q.column_mut(c);
                for i in j..m {
                    col[i] -= 2.0 * dot * v[i];
                }
            }
        }
    }
    q
}

fn qr_impl(a: &Matrix, full: bool) -> QrResult {
    let (m, n) = a.shape();
    let mut r = a.clone();
    let reflectors = householder(&mut r);
    let width = if full { m } else { n.min(m) };
    let mut q = form_q(m, width, &reflectors);
    let r = if full { r } else { r.rows(0, n.min(m)).into_owned() };
    let mut r = r;
    for i in 0..m.min(n) {
        if r[(i, i)] < 0.0 {
            r.row_mut(i).neg_mut();
            q.column_mut(i).neg_mut();
        }
    }
    QrResult { q, r, thin: !full }
}

/// Thin QR of a tall matrix: `Q` is `m x n` with orthonormal columns and `R`
/// is `n x n` upper triangular with a nonnegative diagonal.
pub fn thin_qr(a: &Matrix) -> Result<QrResult> {
    if a.nrows() < a.ncols() {
        return Err(dim_err(
            "thin_qr",
            format!("needs rows >= cols, got {}x{}", a.nrows(), a.ncols()),
        ));
    }
    check_finite(a)?;
    Ok(qr_impl(a, false))
}

/// Square QR: `Q` is `m x m` orthogonal, `R` is `m x n` upper trapezoidal.
pub fn full_qr(a: &Matrix) -> Result<QrResult> {
    check_finite(a)?;
    Ok(qr_impl(a, true))
}

#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: Matrix,
    /// Descending, nonnegative.
    pub sigma: Vec<f64>,
    pub v: Matrix,
    pub thin: bool,
}

impl SvdResult {
    /// `U diag(sigma) V^T` with the rectangular middle factor for full results.
    pub fn recompose(&self) -> Matrix {
        let r = self.sigma.len();
        let mut us = self.u.columns(0, r).into_owned();
        for (j, s) in self.sigma.iter().enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.columns(0, r).transpose()
    }
}

fn svd_max_iter(a: &Matrix) -> usize {
    SVD_MAX_ITER_PER_DIM * a.nrows().max(a.ncols()).max(1)
}

const JACOBI_SWEEPS: usize = 80;

fn rotate_cols(a: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    for i in 0..a.nrows() {
        let x = a[(i, p)];
        let y = a[(i, q)];
        a[(i, p)] = c * x - s * y;
        a[(i, q)] = s * x + c * y;
    }
}

/// One-sided (Hestenes) Jacobi SVD of a matrix with `rows >= cols`.
fn jacobi_tall(a: &Matrix) -> Result<(Matrix, Vec<f64>, Matrix)> {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut v = Matrix::identity(n, n);
    // columns this small are numerically zero and are not rotated
    let dead = f64::EPSILON * a.norm();
    let mut converged = n < 2;
    for _ in 0..JACOBI_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (w.column(p), w.column(q));
                    (cp.norm_squared(), cq.norm_squared(), cp.dot(&cq))
                };
                let (na, nb) = (alpha.sqrt(), beta.sqrt());
                if na <= dead || nb <= dead || gamma.abs() <= f64::EPSILON * na * nb {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_cols(&mut w, p, q, c, s);
                rotate_cols(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::Convergence { iterations: JACOBI_SWEEPS });
    }
    let norms: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));
    let sigma: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let mut u = Matrix::zeros(m, n);
    let mut vs = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vs.set_column(dst, &v.column(src));
        if norms[src] > dead {
            u.set_column(dst, &(w.column(src) / norms[src]));
        }
    }
    let live = sigma.iter().filter(|s| **s > dead).count();
    if live < n {
        let full = complete_basis(&u.columns(0, live).into_owned());
        u.columns_mut(live, n - live).copy_from(&full.columns(live, n - live));
    }
    Ok((u, sigma, vs))
}

/// Thin SVD by one-sided Jacobi; slower than the bidiagonal method but
/// reliable on rank-deficient input.
pub fn jacobi_svd(a: &Matrix) -> Result<SvdResult> {
    check_finite(a)?;
    let (u, sigma, v) = if a.nrows() >= a.ncols() {
        jacobi_tall(a)?
    } else {
        let (v, sigma, u) = jacobi_tall(&a.transpose())?;
        (u, sigma, v)
    };
    Ok(SvdResult { u, sigma, v, thin: true })
}

/// The bidiagonal SVD occasionally returns inconsistent factors on
/// rank-deficient input; such results are rejected here.
fn factors_consistent(a: &Matrix, d: &SvdResult) -> bool {
    let (m, n) = a.shape();
    let r = m.min(n);
    let tol = 64.0 * f64::EPSILON * m.max(n) as f64;
    let ortho = |q: &Matrix| (q.tr_mul(q) - Matrix::identity(r, r)).amax() <= tol;
    d.sigma.iter().all(|s| s.is_finite() && *s >= 0.0)
        && d.sigma.windows(2).all(|w| w[0] >= w[1])
        && ortho(&d.u)
        && ortho(&d.v)
        && (d.recompose() - a).norm() <= tol * a.norm()
}

fn complete_basis(u: &Matrix) -> Matrix {
    let (m, r) = u.shape();
    if r == m {
        return u.clone();
    }
    let q = qr_impl(u, true).q;
    let mut out = Matrix::zeros(m, m);
    out.columns_mut(0, r).copy_from(u);
    out.columns_mut(r, m - r).copy_from(&q.columns(r, m - r));
    out
}

/// Singular value decomposition. The thin variant returns `U: m x r`,
/// `V: n x r` with `r = min(m, n)`; the full variant completes both to
/// square orthogonal factors.
pub fn svd(a: &Matrix, thin: bool) -> Result<SvdResult> {
    check_finite(a)?;
    let (m, n) = a.shape();
    let r = m.min(n);
    let dec = if r == 0 {
        SvdResult { u: Matrix::zeros(m, 0), sigma: Vec::new(), v: Matrix::zeros(n, 0), thin: true }
    } else {
        let iters = svd_max_iter(a);
        let fast = SVD::try_new(a.clone(), true, true, f64::EPSILON, iters).map(|d| SvdResult {
            u: d.u.expect("u requested"),
            sigma: d.singular_values.iter().copied().collect(),
            v: d.v_t.expect("v requested").transpose(),
            thin: true,
        });
        match fast {
            Some(d) if factors_consistent(a, &d) => d,
            _ => jacobi_svd(a)?,
        }
    };
    if thin {
        Ok(dec)
    } else {
        Ok(SvdResult {
            u: complete_basis(&dec.u),
            sigma: dec.sigma,
            v: complete_basis(&dec.v),
            thin,
        })
    }
}

/// Singular values only, descending.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    check_finite(a)?;
    if a.nrows().min(a.ncols()) == 0 {
        return Ok(Vec::new());
    }
    let iters = svd_max_iter(a);
    let dec = SVD::try_new(a.clone(), false, false, f64::EPSILON, iters)
        .ok_or(Error::Convergence { iterations: iters })?;
    Ok(dec.singular_values.iter().copied().collect())
}

/// `sigma_j` with 1-based `j`; zero past the last singular value.
pub fn sigma_at(sigma: &[f64], j: usize) -> f64 {
    if j == 0 {
        return f64::INFINITY;
    }
    sigma.get(j - 1).copied().unwrap_or(0.0)
}

pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn frobenius_norm(a: &Matrix) -> f64 {
    a.norm()
}

/// Moore-Penrose pseudo-inverse via SVD. Singular values `<= tol` are
/// treated as zero; `None` selects [`default_tol`].
pub fn pinv(a: &Matrix, tol: Option<f64>) -> Result<Matrix> {
    let (m, n) = a.shape();
    let dec = svd(a, true)?;
    let smax = dec.sigma.first().copied().unwrap_or(0.0);
    let tol = tol.unwrap_or_else(|| default_tol(m, n, smax));
    if tol < 0.0 {
        return Err(Error::InvalidParameter(format!("pinv tolerance {tol} < 0")));
    }
    let mut vs = dec.v.clone();
    for (j, s) in dec.sigma.iter().enumerate() {
        let inv = if *s > tol { 1.0 / s } else { 0.0 };
        vs.column_mut(j).scale_mut(inv);
    }
    Ok(vs * dec.u.transpose())
}

/// Optimal rank-`k` approximation `A_opt,k`.
pub fn truncated_svd(a: &Matrix, k: usize) -> Result<Matrix> {
    let (m, n) = a.shape();
    if k > m.min(n) {
        return Err(Error::RankOutOfRange { k, max: m.min(n) });
    }
    if k == 0 {
        return Ok(Matrix::zeros(m, n));
    }
    let dec = svd(a, true)?;
    let mut uk = dec.u.columns(0, k).into_owned();
    for j in 0..k {
        uk.column_mut(j).scale_mut(dec.sigma[j]);
    }
    Ok(uk * dec.v.columns(0, k).transpose())
}

/// `A22 - A21 A11^+ A12` without rank checks; blocks may be empty.
pub(crate) fn schur_unchecked(a: &Matrix, lp: usize, l: usize) -> Result<Matrix> {
    let (m, n) = a.shape();
    let a11 = block(a, 0, 0, lp, l);
    let a12 = block(a, 0, l, lp, n - l);
    let a21 = block(a, lp, 0, m - lp, l);
    let a22 = block(a, lp, l, m - lp, n - l);
    Ok(a22 - a21 * pinv(&a11, None)? * a12)
}

/// Generalized Schur complement of the leading `lp x l` block, which must
/// have full column rank.
pub fn generalized_schur_complement(a: &Matrix, lp: usize, l: usize) -> Result<Matrix> {
    let (m, n) = a.shape();
    if l == 0 || lp < l || lp >= m || l >= n {
        return Err(dim_err(
            "generalized_schur_complement",
            format!("need 1 <= l <= lp, lp < rows, l < cols; got lp={lp}, l={l}, A is {m}x{n}"),
        ));
    }
    let sv = singular_values(&block(a, 0, 0, lp, l))?;
    let smin = *sv.last().unwrap();
    let tol = default_tol(lp, l, sv[0]);
    if smin <= tol {
        return Err(Error::RankDeficient {
            what: "A11",
            sigma_min: smin,
            tol,
        });
    }
    schur_unchecked(a, lp, l)
}
