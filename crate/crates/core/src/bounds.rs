//! Numerical checks of the deterministic identities and inequalities that
//! govern GLU and randomized QR, plus the gamma quality metrics.
//!
//! Every inequality report is oriented as `lhs <= rhs`.

use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::factor;
use crate::linalg::{self, block, schur_unchecked, sigma_at, Matrix};
use crate::rng::{gaussian_matrix, Rng64};
use crate::sketch::{SketchDims, SketchOperator};

/// Relative tolerance for inequalities.
pub const INEQ_TOL: f64 = 1e-8;
/// Relative tolerance for exact identities.
pub const EQ_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Inequality,
    Equality,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`
    pub slack: f64,
    pub scale: f64,
    pub tol: f64,
    pub kind: BoundKind,
    /// Outside the index range where the bound is asserted; reported only.
    pub informational: bool,
}

impl BoundReport {
    /// `lhs <= rhs` up to `tol * scale`, with `scale >= max(|lhs|, |rhs|)`.
    pub fn inequality(name: impl Into<String>, lhs: f64, rhs: f64, proxy: f64, tol: f64) -> Self {
        Self::build(name.into(), lhs, rhs, proxy, tol, BoundKind::Inequality)
    }

    /// `lhs == rhs` up to `tol * scale`.
    pub fn equality(name: impl Into<String>, lhs: f64, rhs: f64, proxy: f64, tol: f64) -> Self {
        Self::build(name.into(), lhs, rhs, proxy, tol, BoundKind::Equality)
    }

    fn build(name: String, lhs: f64, rhs: f64, proxy: f64, tol: f64, kind: BoundKind) -> Self {
        BoundReport {
            name,
            lhs,
            rhs,
            slack: rhs - lhs,
            scale: lhs.abs().max(rhs.abs()).max(proxy.abs()),
            tol,
            kind,
            informational: false,
        }
    }

    fn info(mut self, flag: bool) -> Self {
        self.informational = flag;
        self
    }

    pub fn holds(&self) -> bool {
        let margin = self.tol * self.scale;
        match self.kind {
            BoundKind::Inequality => self.slack >= -margin,
            BoundKind::Equality => self.slack.abs() <= margin,
        }
    }
}

/// True when every asserted (non-informational) report holds.
pub fn all_hold(reports: &[BoundReport]) -> bool {
    reports.iter().filter(|r| !r.informational).all(BoundReport::holds)
}

fn fro2(a: &Matrix) -> f64 {
    a.norm_squared()
}

fn spec2(a: &Matrix) -> Result<f64> {
    Ok(linalg::spectral_norm(a)?.powi(2))
}

/// `sum_{i >= j} sigma_i^2`, the squared Frobenius distance to the best
/// rank `j - 1` approximation.
fn tail2(sigma: &[f64], j: usize) -> f64 {
    sigma.iter().skip(j - 1).map(|s| s * s).sum()
}

/// `M - M_opt,r`, clamping `r` to the rank range of `M`.
fn minus_truncation(m: &Matrix, r: usize) -> Result<Matrix> {
    let r = r.min(m.nrows().min(m.ncols()));
    Ok(m - linalg::truncated_svd(m, r)?)
}

/// `B^{-1}` applied on the right: `A B^{-1}` for square invertible `B`.
fn right_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let sol = b
        .transpose()
        .lu()
        .solve(&a.transpose())
        .ok_or(Error::RankDeficient {
            what: "triangular factor",
            sigma_min: 0.0,
            tol: 0.0,
        })?;
    Ok(sol.transpose())
}

/// Square completions `U = L' U'` and `V = V' R'` of the sketches.
#[derive(Debug, Clone)]
pub struct SquareExtension {
    /// `m x m`, leading `l'` rows equal to `U1`.
    pub u: Matrix,
    /// `n x n`, leading `l` columns equal to `V1`.
    pub v: Matrix,
    /// `l' x l'` lower triangular.
    pub l11: Matrix,
    /// `l x l` upper triangular.
    pub r11: Matrix,
    /// Orthogonal with `U1 = L'11 U'[:l', :]`.
    pub u_prime: Matrix,
    /// Orthogonal with `V1 = V'[:, :l] R'11`.
    pub v_prime: Matrix,
}

fn require_full_rank(a: &Matrix, what: &'static str) -> Result<()> {
    let sv = linalg::singular_values(a)?;
    let smax = sv.first().copied().unwrap_or(0.0);
    let smin = sv.last().copied().unwrap_or(0.0);
    let tol = linalg::default_tol(a.nrows(), a.ncols(), smax);
    if smin <= tol || smax == 0.0 {
        return Err(Error::RankDeficient {
            what,
            sigma_min: smin,
            tol,
        });
    }
    Ok(())
}

/// Orthogonal completion of the tall full-column-rank `w`:
/// `w = Q[:, :c] R11` with `Q` square orthogonal.
fn complete(w: &Matrix, what: &'static str) -> Result<(Matrix, Matrix)> {
    require_full_rank(w, what)?;
    let qr = linalg::full_qr(w)?;
    let c = w.ncols();
    Ok((qr.q, qr.r.rows(0, c).into_owned()))
}

fn extend_v(v1: &Matrix) -> Result<(Matrix, Matrix, Matrix)> {
    let (n, l) = v1.shape();
    if l > n {
        return Err(dim_err("extend_square", format!("V1 is {n}x{l}, needs n >= l")));
    }
    let (vp, r11) = complete(v1, "V1")?;
    let mut v = vp.clone();
    v.columns_mut(0, l).copy_from(v1);
    Ok((v, vp, r11))
}

pub fn extend_square(u1: &Matrix, v1: &Matrix) -> Result<SquareExtension> {
    let (lp, m) = u1.shape();
    if lp > m {
        return Err(dim_err("extend_square", format!("U1 is {lp}x{m}, needs m >= l'")));
    }
    let (qu, ru) = complete(&u1.transpose(), "U1")?;
    let u_prime = qu.transpose();
    let mut u = u_prime.clone();
    u.rows_mut(0, lp).copy_from(u1);
    let (v, v_prime, r11) = extend_v(v1)?;
    Ok(SquareExtension {
        u,
        v,
        l11: ru.transpose(),
        r11,
        u_prime,
        v_prime,
    })
}

fn check_j(j: usize, m: usize, n: usize, k: usize) -> Result<()> {
    if j == 0 || j + k > m.min(n) {
        return Err(Error::InvalidParameter(format!(
            "j = {j} outside 1..={} (min(m, n) - k)",
            m.min(n).saturating_sub(k)
        )));
    }
    Ok(())
}

/// Bounds on the GLU residual and the lower bound on the singular values of
/// `A_k`, for `U1: l' x m` and `V1: n x l`.
///
/// Reports `lu_frob`, `lu_spectral`, `lu_frob2:j=`, `lu_spectral2:j=` and,
/// for `i <= k`, `lu_sigma_lower:i=` (`sigma_i(R11 R'11^{-1}) <= sigma_i(A_k)`)
/// with the identity `lu_sigma_restricted:i=`
/// (`sigma_i(A_k V'_1) = sigma_i(R11 R'11^{-1})`). The `j`-indexed bounds are
/// asserted for `j <= min(m, n) - max(l, l')` and informational up to
/// `min(m, n) - k`.
pub fn verify_prop_lu(
    a: &Matrix,
    u1: &Matrix,
    v1: &Matrix,
    k: usize,
    j_list: &[usize],
) -> Result<Vec<BoundReport>> {
    let (m, n) = a.shape();
    let (lp, l) = (u1.nrows(), v1.ncols());
    if u1.ncols() != m || v1.nrows() != n {
        return Err(dim_err(
            "verify_prop_lu",
            format!("U1 {}x{}, V1 {}x{} vs A {m}x{n}", lp, u1.ncols(), v1.nrows(), l),
        ));
    }
    for &j in j_list {
        check_j(j, m, n, k)?;
    }
    let dims = SketchDims::new(k, l, lp)?;
    let ak = factor::glu(
        a,
        &dims,
        &SketchOperator::explicit(u1.clone())?,
        &SketchOperator::explicit_right(v1)?,
    )?
    .reconstruct();
    let ext = extend_square(u1, v1)?;
    let qr = linalg::full_qr(&(a * &ext.v))?;
    let x = &ext.u * &qr.q;
    let w = linalg::pinv(&block(&x, 0, 0, lp, l), None)? * block(&x, 0, l, lp, m - l);
    let r22 = block(&qr.r, l, l, m - l, n - l);

    let resid = a - &ak;
    let sv_res = linalg::singular_values(&resid)?;
    let a_fro2 = fro2(a);
    let a_sv = linalg::spectral_norm(a)?;
    let a_spec2 = a_sv * a_sv;

    let mut out = vec![
        BoundReport::inequality(
            "lu_frob",
            fro2(&resid),
            fro2(&r22) + fro2(&(&w * &r22)),
            a_fro2,
            INEQ_TOL,
        ),
        BoundReport::inequality(
            "lu_spectral",
            sigma_at(&sv_res, 1).powi(2),
            spec2(&r22)? + spec2(&(&w * &r22))?,
            a_spec2,
            INEQ_TOL,
        ),
    ];
    let narrow = m.min(n).saturating_sub(l.max(lp));
    for &j in j_list {
        let rj = minus_truncation(&r22, j - 1)?;
        let wr = &w * &rj;
        let informational = j > narrow;
        out.push(
            BoundReport::inequality(
                format!("lu_frob2:j={j}"),
                tail2(&sv_res, j),
                fro2(&rj) + fro2(&wr),
                a_fro2,
                INEQ_TOL,
            )
            .info(informational),
        );
        out.push(
            BoundReport::inequality(
                format!("lu_spectral2:j={j}"),
                sigma_at(&sv_res, j).powi(2),
                spec2(&rj)? + spec2(&wr)?,
                a_spec2,
                INEQ_TOL,
            )
            .info(informational),
        );
    }

    let restricted = right_solve(&block(&qr.r, 0, 0, l, l), &ext.r11)?;
    let sv_restricted = linalg::singular_values(&restricted)?;
    let sv_ak = linalg::singular_values(&ak)?;
    let sv_akv = linalg::singular_values(&(&ak * ext.v_prime.columns(0, l)))?;
    for i in 1..=k.min(l) {
        out.push(BoundReport::inequality(
            format!("lu_sigma_lower:i={i}"),
            sigma_at(&sv_restricted, i),
            sigma_at(&sv_ak, i),
            a_sv,
            INEQ_TOL,
        ));
        out.push(BoundReport::equality(
            format!("lu_sigma_restricted:i={i}"),
            sigma_at(&sv_akv, i),
            sigma_at(&sv_restricted, i),
            a_sv,
            EQ_TOL,
        ));
    }
    Ok(out)
}

/// Bounds for randomized QR with right sketch `V1: n x l`.
///
/// Reports the identity `qr_resid_sv:j=` (`sigma_j(Q1 Q1^T A - A) =
/// sigma_j(R22)`, all `j <= min(m, n) - l`), `qr_frob`, `qr_spectral`,
/// `qr_r22_frob`, for each `j` in `j_list` the rotated-basis bounds
/// `qr_spectral2:j=`, `qr_frob2:j=` and their `R22` forms, and for `j <= k`
/// the chain `qr_sandwich_upper/middle/lower:j=`.
pub fn verify_prop_qr(a: &Matrix, v1: &Matrix, k: usize, j_list: &[usize]) -> Result<Vec<BoundReport>> {
    let (m, n) = a.shape();
    let l = v1.ncols();
    if v1.nrows() != n {
        return Err(dim_err("verify_prop_qr", format!("V1 has {} rows, A has {n} cols", v1.nrows())));
    }
    if k == 0 || k > l || l > m.min(n) {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= k <= l <= min(m, n), got k={k}, l={l}"
        )));
    }
    for &j in j_list {
        check_j(j, m, n, k)?;
    }
    let (v, v_prime, r11p) = extend_v(v1)?;
    let qr = linalg::full_qr(&(a * &v))?;
    let q1 = qr.q.columns(0, l).into_owned();
    let proj = &q1 * q1.tr_mul(a);
    let resid = &proj - a;
    let r22 = block(&qr.r, l, l, m - l, n - l);
    let sv_res = linalg::singular_values(&resid)?;
    let sv_r22 = linalg::singular_values(&r22)?;

    let dec = linalg::svd(a, false)?;
    let sigma = &dec.sigma;
    let a_sv = sigma_at(sigma, 1);
    let a_fro2 = fro2(a);
    let a_spec2 = a_sv * a_sv;

    let mut out = Vec::new();
    for j in 1..=m.min(n) - l {
        out.push(BoundReport::equality(
            format!("qr_resid_sv:j={j}"),
            sigma_at(&sv_res, j),
            sigma_at(&sv_r22, j),
            a_sv,
            EQ_TOL,
        ));
    }

    // Sigma_{j,2} (S~^T V)_21 (S~^T V)_11^+ with S~ the columns of S rotated
    // left by j - 1; j = 1 gives the unrotated form.
    let cross = |j: usize| -> Result<(Matrix, Matrix)> {
        let s_rot = Matrix::from_fn(n, n, |r, c| dec.v[(r, (c + j - 1) % n)]);
        let stv = s_rot.tr_mul(&v);
        let s11 = block(&stv, 0, 0, k, l);
        require_full_rank(&s11, "(S^T V)_11")?;
        let s21 = block(&stv, k, 0, n - k, l);
        let sig2 = Matrix::from_fn(m - k, n - k, |r, c| {
            if r == c {
                sigma_at(sigma, k + j + r)
            } else {
                0.0
            }
        });
        let c = &sig2 * s21 * linalg::pinv(&s11, None)?;
        Ok((sig2, c))
    };

    let (sig2, c) = cross(1)?;
    let frob_rhs = fro2(&sig2) + fro2(&c);
    out.push(BoundReport::inequality("qr_frob", fro2(&resid), frob_rhs, a_fro2, INEQ_TOL));
    out.push(BoundReport::inequality(
        "qr_spectral",
        sigma_at(&sv_res, 1).powi(2),
        sigma_at(sigma, k + 1).powi(2) + spec2(&c)?,
        a_spec2,
        INEQ_TOL,
    ));
    out.push(BoundReport::inequality("qr_r22_frob", fro2(&r22), frob_rhs, a_fro2, INEQ_TOL));

    let narrow = m.min(n) - l;
    for &j in j_list {
        let (sig2j, cj) = cross(j)?;
        let spec_rhs = sigma_at(sigma, j + k).powi(2) + spec2(&cj)?;
        let frob_rhs = fro2(&sig2j) + fro2(&cj);
        let informational = j > narrow;
        for (name, sv) in [("qr", &sv_res), ("qr_r22", &sv_r22)] {
            out.push(
                BoundReport::inequality(
                    format!("{name}_spectral2:j={j}"),
                    sigma_at(sv, j).powi(2),
                    spec_rhs,
                    a_spec2,
                    INEQ_TOL,
                )
                .info(informational),
            );
            out.push(
                BoundReport::inequality(
                    format!("{name}_frob2:j={j}"),
                    tail2(sv, j),
                    frob_rhs,
                    a_fro2,
                    INEQ_TOL,
                )
                .info(informational),
            );
        }
    }

    let sv_proj = linalg::singular_values(&proj)?;
    let restricted = right_solve(&block(&qr.r, 0, 0, l, l), &r11p)?;
    let sv_restricted = linalg::singular_values(&restricted)?;
    let stvp = dec.v.tr_mul(&v_prime);
    let smin = *linalg::singular_values(&block(&stvp, 0, 0, k, l))?
        .last()
        .unwrap_or(&0.0);
    for j in 1..=k {
        out.push(BoundReport::inequality(
            format!("qr_sandwich_upper:j={j}"),
            sigma_at(&sv_proj, j),
            sigma_at(sigma, j),
            a_sv,
            INEQ_TOL,
        ));
        out.push(BoundReport::inequality(
            format!("qr_sandwich_middle:j={j}"),
            sigma_at(&sv_restricted, j),
            sigma_at(&sv_proj, j),
            a_sv,
            INEQ_TOL,
        ));
        out.push(BoundReport::inequality(
            format!("qr_sandwich_lower:j={j}"),
            sigma_at(sigma, j) * smin,
            sigma_at(&sv_restricted, j),
            a_sv,
            INEQ_TOL,
        ));
    }
    Ok(out)
}

/// Residuals of the three Schur-complement identities relating
/// `Abar = U A V` to `X = U Q`, `[Q, R] = QR(A V)`. Each report has the
/// relative residual as `lhs` and the tolerance as `rhs`.
pub fn verify_basic_facts(a: &Matrix, u1: &Matrix, v1: &Matrix) -> Result<Vec<BoundReport>> {
    let (m, n) = a.shape();
    let (lp, l) = (u1.nrows(), v1.ncols());
    if u1.ncols() != m || v1.nrows() != n || l > lp {
        return Err(dim_err(
            "verify_basic_facts",
            format!("U1 {lp}x{}, V1 {}x{l} vs A {m}x{n}", u1.ncols(), v1.nrows()),
        ));
    }
    let ext = extend_square(u1, v1)?;
    let abar = &ext.u * a * &ext.v;
    let a11 = block(&abar, 0, 0, lp, l);
    require_full_rank(&a11, "Abar11")?;
    let qr = linalg::full_qr(&(a * &ext.v))?;
    let x = &ext.u * &qr.q;
    let x11 = block(&x, 0, 0, lp, l);
    let r11 = block(&qr.r, 0, 0, l, l);
    let r22 = block(&qr.r, l, l, m - l, n - l);
    let scale = abar.norm();

    let lhs9 = schur_unchecked(&abar, lp, l)?;
    let rhs9 = schur_unchecked(&x, lp, l)? * &r22;
    let rhs10 = &x11 * &r11;
    let lhs11 = block(&abar, lp, 0, m - lp, l) * linalg::pinv(&a11, None)?;
    let rhs11 = block(&x, lp, 0, m - lp, l) * linalg::pinv(&x11, None)?;
    let scale11 = lhs11.norm().max(rhs11.norm()).max(1.0);

    let rel = |d: Matrix, s: f64| if s > 0.0 { d.norm() / s } else { d.norm() };
    Ok(vec![
        BoundReport::inequality("schur_identity", rel(lhs9 - rhs9, scale), EQ_TOL, 0.0, 0.0),
        BoundReport::inequality("leading_block", rel(a11 - rhs10, scale), EQ_TOL, 0.0, 0.0),
        BoundReport::inequality("multiplier", rel(lhs11 - rhs11, scale11), EQ_TOL, 0.0, 0.0),
    ])
}

/// Frobenius Pythagoras relation between GLU (`A_k`) and CW (`A_k'`) on the
/// same sketches, the gap identity `||A_k - A_k'||_F = ||U1^+ B||_F` and the
/// spectral inequality.
pub fn compare_cw_glu(
    a: &Matrix,
    u1: &SketchOperator,
    v1: &SketchOperator,
    dims: &SketchDims,
) -> Result<[BoundReport; 3]> {
    let ak = factor::glu(a, dims, u1, v1)?.reconstruct();
    let akp = factor::cw(a, dims, u1, v1)?.reconstruct();
    let at = u1.apply_left(a)?;
    let atv = v1.apply_right(&at)?;
    let b = &at - &atv * (linalg::pinv(&atv, None)? * &at);
    let ub = u1.pinv_apply(&b)?;
    let a_fro2 = fro2(a);
    let a_spec2 = spec2(a)?;
    let res = fro2(&(a - &ak));
    let res_p = fro2(&(a - &akp));
    let gap = fro2(&(&ak - &akp));
    Ok([
        BoundReport::equality("cw_pythagoras", res_p, res + gap, a_fro2, INEQ_TOL),
        BoundReport::equality("cw_gap", gap, fro2(&ub), a_fro2, INEQ_TOL),
        BoundReport::inequality(
            "cw_spectral",
            spec2(&(a - &akp))?,
            spec2(&(a - &ak))? + spec2(&ub)?,
            a_spec2,
            INEQ_TOL,
        ),
    ])
}

#[derive(Debug, Clone, Serialize)]
pub struct GammaMetrics {
    /// `||A - A_k||_2 / sigma_{k+1}(A)`; `None` in the exact-recovery regime.
    pub gamma_lowrank: Option<f64>,
    /// `sigma_j(A) / sigma_j(A_k)` for `j <= k`; `None` where `sigma_j(A_k) = 0`.
    pub gamma_spectrum: Vec<Option<f64>>,
    /// `sigma_j(A - A_k) / sigma_{k+j}(A)` for `j <= min(m, n) - k`; `None`
    /// where `sigma_{k+j}(A)` is numerically zero.
    pub gamma_kernel: Vec<Option<f64>>,
    /// `sigma_{k+1}(A) <= max(m, n) * eps * sigma_1(A)`.
    pub exact_recovery: bool,
}

impl GammaMetrics {
    /// `min_{j <= k} sigma_j(A_k) / sigma_j(A)`, zero if any `sigma_j(A_k)` vanishes.
    pub fn spectrum_ratio_min(&self) -> f64 {
        self.gamma_spectrum
            .iter()
            .map(|g| g.map_or(0.0, |g| 1.0 / g))
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn gamma_metrics(a: &Matrix, ak: &Matrix, k: usize) -> Result<GammaMetrics> {
    let (m, n) = a.shape();
    if ak.shape() != (m, n) {
        return Err(dim_err("gamma_metrics", format!("A_k is {:?}, A is {m}x{n}", ak.shape())));
    }
    if k > m.min(n) {
        return Err(Error::RankOutOfRange { k, max: m.min(n) });
    }
    let sv_a = linalg::singular_values(a)?;
    let sv_ak = linalg::singular_values(ak)?;
    let sv_res = linalg::singular_values(&(a - ak))?;
    let zero = linalg::default_tol(m, n, sigma_at(&sv_a, 1));
    let gamma_kernel: Vec<Option<f64>> = (1..=m.min(n) - k)
        .map(|j| {
            let d = sigma_at(&sv_a, k + j);
            (d > zero).then(|| sigma_at(&sv_res, j) / d)
        })
        .collect();
    let gamma_spectrum = (1..=k)
        .map(|j| {
            let d = sigma_at(&sv_ak, j);
            (d > 0.0).then(|| sigma_at(&sv_a, j) / d)
        })
        .collect();
    Ok(GammaMetrics {
        gamma_lowrank: gamma_kernel.first().copied().flatten(),
        gamma_spectrum,
        gamma_kernel,
        exact_recovery: sigma_at(&sv_a, k + 1) <= zero,
    })
}

fn weyl_scale(a: &[f64], b: &[f64]) -> f64 {
    sigma_at(a, 1) * sigma_at(b, 1)
}

/// `sigma_j(AB) <= sigma_{j-k+1}(A) sigma_k(B)` for all `1 <= k <= j`.
pub fn weyl_multiplicative(a: &Matrix, b: &Matrix) -> Result<Vec<BoundReport>> {
    if a.ncols() != b.nrows() {
        return Err(dim_err("weyl_multiplicative", "inner dimensions differ"));
    }
    let (sa, sb) = (linalg::singular_values(a)?, linalg::singular_values(b)?);
    let sab = linalg::singular_values(&(a * b))?;
    let scale = weyl_scale(&sa, &sb);
    let mut out = Vec::new();
    for j in 1..=a.nrows().min(b.ncols()) {
        for k in 1..=j {
            out.push(BoundReport::inequality(
                format!("weyl_mult:j={j}:k={k}"),
                sigma_at(&sab, j),
                sigma_at(&sa, j - k + 1) * sigma_at(&sb, k),
                scale,
                EQ_TOL,
            ));
        }
    }
    Ok(out)
}

/// `sigma_{m-k+1}(A) sigma_{j+k-1}(B) <= sigma_j(AB)` for `A: m x n`,
/// `B: n x p`, `n >= m >= p`, both full rank, `im(B)` orthogonal to
/// `ker(A)`; `1 <= k <= m - j`, `j <= p`.
pub fn weyl_reversed(a: &Matrix, b: &Matrix) -> Result<Vec<BoundReport>> {
    let (m, n) = a.shape();
    let p = b.ncols();
    if b.nrows() != n {
        return Err(dim_err("weyl_reversed", "inner dimensions differ"));
    }
    if !(n >= m && m >= p) {
        return Err(Error::Hypothesis(format!("need n >= m >= p, got {m}, {n}, {p}")));
    }
    let (sa, sb) = (linalg::singular_values(a)?, linalg::singular_values(b)?);
    if sigma_at(&sa, m) <= linalg::default_tol(m, n, sa[0]) || sigma_at(&sb, p) <= linalg::default_tol(n, p, sb[0]) {
        return Err(Error::Hypothesis("A and B must have full rank".into()));
    }
    let leak = (b - linalg::pinv(a, None)? * (a * b)).norm();
    if leak > 1e-8 * b.norm() {
        return Err(Error::Hypothesis(format!(
            "image of B leaves ker(A)^perp by {leak:e}"
        )));
    }
    let sab = linalg::singular_values(&(a * b))?;
    let scale = weyl_scale(&sa, &sb);
    let mut out = Vec::new();
    for j in 1..=p {
        for k in 1..=m.saturating_sub(j) {
            out.push(BoundReport::inequality(
                format!("weyl_reversed:j={j}:k={k}"),
                sigma_at(&sa, m - k + 1) * sigma_at(&sb, j + k - 1),
                sigma_at(&sab, j),
                scale,
                EQ_TOL,
            ));
        }
    }
    Ok(out)
}

/// `sigma_j(A + B) <= sigma_{j-k+1}(A) + sigma_k(B)` for all `1 <= k <= j`.
pub fn weyl_additive(a: &Matrix, b: &Matrix) -> Result<Vec<BoundReport>> {
    if a.shape() != b.shape() {
        return Err(dim_err("weyl_additive", "shapes differ"));
    }
    let (sa, sb) = (linalg::singular_values(a)?, linalg::singular_values(b)?);
    let ssum = linalg::singular_values(&(a + b))?;
    let scale = sigma_at(&sa, 1) + sigma_at(&sb, 1);
    let mut out = Vec::new();
    for j in 1..=a.nrows().min(a.ncols()) {
        for k in 1..=j {
            out.push(BoundReport::inequality(
                format!("weyl_add:j={j}:k={k}"),
                sigma_at(&ssum, j),
                sigma_at(&sa, j - k + 1) + sigma_at(&sb, k),
                scale,
                EQ_TOL,
            ));
        }
    }
    Ok(out)
}

/// Random `(A, B)` meeting the reversed-Weyl hypothesis: `A` is a Gaussian
/// `m x n`, `B = A^T C` with Gaussian `C: m x p`.
pub fn reversed_weyl_instance(m: usize, n: usize, p: usize, rng: &mut Rng64) -> (Matrix, Matrix) {
    let a = gaussian_matrix(m, n, rng);
    let c = gaussian_matrix(m, p, rng);
    let b = a.transpose() * c;
    (a, b)
}
