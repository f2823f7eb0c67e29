//! l2 growth factors of Gaussian elimination without pivoting, the
//! random pre/post-conditioning experiment and the Haar-minor tail check.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{dim_err, Error, Result};
use crate::linalg::{self, Matrix};
use crate::rng::{gaussian_matrix, Rng64};
use crate::sketch::haar_columns;

/// Pivots below this multiple of `||Abar||_2` abort the elimination.
pub const TINY_PIVOT: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct GrowthResult {
    /// `max_p ||S_p(Abar)||_2 / ||Abar||_2`
    pub rho_u: f64,
    /// `max_p ||Abar21 Abar11^{-1}||_2`
    pub rho_l: f64,
    /// Indexed by `p = 0..n-1`; `p = 0` is the untouched matrix (ratio 1).
    pub per_step_u: Vec<f64>,
    /// Indexed by `p = 0..n-1`; `p = 0` has an empty multiplier block (0).
    pub per_step_l: Vec<f64>,
    pub min_pivot: f64,
}

/// Runs elimination without pivoting and records, for every leading block
/// size `p`, the spectral norms of the Schur complement `S_p` (relative to
/// `||Abar||_2`) and of `Abar21 Abar11^{-1} = L21 L11^{-1}`.
pub fn growth_factors(abar: &Matrix) -> Result<GrowthResult> {
    let n = abar.nrows();
    if abar.ncols() != n || n == 0 {
        return Err(dim_err("growth_factors", format!("need a square matrix, got {:?}", abar.shape())));
    }
    linalg::check_finite(abar)?;
    let norm = linalg::spectral_norm(abar)?;
    let mut work = abar.clone();
    let mut lower = Matrix::identity(n, n);
    let mut per_step_u = vec![1.0];
    let mut per_step_l = vec![0.0];
    let mut min_pivot = f64::INFINITY;
    for p in 1..n {
        let c = p - 1;
        let pivot = work[(c, c)];
        min_pivot = min_pivot.min(pivot.abs());
        if !(pivot.abs() >= TINY_PIVOT * norm) || norm == 0.0 {
            return Err(Error::TinyPivot { step: p, pivot });
        }
        for i in p..n {
            let f = work[(i, c)] / pivot;
            lower[(i, c)] = f;
            work[(i, c)] = 0.0;
            if f != 0.0 {
                for j in p..n {
                    work[(i, j)] -= f * work[(c, j)];
                }
            }
        }
        let schur = work.view((p, p), (n - p, n - p)).into_owned();
        per_step_u.push(linalg::spectral_norm(&schur)? / norm);
        // X L11 = L21  <=>  L11^T X^T = L21^T
        let l11t = lower.view((0, 0), (p, p)).transpose();
        let l21t = lower.view((p, 0), (n - p, p)).transpose();
        let xt = l11t
            .solve_upper_triangular(&l21t)
            .expect("unit triangular");
        per_step_l.push(linalg::spectral_norm(&xt)?);
    }
    if n == 1 {
        min_pivot = abar[(0, 0)].abs();
    }
    let rho_u = per_step_u.iter().copied().fold(0.0, f64::max);
    let rho_l = per_step_l.iter().copied().fold(0.0, f64::max);
    Ok(GrowthResult {
        rho_u,
        rho_l,
        per_step_u,
        per_step_l,
        min_pivot,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Ensemble {
    Haar,
    Gaussian,
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ensemble::Haar => "haar",
            Ensemble::Gaussian => "gaussian",
        })
    }
}

impl FromStr for Ensemble {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "haar" => Ok(Ensemble::Haar),
            "gaussian" => Ok(Ensemble::Gaussian),
            other => Err(Error::Parse(format!("unknown ensemble '{other}'"))),
        }
    }
}

fn draw_square(n: usize, ensemble: Ensemble, rng: &mut Rng64) -> Matrix {
    match ensemble {
        Ensemble::Haar => haar_columns(n, n, rng),
        Ensemble::Gaussian => gaussian_matrix(n, n, rng),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PreconditionStats {
    pub n: usize,
    pub ensemble: Ensemble,
    /// `log_n(max(rho_U, rho_L))` per trial; `None` for tiny-pivot failures.
    pub log_growth: Vec<Option<f64>>,
    pub mean: f64,
    pub median: f64,
    pub max: f64,
    pub failures: usize,
}

fn median(sorted: &[f64]) -> f64 {
    let len = sorted.len();
    if len == 0 {
        return f64::NAN;
    }
    if len % 2 == 1 {
        sorted[len / 2]
    } else {
        0.5 * (sorted[len / 2 - 1] + sorted[len / 2])
    }
}

/// Draws fresh `U`, `V` per trial, eliminates `U A V` without pivoting and
/// summarizes `log_n(max(rho_U, rho_L))`. Tiny pivots count as failures.
pub fn precondition_experiment(
    a: &Matrix,
    trials: usize,
    seed: u64,
    ensemble: Ensemble,
) -> Result<PreconditionStats> {
    let n = a.nrows();
    if a.ncols() != n || n < 4 {
        return Err(dim_err("precondition_experiment", format!("need square n >= 4, got {:?}", a.shape())));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    let results: Vec<Result<Option<f64>>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = Rng64::for_trial(seed, t as u64, 0);
            let u = draw_square(n, ensemble, &mut rng);
            let v = draw_square(n, ensemble, &mut rng);
            match growth_factors(&(u * a * v)) {
                Ok(g) => Ok(Some(g.rho_u.max(g.rho_l).ln() / (n as f64).ln())),
                Err(Error::TinyPivot { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let log_growth = results.into_iter().collect::<Result<Vec<_>>>()?;
    let mut ok: Vec<f64> = log_growth.iter().flatten().copied().collect();
    ok.sort_by(f64::total_cmp);
    let failures = trials - ok.len();
    let mean = if ok.is_empty() {
        f64::NAN
    } else {
        ok.iter().sum::<f64>() / ok.len() as f64
    };
    Ok(PreconditionStats {
        n,
        ensemble,
        mean,
        median: median(&ok),
        max: ok.last().copied().unwrap_or(f64::NAN),
        failures,
        log_growth,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TailPoint {
    pub delta: f64,
    pub empirical: f64,
    /// `2.02 * delta`
    pub bound: f64,
    /// Binomial standard error at probability `min(bound, 1)`.
    pub se: f64,
    /// `empirical <= bound + 3 se`
    pub within: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TailCurve {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    /// `sigma_min(H[:k, :k]) * sqrt(k (n - k))` per trial.
    pub samples: Vec<f64>,
    pub points: Vec<TailPoint>,
}

/// Empirical `P[sigma_min(H11) sqrt(k (n - k)) <= delta]` over Haar `n x n`
/// matrices `H` with leading `k x k` block `H11`.
pub fn haar_minor_tail(n: usize, k: usize, trials: usize, seed: u64, deltas: &[f64]) -> Result<TailCurve> {
    if k <= 30 || n <= k + 30 {
        return Err(Error::Hypothesis(format!("need k > 30 and n - k > 30, got n={n}, k={k}")));
    }
    if trials < 100 {
        return Err(Error::InvalidParameter(format!("need at least 100 trials, got {trials}")));
    }
    let scale = ((k * (n - k)) as f64).sqrt();
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = Rng64::for_trial(seed, t as u64, 0);
            // the leading k columns of a Haar matrix are Haar on the Stiefel manifold
            let q = haar_columns(n, k, &mut rng);
            let minor = q.view((0, 0), (k, k)).into_owned();
            let sv = linalg::singular_values(&minor)?;
            Ok(sv[k - 1] * scale)
        })
        .collect::<Result<_>>()?;
    let points = deltas
        .iter()
        .map(|&delta| {
            let hits = samples.iter().filter(|&&s| s <= delta).count();
            let empirical = hits as f64 / trials as f64;
            let bound = 2.02 * delta;
            let p0 = bound.min(1.0);
            let se = (p0 * (1.0 - p0) / trials as f64).sqrt();
            TailPoint {
                delta,
                empirical,
                bound,
                se,
                within: empirical <= bound + 3.0 * se,
            }
        })
        .collect();
    Ok(TailCurve {
        n,
        k,
        trials,
        samples,
        points,
    })
}
