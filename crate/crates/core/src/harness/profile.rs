//! Test matrices `U diag(sigma) V^T` with Haar `U`, `V` and a chosen spectrum.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::Rng64;
use crate::sketch::haar_columns;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Spectrum {
    /// `sigma_j = exp(-rate (j - 1))`
    Exp { rate: f64 },
    /// `sigma_j = j^(-power)`
    Poly { power: f64 },
    /// `sigma_j = 1` for `j <= k`, `1 / gap` after.
    Step { k: usize, gap: f64 },
    /// `sigma_j = 1` for `j <= k`, then a floor decreasing linearly from
    /// `noise` to `noise / (r - k)`.
    NoisyLowrank { k: usize, noise: f64 },
}

impl Spectrum {
    /// The first `r` singular values.
    pub fn values(&self, r: usize) -> Vec<f64> {
        (1..=r)
            .map(|j| match *self {
                Spectrum::Exp { rate } => (-rate * (j - 1) as f64).exp(),
                Spectrum::Poly { power } => (j as f64).powf(-power),
                Spectrum::Step { k, gap } => {
                    if j <= k {
                        1.0
                    } else {
                        1.0 / gap
                    }
                }
                Spectrum::NoisyLowrank { k, noise } => {
                    if j <= k {
                        1.0
                    } else {
                        let tail = (r - k) as f64;
                        noise * (1.0 - (j - k - 1) as f64 / tail)
                    }
                }
            })
            .collect()
    }
}

impl fmt::Display for Spectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Spectrum::Exp { rate } => write!(f, "exp:{rate}"),
            Spectrum::Poly { power } => write!(f, "poly:{power}"),
            Spectrum::Step { k, gap } => write!(f, "step:{k}:{gap}"),
            Spectrum::NoisyLowrank { k, noise } => write!(f, "noisy:{k}:{noise}"),
        }
    }
}

fn num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::Parse(format!("bad {what} '{s}' in spectrum profile")))
}

/// Parses `exp:RATE`, `poly:POWER`, `step:K:GAP` or `noisy:K:NOISE`.
impl FromStr for Spectrum {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            ["exp", rate] => Spectrum::Exp { rate: num(rate, "rate")? },
            ["poly", power] => Spectrum::Poly { power: num(power, "power")? },
            ["step", k, gap] => Spectrum::Step {
                k: num(k, "k")?,
                gap: num(gap, "gap")?,
            },
            ["noisy" | "noisy_lowrank", k, noise] => Spectrum::NoisyLowrank {
                k: num(k, "k")?,
                noise: num(noise, "noise")?,
            },
            _ => return Err(Error::Parse(format!("unknown spectrum profile '{s}'"))),
        };
        let ok = match spec {
            Spectrum::Exp { rate } => rate.is_finite() && rate >= 0.0,
            Spectrum::Poly { power } => power.is_finite() && power >= 0.0,
            Spectrum::Step { gap, .. } => gap.is_finite() && gap >= 1.0,
            Spectrum::NoisyLowrank { noise, .. } => noise.is_finite() && (0.0..=1.0).contains(&noise),
        };
        if !ok {
            return Err(Error::Parse(format!("parameter out of range in '{s}'")));
        }
        Ok(spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectrumProfile {
    pub spectrum: Spectrum,
    pub m: usize,
    pub n: usize,
    pub seed: u64,
}

/// `U diag(sigma) V^T` with Haar `U: m x r`, `V: n x r`, `r = len(sigma)`.
/// `sigma` must be nonnegative and non-increasing.
pub fn gen_with_spectrum(m: usize, n: usize, sigma: &[f64], seed: u64) -> Result<Matrix> {
    let r = sigma.len();
    if m == 0 || n == 0 || r > m.min(n) {
        return Err(Error::InvalidParameter(format!(
            "{r} singular values do not fit a {m}x{n} matrix"
        )));
    }
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) || sigma.windows(2).any(|w| w[1] > w[0]) {
        return Err(Error::InvalidParameter("singular values must be finite, >= 0 and non-increasing".into()));
    }
    let mut rng = Rng64::seed(seed);
    let mut u = haar_columns(m, r, &mut rng);
    let v = haar_columns(n, r, &mut rng);
    for (j, s) in sigma.iter().enumerate() {
        u.column_mut(j).scale_mut(*s);
    }
    Ok(u * v.transpose())
}

pub fn gen_matrix(profile: &SpectrumProfile) -> Result<Matrix> {
    let r = profile.m.min(profile.n);
    if let Spectrum::Step { k, .. } | Spectrum::NoisyLowrank { k, .. } = profile.spectrum {
        if k > r {
            return Err(Error::InvalidParameter(format!("profile rank {k} exceeds min(m, n) = {r}")));
        }
    }
    gen_with_spectrum(profile.m, profile.n, &profile.spectrum.values(r), profile.seed)
}
