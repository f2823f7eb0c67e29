//! Test-matrix generators, matrix files and the `glu` command line.

mod cli;
pub mod io;
pub mod profile;

use std::path::PathBuf;

use serde::Serialize;

pub use cli::{cli_main, run};
pub use profile::{gen_matrix, gen_with_spectrum, Spectrum, SpectrumProfile};

use crate::error::{Error, Result};
use crate::factor::Algorithm;
use crate::sketch::{sketch_dims, SketchDims, SketchKind};

pub const DEFAULT_EPS: f64 = 0.5;
pub const DEFAULT_DELTA: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    File(PathBuf),
    Profile(SpectrumProfile),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DimsSource {
    Explicit,
    Formula,
    /// The formula overflowed the matrix and the desk-scale defaults were used.
    DeskDefault,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub algo: Algorithm,
    pub k: usize,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub l: Option<usize>,
    pub lp: Option<usize>,
    pub left: SketchKind,
    pub right: SketchKind,
    pub seed: u64,
    pub trials: usize,
    pub output: Option<PathBuf>,
    pub source: MatrixSource,
}

/// `l = min(4k, min(m, n))`, `l' = max(l, min(8k, m))`.
pub fn desk_dims(k: usize, m: usize, n: usize) -> Result<SketchDims> {
    let l = (4 * k).min(m.min(n));
    let lp = l.max((8 * k).min(m));
    SketchDims::new(k, l, lp)
}

impl RunConfig {
    /// Resolves `(l, l')` for an `m x n` input. RLU, RQR and PRR_RLU get
    /// `l' = l`.
    pub fn resolve_dims(&self, m: usize, n: usize) -> Result<(SketchDims, DimsSource)> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        if self.k > m.min(n) {
            return Err(Error::RankOutOfRange { k: self.k, max: m.min(n) });
        }
        let two_sided = matches!(self.algo, Algorithm::Glu | Algorithm::Cw);
        let (mut dims, source) = match self.l {
            Some(l) => {
                let lp = if two_sided { self.lp.unwrap_or(l) } else { l };
                (SketchDims::new(self.k, l, lp)?, DimsSource::Explicit)
            }
            None => {
                if self.lp.is_some() {
                    return Err(Error::InvalidParameter("--lp requires --l".into()));
                }
                let eps = self.eps.unwrap_or(DEFAULT_EPS);
                let delta = self.delta.unwrap_or(DEFAULT_DELTA);
                let f = sketch_dims(self.k, eps, delta, n, m)?;
                if f.clamped {
                    let mut d = desk_dims(self.k, m, n)?;
                    d.eps = f.eps;
                    d.delta = f.delta;
                    d.clamped = true;
                    (d, DimsSource::DeskDefault)
                } else {
                    (f, DimsSource::Formula)
                }
            }
        };
        if !two_sided {
            dims.lp = dims.l;
        }
        if dims.l > m.min(n) || dims.lp > m {
            return Err(Error::InvalidParameter(format!(
                "l = {}, lp = {} do not fit a {m}x{n} matrix",
                dims.l, dims.lp
            )));
        }
        Ok((dims, source))
    }
}
