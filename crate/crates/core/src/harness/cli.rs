use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use super::io::{read_matrix, write_matrix};
use super::profile::{gen_matrix, Spectrum, SpectrumProfile};
use super::{DimsSource, MatrixSource, RunConfig};
use crate::bounds::{self, BoundReport, GammaMetrics};
use crate::error::{Error, Result};
use crate::factor::{factorize, Algorithm};
use crate::growth::{haar_minor_tail, precondition_experiment, Ensemble};
use crate::linalg::{self, Matrix};
use crate::rng::{derive_seed, gaussian_matrix, Rng64};
use crate::sketch::{haar_columns, SketchDims, SketchKind, SketchOperator};

#[derive(Parser, Debug)]
#[command(name = "glu", version, about = "Generalized LU low-rank approximation toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Factorize a matrix and report approximation quality.
    Approx(ApproxArgs),
    /// Check the deterministic bounds on random instances; writes CSV.
    VerifyBounds(VerifyArgs),
    /// Quality metrics of all algorithms over spectrum profiles; writes CSV.
    Compare(CompareArgs),
    /// Growth factors under random two-sided preconditioning and the
    /// Haar-minor tail estimate; writes JSON.
    Growth(GrowthArgs),
    /// Generate a matrix with a prescribed spectrum.
    GenMatrix(GenArgs),
    /// Time a factorization over sizes; writes CSV.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct SeedArg {
    /// Base seed for all random draws.
    #[arg(long, env = "GLU_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct ApproxArgs {
    #[arg(long, default_value = "glu")]
    algo: Algorithm,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    lp: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    /// Input matrix (.mtx, .glum or .bin).
    #[arg(long = "in", conflicts_with = "profile")]
    input: Option<PathBuf>,
    /// Generate the input instead, e.g. exp:0.5, poly:1, step:3:100, noisy:3:0.01.
    #[arg(long, requires_all = ["m", "n"])]
    profile: Option<Spectrum>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "srht")]
    left_sketch: SketchKind,
    #[arg(long, default_value = "srht")]
    right_sketch: SketchKind,
    #[command(flatten)]
    seed: SeedArg,
    /// Directory for T, S (and the middle factor) plus report.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// File extension for written factors.
    #[arg(long, default_value = "mtx", value_parser = ["mtx", "glum", "bin"])]
    format: String,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    l: usize,
    #[arg(long)]
    lp: usize,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// Indices j for the trailing bounds; defaults to 1..=min(3, min(m,n)-k).
    #[arg(long, value_delimiter = ',')]
    j: Vec<usize>,
    #[arg(long, default_value = "gaussian")]
    sketch: SketchKind,
    /// Comma-separated subset of lu, qr, facts, cw.
    #[arg(long, value_delimiter = ',', default_value = "lu,qr,facts,cw")]
    suite: Vec<Suite>,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Suite {
    Lu,
    Qr,
    Facts,
    Cw,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, default_value_t = 128)]
    m: usize,
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    lp: Option<usize>,
    #[arg(long, value_delimiter = ',', default_value = "exp:0.2,poly:1,step:4:100,noisy:4:0.01")]
    profiles: Vec<Spectrum>,
    #[arg(long, value_delimiter = ',', default_value = "glu,cw,rlu,rqr,prr_rlu")]
    algos: Vec<Algorithm>,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long, default_value = "srht")]
    sketch: SketchKind,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum BaseMatrix {
    Identity,
    Haar,
}

#[derive(Args, Debug)]
struct GrowthArgs {
    #[arg(long = "sizes", value_delimiter = ',', default_value = "32,64,128")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value = "haar")]
    ensemble: Ensemble,
    #[arg(long, value_delimiter = ',', default_value = "identity,haar")]
    base: Vec<BaseMatrix>,
    #[arg(long, default_value_t = 80)]
    tail_n: usize,
    #[arg(long, default_value_t = 40)]
    tail_k: usize,
    #[arg(long, default_value_t = 500)]
    tail_trials: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.1,0.25,0.5,1.0")]
    deltas: Vec<f64>,
    /// Skip the Haar-minor tail experiment.
    #[arg(long)]
    no_tail: bool,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    profile: Spectrum,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Matrix shapes as MxN.
    #[arg(long, value_delimiter = ',', default_value = "256x256,512x512")]
    sizes: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64")]
    lps: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    k: usize,
    #[arg(long, default_value = "glu")]
    algo: Algorithm,
    #[arg(long, default_value = "srht")]
    sketch: SketchKind,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[command(flatten)]
    seed: SeedArg,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Process exit status.
enum Outcome {
    Ok,
    BoundFailed,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code: 0 success, 1 a checked bound failed, 2 usage or parameter error,
/// 3 runtime failure.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`cli_main`] with explicit output streams.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.cmd {
        Command::Approx(a) => approx(a, out),
        Command::VerifyBounds(a) => verify(a, out, err),
        Command::Compare(a) => compare(a, out),
        Command::Growth(a) => growth(a, out, err),
        Command::GenMatrix(a) => gen(a),
        Command::Bench(a) => bench(a, out),
    };
    match result {
        Ok(Outcome::Ok) => 0,
        Ok(Outcome::BoundFailed) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::InvalidParameter(_) | Error::RankOutOfRange { .. } | Error::Parse(_) | Error::NotPowerOfTwo(_) => 2,
                _ => 3,
            }
        }
    }
}

fn emit(bytes: &[u8], path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => out.write_all(bytes)?,
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(value).expect("serializable");
    s.push(b'\n');
    s
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn csv_bytes(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct ApproxReport<'a> {
    algo: Algorithm,
    m: usize,
    n: usize,
    dims: SketchDims,
    dims_source: DimsSource,
    left_sketch: Option<&'a crate::sketch::SketchDescriptor>,
    right_sketch: &'a crate::sketch::SketchDescriptor,
    selected_rows: Option<&'a [usize]>,
    residual_frobenius: f64,
    residual_spectral: f64,
    optimal_frobenius: f64,
    frobenius_ratio: Option<f64>,
    gamma: GammaMetrics,
}

fn approx(args: ApproxArgs, out: &mut dyn Write) -> Result<Outcome> {
    let source = match (&args.input, args.profile) {
        (Some(p), None) => MatrixSource::File(p.clone()),
        (None, Some(spectrum)) => MatrixSource::Profile(SpectrumProfile {
            spectrum,
            m: args.m.unwrap_or(0),
            n: args.n.unwrap_or(0),
            seed: derive_seed(args.seed.seed, 0, 0),
        }),
        _ => return Err(Error::InvalidParameter("give exactly one of --in or --profile".into())),
    };
    let config = RunConfig {
        algo: args.algo,
        k: args.k,
        eps: args.eps,
        delta: args.delta,
        l: args.l,
        lp: args.lp,
        left: args.left_sketch,
        right: args.right_sketch,
        seed: args.seed.seed,
        trials: 1,
        output: args.out.clone(),
        source,
    };
    if config.k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let a = match &config.source {
        MatrixSource::File(p) => read_matrix(p)?,
        MatrixSource::Profile(p) => gen_matrix(p)?,
    };
    let (m, n) = a.shape();
    let (dims, dims_source) = config.resolve_dims(m, n)?;
    let f = factorize(&a, config.algo, &dims, config.left, config.right, config.seed)?;
    let ak = f.reconstruct();
    let resid = &a - &ak;
    let opt = linalg::truncated_svd(&a, dims.k)?;
    let optimal = (&a - opt).norm();
    let residual = resid.norm();
    let report = ApproxReport {
        algo: config.algo,
        m,
        n,
        dims,
        dims_source,
        left_sketch: f.left_sketch(),
        right_sketch: f.right_sketch(),
        selected_rows: f.selected_rows(),
        residual_frobenius: residual,
        residual_spectral: linalg::spectral_norm(&resid)?,
        optimal_frobenius: optimal,
        frobenius_ratio: (optimal > 0.0).then(|| (residual / optimal).powi(2)),
        gamma: bounds::gamma_metrics(&a, &ak, dims.k)?,
    };
    let body = json(&report);
    if let Some(dir) = &config.output {
        std::fs::create_dir_all(dir)?;
        let ext = &args.format;
        write_matrix(&dir.join(format!("T.{ext}")), f.t())?;
        write_matrix(&dir.join(format!("S.{ext}")), f.s())?;
        if let Some(mid) = f.mid() {
            write_matrix(&dir.join(format!("mid.{ext}")), mid)?;
        }
        std::fs::write(dir.join("report.json"), &body)?;
    }
    out.write_all(&body)?;
    Ok(Outcome::Ok)
}

fn verify_trial(args: &VerifyArgs, j_list: &[usize], t: usize) -> Result<Vec<BoundReport>> {
    let seed = args.seed.seed;
    let a = gaussian_matrix(args.m, args.n, &mut Rng64::for_trial(seed, t as u64, 0));
    let u_op = SketchOperator::new(args.sketch, args.m, args.lp, derive_seed(seed, t as u64, 1))?;
    let v_op = SketchOperator::new(args.sketch, args.n, args.l, derive_seed(seed, t as u64, 2))?;
    let u1 = u_op.to_dense()?;
    let v1 = v_op.to_dense()?.transpose();
    let mut reports = Vec::new();
    for suite in &args.suite {
        match suite {
            Suite::Lu => reports.extend(bounds::verify_prop_lu(&a, &u1, &v1, args.k, j_list)?),
            Suite::Qr => reports.extend(bounds::verify_prop_qr(&a, &v1, args.k, j_list)?),
            Suite::Facts => reports.extend(bounds::verify_basic_facts(&a, &u1, &v1)?),
            Suite::Cw => {
                let dims = SketchDims::new(args.k, args.l, args.lp)?;
                reports.extend(bounds::compare_cw_glu(&a, &u_op, &v_op, &dims)?);
            }
        }
    }
    Ok(reports)
}

fn verify(args: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    let (m, n, k) = (args.m, args.n, args.k);
    if k == 0 || args.trials == 0 {
        return Err(Error::InvalidParameter("k and trials must be >= 1".into()));
    }
    SketchDims::new(k, args.l, args.lp)?;
    if args.l > m.min(n) || args.lp > m {
        return Err(Error::InvalidParameter(format!(
            "l = {}, lp = {} do not fit a {m}x{n} matrix",
            args.l, args.lp
        )));
    }
    let j_list = if args.j.is_empty() {
        (1..=3.min(m.min(n) - k)).collect()
    } else {
        args.j.clone()
    };
    if let Some(&j) = j_list.iter().find(|&&j| j == 0 || j > m.min(n) - k) {
        return Err(Error::InvalidParameter(format!("j = {j} outside 1..={}", m.min(n) - k)));
    }
    let trials: Vec<Vec<BoundReport>> = (0..args.trials)
        .into_par_iter()
        .map(|t| verify_trial(&args, &j_list, t))
        .collect::<Result<_>>()?;
    let mut w = csv_writer();
    w.write_record(["trial", "name", "lhs", "rhs", "slack", "holds", "asserted"])
        .map_err(csv_err)?;
    let mut failed = 0usize;
    let mut total = 0usize;
    for (t, reports) in trials.iter().enumerate() {
        for r in reports {
            let holds = r.holds();
            if !r.informational {
                total += 1;
                failed += usize::from(!holds);
            }
            w.write_record([
                t.to_string(),
                r.name.clone(),
                r.lhs.to_string(),
                r.rhs.to_string(),
                r.slack.to_string(),
                holds.to_string(),
                (!r.informational).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    emit(&csv_bytes(w)?, args.out.as_deref(), out)?;
    writeln!(err, "{} of {total} asserted bounds hold", total - failed)?;
    Ok(if failed == 0 { Outcome::Ok } else { Outcome::BoundFailed })
}

struct CompareRow {
    profile: String,
    algo: Algorithm,
    trial: usize,
    gamma: GammaMetrics,
    frob_ratio: Option<f64>,
}

fn compare_trial(args: &CompareArgs, dims: &SketchDims, p: usize, t: usize) -> Result<Vec<CompareRow>> {
    let spectrum = args.profiles[p];
    let a = gen_matrix(&SpectrumProfile {
        spectrum,
        m: args.m,
        n: args.n,
        seed: derive_seed(args.seed.seed, t as u64, 10 + p as u64),
    })?;
    let optimal = (&a - linalg::truncated_svd(&a, dims.k)?).norm();
    let fseed = derive_seed(args.seed.seed, t as u64, 3);
    args.algos
        .iter()
        .map(|&algo| {
            let mut d = *dims;
            if !matches!(algo, Algorithm::Glu | Algorithm::Cw) {
                d.lp = d.l;
            }
            let ak = factorize(&a, algo, &d, args.sketch, args.sketch, fseed)?.reconstruct();
            let resid = (&a - &ak).norm();
            Ok(CompareRow {
                profile: spectrum.to_string(),
                algo,
                trial: t,
                gamma: bounds::gamma_metrics(&a, &ak, d.k)?,
                frob_ratio: (optimal > 0.0).then(|| (resid / optimal).powi(2)),
            })
        })
        .collect()
}

fn compare(args: CompareArgs, out: &mut dyn Write) -> Result<Outcome> {
    let config = RunConfig {
        algo: Algorithm::Glu,
        k: args.k,
        eps: None,
        delta: None,
        l: args.l,
        lp: args.lp,
        left: args.sketch,
        right: args.sketch,
        seed: args.seed.seed,
        trials: args.trials,
        output: args.out.clone(),
        source: MatrixSource::Profile(SpectrumProfile {
            spectrum: args.profiles.first().copied().unwrap_or(Spectrum::Exp { rate: 0.2 }),
            m: args.m,
            n: args.n,
            seed: args.seed.seed,
        }),
    };
    let (dims, _) = config.resolve_dims(args.m, args.n)?;
    let jobs: Vec<(usize, usize)> = (0..args.profiles.len())
        .flat_map(|p| (0..args.trials).map(move |t| (p, t)))
        .collect();
    let rows: Vec<Vec<CompareRow>> = jobs
        .par_iter()
        .map(|&(p, t)| compare_trial(&args, &dims, p, t))
        .collect::<Result<_>>()?;
    let mut w = csv_writer();
    w.write_record([
        "profile",
        "algo",
        "trial",
        "k",
        "l",
        "lp",
        "gamma_lowrank",
        "spectrum_ratio_min",
        "gamma_kernel_max",
        "frob_ratio",
        "exact_recovery",
    ])
    .map_err(csv_err)?;
    for r in rows.iter().flatten() {
        let kernel_max = r.gamma.gamma_kernel.iter().flatten().copied().reduce(f64::max);
        let lp = if matches!(r.algo, Algorithm::Glu | Algorithm::Cw) { dims.lp } else { dims.l };
        w.write_record([
            r.profile.clone(),
            r.algo.to_string(),
            r.trial.to_string(),
            dims.k.to_string(),
            dims.l.to_string(),
            lp.to_string(),
            opt(r.gamma.gamma_lowrank),
            r.gamma.spectrum_ratio_min().to_string(),
            opt(kernel_max),
            opt(r.frob_ratio),
            r.gamma.exact_recovery.to_string(),
        ])
        .map_err(csv_err)?;
    }
    emit(&csv_bytes(w)?, args.out.as_deref(), out)?;
    Ok(Outcome::Ok)
}

#[derive(Serialize)]
struct GrowthRow {
    base: &'static str,
    #[serde(flatten)]
    stats: crate::growth::PreconditionStats,
}

#[derive(Serialize)]
struct TailSummary {
    n: usize,
    k: usize,
    trials: usize,
    points: Vec<crate::growth::TailPoint>,
}

#[derive(Serialize)]
struct GrowthReport {
    seed: u64,
    precondition: Vec<GrowthRow>,
    tail: Option<TailSummary>,
}

fn growth(args: GrowthArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<Outcome> {
    let seed = args.seed.seed;
    let mut precondition = Vec::new();
    for (b, base) in args.base.iter().enumerate() {
        for (i, &n) in args.sizes.iter().enumerate() {
            let (name, a) = match base {
                BaseMatrix::Identity => ("identity", Matrix::identity(n, n)),
                BaseMatrix::Haar => {
                    let mut rng = Rng64::for_trial(seed, i as u64, 100 + b as u64);
                    ("haar", haar_columns(n, n, &mut rng))
                }
            };
            let stats = precondition_experiment(&a, args.trials, derive_seed(seed, i as u64, 200 + b as u64), args.ensemble)?;
            precondition.push(GrowthRow { base: name, stats });
        }
    }
    let mut outcome = Outcome::Ok;
    let tail = if args.no_tail {
        None
    } else {
        let curve = haar_minor_tail(args.tail_n, args.tail_k, args.tail_trials, derive_seed(seed, 0, 300), &args.deltas)?;
        if curve.points.iter().any(|p| !p.within) {
            writeln!(err, "Haar-minor tail estimate exceeds its bound")?;
            outcome = Outcome::BoundFailed;
        }
        Some(TailSummary {
            n: curve.n,
            k: curve.k,
            trials: curve.trials,
            points: curve.points,
        })
    };
    emit(&json(&GrowthReport { seed, precondition, tail }), args.out.as_deref(), out)?;
    Ok(outcome)
}

fn gen(args: GenArgs) -> Result<Outcome> {
    let a = gen_matrix(&SpectrumProfile {
        spectrum: args.profile,
        m: args.m,
        n: args.n,
        seed: args.seed.seed,
    })?;
    write_matrix(&args.out, &a)?;
    Ok(Outcome::Ok)
}

fn parse_shape(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("bad size '{s}', expected MxN"));
    let (m, n) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((m.trim().parse().map_err(|_| bad())?, n.trim().parse().map_err(|_| bad())?))
}

fn bench(args: BenchArgs, out: &mut dyn Write) -> Result<Outcome> {
    if args.reps < 5 {
        return Err(Error::InvalidParameter("bench needs --reps >= 5".into()));
    }
    if args.k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let mut w = csv_writer();
    w.write_record(["m", "n", "k", "l", "lp", "algo", "reps", "median_seconds", "model_cost", "seconds_per_unit"])
        .map_err(csv_err)?;
    for (i, size) in args.sizes.iter().enumerate() {
        let (m, n) = parse_shape(size)?;
        let a = gaussian_matrix(m, n, &mut Rng64::for_trial(args.seed.seed, i as u64, 0));
        for &lp in &args.lps {
            let l = (lp / 2).max(args.k);
            let lp = if matches!(args.algo, Algorithm::Glu | Algorithm::Cw) { lp } else { l };
            let dims = SketchDims::new(args.k, l, lp)?;
            let mut times = Vec::with_capacity(args.reps);
            for r in 0..args.reps {
                let start = Instant::now();
                factorize(&a, args.algo, &dims, args.sketch, args.sketch, derive_seed(args.seed.seed, r as u64, 4))?;
                times.push(start.elapsed().as_secs_f64());
            }
            times.sort_by(f64::total_cmp);
            let median = times[times.len() / 2];
            let cost = (n * m) as f64 * (lp as f64).log2().max(1.0) + (m * l * lp) as f64;
            w.write_record([
                m.to_string(),
                n.to_string(),
                args.k.to_string(),
                l.to_string(),
                lp.to_string(),
                args.algo.to_string(),
                args.reps.to_string(),
                median.to_string(),
                cost.to_string(),
                (median / cost).to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    emit(&csv_bytes(w)?, args.out.as_deref(), out)?;
    Ok(Outcome::Ok)
}
