//! Command line front end. Every subcommand runs one pipeline and writes its
//! result to `--out` (or stdout); a one-line JSON summary goes to stderr.
//!
//! Exit codes: 0 on success, 1 when a verification suite fails, 2 on usage or
//! input errors. Settings resolve as flags, then `--config` JSON, then defaults.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::io::{
    eigenvalues_to_csv, measure_from_csv, measure_to_csv, table_to_csv, triplets_from_csv, triplets_to_csv,
};
use crate::kernel::io::read_kernel;
use crate::kernel::{cut_distance, cut_norm, CutDistanceMode, CutNormMode};
use crate::matrices::{eigenvalues, sample_sparse_wigner, tilted_sample};
use crate::measure::{ks_distance, metric_d, wasserstein, ProbMeasure1D};
use crate::qve::{
    qve_measure_with, semicircle_reference, solve_qve_points, InversionOptions, QveOptions, SpectralGrid,
};
use crate::rate::{k_alpha, kernel_entropy, EntryLaw, LegendrePair};
use crate::suites::{run_suite, Suite};
use crate::trees::moment_table;

const KERNEL_HELP: &str =
    "Kernel JSON file: {\"boundaries\":[b1,...,1], \"values\":[[...],...]} with symmetric nonnegative values";
const LAW_HELP: &str =
    "Entry law: rademacher, sparse3, or a JSON file {\"support\":[...], \"probs\":[...]} with mean 0 and variance 1";

#[derive(Debug, Parser)]
#[command(
    name = "qvelab",
    version,
    about = "Quadratic vector equations, kernel spectra and rate functions for sparse Wigner matrices"
)]
pub struct Cli {
    /// JSON file with default values for any flag (keys are flag names with '-' replaced by '_')
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the QVE at points z in the upper half plane.
    ///
    /// Output JSON: {"z":[re,im],"m":[[re,im],...],"residual":r} per point (an array when several --z are given).
    /// m holds one value per kernel part; residual is the sup-norm of m + 1/(z + Sm).
    QveSolve(QveSolveArgs),
    /// Compute the QVE measure of a kernel by Stieltjes inversion.
    ///
    /// Output CSV: x,density,cdf on the grid (density per unit length, cdf in [0,1]).
    QveMeasure(QveMeasureArgs),
    /// Even moments of the QVE measure from rooted planar trees.
    ///
    /// Output CSV: order,value for orders 0..=max-order (odd orders are 0).
    Moments(MomentsArgs),
    /// Tabulate the Legendre conjugate h_L of an entry law, or the entropy of a kernel.
    ///
    /// Output CSV: u,h (dimensionless). With --kernel, JSON {"entropy":H} instead.
    Rate(RateArgs),
    /// Threshold K_alpha(eps): the u > 1 with h_L(u)/u = alpha/eps.
    ///
    /// Output JSON: {"alpha":a,"eps":e,"k_alpha":u}.
    KAlpha(KAlphaArgs),
    /// Sample a sparse Wigner matrix X = (A o Xi)/sqrt(np).
    ///
    /// Output CSV: i,j,value for the nonzero entries with i <= j (0-based indices).
    Sample(SampleArgs),
    /// Sample the exponentially tilted ensemble with variance profile --kernel.
    ///
    /// Output CSV: i,j,value as for `sample`. The kernel must be positive with a part count dividing n.
    Tilt(TiltArgs),
    /// Eigenvalues of a sampled matrix (from --input triplets, or sampled from --n/--p/--law/--seed).
    ///
    /// Output CSV: eigenvalue, sorted ascending.
    Spectrum(SpectrumArgs),
    /// Distance between two measures.
    ///
    /// Inputs: measure CSV files (headers eigenvalue | x,weight | x,density,cdf) or the word `semicircle`.
    /// Output: the distance as a single number. Metrics: ks, w1, w2, d.
    Compare(CompareArgs),
    /// Cut norm of a kernel (or of the difference of two), or their cut distance.
    ///
    /// Output JSON: {"value":v,"exact":bool}; with --distance also "permutation".
    Cutnorm(CutnormArgs),
    /// Run randomized verification suites; exits with 1 on any failure.
    ///
    /// Suites: identities, inequalities, oracles, all. Output JSON report.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct QveSolveArgs {
    #[arg(long, help = KERNEL_HELP)]
    kernel: Option<PathBuf>,
    /// Spectral parameter "a+bi" with b > 0; repeatable
    #[arg(long, allow_hyphen_values = true)]
    z: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QveMeasureArgs {
    #[arg(long, help = KERNEL_HELP)]
    kernel: Option<PathBuf>,
    /// Grid "xmin:xmax:npts:eta"; default covers the support bound plus 1 with 4000 points and eta 1e-3
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Two-point extrapolation in eta
    #[arg(long)]
    richardson: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long, help = KERNEL_HELP)]
    kernel: Option<PathBuf>,
    /// Highest moment order (at most 20)
    #[arg(long)]
    max_order: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[arg(long, help = LAW_HELP)]
    law: Option<String>,
    /// Table range "umin:umax:npts" (default 0:10:101)
    #[arg(long)]
    u: Option<String>,
    #[arg(long, help = KERNEL_HELP)]
    kernel: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct KAlphaArgs {
    #[arg(long, help = LAW_HELP)]
    law: Option<String>,
    /// alpha >= 1
    #[arg(long)]
    alpha: Option<f64>,
    /// eps in (0,1)
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Matrix dimension
    #[arg(long)]
    n: Option<usize>,
    /// Edge probability in (0,1)
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, help = LAW_HELP)]
    law: Option<String>,
    /// 64-bit seed
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TiltArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, help = LAW_HELP)]
    law: Option<String>,
    /// Target profile U (strictly positive, equal parts)
    #[arg(long, help = KERNEL_HELP)]
    kernel: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Triplet CSV i,j,value (requires --n)
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, help = LAW_HELP)]
    law: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    /// ks | w1 | w2 | d
    #[arg(long)]
    metric: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CutnormArgs {
    #[arg(long, help = KERNEL_HELP)]
    kernel: Option<PathBuf>,
    /// Second kernel; the cut norm of the difference is reported
    #[arg(long)]
    kernel2: Option<PathBuf>,
    /// exact | heuristic (cut norm), exact | anneal (cut distance)
    #[arg(long)]
    mode: Option<String>,
    /// Report the cut distance instead of the cut norm of the difference
    #[arg(long)]
    distance: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// identities | inequalities | oracles | all
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Randomized trials per check (default 100)
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Values a `--config` file may supply.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    kernel: Option<PathBuf>,
    kernel2: Option<PathBuf>,
    law: Option<String>,
    n: Option<usize>,
    p: Option<f64>,
    seed: Option<u64>,
    z: Option<Vec<String>>,
    grid: Option<String>,
    out: Option<PathBuf>,
    metric: Option<String>,
    suite: Option<String>,
    trials: Option<usize>,
    mode: Option<String>,
    alpha: Option<f64>,
    eps: Option<f64>,
    max_order: Option<usize>,
    u: Option<String>,
    a: Option<String>,
    b: Option<String>,
    input: Option<PathBuf>,
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Parse(format!("missing --{name}")))
}

/// Parses `a+bi`, `a-bi`, `bi` or `a`.
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || Error::Parse(format!("cannot parse complex number {s:?}"));
    if let Some(body) = t.strip_suffix('i') {
        let split = body
            .char_indices()
            .skip(1)
            .filter(|&(i, c)| (c == '+' || c == '-') && !matches!(body.as_bytes()[i - 1], b'e' | b'E'))
            .map(|(i, _)| i)
            .last();
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => "1",
            "-" => "-1",
            other => other,
        };
        let re: f64 = re.parse().map_err(|_| bad())?;
        let im: f64 = im.trim_start_matches('+').parse().map_err(|_| bad())?;
        Ok(Complex64::new(re, im))
    } else {
        Ok(Complex64::new(t.parse().map_err(|_| bad())?, 0.0))
    }
}

/// Parses `xmin:xmax:npts:eta`.
pub fn parse_grid(s: &str) -> Result<SpectralGrid> {
    let f: Vec<&str> = s.split(':').collect();
    if f.len() != 4 {
        return Err(Error::Parse(format!("grid must be xmin:xmax:npts:eta, got {s:?}")));
    }
    let num = |x: &str| x.parse::<f64>().map_err(|e| Error::Parse(format!("grid field {x:?}: {e}")));
    let n: usize = f[2].parse().map_err(|e| Error::Parse(format!("grid npts {:?}: {e}", f[2])))?;
    SpectralGrid::new(num(f[0])?, num(f[1])?, n, num(f[3])?)
}

fn parse_range(s: &str) -> Result<(f64, f64, usize)> {
    let f: Vec<&str> = s.split(':').collect();
    if f.len() != 3 {
        return Err(Error::Parse(format!("range must be min:max:npts, got {s:?}")));
    }
    let num = |x: &str| x.parse::<f64>().map_err(|e| Error::Parse(format!("range field {x:?}: {e}")));
    let n: usize = f[2].parse().map_err(|e| Error::Parse(format!("range npts {:?}: {e}", f[2])))?;
    if n < 2 {
        return Err(Error::Parse("range needs at least 2 points".into()));
    }
    Ok((num(f[0])?, num(f[1])?, n))
}

fn read_measure(spec: &str) -> Result<ProbMeasure1D> {
    if spec == "semicircle" {
        return Ok(semicircle_reference(&SpectralGrid::new(-2.0, 2.0, 4001, 1e-3)?));
    }
    measure_from_csv(&std::fs::read_to_string(spec)?)
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn c2(z: Complex64) -> Value {
    json!([z.re, z.im])
}

struct Outcome {
    summary: Value,
    failed: bool,
}

fn ok(summary: Value) -> Result<Outcome> {
    Ok(Outcome { summary, failed: false })
}

fn dispatch(cmd: Command, cfg: FileConfig, stdout: &mut dyn Write) -> Result<Outcome> {
    match cmd {
        Command::QveSolve(a) => {
            let w = read_kernel(required(a.kernel.or(cfg.kernel), "kernel")?)?;
            let zs_raw = if a.z.is_empty() { cfg.z.unwrap_or_default() } else { a.z };
            if zs_raw.is_empty() {
                return Err(Error::Parse("missing --z".into()));
            }
            let zs = zs_raw.iter().map(|s| parse_complex(s)).collect::<Result<Vec<_>>>()?;
            let mut items = Vec::new();
            let mut worst: f64 = 0.0;
            for (z, r) in zs.iter().zip(solve_qve_points(&w, &zs, &QveOptions::default())) {
                let p = r?;
                worst = worst.max(p.residual);
                items.push(
                    json!({"z": c2(*z), "m": p.m.iter().map(|v| c2(*v)).collect::<Vec<_>>(), "residual": p.residual}),
                );
            }
            let body = if items.len() == 1 { items.remove(0) } else { Value::Array(items) };
            emit(a.out.or(cfg.out).as_deref(), stdout, &(body.to_string() + "\n"))?;
            ok(json!({"points": zs.len(), "max_residual": worst}))
        }
        Command::QveMeasure(a) => {
            let w = read_kernel(required(a.kernel.or(cfg.kernel), "kernel")?)?;
            let grid = match a.grid.or(cfg.grid) {
                Some(g) => parse_grid(&g)?,
                None => SpectralGrid::for_kernel(&w),
            };
            let opts = InversionOptions { richardson: a.richardson, ..Default::default() };
            let mu = qve_measure_with(&w, &grid, &opts)?;
            emit(a.out.or(cfg.out).as_deref(), stdout, &measure_to_csv(&mu))?;
            ok(json!({"points": grid.n_points, "eta": grid.eta, "richardson": a.richardson}))
        }
        Command::Moments(a) => {
            let w = read_kernel(required(a.kernel.or(cfg.kernel), "kernel")?)?;
            let max = a.max_order.or(cfg.max_order).unwrap_or(8);
            let table = moment_table(&w, max)?;
            emit(a.out.or(cfg.out).as_deref(), stdout, &table_to_csv("order,value", &table))?;
            ok(json!({"max_order": max}))
        }
        Command::Rate(a) => {
            let law = EntryLaw::from_spec(&a.law.or(cfg.law).unwrap_or_else(|| "rademacher".into()))?;
            let pair = LegendrePair::new(law);
            let out = a.out.or(cfg.out);
            if let Some(k) = a.kernel.or(cfg.kernel) {
                let h = kernel_entropy(&pair, &read_kernel(k)?)?;
                emit(out.as_deref(), stdout, &(json!({ "entropy": h }).to_string() + "\n"))?;
                return ok(json!({ "entropy": h }));
            }
            let (lo, hi, n) = parse_range(&a.u.or(cfg.u).unwrap_or_else(|| "0:10:101".into()))?;
            let rows = (0..n)
                .map(|i| {
                    let u = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                    pair.h(u).map(|h| (u, h))
                })
                .collect::<Result<Vec<_>>>()?;
            emit(out.as_deref(), stdout, &table_to_csv("u,h", &rows))?;
            ok(json!({ "rows": n }))
        }
        Command::KAlpha(a) => {
            let law = EntryLaw::from_spec(&a.law.or(cfg.law).unwrap_or_else(|| "rademacher".into()))?;
            let alpha = required(a.alpha.or(cfg.alpha), "alpha")?;
            let eps = required(a.eps.or(cfg.eps), "eps")?;
            let u = k_alpha(&LegendrePair::new(law), alpha, eps)?;
            let body = json!({"alpha": alpha, "eps": eps, "k_alpha": u});
            emit(a.out.or(cfg.out).as_deref(), stdout, &(body.to_string() + "\n"))?;
            ok(body)
        }
        Command::Sample(a) => {
            let n = required(a.n.or(cfg.n), "n")?;
            let p = required(a.p.or(cfg.p), "p")?;
            let law = EntryLaw::from_spec(&a.law.or(cfg.law).unwrap_or_else(|| "rademacher".into()))?;
            let seed = a.seed.or(cfg.seed).unwrap_or(0);
            let s = sample_sparse_wigner(n, p, &law, seed)?;
            emit(a.out.or(cfg.out).as_deref(), stdout, &triplets_to_csv(&s.entries))?;
            ok(json!({"n": n, "p": p, "seed": seed, "edges": s.edge_count()}))
        }
        Command::Tilt(a) => {
            let n = required(a.n.or(cfg.n), "n")?;
            let p = required(a.p.or(cfg.p), "p")?;
            let law = EntryLaw::from_spec(&a.law.or(cfg.law).unwrap_or_else(|| "rademacher".into()))?;
            let u = read_kernel(required(a.kernel.or(cfg.kernel), "kernel")?)?;
            let seed = a.seed.or(cfg.seed).unwrap_or(0);
            let s = tilted_sample(n, p, &LegendrePair::new(law), &u, seed)?;
            emit(a.out.or(cfg.out).as_deref(), stdout, &triplets_to_csv(&s.entries))?;
            ok(json!({"n": n, "p": p, "seed": seed, "edges": s.edge_count()}))
        }
        Command::Spectrum(a) => {
            let n = required(a.n.or(cfg.n), "n")?;
            let m = match a.input.or(cfg.input) {
                Some(path) => triplets_from_csv(&std::fs::read_to_string(path)?, n)?,
                None => {
                    let p = required(a.p.or(cfg.p), "p")?;
                    let law = EntryLaw::from_spec(&a.law.or(cfg.law).unwrap_or_else(|| "rademacher".into()))?;
                    sample_sparse_wigner(n, p, &law, a.seed.or(cfg.seed).unwrap_or(0))?.entries
                }
            };
            let ev = eigenvalues(&m)?;
            emit(a.out.or(cfg.out).as_deref(), stdout, &eigenvalues_to_csv(&ev))?;
            ok(json!({"n": n, "min": ev[0], "max": ev[ev.len() - 1]}))
        }
        Command::Compare(a) => {
            let mu = read_measure(&required(a.a.or(cfg.a), "a")?)?;
            let nu = read_measure(&required(a.b.or(cfg.b), "b")?)?;
            let metric = a.metric.or(cfg.metric).unwrap_or_else(|| "ks".into());
            let v = match metric.as_str() {
                "ks" => ks_distance(&mu, &nu),
                "w1" => wasserstein(&mu, &nu, 1)?,
                "w2" => wasserstein(&mu, &nu, 2)?,
                "d" => metric_d(&mu, &nu),
                other => return Err(Error::Parse(format!("unknown metric {other:?}"))),
            };
            emit(a.out.or(cfg.out).as_deref(), stdout, &format!("{v}\n"))?;
            ok(json!({"metric": metric, "value": v}))
        }
        Command::Cutnorm(a) => {
            let w = read_kernel(required(a.kernel.or(cfg.kernel), "kernel")?)?;
            let w2 = a.kernel2.or(cfg.kernel2).map(read_kernel).transpose()?;
            let seed = a.seed.or(cfg.seed).unwrap_or(0);
            let mode = a.mode.or(cfg.mode).unwrap_or_else(|| "exact".into());
            let body = if a.distance {
                let other = w2.ok_or_else(|| Error::Parse("--distance needs --kernel2".into()))?;
                let m = match mode.as_str() {
                    "exact" => CutDistanceMode::Exact,
                    "anneal" => CutDistanceMode::Anneal { seed },
                    o => return Err(Error::Parse(format!("unknown cut distance mode {o:?}"))),
                };
                let d = cut_distance(w.as_function(), other.as_function(), m)?;
                json!({"value": d.value, "exact": d.exact, "permutation": d.permutation})
            } else {
                let m = match mode.as_str() {
                    "exact" => CutNormMode::Exact,
                    "heuristic" => CutNormMode::Heuristic { restarts: 32, seed },
                    o => return Err(Error::Parse(format!("unknown cut norm mode {o:?}"))),
                };
                let f = match &w2 {
                    Some(o) => w.as_function().difference(o.as_function()),
                    None => w.as_function().clone(),
                };
                let c = cut_norm(&f, m)?;
                json!({"value": c.value, "exact": c.exact})
            };
            emit(a.out.or(cfg.out).as_deref(), stdout, &(body.to_string() + "\n"))?;
            ok(body)
        }
        Command::Verify(a) => {
            let name = a.suite.or(cfg.suite).unwrap_or_else(|| "all".into());
            let suites = if name == "all" {
                vec![Suite::Identities, Suite::Inequalities, Suite::Oracles]
            } else {
                vec![Suite::parse(&name)?]
            };
            let seed = a.seed.or(cfg.seed).unwrap_or(0);
            let trials = a.trials.or(cfg.trials).unwrap_or(100);
            let reports = suites.into_iter().map(|s| run_suite(s, trials, seed)).collect::<Result<Vec<_>>>()?;
            let failed = reports.iter().any(|r| !r.passed());
            let failures: usize = reports.iter().flat_map(|r| &r.checks).map(|c| c.failures).sum();
            emit(a.out.or(cfg.out).as_deref(), stdout, &(serde_json::to_string(&reports)? + "\n"))?;
            Ok(Outcome {
                summary: json!({"suite": name, "seed": seed, "trials": trials, "failures": failures}),
                failed,
            })
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::QveSolve(_) => "qve-solve",
        Command::QveMeasure(_) => "qve-measure",
        Command::Moments(_) => "moments",
        Command::Rate(_) => "rate",
        Command::KAlpha(_) => "k-alpha",
        Command::Sample(_) => "sample",
        Command::Tilt(_) => "tilt",
        Command::Spectrum(_) => "spectrum",
        Command::Compare(_) => "compare",
        Command::Cutnorm(_) => "cutnorm",
        Command::Verify(_) => "verify",
    }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = stderr.write_all(text.as_bytes());
            } else {
                let _ = stdout.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let name = command_name(&cli.command);
    let cfg = match cli.config.as_deref().map(load_config).transpose() {
        Ok(c) => c.unwrap_or_default(),
        Err(e) => {
            let _ = writeln!(stderr, "{}", json!({"command": name, "status": "error", "error": e.to_string()}));
            return 2;
        }
    };
    match dispatch(cli.command, cfg, stdout) {
        Ok(o) => {
            let status = if o.failed { "failed" } else { "ok" };
            let _ = writeln!(stderr, "{}", json!({"command": name, "status": status, "result": o.summary}));
            i32::from(o.failed)
        }
        Err(e) => {
            let _ = writeln!(stderr, "{}", json!({"command": name, "status": "error", "error": e.to_string()}));
            2
        }
    }
}

fn load_config(path: &Path) -> Result<FileConfig> {
    Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
}
