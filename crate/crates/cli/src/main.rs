// SPDX-License-Identifier: Apache-2.0

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;

use std::fmt;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use bandslice::band_solver::inertia;
use bandslice::driver::{solve_interval, solve_one, solve_sequence, PipelineConfig};
use bandslice::layout::{
    gather_band_to_compact, naive_redistribute, redistribute_1d_to_2d, redistribute_2d_to_1d,
    BlockCyclicLayout, Execution, Irregular1DLayout, ProcessGrid,
};
use bandslice::linalg::io::{load_matrix, read_raw, write_raw, MatrixFormat};
use bandslice::linalg::{
    accuracy_report, perturb_sequence, random_hermitian, raw_residuals, BandedHermitian,
    DenseHermitian, EigenPairs,
};
use bandslice::partition::{SpectrumPartition, DEFAULT_ALPHA};
use bandslice::C64;
use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use config::PipelineArgs;

#[derive(Parser)]
#[command(
    name = "bandslice",
    version,
    about = "Spectrum-slicing Hermitian eigensolver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Smallest eigenpairs of one matrix (.mtx or raw binary).
    Solve {
        matrix: PathBuf,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// Write eigenvalues here instead of stdout.
        #[arg(long, value_name = "FILE")]
        values: Option<PathBuf>,
        /// Write eigenvectors as raw binary.
        #[arg(long, value_name = "FILE")]
        vectors: Option<PathBuf>,
        /// Solve for the eigenvalues in (lower, upper] instead (experimental).
        #[arg(long, allow_hyphen_values = true, requires = "upper")]
        lower: Option<f64>,
        #[arg(long, allow_hyphen_values = true, requires = "lower")]
        upper: Option<f64>,
        /// No report on stderr.
        #[arg(short, long)]
        quiet: bool,
    },
    /// Sequence of related matrices, each step warm-started from the last.
    Scf {
        /// Matrices of the sequence, in order.
        files: Vec<PathBuf>,
        /// Synthesize the sequence by perturbing a base matrix.
        #[arg(long, num_args = 3, value_names = ["STEPS", "TAU", "SEED"], conflicts_with = "files")]
        synthesize: Option<Vec<String>>,
        /// Base matrix for --synthesize; random when omitted.
        #[arg(long, value_name = "FILE", requires = "synthesize")]
        base: Option<PathBuf>,
        /// Dimension of the random base matrix.
        #[arg(long, default_value_t = 200)]
        n: usize,
        /// Random base matrix is real symmetric.
        #[arg(long)]
        real: bool,
        #[command(flatten)]
        pipeline: PipelineArgs,
        /// One CSV summary row per step instead of the text reports.
        #[arg(long)]
        csv: bool,
    },
    /// Slice boundaries from a file of eigenvalue estimates.
    Partition {
        values: PathBuf,
        #[arg(short, long, default_value_t = config::DEFAULT_SLICES)]
        k: usize,
        /// Use only the nev smallest values (default: all).
        #[arg(long)]
        nev: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        beta: f64,
    },
    /// Number of eigenvalues below a shift.
    Inertia {
        matrix: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        shift: f64,
        /// Semibandwidth to read the matrix with (default: its own).
        #[arg(long)]
        bw: Option<usize>,
    },
    /// Traffic of the layout redistributions as CSV.
    RedistributeBench {
        #[arg(long, default_value_t = 256)]
        rows: usize,
        /// Total columns, split at random over the ranks.
        #[arg(long)]
        cols: Option<usize>,
        /// Explicit per-rank column counts, comma separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "cols")]
        counts: Option<Vec<usize>>,
        #[arg(short, long, default_value_t = 2)]
        p: usize,
        #[arg(short, long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = 64)]
        nb: usize,
        /// Fraction of ranks given no columns by the random split.
        #[arg(long, default_value_t = 0.3)]
        zero_frac: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also gather a band matrix of this semibandwidth.
        #[arg(long)]
        bandwidth: Option<usize>,
        /// Run ranks on worker threads.
        #[arg(long)]
        threaded: bool,
    },
    /// Accuracy of stored eigenpairs against a matrix.
    Report {
        matrix: PathBuf,
        #[arg(long, value_name = "FILE")]
        values: PathBuf,
        #[arg(long, value_name = "FILE")]
        vectors: PathBuf,
        #[arg(long)]
        csv: bool,
    },
}

/// Bad input on the command line or in a config file; exits with status 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()).into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("usage error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::Solve {
            matrix,
            pipeline,
            values,
            vectors,
            lower,
            upper,
            quiet,
        } => solve(&matrix, &pipeline, values, vectors, lower.zip(upper), quiet),
        Command::Scf {
            files,
            synthesize,
            base,
            n,
            real,
            pipeline,
            csv,
        } => scf(files, synthesize, base, n, real, &pipeline, csv),
        Command::Partition {
            values,
            k,
            nev,
            alpha,
            beta,
        } => partition(&values, k, nev, alpha, beta),
        Command::Inertia { matrix, shift, bw } => {
            let a = load(&matrix)?;
            let bw = bw.unwrap_or_else(|| a.bandwidth()).max(1);
            let d =
                BandedHermitian::from_dense(a.data(), bw).map_err(|e| UsageError(e.to_string()))?;
            let c = inertia(&d, shift);
            if c.perturbed {
                log::warn!("shift lies on an eigenvalue; counted at {}", c.shift);
            }
            println!("{} below", c.n_neg);
            Ok(())
        }
        Command::RedistributeBench {
            rows,
            cols,
            counts,
            p,
            q,
            nb,
            zero_frac,
            seed,
            bandwidth,
            threaded,
        } => {
            let exec = if threaded {
                Execution::Threaded
            } else {
                Execution::Sequential
            };
            bench(
                rows,
                cols,
                counts,
                (p, q),
                nb,
                zero_frac,
                seed,
                bandwidth,
                exec,
            )
        }
        Command::Report {
            matrix,
            values,
            vectors,
            csv,
        } => report(&matrix, &values, &vectors, csv),
    }
}

fn load(path: &Path) -> Result<DenseHermitian> {
    load_matrix(path, MatrixFormat::from_path(path))
        .with_context(|| format!("loading {}", path.display()))
}

/// Config checks that depend on the matrix size are usage errors too.
fn check_config(cfg: &PipelineConfig, n: usize) -> Result<()> {
    cfg.validate(n)
        .map_err(|e| UsageError(e.to_string()).into())
}

fn solve(
    matrix: &Path,
    args: &PipelineArgs,
    values: Option<PathBuf>,
    vectors: Option<PathBuf>,
    interval: Option<(f64, f64)>,
    quiet: bool,
) -> Result<()> {
    let mut args = args.clone();
    if interval.is_some() && args.nev.is_none() {
        // the interval replaces nev
        args.nev = Some(1);
    }
    let cfg = args.resolve().map_err(UsageError)?;
    let a = load(matrix)?;
    match interval {
        Some((lo, hi)) if !(lo < hi) => return usage(format!("empty interval ({lo}, {hi}]")),
        Some(_) => check_config(
            &PipelineConfig {
                nev: a.n(),
                ..cfg.clone()
            },
            a.n(),
        )?,
        None => check_config(&cfg, a.n())?,
    }
    let sol = match interval {
        Some((lo, hi)) => solve_interval(&a, lo, hi, &cfg, None),
        None => solve_one(&a, &cfg, None),
    }
    .context("solve failed")?;
    if !quiet {
        output::write_step(&mut io::stderr().lock(), &sol.report)?;
    }
    match values {
        Some(path) => {
            let mut w = BufWriter::new(fs::File::create(&path)?);
            output::write_values(&mut w, &sol.pairs.values)?;
            w.flush()?;
        }
        None => output::write_values(&mut io::stdout().lock(), &sol.pairs.values)?,
    }
    if let Some(path) = vectors {
        let v = &sol.pairs.vectors;
        let real = v.iter().all(|z| z.im == 0.0);
        write_raw(&path, v, real).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn scf(
    files: Vec<PathBuf>,
    synthesize: Option<Vec<String>>,
    base: Option<PathBuf>,
    n: usize,
    real: bool,
    args: &PipelineArgs,
    csv: bool,
) -> Result<()> {
    let mut cfg = args.resolve().map_err(UsageError)?;
    let matrices = match synthesize {
        Some(args) => {
            let steps: usize = args[0]
                .parse()
                .map_err(|_| UsageError(format!("STEPS must be a count, got {:?}", args[0])))?;
            let tau: f64 = args[1]
                .parse()
                .ok()
                .filter(|t: &f64| *t >= 0.0)
                .ok_or_else(|| UsageError(format!("TAU must be >= 0, got {:?}", args[1])))?;
            let seed: u64 = args[2]
                .parse()
                .map_err(|_| UsageError(format!("SEED must be an integer, got {:?}", args[2])))?;
            if steps == 0 {
                return usage("STEPS must be positive");
            }
            cfg.tau = tau;
            let a = match base {
                Some(path) => load(&path)?,
                None if n == 0 => return usage("--n must be positive"),
                None => random_hermitian(n, seed, real),
            };
            perturb_sequence(&a, tau, steps, seed)
        }
        None if files.is_empty() => {
            return usage("give matrix files or --synthesize STEPS TAU SEED")
        }
        None => files.iter().map(|f| load(f)).collect::<Result<Vec<_>>>()?,
    };
    for a in &matrices {
        check_config(&cfg, a.n())?;
    }
    let sols = solve_sequence(&matrices, &cfg).context("sequence solve failed")?;
    let mut out = io::stdout().lock();
    if csv {
        let reports: Vec<_> = sols.iter().map(|s| &s.report).collect();
        output::write_steps_csv(out, &reports)?;
    } else {
        for s in &sols {
            output::write_step(&mut out, &s.report)?;
        }
    }
    Ok(())
}

fn partition(path: &Path, k: usize, nev: Option<usize>, alpha: f64, beta: f64) -> Result<()> {
    let mut values = output::read_values(path)?;
    if values.is_empty() {
        return usage(format!("{} holds no values", path.display()));
    }
    if k == 0 {
        return usage("k must be positive");
    }
    values.sort_by(f64::total_cmp);
    let nev = nev.unwrap_or(values.len());
    if nev == 0 || nev > values.len() {
        return usage(format!("nev must be in 1..={}", values.len()));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    let rel = |x: f64| if x != 0.0 { x.abs() } else { scale };
    let b0 = values[0] - beta.abs() * rel(values[0]);
    let top = values[nev - 1];
    let bk = top + alpha.abs() * rel(top);
    let p = SpectrumPartition::from_priors(&values, b0, bk, k)?;
    println!("interval {b0:.12e} {bk:.12e}");
    for i in 0..p.k() {
        let (lo, hi) = p.slice(i);
        println!("slice {i} {lo:.12e} {hi:.12e} {}", p.counts[i]);
    }
    Ok(())
}

fn random_counts(ranks: usize, cols: usize, zero_frac: f64, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut active: Vec<usize> = (0..ranks).filter(|_| !rng.random_bool(zero_frac)).collect();
    if active.is_empty() {
        active.push(rng.random_range(0..ranks));
    }
    let mut counts = vec![0; ranks];
    for _ in 0..cols {
        counts[active[rng.random_range(0..active.len())]] += 1;
    }
    counts
}

#[allow(clippy::too_many_arguments)]
fn bench(
    rows: usize,
    cols: Option<usize>,
    counts: Option<Vec<usize>>,
    (p, q): (usize, usize),
    nb: usize,
    zero_frac: f64,
    seed: u64,
    bandwidth: Option<usize>,
    exec: Execution,
) -> Result<()> {
    let grid = ProcessGrid::new(p, q).map_err(|e| UsageError(e.to_string()))?;
    if rows == 0 || nb == 0 || !(0.0..1.0).contains(&zero_frac) {
        return usage("rows and nb must be positive and zero-frac in [0, 1)");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = match counts {
        Some(c) if c.len() != grid.size() => {
            return usage(format!("--counts needs {} entries", grid.size()))
        }
        Some(c) => c,
        None => random_counts(grid.size(), cols.unwrap_or(rows), zero_frac, &mut rng),
    };
    let total: usize = counts.iter().sum();
    let x = DMatrix::<C64>::from_fn(rows, total, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let oned = Irregular1DLayout::from_matrix(&x, &counts)?;
    let (twod, fwd) = redistribute_1d_to_2d(&oned, grid, nb, exec)?;
    let (naive, naive_traffic) = naive_redistribute(&oned, grid, nb)?;
    if twod.gather() != naive.gather() {
        bail!("two-phase and naive redistribution disagree");
    }
    let (back, rev) = redistribute_2d_to_1d(&twod, &counts, exec)?;
    if back.to_matrix() != x {
        bail!("round trip changed the matrix");
    }
    let band_traffic = match bandwidth {
        Some(bw) => {
            let mut a = random_hermitian(rows, seed, false).into_inner();
            for j in 0..rows {
                for i in 0..rows {
                    if i.abs_diff(j) > bw {
                        a[(i, j)] = C64::new(0.0, 0.0);
                    }
                }
            }
            let dist = BlockCyclicLayout::distribute(&a, nb, nb, grid)?;
            Some(gather_band_to_compact(&dist, bw, exec)?.1)
        }
        None => None,
    };
    let mut rows_out = vec![
        ("1d-to-2d", &fwd),
        ("2d-to-1d", &rev),
        ("naive", &naive_traffic),
    ];
    if let Some(t) = &band_traffic {
        rows_out.push(("band-gather", t));
    }
    output::write_traffic_csv(io::stdout().lock(), &rows_out)
}

fn report(matrix: &Path, values: &Path, vectors: &Path, csv: bool) -> Result<()> {
    let a = load(matrix)?;
    let values = output::read_values(values)?;
    let vectors = read_raw(vectors).with_context(|| format!("loading {}", vectors.display()))?;
    if vectors.nrows() != a.n() || vectors.ncols() != values.len() {
        bail!(
            "vectors are {}x{}, expected {}x{}",
            vectors.nrows(),
            vectors.ncols(),
            a.n(),
            values.len()
        );
    }
    let pairs = EigenPairs { values, vectors };
    let acc = accuracy_report(&a, &pairs);
    let raw = raw_residuals(a.data(), &pairs);
    let mut out = io::stdout().lock();
    if csv {
        let mut w = ::csv::Writer::from_writer(out);
        w.write_record(["index", "value", "residual", "raw_residual"])?;
        for (i, v) in pairs.values.iter().enumerate() {
            w.write_record([
                i.to_string(),
                format!("{v:.16e}"),
                format!("{:.6e}", acc.per_pair_residuals[i]),
                format!("{:.6e}", raw[i]),
            ])?;
        }
        w.flush()?;
        return Ok(());
    }
    writeln!(
        out,
        "{:>6} {:>24} {:>12} {:>12}",
        "index", "value", "residual", "raw"
    )?;
    for (i, v) in pairs.values.iter().enumerate() {
        writeln!(
            out,
            "{i:>6} {v:>24.16e} {:>12.3e} {:>12.3e}",
            acc.per_pair_residuals[i], raw[i]
        )?;
    }
    writeln!(
        out,
        "pairs {} orth {:.3e} max residual {:.3e} (raw {:.3e})",
        pairs.count(),
        acc.orth,
        acc.max_residual,
        acc.max_raw_residual
    )?;
    Ok(())
}
