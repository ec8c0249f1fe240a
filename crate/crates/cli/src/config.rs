// SPDX-License-Identifier: Apache-2.0

//! `key = value` configuration files and the command-line flags that
//! override them. Keys are the [`PipelineConfig`] field names; dashes and
//! underscores are interchangeable.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bandslice::driver::PipelineConfig;
use clap::Args;

/// Pipeline settings shared by `solve` and `scf`.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineArgs {
    /// Read settings from a key=value file; flags take precedence.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Number of smallest eigenpairs.
    #[arg(long)]
    pub nev: Option<usize>,
    /// Number of spectral slices.
    #[arg(short, long)]
    pub k: Option<usize>,
    /// Semibandwidth of the intermediate band matrix.
    #[arg(long)]
    pub n_bw: Option<usize>,
    /// Block size of the simulated block-cyclic layout.
    #[arg(long)]
    pub n_b: Option<usize>,
    /// Quadrature nodes per slice (even).
    #[arg(long)]
    pub n_e: Option<usize>,
    /// Relative residual tolerance.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long)]
    pub grid_p: Option<usize>,
    #[arg(long)]
    pub grid_q: Option<usize>,
    /// Skip the simulated process grid.
    #[arg(long)]
    pub no_grid: bool,
    /// Solve every step of a sequence from scratch.
    #[arg(long)]
    pub no_warm_start: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Perturbation size for synthesized sequences.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Relative margin above the largest wanted prior eigenvalue.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    /// Relative margin below the smallest prior eigenvalue.
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub max_recovery_rounds: Option<usize>,
    /// Skip the final joint Rayleigh-Ritz step.
    #[arg(long)]
    pub no_polish: bool,
}

/// Default slice count when neither the file nor the flags give one.
pub const DEFAULT_SLICES: usize = 4;

impl PipelineArgs {
    /// Defaults, then the config file, then the flags. `nev` must come from
    /// one of the two.
    pub fn resolve(&self) -> Result<PipelineConfig, String> {
        let mut cfg = PipelineConfig::new(0, DEFAULT_SLICES);
        if let Some(path) = &self.config {
            load_file(path, &mut cfg)?;
        }
        macro_rules! set {
            ($($flag:ident => $field:expr),* $(,)?) => {
                $(if let Some(v) = self.$flag { $field = v; })*
            };
        }
        set! {
            nev => cfg.nev,
            k => cfg.k,
            n_bw => cfg.n_bw,
            n_b => cfg.n_b,
            n_e => cfg.n_e,
            tol => cfg.tol,
            max_iter => cfg.max_iter,
            grid_p => cfg.grid_p,
            grid_q => cfg.grid_q,
            seed => cfg.seed,
            tau => cfg.tau,
            alpha => cfg.bounds.alpha,
            beta => cfg.bounds.beta,
            max_recovery_rounds => cfg.max_recovery_rounds,
        }
        if self.no_grid {
            cfg.use_grid = false;
        }
        if self.no_warm_start {
            cfg.warm_start = false;
        }
        if self.no_polish {
            cfg.polish = false;
        }
        if cfg.nev == 0 {
            return Err("--nev is required (flag or config file)".into());
        }
        Ok(cfg)
    }
}

pub fn load_file(path: &Path, cfg: &mut PipelineConfig) -> Result<(), String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_into(&text, cfg).map_err(|e| format!("{}: {e}", path.display()))
}

/// Applies every `key = value` line of `text`. Blank lines and `#` comments
/// are skipped.
pub fn parse_into(text: &str, cfg: &mut PipelineConfig) -> Result<(), String> {
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", no + 1))?;
        set_key(cfg, key.trim(), value.trim()).map_err(|e| format!("line {}: {e}", no + 1))?;
    }
    Ok(())
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("invalid value {value:?} for {key}"))
}

fn set_key(cfg: &mut PipelineConfig, key: &str, value: &str) -> Result<(), String> {
    let k = key.replace('-', "_");
    match k.as_str() {
        "nev" => cfg.nev = parse(key, value)?,
        "k" => cfg.k = parse(key, value)?,
        "n_bw" => cfg.n_bw = parse(key, value)?,
        "n_b" => cfg.n_b = parse(key, value)?,
        "n_e" => cfg.n_e = parse(key, value)?,
        "tol" => cfg.tol = parse(key, value)?,
        "max_iter" => cfg.max_iter = parse(key, value)?,
        "grid_p" => cfg.grid_p = parse(key, value)?,
        "grid_q" => cfg.grid_q = parse(key, value)?,
        "use_grid" => cfg.use_grid = parse(key, value)?,
        "warm_start" => cfg.warm_start = parse(key, value)?,
        "seed" => cfg.seed = parse(key, value)?,
        "tau" => cfg.tau = parse(key, value)?,
        "alpha" => cfg.bounds.alpha = parse(key, value)?,
        "beta" => cfg.bounds.beta = parse(key, value)?,
        "max_attempts" => cfg.bounds.max_attempts = parse(key, value)?,
        "max_recovery_rounds" => cfg.max_recovery_rounds = parse(key, value)?,
        "polish" => cfg.polish = parse(key, value)?,
        _ => return Err(format!("unknown key {key:?}")),
    }
    Ok(())
}
