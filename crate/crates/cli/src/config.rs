use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "fgn-equiv",
    version,
    about = "Tables, checks and experiments for regression under fractional Gaussian noise"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Positive zeros of J_{1-H}: k, omega_k, omega_k/pi - k
    Zeros,
    /// Basis constants: k, omega_k, a_k, sigma_k
    Coeffs,
    /// Run the invariant suite and report every check
    Verify,
    /// Monte Carlo risk of the spectral cutoff estimator over an n grid
    Rates,
    /// Approximation diagnostics (i) and (ii) over an n grid
    Diagnose,
    /// Eigenvalue bounds of the fGN covariance matrix
    Bounds,
    /// Draw one fGN sample
    Simulate,
    /// Divergences of the two-point separation construction over an n grid
    Separation,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Zeros => "zeros",
            Command::Coeffs => "coeffs",
            Command::Verify => "verify",
            Command::Rates => "rates",
            Command::Diagnose => "diagnose",
            Command::Bounds => "bounds",
            Command::Simulate => "simulate",
            Command::Separation => "separation",
        }
    }

    fn stochastic(self) -> bool {
        matches!(self, Command::Verify | Command::Rates | Command::Simulate | Command::Diagnose)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Test function used by `diagnose`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FunctionKind {
    /// Random coefficients decaying like (1 + k)^{-alpha-1/2}
    Series,
    /// f = C
    Constant,
    /// f = 0
    Zero,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// key=value file; command-line flags override it
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Hurst index; `verify` accepts a comma-separated list
    #[arg(long, global = true, value_delimiter = ',')]
    pub hurst: Vec<f64>,
    #[arg(long, global = true)]
    pub n: Option<usize>,
    /// a:b:step or a:b:xF (geometric)
    #[arg(long = "n-grid", global = true)]
    pub n_grid: Option<String>,
    #[arg(long, short = 'K', global = true)]
    pub count: Option<usize>,
    #[arg(long, global = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true)]
    pub alpha: Option<f64>,
    #[arg(long = "ball-radius", global = true)]
    pub ball_radius: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    #[arg(long = "cutoff-const", global = true)]
    pub cutoff_const: Option<f64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Scale every a_k by (1 + eps); for testing the checks
    #[arg(long = "perturb-ak", global = true, hide = true)]
    pub perturb_ak: Option<f64>,
    #[arg(long, global = true, value_enum)]
    pub function: Option<FunctionKind>,
}

/// Fully merged settings of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub hurst: Vec<f64>,
    pub n: Option<usize>,
    pub n_grid: Option<Vec<usize>>,
    pub count: Option<usize>,
    pub beta: f64,
    pub alpha: f64,
    pub radius: f64,
    pub seed: Option<u64>,
    pub replicates: Option<usize>,
    pub cutoff_const: f64,
    pub out: Option<PathBuf>,
    pub format: Option<Format>,
    pub jobs: usize,
    pub perturb_ak: f64,
    pub function: FunctionKind,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            hurst: Vec::new(),
            n: None,
            n_grid: None,
            count: None,
            beta: 1.0,
            alpha: 1.0,
            radius: 1.0,
            seed: None,
            replicates: None,
            cutoff_const: 1.0,
            out: None,
            format: None,
            jobs: 1,
            perturb_ak: 0.0,
            function: FunctionKind::Series,
        }
    }

    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let file = match &cli.flags.config {
            Some(p) => read_config_file(p)?,
            None => BTreeMap::new(),
        };
        let mut flags = flags_from_map(&file)?;
        overlay(&mut flags, &cli.flags);
        let cfg = Self::from_flags(cli.command, &flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn from_flags(command: Command, f: &Flags) -> Result<Self, CliError> {
        let mut c = Self::new(command);
        c.hurst = f.hurst.clone();
        c.n = f.n;
        c.n_grid = f.n_grid.as_deref().map(parse_n_grid).transpose()?;
        c.count = f.count;
        c.beta = f.beta.unwrap_or(c.beta);
        c.alpha = f.alpha.unwrap_or(c.alpha);
        c.radius = f.ball_radius.unwrap_or(c.radius);
        c.seed = f.seed;
        c.replicates = f.replicates;
        c.cutoff_const = f.cutoff_const.unwrap_or(c.cutoff_const);
        c.out = f.out.clone();
        c.format = f.format;
        c.jobs = f.jobs.unwrap_or(c.jobs);
        c.perturb_ak = f.perturb_ak.unwrap_or(0.0);
        c.function = f.function.unwrap_or(c.function);
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        for h in &self.hurst {
            if !(*h > 0.0 && *h < 1.0) {
                return Err(CliError::Config(format!("--hurst must lie in (0, 1), got {h}")));
            }
        }
        if self.command != Command::Verify && self.hurst.len() > 1 {
            return Err(CliError::Config(format!("{} takes a single --hurst value", self.command.name())));
        }
        let positive = [("--n", self.n), ("--count", self.count), ("--replicates", self.replicates)];
        for (name, v) in positive {
            if v == Some(0) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if self.jobs == 0 {
            return Err(CliError::Config("--jobs must be positive".into()));
        }
        for (name, v) in [("--beta", self.beta), ("--cutoff-const", self.cutoff_const)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if !(self.radius >= 0.0 && self.radius.is_finite()) {
            return Err(CliError::Config("--ball-radius must be non-negative".into()));
        }
        if self.command.stochastic() && self.seed.is_none() {
            return Err(CliError::Config(format!("{} needs --seed", self.command.name())));
        }
        Ok(())
    }

    /// The single Hurst index of a non-`verify` command.
    pub fn one_hurst(&self) -> Result<f64, CliError> {
        match self.hurst.as_slice() {
            [h] => Ok(*h),
            [] => Err(CliError::Config(format!("{} needs --hurst", self.command.name()))),
            _ => Err(CliError::Config("expected a single --hurst value".into())),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.expect("validated")
    }

    pub fn grid_or(&self, default: &str) -> Vec<usize> {
        self.n_grid.clone().unwrap_or_else(|| parse_n_grid(default).expect("valid default grid"))
    }
}

fn overlay(base: &mut Flags, top: &Flags) {
    if !top.hurst.is_empty() {
        base.hurst = top.hurst.clone();
    }
    macro_rules! take {
        ($($f:ident),*) => {$(
            if top.$f.is_some() {
                base.$f = top.$f.clone();
            }
        )*};
    }
    take!(
        n,
        n_grid,
        count,
        beta,
        alpha,
        ball_radius,
        seed,
        replicates,
        cutoff_const,
        out,
        format,
        jobs,
        perturb_ak,
        function
    );
}

/// Parses `a:b:step` (arithmetic) or `a:b:xF` (geometric) into `a, ..., <= b`.
pub fn parse_n_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Config(format!("invalid n grid `{s}` (expected a:b:step or a:b:xF)"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let a: usize = parts[0].trim().parse().map_err(|_| bad())?;
    let b: usize = parts[1].trim().parse().map_err(|_| bad())?;
    if a == 0 || b < a {
        return Err(bad());
    }
    let step = parts[2].trim();
    let mut out = Vec::new();
    if let Some(f) = step.strip_prefix('x') {
        let f: usize = f.parse().map_err(|_| bad())?;
        if f < 2 {
            return Err(bad());
        }
        let mut v = a;
        while v <= b {
            out.push(v);
            v = v.checked_mul(f).ok_or_else(bad)?;
        }
    } else {
        let d: usize = step.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        out.extend((a..=b).step_by(d));
    }
    Ok(out)
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("config line {}: expected key = value", i + 1)))?;
        map.insert(k.trim().replace('_', "-"), v.trim().to_string());
    }
    Ok(map)
}

fn flags_from_map(map: &BTreeMap<String, String>) -> Result<Flags, CliError> {
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> Result<T, CliError> {
        v.parse().map_err(|_| CliError::Config(format!("config key {k}: cannot parse `{v}`")))
    }
    let mut f = Flags::default();
    for (k, v) in map {
        match k.as_str() {
            "hurst" => f.hurst = v.split(',').map(|x| num(k, x.trim())).collect::<Result<_, _>>()?,
            "n" => f.n = Some(num(k, v)?),
            "n-grid" => f.n_grid = Some(v.clone()),
            "count" | "k" => f.count = Some(num(k, v)?),
            "beta" => f.beta = Some(num(k, v)?),
            "alpha" => f.alpha = Some(num(k, v)?),
            "ball-radius" => f.ball_radius = Some(num(k, v)?),
            "seed" => f.seed = Some(num(k, v)?),
            "replicates" => f.replicates = Some(num(k, v)?),
            "cutoff-const" => f.cutoff_const = Some(num(k, v)?),
            "out" => f.out = Some(PathBuf::from(v)),
            "format" => {
                f.format =
                    Some(Format::from_str(v, true).map_err(|_| CliError::Config(format!("unknown format `{v}`")))?)
            }
            "jobs" => f.jobs = Some(num(k, v)?),
            "perturb-ak" => f.perturb_ak = Some(num(k, v)?),
            "function" => {
                f.function = Some(
                    FunctionKind::from_str(v, true).map_err(|_| CliError::Config(format!("unknown function `{v}`")))?,
                )
            }
            other => return Err(CliError::Config(format!("unknown config key `{other}`"))),
        }
    }
    Ok(f)
}
