use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "anh-spectra", version, about = "Spectra, zeta functions and Schatten classes of anharmonic oscillators q(D) + p(x)")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hermite–Galerkin eigenvalues with a convergence count.
    Eig(RunArgs),
    /// Spectral zeta value with tail completion and an error bar.
    Zeta(RunArgs),
    /// Eigenvalue counting function and its power-law exponent.
    Counting(RunArgs),
    /// Schatten-class verdicts for (1 + T)^{-gamma}.
    Schatten(RunArgs),
    /// Trace and singular values of a quantized decaying symbol.
    Trace(RunArgs),
    /// Order estimate and symbol-class membership of a polynomial symbol.
    VerifySymbol(RunArgs),
    /// Sampled checks of the metric axioms.
    VerifyMetric(RunArgs),
    /// Exact composition a(D) b(x) and its quantized comparison.
    Compose(RunArgs),
    /// Pipelines over a grid of group representation parameters.
    Group(RunArgs),
    /// Reruns the command stored in a manifest and compares output hashes.
    Replay(ReplayArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Eig(_) => "eig",
            Command::Zeta(_) => "zeta",
            Command::Counting(_) => "counting",
            Command::Schatten(_) => "schatten",
            Command::Trace(_) => "trace",
            Command::VerifySymbol(_) => "verify-symbol",
            Command::VerifyMetric(_) => "verify-metric",
            Command::Compose(_) => "compose",
            Command::Group(_) => "group",
            Command::Replay(_) => "replay",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GroupKind {
    Engel,
    Cartan,
    Heisenberg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

/// Flags shared by every computing subcommand. All fields are optional so
/// that a manifest records exactly what was given; defaults are applied by
/// the commands.
#[derive(Args, Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunArgs {
    /// Potential p(x) in x1..xn.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<String>,
    /// Kinetic symbol q(xi) in xi1..xin.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q0: Option<f64>,
    /// Shorthand for k = l = 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub harmonic: bool,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupKind>,
    /// Engel parameter (comma-separated list for sweeps).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub lambda: Vec<f64>,
    /// Engel parameter with --group, otherwise the operator power.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub mu: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub kappa: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub nu: Vec<f64>,

    /// Basis functions per axis.
    #[arg(long = "N")]
    #[serde(rename = "N", skip_serializing_if = "Option::is_none")]
    pub basis: Option<usize>,
    /// Basis increment of the convergence check.
    #[arg(long = "dN")]
    #[serde(rename = "dN", skip_serializing_if = "Option::is_none")]
    pub delta_n: Option<usize>,
    /// Relative tolerance of the convergence check.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Schatten exponents.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub r: Vec<f64>,
    /// Operator powers for Schatten verdicts.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub gamma: Vec<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[arg(long = "j-cut")]
    #[serde(rename = "j-cut", skip_serializing_if = "Option::is_none")]
    pub j_cut: Option<usize>,
    /// Plain partial sum without the model tail.
    #[arg(long = "no-tail")]
    #[serde(rename = "no-tail", skip_serializing_if = "is_false")]
    pub no_tail: bool,

    #[arg(long = "grid-L")]
    #[serde(rename = "grid-L", skip_serializing_if = "Option::is_none")]
    pub grid_l: Option<f64>,
    #[arg(long = "grid-M")]
    #[serde(rename = "grid-M", skip_serializing_if = "Option::is_none")]
    pub grid_m: Option<usize>,
    #[arg(long = "grid-Lxi")]
    #[serde(rename = "grid-Lxi", skip_serializing_if = "Option::is_none")]
    pub grid_lxi: Option<f64>,
    #[arg(long = "grid-Mxi")]
    #[serde(rename = "grid-Mxi", skip_serializing_if = "Option::is_none")]
    pub grid_mxi: Option<usize>,
    /// Quantization parameter: 0, 0.5 or 1.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    /// Write the quantized matrix as operator.bin (needs --out).
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub export: bool,

    /// Joint polynomial in x1..xn, xi1..xin.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub symbol: Option<String>,
    /// Real power applied to --symbol.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    /// Symbol order to test membership against.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    /// Highest derivative order in membership tests.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    /// Left factor of a composition, in xi only.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<String>,
    /// Right factor of a composition, in x only.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Replace the metric's x-exponent 1/k, producing a non-admissible metric.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distort: Option<f64>,

    /// Output directory; without it the main report goes to stdout.
    #[arg(long)]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Flat `key = value` file; command-line flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Args, Clone, Debug)]
pub struct ReplayArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Directory for the rerun; defaults to `replay/` next to the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Turns a config file into flags. Lines are `key = value`; `#` starts a
/// comment; boolean keys take `true` or `false`.
pub fn config_flags(text: &str) -> Result<Vec<String>, CliError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::invalid(format!("config line {}: expected key = value", i + 1)))?;
        let key = key.trim().trim_start_matches("--");
        let value = value.trim().trim_matches('"');
        if key.is_empty() {
            return Err(CliError::invalid(format!("config line {}: empty key", i + 1)));
        }
        if matches!(key, "config" | "out") {
            return Err(CliError::invalid(format!("config line {}: {key} is only accepted as a flag", i + 1)));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            _ => out.push(format!("--{key}={value}")),
        }
    }
    Ok(out)
}

/// Splices the flags of a `--config` file in front of the command-line flags
/// so that the latter win.
pub fn expand_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let mut path: Option<String> = None;
    for (i, a) in argv.iter().enumerate() {
        if let Some(p) = a.strip_prefix("--config=") {
            path = Some(p.to_string());
        } else if a == "--config" {
            path = argv.get(i + 1).cloned();
        }
    }
    let Some(path) = path else {
        return Ok(argv);
    };
    if argv.len() < 2 {
        return Ok(argv);
    }
    let text = std::fs::read_to_string(Path::new(&path))
        .map_err(|e| CliError::invalid(format!("cannot read config {path}: {e}")))?;
    let mut merged = argv[..2].to_vec();
    merged.extend(config_flags(&text)?);
    merged.extend(argv[2..].iter().cloned());
    Ok(merged)
}

impl RunArgs {
    /// Operator powers: `--gamma`, or `--mu` when no group is selected.
    pub fn powers(&self) -> Vec<f64> {
        if !self.gamma.is_empty() {
            self.gamma.clone()
        } else if self.group.is_none() {
            self.mu.clone()
        } else {
            Vec::new()
        }
    }
}
