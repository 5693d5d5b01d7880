//! Command-line front end: estimate spectra from single-column CSV series,
//! simulate processes with known autocovariances, and run bandwidth-scaling
//! experiments. All numeric output uses 17 significant digits so files
//! round-trip losslessly, and every command is deterministic given its
//! inputs and seeds.
//!
//! Exit codes are fixed for scripting:
//!   0  success
//!   2  unreadable/unparseable input or an invalid config/model/experiment spec
//!   3  degenerate data (constant series, too few observations for the rule)
//!   4  simulation failure (embedding breakdown, too many failed replicates)
//!   5  experiment quality gate (excess capped selections, degenerate fit)

use clap::{Args, Parser, Subcommand};
use flattop::{
    clip_nonnegative, estimate_auto, sample_autocovariance_fast, simulate_gaussian,
    threshold, AcfModel, ExperimentConfig, FrequencyGrid, RuleConfig, TimeSeries,
};
use serde::Deserialize;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "flattop", version, about = "Flat-top lag-window spectral estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample autocovariances and autocorrelations of a series
    Acf {
        /// Single-column CSV of observations (optional header line)
        input: PathBuf,
        /// Largest lag to compute (default: series length - 1)
        #[arg(long)]
        max_lag: Option<usize>,
        #[command(flatten)]
        rule: RuleFlags,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Spectral density estimate with automatic bandwidth selection
    Estimate {
        /// Single-column CSV of observations (optional header line)
        input: PathBuf,
        /// Number of frequency grid points (default 512)
        #[arg(long)]
        grid: Option<usize>,
        /// Evaluate on [-pi, pi] instead of [0, pi]
        #[arg(long)]
        full_range: bool,
        /// Replace negative density values with zero
        #[arg(long)]
        clip: bool,
        #[command(flatten)]
        rule: RuleFlags,
        #[command(flatten)]
        common: CommonFlags,
    },
    /// Draw a Gaussian series with the autocovariance of a model spec
    Simulate {
        /// JSON model spec ({"kind": "exponential" | "polynomial" | "cutoff" | "arma", ...})
        spec: PathBuf,
        /// Series length
        #[arg(long)]
        n: usize,
        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Autocovariance truncation lag (default 1024)
        #[arg(long)]
        l_max: Option<usize>,
        /// Output file (default: stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo sweep of the bandwidth rule across sample sizes
    Experiment {
        /// JSON experiment spec (model, n_values, replicates, seed_base, law, ...)
        spec: PathBuf,
        /// Directory for replicates.csv, summary.csv, fit.json (default: .)
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

/// Selection-rule knobs shared by `acf` and `estimate`; flags override
/// values from --config, which override the defaults.
#[derive(Args)]
struct RuleFlags {
    /// Threshold constant c in c * sqrt(ln n / n)
    #[arg(long)]
    c_thresh: Option<f64>,
    /// Consecutive sub-threshold lags required by the scan
    #[arg(long)]
    k_n: Option<usize>,
    /// Flat-top fraction of the window (bandwidth = ceil(m / c_break))
    #[arg(long)]
    c_break: Option<f64>,
    /// Upper bound on the scanned cutoff
    #[arg(long)]
    max_m: Option<usize>,
}

#[derive(Args)]
struct CommonFlags {
    /// JSON config file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file (default: stdout)
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Flat key-value config file. Every key is optional; command-line flags win.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    c_thresh: Option<f64>,
    k_n: Option<usize>,
    c_break: Option<f64>,
    max_m: Option<usize>,
    max_lag: Option<usize>,
    grid: Option<usize>,
    full_range: Option<bool>,
    clip: Option<bool>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: String) -> Self {
        Failure { code: 2, message }
    }
}

impl From<flattop::Error> for Failure {
    fn from(err: flattop::Error) -> Self {
        use flattop::Error::*;
        let code = match err {
            // the data cannot support the statistic
            ConstantSeries | InsufficientLags { .. } => 3,
            // the sampler could not honor the request
            EmbeddingFailure { .. } | TooManyFailures { .. } => 4,
            // the experiment ran but its output fails the quality gate
            ExcessCapped { .. } | DegenerateFit(_) => 5,
            // everything else is a bad input or spec
            LagOutOfRange { .. } | InvalidBreakpoint(_) | DegenerateModel(_) | NonStationary
            | InvalidConfig(_) | NonFinite(_) => 2,
        };
        Failure {
            code,
            message: err.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Acf {
            input,
            max_lag,
            rule,
            common,
        } => cmd_acf(&input, max_lag, rule, common),
        Command::Estimate {
            input,
            grid,
            full_range,
            clip,
            rule,
            common,
        } => cmd_estimate(&input, grid, full_range, clip, rule, common),
        Command::Simulate {
            spec,
            n,
            seed,
            l_max,
            out,
        } => cmd_simulate(&spec, n, seed, l_max, out),
        Command::Experiment { spec, out_dir } => cmd_experiment(&spec, &out_dir),
    }
}

/// Reads a single numeric column. Blank lines are ignored; one leading
/// non-numeric line is treated as a header; any later non-numeric line is an
/// error. The decimal separator is always '.'.
fn read_series(path: &Path) -> Result<Vec<f64>, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let mut values = Vec::new();
    let mut header_skipped = false;
    for (index, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) => {
                if values.is_empty() && !header_skipped {
                    header_skipped = true;
                    continue;
                }
                return Err(Failure::input(format!(
                    "{}:{}: not a number: {line:?}",
                    path.display(),
                    index + 1
                )));
            }
        }
    }
    if values.is_empty() {
        return Err(Failure::input(format!(
            "{}: no numeric data",
            path.display()
        )));
    }
    Ok(values)
}

fn load_file_config(path: Option<&Path>) -> Result<FileConfig, Failure> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn merge_rule(flags: &RuleFlags, file: &FileConfig) -> Result<RuleConfig, Failure> {
    let defaults = RuleConfig::default();
    let rule = RuleConfig {
        c_thresh: flags.c_thresh.or(file.c_thresh).unwrap_or(defaults.c_thresh),
        k_n: flags.k_n.or(file.k_n).unwrap_or(defaults.k_n),
        c_break: flags.c_break.or(file.c_break).unwrap_or(defaults.c_break),
        max_m: flags.max_m.or(file.max_m),
    };
    rule.validate()?;
    Ok(rule)
}

fn write_output(out: Option<&Path>, content: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn warn_on_lookahead(rule: &RuleConfig, n: usize) {
    if rule.lookahead_warning(n) {
        eprintln!(
            "warning: lookahead k_n = {} is not small next to ln({n}) = {:.2}; \
             the scan may never find that many quiet lags",
            rule.k_n,
            (n as f64).ln()
        );
    }
}

fn cmd_acf(
    input: &Path,
    max_lag: Option<usize>,
    rule_flags: RuleFlags,
    common: CommonFlags,
) -> Result<(), Failure> {
    let file = load_file_config(common.config.as_deref())?;
    let rule = merge_rule(&rule_flags, &file)?;
    let values = read_series(input)?;
    let series = TimeSeries::new(values)?;
    let n = series.len();
    let lags = max_lag.or(file.max_lag).unwrap_or(n - 1);
    let acf = sample_autocovariance_fast(&series, lags)?;
    let t = threshold(n, rule.c_thresh);
    warn_on_lookahead(&rule, n);

    let mut out = String::with_capacity(64 * (lags + 2));
    out.push_str("lag,gamma,rho,threshold\n");
    for k in 0..=lags {
        writeln!(
            out,
            "{k},{:.16e},{:.16e},{:.16e}",
            acf.gamma()[k],
            acf.rho()[k],
            t
        )
        .expect("string write");
    }
    write_output(common.out.as_deref(), &out)
}

fn cmd_estimate(
    input: &Path,
    grid: Option<usize>,
    full_range: bool,
    clip: bool,
    rule_flags: RuleFlags,
    common: CommonFlags,
) -> Result<(), Failure> {
    let file = load_file_config(common.config.as_deref())?;
    let rule = merge_rule(&rule_flags, &file)?;
    let grid_points = grid.or(file.grid).unwrap_or(512);
    let full_range = full_range || file.full_range.unwrap_or(false);
    let clip = clip || file.clip.unwrap_or(false);

    let values = read_series(input)?;
    let series = TimeSeries::new(values)?;
    let n = series.len();
    let grid = if full_range {
        FrequencyGrid::symmetric(grid_points)?
    } else {
        FrequencyGrid::half_line(grid_points)?
    };
    warn_on_lookahead(&rule, n);
    let (selection, spectrum) = estimate_auto(&series, &rule, &grid)?;
    if selection.capped {
        eprintln!(
            "warning: no cutoff satisfied the scan; bandwidth capped at M = {}",
            selection.bandwidth
        );
    }
    let spectrum = if clip {
        clip_nonnegative(&spectrum)
    } else {
        spectrum
    };

    let mut out = String::with_capacity(48 * (grid.len() + 2));
    writeln!(
        out,
        "# {{\"N\":{n},\"m_hat\":{},\"M_hat\":{},\"threshold\":{:.16e},\
         \"c_thresh\":{:.16e},\"k_n\":{},\"c_break\":{:.16e},\"capped\":{}}}",
        selection.m_hat,
        selection.bandwidth,
        selection.threshold,
        rule.c_thresh,
        rule.k_n,
        rule.c_break,
        selection.capped
    )
    .expect("string write");
    out.push_str("omega,f_hat\n");
    for (omega, value) in spectrum.points() {
        writeln!(out, "{omega:.16e},{value:.16e}").expect("string write");
    }
    write_output(common.out.as_deref(), &out)
}

fn load_model(path: &Path) -> Result<AcfModel, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let model: AcfModel = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    model.validate()?;
    Ok(model)
}

fn cmd_simulate(
    spec: &Path,
    n: usize,
    seed: u64,
    l_max: Option<usize>,
    out: Option<PathBuf>,
) -> Result<(), Failure> {
    let model = load_model(spec)?;
    let acf = model.realize(l_max.unwrap_or(1024))?;
    let series = simulate_gaussian(&acf, n, seed)?;
    let mut content = String::with_capacity(25 * n);
    for x in series.values() {
        writeln!(content, "{x:.16e}").expect("string write");
    }
    write_output(out.as_deref(), &content)
}

fn cmd_experiment(spec: &Path, out_dir: &Path) -> Result<(), Failure> {
    let text = fs::read_to_string(spec)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", spec.display())))?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("{}: {e}", spec.display())))?;
    let result = flattop::run_experiment(&config)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }

    fs::create_dir_all(out_dir)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut replicates = String::from("n,index,seed,m_hat,bandwidth,capped\n");
    for cell in &result.cells {
        for r in &cell.outcomes {
            writeln!(
                replicates,
                "{},{},{},{},{},{}",
                cell.n, r.index, r.seed, r.m_hat, r.bandwidth, r.capped
            )
            .expect("string write");
        }
        for f in &cell.failures {
            eprintln!(
                "warning: replicate {} (seed {}) at n = {} failed: {}",
                f.index, f.seed, cell.n, f.message
            );
        }
    }

    let mut summary =
        String::from("n,median_m_hat,median_bandwidth,oracle_m_hat,oracle_bandwidth,capped_fraction\n");
    for cell in &result.cells {
        writeln!(
            summary,
            "{},{},{},{},{},{:.16e}",
            cell.n,
            cell.median_m_hat,
            cell.median_bandwidth,
            cell.oracle_m_hat,
            cell.oracle_bandwidth,
            cell.capped_fraction
        )
        .expect("string write");
    }

    let mut fit_json = serde_json::to_string_pretty(&result.fit)
        .map_err(|e| Failure::input(format!("cannot encode fit: {e}")))?;
    fit_json.push('\n');

    for (name, content) in [
        ("replicates.csv", replicates.as_str()),
        ("summary.csv", summary.as_str()),
        ("fit.json", fit_json.as_str()),
    ] {
        let path = out_dir.join(name);
        fs::write(&path, content)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}
