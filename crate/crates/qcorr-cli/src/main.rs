//! Command-line front end for the qcorr toolkit: build states, analyze
//! them, run family sweeps, and reproduce the benchmark tables.
//!
//! Exit codes: 0 success, 1 failed table reproduction or I/O trouble,
//! 2 bad arguments or inputs, 3 numerical non-convergence, 4 violation
//! of a proved bound.

use std::io::Read as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use qcorr::bounds::{self, AnalysisOptions, SweepFamily};
use qcorr::matops::{Cut, Side};
use qcorr::states::{self, BipartiteState};
use qcorr::RunConfig;

#[derive(Parser)]
#[command(
    name = "qcorr",
    version,
    about = "Witnessed entanglement, geometric quantum discord, and the bounds between them"
)]
struct Cli {
    #[command(flatten)]
    run: RunArgs,

    /// Write the result here instead of stdout.
    #[arg(short, long, global = true, value_name = "PATH")]
    output: Option<PathBuf>,

    /// Output format; `csv` is available for sweeps only.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

/// Run-configuration knobs; flags override the config file, which
/// overrides the built-in defaults.
#[derive(Args)]
struct RunArgs {
    /// Seed for every randomized search.
    #[arg(long, global = true, env = "QCORR_SEED")]
    seed: Option<u64>,

    /// Restarts for the discord basis search.
    #[arg(long, global = true)]
    restarts: Option<usize>,

    /// Worker threads for restart loops (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Multiplier on every published-cell tolerance.
    #[arg(long, global = true)]
    tol_scale: Option<f64>,

    /// JSON file with the full run configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    A,
    B,
}

impl From<SideArg> for Side {
    fn from(side: SideArg) -> Side {
        match side {
            SideArg::A => Side::A,
            SideArg::B => Side::B,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build a state and print it as JSON ([re, im] entries, row-major).
    State {
        #[command(subcommand)]
        family: FamilySpec,

        /// Re-bipartition the state as AxB before printing.
        #[arg(long, global = true, value_parser = parse_cut, value_name = "AxB")]
        cut: Option<Cut>,
    },
    /// Compute quantifiers, witnesses, and bound margins for one state.
    ///
    /// With no quantifier flags this computes both discords and every
    /// analytic witness; passing any flag selects exactly the named set.
    Analyze {
        #[command(subcommand)]
        family: FamilySpec,

        /// Re-bipartition the state as AxB before analyzing.
        #[arg(long, global = true, value_parser = parse_cut, value_name = "AxB")]
        cut: Option<Cut>,

        #[command(flatten)]
        quantifiers: QuantifierFlags,
    },
    /// Analyze a one-parameter family over a grid of parameter values.
    Sweep {
        #[command(subcommand)]
        family: SweepFamilyArg,

        /// Evenly spaced grid, endpoints included.
        #[arg(
            long,
            global = true,
            allow_hyphen_values = true,
            value_name = "START:STOP:COUNT"
        )]
        grid: Option<String>,

        /// Explicit comma-separated parameter values.
        #[arg(
            long,
            global = true,
            allow_hyphen_values = true,
            value_delimiter = ',',
            value_name = "V1,V2,..."
        )]
        values: Option<Vec<f64>>,
    },
    /// Recompute the benchmark tables and grade every cell against its
    /// published value; exits 1 if any graded cell misses tolerance.
    ReproduceTables {
        /// Also emit the report-only robustness column of table 3.
        #[arg(long)]
        include_table3_rr: bool,
    },
}

#[derive(Subcommand, Clone)]
enum FamilySpec {
    /// Flip-expectation family on da x da; entangled for k < 0.
    Werner {
        #[arg(long)]
        da: usize,

        /// Flip expectation in [-1, 1].
        #[arg(long, allow_hyphen_values = true)]
        k: f64,
    },
    /// The 3x3 positive-partial-transpose entangled family, k in [0, 1].
    Horodecki {
        #[arg(long)]
        k: f64,
    },
    /// The tiles state on 4x4 (entangled with positive partial transpose).
    Upb {
        /// White-noise weight mixed into the state.
        #[arg(long, default_value_t = 0.0)]
        s: f64,
    },
    /// Maximally entangled state on d x d.
    MaxEntangled {
        #[arg(long)]
        d: usize,
    },
    /// Random full-rank state on an AxB cut, drawn from the run seed.
    Random {
        #[arg(long, value_parser = parse_cut, value_name = "AxB")]
        cut: Cut,
    },
    /// Load a state from a JSON file; pass "-" to read stdin.
    File { path: PathBuf },
}

impl FamilySpec {
    fn build(&self, config: &RunConfig) -> Result<BipartiteState, CliError> {
        Ok(match self {
            FamilySpec::Werner { da, k } => states::werner(*da, *k)?,
            FamilySpec::Horodecki { k } => states::horodecki_3x3(*k)?,
            FamilySpec::Upb { s } => {
                let base = states::upb_tiles_4x4()?;
                if *s == 0.0 {
                    base
                } else {
                    base.mix_with_noise(*s)?
                }
            }
            FamilySpec::MaxEntangled { d } => states::max_entangled(*d)?,
            FamilySpec::Random { cut } => states::random_state(*cut, config.seed)?,
            FamilySpec::File { path } => read_state(path)?,
        })
    }
}

#[derive(Subcommand, Clone, Copy)]
enum SweepFamilyArg {
    /// Flip-expectation family on da x da over the flip expectation k.
    Werner {
        #[arg(long)]
        da: usize,
    },
    /// The 3x3 bound entangled family over its parameter k.
    Horodecki,
    /// The tiles state mixed with white noise over the noise weight s.
    UpbMix,
}

impl From<SweepFamilyArg> for SweepFamily {
    fn from(arg: SweepFamilyArg) -> SweepFamily {
        match arg {
            SweepFamilyArg::Werner { da } => SweepFamily::Werner { d_a: da },
            SweepFamilyArg::Horodecki => SweepFamily::Horodecki,
            SweepFamilyArg::UpbMix => SweepFamily::UpbMix,
        }
    }
}

#[derive(Args, Clone)]
struct QuantifierFlags {
    /// Spectrum quantifiers and analytic witnesses only.
    #[arg(long, global = true)]
    negativity: bool,

    /// Trace-norm geometric discord.
    #[arg(long, global = true)]
    d1: bool,

    /// Hilbert-Schmidt geometric discord.
    #[arg(long, global = true)]
    d2: bool,

    /// Certified random robustness via the cutting plane (expensive).
    #[arg(long, global = true)]
    rr_certified: bool,

    /// Positive-partial-transpose relaxation of the generalized robustness.
    #[arg(long, global = true)]
    rg_ppt: bool,

    /// Schatten exponent for the general-p discord and bound (repeatable).
    #[arg(long = "p", global = true, value_name = "P")]
    p: Vec<f64>,

    /// Measured side for the discords (default: the smaller factor).
    #[arg(long, global = true, value_enum)]
    side: Option<SideArg>,
}

impl QuantifierFlags {
    fn to_options(&self) -> AnalysisOptions {
        let side = self.side.map(Side::from);
        let selected = self.negativity
            || self.d1
            || self.d2
            || self.rr_certified
            || self.rg_ppt
            || !self.p.is_empty();
        if selected {
            AnalysisOptions {
                d1: self.d1,
                d2: self.d2,
                side,
                rr_certified: self.rr_certified,
                rg_ppt: self.rg_ppt,
                general_p: self.p.clone(),
            }
        } else {
            AnalysisOptions {
                side,
                ..AnalysisOptions::default()
            }
        }
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error(transparent)]
    Lib(#[from] qcorr::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{count} benchmark cells out of tolerance")]
    TableMismatch { count: usize },
}

fn usage(message: impl Into<String>) -> CliError {
    CliError::Usage(message.into())
}

fn exit_code(error: &CliError) -> i32 {
    match error {
        CliError::Usage(_) | CliError::Json(_) => 2,
        CliError::Lib(qcorr::Error::NonConvergence { .. }) => 3,
        CliError::Lib(qcorr::Error::BoundViolation { .. }) => 4,
        CliError::Lib(_) => 2,
        CliError::Io(_) | CliError::TableMismatch { .. } => 1,
    }
}

fn parse_cut(text: &str) -> Result<Cut, String> {
    let (a, b) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected AxB, got {text}"))?;
    let d_a: usize = a.trim().parse().map_err(|_| format!("bad A factor in {text}"))?;
    let d_b: usize = b.trim().parse().map_err(|_| format!("bad B factor in {text}"))?;
    Cut::new(d_a, d_b).map_err(|e| e.to_string())
}

fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts[..] else {
        return Err(usage(format!("grid must be START:STOP:COUNT, got {spec}")));
    };
    let start: f64 = start
        .parse()
        .map_err(|_| usage(format!("bad grid start {start}")))?;
    let stop: f64 = stop
        .parse()
        .map_err(|_| usage(format!("bad grid stop {stop}")))?;
    let count: usize = count
        .parse()
        .map_err(|_| usage(format!("bad grid count {count}")))?;
    Ok(match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect(),
    })
}

fn resolve_grid(
    grid: Option<String>,
    values: Option<Vec<f64>>,
) -> Result<Vec<f64>, CliError> {
    match (grid, values) {
        (Some(_), Some(_)) => Err(usage("pass either --grid or --values, not both")),
        (None, None) => Err(usage(
            "a grid is required: --grid START:STOP:COUNT or --values V1,V2,...",
        )),
        (Some(spec), None) => parse_grid(&spec),
        (None, Some(values)) => Ok(values),
    }
}

fn read_state(path: &Path) -> Result<BipartiteState, CliError> {
    let text = if path == Path::new("-") {
        let mut buffer = String::new();
        std::io::stdin().read_to_string(&mut buffer)?;
        buffer
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?
    };
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid state JSON: {e}")))
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut config = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                serde_json::from_str(&text)
                    .map_err(|e| usage(format!("config {}: {e}", path.display())))?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(restarts) = self.restarts {
            config.restarts = restarts;
        }
        if let Some(workers) = self.workers {
            config.workers = Some(workers);
        }
        if let Some(tol_scale) = self.tol_scale {
            config.tol_scale = tol_scale;
        }
        Ok(config)
    }
}

fn apply_cut(
    state: BipartiteState,
    cut: Option<Cut>,
) -> Result<BipartiteState, CliError> {
    match cut {
        Some(cut) => Ok(state.rebipartition(cut)?),
        None => Ok(state),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => {
            let mut data = text.to_string();
            if !data.ends_with('\n') {
                data.push('\n');
            }
            std::fs::write(path, data)?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn require_json(format: Format, command: &str) -> Result<(), CliError> {
    if format == Format::Csv {
        return Err(usage(format!("{command} output is JSON only")));
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.run.resolve()?;
    if let Some(workers) = config.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build_global()
            .map_err(|e| usage(format!("worker pool: {e}")))?;
    }
    let output = cli.output.as_deref();
    match cli.command {
        Command::State { family, cut } => {
            require_json(cli.format, "state")?;
            let state = apply_cut(family.build(&config)?, cut)?;
            emit(&serde_json::to_string_pretty(&state)?, output)
        }
        Command::Analyze {
            family,
            cut,
            quantifiers,
        } => {
            require_json(cli.format, "analyze")?;
            let state = apply_cut(family.build(&config)?, cut)?;
            let report = bounds::verify_bounds(&state, &config, &quantifiers.to_options())?;
            emit(&serde_json::to_string_pretty(&report)?, output)
        }
        Command::Sweep {
            family,
            grid,
            values,
        } => {
            let grid = resolve_grid(grid, values)?;
            let rows = bounds::sweep_family(family.into(), &grid, &config)?;
            let text = match cli.format {
                Format::Json => serde_json::to_string_pretty(&rows)?,
                Format::Csv => bounds::sweep_to_csv(&rows),
            };
            emit(text.trim_end_matches('\n'), output)
        }
        Command::ReproduceTables { include_table3_rr } => {
            require_json(cli.format, "reproduce-tables")?;
            let verdicts = bounds::reproduce_tables(&config, include_table3_rr)?;
            emit(&serde_json::to_string_pretty(&verdicts)?, output)?;
            let failures = verdicts.failures().count();
            if failures > 0 {
                return Err(CliError::TableMismatch { count: failures });
            }
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(error) = run(cli) {
        eprintln!("error: {error}");
        std::process::exit(exit_code(&error));
    }
}
