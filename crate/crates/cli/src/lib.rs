//! Command-line front end: equilibrium constants, orbit propagation,
//! collision-manifold portraits, bifurcation scans and regularizability
//! verdicts, written as JSON, CSV or SVG.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, schema
//! violations), 2 on domain or numerical failures. Errors are reported on
//! stderr as a JSON object `{"error": {"kind", "message", "exit_code"}}`.

pub mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use hill_core::rational::parse_rational;
use hill_core::Rational;
use serde::Serialize;

use commands::*;
use config::{Format, RunConfig};
use error::CliError;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "HILL_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "hill-regularize",
    version,
    about = "Regularized Hill problem with an oblate tertiary"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (default: config `output.path`, else stdout).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the relative equilibrium and report λ₁, λ₂.
    Equilibrium,
    /// Integrate an orbit in Cartesian or McGehee coordinates.
    Propagate(PropagateArgs),
    /// Phase portrait of the flow on the collision manifold.
    Portrait(PortraitArgs),
    /// Equilibria of the collision-manifold flow over a range of c.
    Scan(ScanArgs),
    /// Branch and block regularizability of the singularity.
    Classify(ClassifyArgs),
}

fn rational_arg(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// Flags mirroring the config's `overrides` and `integrator` fields.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigOverrides {
    #[arg(long, value_parser = rational_arg)]
    pub nu: Option<Rational>,
    #[arg(long, value_parser = rational_arg)]
    pub alpha: Option<Rational>,
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub r_floor: Option<f64>,
}

impl ConfigOverrides {
    fn apply(&self, config: &mut RunConfig) -> Result<(), CliError> {
        use config::RationalSpec;
        if let Some(nu) = self.nu {
            config.overrides.nu = Some(RationalSpec::Text(nu.to_string()));
        }
        if let Some(alpha) = self.alpha {
            config.overrides.alpha = Some(RationalSpec::Text(alpha.to_string()));
        }
        if self.c.is_some() {
            config.overrides.c = self.c;
        }
        let i = &mut config.integrator;
        i.rel_tol = self.rel_tol.unwrap_or(i.rel_tol);
        i.abs_tol = self.abs_tol.unwrap_or(i.abs_tol);
        i.tau_max = self.tau_max.unwrap_or(i.tau_max);
        i.r_floor = self.r_floor.unwrap_or(i.r_floor);
        config.validate()
    }
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    #[arg(long, value_enum, default_value = "mcgehee")]
    pub coords: Coords,
    /// Initial state: x1,x2,y1,y2 (cartesian) or r,theta,v,w (mcgehee).
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    pub state0: Vec<f64>,
    /// Start and end of the integration in t or τ (default 0 to tau_max).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub span: Option<Vec<f64>>,
    /// Where to write the JSON summary when the trajectory goes to a file
    /// (default: stdout; stderr when the trajectory goes to stdout).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: ConfigOverrides,
}

#[derive(Debug, Args)]
pub struct ExponentArgs {
    #[arg(long, value_parser = rational_arg)]
    pub alpha: Option<Rational>,
    /// Defaults to α/2.
    #[arg(long, value_parser = rational_arg)]
    pub beta: Option<Rational>,
}

#[derive(Debug, Args)]
pub struct PortraitArgs {
    #[command(flatten)]
    pub exponents: ExponentArgs,
    /// Oblateness coupling (default: from the config).
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    #[arg(long, default_value_t = PortraitGrid::default().n)]
    pub grid: usize,
    #[arg(long, default_value_t = PortraitGrid::default().circle_seeds)]
    pub circle_seeds: usize,
    #[arg(long, default_value_t = PortraitGrid::default().line_seeds)]
    pub line_seeds: usize,
    #[arg(long, default_value_t = PortraitGrid::default().tau)]
    pub tau: f64,
    #[arg(long, default_value_t = PortraitGrid::default().half_width)]
    pub half_width: f64,
    #[arg(long, default_value_t = PortraitGrid::default().samples_per_curve)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub exponents: ExponentArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub c_min: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub c_max: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    pub steps: u64,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long, value_parser = rational_arg)]
    pub nu: Option<Rational>,
    #[arg(long, value_parser = rational_arg)]
    pub alpha: Option<Rational>,
    /// Classify the single-term potential |x|^{-α}.
    #[arg(long)]
    pub single_term: bool,
    /// Pick the criterion from the sign of c (two terms only when c > 0).
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
}

/// Caps the global rayon pool from [`THREADS_ENV`].
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))
    })?;
    // A pool already built (e.g. by an earlier call in the same process) is kept.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            return report(&CliError::Usage(
                e.render().to_string().trim_end().to_string(),
            ));
        }
    };
    match configure_threads().and_then(|_| run(&cli)) {
        Ok(()) => 0,
        Err(e) => report(&e),
    }
}

fn report(e: &CliError) -> i32 {
    let text = serde_json::to_string(&e.report()).unwrap_or_else(|_| e.to_string());
    eprintln!("{text}");
    e.exit_code()
}

struct Target<'a> {
    path: Option<&'a Path>,
    format: Format,
}

fn open(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let mut out = open(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn load_config(cli: &Cli) -> Result<Option<RunConfig>, CliError> {
    cli.config.as_deref().map(RunConfig::load).transpose()
}

fn require_config(config: Option<RunConfig>, command: &str) -> Result<RunConfig, CliError> {
    config.ok_or_else(|| CliError::Usage(format!("`{command}` needs --config")))
}

fn target<'a>(
    cli: &'a Cli,
    config: Option<&'a RunConfig>,
    default: Format,
    allowed: &[Format],
) -> Result<Target<'a>, CliError> {
    let out = config.map(|c| &c.output);
    let format = cli
        .format
        .or_else(|| out.and_then(|o| o.format))
        .unwrap_or(default);
    if !allowed.contains(&format) {
        return Err(CliError::Usage(format!(
            "format {format} is not available for this command"
        )));
    }
    let path = cli
        .out
        .as_deref()
        .or_else(|| out.and_then(|o| o.path.as_deref()));
    Ok(Target { path, format })
}

/// Exponents from flags, then from the config, then `α = 3`, `β = α/2`.
fn exponents(
    args: &ExponentArgs,
    config: Option<&RunConfig>,
) -> Result<(Rational, Rational), CliError> {
    let from_config = match config {
        Some(c) if args.alpha.is_none() => {
            let p = c.model()?.params;
            Some((p.alpha(), p.beta()))
        }
        _ => None,
    };
    let alpha = args
        .alpha
        .or(from_config.map(|e| e.0))
        .unwrap_or(Rational::from_integer(3));
    let beta = args
        .beta
        .or(from_config.map(|e| e.1))
        .unwrap_or(alpha / Rational::from_integer(2));
    Ok((alpha, beta))
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    match &cli.command {
        Command::Equilibrium => {
            let config = require_config(config, "equilibrium")?;
            let t = target(cli, Some(&config), Format::Json, &[Format::Json])?;
            write_json(t.path, &cmd_equilibrium(&config)?)
        }
        Command::Propagate(args) => {
            let mut config = require_config(config, "propagate")?;
            args.overrides.apply(&mut config)?;
            let span = match args.span.as_deref() {
                Some([a, b]) => (*a, *b),
                Some(_) => return Err(CliError::Usage("--span takes two values".into())),
                None => (0.0, config.integrator.tau_max),
            };
            let state0: [f64; 4] = args
                .state0
                .as_slice()
                .try_into()
                .map_err(|_| CliError::Usage("--state0 takes four values".into()))?;
            let req = PropagateRequest {
                coords: args.coords,
                state0,
                span,
            };
            let output = cmd_propagate(&config, &req)?;
            let t = target(
                cli,
                Some(&config),
                Format::Csv,
                &[Format::Csv, Format::Json],
            )?;
            match t.format {
                Format::Json => {
                    #[derive(Serialize)]
                    struct Full<'a> {
                        summary: &'a PropagateSummary,
                        columns: &'a [&'static str],
                        rows: &'a [Vec<f64>],
                    }
                    write_json(
                        t.path,
                        &Full {
                            summary: &output.summary,
                            columns: &output.columns,
                            rows: &output.rows,
                        },
                    )?;
                }
                _ => {
                    let mut out = open(t.path)?;
                    output.write_csv(&mut out)?;
                    out.flush()?;
                    drop(out);
                    match (&args.summary, t.path) {
                        (Some(p), _) => write_json(Some(p), &output.summary)?,
                        (None, Some(_)) => write_json(None, &output.summary)?,
                        (None, None) => {
                            eprintln!("{}", serde_json::to_string_pretty(&output.summary)?)
                        }
                    }
                }
            }
            match output.failure() {
                Some(e) => Err(e),
                None => Ok(()),
            }
        }
        Command::Portrait(args) => {
            let (alpha, beta) = exponents(&args.exponents, config.as_ref())?;
            let c = match (args.c, config.as_ref()) {
                (Some(c), _) => c,
                (None, Some(cfg)) => cfg.model()?.params.c(),
                (None, None) => {
                    return Err(CliError::Usage("`portrait` needs --c or --config".into()))
                }
            };
            let grid = PortraitGrid {
                n: args.grid,
                circle_seeds: args.circle_seeds,
                line_seeds: args.line_seeds,
                tau: args.tau,
                half_width: args.half_width,
                samples_per_curve: args.samples,
            };
            let t = target(
                cli,
                config.as_ref(),
                Format::Svg,
                &[Format::Svg, Format::Csv, Format::Json],
            )?;
            let portrait = cmd_portrait(alpha, beta, c, &grid)?;
            match t.format {
                Format::Svg => {
                    let mut out = open(t.path)?;
                    out.write_all(render_svg(&portrait).as_bytes())?;
                    out.flush()?;
                    Ok(())
                }
                Format::Csv => {
                    let mut out = open(t.path)?;
                    write_portrait_csv(&portrait, &mut out)?;
                    out.flush()?;
                    Ok(())
                }
                Format::Json => write_json(t.path, &portrait),
            }
        }
        Command::Scan(args) => {
            let (alpha, beta) = exponents(&args.exponents, config.as_ref())?;
            let t = target(
                cli,
                config.as_ref(),
                Format::Csv,
                &[Format::Csv, Format::Json],
            )?;
            let rows = cmd_scan(alpha, beta, args.c_min, args.c_max, args.steps as usize)?;
            match t.format {
                Format::Json => write_json(t.path, &rows),
                _ => {
                    let mut out = open(t.path)?;
                    write_scan_csv(&rows, &mut out)?;
                    out.flush()?;
                    Ok(())
                }
            }
        }
        Command::Classify(args) => {
            let nu = match (args.nu, config.as_ref()) {
                (Some(nu), _) => nu,
                (None, Some(c)) => c.nu()?,
                (None, None) => Rational::from_integer(1),
            };
            let alpha = match (args.alpha, config.as_ref()) {
                (Some(a), _) => a,
                (None, Some(c)) => c.alpha()?,
                (None, None) => Rational::from_integer(3),
            };
            let t = target(cli, config.as_ref(), Format::Json, &[Format::Json])?;
            write_json(t.path, &cmd_classify(nu, alpha, args.single_term, args.c)?)
        }
    }
}
