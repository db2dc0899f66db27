//! `fractal-onb`: spectra, extreme cycles, orthonormal bases, Walsh transforms
//! and their diagnostics from a config file.
//!
//! Exit status: 0 when every check passes, 1 for usage or config errors, 2
//! when a mathematical check fails.

mod commands;
mod config;
mod output;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use commands::{Artifacts, Params};
use config::RunConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "fractal-onb", version, about = "Orthonormal bases from Cuntz-algebra representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Is L a spectrum for R^{-1} B?
    CheckPair(Common),
    /// Extreme cycles of the maps (t + l) / R.
    FindCycles(Common),
    /// Generate the truncated basis and check orthonormality and completeness.
    GenBasis(Common),
    /// Generalized Walsh functions S_w 1 of a unitary matrix.
    Walsh(Common),
    /// Walsh coefficients of a sampled signal and its reconstruction.
    Transform(Common),
    /// Draw points from the invariant measure.
    Sample(Common),
    /// Check the Cuntz relations on a grid.
    VerifyCuntz(Common),
    /// Iterate the transfer operator from a perturbed constant.
    Transfer(Common),
}

#[derive(Args)]
struct Common {
    /// TOML or JSON config with R, B, L or N, rows.
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    max_len: Option<usize>,
    #[arg(long)]
    p_max: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated probe points, e.g. 0.1,0.3,0.7.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    probes: Option<Vec<f64>>,
    /// Number of verification grid points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    /// Signal CSV for `transform`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Directory receiving the JSON report and any CSV/SVG artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// What to print on stdout.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

impl Common {
    fn params(&self, config: &RunConfig) -> Result<Params> {
        let tol = self.tol.or(config.tol);
        if let Some(t) = tol {
            if !(t > 0.0 && t.is_finite()) {
                bail!("tol must be positive, got {t}");
            }
        }
        Ok(Params {
            max_len: self.max_len.or(config.max_len),
            p_max: self.p_max.or(config.p_max),
            tol,
            seed: self.seed.or(config.seed),
            probes: self.probes.clone().or_else(|| config.probes.clone()),
            grid: self.grid.or(config.grid),
            samples: self.samples.or(config.samples),
            iters: self.iters.or(config.iters),
            input: self.input.clone(),
        })
    }
}

fn emit(name: &str, common: &Common, artifacts: &Artifacts) -> Result<()> {
    let report = serde_json::to_string_pretty(&artifacts.report)? + "\n";
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        std::fs::write(dir.join(format!("{name}.json")), &report)?;
        if let Some((stem, csv)) = &artifacts.csv {
            std::fs::write(dir.join(format!("{stem}.csv")), csv)?;
        }
        if let Some((stem, svg)) = &artifacts.svg {
            std::fs::write(dir.join(format!("{stem}.svg")), svg)?;
        }
    }
    let text = match common.format {
        Format::Json => &report,
        Format::Csv => match &artifacts.csv {
            Some((_, csv)) => csv,
            None => bail!("{name} has no CSV output"),
        },
        Format::Svg => match &artifacts.svg {
            Some((_, svg)) => svg,
            None => bail!("{name} has no SVG output"),
        },
    };
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let (name, common, command): (&str, &Common, fn(&RunConfig, &Params) -> Result<Artifacts>) = match &cli.command {
        Command::CheckPair(c) => ("check-pair", c, commands::check_pair),
        Command::FindCycles(c) => ("find-cycles", c, commands::find_cycles),
        Command::GenBasis(c) => ("gen-basis", c, commands::gen_basis),
        Command::Walsh(c) => ("walsh", c, commands::walsh),
        Command::Transform(c) => ("transform", c, commands::transform),
        Command::Sample(c) => ("sample", c, commands::sample),
        Command::VerifyCuntz(c) => ("verify-cuntz", c, commands::verify_cuntz),
        Command::Transfer(c) => ("transfer", c, commands::transfer),
    };
    let config = RunConfig::load(&common.config)?;
    let params = common.params(&config)?;
    let artifacts = command(&config, &params)?;
    emit(name, common, &artifacts)?;
    Ok(artifacts.pass)
}

/// Mathematical failures surfaced as library errors exit with 2.
fn is_math_failure(err: &anyhow::Error) -> bool {
    use fractal_onb::Error as E;
    err.chain().any(|cause| {
        matches!(
            cause.downcast_ref::<E>(),
            Some(E::NotASpectrum { .. } | E::NotQmfBasis { .. } | E::NotUnitary { .. } | E::FirstRowNotConstant)
        )
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_math_failure(&e) { 2 } else { 1 })
        }
    }
}
