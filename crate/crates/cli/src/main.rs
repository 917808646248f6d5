use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use semilin::checks::{all_theorems_hold, run_suite};
use semilin::experiment::{
    invert_measurements, parse_override, resolve_config, run_table, synthesize_for, table_csv, ExperimentConfig,
    SeedSource, SEED_ENV,
};
use semilin::forward::solve_semilinear;
use semilin::{Error, Grid, Measurements};

/// Reconstruct the semilinear term of −Δu = F(u) from boundary flux data.
#[derive(Parser)]
#[command(name = "semilin", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Flat `key = value` config file.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set M=0.5`; takes precedence over the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve −Δu = F(u), u = δ·y, on the fine grid and write u as a CSV grid.
    Forward {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output file; row j holds u(x_i, y_j) for i = 0..n.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Generate a noisy measurement set.
    Synth {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Invert a measurement set and write the reconstruction and a run report.
    Invert {
        #[command(flatten)]
        config: ConfigArgs,
        /// Measurement file produced by `synth`.
        #[arg(long, short)]
        data: PathBuf,
        /// Directory receiving `reconstruction.csv` and `report.json`.
        #[arg(long, short)]
        out_dir: PathBuf,
        /// Also write every level's source and state to `levels.json`.
        #[arg(long)]
        save_levels: bool,
        /// Include wall-clock time in the report (makes it non-reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Rerun a table of published experiments.
    Table {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
        /// Added to every published seed.
        #[arg(long, default_value_t = 0)]
        seed_offset: u64,
        /// Override a key in every row.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run the certificate suite and write its JSON report.
    Check {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_numerical() {
            Failure::Numerical(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the target directory and renames it into place.
fn write_atomic(path: &Path, contents: &str) -> Outcome {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let fail = |e: std::io::Error| Failure::Numerical(format!("cannot write {}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(contents.as_bytes()).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn load_config(args: &ConfigArgs) -> Result<(ExperimentConfig, SeedSource), Failure> {
    let text = args.config.as_deref().map(read).transpose()?;
    let overrides = args.overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    let env = std::env::var(SEED_ENV).ok();
    let (cfg, source) = resolve_config(text.as_deref(), &overrides, env.as_deref())?;
    eprintln!("seed = {} ({})", cfg.seed, seed_label(source));
    Ok((cfg, source))
}

fn seed_label(source: SeedSource) -> String {
    match source {
        SeedSource::Default => "default".into(),
        SeedSource::Environment => format!("from {SEED_ENV}"),
        SeedSource::Config => "from config".into(),
        SeedSource::Data => "from measurement file".into(),
    }
}

fn forward(config: &ConfigArgs, out: &Path) -> Outcome {
    let (cfg, _) = load_config(config)?;
    let grid = Grid::new(cfg.fine_n)?;
    let u = solve_semilinear(&grid, &cfg.f_true, cfg.delta, &cfg.solver)?;
    let n = grid.n();
    let mut csv = String::new();
    for j in 0..=n {
        let row: Vec<String> = (0..=n).map(|i| u.get(i, j).to_string()).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    write_atomic(out, &csv)
}

fn synth(config: &ConfigArgs, out: &Path) -> Outcome {
    let (cfg, _) = load_config(config)?;
    let data = synthesize_for(&cfg)?;
    write_atomic(out, &data.to_json()?)
}

fn invert(config: &ConfigArgs, data: &Path, out_dir: &Path, save_levels: bool, timing: bool) -> Outcome {
    let (cfg, source) = load_config(config)?;
    let data = Measurements::from_json(&read(data)?)?;
    let mut run = invert_measurements(&cfg, source, &data)?;
    let seconds = run.report.wall_clock_seconds.unwrap_or_default();
    if !timing {
        run.report.wall_clock_seconds = None;
    }
    fs::create_dir_all(out_dir).map_err(|e| Failure::Usage(format!("cannot create {}: {e}", out_dir.display())))?;
    write_atomic(&out_dir.join("reconstruction.csv"), &run.reconstruction.to_csv(&run.report.config.f_true))?;
    write_atomic(&out_dir.join("report.json"), &run.report.to_json()?)?;
    if save_levels {
        let json = serde_json::to_string(&run.levels).map_err(|e| Failure::Numerical(e.to_string()))?;
        write_atomic(&out_dir.join("levels.json"), &json)?;
    }
    for f in &run.report.failed_levels {
        eprintln!("level delta = {} failed: {}", f.delta, f.error);
    }
    eprintln!(
        "err = {}{} over {} samples, {} missing, {:.1} s",
        run.report.err,
        if run.report.err_zero_denominator { " (absolute, zero truth)" } else { "" },
        run.report.samples_used,
        run.report.missing.len(),
        seconds
    );
    Ok(())
}

fn table(id: u8, seed_offset: u64, overrides: &[String], out: Option<&Path>) -> Outcome {
    let overrides = overrides.iter().map(|s| parse_override(s)).collect::<Result<Vec<_>, _>>()?;
    eprintln!("table {id}: published seeds + {seed_offset}");
    let results = run_table(id, seed_offset, &overrides)?;
    for r in &results {
        if let Some(e) = &r.error {
            eprintln!("row ({}, {}) failed: {e}", r.row.group, r.row.index);
        }
    }
    let csv = table_csv(&results);
    match out {
        Some(p) => write_atomic(p, &csv)?,
        None => print!("{csv}"),
    }
    if results.iter().all(|r| r.error.is_some()) {
        return Err(Failure::Numerical("every row failed".into()));
    }
    Ok(())
}

fn check(config: &ConfigArgs, out: Option<&Path>) -> Outcome {
    let (cfg, _) = load_config(config)?;
    let reports = run_suite(&cfg.solver)?;
    let json = serde_json::to_string_pretty(&reports).map_err(|e| Failure::Numerical(e.to_string()))?;
    match out {
        Some(p) => write_atomic(p, &json)?,
        None => println!("{json}"),
    }
    let failed: Vec<_> = reports.iter().filter(|r| !r.pass).collect();
    eprintln!("{} checks, {} failed", reports.len(), failed.len());
    for r in failed.iter().take(10) {
        eprintln!("FAIL {}: violation {:e} > {:e}", r.name, r.violation, r.tolerance);
    }
    if failed.len() > 10 {
        eprintln!("... and {} more", failed.len() - 10);
    }
    if !all_theorems_hold(&reports) {
        return Err(Failure::Numerical("a theorem-backed check failed".into()));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Forward { config, out } => forward(config, out),
        Command::Synth { config, out } => synth(config, out),
        Command::Invert { config, data, out_dir, save_levels, timing } => {
            invert(config, data, out_dir, *save_levels, *timing)
        }
        Command::Table { id, seed_offset, overrides, out } => table(*id, *seed_offset, overrides, out.as_deref()),
        Command::Check { config, out } => check(config, out.as_deref()),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
