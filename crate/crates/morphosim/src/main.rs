use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use morphosim::commands::{self, EllipsoidArgs};
use morphosim::config::{self, ConfigFile, RunConfig, ScanConfig};
use morphosim::verify::Suite;
use morphosim::{presets, CliError};

/// Tip growth of walled cells: simulation, linear stability and checks.
#[derive(Parser)]
#[command(name = "morphosim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a time-dependent simulation.
    Simulate {
        /// Key = value configuration file.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Built-in configuration (see `morphosim preset`).
        #[arg(long)]
        preset: Option<String>,
        /// Overrides the seed of random initial data.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Scan the linear stability region in the (d, sigma) plane.
    Stability {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        preset: Option<String>,
        /// 2 or 3.
        #[arg(long)]
        dim: Option<String>,
        /// Comma-separated Poisson ratios.
        #[arg(long)]
        nu: Option<String>,
        /// start:end:count
        #[arg(long)]
        d_range: Option<String>,
        /// start:end:count
        #[arg(long)]
        sigma_range: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Run the verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::Fast)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Integrate the reduced ellipsoid model.
    Ellipsoid {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        c: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 10.0)]
        t_end: f64,
        /// Stop once c exceeds this value.
        #[arg(long, default_value_t = 1e6)]
        ceiling: f64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Print a built-in configuration, or list them.
    Preset { name: Option<String> },
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Fast,
    Full,
}

/// `MORPHOSIM_OUT` wins over `--out`.
fn out_dir(arg: PathBuf) -> PathBuf {
    std::env::var_os("MORPHOSIM_OUT")
        .map(PathBuf::from)
        .unwrap_or(arg)
}

fn read_text(config: Option<&Path>, preset: Option<&str>) -> Result<Option<String>, CliError> {
    match (config, preset) {
        (Some(path), _) => std::fs::read_to_string(path)
            .map(Some)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display()))),
        (None, Some(name)) => presets::get(name)
            .map(|t| Some(t.to_string()))
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown preset `{name}`; available: {}",
                    presets::names().collect::<Vec<_>>().join(", ")
                ))
            }),
        (None, None) => Ok(None),
    }
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            config,
            preset,
            seed,
            out,
        } => {
            let text = read_text(config.as_deref(), preset.as_deref())?
                .ok_or_else(|| CliError::Usage("simulate needs --config or --preset".into()))?;
            let mut cfg = RunConfig::from_file(&ConfigFile::parse(&text)?)?;
            if let Some(s) = seed {
                cfg = cfg.with_seed(s);
            }
            let out = out_dir(out);
            let m = commands::simulate(&cfg, &out)?;
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
            println!("wrote {} files to {}", m.files.len(), out.display());
        }
        Command::Stability {
            config,
            preset,
            dim,
            nu,
            d_range,
            sigma_range,
            out,
            jobs,
        } => {
            let mut cfg = match read_text(config.as_deref(), preset.as_deref())? {
                Some(text) => ScanConfig::parse(&text)?,
                None => ScanConfig::default(),
            };
            if let Some(v) = dim {
                cfg.dim = config::parse_dim(&v).map_err(CliError::Usage)?;
            }
            if let Some(v) = nu {
                cfg.nus = config::parse_list(&v).map_err(CliError::Usage)?;
            }
            if let Some(v) = d_range {
                cfg.d_range = config::parse_range(&v).map_err(CliError::Usage)?;
            }
            if let Some(v) = sigma_range {
                cfg.sigma_range = config::parse_range(&v).map_err(CliError::Usage)?;
            }
            let out = out_dir(out);
            let (m, summaries) = pool(jobs)?.install(|| commands::stability_scan(&cfg, &out))?;
            for s in &summaries {
                println!("nu = {}: {} unstable cells", s.nu, s.unstable_cells);
            }
            for w in &m.warnings {
                eprintln!("warning: {w}");
            }
        }
        Command::Verify { suite, jobs, out } => {
            let suite = match suite {
                SuiteArg::Fast => Suite::Fast,
                SuiteArg::Full => Suite::Full,
            };
            let out = out_dir(out);
            match commands::run_verify(suite, jobs, &out) {
                Ok((_, results)) => results.iter().for_each(|r| println!("{}", r.line())),
                Err(e) => {
                    if let Ok(text) = std::fs::read_to_string(out.join("verify.csv")) {
                        eprint!("{text}");
                    }
                    return Err(e);
                }
            }
        }
        Command::Ellipsoid {
            a,
            c,
            dt,
            t_end,
            ceiling,
            out,
        } => {
            let m = commands::ellipsoid_run(
                EllipsoidArgs {
                    a,
                    c,
                    dt,
                    t_end,
                    ceiling,
                },
                &out_dir(out),
            )?;
            for w in &m.warnings {
                println!("{w}");
            }
        }
        Command::Preset { name: None } => presets::names().for_each(|n| println!("{n}")),
        Command::Preset { name: Some(n) } => {
            let text =
                presets::get(&n).ok_or_else(|| CliError::Usage(format!("unknown preset `{n}`")))?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
