use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use isspll::analysis::{fom_ja, FomInputs};
use isspll::config_file;
use isspll::engine::run_transient;
use isspll::model::FIELDS;
use isspll::report::{design, summarize, Analysis};
use isspll::sweep::{render_csv, sweep};
use isspll::trace_io::{load_trace, save_spectrum, save_trace};
use isspll::SimConfig;

const EXIT_NO_LOCK: u8 = 2;

#[derive(Parser)]
#[command(name = "isspll", version, about = "Integrating sub-sampling PLL simulator and design toolkit")]
struct Cli {
    /// Log progress and warnings to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a transient simulation; writes trace.csv, summary.txt, spectrum.csv and config.ini.
    ///
    /// Exits 0 when the loop locks, 2 when it does not (outputs are still written).
    Simulate {
        /// Configuration file; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Overrides the configured duration, seconds.
        #[arg(long)]
        duration: Option<f64>,
    },
    /// Recompute the summary of an existing trace.
    ///
    /// Prints the summary; with --out also writes summary.txt and spectrum.csv.
    Analyze {
        /// Configuration the trace was produced with (simulate writes it to config.ini).
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the small-signal loop design report.
    Design {
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Sweep one numeric configuration key; writes sweep.csv.
    ///
    /// Exits 2 if any point fails to lock.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Configuration key to vary.
        #[arg(long)]
        param: String,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Area-normalised jitter-power figure of merit.
    Fom {
        /// rms jitter, seconds.
        #[arg(long)]
        sigma: f64,
        /// Power, watts.
        #[arg(long)]
        power: f64,
        /// Area, mm^2.
        #[arg(long)]
        area: f64,
    },
}

fn config_help() -> String {
    let mut s = String::from("Configuration keys (INI file, one [section] per group, SI units):\n");
    let mut section = "";
    for f in FIELDS {
        if f.section != section {
            section = f.section;
            let _ = writeln!(s, "\n  [{section}]");
        }
        let _ = writeln!(s, "    {:<20} {:<8} {}", f.key, f.unit, f.help);
    }
    s
}

fn load_config(path: Option<&Path>) -> Result<SimConfig> {
    let Some(path) = path else {
        return Ok(SimConfig::default());
    };
    let parsed = config_file::load(path).with_context(|| format!("{}", path.display()))?;
    parsed.validated().with_context(|| format!("{}", path.display()))
}

fn write_analysis(dir: &Path, analysis: &Analysis) -> Result<()> {
    fs::write(dir.join("summary.txt"), analysis.summary.render())?;
    if let Some(spec) = &analysis.spectrum {
        save_spectrum(&dir.join("spectrum.csv"), spec)?;
    }
    Ok(())
}

fn lock_code(locked: bool) -> ExitCode {
    if locked {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_NO_LOCK)
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Simulate {
            config,
            seed,
            out,
            duration,
        } => {
            let mut cfg = load_config(config.as_deref())?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(d) = duration {
                cfg.duration = d;
                let v = cfg.validate();
                if !v.is_empty() {
                    return Err(isspll::Error::InvalidConfig(v)).context("--duration");
                }
            }
            fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
            log::info!("simulating {} reference cycles", cfg.n_cycles());
            let run = run_transient(&cfg)?;
            save_trace(&out.join("trace.csv"), &run.trace)?;
            fs::write(out.join("config.ini"), config_file::to_ini(&cfg))?;
            let analysis = summarize(&cfg, &run.trace)?;
            write_analysis(&out, &analysis)?;
            print!("{}", analysis.summary.render());
            Ok(lock_code(analysis.summary.locked))
        }
        Command::Analyze { config, trace, out } => {
            let cfg = load_config(config.as_deref())?;
            let records = load_trace(&trace).with_context(|| format!("{}", trace.display()))?;
            let analysis = summarize(&cfg, &records)?;
            if let Some(dir) = out {
                fs::create_dir_all(&dir)?;
                write_analysis(&dir, &analysis)?;
            }
            print!("{}", analysis.summary.render());
            Ok(lock_code(analysis.summary.locked))
        }
        Command::Design { config } => {
            let cfg = load_config(config.as_deref())?;
            print!("{}", design(&cfg)?.render());
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep {
            config,
            param,
            from,
            to,
            steps,
            out,
        } => {
            let cfg = load_config(config.as_deref())?;
            let rows = sweep(&cfg, &param, from, to, steps)?;
            fs::create_dir_all(&out)?;
            let csv = render_csv(&param, &rows);
            fs::write(out.join("sweep.csv"), &csv)?;
            print!("{csv}");
            Ok(lock_code(rows.iter().all(|r| r.summary.locked)))
        }
        Command::Fom { sigma, power, area } => {
            let r = fom_ja(FomInputs {
                sigma_j: sigma,
                power,
                area,
            })?;
            println!("fom_ja_db={:.1}", r.fom_ja);
            println!("fom_db={:.1}", r.fom);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let matches = Cli::command().after_long_help(config_help()).try_get_matches();
    let cli = match matches.and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors exit 1; 2 is reserved for "no lock"
            return if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Error,
        1 => log::LevelFilter::Warn,
        2 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).init();

    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
