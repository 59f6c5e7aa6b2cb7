use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use stacool::drives::reconstruct_drives;
use stacool::harness::{
    self, check, default_deltas, drives_csv, report, run, sweep_detuning, write_outputs,
    write_report, HarnessError, ScenarioConfig, Summary,
};
use stacool::scenarios;
use stacool::schedule::CouplingSchedule;

#[derive(Parser)]
#[command(
    name = "stacool",
    version,
    about = "Mechanical ground-state cooling with STIRAP and counterdiabatic pulses"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scenario and write the time series and summary.
    Simulate {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also reconstruct and write the drive amplitudes.
        #[arg(long)]
        drives: bool,
    },
    /// Run every config over a detuning grid and write one matrix CSV.
    Sweep {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long, default_value_t = -0.2, allow_hyphen_values = true)]
        delta_min: f64,
        #[arg(long, default_value_t = 0.2, allow_hyphen_values = true)]
        delta_max: f64,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        /// Worker threads; defaults to the number of cores.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "out/sweep.csv")]
        out: PathBuf,
    },
    /// Validate a config and print pulse diagnostics without integrating.
    Check { config: PathBuf },
    /// Reconstruct the drive amplitudes of a scenario.
    Drives {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Tabulate summary JSON files and pair STIRAP with STA runs.
    Report {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long, default_value = "report")]
        stem: String,
    },
    /// Print a preset config; `--list` shows the available names.
    Preset {
        name: Option<String>,
        #[arg(long)]
        list: bool,
    },
}

fn load(path: &Path) -> Result<ScenarioConfig, HarnessError> {
    let cfg = ScenarioConfig::load(path)?;
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate {
            config,
            out,
            drives,
        } => {
            let cfg = load(&config)?;
            let outcome = run(&cfg, drives)?;
            let files = write_outputs(&outcome, &out, &cfg.label())?;
            print!("{}", outcome.summary.to_text());
            for f in files {
                eprintln!("wrote {}", f.display());
            }
        }
        Command::Sweep {
            configs,
            delta_min,
            delta_max,
            steps,
            workers,
            out,
        } => {
            let cfgs = configs
                .iter()
                .map(|p| load(p))
                .collect::<Result<Vec<_>, _>>()?;
            if steps == 0 {
                return Err(HarnessError::Config(vec![
                    "--steps must be at least 1".into()
                ]));
            }
            let result =
                sweep_detuning(&cfgs, &default_deltas(delta_min, delta_max, steps), workers)?;
            result.write_csv(&out)?;
            eprintln!("wrote {}", out.display());
        }
        Command::Check { config } => {
            let cfg = load(&config)?;
            print!("{}", check(&cfg).to_text());
        }
        Command::Drives { config, out } => {
            let cfg = load(&config)?;
            let sched = CouplingSchedule::new(cfg.protocol);
            let pair = reconstruct_drives(&sched, &cfg.system, cfg.window(), cfg.grid_points)
                .map_err(|source| HarnessError::Drives {
                    context: cfg.label(),
                    source,
                })?;
            std::fs::create_dir_all(&out).map_err(|source| io(&out, source))?;
            let path = out.join(format!("{}_drives.csv", cfg.label()));
            std::fs::write(&path, drives_csv(&pair)).map_err(|source| io(&path, source))?;
            println!("max |Omega| = {:.6e}", pair.max_amplitude());
            eprintln!("wrote {}", path.display());
        }
        Command::Report {
            summaries,
            out,
            stem,
        } => {
            let mut runs = Vec::with_capacity(summaries.len());
            for path in &summaries {
                let text = std::fs::read_to_string(path).map_err(|source| io(path, source))?;
                let s: Summary = serde_json::from_str(&text)
                    .map_err(|e| HarnessError::Other(format!("{}: {e}", path.display())))?;
                runs.push(s);
            }
            let rep = report(&runs);
            write_report(&rep, &out, &stem)?;
            print!("{}", rep.to_text());
        }
        Command::Preset { name, list } => match (name, list) {
            (_, true) | (None, false) => {
                for n in scenarios::names() {
                    println!("{n}");
                }
            }
            (Some(n), false) => {
                let cfg = scenarios::by_name(&n).ok_or_else(|| {
                    HarnessError::Config(vec![format!("unknown preset '{n}'; try --list")])
                })?;
                print!("{}", cfg.serialize());
            }
        },
    }
    Ok(())
}

fn io(path: &Path, source: std::io::Error) -> HarnessError {
    HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::HarnessError::exit_code(&e) as u8)
        }
    }
}
