use std::ops::Range;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qrm::cli::{self, Algorithm, BenchConfig, EXIT_INPUT_ERROR};
use qrm::scheduler::SchedulerConfig;
use qrm::shift_kernel::ShiftEnablePolicy;

#[derive(Parser)]
#[command(name = "qrm", version, about = "Quadrant-based neutral-atom rearrangement")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct SchedulerArgs {
    #[arg(long, value_enum, default_value_t = Algorithm::Qrm)]
    algo: Algorithm,
    /// Iteration limit (default: W/2).
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Keep iterating after a pass that moves nothing.
    #[arg(long)]
    no_early_stop: bool,
    /// Shift-enable policy: `full` or `limit:K`.
    #[arg(long, default_value = "full")]
    s_en: ShiftEnablePolicy,
}

impl SchedulerArgs {
    fn config(&self) -> SchedulerConfig {
        SchedulerConfig {
            max_iterations: self.max_iterations,
            s_en: self.s_en,
            early_stop: !self.no_early_stop,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Load a random grid and write it as a packet stream.
    Generate {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = 0.5)]
        fill: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute a schedule for a grid file.
    Schedule {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        scheduler: SchedulerArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Replay a schedule through the move simulator.
    Verify {
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        schedule: PathBuf,
    },
    /// Schedule a range of seeded loads and report statistics.
    Bench {
        #[arg(long)]
        width: usize,
        #[arg(long)]
        target: usize,
        #[arg(long, default_value_t = 0.5)]
        fill: f64,
        /// Seed range `START..END` (end exclusive).
        #[arg(long, default_value = "0..100", value_parser = parse_seeds)]
        seeds: Range<u64>,
        #[command(flatten)]
        scheduler: SchedulerArgs,
        /// Write the per-seed table here instead of stdout.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Render a grid file, a schedule file, or a grid replayed through a schedule.
    Show {
        path: PathBuf,
        #[arg(long)]
        schedule: Option<PathBuf>,
    },
}

fn parse_seeds(s: &str) -> Result<Range<u64>, String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected START..END, got {s:?}"))?;
    let start = a.parse::<u64>().map_err(|e| e.to_string())?;
    let end = b.parse::<u64>().map_err(|e| e.to_string())?;
    if end <= start {
        return Err(format!("empty seed range {s}"));
    }
    Ok(start..end)
}

fn run(cli: Cli) -> qrm::Result<ExitCode> {
    match cli.command {
        Command::Generate {
            width,
            target,
            fill,
            seed,
            out,
        } => {
            let outcome = cli::cmd_generate(width, target, fill, seed, &out)?;
            for w in &outcome.warnings {
                eprintln!("{w}");
            }
            println!(
                "wrote {}: {width}x{width}, {} atoms, target {target}x{target}",
                out.display(),
                outcome.grid.popcount()
            );
        }
        Command::Schedule {
            input,
            scheduler,
            out,
        } => {
            let outcome = cli::cmd_schedule(&input, scheduler.algo, &scheduler.config(), Some(&out))?;
            for w in &outcome.warnings {
                eprintln!("{w}");
            }
            println!("{}", outcome.summary());
        }
        Command::Verify { grid, schedule } => {
            let outcome = cli::cmd_verify(&grid, &schedule)?;
            println!(
                "replayed {} moves, popcount {} -> {}, defect-free {}",
                outcome.moves_executed, outcome.initial_popcount, outcome.final_popcount, outcome.defect_free
            );
            for p in &outcome.problems {
                eprintln!("FAIL: {p}");
            }
            if outcome.passed() {
                println!("OK");
            }
            return Ok(ExitCode::from(outcome.exit_code() as u8));
        }
        Command::Bench {
            width,
            target,
            fill,
            seeds,
            scheduler,
            csv,
        } => {
            let report = cli::cmd_bench(&BenchConfig {
                width,
                target,
                fill,
                seeds,
                algorithm: scheduler.algo,
                scheduler: scheduler.config(),
            })?;
            let table = report.to_csv()?;
            match csv {
                Some(path) => std::fs::write(&path, table).map_err(|e| qrm::Error::Io { path, source: e })?,
                None => print!("{table}"),
            }
            print!("{}", report.summary(width));
        }
        Command::Show { path, schedule } => {
            print!("{}", cli::cmd_show(&path, schedule.as_deref())?);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT_ERROR as u8)
        }
    }
}
