use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dc_handover::channel::{compute_sweep_delay, BfArchitecture, BfKind};
use dc_handover::harness::{self, load_plan, replay_episode, trace_csv};
use dc_handover::rl::AgentCheckpoint;
use dc_handover::scenario::load_scenario;

#[derive(Parser, Debug)]
#[command(name = "dc-handover", version, about = "LTE/NR dual-connectivity handover experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute an experiment plan and write metric CSVs.
    Run {
        #[arg(long)]
        plan: PathBuf,
        /// Replace the plan's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        episodes: Option<usize>,
        /// Output directory (overrides the plan and DC_HANDOVER_OUTPUT_DIR).
        #[arg(long)]
        output: Option<PathBuf>,
        /// Worker threads; defaults to the available cores.
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the sweep delay of every beamforming architecture.
    SweepDelay {
        /// SRS period, e.g. 200us, 0.2ms, 2e-4s.
        #[arg(long, value_parser = parse_duration)]
        tper: f64,
        #[arg(long)]
        ngnb: usize,
        #[arg(long)]
        nue: usize,
        /// Reproduce the published hybrid row instead of the formula value.
        #[arg(long)]
        table1_compat: bool,
    },
    /// Check a scenario file.
    Validate { file: PathBuf },
    /// Re-run one episode greedily from a checkpoint and emit a per-step trace.
    Replay {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value = "analog-analog")]
        bf: BfKind,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        episode: u64,
        /// Trace CSV path; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

/// Seconds from a number with an optional s/ms/us/µs/ns suffix.
fn parse_duration(text: &str) -> Result<f64, String> {
    let t = text.trim();
    let (num, exp) = [("ms", -3), ("us", -6), ("µs", -6), ("ns", -9), ("s", 0)]
        .iter()
        .find_map(|(suffix, exp)| t.strip_suffix(suffix).map(|n| (n.trim(), *exp)))
        .unwrap_or((t, 0));
    let bad = || format!("invalid duration '{text}'");
    // Parse "200e-6" rather than multiplying, so 200us is the nearest double to 2e-4.
    let v: f64 = if exp == 0 {
        num.parse().map_err(|_| bad())?
    } else if num.contains(['e', 'E']) {
        num.parse::<f64>().map_err(|_| bad())? * 10f64.powi(exp)
    } else {
        format!("{num}e{exp}").parse().map_err(|_| bad())?
    };
    if !(v.is_finite() && v > 0.0) {
        return Err(format!("duration must be positive, got '{text}'"));
    }
    Ok(v)
}

const EXIT_USAGE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn fail(code: u8, err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Run {
            plan,
            seed,
            episodes,
            output,
            threads,
        } => {
            let mut plan = match load_plan(&plan) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            if let Some(s) = seed {
                plan.seeds = vec![s];
            }
            if let Some(n) = episodes {
                plan.episodes = n;
            }
            if let Err(e) = plan.validate() {
                return fail(EXIT_CONFIG, e);
            }
            let scenario = match harness::resolve_scenario(&plan) {
                Ok(s) => s,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let cells = match harness::plan_cells(&plan, &scenario) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let dir = harness::output_dir(&plan, output.as_deref());
            let threads = threads.unwrap_or_else(harness::default_threads);
            let outcome = harness::run_cells(&cells, threads)
                .and_then(|results| harness::write_results(&dir, &results, plan.detailed_logs));
            match outcome {
                Ok(files) => {
                    println!("wrote {} files to {}", files.len(), dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => fail(EXIT_RUNTIME, e),
            }
        }
        Command::SweepDelay {
            tper,
            ngnb,
            nue,
            table1_compat,
        } => {
            println!("architecture,l,sweep_delay_s,sweep_delay_ms");
            for kind in BfKind::ALL {
                let bf = match BfArchitecture::new(kind, ngnb, nue, tper) {
                    Ok(mut bf) => {
                        bf.table1_compat = table1_compat;
                        bf
                    }
                    Err(e) => return fail(EXIT_CONFIG, e),
                };
                let d = if table1_compat {
                    bf.full_sweep_delay()
                } else {
                    match compute_sweep_delay(ngnb, nue, tper, bf.l_factor) {
                        Ok(d) => d,
                        Err(e) => return fail(EXIT_CONFIG, e),
                    }
                };
                println!("{},{},{},{}", kind.as_str(), bf.l_factor, d, d * 1e3);
            }
            ExitCode::SUCCESS
        }
        Command::Validate { file } => match load_scenario(&file) {
            Ok(s) => {
                println!(
                    "ok: {} gNBs, {} buildings, {} UEs, {} steps per episode",
                    s.gnb_count(),
                    s.buildings_m.len(),
                    s.ue_count,
                    s.steps_per_episode()
                );
                ExitCode::SUCCESS
            }
            Err(e) => fail(EXIT_CONFIG, e),
        },
        Command::Replay {
            plan,
            checkpoint,
            bf,
            seed,
            episode,
            output,
        } => {
            let plan = match load_plan(&plan) {
                Ok(p) => p,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let ck = match AgentCheckpoint::load(&checkpoint) {
                Ok(c) => c,
                Err(e) => return fail(EXIT_CONFIG, e),
            };
            let rows = match replay_episode(&plan, &ck, bf, seed, episode) {
                Ok(r) => r,
                Err(e) => return fail(EXIT_RUNTIME, e),
            };
            let text = trace_csv(&rows);
            match output {
                Some(path) => match std::fs::write(&path, text) {
                    Ok(()) => ExitCode::SUCCESS,
                    Err(e) => fail(EXIT_RUNTIME, format!("{}: {e}", path.display())),
                },
                None => {
                    print!("{text}");
                    ExitCode::SUCCESS
                }
            }
        }
    }
}
