use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::error;

use usvp::error::Error;
use usvp::sweep::{parse_config_text, run_sweep, Command, SweepConfig, CSV_SCHEMA_HELP};
use usvp::validation::{run_suite, Outcome};

#[derive(Parser, Debug)]
#[command(name = "usvp", version, about = "Replica analysis and Monte-Carlo validation of user selection with vector precoding", after_help = CSV_SCHEMA_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Replica order parameter and energy penalty over the grid
    #[command(name = "penalty-sweep", after_help = CSV_SCHEMA_HELP)]
    PenaltySweep(Opts),
    /// Sum-rate bound (DD-US) or CVP-RUS reference rate over the grid
    #[command(name = "rate-sweep", after_help = CSV_SCHEMA_HELP)]
    RateSweep(Opts),
    /// Finite-size Monte-Carlo energy penalties
    #[command(after_help = CSV_SCHEMA_HELP)]
    Simulate(Opts),
    /// Run oracle suites (math, cdf, replica, selection, rates, sim, all)
    Validate(Opts),
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// Flat key = value file; keys match the long flag names, flags win
    #[arg(long)]
    config: Option<PathBuf>,
    /// dd-us-gaussian, dd-us-qpsk or us-cvp
    #[arg(long)]
    scheme: Option<String>,
    /// rs, 1rsb or both
    #[arg(long)]
    assumption: Option<String>,
    /// Load ratio K/N (list or grid)
    #[arg(long)]
    alpha: Option<String>,
    /// Selected-users-per-antenna ratio ακ (grid)
    #[arg(long = "alphakappa-grid")]
    alphakappa_grid: Option<String>,
    /// Block length(s), comma separated
    #[arg(long = "T")]
    t: Option<String>,
    /// SNR in dB (grid, rate-sweep)
    #[arg(long = "snr-db-grid", allow_hyphen_values = true)]
    snr_db_grid: Option<String>,
    /// Transmit antennas (simulate)
    #[arg(long = "N")]
    n: Option<String>,
    /// Candidate users (simulate)
    #[arg(long = "K")]
    k: Option<String>,
    /// Monte-Carlo trials per grid point
    #[arg(long)]
    trials: Option<String>,
    /// Base seed of the random streams
    #[arg(long)]
    seed: Option<String>,
    /// zfbf-full, zfbf-rus, cvp-rus or greedy-dd-us (simulate)
    #[arg(long)]
    strategy: Option<String>,
    /// Suite for validate
    #[arg(long)]
    suite: Option<String>,
    /// CSV destination (stdout when absent)
    #[arg(long)]
    out: Option<String>,
}

impl Opts {
    fn pairs(&self) -> Vec<(String, String)> {
        [
            ("scheme", &self.scheme),
            ("assumption", &self.assumption),
            ("alpha", &self.alpha),
            ("alphakappa-grid", &self.alphakappa_grid),
            ("T", &self.t),
            ("snr-db-grid", &self.snr_db_grid),
            ("N", &self.n),
            ("K", &self.k),
            ("trials", &self.trials),
            ("seed", &self.seed),
            ("strategy", &self.strategy),
            ("suite", &self.suite),
            ("out", &self.out),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
        .collect()
    }
}

fn load(command: Command, opts: &Opts) -> Result<SweepConfig, Error> {
    let mut pairs = Vec::new();
    if let Some(path) = &opts.config {
        let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        pairs = parse_config_text(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    }
    pairs.extend(opts.pairs());
    SweepConfig::from_pairs(command, &pairs)
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    let (command, opts) = match &cli.command {
        Cmd::PenaltySweep(o) => (Command::PenaltySweep, o),
        Cmd::RateSweep(o) => (Command::RateSweep, o),
        Cmd::Simulate(o) => (Command::Simulate, o),
        Cmd::Validate(o) => (Command::Validate, o),
    };
    let cfg = load(command, opts)?;
    if command == Command::Validate {
        let checks = run_suite(cfg.suite);
        for c in &checks {
            println!("{c}");
        }
        let failed = checks.iter().filter(|c| c.outcome == Outcome::Fail).count();
        println!("{} checks, {failed} failed", checks.len());
        return Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE });
    }
    let out = run_sweep(&cfg)?;
    match &cfg.out {
        Some(path) => {
            let f = fs::File::create(path).map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
            out.write_csv(io::BufWriter::new(f))?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            out.write_csv(&mut lock)?;
            lock.flush().ok();
        }
    }
    if out.failed > 0 {
        eprintln!("{} of {} points failed or were skipped", out.failed, out.rows.len());
    }
    Ok(ExitCode::from(out.exit_code() as u8))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            eprintln!("usvp: {e}");
            ExitCode::from(2)
        }
    }
}
