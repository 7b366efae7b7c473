mod commands;
mod config;
mod grid;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use cachenet::Execution;
use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use commands::*;
use config::FileConfig;
use grid::Grid;
use table::{write_outputs, Envelope, Table};

#[derive(Parser, Debug)]
#[command(name = "cachenet", version = concat!(env!("CARGO_PKG_VERSION"), " (", env!("CACHENET_GIT_DESCRIBE"), ")"), about = "Cache-enabled heterogeneous network experiments")]
struct Cli {
    /// JSON file of config keys applied on top of the defaults (or the preset).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed of every random stream.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// Run the data series of a figure instead of a subcommand.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Run every data-parallel loop on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Association, case and serving-node probabilities.
    Association(AssociationArgs),
    /// Active D2D transmitter density and its critical caching ratios.
    D2dDensity(AlphaArgs),
    /// Ergodic rate per case and serving tier.
    Rate(RateArgs),
    /// Outage probability per case and serving tier.
    Outage(OutageArgs),
    /// SINR distribution per case and serving tier.
    SinrCdf(SinrCdfArgs),
    /// Queue metrics per node type and request class.
    Queue(QueueArgs),
    /// Steady rulers against the request intensity.
    Steady(SteadyArgs),
    /// Largest stable request intensity with and without caching.
    BaselineCompare(BaselineArgs),
    /// One Monte Carlo run next to the analytic values.
    Simulate(SimulateArgs),
    /// Any command over a grid of one config key.
    Sweep(SweepArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Association(_) => "association",
            Command::D2dDensity(_) => "d2d-density",
            Command::Rate(_) => "rate",
            Command::Outage(_) => "outage",
            Command::SinrCdf(_) => "sinr-cdf",
            Command::Queue(_) => "queue",
            Command::Steady(_) => "steady",
            Command::BaselineCompare(_) => "baseline-compare",
            Command::Simulate(_) => "simulate",
            Command::Sweep(_) => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Preset {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
    Steady,
}

fn grid(s: &str) -> Option<Grid> {
    Some(s.parse().expect("built-in grid"))
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3a => "fig3a",
            Preset::Fig3b => "fig3b",
            Preset::Fig4 => "fig4",
            Preset::Fig5 => "fig5",
            Preset::Fig6 => "fig6",
            Preset::Fig7 => "fig7",
            Preset::Steady => "steady",
        }
    }

    /// Base configuration and the command producing the figure's series.
    fn plan(self) -> (FileConfig, Command) {
        let mc = FileConfig::default().with_large_torus();
        match self {
            Preset::Fig2 => (
                FileConfig::default(),
                Command::Association(AssociationArgs { gamma: grid("0:2.5:0.1"), with_mc: false }),
            ),
            Preset::Fig3a | Preset::Fig3b => {
                let cfg = if self == Preset::Fig3b { FileConfig { p1_dbm: 13.0, ..mc } } else { mc };
                let args = RateArgs { alpha: grid("0:0.6:0.01"), with_mc: true, mc_alpha: grid("0.05:0.6:0.05") };
                (cfg, Command::Rate(args))
            }
            Preset::Fig4 => (
                mc,
                Command::Outage(OutageArgs {
                    alpha: grid("0:0.6:0.02"),
                    tau_db: grid("-10,-5"),
                    with_mc: true,
                    mc_alpha: grid("0.05:0.6:0.05"),
                }),
            ),
            Preset::Fig5 => {
                (mc, Command::SinrCdf(SinrCdfArgs { alpha: grid("0.05,0.1"), tau_db: grid("-20:20:1"), with_mc: true }))
            }
            Preset::Fig6 => (
                FileConfig::queueing_reference(),
                Command::Queue(QueueArgs { varsigma: None, baseline: true, trace: None }),
            ),
            Preset::Fig7 => (
                FileConfig { ctmc_horizon_s: 100.0, ..FileConfig::queueing_reference() },
                Command::Queue(QueueArgs { varsigma: None, baseline: false, trace: Some(NodeArg::D2d) }),
            ),
            Preset::Steady => (
                FileConfig::queueing_reference(),
                Command::Steady(SteadyArgs { varsigma: grid("0:1.5:0.01"), gamma: grid("0.8,1.8"), baseline: true }),
            ),
        }
    }
}

/// Throughput gains reported alongside the computed ones by the steady preset.
const GAIN_TARGETS: [(f64, f64); 2] = [(0.8, 0.133), (1.8, 0.573)];

fn run(cli: Cli) -> anyhow::Result<()> {
    let started = Instant::now();
    let (base, command) = match (cli.preset, &cli.command) {
        (Some(p), _) => p.plan(),
        (None, Some(c)) => (FileConfig::default(), c.clone()),
        (None, None) => unreachable!("checked in main"),
    };
    let mut cfg = match &cli.config {
        Some(path) => base.merged(&FileConfig::load_overrides(path)?)?,
        None => base,
    };
    if cli.sequential {
        cfg.execution = Execution::Sequential;
    }
    cfg.network()?;
    let ctx = Ctx { cfg: cfg.clone(), seed: cli.seed, point: false };

    let mut extra: Option<Table> = None;
    let mut table = match &command {
        Command::Association(a) => association(&ctx, a)?,
        Command::D2dDensity(a) => d2d_density(&ctx, a)?,
        Command::Rate(a) => rate(&ctx, a)?,
        Command::Outage(a) => outage(&ctx, a)?,
        Command::SinrCdf(a) => sinr_cdf(&ctx, a)?,
        Command::Queue(a) => queue(&ctx, a)?,
        Command::Steady(a) => steady(&ctx, a)?,
        Command::BaselineCompare(a) => baseline_compare(&ctx, a)?,
        Command::Simulate(a) => {
            let (t, samples) = simulate_cmd(&ctx, a)?;
            extra = samples;
            t
        }
        Command::Sweep(a) => sweep(&ctx, a)?,
    };
    if cli.preset == Some(Preset::Steady) {
        for (gamma, target) in GAIN_TARGETS {
            table.note(format!("target_throughput_gain[gamma={gamma}]"), target);
        }
    }

    let stem = cli.preset.map_or(command.name(), Preset::name);
    let envelope = |t: &Table| Envelope {
        tool: "cachenet".into(),
        version: table::version(),
        command: command.name().into(),
        preset: cli.preset.map(|p| p.name().to_string()),
        arguments: std::env::args().skip(1).collect(),
        seed: cli.seed,
        wall_clock_s: started.elapsed().as_secs_f64(),
        config: cfg.clone(),
        summary: t.summary.clone(),
        columns: t.columns.clone(),
        rows: t.rows.clone(),
    };
    let (csv, _) = write_outputs(&cli.out, stem, &table, &envelope(&table))?;
    println!("{} rows -> {}", table.rows.len(), csv.display());
    for (k, v) in &table.summary {
        println!("  {k} = {v}");
    }
    if let Some(samples) = extra {
        let (csv, _) = write_outputs(&cli.out, &format!("{stem}_samples"), &samples, &envelope(&samples))?;
        println!("{} samples -> {}", samples.rows.len(), csv.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match (cli.preset, &cli.command) {
        (None, None) => {
            Cli::command().error(ErrorKind::MissingSubcommand, "give a subcommand or --preset").exit();
        }
        (Some(_), Some(_)) => {
            Cli::command().error(ErrorKind::ArgumentConflict, "--preset cannot be combined with a subcommand").exit();
        }
        _ => {}
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
