use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use log::info;

use pitsim::config::ConfigError;
use pitsim::harness::{mean_report, per_seed_rows, HarnessError};
use pitsim::kpi::{curves_csv, line_chart_svg, summary_report, Series, SummaryReport};
use pitsim::ticklog::{render_frame, replay, write_text_log, LogLevel, TickArchive};
use pitsim::{parse_config, run_simulation, Experiment, MineConfig, PolicyRegistry, SimResult};

macro_rules! out {
    ($($arg:tt)*) => {
        writeln!(std::io::stdout(), $($arg)*)?
    };
}

#[derive(Parser)]
#[command(name = "pitsim", version, about = "Open-pit truck dispatch simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its artifacts.
    Run(RunArgs),
    /// Run every policy against every seed and write a comparison report.
    Compare(CompareArgs),
    /// Render SVG frames from a tick file.
    Visualize(VisualizeArgs),
    /// Print a config in canonical form (the bundled scenario by default).
    ConfigEmit {
        #[arg(short = 'f', long = "config")]
        config: Option<PathBuf>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Check a config and list every problem found.
    Validate {
        #[arg(short = 'f', long = "config")]
        config: PathBuf,
    },
    /// Print the config JSON schema.
    Schema,
    /// List registered dispatch policies.
    Policies,
}

#[derive(Args)]
struct Common {
    /// Mine config (JSON). Defaults to the bundled synthetic scenario.
    #[arg(short = 'f', long = "config")]
    config: Option<PathBuf>,
    /// Simulated minutes. Defaults to the config's duration.
    #[arg(short = 't', long = "duration-minutes")]
    duration: Option<f64>,
    #[arg(short, long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(short = 'd', long = "dispatcher")]
    dispatcher: String,
    /// Defaults to the config's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Also render frames for tick range A..B (inclusive).
    #[arg(long)]
    frames: Option<String>,
    /// Minimum level written to run.log: error, warn, info or debug.
    #[arg(long, default_value = "info")]
    log_level: LogLevel,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    common: Common,
    #[arg(short = 'd', long = "dispatcher", required = true)]
    dispatchers: Vec<String>,
    /// Repeatable. Defaults to the config's seed.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Worker threads (defaults to available cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct VisualizeArgs {
    /// Tick file written by `run`.
    archive: PathBuf,
    /// Tick range A..B (inclusive); all ticks by default.
    #[arg(long)]
    frames: Option<String>,
    /// Frame directory. Defaults to `frames/` next to the tick file.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

enum Failure {
    Validation(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.into())
    }
}

fn invalid(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Validation(e.into())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("PITSIM_LOG", "warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Visualize(a) => cmd_visualize(a),
        Command::ConfigEmit { config, out } => cmd_config_emit(config, out),
        Command::Validate { config } => cmd_validate(&config),
        Command::Schema => (|| {
            out!("{}", MineConfig::json_schema());
            Ok(())
        })(),
        Command::Policies => (|| {
            for name in PolicyRegistry::with_baselines().names() {
                out!("{name}");
            }
            Ok(())
        })(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        // Output piped into something that stopped reading.
        Err(Failure::Runtime(e))
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(Failure::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn config_error(e: ConfigError) -> Failure {
    match e {
        ConfigError::Io { .. } => Failure::Runtime(e.into()),
        other => {
            let lines: Vec<String> = other.issues().iter().map(|i| format!("  {i}")).collect();
            invalid(anyhow::anyhow!("invalid config:\n{}", lines.join("\n")))
        }
    }
}

fn load_config(path: Option<&Path>) -> Result<MineConfig, Failure> {
    match path {
        Some(p) => parse_config(p).map_err(config_error),
        None => Ok(MineConfig::bundled()),
    }
}

fn duration_of(common: &Common, config: &MineConfig) -> Result<f64, Failure> {
    let d = common.duration.unwrap_or(config.simulation.duration);
    if !(d > 0.0 && d.is_finite()) {
        return Err(invalid(anyhow::anyhow!("duration must be > 0, got {d}")));
    }
    Ok(d)
}

fn unknown_policy(name: &str, registry: &PolicyRegistry) -> Failure {
    invalid(anyhow::anyhow!(
        "unknown dispatcher {name:?}; registered: {}",
        registry.names().join(", ")
    ))
}

/// Parses `A..B` (inclusive) against `len` ticks.
fn parse_range(spec: Option<&str>, len: usize) -> Result<(usize, usize), Failure> {
    let Some(spec) = spec else {
        return Ok((0, len.saturating_sub(1)));
    };
    let (a, b) = spec.split_once("..").ok_or_else(|| {
        invalid(anyhow::anyhow!(
            "frame range must look like A..B, got {spec:?}"
        ))
    })?;
    let a: usize = a
        .trim()
        .parse()
        .map_err(|_| invalid(anyhow::anyhow!("bad range start {a:?}")))?;
    let b: usize = b
        .trim()
        .parse()
        .map_err(|_| invalid(anyhow::anyhow!("bad range end {b:?}")))?;
    if a > b {
        return Err(invalid(anyhow::anyhow!("inverted frame range {a}..{b}")));
    }
    if b >= len {
        return Err(invalid(anyhow::anyhow!(
            "frame range {a}..{b} outside archive of {len} ticks (0..{})",
            len.saturating_sub(1)
        )));
    }
    Ok((a, b))
}

fn write_frames(archive: &TickArchive, range: (usize, usize), dir: &Path) -> anyhow::Result<usize> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let config = &archive.header.config;
    for tick in &archive.ticks[range.0..=range.1] {
        let path = dir.join(format!("frame_{:05}.svg", tick.index));
        fs::write(&path, render_frame(tick, config))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(range.1 - range.0 + 1)
}

fn write_curves(dir: &Path, runs: &[&SimResult], duration: f64) -> anyhow::Result<()> {
    let label = |r: &SimResult| {
        if runs.iter().filter(|o| o.policy == r.policy).count() > 1 {
            format!("{} s{}", r.policy, r.seed)
        } else {
            r.policy.clone()
        }
    };
    let production: Vec<Series> = runs
        .iter()
        .map(|r| Series {
            name: label(r),
            points: r.kpis.production_curve.clone(),
        })
        .collect();
    let waiting: Vec<Series> = runs
        .iter()
        .map(|r| Series {
            name: label(r),
            points: r.kpis.waiting_curve.clone(),
        })
        .collect();
    fs::write(dir.join("production.csv"), curves_csv(&production))?;
    fs::write(dir.join("waiting.csv"), curves_csv(&waiting))?;
    fs::write(
        dir.join("production.svg"),
        line_chart_svg("Production", "tons delivered", duration, &production),
    )?;
    fs::write(
        dir.join("waiting.svg"),
        line_chart_svg("Waiting trucks", "trucks", duration, &waiting),
    )?;
    Ok(())
}

fn write_report(dir: &Path, report: &SummaryReport) -> anyhow::Result<()> {
    fs::write(dir.join("summary.csv"), report.to_csv())?;
    fs::write(dir.join("summary.md"), report.to_markdown())?;
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<(), Failure> {
    let config = load_config(a.common.config.as_deref())?;
    let duration = duration_of(&a.common, &config)?;
    let registry = PolicyRegistry::with_baselines();
    let mut policy = registry
        .create(&a.dispatcher)
        .ok_or_else(|| unknown_policy(&a.dispatcher, &registry))?;
    let seed = a.seed.unwrap_or(config.simulation.seed);
    let frames = a.frames.as_deref();
    let expected_ticks =
        pitsim::ticklog::tick_times(duration, config.simulation.tick_interval).len();
    let range = frames
        .map(|f| parse_range(Some(f), expected_ticks))
        .transpose()?;

    let result = run_simulation(&config, policy.as_mut(), seed, duration)
        .with_context(|| format!("{} seed {seed}", a.dispatcher))?;

    let dir = a.common.out.join(format!("{}-seed{seed}", a.dispatcher));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("config.json"), config.to_json())?;
    result
        .archive
        .write_ndjson(BufWriter::new(File::create(dir.join("ticks.ndjson"))?))?;
    let mut events = BufWriter::new(File::create(dir.join("events.ndjson"))?);
    for r in result.events.iter() {
        serde_json::to_writer(&mut events, r).context("writing events")?;
        events.write_all(b"\n")?;
    }
    events.flush()?;
    write_text_log(
        &result.events,
        a.log_level,
        BufWriter::new(File::create(dir.join("run.log"))?),
    )?;
    write_report(
        &dir,
        &summary_report(std::slice::from_ref(&result)).map_err(anyhow::Error::from)?,
    )?;
    write_curves(&dir, &[&result], duration)?;
    if let Some(range) = range {
        let n = write_frames(&result.archive, range, &dir.join("frames"))?;
        info!("rendered {n} frames");
    }

    let k = &result.kpis;
    out!("{}", dir.display());
    out!("produced tons    {:.2}", k.produced_tons);
    out!(
        "matching factor  {}",
        k.match_factor.map_or("n/a".into(), |m| format!("{m:.4}"))
    );
    out!("total wait time  {:.2} min", k.total_wait_time);
    out!("road jams        {}", k.road_jams);
    out!(
        "ADL              {}",
        k.adl.map_or("n/a".into(), |s| format!("{:.6} s", s))
    );
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> Result<(), Failure> {
    let config = load_config(a.common.config.as_deref())?;
    let duration = duration_of(&a.common, &config)?;
    let registry = PolicyRegistry::with_baselines();
    for name in &a.dispatchers {
        if !registry.contains(name) {
            return Err(unknown_policy(name, &registry));
        }
    }
    let seeds = if a.seeds.is_empty() {
        vec![config.simulation.seed]
    } else {
        a.seeds.clone()
    };
    let mut experiment = Experiment::new(a.dispatchers.clone(), seeds.clone(), duration);
    if let Some(t) = a.threads {
        experiment.threads = t.max(1);
    }
    let runs = experiment.run(&config, &registry).map_err(|e| match e {
        HarnessError::NoPolicies | HarnessError::NoSeeds | HarnessError::UnknownPolicy { .. } => {
            invalid(e)
        }
        other => Failure::Runtime(other.into()),
    })?;
    let report = mean_report(&runs).map_err(anyhow::Error::from)?;

    let dir = a.common.out.join("compare");
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_report(&dir, &report)?;
    let mut per_seed =
        String::from("Name,Seed,Produced Tons,Matching Factor,Total Wait Time,Road Jams,ADL\n");
    for (seed, r) in per_seed_rows(&runs) {
        per_seed.push_str(&format!(
            "{},{seed},{:.2},{},{:.2},{},{}\n",
            r.name,
            r.produced_tons,
            r.match_factor.map_or("n/a".into(), |m| format!("{m:.4}")),
            r.total_wait_time,
            r.road_jams,
            r.adl.map_or("n/a".into(), |s| format!("{s:.6}")),
        ));
    }
    fs::write(dir.join("per_seed.csv"), per_seed)?;
    // curves of the first seed for each policy
    let first: Vec<&SimResult> = runs.iter().filter(|r| r.seed == seeds[0]).collect();
    write_curves(&dir, &first, duration)?;
    out!("{}", dir.display());
    write!(std::io::stdout(), "{}", report.to_markdown())?;
    Ok(())
}

fn cmd_visualize(a: VisualizeArgs) -> Result<(), Failure> {
    let file =
        File::open(&a.archive).with_context(|| format!("opening {}", a.archive.display()))?;
    let archive = replay(BufReader::new(file))
        .map_err(|e| invalid(anyhow::Error::from(e).context(a.archive.display().to_string())))?;
    let range = parse_range(a.frames.as_deref(), archive.ticks.len())?;
    let dir = a.out.unwrap_or_else(|| {
        a.archive
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join("frames")
    });
    let n = write_frames(&archive, range, &dir)?;
    out!("{n} frames in {}", dir.display());
    Ok(())
}

fn cmd_config_emit(config: Option<PathBuf>, out: Option<PathBuf>) -> Result<(), Failure> {
    let config = load_config(config.as_deref())?;
    let json = config.to_json();
    match out {
        Some(path) => fs::write(&path, format!("{json}\n"))
            .with_context(|| format!("writing {}", path.display()))?,
        None => out!("{json}"),
    }
    Ok(())
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let config = parse_config(path).map_err(config_error)?;
    out!(
        "{}: ok ({} trucks, {} shovels, {} load sites, {} dump sites)",
        path.display(),
        config.truck_count(),
        config.shovel_count(),
        config.load_sites.len(),
        config.dump_sites.len()
    );
    Ok(())
}
