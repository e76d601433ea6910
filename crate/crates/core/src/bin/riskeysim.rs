use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use riskeysim::harness::{invariant_suite, preset, run_figure, write_csv, FigureId, Sweep, SweepParam};
use riskeysim::theory::{kmr_curve, write_curve_csv};
use riskeysim::{Error, ScenarioConfig};

const EXIT_CONFIG: u8 = 2;
const EXIT_INVARIANT: u8 = 3;

#[derive(Parser)]
#[command(name = "riskeysim", version, about = "Adversarial RIS attack simulator for physical-layer key generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one figure preset and write its CSV.
    Run {
        #[arg(long)]
        figure: FigureId,
        /// Scenario JSON; omitted fields keep the default scene.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the seed in the scenario file.
        #[arg(long)]
        seed: Option<u64>,
        /// Rounds per point; defaults to the preset's count.
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        rounds_per_epoch: Option<usize>,
        /// Dictionary points per angle axis.
        #[arg(long)]
        grid: Option<usize>,
        /// Snap scatterer angles to the dictionary grid.
        #[arg(long)]
        on_grid: bool,
    },
    /// Closed-form key match rate over a range of variance ratios.
    Theory {
        #[arg(long)]
        beta: f64,
        /// min:max:step in dB.
        #[arg(long, allow_hyphen_values = true)]
        ratio_db: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the built-in invariant checks.
    Validate,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::Domain(_) | Error::Json(_) | Error::Io(_) => EXIT_CONFIG,
        _ => EXIT_INVARIANT,
    }
}

fn parse_range(text: &str) -> Result<Vec<f64>, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| Error::Config(format!("bad range `{text}`: {e}")))?;
    let [lo, hi, step] = nums[..] else {
        return Err(Error::Config(format!("range `{text}` is not min:max:step")));
    };
    if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Config(format!("range `{text}` needs min <= max and a positive step")));
    }
    Ok(Sweep::range(SweepParam::RatioDb, lo, hi, step).values)
}

fn create(path: &PathBuf) -> Result<BufWriter<File>, Error> {
    Ok(BufWriter::new(File::create(path)?))
}

#[allow(clippy::too_many_arguments)]
fn run(
    figure: FigureId,
    config: Option<PathBuf>,
    out: PathBuf,
    seed: Option<u64>,
    rounds: Option<usize>,
    threads: Option<usize>,
    rounds_per_epoch: Option<usize>,
    grid: Option<usize>,
    on_grid: bool,
) -> Result<(), Error> {
    let base = match config {
        Some(p) => ScenarioConfig::from_json_file(p)?,
        None => ScenarioConfig::preset(),
    };
    let mut spec = preset(figure, base);
    spec.settings.seed = seed.unwrap_or(spec.base.seed);
    if let Some(r) = rounds {
        spec.settings.rounds = r;
    }
    if let Some(r) = rounds_per_epoch {
        spec.settings.rounds_per_epoch = r;
    }
    if let Some(g) = grid {
        spec.settings.sensing.grid_el = g;
        spec.settings.sensing.grid_az = g;
    }
    spec.settings.sensing.on_grid = on_grid;
    spec.validate()?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(Error::Config("thread count must be positive".into()));
        }
        pool = pool.num_threads(t);
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let result = pool.install(|| run_figure(&spec))?;
    let mut w = create(&out)?;
    write_csv(&mut w, &spec, &result)?;
    w.flush()?;
    eprintln!("wrote {} rows to {}", result.rows.len(), out.display());
    Ok(())
}

fn theory(beta: f64, ratio_db: &str, out: PathBuf) -> Result<(), Error> {
    let grid = parse_range(ratio_db)?;
    let points = kmr_curve(beta, &grid)?;
    let mut w = create(&out)?;
    write_curve_csv(&mut w, beta, &points)?;
    w.flush()?;
    Ok(())
}

fn validate() -> Result<bool, Error> {
    let mut all = true;
    for c in invariant_suite()? {
        println!("{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail);
        all &= c.passed;
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { figure, config, out, seed, rounds, threads, rounds_per_epoch, grid, on_grid } => {
            run(figure, config, out, seed, rounds, threads, rounds_per_epoch, grid, on_grid).map(|_| true)
        }
        Command::Theory { beta, ratio_db, out } => theory(beta, &ratio_db, out).map(|_| true),
        Command::Validate => validate(),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INVARIANT),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
