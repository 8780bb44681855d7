//! `drpa`: run single trials, benchmark suites, generate scenario files and
//! certify the detour guidance function.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use drpa_core::bench::config::ParamsFile;
use drpa_core::bench::trajectory::write_jsonl;
use drpa_core::bench::{run_suite, run_trial_with, trial_seeds, PlannerConfig, PlannerVariant, SuiteConfig, SuiteReport, TrialOptions, CSV_HEADER};
use drpa_core::certify;
use drpa_core::scenario::{make_qualitative, make_random_grid, Convexity, QualitativeKind, Scenario};

#[derive(Parser, Debug)]
#[command(name = "drpa", version, about = "MPPI navigation with local-minimum detection and detour guidance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one closed-loop trial and export its trajectory as JSON lines.
    Simulate(SimulateArgs),
    /// Run a random-grid suite per planner and print SR / ST / CT.
    Bench(BenchArgs),
    /// Write scenario JSON files.
    GenScenarios(GenArgs),
    /// Run the numerical property suites for the detour guidance function.
    Certify(CertifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
struct PlannerArgs {
    /// mppi, logmppi or drpa
    #[arg(long, default_value = "drpa")]
    planner: String,
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    /// Number of sampled rollouts per cycle.
    #[arg(long)]
    k: Option<usize>,
    /// TOML file with parameter overrides.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl PlannerArgs {
    fn build(&self, planner: &str) -> Result<PlannerConfig> {
        let variant: PlannerVariant = planner.parse()?;
        let mut cfg = PlannerConfig::new(variant, self.horizon);
        if let Some(k) = self.k {
            cfg = cfg.with_rollouts(k);
        }
        if let Some(path) = &self.config {
            let file = ParamsFile::load(path).with_context(|| format!("reading {}", path.display()))?;
            file.apply(&mut cfg)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    planner: PlannerArgs,
    /// Scenario JSON file.
    #[arg(long, conflicts_with_all = ["qualitative", "grid"])]
    scenario: Option<PathBuf>,
    /// shortrect, longrect or ushape
    #[arg(long, conflicts_with = "grid")]
    qualitative: Option<String>,
    /// Random grid size (6 or 10), generated from --seed.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value = "nonconvex")]
    convexity: String,
    /// Seed for the random grid and the sampling noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Attach each cycle's predicted path to the records.
    #[arg(long)]
    predictions: bool,
    /// Trajectory output; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[command(flatten)]
    planner: PlannerArgs,
    #[arg(long, default_value_t = 6)]
    grid: usize,
    #[arg(long, default_value = "nonconvex")]
    convexity: String,
    /// Scenarios per suite.
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Random grid size; with --qualitative the three fixed layouts are written instead.
    #[arg(long, default_value_t = 6)]
    grid: usize,
    #[arg(long, default_value = "nonconvex")]
    convexity: String,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    qualitative: bool,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct CertifyArgs {
    #[arg(long, default_value_t = 20)]
    configs: usize,
    #[arg(long, default_value_t = 10_000)]
    points: usize,
    #[arg(long, default_value_t = 1000)]
    gradient_points: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

fn main() {
    if let Err(err) = run() {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    if let Ok(threads) = std::env::var("DRPA_THREADS") {
        let n: usize = threads.parse().context("DRPA_THREADS must be a positive integer")?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Bench(args) => bench(args),
        Command::GenScenarios(args) => gen_scenarios(args),
        Command::Certify(args) => run_certify(args),
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(
            fs::File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = args.planner.build(&args.planner.planner)?;
    let scenario = if let Some(path) = &args.scenario {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Scenario::from_json(&text)?
    } else if let Some(grid) = args.grid {
        make_random_grid(grid, args.convexity.parse()?, args.seed)?
    } else {
        let kind: QualitativeKind = args.qualitative.as_deref().unwrap_or("ushape").parse()?;
        make_qualitative(kind)
    };
    let options = TrialOptions {
        record_predictions: args.predictions,
    };
    let result = run_trial_with(&cfg, &scenario, args.seed, options)?;
    let mut out = open_out(args.out.as_deref())?;
    write_jsonl(&mut out, &result.trajectory)?;
    out.flush()?;
    eprintln!(
        "{} on {}: {} after {:.1} s ({} cycles, {:.2} ms/cycle, {} mode switches)",
        cfg.label(),
        scenario.label,
        if result.success {
            "success"
        } else if result.collision {
            "collision"
        } else {
            "timeout"
        },
        result.elapsed,
        result.cycles,
        result.mean_cycle_compute_ms,
        result.events.len(),
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let suite = SuiteConfig {
        grid_n: args.grid,
        convexity: args.convexity.parse()?,
    };
    let mut reports = Vec::new();
    for name in args.planner.planner.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let cfg = args.planner.build(name)?;
        let started = Instant::now();
        let report = run_suite(&cfg, suite, args.n, args.seed)?;
        eprintln!("{} {}: {:.1} s", cfg.label(), suite, started.elapsed().as_secs_f64());
        reports.push(report);
    }
    if reports.is_empty() {
        bail!("no planner given");
    }
    let out = open_out(args.out.as_deref())?;
    write_reports(out, &reports, args.format)
}

fn write_reports(mut out: Box<dyn Write>, reports: &[SuiteReport], format: Format) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in reports {
                w.write_record(r.csv_row())?;
            }
            w.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, reports)?;
            writeln!(out)?;
            out.flush()?;
        }
    }
    Ok(())
}

fn gen_scenarios(args: GenArgs) -> Result<()> {
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let write = |name: String, scenario: &Scenario| -> Result<()> {
        let path = args.out.join(name);
        fs::write(&path, scenario.to_json()?).with_context(|| format!("writing {}", path.display()))
    };
    if args.qualitative {
        for kind in QualitativeKind::ALL {
            write(format!("{kind}.json"), &make_qualitative(kind))?;
        }
        return Ok(());
    }
    let convexity: Convexity = args.convexity.parse()?;
    for i in 0..args.n {
        let (seed, _) = trial_seeds(args.seed, i);
        let scenario = make_random_grid(args.grid, convexity, seed)?;
        write(format!("grid{}_{}_{:05}.json", args.grid, convexity, i), &scenario)?;
    }
    eprintln!("wrote {} scenarios to {}", args.n, args.out.display());
    Ok(())
}

fn run_certify(args: CertifyArgs) -> Result<()> {
    let configs = certify::random_configs(args.configs, args.seed)?;
    let minimiser = certify::check_unique_minimiser(&configs, args.points, args.seed.wrapping_add(1));
    let radii = certify::check_repulsion_radius(&configs)?;
    let gradient = certify::check_gradient(&configs, args.gradient_points, 1e-6, args.seed.wrapping_add(2))?;
    let radius_err = radii.iter().map(|r| r.max_error()).fold(0.0, f64::max);

    let minimiser_ok = minimiser.passed();
    let radius_ok = radius_err <= 1e-6;
    let gradient_ok = gradient.max_relative_error < 1e-6;

    let mut out = io::stdout().lock();
    match args.format {
        Format::Json => {
            let doc = serde_json::json!({
                "minimiser": minimiser,
                "repulsion_radius": radii,
                "gradient": gradient,
                "passed": minimiser_ok && radius_ok && gradient_ok,
            });
            serde_json::to_writer_pretty(&mut out, &doc)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["suite", "passed", "detail"])?;
            w.write_record([
                "unique_minimiser",
                &minimiser_ok.to_string(),
                &format!(
                    "{} points, {} value / {} descent violations",
                    minimiser.points, minimiser.value_violations, minimiser.descent_violations
                ),
            ])?;
            w.write_record([
                "repulsion_radius",
                &radius_ok.to_string(),
                &format!("max bisection error {radius_err:.3e} m over {} configs", radii.len()),
            ])?;
            w.write_record([
                "gradient",
                &gradient_ok.to_string(),
                &format!("max relative error {:.3e} over {} points", gradient.max_relative_error, gradient.points),
            ])?;
            w.flush()?;
        }
    }
    if !(minimiser_ok && radius_ok && gradient_ok) {
        bail!("certification failed");
    }
    Ok(())
}
