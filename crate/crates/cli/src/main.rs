mod config;
mod report;
mod svg;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use wpl_core::experiments::{run_equivalence_suite, run_experiment, ExperimentOutput, Status};
use wpl_core::exponents::{exponents, parse_rational, ExponentRow};
use wpl_core::extremizers::random_annulus;
use wpl_core::norms::{hfio_discrete_norm, sobolev_norm, square_function_norm};
use wpl_core::propagator::propagate_field;
use wpl_core::{DirectionSet, Domain, Field, GridSpec, PhaseSymbol, SectorPartition, SphereRule, Spectrum, WavePacketSystem};

/// A request that cannot run as given (bad flags, config or input files).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

#[derive(Parser)]
#[command(name = "wpl", version, about = "Wave-packet norms, half-wave propagators and scaling experiments")]
struct Cli {
    /// Worker threads (default: WPL_THREADS, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Single-threaded run.
    #[arg(long, global = true)]
    deterministic: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of s(p), sigma(p), d(p) and d(p) - s(p).
    Exponents {
        #[arg(long, default_value_t = 2)]
        n: usize,
        /// Comma-separated exponents: integers, decimals or a/b.
        #[arg(long, value_delimiter = ',', default_values_t = ["2".to_string(), "4".to_string(), "6".to_string(), "12".to_string()])]
        p: Vec<String>,
        #[arg(long)]
        json: bool,
    },
    /// Builds and checks the direction set and sector partition at scale k.
    Partition {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        k: u32,
        /// Write the direction set as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluates one norm of a field file or a random annulus input.
    Norm {
        #[arg(long, value_enum)]
        kind: NormKind,
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.0)]
        s: f64,
        /// Dyadic scale of the sector partition (hfio, square-function).
        #[arg(long)]
        k: Option<u32>,
        #[arg(long, default_value_t = 2.0)]
        gamma: f64,
    },
    /// Applies exp(i t phi(D)) to a field and writes the result.
    Propagate {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value = "euclidean")]
        phase: String,
        /// Output file (.json for N <= 64, binary otherwise).
        #[arg(long)]
        output: PathBuf,
    },
    /// Runs a scaling sweep from a TOML config.
    Experiment {
        config: Option<PathBuf>,
        /// Override a config key, e.g. --set p=6 --set k_max=6.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
        /// Validate the config and print it without running.
        #[arg(long)]
        dry_run: bool,
        /// Print every default as a markdown reference page and exit.
        #[arg(long)]
        print_defaults: bool,
    },
    /// Runs the equivalence suite.
    Suite {
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Drop this sector from every partition (sensitivity check).
        #[arg(long)]
        mutate: Option<usize>,
        /// Summary JSON path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summarizes record files: hash check, fit table and plots.
    Report {
        /// JSONL files or directories holding them.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        /// Markdown output (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NormKind {
    Lp,
    Sobolev,
    Hfio,
    HfioContinuous,
    SquareFunction,
}

#[derive(clap::Args)]
struct InputArgs {
    /// Field file (.json or binary).
    #[arg(long, conflicts_with = "random_annulus")]
    input: Option<PathBuf>,
    /// Use a seeded random annulus input at this scale instead of a file.
    #[arg(long)]
    random_annulus: Option<u32>,
    #[arg(long, default_value_t = 256)]
    points: usize,
    #[arg(long, default_value_t = 2)]
    dim: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

impl InputArgs {
    /// The input as a frequency-domain spectrum.
    fn load(&self) -> Result<Spectrum> {
        if let Some(k) = self.random_annulus {
            let grid = GridSpec::standard(self.dim, self.points)?;
            return Ok(random_annulus(self.dim, k, self.seed, grid)?.total);
        }
        let Some(path) = &self.input else {
            return Err(UsageError("give --input FILE or --random-annulus K".into()).into());
        };
        let f = read_field(path)?;
        let f = if f.domain() == Domain::Space { f.forward()? } else { f };
        Ok(Spectrum::from_field(&f)?)
    }
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "json")
}

fn read_field(path: &Path) -> Result<Field> {
    let f = if is_json(path) {
        Field::from_json(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
    } else {
        Field::read_binary(std::io::BufReader::new(std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?))
    };
    f.map_err(|e| e.context(&path.display().to_string()).into())
}

fn write_field(path: &Path, f: &Field) -> Result<()> {
    if is_json(path) {
        std::fs::write(path, f.to_json()?)?;
    } else {
        f.write_binary(std::io::BufWriter::new(std::fs::File::create(path)?))?;
    }
    Ok(())
}

fn configure_threads(cli: &Cli) -> Result<()> {
    let threads = if cli.deterministic {
        Some(1)
    } else if let Some(t) = cli.threads {
        Some(t)
    } else {
        match std::env::var("WPL_THREADS") {
            Ok(v) => Some(v.parse::<usize>().map_err(|_| UsageError(format!("WPL_THREADS={v:?} is not a thread count")))?),
            Err(_) => None,
        }
    };
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global().context("configuring the thread pool")?;
    }
    Ok(())
}

fn cmd_exponents(n: usize, ps: &[String], as_json: bool) -> Result<ExitCode> {
    let rows: Vec<ExponentRow> = ps
        .iter()
        .map(|p| Ok(ExponentRow::from(&exponents(n, parse_rational(p)?)?)))
        .collect::<Result<_>>()?;
    if as_json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        println!("{:>3} {:>8} {:>10} {:>10} {:>10} {:>10}", "n", "p", "s(p)", "sigma(p)", "d(p)", "d-s");
        for r in &rows {
            println!("{:>3} {:>8} {:>10} {:>10} {:>10} {:>10}", r.n, r.p, r.s, r.sigma, r.d, r.gap);
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_partition(n: usize, k: u32, out: Option<&Path>) -> Result<ExitCode> {
    let dirs = DirectionSet::build(n, k)?;
    let verdict = dirs.verify();
    let cover = dirs.covering_radius(&DirectionSet::probe_mesh(n, dirs.delta));
    let part = SectorPartition::new(dirs.clone())?;
    let summary = json!({
        "n": n,
        "k": k,
        "delta": dirs.delta,
        "directions": dirs.len(),
        "min_separation": dirs.min_separation(),
        "covering_radius": cover,
        "support_radius": part.support_radius(),
        "verified": verdict.is_ok(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(path) = out {
        std::fs::write(path, dirs.to_json())?;
    }
    match verdict {
        Ok(()) => Ok(ExitCode::SUCCESS),
        Err(e) => {
            eprintln!("direction set check failed: {e}");
            Ok(ExitCode::from(1))
        }
    }
}

fn need_k(k: Option<u32>) -> Result<u32> {
    k.ok_or_else(|| UsageError("this norm needs --k".into()).into())
}

fn cmd_norm(kind: NormKind, input: &InputArgs, p: f64, s: f64, k: Option<u32>, gamma: f64) -> Result<ExitCode> {
    let f = input.load()?;
    let (name, value, extra) = match kind {
        NormKind::Lp => ("lp", f.lp_norm(p, gamma)?, json!({})),
        NormKind::Sobolev => ("sobolev", sobolev_norm(&f, s, p, gamma)?, json!({})),
        NormKind::Hfio => {
            let part = SectorPartition::build(f.n(), need_k(k)?)?;
            let h = hfio_discrete_norm(&f, s, p, &part, gamma)?;
            ("hfio", h.value, serde_json::to_value(&h)?)
        }
        NormKind::HfioContinuous => {
            let k = need_k(k)?;
            let sys = WavePacketSystem::new(f.n())?;
            let c = sys.hfio_continuous_norm(&f, s, p, &SphereRule::matched(f.n(), k)?, gamma)?;
            ("hfio-continuous", c.value, serde_json::to_value(&c)?)
        }
        NormKind::SquareFunction => {
            let part = SectorPartition::build(f.n(), need_k(k)?)?;
            ("square-function", square_function_norm(&f, p, &part, gamma)?, json!({}))
        }
    };
    let out = json!({ "norm": name, "p": p, "s": s, "value": value, "details": extra });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_propagate(input: &InputArgs, t: f64, phase: &str, output: &Path) -> Result<ExitCode> {
    let f = input.load()?;
    let phase = PhaseSymbol::parse(phase, f.n())?;
    let u = propagate_field(&f.to_field(), t, &phase)?.inverse()?;
    write_field(output, &u)?;
    println!(
        "{}",
        json!({ "t": t, "phase": phase.name(), "l2_before": f.l2_norm(), "l2_after": u.lp_norm(2.0)?, "output": output })
    );
    Ok(ExitCode::SUCCESS)
}

fn stem(out: &ExperimentOutput) -> String {
    let c = &out.config;
    format!("{}-n{}-p{}-{}-{}", c.experiment, c.n, c.p, c.extremizer, c.phase.replace([':', ','], "_"))
}

fn cmd_experiment(config: Option<&Path>, overrides: &[String], out: &Path, dry_run: bool, print_defaults: bool) -> Result<ExitCode> {
    if print_defaults {
        print!("{}", config::defaults_reference()?);
        return Ok(ExitCode::SUCCESS);
    }
    let cfg = config::load_experiment(config, overrides)?;
    if dry_run {
        println!("{}", toml::to_string(&cfg)?);
        eprintln!("config valid; nothing written (dry run)");
        return Ok(ExitCode::SUCCESS);
    }
    let result = run_experiment(&cfg)?;
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let base = out.join(stem(&result));
    let jsonl = base.with_extension("jsonl");
    std::fs::write(&jsonl, result.to_jsonl())?;
    std::fs::write(base.with_extension("csv"), result.to_csv())?;
    let (plot, ..) = report::read_record_file(&jsonl)?;
    std::fs::write(base.with_extension("svg"), svg::render(&plot))?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{}",
        json!({
            "experiment": cfg.experiment.to_string(),
            "slope": result.fit.slope,
            "predicted_slope": result.predicted_slope,
            "check": result.check,
            "passed": result.passed,
            "records": jsonl,
            "content_hash": result.content_hash(),
        })
    );
    Ok(if result.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_suite(config: Option<&Path>, overrides: &[String], mutate: Option<usize>, out: Option<&Path>) -> Result<ExitCode> {
    let mut cfg = config::load_suite(config, overrides)?;
    if mutate.is_some() {
        cfg.drop_sector = mutate;
    }
    let report = run_equivalence_suite(&cfg)?;
    for t in &report.tests {
        let tag = match t.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        };
        eprintln!("{tag} {:<36} {:>7.2}s  {}", t.name, t.seconds, t.detail);
    }
    let summary = serde_json::to_string_pretty(&report)?;
    match out {
        Some(path) => std::fs::write(path, &summary)?,
        None => println!("{summary}"),
    }
    let failures = report.failures();
    if failures.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        let names: Vec<&str> = failures.iter().map(|t| t.name.as_str()).collect();
        eprintln!("failed: {}", names.join(", "));
        Ok(ExitCode::from(1))
    }
}

fn cmd_report(inputs: &[PathBuf], out: Option<&Path>) -> Result<ExitCode> {
    let files = report::collect_inputs(inputs)?;
    let entries: Vec<report::Entry> = files.iter().map(|f| report::summarize(f)).collect::<Result<_>>()?;
    let md = report::markdown(&entries);
    match out {
        Some(path) => std::fs::write(path, &md)?,
        None => print!("{md}"),
    }
    for e in entries.iter().filter(|e| !e.hash_ok) {
        eprintln!("content hash mismatch: {}", e.path.display());
    }
    Ok(if entries.iter().all(|e| e.passed && e.hash_ok) { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn run(cli: Cli) -> Result<ExitCode> {
    configure_threads(&cli)?;
    match &cli.command {
        Command::Exponents { n, p, json } => cmd_exponents(*n, p, *json),
        Command::Partition { n, k, out } => cmd_partition(*n, *k, out.as_deref()),
        Command::Norm { kind, input, p, s, k, gamma } => cmd_norm(*kind, input, *p, *s, *k, *gamma),
        Command::Propagate { input, t, phase, output } => cmd_propagate(input, *t, phase, output),
        Command::Experiment { config, overrides, out, dry_run, print_defaults } => {
            cmd_experiment(config.as_deref(), overrides, out, *dry_run, *print_defaults)
        }
        Command::Suite { config, overrides, mutate, out } => cmd_suite(config.as_deref(), overrides, *mutate, out.as_deref()),
        Command::Report { inputs, out } => cmd_report(inputs, out.as_deref()),
    }
}

/// 2 for requests that cannot run as given, 3 for failures during computation.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<UsageError>().is_some() {
        return 2;
    }
    if let Some(e) = err.downcast_ref::<wpl_core::Error>() {
        return if e.is_usage() { 2 } else { 3 };
    }
    if err.downcast_ref::<std::io::Error>().is_some() {
        return 2;
    }
    3
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
