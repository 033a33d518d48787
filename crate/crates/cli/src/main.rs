//! `vekua` command-line tool. Exit codes: 0 when every check passes, 1 when
//! a check fails, 2 for usage and configuration errors.

mod catalog;
mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::RunConfig;
use report::Report;

#[derive(Parser)]
#[command(
    name = "vekua",
    version,
    about = "Verify and generate solutions of (-Δ + u) f = 0"
)]
struct Cli {
    /// Worker threads for residual sweeps.
    #[arg(long, global = true, env = "VEKUA_THREADS")]
    threads: Option<usize>,
    /// Include wall-clock times in reports (makes them nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in example configuration.
    #[arg(long)]
    example: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the residual and identity checks of a configuration.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate both Cauchy integrals over a closed curve.
    Cauchy {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        curve: String,
        /// A named solution from the configuration, or `f0`.
        #[arg(long)]
        solution: String,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run the solution sequence and export each step as CSV.
    Sequence {
        #[command(flatten)]
        source: Source,
        /// Number of cycles; defaults to `pipeline.steps`.
        #[arg(long)]
        steps: Option<usize>,
        /// Output directory for `report.json` and `step_N.csv`; defaults to
        /// `output.dir` of the configuration.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in example configurations.
    Examples {
        #[command(subcommand)]
        action: ExamplesAction,
    },
}

#[derive(Subcommand)]
enum ExamplesAction {
    List,
    Show { name: String },
}

fn load(source: &Source) -> Result<(RunConfig, String), Failure> {
    if let Some(path) = &source.config {
        return Ok((RunConfig::load(path)?, path.display().to_string()));
    }
    let name = source.example.as_deref().expect("clap enforces one source");
    let value = catalog::get(name).ok_or_else(|| {
        config::err(
            "--example",
            format!("unknown example `{name}`; try `vekua examples list`"),
        )
    })?;
    Ok((
        RunConfig::from_json(&value.to_string(), name)?,
        name.to_string(),
    ))
}

fn emit(report: &Report, path: Option<PathBuf>) -> Result<(), Failure> {
    for c in &report.checks {
        let r = c
            .max_residual
            .map_or("n/a".to_string(), |r| format!("{r:.3e}"));
        eprintln!(
            "{} {} (residual {r}, tolerance {:.0e})",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.tolerance
        );
        if let Some(m) = &c.message {
            eprintln!("     {m}");
        }
    }
    if let Some(e) = &report.error {
        eprintln!("ERROR {e}");
    }
    match path {
        Some(p) => std::fs::write(&p, report.to_json() + "\n")
            .map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            println!("{}", report.to_json());
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, Failure> {
    let timings = cli.timings;
    match cli.command {
        Command::Verify { source, report } => {
            let (cfg, origin) = load(&source)?;
            let rep = commands::verify(&cfg, Some(origin), timings)?;
            emit(
                &rep,
                report.or(cfg.output.report.clone().map(PathBuf::from)),
            )?;
            Ok(rep.passed)
        }
        Command::Cauchy {
            source,
            curve,
            solution,
            report,
        } => {
            let (cfg, origin) = load(&source)?;
            let rep = commands::cauchy(&cfg, Some(origin), &curve, &solution, timings)?;
            emit(
                &rep,
                report.or(cfg.output.report.clone().map(PathBuf::from)),
            )?;
            Ok(rep.passed)
        }
        Command::Sequence { source, steps, out } => {
            let (cfg, origin) = load(&source)?;
            let n = steps.unwrap_or(cfg.pipeline.steps);
            let out = out
                .or(cfg.output.dir.clone().map(PathBuf::from))
                .ok_or_else(|| {
                    config::err("--out", "no output directory given and output.dir is unset")
                })?;
            let rep = commands::sequence(&cfg, Some(origin), n, &out, timings)?;
            emit(&rep, Some(out.join("report.json")))?;
            Ok(rep.passed)
        }
        Command::Examples { action } => {
            match action {
                ExamplesAction::List => {
                    for name in catalog::NAMES {
                        println!("{name:12} {}", catalog::describe(name).unwrap_or(""));
                    }
                }
                ExamplesAction::Show { name } => {
                    let v = catalog::get(&name).ok_or_else(|| {
                        config::err("examples show", format!("unknown example `{name}`"))
                    })?;
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&v).expect("catalog serializes")
                    );
                }
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot set {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
