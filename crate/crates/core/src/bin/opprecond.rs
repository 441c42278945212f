use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use opprecond::bench::{run, ConfigFile, ConfigOverrides, DEFAULTS_HELP};

#[derive(Parser)]
#[command(name = "opprecond", version, about = "Condition numbers of operator preconditioners on refinement ladders")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment; exit 0 on success, 1 if a level failed, 2 on config errors.
    #[command(after_help = DEFAULTS_HELP)]
    Run(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment file (`key = value` lines under `[section]` headers).
    #[arg(long)]
    config: Option<PathBuf>,
    /// interval | closed-polygon | ellipse | unit-square | cube-surface
    #[arg(long)]
    geometry: Option<String>,
    #[arg(long)]
    levels: Option<usize>,
    /// dg0 | dg2 | cg1 | cg3 (any dg<l> or cg<l>)
    #[arg(long)]
    space: Option<String>,
    /// sl-curve | order2 | identity
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    /// One value or a comma-separated sweep.
    #[arg(long, value_delimiter = ',')]
    beta: Option<Vec<f64>>,
    /// new | jacobi | opp | ssc, comma-separated.
    #[arg(long, value_delimiter = ',')]
    precond: Option<Vec<String>>,
    /// uniform | corner-local
    #[arg(long)]
    refine: Option<String>,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Text table output path.
    #[arg(long)]
    table: Option<PathBuf>,
    /// Fill the setup_s and apply_s columns.
    #[arg(long)]
    timings: bool,
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let Command::Run(args) = Cli::parse().command;
    let mut file = match &args.config {
        Some(p) => match ConfigFile::load(p) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("error: {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => ConfigFile::default(),
    };
    file.apply(&ConfigOverrides {
        geometry: args.geometry,
        levels: args.levels,
        space: args.space,
        backend: args.backend,
        s: args.s,
        alpha: args.alpha,
        beta: args.beta,
        precond: args.precond,
        refine: args.refine,
        out: args.out,
        table: args.table,
        timings: args.timings.then_some(true),
        seed: args.seed,
    });
    let cfg = match file.resolve() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(&cfg) {
        Ok(out) => {
            print!("{}", out.table);
            for (level, change) in &out.oracle_changes {
                println!("level {level}: fine-oracle change {change:.2e}");
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if matches!(e, opprecond::Error::Config(_) | opprecond::Error::Parse { .. }) { 2 } else { 1 })
        }
    }
}
