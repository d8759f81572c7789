use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use corner_growth::experiment::{csv_schema, parse_config, run_experiment, ConfigOverrides, ExperimentKind, Format};
use corner_growth::Error;

const USAGE: u8 = 2;
const RUNTIME: u8 = 3;

fn schemas() -> String {
    let mut s = String::from("Columns of replicas.csv:\n");
    for kind in ExperimentKind::ALL {
        s.push_str(&format!("  {:<10} {}\n", kind.as_str(), csv_schema(kind).join(",")));
    }
    s.push_str(
        "\nsummary.csv: criterion,estimate,target,tolerance,pass\n\
         events.csv (tasep --events): time,bond,kind\n\
         \nExit codes: 0 all verdicts pass, 1 a verdict fails, 2 usage error, 3 runtime error.",
    );
    s
}

#[derive(Parser)]
#[command(name = "cgm", version, about = "Corner growth and TASEP experiments", after_help = schemas())]
struct Cli {
    #[command(subcommand)]
    experiment: Kind,
}

#[derive(Subcommand)]
enum Kind {
    /// Limit shape of the passage times along 25 rays
    Shape(Flags),
    /// Direction of the competition interface
    Direction(Flags),
    /// Distribution of the interface direction in the rarefaction fan
    Udist(Flags),
    /// Fluxes across the second class particle
    Clt(Flags),
    /// Wandering exponent of the competition interface
    Fluct(Flags),
    /// Interface against the second class particle, plus a Harris cross-check
    Coupling(Flags),
    /// Dual weights and the reversed process
    Duality(Flags),
    /// Second class particle speed in a Harris simulation
    Tasep(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    /// Box size or number of interface steps
    #[arg(long)]
    n: Option<i64>,
    /// Time horizon
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    replicas: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory [default: out/<experiment>]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary format: csv or json
    #[arg(long)]
    format: Option<Format>,
    /// Keep completed replicas from an interrupted run
    #[arg(long)]
    resume: bool,
    /// `key = value` file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the event log of replica 0 (tasep only)
    #[arg(long)]
    events: bool,
}

impl Kind {
    fn split(self) -> (ExperimentKind, Flags) {
        match self {
            Kind::Shape(f) => (ExperimentKind::Shape, f),
            Kind::Direction(f) => (ExperimentKind::Direction, f),
            Kind::Udist(f) => (ExperimentKind::Udist, f),
            Kind::Clt(f) => (ExperimentKind::Clt, f),
            Kind::Fluct(f) => (ExperimentKind::Fluct, f),
            Kind::Coupling(f) => (ExperimentKind::Coupling, f),
            Kind::Duality(f) => (ExperimentKind::Duality, f),
            Kind::Tasep(f) => (ExperimentKind::Tasep, f),
        }
    }
}

fn usage(e: &Error) -> bool {
    matches!(e, Error::Parameter(_) | Error::Parse { .. })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, f) = cli.experiment.split();
    let file = match &f.config {
        Some(p) => match fs::read_to_string(p) {
            Ok(s) => Some(s),
            Err(e) => {
                eprintln!("cgm: cannot read {}: {e}", p.display());
                return ExitCode::from(USAGE);
            }
        },
        None => None,
    };
    let flags = ConfigOverrides {
        experiment: Some(kind),
        lambda: f.lambda,
        rho: f.rho,
        n: f.n,
        t: f.t,
        replicas: f.replicas,
        seed: f.seed,
        threads: f.threads,
        out: f.out,
        format: f.format,
        resume: f.resume.then_some(true),
        events: f.events.then_some(true),
    };
    let cfg = match parse_config(flags, file.as_deref()).and_then(|c| c.validate().map(|_| c)) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("cgm: {e}");
            return ExitCode::from(USAGE);
        }
    };
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("cgm: {e}");
            return ExitCode::from(if usage(&e) { USAGE } else { RUNTIME });
        }
    };
    for v in &report.summary.verdicts {
        println!(
            "{} {}: estimate {:.5} target {:.5} ({})",
            if v.pass { "PASS" } else { "FAIL" },
            v.criterion,
            v.estimate,
            v.target,
            v.tolerance
        );
    }
    for (i, why) in &report.failures {
        eprintln!("replica {i} failed: {why}");
    }
    println!(
        "{} of {} replicas, results in {}",
        report.replicas_completed,
        report.replicas_requested,
        cfg.out.display()
    );
    if report.all_pass() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
