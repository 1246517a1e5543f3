use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hn_harness::{drivers, Experiment, Mode, RunConfig};

#[derive(Parser)]
#[command(name = "hn", version, about = "Havriliak-Negami Maxwell experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides `out` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// History evaluation mode (overrides `mode` in the config).
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

#[derive(Subcommand)]
enum Command {
    /// Temporal convergence against the manufactured solution.
    TimeConvergence(Common),
    /// Spatial convergence at a tiny time step.
    SpaceConvergence(Common),
    /// Source-free energy traces.
    Energy(Common),
    /// Direct versus fast wall time and op counts.
    Timing(Common),
    /// 1D FDTD run followed by permittivity recovery.
    FdtdRecover(Common),
    /// Evaluate the Prabhakar kernel at given times.
    KernelEval(Common),
    /// Dump convolution weights.
    WeightsDump(Common),
    /// Check the fast history ladder against direct summation.
    FastconvVerify(Common),
}

impl Command {
    fn split(self) -> (Experiment, Common) {
        match self {
            Self::TimeConvergence(c) => (Experiment::TimeConvergence, c),
            Self::SpaceConvergence(c) => (Experiment::SpaceConvergence, c),
            Self::Energy(c) => (Experiment::Energy, c),
            Self::Timing(c) => (Experiment::Timing, c),
            Self::FdtdRecover(c) => (Experiment::FdtdRecover, c),
            Self::KernelEval(c) => (Experiment::KernelEval, c),
            Self::WeightsDump(c) => (Experiment::WeightsDump, c),
            Self::FastconvVerify(c) => (Experiment::FastconvVerify, c),
        }
    }
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().command.split();
    match execute(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn execute(kind: Experiment, args: Common) -> hn_harness::Result<bool> {
    let mut cfg = RunConfig::load(&args.config)?;
    if cfg.experiment != kind {
        return Err(hn_harness::HarnessError::Config(format!(
            "{} holds a `{}` experiment, not `{}`",
            args.config.display(),
            cfg.experiment.name(),
            kind.name()
        )));
    }
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    let out = args
        .out
        .or_else(|| cfg.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(kind.name()));
    let rec = drivers::run(&cfg)?;
    for p in rec.write(&out)? {
        println!("wrote {}", p.display());
    }
    for c in &rec.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", c.name, c.detail);
    }
    println!("{} finished in {:.2}s", kind.name(), rec.wall_seconds);
    Ok(rec.passed())
}
