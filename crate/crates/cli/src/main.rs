mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::Map;

use crate::commands::Run;
use crate::config::{Params, ValidationError};
use crate::output::{Manifest, OutDir};

#[derive(Parser)]
#[command(name = "monosurf", version, about = "Monotone subsequences, watermelons and limit surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Sample points from a density, or a Poisson rectangle with --beta/--gamma.
    Sample,
    /// Maximal k-decreasing subset.
    Watermelon,
    /// The kappa staircase of a point set.
    Kappa,
    /// Continuity smoothing of a grid.
    Smooth,
    /// Evaluate F_rho on a grid.
    Ffunc,
    /// Numerical maximizer of F_rho over U_r.
    Maximize,
    /// Monte Carlo estimate of Phi on narrow rectangles.
    Phi,
    /// Distance between a sampled kappa surface and the maximizer.
    Limitcheck,
    /// Smooth the discontinuous fixture and check the invariants.
    Counterexample,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Watermelon => "watermelon",
            Command::Kappa => "kappa",
            Command::Smooth => "smooth",
            Command::Ffunc => "ffunc",
            Command::Maximize => "maximize",
            Command::Phi => "phi",
            Command::Limitcheck => "limitcheck",
            Command::Counterexample => "counterexample",
        }
    }
}

/// All values are kept as text here and parsed by the subcommand that uses
/// them, after the config file has been merged underneath.
#[derive(Args)]
struct Flags {
    #[arg(long, global = true)]
    n: Option<String>,
    #[arg(long, global = true)]
    k: Option<String>,
    /// One value, or a comma-separated list for `phi`.
    #[arg(long, global = true)]
    r: Option<String>,
    #[arg(long, global = true)]
    gamma: Option<String>,
    #[arg(long, global = true)]
    beta: Option<String>,
    /// Nodes per side.
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Lipschitz-type constant of the smoothing, `a = 4C`.
    #[arg(long = "C", global = true)]
    c: Option<String>,
    /// Number of z levels, 0 for every distinct grid value.
    #[arg(long = "z-levels", global = true)]
    z_levels: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    #[arg(long, global = true)]
    reps: Option<String>,
    #[arg(long, global = true)]
    out: Option<String>,
    /// Flat key = value file; flags win over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Points CSV, or grid CSV for smooth/ffunc.
    #[arg(long, global = true)]
    input: Option<String>,
    /// Domain JSON for --input grids; defaults to the `.domain.json` sidecar.
    #[arg(long, global = true)]
    domain: Option<String>,
    /// square, diamond, or a density model JSON file.
    #[arg(long, global = true)]
    density: Option<String>,
    /// Points `x,y;x,y;...` at which the kappa plot prints its value.
    #[arg(long = "label-at", global = true)]
    label_at: Option<String>,
    /// Fall back to greedy peeling above the exact-flow cap.
    #[arg(long, global = true)]
    approx: Option<String>,
    #[arg(long, global = true)]
    iterations: Option<String>,
    /// Size of the pilot sample used as one maximizer start.
    #[arg(long, global = true)]
    pilot: Option<String>,
}

impl Flags {
    fn pairs(self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("n", self.n),
            ("k", self.k),
            ("r", self.r),
            ("gamma", self.gamma),
            ("beta", self.beta),
            ("grid", self.grid),
            ("C", self.c),
            ("z-levels", self.z_levels),
            ("seed", self.seed),
            ("reps", self.reps),
            ("out", self.out),
            ("input", self.input),
            ("domain", self.domain),
            ("density", self.density),
            ("label-at", self.label_at),
            ("approx", self.approx),
            ("iterations", self.iterations),
            ("pilot", self.pilot),
        ]
    }
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let start = Instant::now();
    let config = cli.flags.config.clone();
    let params = Params::load(config.as_deref(), cli.flags.pairs())?;
    let seed: u64 = params.get_or("seed", 0)?;
    let out = OutDir::create(&commands::out_dir(&params))?;
    let mut r = Run { params, seed, out, metrics: Map::new(), invariants: Default::default() };
    match cli.command {
        Command::Sample => commands::sample(&mut r),
        Command::Watermelon => commands::watermelon(&mut r),
        Command::Kappa => commands::kappa(&mut r),
        Command::Smooth => commands::smooth(&mut r),
        Command::Ffunc => commands::ffunc(&mut r),
        Command::Maximize => commands::maximize_cmd(&mut r),
        Command::Phi => commands::phi(&mut r),
        Command::Limitcheck => commands::limitcheck(&mut r),
        Command::Counterexample => commands::counterexample(&mut r),
    }?;
    let mut outputs = r.out.written().to_vec();
    outputs.push("manifest.json".into());
    let manifest = Manifest {
        command: cli.command.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed,
        config: r.params.echo(),
        metrics: r.metrics,
        invariants: r.invariants,
        outputs,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    };
    r.out.write_json("manifest.json", &manifest)?;
    Ok(manifest.all_invariants_hold())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("monosurf: invariant check failed, see manifest.json");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("monosurf: {e:#}");
            if e.downcast_ref::<ValidationError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
