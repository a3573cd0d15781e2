use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cvteleport::algebra::{classify, format_gate, parse_gate_expression, HierarchyLevel};
use cvteleport::experiments::{run_experiment, ExperimentConfig, Format, EXPERIMENTS};
use cvteleport::Error;

#[derive(Parser)]
#[command(name = "cvteleport", about = "Continuous-variable gate teleportation experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a registered experiment.
    Run {
        experiment: String,
        /// TOML configuration; command-line flags take precedence.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
    /// Place a gate expression in the Clifford hierarchy.
    Classify {
        expr: String,
        #[arg(long, default_value_t = 8)]
        max_level: u32,
    },
    /// Print the version and the numerical conventions.
    Version,
}

fn run(
    experiment: String,
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
) -> Result<ExitCode, Error> {
    let mut cfg = match &config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = experiment;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if out.is_some() {
        cfg.out = out;
    }
    if let Some(f) = format {
        cfg.format = f;
    }
    let (cfg, table) = run_experiment(&cfg)?;
    let text = table.render(&cfg);
    match &cfg.out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    if table.all_converged() {
        return Ok(ExitCode::SUCCESS);
    }
    for r in table.rows.iter().filter(|r| !r.converged) {
        eprintln!("not converged: [{}] {} ({})", r.axes.join(", "), r.statistic, r.note);
    }
    eprintln!("truncation did not converge; raise max_cutoff or loosen tol");
    Ok(ExitCode::from(2))
}

fn classify_expr(expr: &str, max_level: u32) -> Result<ExitCode, Error> {
    let g = parse_gate_expression(expr)?;
    println!("{}", format_gate(&g));
    match classify(&g, max_level) {
        Ok(HierarchyLevel::Level(k)) => println!("level {k}"),
        Ok(HierarchyLevel::NotDetermined(m)) => println!("above level {m}"),
        Err(e @ Error::NonTerminatingAdjoint(_)) => {
            eprintln!("NonTerminatingAdjoint: {e}; compose via commutator");
            return Ok(ExitCode::FAILURE);
        }
        Err(e) => return Err(e),
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run { experiment, config, seed, out, format } => run(experiment, config, seed, out, format),
        Cmd::Classify { expr, max_level } => classify_expr(&expr, max_level),
        Cmd::Version => {
            println!("cvteleport {}", env!("CARGO_PKG_VERSION"));
            println!("conventions: hbar = 1; q = (a + a†)/√2, p = i(a† − a)/√2; vacuum variance 1/2 per quadrature");
            println!("noise kernel exp(−|ξ|²/σ)/(πσ): variance σ/2 per coordinate");
            println!("experiments: {}", EXPERIMENTS.join(", "));
            Ok(ExitCode::SUCCESS)
        }
    };
    res.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        if matches!(e, Error::UnknownExperiment(_)) {
            eprintln!("known experiments: {}", EXPERIMENTS.join(", "));
        }
        ExitCode::FAILURE
    })
}
