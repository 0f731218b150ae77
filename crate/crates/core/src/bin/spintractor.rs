use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use spintractor::campaign::{emit_plot_data, run, Command, RunConfig, RunOptions};
use spintractor::clifford::{build_clifford_rep, Signature};
use spintractor::par;

#[derive(Parser)]
#[command(name = "spintractor", version, about = "Twistor spinor verification campaigns")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report.json and CSV plot data; the report goes to stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides sampling.seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Multiplies every check tolerance.
    #[arg(long, global = true)]
    tol_scale: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Cmd {
    VerifyTwistor,
    CovarianceScan,
    TwoForm,
    ClassifyOrbit,
    ZeroSet,
    /// Every campaign enabled in the config, or all of them if none is.
    All,
    /// Prints the gamma matrices of signature (r, s) as JSON.
    DumpGammas {
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, default_value_t = 3)]
        s: usize,
    },
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = std::env::var("SPINTRACTOR_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if t > 0 {
            par::init_threads(t);
        }
    }
    let command = match cli.command {
        Cmd::VerifyTwistor => Command::VerifyTwistor,
        Cmd::CovarianceScan => Command::CovarianceScan,
        Cmd::TwoForm => Command::TwoForm,
        Cmd::ClassifyOrbit => Command::ClassifyOrbit,
        Cmd::ZeroSet => Command::ZeroSet,
        Cmd::All => Command::All,
        Cmd::DumpGammas { r, s } => {
            return match Signature::new(r, s).and_then(build_clifford_rep) {
                Ok(rep) => {
                    println!("{}", serde_json::to_string_pretty(&rep.to_json()).expect("json"));
                    ExitCode::SUCCESS
                }
                Err(e) => usage_error(e),
            };
        }
    };
    let Some(path) = cli.config else {
        return usage_error("--config <path> is required");
    };
    let config = match RunConfig::load(&path) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    let opts = RunOptions { seed: cli.seed, tol_scale: cli.tol_scale };
    let report = match run(&config, command, &opts) {
        Ok(r) => r,
        Err(e) => return usage_error(e),
    };
    let json = report.to_json();
    match &cli.out {
        Some(dir) => {
            let written = std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(dir.join("report.json"), &json))
                .map_err(spintractor::Error::from)
                .and_then(|_| emit_plot_data(&report, dir));
            match written {
                Ok(files) if files.is_empty() => eprintln!("warning: report has no sampled series; no CSV written"),
                Ok(_) => {}
                Err(e) => return usage_error(e),
            }
        }
        None => print!("{json}"),
    }
    for c in &report.checks {
        eprintln!(
            "{:<24} {}  max {:.3e}  tol {:.1e}",
            c.name,
            if c.passed { "pass" } else { "FAIL" },
            c.max_residual,
            c.tolerance
        );
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
