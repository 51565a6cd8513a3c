use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use pucci_harness::config::RunConfig;
use pucci_harness::run::{parse_failure, run};

/// Runs one experiment described by a TOML file.
#[derive(Parser, Debug)]
#[command(name = "pucci-harness", version)]
struct Args {
    /// Run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output` key, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bypass the admissibility gates (a warning is recorded).
    #[arg(long)]
    exploratory: bool,
    /// Seed for randomised restarts, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let fallback = || args.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let parsed = std::fs::read_to_string(&args.config)
        .map_err(pucci_core::Error::from)
        .and_then(|src| RunConfig::parse(&src));
    let mut cfg = match parsed {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.class());
            let outcome = parse_failure(&e, &fallback());
            return ExitCode::from(outcome.exit_code as u8);
        }
    };
    cfg.exploratory |= args.exploratory;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let outcome = run(&cfg, &out);
    for w in outcome.manifest["warnings"].as_array().into_iter().flatten() {
        eprintln!("warning: {}", w.as_str().unwrap_or_default());
    }
    if outcome.exit_code != 0 {
        let err = &outcome.manifest["error"];
        eprintln!(
            "error[{}]: {}",
            err["class"].as_str().unwrap_or("unknown"),
            err["message"].as_str().unwrap_or_default()
        );
    } else {
        println!("{}", out.join("manifest.json").display());
    }
    ExitCode::from(outcome.exit_code as u8)
}
