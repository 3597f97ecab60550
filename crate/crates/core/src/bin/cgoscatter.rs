use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use cgoscatter::experiment::{run_experiment, ExitStatus, ExperimentKind};

/// Run a cgoscatter experiment from a TOML configuration.
#[derive(Debug, Parser)]
#[command(name = "cgoscatter", version)]
struct Cli {
    /// direct, cgo, carleman, identify, paleywiener or uniqueness.
    kind: String,
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides `output` in the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    if let Some(threads) = std::env::var("CGOSCATTER_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads.max(1)).build_global();
    }
    let kind = match cli.kind.parse::<ExperimentKind>() {
        Ok(k) => k,
        Err(err) => {
            eprintln!("cgoscatter: {err}");
            return ExitCode::from(2);
        }
    };
    let (status, message) = run_experiment(kind, &cli.config, cli.seed, cli.out.as_deref());
    match status {
        ExitStatus::Success => println!("{message}"),
        _ => eprintln!("cgoscatter: {message}"),
    }
    ExitCode::from(status as u8)
}
