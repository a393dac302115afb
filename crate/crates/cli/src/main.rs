use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gazekit_cli::{
    cmd_classify, cmd_evaluate, cmd_synth, cmd_train, CliError, CliResult, RunArgs, RunConfig,
};

#[derive(Parser)]
#[command(name = "gzk", version, about = "Driver gaze-region classification")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic driver population
    Synth(RunArgs),
    /// Train a gaze-region forest
    Train(RunArgs),
    /// Leave-one-subject-out evaluation with reports
    Evaluate(RunArgs),
    /// Classify every frame of a dataset with a trained model
    Classify(RunArgs),
}

fn thread_pool() -> CliResult<()> {
    let Ok(v) = std::env::var("GZK_THREADS") else {
        return Ok(());
    };
    let n: usize = v.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        CliError::usage(format!("GZK_THREADS must be a positive integer, got `{v}`"))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::internal(e.to_string()))
}

fn run(cli: Cli) -> CliResult<()> {
    thread_pool()?;
    match cli.command {
        Command::Synth(a) => {
            let m = cmd_synth(&RunConfig::resolve(&a, "both")?)?;
            println!(
                "wrote {} frames from {} subjects (sha256 {})",
                m.frames, m.subjects, m.sha256
            );
        }
        Command::Train(a) => {
            let cfg = RunConfig::resolve(&a, "head-eye")?;
            let model = cmd_train(&cfg)?;
            println!(
                "trained {} trees on {} samples, feature_dim {}",
                model.trees().len(),
                model.digest().n_samples,
                model.feature_dim()
            );
        }
        Command::Evaluate(a) => {
            let cfg = RunConfig::resolve(&a, "both")?;
            let report = cmd_evaluate(&cfg)?;
            println!(
                "evaluated {} subjects; reports in {}",
                report.users.len(),
                cfg.out.display()
            );
        }
        Command::Classify(a) => {
            let l = cmd_classify(&RunConfig::resolve(&a, "both")?)?;
            println!(
                "{} frames: {} faces, {} pupils, {} confident decisions",
                l.total_frames, l.faces_detected, l.pupils_detected, l.confident_decisions
            );
        }
    }
    Ok(())
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
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gzk: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
