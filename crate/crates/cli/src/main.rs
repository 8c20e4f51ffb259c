use std::process::ExitCode;

use clap::Parser;
use dts_cli::{parse_config, run_experiment, CliArgs, HarnessError};

fn run(args: &CliArgs) -> Result<(), HarnessError> {
    let config = parse_config(args)?;
    let outcome = run_experiment(&config)?;
    for policy in &outcome.aggregate.policies {
        println!(
            "{:<16} runs={:<4} mean R(T)={:.3} std={:.3}",
            policy.policy.name(),
            policy.runs,
            policy.mean_regret,
            policy.std_regret
        );
    }
    println!(
        "wrote {} files to {}",
        outcome.files.len(),
        config.out_dir.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let args = CliArgs::parse();
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
