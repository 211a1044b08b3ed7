use std::process::ExitCode;

use austere_lab::{run, Args, CliError};
use clap::Parser;

fn main() -> ExitCode {
    let args = Args::parse();
    let env_seed = std::env::var("AUSTERE_LAB_SEED").ok();
    match execute(args, env_seed.as_deref()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("austere-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: Args, env_seed: Option<&str>) -> Result<bool, CliError> {
    let cfg = args.resolve(env_seed)?;
    let report = run(&cfg)?;
    let text = report.render(cfg.format)?;
    match &cfg.output_path {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    for c in report.failing() {
        eprintln!("FAILED {}", c.name);
    }
    Ok(report.passed)
}
