use std::process::ExitCode;

use clap::Parser;
use xyconv_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(summary) => {
            eprintln!(
                "run {}: {} cells, {} failed, wrote {}",
                summary.run_id,
                summary.cells,
                summary.failed,
                summary.outputs.join(", ")
            );
            ExitCode::SUCCESS
        }
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.exit_code())
        }
    }
}
