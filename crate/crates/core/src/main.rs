use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use da_perturb::cli::{self, Cli};

/// Thread-count override for the internal worker pool.
const THREADS_ENV: &str = "DA_PERTURB_THREADS";

fn main() -> ExitCode {
    if let Ok(text) = std::env::var(THREADS_ENV) {
        match text.parse::<usize>() {
            Ok(threads) if threads >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(threads)
                    .build_global();
            }
            _ => {
                eprintln!("{THREADS_ENV} must be a positive integer, got {text:?}");
                return ExitCode::from(2);
            }
        }
    }
    let parsed = Cli::parse();
    match cli::run(&parsed) {
        Ok(output) => {
            let written = match output_target(&parsed) {
                Some(path) => std::fs::write(&path, output.text.as_bytes())
                    .map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => std::io::stdout()
                    .write_all(output.text.as_bytes())
                    .map_err(|e| format!("cannot write to stdout: {e}")),
            };
            if let Err(message) = written {
                eprintln!("{message}");
                return ExitCode::from(2);
            }
            ExitCode::from(output.exit_code as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn output_target(parsed: &Cli) -> Option<std::path::PathBuf> {
    use da_perturb::cli::Command::*;
    let opts = match &parsed.command {
        Sum { output, .. }
        | Frame { output, .. }
        | Transport { output, .. }
        | Toeplitz { output, .. }
        | Sobolev { output, .. }
        | General { output, .. }
        | Verify { output } => output,
    };
    opts.out.clone()
}
