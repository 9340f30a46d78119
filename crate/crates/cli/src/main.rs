mod args;
mod commands;
mod error;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, ReplayArgs, RunArgs};
use commands::Outputs;
use error::CliError;
use manifest::{compare, read_manifest, write_outputs, ReplayReport};

const THREADS_VAR: &str = "ANH_SPECTRA_THREADS";

fn init_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::invalid(format!("{THREADS_VAR} must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Numeric(e.to_string()))
}

fn execute(command: &str, args: &RunArgs) -> Result<Outputs, CliError> {
    let out = args.out.as_deref();
    match command {
        "eig" => commands::eig(args),
        "zeta" => commands::zeta(args),
        "counting" => commands::counting(args),
        "schatten" => commands::schatten(args),
        "trace" => commands::trace(args, out),
        "verify-symbol" => commands::verify_symbol(args),
        "verify-metric" => commands::verify_metric_cmd(args),
        "compose" => commands::compose(args),
        "group" => commands::group(args),
        other => Err(CliError::invalid(format!("unknown command {other:?}"))),
    }
}

/// Writes to stdout; a reader that closed the pipe early is not an error.
fn emit(bytes: &[u8]) -> Result<(), CliError> {
    match std::io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(command: &str, args: &RunArgs) -> Result<(), CliError> {
    let outputs = execute(command, args)?;
    match &args.out {
        Some(dir) => {
            write_outputs(dir, command, args, &outputs)?;
        }
        None => {
            let main = &outputs.files[outputs.main];
            emit(&main.bytes)?;
        }
    }
    Ok(())
}

fn replay(r: &ReplayArgs) -> Result<(), CliError> {
    let original = read_manifest(&r.manifest)?;
    let out = r.out.clone().unwrap_or_else(|| {
        r.manifest
            .parent()
            .map(|p| p.join("replay"))
            .unwrap_or_else(|| PathBuf::from("replay"))
    });
    let mut args = original.config.clone();
    args.out = Some(out.clone());
    let outputs = execute(&original.command, &args)?;
    let rerun = write_outputs(&out, &original.command, &args, &outputs)?;
    let files = compare(&original, &rerun);
    let identical = files.iter().all(|f| f.identical) && original.outputs.len() == rerun.outputs.len();
    let report = ReplayReport {
        manifest: r.manifest.clone(),
        out,
        command: original.command.clone(),
        recorded_version: original.version.clone(),
        identical,
        files,
    };
    emit(format!("{}\n", serde_json::to_string_pretty(&report)?).as_bytes())?;
    if identical {
        Ok(())
    } else {
        Err(CliError::Numeric("replay outputs differ from the manifest".into()))
    }
}

fn main() -> ExitCode {
    let argv = match args::expand_config(std::env::args().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    // clap exits with 2 on usage errors, matching the validation code
    let cli = Cli::parse_from(argv);
    let result = init_threads().and_then(|()| match &cli.command {
        Command::Replay(r) => replay(r),
        other => {
            let name = other.name();
            match other {
                Command::Eig(a)
                | Command::Zeta(a)
                | Command::Counting(a)
                | Command::Schatten(a)
                | Command::Trace(a)
                | Command::VerifySymbol(a)
                | Command::VerifyMetric(a)
                | Command::Compose(a)
                | Command::Group(a) => run(name, a),
                Command::Replay(_) => unreachable!(),
            }
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
