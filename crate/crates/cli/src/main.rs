mod args;
mod commands;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Format, RunConfig};
use commands::{Artifact, CliError};

const EXIT_ERROR: u8 = 1;
const EXIT_VIOLATED: u8 = 2;

fn fail(err: &CliError) -> ExitCode {
    eprintln!("{}", serde_json::to_string(err).expect("error serializes"));
    ExitCode::from(EXIT_ERROR)
}

fn write_out(cfg: &RunConfig, artifact: &Artifact) -> Result<(), CliError> {
    let json = serde_json::to_string_pretty(&artifact.json).expect("artifact serializes") + "\n";
    let body = match cfg.global.format {
        Format::Json => json.clone(),
        Format::Csv => artifact.csv.clone(),
    };
    let io = |e: std::io::Error| CliError::new("Io", e.to_string());
    if let Some(text) = &artifact.text {
        print!("{text}");
    }
    match &cfg.global.out {
        Some(path) => {
            std::fs::write(path, body).map_err(io)?;
            if cfg.global.format == Format::Csv {
                let mut sidecar = path.clone().into_os_string();
                sidecar.push(".json");
                std::fs::write(sidecar, json).map_err(io)?;
            }
        }
        None if artifact.text.is_none() => std::io::stdout().write_all(body.as_bytes()).map_err(io)?,
        None => {}
    }
    Ok(())
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    if cfg.global.print_config {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return ExitCode::SUCCESS;
    }
    let artifact = match commands::run(&cfg) {
        Ok(a) => a,
        Err(e) => return fail(&e),
    };
    if let Err(e) = write_out(&cfg, &artifact) {
        return fail(&e);
    }
    if artifact.violated {
        ExitCode::from(EXIT_VIOLATED)
    } else {
        ExitCode::SUCCESS
    }
}
