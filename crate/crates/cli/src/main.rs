//! `conceptforge <command> [--target T] [--from F] [--port N] <path>`
//!
//! Exit status: 0 success, 1 diagnostics present, 2 I/O or parse failure,
//! 3 usage error. Artifacts go to standard output, diagnostics and errors
//! to standard error (except `validate`, whose diagnostics are its output).

use std::fs;
use std::io::{self, Write};
use std::net::{Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use conceptforge_core::pipeline::reverse_sql;
use conceptforge_core::{compile, parse_model, validate_model, CompileError, Model, Target};
use conceptforge_service::ModelStore;

const SUCCESS: u8 = 0;
const DIAGNOSTICS: u8 = 1;
const FAILURE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "conceptforge", version, about = "Frame-based conceptual modeling toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a .cmx model and print one line per diagnostic.
    Validate { path: PathBuf },
    /// Compile a .cmx model to UML text, SQL DDL, SVG or canonical XML.
    Compile {
        #[arg(long, value_parser = parse_target)]
        target: Target,
        path: PathBuf,
    },
    /// Translate a schema back into a .cmx model.
    Reverse {
        #[arg(long, value_enum)]
        from: Source,
        path: PathBuf,
    },
    /// Serve the HTTP API over a directory of .cmx models.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(default_value = ".")]
        path: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Source {
    Sql,
}

fn parse_target(s: &str) -> Result<Target, String> {
    s.parse()
}

struct Failure(u8, String);

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure(FAILURE, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Model, Failure> {
    parse_model(&read(path)?).map_err(|e| Failure(FAILURE, format!("{}:{e}", path.display())))
}

fn emit(text: &str) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Failure(FAILURE, format!("writing output: {e}")))
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Validate { path } => {
            let diagnostics = validate_model(&load(&path)?);
            let text: String = diagnostics.iter().map(|d| format!("{d}\n")).collect();
            emit(&text)?;
            Ok(if diagnostics.is_empty() { SUCCESS } else { DIAGNOSTICS })
        }
        Command::Compile { target, path } => match compile(&load(&path)?, target) {
            Ok(text) => emit(&text).map(|_| SUCCESS),
            Err(CompileError::Invalid(diagnostics)) => {
                let mut err = io::stderr().lock();
                for d in diagnostics {
                    let _ = writeln!(err, "{d}");
                }
                Ok(DIAGNOSTICS)
            }
            Err(e) => Err(Failure(DIAGNOSTICS, e.to_string())),
        },
        Command::Reverse {
            from: Source::Sql,
            path,
        } => {
            let ddl = read(&path)?;
            let text = reverse_sql(&ddl)
                .map_err(|e| Failure(FAILURE, format!("{}: {e}", path.display())))?;
            emit(&text).map(|_| SUCCESS)
        }
        Command::Serve { port, path } => serve(port, path),
    }
}

fn serve(port: u16, dir: PathBuf) -> Result<u8, Failure> {
    let store = ModelStore::open(&dir).map_err(|e| Failure(FAILURE, e.to_string()))?;
    let addr = SocketAddr::from((Ipv4Addr::LOCALHOST, port));
    let listener = std::net::TcpListener::bind(addr)
        .and_then(|l| l.set_nonblocking(true).map(|_| l))
        .map_err(|e| Failure(FAILURE, format!("cannot listen on {addr}: {e}")))?;
    let local = listener.local_addr().map_err(|e| Failure(FAILURE, e.to_string()))?;
    tracing_subscriber::fmt().with_writer(io::stderr).with_target(false).init();

    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure(FAILURE, e.to_string()))?;
    runtime
        .block_on(async move {
            let listener = tokio::net::TcpListener::from_std(listener)?;
            eprintln!("listening on http://{local} serving {}", dir.display());
            let shutdown = async {
                let _ = tokio::signal::ctrl_c().await;
            };
            conceptforge_service::serve(listener, store, shutdown).await
        })
        .map_err(|e| Failure(FAILURE, e.to_string()))?;
    Ok(SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => SUCCESS,
                _ => USAGE,
            };
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, message)) => {
            eprintln!("conceptforge: {message}");
            ExitCode::from(code)
        }
    }
}
