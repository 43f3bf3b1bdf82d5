use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use levtt::check::CheckerConfig;
use levtt::driver::{self, EXIT_USAGE};

#[derive(Parser)]
#[command(name = "levtt", version, about = "Type checker for a dependent type theory with universe-level judgments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check the declarations of each file in order.
    Check {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Enable cumulativity (lift codes and their equations).
        #[arg(long)]
        cumulative: bool,
        /// Emit one JSON object per declaration.
        #[arg(long)]
        json: bool,
    },
    /// Decide whether constraints entail a query.
    Entail {
        /// Level variables, comma separated.
        #[arg(long, default_value = "")]
        vars: String,
        /// Hypotheses, comma separated.
        #[arg(long, default_value = "")]
        constraints: String,
        #[arg(long)]
        query: String,
    },
    /// Print a normal form: of a level, or of a definition or closed term of FILE.
    Nf {
        #[arg(long, conflicts_with_all = ["file", "def", "term"])]
        level: Option<String>,
        file: Option<PathBuf>,
        #[arg(long, requires = "file")]
        def: Option<String>,
        #[arg(long, requires = "file", conflicts_with = "def")]
        term: Option<String>,
        #[arg(long)]
        cumulative: bool,
    },
    /// Specialize a definition to numeral levels and re-check it.
    Mono {
        file: PathBuf,
        #[arg(long)]
        def: String,
        /// Values of the level variables, e.g. "a=0,b=2".
        #[arg(long, default_value = "")]
        assign: String,
        #[arg(long)]
        cumulative: bool,
    },
}

fn config(cumulative: bool) -> CheckerConfig {
    CheckerConfig::internal().cumulative(cumulative)
}

fn run(cli: Cli) -> std::io::Result<i32> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    match cli.cmd {
        Cmd::Check { files, cumulative, json } => driver::run_check(&files, config(cumulative), json, &mut out),
        Cmd::Entail { vars, constraints, query } => match driver::run_entail(&vars, &constraints, &query) {
            Ok(ans) if ans.holds => writeln!(out, "true").map(|_| 0),
            Ok(ans) => {
                writeln!(out, "false")?;
                match ans.witness {
                    Some(rho) => writeln!(out, "witness: {rho}")?,
                    None => writeln!(out, "no witness with values <= {}", driver::WITNESS_BOUND)?,
                }
                Ok(0)
            }
            Err(e) => {
                writeln!(out, "{e}")?;
                Ok(e.exit_code())
            }
        },
        Cmd::Nf { level: Some(l), .. } => match driver::nf_level(&l) {
            Ok(s) => writeln!(out, "{s}").map(|_| 0),
            Err(d) => writeln!(out, "{d}").map(|_| driver::EXIT_PARSE_ERROR),
        },
        Cmd::Nf { file: Some(file), def, term, cumulative, .. } => {
            let result = driver::load_session(&file, config(cumulative))
                .and_then(|s| driver::nf_term(&s, def.as_deref(), term.as_deref()));
            match result {
                Ok(s) => writeln!(out, "{s}").map(|_| 0),
                Err((code, msg)) => writeln!(out, "{msg}").map(|_| code),
            }
        }
        Cmd::Nf { .. } => writeln!(out, "error: give --level or a FILE").map(|_| EXIT_USAGE),
        Cmd::Mono { file, def, assign, cumulative } => {
            let rho = match driver::parse_assignment(&assign) {
                Ok(rho) => rho,
                Err(m) => return writeln!(out, "error: {m}").map(|_| EXIT_USAGE),
            };
            match driver::load_session(&file, config(cumulative)) {
                Ok(s) => driver::run_mono(&s, &def, &rho, &mut out),
                Err((code, msg)) => writeln!(out, "{msg}").map(|_| code),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE as u8)
        }
    }
}
