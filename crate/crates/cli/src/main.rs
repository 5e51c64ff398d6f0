//! `ddrec`: triangles, distributions, verification and saddle-point
//! asymptotics for differential-difference polynomial recurrences.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "ddrec", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact triangle rows n0..=N.
    Triangle {
        #[command(flatten)]
        source: Source,
        /// Last row.
        #[arg(long = "max-n", alias = "n")]
        max_n: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Exact probability mass functions of the block count.
    Pmf {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        ns: NList,
        #[command(flatten)]
        out: Output,
    },
    /// Exact mean and variance with float shape statistics.
    Moments {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        ns: NList,
        #[command(flatten)]
        out: Output,
    },
    /// Kolmogorov distances to the normal law.
    Clt {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        ns: NList,
        #[command(flatten)]
        out: Output,
    },
    /// Saddle-point predictions next to the exact values.
    Asymptotics {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        ns: NList,
        #[command(flatten)]
        out: Output,
    },
    /// EGF identity, enumeration oracle and nonnegativity checks.
    Verify {
        #[command(flatten)]
        source: Source,
        /// Last row for the EGF and nonnegativity checks.
        #[arg(long = "max-n", default_value_t = 30)]
        max_n: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Catalog families, parameters and OEIS tags.
    Families {
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// Catalog family, e.g. `dowling(m=2)`.
    #[arg(long)]
    pub family: Option<String>,
    /// Specification file.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Specification text.
    #[arg(long)]
    pub inline: Option<String>,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
pub struct NList {
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated list; may be empty.
    #[arg(long)]
    pub ns: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Args, Debug, Clone)]
pub struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failure with its exit status.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
    pub detail: serde_json::Value,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: 2, kind: "usage", message: message.into(), detail: json!(null) }
    }
}

impl From<ddrec::Error> for Failure {
    fn from(e: ddrec::Error) -> Self {
        use ddrec::Error as E;
        let (code, kind) = match &e {
            E::Parse(_) => (2, "parse"),
            E::InvalidIndex { .. }
            | E::InvalidRange { .. }
            | E::InvalidSpec(_)
            | E::UnknownFamily(_)
            | E::InvalidParameter(_)
            | E::NonzeroConstantTerm(_) => (2, "usage"),
            E::SizeGuard { .. } => (2, "size_guard"),
            _ => (3, "numeric"),
        };
        let detail = match &e {
            E::Parse(p) => json!({
                "origin": p.origin,
                "line": p.line,
                "column": p.column,
                "offset": p.offset,
            }),
            _ => json!(null),
        };
        Self { code, kind, message: e.to_string(), detail }
    }
}

impl From<ddrec::speclang::ParseError> for Failure {
    fn from(e: ddrec::speclang::ParseError) -> Self {
        ddrec::Error::from(e).into()
    }
}

fn report(f: &Failure) {
    let mut error = json!({ "kind": f.kind, "message": f.message, "exit_code": f.code });
    if !f.detail.is_null() {
        error["position"] = f.detail.clone();
    }
    eprintln!("{}", json!({ "error": error }));
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            report(&Failure::usage(e.to_string().trim_end()));
            return ExitCode::from(2);
        }
    };
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report(&f);
            ExitCode::from(f.code)
        }
    }
}
