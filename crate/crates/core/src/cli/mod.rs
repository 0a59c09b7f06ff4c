//! Command-line front end for the `vir` binary.
//!
//! Exit codes: 0 when every requested check passes, 1 when one fails, 2 for
//! usage and input errors, 3 for internal errors.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::report::CheckLine;

#[derive(Parser, Debug)]
#[command(name = "vir", version, about = "Exact descendent invariants and Virasoro operator checks")]
pub struct Cli {
    /// Persist the correlator memo in this file (lines `g;k1,k2,...;p/q`).
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for the parallel checks.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Tsv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// One correlator of the point, e.g. `tau --genus 2 --ks 2,2,2`.
    Tau {
        #[arg(long)]
        genus: u32,
        /// Comma-separated descendant indices.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        ks: Vec<u32>,
    },
    /// Every nonzero correlator of one genus with Σk ≤ dim-max, as TSV.
    TauTable {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        dim_max: u32,
    },
    /// The point's correlators as a table file for `residual` and `genus0`.
    PointTable {
        #[arg(long)]
        genus: u32,
        #[arg(long)]
        ksum: u32,
    },
    /// The Gelfand-Dikii polynomial R_m.
    Gd {
        #[arg(long)]
        m: usize,
    },
    /// The genus-g potential in terms of G[k] and u'.
    PotentialIz {
        #[arg(long)]
        genus: u32,
    },
    /// KdV, Virasoro and Libgober-Wood checks.
    #[command(subcommand)]
    Verify(Verify),
    /// Built-in and file-based cohomology models.
    #[command(subcommand)]
    Model(ModelCmd),
    /// Evaluates the constraints z_{k,g} on a correlator table.
    Residual(ResidualArgs),
    /// Genus-zero identities on point data or on a table.
    Genus0(Genus0Args),
}

#[derive(Subcommand, Debug)]
pub enum Verify {
    /// Witten's KdV identities, the DVV relation and the two correlator routes.
    Kdv {
        #[arg(long, default_value_t = 2)]
        genus: u32,
        #[arg(long, default_value_t = 4)]
        degree: i32,
        #[arg(long, default_value_t = 4)]
        indices: usize,
        /// Largest m for the Witten identity and the DVV relation.
        #[arg(long)]
        m_max: Option<u32>,
    },
    /// Symbol- and operator-level Virasoro relations of a model.
    Virasoro {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 3)]
        kmax: i32,
        #[arg(long, default_value_t = 12)]
        cutoff: u32,
        /// Grading parameter s of μ_s, as p/q.
        #[arg(long, default_value = "0")]
        s: String,
    },
    /// The Libgober-Wood identity Str(μ²) = 1/12 ∫(r c_r + 2 c₁ c_{r-1}).
    Libgober {
        #[arg(long)]
        model: String,
    },
}

#[derive(Subcommand, Debug)]
pub enum ModelCmd {
    /// Checks the invariants of a model file.
    Validate { file: PathBuf },
    /// Shows a built-in model; `--emit` prints it in the model file format.
    Builtin {
        name: String,
        #[arg(long)]
        emit: bool,
    },
    /// Lists the built-in model names.
    List,
}

#[derive(Args, Debug)]
pub struct ResidualArgs {
    /// Model of the table; must agree with the table header when given.
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub table: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub kmax: i32,
    #[arg(long, default_value_t = 1)]
    pub gmax: u32,
    /// Largest Σm over probe insertions.
    #[arg(long, default_value_t = 6)]
    pub msum: u32,
}

#[derive(Args, Debug)]
pub struct Genus0Args {
    /// Table file; the point's closed formula is used when absent.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    /// Comma-separated checks, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "all")]
    pub check: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub degree: i32,
    #[arg(long, default_value_t = 5)]
    pub indices: usize,
}

/// Failure modes of a command, mapped onto exit codes.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Internal(String),
    #[error("output: {0}")]
    Output(#[from] std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. }
            | Error::InvalidModel(_)
            | Error::Unsupported(_)
            | Error::TruncationTooSmall(_)
            | Error::Indeterminate(_)
            | Error::Io(_) => CliError::Usage(e.to_string()),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

/// Collects report lines and renders them in the chosen format.
pub struct Report<'a> {
    out: &'a mut (dyn Write + Send),
    format: Format,
    failed: bool,
}

impl<'a> Report<'a> {
    fn new(out: &'a mut (dyn Write + Send), format: Format) -> Self {
        Self { out, format, failed: false }
    }

    pub fn check(&mut self, line: &CheckLine) -> std::io::Result<()> {
        self.failed |= !line.pass;
        match self.format {
            Format::Text => writeln!(self.out, "{line}"),
            Format::Tsv => {
                let verdict = if line.pass { "PASS" } else { "FAIL" };
                writeln!(self.out, "{}\t{verdict}\t{}", line.name, line.detail)
            }
        }
    }

    pub fn checks(&mut self, lines: &[CheckLine]) -> std::io::Result<()> {
        lines.iter().try_for_each(|l| self.check(l))
    }

    /// A plain output line; TSV fields are given separately.
    pub fn row(&mut self, fields: &[String]) -> std::io::Result<()> {
        match self.format {
            Format::Text => writeln!(self.out, "{}", fields.join(" ")),
            Format::Tsv => writeln!(self.out, "{}", fields.join("\t")),
        }
    }

    pub fn raw(&mut self, text: &str) -> std::io::Result<()> {
        write!(self.out, "{text}")
    }

    pub fn note(&mut self, text: &str) -> std::io::Result<()> {
        writeln!(self.out, "# {text}")
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    return 0;
                }
                _ => 2,
            };
            let _ = write!(err, "{e}");
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: cannot start worker threads: {e}");
            return 3;
        }
    };
    // Output is buffered so the command can run on the worker pool.
    let (result, failed, buf) = pool.install(|| {
        let mut buf: Vec<u8> = Vec::new();
        let mut report = Report::new(&mut buf, cli.format);
        let result = commands::dispatch(&cli, &mut report);
        let failed = report.failed;
        (result, failed, buf)
    });
    if let Err(e) = out.write_all(&buf).and_then(|_| out.flush()) {
        let _ = writeln!(err, "error: cannot write output: {e}");
        return 3;
    }
    match result {
        Ok(()) if failed => 1,
        Ok(()) => 0,
        Err(CliError::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(e) => {
            let line: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();
            let _ = writeln!(err, "internal error: {e}\nreproduce with: {}", line.join(" "));
            3
        }
    }
}
