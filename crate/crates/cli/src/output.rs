use std::fmt;
use std::fs;
use std::path::Path;

use cwlimits::model::ModelFile;
use serde::Serialize;

pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_INVALID_MODEL: u8 = 2;
pub const EXIT_NON_CONVERGENCE: u8 = 3;
pub const EXIT_BUDGET: u8 = 4;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// The model file could not be read or parsed.
    ModelFile(String),
    Lib(cwlimits::Error),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::ModelFile(_) => EXIT_INVALID_MODEL,
            CliError::Lib(e) => lib_exit_code(e),
        }
    }
}

pub fn lib_exit_code(e: &cwlimits::Error) -> u8 {
    use cwlimits::Error::*;
    match e {
        InvalidModel(_) | NotPositiveDefinite { .. } => EXIT_INVALID_MODEL,
        NonConvergence { .. } => EXIT_NON_CONVERGENCE,
        BudgetExceeded { .. } => EXIT_BUDGET,
        _ => EXIT_USAGE,
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::ModelFile(m) => write!(f, "invalid model file: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl From<cwlimits::Error> for CliError {
    fn from(e: cwlimits::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Provenance header carried by every output document.
#[derive(Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub model: ModelFile,
}

impl Provenance {
    pub fn new(command: &'static str, model: ModelFile) -> Self {
        Self {
            tool: "cwlimits",
            version: env!("CARGO_PKG_VERSION"),
            command,
            model,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, doc: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(doc).map_err(cwlimits::Error::from)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// CSV with a leading comment block carrying the provenance.
pub fn write_csv(path: &Path, provenance: &Provenance, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut text = String::new();
    text.push_str(&format!(
        "# {} {} {}\n# model: {}\n",
        provenance.tool,
        provenance.version,
        provenance.command,
        serde_json::to_string(&provenance.model).map_err(cwlimits::Error::from)?
    ));
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

pub fn fmt_vec(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        String::new()
    }
}
