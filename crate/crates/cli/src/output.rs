use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::ConfigError;

/// Failure classes and their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Malformed config or arguments (64).
    Config(String),
    /// Eigensolver or other numerical failure (70).
    Numerical(String),
    /// Reading inputs or writing the run directory (74).
    Io(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 64,
            CliError::Numerical(_) => 70,
            CliError::Io(_) => 74,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.0)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<rieszlab_core::Error> for CliError {
    fn from(e: rieszlab_core::Error) -> Self {
        use rieszlab_core::Error as E;
        match e {
            E::Eigensolver(_)
            | E::NoConvergence(_)
            | E::Singular(_)
            | E::NearContour { .. }
            | E::ResolventBound { .. } => CliError::Numerical(e.to_string()),
            E::Io(io) => CliError::Io(io.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Run directory; `None` keeps everything on stdout.
pub struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    /// Creates the directory and writes the config echo.
    pub fn open(dir: Option<&Path>, echo: &str) -> CliResult<Self> {
        if let Some(d) = dir {
            fs::create_dir_all(d)?;
            fs::write(d.join("config.toml"), echo)?;
        }
        Ok(Self {
            dir: dir.map(Path::to_path_buf),
        })
    }

    pub fn is_dir(&self) -> bool {
        self.dir.is_some()
    }

    pub fn csv<I>(&self, name: &str, header: &[&str], rows: I) -> CliResult<()>
    where
        I: IntoIterator<Item = Vec<String>>,
    {
        let Some(d) = &self.dir else { return Ok(()) };
        let mut w = csv::Writer::from_path(d.join(name))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(&r)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn text(&self, name: &str, body: &str) -> CliResult<()> {
        if let Some(d) = &self.dir {
            fs::write(d.join(name), body)?;
        }
        Ok(())
    }
}
