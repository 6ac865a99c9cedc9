//! Output directory handling, config echo and error records.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};
use zeroloss_core::io::{fmt_f64, SCHEMA_VERSION};
use zeroloss_core::rng::RNG_VERSION;

use crate::args::Command;

/// A failed run. `usage` failures exit with status 2, everything else with 1.
#[derive(Debug)]
pub struct Failure {
    pub stage: String,
    pub message: String,
    pub context: Map<String, Value>,
    pub usage: bool,
}

impl Failure {
    pub fn new(stage: &str, message: impl Into<String>) -> Self {
        Failure {
            stage: stage.to_string(),
            message: message.into(),
            context: Map::new(),
            usage: false,
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            usage: true,
            ..Failure::new("arguments", message)
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.context
            .insert(key.to_string(), serde_json::to_value(value).unwrap_or(Value::Null));
        self
    }

    pub fn record(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "stage": self.stage,
            "message": self.message,
            "context": self.context,
        })
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

/// Attaches a stage label to library and I/O errors.
pub trait Stage<T> {
    fn stage(self, stage: &str) -> CliResult<T>;
}

impl<T> Stage<T> for zeroloss_core::Result<T> {
    fn stage(self, stage: &str) -> CliResult<T> {
        self.map_err(|e| Failure::new(stage, e.to_string()).with("kind", e.kind()))
    }
}

impl<T> Stage<T> for std::io::Result<T> {
    fn stage(self, stage: &str) -> CliResult<T> {
        self.map_err(|e| Failure::new(stage, e.to_string()).with("kind", "io"))
    }
}

impl<T> Stage<T> for csv::Result<T> {
    fn stage(self, stage: &str) -> CliResult<T> {
        self.map_err(|e| Failure::new(stage, e.to_string()).with("kind", "csv"))
    }
}

pub fn f(v: f64) -> String {
    fmt_f64(v)
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> CliResult<Self> {
        fs::create_dir_all(root)
            .stage("output")
            .map_err(|e| e.with("path", root.display().to_string()))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// `config.json`: the command with every default filled in, plus the
    /// versions needed to reproduce it.
    pub fn write_config(&self, cmd: &Command) -> CliResult<()> {
        let echo = json!({
            "schema_version": SCHEMA_VERSION,
            "rng_version": RNG_VERSION,
            "zeroloss_version": env!("CARGO_PKG_VERSION"),
            "command": cmd,
        });
        self.json("config.json", &echo)
    }

    pub fn json(&self, name: &str, value: &impl Serialize) -> CliResult<()> {
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::new("output", e.to_string()))?;
        text.push('\n');
        fs::write(&path, text)
            .stage("output")
            .map_err(|e| e.with("path", path.display().to_string()))
    }

    pub fn csv(&self, name: &str, header: &[&str]) -> CliResult<CsvOut> {
        let path = self.path(name);
        let file = File::create(&path)
            .stage("output")
            .map_err(|e| e.with("path", path.display().to_string()))?;
        let mut w = csv::WriterBuilder::new().from_writer(BufWriter::new(file));
        w.write_record(header).stage("output")?;
        Ok(CsvOut { w, path })
    }
}

pub struct CsvOut {
    w: csv::Writer<BufWriter<File>>,
    path: PathBuf,
}

impl CsvOut {
    pub fn row<I, S>(&mut self, fields: I) -> CliResult<()>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[u8]>,
    {
        self.w.write_record(fields).stage("output")
    }

    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.w.flush().stage("output")?;
        let inner = self.w.into_inner().map_err(|e| Failure::new("output", e.to_string()))?;
        inner
            .into_inner()
            .map_err(|e| Failure::new("output", e.to_string()))?
            .flush()
            .stage("output")?;
        log::info!("wrote {}", self.path.display());
        Ok(self.path)
    }
}

/// Prints a JSON record to stdout.
pub fn print_json(value: &impl Serialize) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::new("output", e.to_string()))?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e).stage("output"),
        _ => Ok(()),
    }
}

/// File-name friendly form of an activation spec.
pub fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}
