use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{CliError, Command, ExitCode};

pub const MANIFEST_FILE: &str = "manifest.json";

/// Provenance record written once per run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: serde_json::Value,
    pub out_dir: String,
    pub tool_version: String,
    pub wall_clock_seconds: f64,
    /// SHA-256 of the primary input file, if one was read.
    pub input_sha256: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observer_config_sha256: Option<String>,
    pub exit_code: i32,
}

/// File contents plus digest.
pub struct Input {
    pub path: PathBuf,
    pub text: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_input(path: &Path) -> Result<Input, CliError> {
    let bytes = fs::read(path).map_err(|e| match e.kind() {
        io::ErrorKind::NotFound => CliError::new(
            ExitCode::MissingInput,
            format!("input file {} not found", path.display()),
        ),
        _ => CliError::new(
            ExitCode::NumericFailure,
            format!("cannot read {}: {e}", path.display()),
        ),
    })?;
    let sha256 = sha256_hex(&bytes);
    let text = String::from_utf8(bytes).map_err(|_| {
        CliError::new(ExitCode::Parse, format!("{} is not valid UTF-8", path.display()))
    })?;
    Ok(Input {
        path: path.to_path_buf(),
        text,
        sha256,
    })
}

pub fn parse_json<T: serde::de::DeserializeOwned>(input: &Input) -> Result<T, CliError> {
    serde_json::from_str(&input.text).map_err(|e| {
        CliError::new(
            ExitCode::Parse,
            format!(
                "{}: line {}, column {}: {e}",
                input.path.display(),
                e.line(),
                e.column()
            ),
        )
    })
}

pub fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::new(
        ExitCode::NumericFailure,
        format!("cannot write {}: {e}", path.display()),
    )
}

/// Output directory plus run bookkeeping.
pub struct RunContext {
    pub command: Command,
    pub dir: PathBuf,
    pub started: Instant,
    pub input_sha256: Option<String>,
    pub observer_config_sha256: Option<String>,
}

impl RunContext {
    pub fn open(command: Command, dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        Ok(Self {
            command,
            dir: dir.to_path_buf(),
            started: Instant::now(),
            input_sha256: None,
            observer_config_sha256: None,
        })
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| io_error(&path, e))?;
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| {
            CliError::new(ExitCode::NumericFailure, format!("serializing {name}: {e}"))
        })?;
        text.push('\n');
        self.write_text(name, &text)
    }

    pub fn finish(&self, config: serde_json::Value, code: ExitCode) -> Result<(), CliError> {
        let manifest = RunManifest {
            subcommand: self.command.name().to_string(),
            config,
            out_dir: self.dir.display().to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            input_sha256: self.input_sha256.clone(),
            observer_config_sha256: self.observer_config_sha256.clone(),
            exit_code: code.code(),
        };
        self.write_json(MANIFEST_FILE, &manifest).map(|_| ())
    }
}
