//! File IO, exit codes and the run manifest written next to every output.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug)]
pub enum CliError {
    Core(relhyp::Error),
    Io { path: PathBuf, source: std::io::Error },
    Invalid(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(relhyp::Error::SizeGuard { .. }) => 3,
            CliError::Core(_) | CliError::Io { .. } | CliError::Invalid(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Invalid(msg) => f.write_str(msg),
            CliError::Internal(msg) => write!(f, "internal error: {msg}"),
        }
    }
}

impl From<relhyp::Error> for CliError {
    fn from(e: relhyp::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn hash_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Tracks inputs and outputs of one invocation and writes the manifest.
pub struct Run {
    command: &'static str,
    params: serde_json::Value,
    seeds: Vec<u64>,
    inputs: BTreeMap<String, String>,
    outputs: BTreeMap<String, String>,
    first_output: Option<PathBuf>,
    start: Instant,
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    params: &'a serde_json::Value,
    seeds: &'a [u64],
    input_hashes: &'a BTreeMap<String, String>,
    output_hashes: &'a BTreeMap<String, String>,
    tool_version: &'static str,
    wall_time_ms: u128,
}

impl Run {
    pub fn new(command: &'static str, params: &impl Serialize, seeds: &[u64]) -> Self {
        Run {
            command,
            params: serde_json::to_value(params).unwrap_or(serde_json::Value::Null),
            seeds: seeds.to_vec(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            first_output: None,
            start: Instant::now(),
        }
    }

    pub fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        self.inputs.insert(path.display().to_string(), hash_hex(text.as_bytes()));
        Ok(text)
    }

    pub fn write(&mut self, path: &Path, contents: &str) -> CliResult<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
        }
        let mut body = contents.to_string();
        if !body.ends_with('\n') {
            body.push('\n');
        }
        std::fs::write(path, &body).map_err(|source| CliError::Io { path: path.into(), source })?;
        self.outputs.insert(path.display().to_string(), hash_hex(body.as_bytes()));
        self.first_output.get_or_insert_with(|| path.to_path_buf());
        Ok(())
    }

    pub fn write_json(&mut self, path: Option<&Path>, value: &impl Serialize) -> CliResult<()> {
        match path {
            Some(p) => {
                let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
                self.write(p, &text)
            }
            None => Ok(()),
        }
    }

    /// Writes `<first output>.manifest.json`; a no-op when nothing was
    /// written.
    pub fn finish(self) -> CliResult<()> {
        let Some(first) = self.first_output.clone() else {
            return Ok(());
        };
        let manifest = RunManifest {
            command: self.command,
            params: &self.params,
            seeds: &self.seeds,
            input_hashes: &self.inputs,
            output_hashes: &self.outputs,
            tool_version: env!("CARGO_PKG_VERSION"),
            wall_time_ms: self.start.elapsed().as_millis(),
        };
        let path = sidecar(&first, "manifest.json");
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Internal(e.to_string()))?;
        std::fs::write(&path, text + "\n").map_err(|source| CliError::Io { path, source })
    }
}

/// `dir/name.json` -> `dir/name.<suffix>`.
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.{suffix}"))
}
