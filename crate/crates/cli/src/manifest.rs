use std::fs;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use spin_readout::config::ParamsFile;
use spin_readout::output::CsvWriter;
use spin_readout::SystemParams;

use crate::CliError;

/// Written next to the outputs of every command.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// SHA-256 of the resolved parameters and options.
    pub config_digest: String,
    pub seed: u64,
    pub tool_version: String,
    /// File names relative to the manifest's directory.
    pub outputs: Vec<String>,
}

/// Hex SHA-256 over the canonical parameter JSON and the resolved options.
pub fn config_digest(params: &SystemParams, options: &Map<String, Value>) -> String {
    let mut h = Sha256::new();
    h.update(ParamsFile::from_params(params).canonical_json());
    h.update(b"\n");
    h.update(serde_json::to_string(options).expect("json map serializes"));
    hex::encode(h.finalize())
}

/// Collects the outputs and resolved options of one command invocation.
pub struct Run {
    pub command: &'static str,
    pub out: PathBuf,
    pub params: SystemParams,
    pub seed: u64,
    options: Map<String, Value>,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(command: &'static str, out: PathBuf, params: SystemParams, seed: u64) -> Self {
        Run {
            command,
            out,
            params,
            seed,
            options: Map::new(),
            outputs: Vec::new(),
        }
    }

    pub fn option(&mut self, key: &str, value: Value) {
        self.options.insert(key.to_string(), value);
    }

    pub fn bytes(&mut self, name: &str, data: &[u8]) -> Result<(), CliError> {
        let path = self.out.join(name);
        fs::write(&path, data).map_err(|e| CliError::io(path.display(), e))?;
        self.outputs.push(name.to_string());
        Ok(())
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<(), CliError> {
        let mut buf = Vec::new();
        let mut w = CsvWriter::new(&mut buf);
        let wrap = |e| CliError::io(name, e);
        w.header(header).map_err(wrap)?;
        for r in rows {
            w.row(r).map_err(wrap)?;
        }
        w.finish().map_err(wrap)?;
        self.bytes(name, &buf)
    }

    pub fn json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).expect("output serializes");
        text.push('\n');
        self.bytes(name, text.as_bytes())
    }

    pub fn manifest(&self) -> RunManifest {
        RunManifest {
            command: self.command.to_string(),
            config_digest: config_digest(&self.params, &self.options),
            seed: self.seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: self.outputs.clone(),
        }
    }

    /// Writes `<command>.manifest.json` and returns its path.
    pub fn finish(self) -> Result<PathBuf, CliError> {
        let name = format!("{}.manifest.json", self.command);
        let mut text = serde_json::to_string_pretty(&self.manifest()).expect("manifest serializes");
        text.push('\n');
        let path = self.out.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(path.display(), e))?;
        Ok(path)
    }
}
