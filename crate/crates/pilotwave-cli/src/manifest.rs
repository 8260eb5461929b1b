//! Run manifests: enough to reproduce a run and verify its outputs.
//!
//! No timestamps or host details; the same config and seed must produce a
//! byte-identical manifest.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct OutputRecord {
    file: String,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool: &'static str,
    tool_version: &'static str,
    subcommand: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    config: &'a ScenarioConfig,
    outputs: Vec<OutputRecord>,
}

/// Write every produced file plus `manifest.json` into `out_dir`.
pub fn write_run(
    out_dir: &Path,
    subcommand: &str,
    seed: Option<u64>,
    config: &ScenarioConfig,
    files: &[(String, Vec<u8>)],
    quiet: bool,
) -> Result<(), CliError> {
    fs::create_dir_all(out_dir).map_err(CliError::Io)?;
    let mut outputs = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        fs::write(out_dir.join(name), bytes).map_err(CliError::Io)?;
        let digest = Sha256::digest(bytes);
        outputs.push(OutputRecord {
            file: name.clone(),
            bytes: bytes.len(),
            sha256: format!("{digest:x}"),
        });
        if !quiet {
            println!("wrote {name} ({} bytes)", bytes.len());
        }
    }
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "pilotwave",
        tool_version: env!("CARGO_PKG_VERSION"),
        subcommand,
        seed,
        config,
        outputs,
    };
    let mut json = serde_json::to_vec_pretty(&manifest)
        .map_err(|e| CliError::Config(vec![format!("manifest serialization: {e}")]))?;
    json.push(b'\n');
    fs::write(out_dir.join("manifest.json"), &json).map_err(CliError::Io)?;
    if !quiet {
        println!("wrote manifest.json ({} bytes)", json.len());
    }
    Ok(())
}
