//! Run manifests: everything needed to repeat a sampling run bit-exactly.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::inputs::InputDigest;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments that reproduce the run, without `--out-dir`.
    pub args: Vec<String>,
    pub seed: u64,
    pub shots: u64,
    pub inputs: BTreeMap<String, InputDigest>,
    /// Output file name → SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, args: Vec<String>, seed: u64, shots: u64) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            args,
            seed,
            shots,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
        }
    }
}
