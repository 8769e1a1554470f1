//! Loading and validating command inputs. Every loader also returns the
//! SHA-256 of what it read, for the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use walkpovm::experiment::{CountRecord, NoiseModel};
use walkpovm::reference;
use walkpovm::schedule_io;
use walkpovm::waveplate::TableEntry;
use walkpovm::{initial_state, CoinVector, WalkSchedule, C64};

use crate::{Failure, InputContext, NoiseArgs, ScheduleArg};

/// Where an input came from and the digest of its bytes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputDigest {
    pub source: String,
    pub sha256: String,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn read(path: &Path) -> Result<(String, InputDigest), Failure> {
    let text = fs::read_to_string(path).input(&format!("cannot read {}", path.display()))?;
    let source = fs::canonicalize(path)
        .unwrap_or_else(|_| path.to_path_buf())
        .display()
        .to_string();
    let digest = InputDigest {
        source,
        sha256: sha256_hex(text.as_bytes()),
    };
    Ok((text, digest))
}

pub fn schedule(arg: &ScheduleArg) -> Result<(WalkSchedule, InputDigest), Failure> {
    match &arg.schedule {
        None => {
            let s = reference::schedule();
            let digest = InputDigest {
                source: "builtin:reference".into(),
                sha256: s.digest(),
            };
            Ok((s, digest))
        }
        Some(path) => {
            let (text, digest) = read(path)?;
            let s =
                schedule_io::from_json_str(&text).input(&format!("schedule {}", path.display()))?;
            Ok((s, digest))
        }
    }
}

/// Parses `1..4`, a polarization keyword, or a JSON file.
pub fn state(spec: &str) -> Result<(CoinVector, InputDigest), Failure> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let keyword = match spec.trim() {
        "1" | "2" | "3" | "4" => {
            Some(initial_state(spec.trim().parse().expect("digit")).expect("index in 1..=4"))
        }
        "H" => Some(CoinVector::horizontal()),
        "V" => Some(CoinVector::vertical()),
        "D" => Some(CoinVector::new(C64::new(r, 0.0), C64::new(r, 0.0))),
        "A" => Some(CoinVector::new(C64::new(r, 0.0), C64::new(-r, 0.0))),
        "R" => Some(CoinVector::new(C64::new(r, 0.0), C64::new(0.0, -r))),
        "L" => Some(CoinVector::new(C64::new(r, 0.0), C64::new(0.0, r))),
        _ => None,
    };
    if let Some(v) = keyword {
        let digest = InputDigest {
            source: format!("builtin:{}", spec.trim()),
            sha256: sha256_hex(spec.trim().as_bytes()),
        };
        return Ok((v, digest));
    }
    let path = PathBuf::from(spec);
    if !path.exists() {
        return Err(Failure::Input(anyhow!(
            "state {spec:?} is neither 1..4, H/V/D/A/R/L, nor an existing file"
        )));
    }
    let (text, digest) = read(&path)?;
    let v: CoinVector = serde_json::from_str(&text).input(&format!("state file {spec}"))?;
    let n = v.norm_sqr();
    if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
        return Err(Failure::Input(anyhow!(
            "state file {spec}: norm² is {n}, expected 1"
        )));
    }
    Ok((v, digest))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseFile {
    visibility: Option<f64>,
    angle_jitter_deg: Option<f64>,
    seed: Option<u64>,
    shots: Option<u64>,
}

/// Fully resolved run parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunParams {
    pub noise: NoiseModel,
    pub shots: u64,
}

/// How the seed was given on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedSource {
    Flag(u64),
    Env(u64),
    Absent,
}

/// Resolves noise and sampling parameters. Precedence: explicit flag, then
/// the noise file, then `WALKPOVM_SEED` (seed only), then defaults.
pub fn params(
    args: &NoiseArgs,
    shots_flag: Option<u64>,
    seed: SeedSource,
) -> Result<(RunParams, Option<InputDigest>), Failure> {
    let (file, digest) = match &args.noise {
        None => (NoiseFile::default(), None),
        Some(path) => {
            let (text, digest) = read(path)?;
            let f: NoiseFile =
                serde_json::from_str(&text).input(&format!("noise file {}", path.display()))?;
            (f, Some(digest))
        }
    };
    let seed = match seed {
        SeedSource::Flag(s) => s,
        SeedSource::Env(s) => file.seed.unwrap_or(s),
        SeedSource::Absent => file.seed.unwrap_or(0),
    };
    let visibility = args.visibility.or(file.visibility).unwrap_or(1.0);
    let jitter = args.jitter_deg.or(file.angle_jitter_deg).unwrap_or(0.0);
    let noise = NoiseModel::new(visibility, jitter, seed).input("noise parameters")?;
    let shots = shots_flag.or(file.shots).unwrap_or(reference::TOTAL_COUNTS);
    if shots == 0 {
        return Err(Failure::Input(anyhow!("--shots must be positive")));
    }
    Ok((RunParams { noise, shots }, digest))
}

pub fn table(path: Option<&PathBuf>) -> Result<(Vec<TableEntry>, InputDigest), Failure> {
    match path {
        None => {
            let t = reference::plate_table();
            let json = serde_json::to_string(&t).expect("table serializes");
            let digest = InputDigest {
                source: "builtin:reference".into(),
                sha256: sha256_hex(json.as_bytes()),
            };
            Ok((t, digest))
        }
        Some(p) => {
            let (text, digest) = read(p)?;
            let t = serde_json::from_str(&text).input(&format!("table {}", p.display()))?;
            Ok((t, digest))
        }
    }
}

pub fn counts(path: &Path) -> Result<(CountRecord, InputDigest), Failure> {
    let (text, digest) = read(path)?;
    let record: CountRecord =
        serde_json::from_str(&text).input(&format!("counts {}", path.display()))?;
    let check = || -> anyhow::Result<()> {
        let sum: u64 = record.counts.values().sum();
        if sum != record.total {
            bail!("counts sum to {sum} but total is {}", record.total);
        }
        if record.total == 0 {
            bail!("record has no counts");
        }
        Ok(())
    };
    check().input(&format!("counts {}", path.display()))?;
    Ok((record, digest))
}
