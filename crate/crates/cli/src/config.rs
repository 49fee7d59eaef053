//! Scenario configuration and the files a scenario keeps in its work directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult, Exit};

/// Scenario file. Relative paths resolve against the file's own directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub dataset: PathBuf,
    pub policy: PathBuf,
    #[serde(default = "default_workdir")]
    pub workdir: PathBuf,
    /// Drives the srs, the provider key and the prover randomness.
    #[serde(default)]
    pub seed: Option<String>,
    /// Refuse to run without a seed.
    #[serde(default)]
    pub deterministic: bool,
    #[serde(default)]
    pub srs: SrsConfig,
    /// Initial balances minted at setup.
    pub accounts: BTreeMap<String, u64>,
    /// Provider address (`host:port`); the provider runs in-process when unset.
    #[serde(default)]
    pub rsp_addr: Option<String>,
}

fn default_workdir() -> PathBuf {
    PathBuf::from("work")
}

/// Either explicit sizes or an existing srs file. Unset sizes default to the
/// minimum the policy's circuit needs.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SrsConfig {
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub max: Option<usize>,
    #[serde(default)]
    pub file: Option<PathBuf>,
}

/// Per-invocation overrides from the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<String>,
    pub policy: Option<PathBuf>,
}

/// A loaded config with every path made absolute.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub dataset: PathBuf,
    pub policy: PathBuf,
    pub workdir: PathBuf,
    pub seed: Option<String>,
    pub srs: SrsConfig,
    pub accounts: BTreeMap<String, u64>,
    pub rsp_addr: Option<String>,
}

pub const SRS_FILE: &str = "srs.bin";
pub const RSP_KEY_FILE: &str = "rsp_key.json";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const LEDGER_FILE: &str = "ledger.json";
pub const RESPONSE_FILE: &str = "response.json";
pub const PROOF_FILE: &str = "proof.bin";
pub const SETTLEMENT_FILE: &str = "settlement.json";

impl Scenario {
    pub fn load(path: &Path, overrides: Overrides) -> CliResult<Self> {
        if !path.is_file() {
            return Err(CliError::new(Exit::Usage, format!("config file {} not found", path.display())));
        }
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let cfg: ScenarioConfig =
            serde_json::from_str(&text).map_err(|e| CliError::new(Exit::Usage, format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };

        let seed = overrides.seed.or(cfg.seed);
        if cfg.deterministic && seed.is_none() {
            return Err(CliError::new(Exit::Usage, "config requests determinism but no seed was given"));
        }
        let mut srs = cfg.srs.clone();
        srs.file = srs.file.as_deref().map(resolve);
        let scenario = Scenario {
            dataset: resolve(&cfg.dataset),
            policy: overrides.policy.unwrap_or_else(|| resolve(&cfg.policy)),
            workdir: resolve(&cfg.workdir),
            seed,
            srs,
            accounts: cfg.accounts,
            rsp_addr: cfg.rsp_addr,
        };
        for (what, p) in [("dataset", &scenario.dataset), ("policy", &scenario.policy)] {
            if !p.is_file() {
                return Err(CliError::new(Exit::Usage, format!("{what} file {} not found", p.display())));
            }
        }
        Ok(scenario)
    }

    pub fn file(&self, name: &str) -> PathBuf {
        self.workdir.join(name)
    }

    /// Seed material for one purpose, or `None` when running unseeded.
    pub fn seed_for(&self, purpose: &str) -> Option<Vec<u8>> {
        self.seed.as_ref().map(|s| format!("psei/{purpose}/{s}").into_bytes())
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

pub fn read_bytes(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}
