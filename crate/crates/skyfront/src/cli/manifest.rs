//! Run manifests: a record of what a command read, what it wrote, and
//! how to run it again.
//!
//! Every command writes a manifest next to its primary output. The
//! manifest stores the effective argument vector plus SHA-256 digests of
//! all input files that affect results and all output files written.
//! Replaying a manifest re-executes the argument vector and checks the
//! fresh outputs against the recorded digests, so solver determinism is
//! verifiable from artifacts alone. The timestamp is informational and
//! never participates in any digest.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Record of one command execution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Producing tool, `name version`.
    pub tool: String,
    /// Effective subcommand argument vector, replayable as-is from the
    /// directory the command ran in.
    pub argv: Vec<String>,
    /// SHA-256 hex digest per input path.
    pub inputs: BTreeMap<String, String>,
    /// SHA-256 hex digest per output path (the manifest itself excluded).
    pub outputs: BTreeMap<String, String>,
    /// Unix timestamp of the run; excluded from all comparisons.
    pub recorded_at_unix_s: u64,
}

impl RunManifest {
    pub fn new(argv: Vec<String>) -> Self {
        RunManifest {
            tool: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            argv,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            recorded_at_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
        }
    }

    pub fn record_input(&mut self, path: &Path) -> std::io::Result<()> {
        let digest = file_digest(path)?;
        self.inputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) -> std::io::Result<()> {
        let digest = file_digest(path)?;
        self.outputs.insert(path.display().to_string(), digest);
        Ok(())
    }

    /// Writes the manifest as pretty JSON with a trailing newline.
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut body = serde_json::to_string_pretty(self).expect("manifest serializes");
        body.push('\n');
        std::fs::write(path, body)
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let body = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read manifest {}: {e}", path.display()))?;
        serde_json::from_str(&body).map_err(|e| format!("bad manifest {}: {e}", path.display()))
    }

    /// Paths whose current digest disagrees with `recorded`, or an IO
    /// message per unreadable file.
    pub fn stale_entries(recorded: &BTreeMap<String, String>) -> Vec<String> {
        let mut stale = Vec::new();
        for (path, want) in recorded {
            match file_digest(Path::new(path)) {
                Ok(got) if &got == want => {}
                Ok(got) => stale.push(format!("{path}: digest {got} != recorded {want}")),
                Err(e) => stale.push(format!("{path}: {e}")),
            }
        }
        stale
    }
}

/// SHA-256 of a file's bytes, lowercase hex.
pub fn file_digest(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    let out = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in out {
        use std::fmt::Write;
        write!(hex, "{b:02x}").expect("hex into string");
    }
    Ok(hex)
}

/// Conventional manifest path: `<output>.manifest.json`.
pub fn manifest_path_for(primary_output: &Path) -> std::path::PathBuf {
    let mut name = primary_output.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    primary_output.with_file_name(name)
}
