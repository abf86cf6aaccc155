//! Atomic checkpoints: the full archive, the sequence cursor, and the
//! originating config. Written to a temporary file and renamed into place,
//! so a partially written checkpoint is never loadable under its real name.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};

use morphevo_core::evolution::Record;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::CliError;

pub const FORMAT_NAME: &str = "morphevo-checkpoint";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub config_digest: String,
    /// Next tournament sequence number to issue on resume.
    pub next_seq: u64,
    pub config: RunConfig,
    pub archive: Vec<Record>,
}

impl Checkpoint {
    pub fn new(config: &RunConfig, next_seq: u64, archive: Vec<Record>) -> Self {
        Checkpoint {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
            config_digest: config.digest(),
            next_seq,
            config: config.clone(),
            archive,
        }
    }
}

static TEMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Write-temp-then-rename; concurrent writers race harmlessly (each rename
/// is atomic and the last complete checkpoint wins).
pub fn save(path: &Path, ckpt: &Checkpoint) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension(format!(
        "tmp.{}.{}",
        std::process::id(),
        TEMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let json = serde_json::to_vec(ckpt).expect("checkpoint serializes");
    std::fs::write(&tmp, json)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Checkpoint, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    let ckpt: Checkpoint = serde_json::from_str(&text)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?;
    if ckpt.format != FORMAT_NAME {
        return Err(CliError::Parse(format!(
            "{}: not a checkpoint file",
            path.display()
        )));
    }
    Ok(ckpt)
}
