//! Per-chain progress files for resumable power-constrained sweeps.

use std::path::{Path, PathBuf};

use dab_core::PcSweepRecord;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::{to_json, write_atomic};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailedCell {
    pub snr_db: f64,
    pub cardinality: usize,
    pub error: String,
}

/// Everything one cardinality's SNR chain has finished so far.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainCheckpoint {
    pub cardinality: usize,
    pub snr_grid_db: Vec<f64>,
    pub records: Vec<PcSweepRecord>,
    pub failures: Vec<FailedCell>,
}

impl ChainCheckpoint {
    pub fn new(cardinality: usize, snr_grid_db: &[f64]) -> Self {
        Self {
            cardinality,
            snr_grid_db: snr_grid_db.to_vec(),
            records: Vec::new(),
            failures: Vec::new(),
        }
    }

    pub fn path(dir: &Path, cardinality: usize) -> PathBuf {
        dir.join(format!("chain_card{cardinality:03}.json"))
    }

    /// Loads the checkpoint for `cardinality` if it exists and was written
    /// for the same grid. A checkpoint for a different grid is ignored.
    pub fn load(dir: &Path, cardinality: usize, snr_grid_db: &[f64]) -> CliResult<Option<Self>> {
        let path = Self::path(dir, cardinality);
        let bytes = match std::fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(CliError::io(&path, e)),
        };
        let ck: Self = serde_json::from_slice(&bytes).map_err(|e| CliError::Input {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        if ck.cardinality != cardinality || ck.snr_grid_db != snr_grid_db {
            log::warn!(
                "{} was written for another grid; starting over",
                path.display()
            );
            return Ok(None);
        }
        Ok(Some(ck))
    }

    pub fn save(&self, dir: &Path) -> CliResult<()> {
        write_atomic(&Self::path(dir, self.cardinality), &to_json(self))
    }

    /// Grid points not yet attempted.
    pub fn remaining(&self) -> Vec<f64> {
        let done = self.records.len() + self.failures.len();
        self.snr_grid_db[done.min(self.snr_grid_db.len())..].to_vec()
    }
}
