//! Accumulator snapshots: the full running sums plus the configuration that
//! produced them, enough to resume a run or merge disjoint parts.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sff_core::estimator::MomentAccumulator;

use crate::config::{OutputSection, RunConfig};
use crate::error::{HarnessError, Result};

pub const MAGIC: &str = "sff-accumulator";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub magic: String,
    pub version: u32,
    pub config: RunConfig,
    pub accumulator: MomentAccumulator,
}

/// The part of a configuration that must agree between merged snapshots.
fn run_identity(cfg: &RunConfig) -> RunConfig {
    let mut c = cfg.clone();
    c.run.threads = 0;
    c.run.batch_range = None;
    c.output = OutputSection::default();
    c
}

impl Snapshot {
    pub fn new(config: RunConfig, accumulator: MomentAccumulator) -> Self {
        Self {
            magic: MAGIC.into(),
            version: VERSION,
            config,
            accumulator,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).map_err(|e| HarnessError::Format {
            path: path.into(),
            message: e.to_string(),
        })?;
        fs::write(path, text).map_err(|e| HarnessError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let bad = |message: String| HarnessError::Format {
            path: path.into(),
            message,
        };
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
        if value.get("magic").and_then(|m| m.as_str()) != Some(MAGIC) {
            return Err(bad(format!(
                "not an accumulator snapshot (magic string '{MAGIC}' missing)"
            )));
        }
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == VERSION as u64 => {}
            other => {
                return Err(bad(format!(
                    "unsupported snapshot version {other:?}, expected {VERSION}"
                )))
            }
        }
        serde_json::from_value(value).map_err(|e| bad(e.to_string()))
    }

    /// Batch indices holding at least one sample.
    pub fn filled_batches(&self) -> Vec<usize> {
        self.accumulator
            .batches()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.count() > 0)
            .map(|(i, _)| i)
            .collect()
    }

    /// Folds `other` in. The runs must share every setting except worker
    /// count, batch range and output location, and must not share a batch.
    pub fn merge(&mut self, other: &Snapshot) -> Result<()> {
        if run_identity(&self.config) != run_identity(&other.config) {
            return Err(HarnessError::Config(
                "snapshots come from different run configurations".into(),
            ));
        }
        let mine = self.filled_batches();
        if let Some(b) = other.filled_batches().iter().find(|b| mine.contains(b)) {
            return Err(HarnessError::Config(format!(
                "snapshots overlap in batch {b}"
            )));
        }
        self.accumulator.merge(&other.accumulator)?;
        self.config.run.batch_range = None;
        Ok(())
    }

    /// True when every batch of the declared run has been filled.
    pub fn is_complete(&self) -> bool {
        self.accumulator.samples() == self.accumulator.n_sim()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::runner::simulate;

    fn cfg(range: Option<[usize; 2]>) -> RunConfig {
        let mut c = RunConfig::default();
        c.ensemble.dim = 3;
        c.grid.tau_max = 1.0;
        c.grid.n_times = 3;
        c.run.n_sim = 100;
        c.run.batches = 4;
        c.run.batch_range = range;
        c
    }

    #[test]
    fn save_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.json");
        let c = cfg(None);
        let snap = Snapshot::new(c.clone(), simulate(&c).unwrap());
        snap.save(&path).unwrap();
        assert_eq!(Snapshot::load(&path).unwrap(), snap);
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        fs::write(&path, "{\"magic\": \"other\", \"version\": 1}").unwrap();
        assert!(matches!(
            Snapshot::load(&path),
            Err(HarnessError::Format { .. })
        ));
        fs::write(&path, "{\"magic\": \"sff-accumulator\", \"version\": 9}").unwrap();
        let err = Snapshot::load(&path).unwrap_err().to_string();
        assert!(err.contains("version"), "{err}");
    }

    #[test]
    fn merge_refuses_overlap_and_mismatch() {
        let a = cfg(Some([0, 2]));
        let mut sa = Snapshot::new(a.clone(), simulate(&a).unwrap());
        let overlap = cfg(Some([1, 3]));
        let so = Snapshot::new(overlap.clone(), simulate(&overlap).unwrap());
        assert!(sa.merge(&so).unwrap_err().to_string().contains("batch 1"));
        let mut other = cfg(Some([2, 4]));
        other.ensemble.seed = 99;
        let sx = Snapshot::new(other.clone(), simulate(&other).unwrap());
        assert!(sa.merge(&sx).is_err());
        let b = cfg(Some([2, 4]));
        sa.merge(&Snapshot::new(b.clone(), simulate(&b).unwrap()))
            .unwrap();
        assert!(sa.is_complete());
    }
}
