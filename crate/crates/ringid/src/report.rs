//! CSV reports and run manifests.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use ringid_core::eval::{BenchRow, RocCurve};
use ringid_core::imprint::WatermarkConfig;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const BENCH_HEADER: &str = "attack,n_keys,trials,accuracy,mean_match_dist,mean_null_dist,seed";

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = String::from(BENCH_HEADER);
    s.push('\n');
    for r in rows {
        let _ = writeln!(
            s,
            "{},{},{},{:.6},{:.6},{:.6},{}",
            r.attack, r.n_keys, r.trials, r.accuracy, r.mean_match, r.mean_null, r.seed
        );
    }
    s
}

pub fn roc_csv(roc: &RocCurve) -> String {
    let mut s = String::from("fpr,tpr\n");
    for (f, t) in &roc.points {
        let _ = writeln!(s, "{f:.6},{t:.6}");
    }
    s
}

/// Serializable mirror of [`WatermarkConfig`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub size: usize,
    pub ring_channel: usize,
    pub noise_channels: Vec<usize>,
    pub r_min: usize,
    pub r_max: usize,
    pub alpha: f64,
    pub eta: f64,
    pub mask_style: String,
    pub enable_shift: bool,
    pub enable_lossless: bool,
    pub enable_discretize: bool,
    pub baseline_center_offset: bool,
}

impl From<&WatermarkConfig> for ConfigRecord {
    fn from(c: &WatermarkConfig) -> Self {
        Self {
            size: c.size,
            ring_channel: c.ring_channel,
            noise_channels: c.noise_channels.clone(),
            r_min: c.r_min,
            r_max: c.r_max,
            alpha: c.alpha,
            eta: c.eta,
            mask_style: c.mask_style.to_string(),
            enable_shift: c.enable_shift,
            enable_lossless: c.enable_lossless,
            enable_discretize: c.enable_discretize,
            baseline_center_offset: c.baseline_center_offset,
        }
    }
}

/// What a command did and everything needed to redo it. No timestamps,
/// so identical runs produce identical manifests.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub tool_version: String,
    pub config: Option<ConfigRecord>,
    pub seeds: BTreeMap<String, u64>,
    pub artifacts: Vec<String>,
    /// Command arguments as parsed, for replay.
    pub args: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &str, args: serde_json::Value) -> Self {
        Self {
            command: command.into(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            config: None,
            seeds: BTreeMap::new(),
            artifacts: Vec::new(),
            args,
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        text.push('\n');
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    }
}

/// `out.csv` → `out.csv.manifest.json`.
pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut s = artifact.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_layout() {
        let row = BenchRow {
            attack: "cs=0.75".into(),
            n_keys: 32,
            trials: 100,
            accuracy: 0.5,
            mean_match: 0.25,
            std_match: 0.0,
            mean_null: 1.0 / 3.0,
            std_null: 0.0,
            seed: 11,
        };
        assert_eq!(bench_csv(&[row]), format!("{BENCH_HEADER}\ncs=0.75,32,100,0.500000,0.250000,0.333333,11\n"));
    }

    #[test]
    fn manifest_roundtrip() {
        let mut m = RunManifest::new("bench", serde_json::json!({"trials": 5}));
        m.config = Some((&WatermarkConfig::default()).into());
        m.seeds.insert("seed".into(), 9);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        m.save(&p).unwrap();
        assert_eq!(RunManifest::load(&p).unwrap(), m);
    }
}
