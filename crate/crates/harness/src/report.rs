//! Run and bench reports.

use std::path::Path;

use cfcolor::framework::LevelInfo;
use cfcolor::oracle::Witness;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HarnessError, Result};
use crate::structure::StructureParams;
use crate::workload::Op;

/// Outcome of verification for one step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verified {
    Passed,
    Failed,
    Skipped,
}

impl Serialize for Verified {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Verified::Passed => s.serialize_bool(true),
            Verified::Failed => s.serialize_bool(false),
            Verified::Skipped => s.serialize_str("skipped"),
        }
    }
}

impl<'de> Deserialize<'de> for Verified {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Flag(bool),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Flag(true) => Ok(Verified::Passed),
            Raw::Flag(false) => Ok(Verified::Failed),
            Raw::Word(w) if w == "skipped" => Ok(Verified::Skipped),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("unexpected verified value {w:?}"))),
        }
    }
}

impl Verified {
    fn as_csv(self) -> &'static str {
        match self {
            Verified::Passed => "true",
            Verified::Failed => "false",
            Verified::Skipped => "skipped",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub structure: String,
    pub workload: String,
    pub verify: String,
    pub events: usize,
    #[serde(flatten)]
    pub params: StructureParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepReport {
    pub step: usize,
    pub op: Op,
    pub id: u64,
    pub n: usize,
    pub recolorings: usize,
    pub distinct_colors: usize,
    pub verified: Verified,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ell: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<LevelInfo>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub step: usize,
    /// `oracle`, `invariants` or `totals`.
    pub check: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub steps: usize,
    pub final_n: usize,
    pub max_recolorings: usize,
    pub max_distinct_colors: usize,
    pub total_recolorings: u64,
    pub structure_total_recolorings: u64,
    pub violations: Vec<Violation>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub steps: Vec<StepReport>,
    pub summary: Summary,
}

impl RunReport {
    pub fn passed(&self) -> bool {
        self.summary.violations.is_empty()
    }

    /// 0 when clean, 2 on any violation.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| HarnessError::Encode(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Per-step table. Level states are left to the JSON report.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let enc = |e: csv::Error| HarnessError::Encode(e.to_string());
        w.write_record(["step", "op", "id", "n", "recolorings", "distinct_colors", "verified", "ell"])
            .map_err(enc)?;
        for s in &self.steps {
            let op = match s.op {
                Op::Insert => "insert",
                Op::Delete => "delete",
            };
            w.write_record([
                s.step.to_string(),
                op.to_string(),
                s.id.to_string(),
                s.n.to_string(),
                s.recolorings.to_string(),
                s.distinct_colors.to_string(),
                s.verified.as_csv().to_string(),
                s.ell.map(|e| e.to_string()).unwrap_or_default(),
            ])
            .map_err(enc)?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Encode(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Encode(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub structure: String,
    pub sizes: Vec<usize>,
    pub seeds: Vec<u64>,
    pub delete_ratio: f64,
    #[serde(flatten)]
    pub params: StructureParams,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub size: usize,
    pub seed: u64,
    pub events: usize,
    pub final_n: usize,
    pub max_recolorings: usize,
    pub mean_recolorings: f64,
    pub total_recolorings: u64,
    pub max_distinct_colors: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| HarnessError::Encode(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| HarnessError::Encode(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| HarnessError::Encode(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| HarnessError::Encode(e.to_string()))
    }
}

/// Writes `text` to `path`, creating parent directories.
pub fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir.display().to_string(), e))?;
    }
    std::fs::write(path, text).map_err(|e| HarnessError::io(path.display().to_string(), e))
}

/// The CSV mirror sits next to the JSON report.
pub fn csv_path(report: &Path) -> std::path::PathBuf {
    report.with_extension("csv")
}
