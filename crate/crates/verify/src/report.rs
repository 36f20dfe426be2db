use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::config::{Suite, SuiteConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub name: String,
    pub suite: Suite,
    pub seed: u64,
    pub n: usize,
    pub kmax: usize,
    /// `None` when the measurement failed or was not finite.
    pub residual: Option<f64>,
    pub tolerance: Option<f64>,
    pub comparison: String,
    pub passed: bool,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cause: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub warnings: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub check: String,
    pub n: usize,
    /// Largest residual over the sampled seeds.
    pub residual: f64,
    pub ratio: Option<f64>,
    pub flag: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub version: String,
    pub config: SuiteConfig,
    pub passed: bool,
    pub summary: Summary,
    pub wall_seconds: f64,
    pub records: Vec<Record>,
    pub convergence: Vec<ConvergenceRow>,
    pub warnings: Vec<String>,
}

impl SuiteReport {
    pub fn new(config: SuiteConfig, mut records: Vec<Record>, convergence: Vec<ConvergenceRow>, warnings: Vec<String>, wall_seconds: f64) -> SuiteReport {
        records.sort_by(|a, b| (&a.name, a.seed, a.n).cmp(&(&b.name, b.seed, b.n)));
        let passed = records.iter().filter(|r| r.passed).count();
        SuiteReport {
            schema: SCHEMA_VERSION,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config,
            passed: passed == records.len(),
            summary: Summary {
                total: records.len(),
                passed,
                failed: records.len() - passed,
                warnings: warnings.len(),
            },
            wall_seconds,
            records,
            convergence,
            warnings,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is always serializable") + "\n"
    }

    /// Largest residual among records whose name matches, if any.
    pub fn max_residual(&self, name: &str) -> Option<f64> {
        self.records
            .iter()
            .filter(|r| r.name == name)
            .filter_map(|r| r.residual)
            .reduce(f64::max)
    }
}

/// Writes the convergence rows as `check,N,residual,ratio,flag`. A report
/// without rows yields the header alone.
pub fn emit_convergence_table<W: Write>(report: &SuiteReport, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["check", "N", "residual", "ratio", "flag"])?;
    for row in &report.convergence {
        w.write_record([
            row.check.clone(),
            row.n.to_string(),
            format!("{:.6e}", row.residual),
            row.ratio.map(|r| format!("{r:.6e}")).unwrap_or_default(),
            row.flag.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
