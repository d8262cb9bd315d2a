//! Per-run reports, one JSON object per line.

use std::collections::BTreeMap;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use qubo_dem::{QuboInstance, SignVector};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::method::{Method, RunOutcome};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub method: String,
    pub instance: String,
    pub n: usize,
    /// `x^T Q x` of the ±1 instance at `x`.
    pub best_value: f64,
    /// `best_value` mapped back through the instance's scale and offset
    /// (the cut weight for MaxCut instances).
    pub original_value: f64,
    pub expected_value: Option<f64>,
    pub wall_time: f64,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    /// Path of the trace file, when one was written.
    pub trace: Option<String>,
    pub x: Vec<i8>,
}

impl SolverReport {
    pub fn new(
        method: Method,
        inst: &QuboInstance,
        seed: u64,
        run: &RunOutcome,
        trace: Option<String>,
    ) -> Self {
        SolverReport {
            method: method.to_string(),
            instance: inst.name().to_string(),
            n: inst.n(),
            best_value: run.value,
            original_value: inst.original_value(run.value),
            expected_value: run.expected,
            wall_time: run.wall_time,
            seed,
            params: run.params.clone(),
            trace,
            x: run.x.as_slice().to_vec(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(line: &str) -> Result<Self> {
        Ok(serde_json::from_str(line)?)
    }

    /// `best_value` re-evaluated from `x` on `inst`.
    pub fn verify(&self, inst: &QuboInstance) -> Result<bool> {
        let x = SignVector::new(self.x.clone())?;
        Ok(inst.evaluate(&x)? == self.best_value && self.wall_time >= 0.0)
    }

    /// The same report with the wall time zeroed, for comparing runs.
    pub fn without_timing(&self) -> Self {
        SolverReport {
            wall_time: 0.0,
            ..self.clone()
        }
    }
}

pub fn append_jsonl(path: &Path, reports: &[SolverReport]) -> Result<()> {
    let mut file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| BenchError::Input(format!("{}: {e}", path.display())))?;
    for r in reports {
        writeln!(file, "{}", r.to_json()?)?;
    }
    Ok(())
}

pub fn read_jsonl(path: &Path) -> Result<Vec<SolverReport>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::Input(format!("{}: {e}", path.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(SolverReport::from_json)
        .collect()
}
