//! `rank-sweep`: expected value and best rounding per factor rank.

use std::path::Path;

use qubo_dem::QuboInstance;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::method::{run, Method, MethodParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub method: String,
    pub rank: usize,
    pub seed: u64,
    pub expected_value: f64,
    pub best_value: f64,
    pub wall_time: f64,
}

/// Runs every `(method, rank, seed)` combination. Ranks are validated up
/// front, so a bad rank fails before any solver runs.
pub fn rank_sweep(
    inst: &QuboInstance,
    methods: &[Method],
    ranks: &[usize],
    seeds: &[u64],
    params: &MethodParams,
) -> Result<Vec<SweepRow>> {
    if ranks.is_empty() {
        return Err(BenchError::Usage("rank list is empty".into()));
    }
    if let Some(&r) = ranks.iter().find(|&&r| r == 0 || r > inst.n()) {
        return Err(BenchError::Usage(format!(
            "rank must lie in [1, {}], got {r}",
            inst.n()
        )));
    }
    if let Some(m) = methods
        .iter()
        .find(|m| !matches!(m, Method::DemRc | Method::DemExact))
    {
        return Err(BenchError::Usage(format!(
            "rank-sweep runs dem-rc and dem-exact, not {m}"
        )));
    }
    let mut rows = Vec::new();
    for &method in methods {
        for &rank in ranks {
            for &seed in seeds {
                let p = MethodParams {
                    rank: Some(rank),
                    ..params.clone()
                };
                let out = run(method, inst, &p, seed)?;
                rows.push(SweepRow {
                    method: method.to_string(),
                    rank,
                    seed,
                    expected_value: out
                        .expected
                        .expect("descent methods report an expected value"),
                    best_value: out.value,
                    wall_time: out.wall_time,
                });
            }
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn sweep_csv_string(rows: &[SweepRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| BenchError::Input(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}
