//! The `bench` table: one row per (instance, method, seed) plus one
//! aggregate row per (instance, method).

use std::fs;
use std::path::Path;

use qubo_dem::exhaustive::brute_force_minimum;
use qubo_dem::QuboInstance;
use serde::{Deserialize, Serialize};

use crate::config::{BenchConfig, AUTO_OPTIMUM_MAX_N};
use crate::error::{BenchError, Result};
use crate::method::{run, Method, MethodParams};
use crate::report::{append_jsonl, SolverReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RowKind {
    Run,
    Aggregate,
}

/// One CSV row. An aggregate row leaves `seed` empty and summarizes the
/// successful runs of its (instance, method): `value` is the best value,
/// `median` the median value, and `expected_value` and `wall_time` are
/// medians. Gap columns always refer to `value`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub instance: String,
    pub method: String,
    pub kind: RowKind,
    pub seed: Option<u64>,
    pub n: usize,
    pub value: Option<f64>,
    pub median: Option<f64>,
    pub expected_value: Option<f64>,
    pub wall_time: Option<f64>,
    pub optimum: Option<f64>,
    /// `value - optimum`.
    pub gap: Option<f64>,
    /// `(value - optimum) / |optimum|`.
    pub rel_gap: Option<f64>,
    /// `ok` or `error`.
    pub status: String,
    pub error: Option<String>,
}

impl BenchRow {
    /// The row with timing cleared, for determinism comparisons.
    pub fn without_timing(&self) -> Self {
        BenchRow {
            wall_time: None,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchResults {
    pub rows: Vec<BenchRow>,
    pub reports: Vec<SolverReport>,
}

struct Loaded {
    name: String,
    inst: Option<QuboInstance>,
    error: Option<String>,
    optimum: Option<f64>,
}

/// Runs every cell of `config` and writes `results.csv`, `reports.jsonl`
/// and `traces/` under `config.out`. Failures of single cells, including
/// unreadable instances, become error rows and the run continues.
pub fn run_bench(config: &BenchConfig) -> Result<BenchResults> {
    let traces = config.out.join("traces");
    fs::create_dir_all(&traces)
        .map_err(|e| BenchError::Input(format!("{}: {e}", traces.display())))?;
    let results = compute(config, Some(&traces))?;
    write_csv(&config.out.join("results.csv"), &results.rows)?;
    let reports_path = config.out.join("reports.jsonl");
    if reports_path.exists() {
        fs::remove_file(&reports_path)?;
    }
    append_jsonl(&reports_path, &results.reports)?;
    Ok(results)
}

/// [`run_bench`] without touching the filesystem unless `traces` is given.
pub fn compute(config: &BenchConfig, traces: Option<&Path>) -> Result<BenchResults> {
    let mut out = BenchResults::default();
    let instances: Vec<Loaded> = config
        .instances
        .iter()
        .map(|s| load(s, config.optimum))
        .collect();
    for loaded in &instances {
        for (method, params) in &config.methods {
            let mut runs = Vec::with_capacity(config.seeds.len());
            for &seed in &config.seeds {
                let row = match &loaded.inst {
                    None => error_row(
                        loaded,
                        *method,
                        Some(seed),
                        0,
                        loaded.error.clone().unwrap_or_default(),
                    ),
                    Some(inst) => match cell(inst, *method, params, seed, traces) {
                        Ok((row, report)) => {
                            out.reports.push(report);
                            row.with_optimum(loaded.optimum)
                        }
                        Err(e) => error_row(loaded, *method, Some(seed), inst.n(), e.to_string()),
                    },
                };
                runs.push(row);
            }
            let n = loaded.inst.as_ref().map_or(0, QuboInstance::n);
            let summary = aggregate(&loaded.name, *method, n, &runs, loaded.optimum);
            out.rows.extend(runs);
            out.rows.push(summary);
        }
    }
    Ok(out)
}

fn load(source: &crate::source::InstanceSource, optimum: bool) -> Loaded {
    match source.load_plus_minus_one(0) {
        Err(e) => Loaded {
            name: source.to_string(),
            inst: None,
            error: Some(e.to_string()),
            optimum: None,
        },
        Ok(inst) => {
            let optimum = (optimum && inst.n() <= AUTO_OPTIMUM_MAX_N)
                .then(|| brute_force_minimum(&inst).ok().map(|(_, v)| v))
                .flatten();
            Loaded {
                name: inst.name().to_string(),
                inst: Some(inst),
                error: None,
                optimum,
            }
        }
    }
}

fn cell(
    inst: &QuboInstance,
    method: Method,
    params: &MethodParams,
    seed: u64,
    traces: Option<&Path>,
) -> Result<(BenchRow, SolverReport)> {
    let outcome = run(method, inst, params, seed)?;
    let trace_path = match traces {
        Some(dir) => {
            let path = dir.join(format!(
                "{}__{}__{}.txt",
                sanitize(inst.name()),
                method,
                seed
            ));
            fs::write(&path, outcome.trace.to_text())?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let report = SolverReport::new(method, inst, seed, &outcome, trace_path);
    let row = BenchRow {
        instance: inst.name().to_string(),
        method: method.to_string(),
        kind: RowKind::Run,
        seed: Some(seed),
        n: inst.n(),
        value: Some(outcome.value),
        median: None,
        expected_value: outcome.expected,
        wall_time: Some(outcome.wall_time),
        optimum: None,
        gap: None,
        rel_gap: None,
        status: "ok".into(),
        error: None,
    };
    Ok((row, report))
}

impl BenchRow {
    fn with_optimum(mut self, optimum: Option<f64>) -> Self {
        if let (Some(v), Some(opt)) = (self.value, optimum) {
            self.optimum = Some(opt);
            self.gap = Some(v - opt);
            self.rel_gap = (opt != 0.0).then(|| (v - opt) / opt.abs());
        }
        self
    }
}

fn error_row(
    loaded: &Loaded,
    method: Method,
    seed: Option<u64>,
    n: usize,
    error: String,
) -> BenchRow {
    BenchRow {
        instance: loaded.name.clone(),
        method: method.to_string(),
        kind: RowKind::Run,
        seed,
        n,
        value: None,
        median: None,
        expected_value: None,
        wall_time: None,
        optimum: loaded.optimum,
        gap: None,
        rel_gap: None,
        status: "error".into(),
        error: Some(error),
    }
}

/// Median of a non-empty slice; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn aggregate(
    instance: &str,
    method: Method,
    n: usize,
    runs: &[BenchRow],
    optimum: Option<f64>,
) -> BenchRow {
    let ok: Vec<&BenchRow> = runs.iter().filter(|r| r.status == "ok").collect();
    let base = BenchRow {
        instance: instance.to_string(),
        method: method.to_string(),
        kind: RowKind::Aggregate,
        seed: None,
        n,
        value: None,
        median: None,
        expected_value: None,
        wall_time: None,
        optimum: None,
        gap: None,
        rel_gap: None,
        status: "ok".into(),
        error: None,
    };
    if ok.is_empty() {
        return BenchRow {
            status: "error".into(),
            error: Some("no successful runs".into()),
            optimum,
            ..base
        };
    }
    let values: Vec<f64> = ok.iter().filter_map(|r| r.value).collect();
    let times: Vec<f64> = ok.iter().filter_map(|r| r.wall_time).collect();
    let expected: Vec<f64> = ok.iter().filter_map(|r| r.expected_value).collect();
    BenchRow {
        value: Some(values.iter().copied().fold(f64::INFINITY, f64::min)),
        median: Some(median(&values)),
        wall_time: Some(median(&times)),
        expected_value: (!expected.is_empty()).then(|| median(&expected)),
        ..base
    }
    .with_optimum(optimum)
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn write_csv(path: &Path, rows: &[BenchRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<BenchRow>> {
    let mut r = csv::Reader::from_path(path)?;
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
