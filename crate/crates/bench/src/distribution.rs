//! `distribution`: per-trial rounded values of a factor-based method.

use std::path::Path;

use qubo_dem::QuboInstance;
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};
use crate::method::{run, Method, MethodParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionSummary {
    pub method: String,
    pub instance: String,
    pub seed: u64,
    pub trials: usize,
    pub mean: f64,
    /// Sample standard deviation, 0 for a single trial.
    pub std_dev: f64,
    pub standard_error: f64,
    /// Set when `trials == 1` and the spread is undefined.
    pub single_trial: bool,
    pub min: f64,
    pub max: f64,
    /// Expected value of the rounded factor.
    pub expected_value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    pub summary: DistributionSummary,
    pub values: Vec<f64>,
    pub histogram: Vec<Bin>,
}

/// Runs `method` with `trials` rounding trials and bins the trial values
/// into `bins` equal-width bins (one bin when all values coincide).
pub fn distribution(
    inst: &QuboInstance,
    method: Method,
    params: &MethodParams,
    seed: u64,
    trials: usize,
    bins: usize,
) -> Result<Distribution> {
    if !method.is_factor_based() {
        return Err(BenchError::Usage(format!(
            "{method} does not round a factor; use dem-rc, dem-exact or gw-sdp-surrogate"
        )));
    }
    if trials == 0 || bins == 0 {
        return Err(BenchError::Usage(
            "trials and bins must be at least 1".into(),
        ));
    }
    let p = MethodParams {
        rounds: Some(trials),
        ..params.clone()
    };
    let out = run(method, inst, &p, seed)?;
    let values = out
        .trial_values
        .expect("factor-based methods keep trial values");
    let expected_value = out
        .expected
        .expect("factor-based methods report an expected value");
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let single_trial = values.len() == 1;
    let std_dev = if single_trial {
        0.0
    } else {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let summary = DistributionSummary {
        method: method.to_string(),
        instance: inst.name().to_string(),
        seed,
        trials: values.len(),
        mean,
        std_dev,
        standard_error: std_dev / n.sqrt(),
        single_trial,
        min,
        max,
        expected_value,
    };
    let histogram = histogram(&values, bins);
    Ok(Distribution {
        summary,
        values,
        histogram,
    })
}

/// Equal-width bins over `[min, max]`; the last bin is closed.
pub fn histogram(values: &[f64], bins: usize) -> Vec<Bin> {
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        return Vec::new();
    }
    if max == min {
        return vec![Bin {
            lower: min,
            upper: max,
            count: values.len(),
        }];
    }
    let width = (max - min) / bins as f64;
    let mut out: Vec<Bin> = (0..bins)
        .map(|b| Bin {
            lower: min + b as f64 * width,
            upper: if b + 1 == bins {
                max
            } else {
                min + (b + 1) as f64 * width
            },
            count: 0,
        })
        .collect();
    for v in values {
        let b = (((v - min) / width) as usize).min(bins - 1);
        out[b].count += 1;
    }
    out
}

impl Distribution {
    /// Writes `trials.csv`, `histogram.csv` and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let mut w = csv::Writer::from_path(dir.join("trials.csv"))?;
        w.write_record(["trial", "value"])?;
        for (t, v) in self.values.iter().enumerate() {
            w.write_record([t.to_string(), v.to_string()])?;
        }
        w.flush()?;
        let mut w = csv::Writer::from_path(dir.join("histogram.csv"))?;
        for b in &self.histogram {
            w.serialize(b)?;
        }
        w.flush()?;
        std::fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&self.summary)? + "\n",
        )?;
        Ok(())
    }
}
