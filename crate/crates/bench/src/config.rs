//! Flat `key = value` configuration for `bench`.
//!
//! ```text
//! # two random instances and a graph
//! instance = random:16:1
//! instance = random:16:2
//! instance = maxcut:graphs/petersen.txt
//! methods = dem-rc, sa, tabu
//! seeds = 1, 2, 3
//! out = results
//! rounds = 100            # applies to every method
//! dem-rc.rank = 10        # applies to one method
//! sa.steps = 2000
//! optimum = auto          # brute-force optima for n <= 20; `off` disables
//! ```
//!
//! `instance` may repeat. `methods` and `seeds` are comma lists. Bare
//! parameter keys (`rank`, `steps`, `rounds`, `eta`, `eps`, `backtrack`) set
//! a default for every method; `<method>.<key>` overrides it. Text after `#`
//! is a comment.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{BenchError, Result};
use crate::method::{Method, MethodParams};
use crate::source::InstanceSource;

/// Largest `n` for which `optimum = auto` enumerates.
pub const AUTO_OPTIMUM_MAX_N: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub instances: Vec<InstanceSource>,
    /// Methods in run order, with their parameters resolved against the
    /// shared defaults.
    pub methods: Vec<(Method, MethodParams)>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub optimum: bool,
}

const PARAM_KEYS: [&str; 6] = ["rank", "steps", "rounds", "eta", "eps", "backtrack"];

impl BenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut instances = Vec::new();
        let mut methods: Vec<Method> = Vec::new();
        let mut seeds = vec![0];
        let mut out = PathBuf::from("bench-out");
        let mut optimum = true;
        let mut shared = MethodParams::default();
        let mut specific: BTreeMap<Method, MethodParams> = BTreeMap::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |why: String| BenchError::Input(format!("config line {}: {why}", idx + 1));
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| at("expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let reword = |e: BenchError| at(e.to_string());
            match key {
                "instance" => instances.push(value.parse().map_err(reword)?),
                "methods" => {
                    methods = list(value)
                        .map(str::parse)
                        .collect::<Result<_>>()
                        .map_err(reword)?;
                }
                "seeds" => {
                    seeds = list(value)
                        .map(|s| s.parse::<u64>().map_err(|_| at(format!("bad seed `{s}`"))))
                        .collect::<Result<_>>()?;
                }
                "out" => out = PathBuf::from(value),
                "optimum" => {
                    optimum = match value {
                        "auto" => true,
                        "off" => false,
                        other => {
                            return Err(at(format!(
                                "optimum must be `auto` or `off`, got `{other}`"
                            )))
                        }
                    }
                }
                k if PARAM_KEYS.contains(&k) => shared.set(k, value).map_err(reword)?,
                k => {
                    let (m, p) = k
                        .split_once('.')
                        .ok_or_else(|| at(format!("unknown key `{k}`")))?;
                    let m: Method = m.parse().map_err(reword)?;
                    specific
                        .entry(m)
                        .or_default()
                        .set(p, value)
                        .map_err(reword)?;
                }
            }
        }
        if instances.is_empty() {
            return Err(BenchError::Input("config lists no instance".into()));
        }
        if methods.is_empty() {
            return Err(BenchError::Input("config lists no method".into()));
        }
        if seeds.is_empty() {
            return Err(BenchError::Input("config lists no seed".into()));
        }
        let methods = methods
            .into_iter()
            .map(|m| (m, specific.get(&m).cloned().unwrap_or_default().or(&shared)))
            .collect();
        Ok(BenchConfig {
            instances,
            methods,
            seeds,
            out,
            optimum,
        })
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BenchError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies command-line overrides on top of every method's parameters.
    pub fn override_params(&mut self, flags: &MethodParams) {
        for (_, p) in &mut self.methods {
            *p = flags.or(p);
        }
    }
}

fn list(value: &str) -> impl Iterator<Item = &str> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty())
}
