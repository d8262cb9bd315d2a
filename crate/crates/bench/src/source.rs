//! Where an instance comes from: a generator or a file.
//!
//! ```text
//! random:N[:SEED]     dense Gaussian instance (SEED defaults to the caller's seed)
//! maxcut:PATH         edge list, 1-based `n m` header
//! subset-sum:W1,W2,.. partition instance Q = w w^T
//! PATH                instance file in the text format
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use qubo_dem::reductions::{from_maxcut, from_subset_sum, gen_random_gaussian};
use qubo_dem::{io, Convention, QuboInstance};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InstanceSource {
    Random { n: usize, seed: Option<u64> },
    MaxCut(PathBuf),
    SubsetSum(Vec<u64>),
    File(PathBuf),
}

impl FromStr for InstanceSource {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |why: &str| BenchError::Usage(format!("instance `{s}`: {why}"));
        let Some((kind, rest)) = s.split_once(':') else {
            if s.is_empty() {
                return Err(bad("empty"));
            }
            return Ok(InstanceSource::File(PathBuf::from(s)));
        };
        match kind {
            "random" => {
                let mut parts = rest.split(':');
                let n = parts
                    .next()
                    .and_then(|v| v.parse::<usize>().ok())
                    .filter(|&n| n > 0)
                    .ok_or_else(|| bad("expected random:N[:SEED] with N >= 1"))?;
                let seed = match parts.next() {
                    None => None,
                    Some(v) => Some(
                        v.parse()
                            .map_err(|_| bad("seed must be an unsigned integer"))?,
                    ),
                };
                if parts.next().is_some() {
                    return Err(bad("too many fields"));
                }
                Ok(InstanceSource::Random { n, seed })
            }
            "maxcut" if !rest.is_empty() => Ok(InstanceSource::MaxCut(PathBuf::from(rest))),
            "subset-sum" => {
                let weights = rest
                    .split(',')
                    .map(|w| w.trim().parse::<u64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| bad("weights must be positive integers"))?;
                Ok(InstanceSource::SubsetSum(weights))
            }
            // Windows drive letters and other colons in plain paths
            _ if Path::new(s).exists() => Ok(InstanceSource::File(PathBuf::from(s))),
            _ => Err(bad("unknown generator")),
        }
    }
}

impl fmt::Display for InstanceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSource::Random { n, seed: Some(s) } => write!(f, "random:{n}:{s}"),
            InstanceSource::Random { n, seed: None } => write!(f, "random:{n}"),
            InstanceSource::MaxCut(p) => write!(f, "maxcut:{}", p.display()),
            InstanceSource::SubsetSum(w) => {
                let w: Vec<String> = w.iter().map(u64::to_string).collect();
                write!(f, "subset-sum:{}", w.join(","))
            }
            InstanceSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl InstanceSource {
    /// Builds the instance. `default_seed` applies to `random:N` without a
    /// seed. File instances are named after the file stem unless they carry
    /// a name.
    pub fn load(&self, default_seed: u64) -> Result<QuboInstance> {
        match self {
            InstanceSource::Random { n, seed } => {
                Ok(gen_random_gaussian(*n, seed.unwrap_or(default_seed))?)
            }
            InstanceSource::MaxCut(path) => {
                let g = io::read_edge_list(path).map_err(|e| input_error(path, e))?;
                Ok(from_maxcut(&g)?.with_name(stem(path)))
            }
            InstanceSource::SubsetSum(w) => {
                let label: Vec<String> = w.iter().map(u64::to_string).collect();
                Ok(from_subset_sum(w)?.with_name(format!("subset_sum_{}", label.join("_"))))
            }
            InstanceSource::File(path) => {
                let inst = io::read_instance(path).map_err(|e| input_error(path, e))?;
                if inst.name().is_empty() {
                    Ok(inst.with_name(stem(path)))
                } else {
                    Ok(inst)
                }
            }
        }
    }

    /// [`InstanceSource::load`] converted to the ±1 form every solver takes.
    pub fn load_plus_minus_one(&self, default_seed: u64) -> Result<QuboInstance> {
        to_plus_minus_one(self.load(default_seed)?)
    }
}

/// 0/1 instances are homogenized into ±1 form with one extra variable.
pub fn to_plus_minus_one(inst: QuboInstance) -> Result<QuboInstance> {
    match inst.convention() {
        Convention::PlusMinusOne => Ok(inst),
        Convention::ZeroOne => {
            let name = inst.name().to_string();
            Ok(inst.to_plus_minus_one()?.with_name(name))
        }
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "instance".into())
}

fn input_error(path: &Path, e: qubo_dem::FormatError) -> BenchError {
    BenchError::Input(format!("{}: {e}", path.display()))
}
