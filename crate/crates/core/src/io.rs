//! Line-oriented text format for instances.
//!
//! ```text
//! # name = triangle
//! # objective_offset = 1.5
//! qubo plus_minus_one 3 3
//! 0 1 2.5000000000000000e-1
//! 0 2 2.5000000000000000e-1
//! 1 2 2.5000000000000000e-1
//! ```
//!
//! The header is `qubo <convention> <n> <nnz>` followed by `nnz` lines
//! `i j value` (0-based, `i <= j`, value applies to both `(i, j)` and
//! `(j, i)`). `linear i value` lines add a linear term (zero_one only).
//! Comment lines of the form `# key = value` carry metadata; `name` sets the
//! instance name. Values are written with 17 significant digits.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::FormatError;
use crate::instance::{Convention, QuboInstance};
use crate::reductions::WeightedGraph;

type Result<T> = std::result::Result<T, FormatError>;

pub fn read_instance(path: impl AsRef<Path>) -> Result<QuboInstance> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn write_instance(inst: &QuboInstance, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, format_instance(inst))?;
    Ok(())
}

pub fn format_instance(inst: &QuboInstance) -> String {
    let mut out = String::new();
    let n = inst.n();
    if !inst.name().is_empty() {
        let _ = writeln!(out, "# name = {}", inst.name());
    }
    for (k, v) in inst.metadata() {
        let _ = writeln!(out, "# {k} = {v}");
    }
    let q = inst.q();
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i..n {
            if q[[i, j]] != 0.0 {
                entries.push((i, j, q[[i, j]]));
            }
        }
    }
    let _ = writeln!(out, "qubo {} {} {}", inst.convention(), n, entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{i} {j} {v:.16e}");
    }
    if let Some(b) = inst.linear() {
        for (i, v) in b.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "linear {i} {v:.16e}");
            }
        }
    }
    out
}

fn malformed(line: usize, reason: impl Into<String>) -> FormatError {
    FormatError::MalformedLine {
        line,
        reason: reason.into(),
    }
}

fn parse_value(token: &str, line: usize) -> Result<f64> {
    let v: f64 = token
        .parse()
        .map_err(|_| malformed(line, format!("bad number `{token}`")))?;
    if !v.is_finite() {
        return Err(malformed(line, format!("non-finite value `{token}`")));
    }
    Ok(v)
}

fn parse_index(token: &str, line: usize, n: usize) -> Result<usize> {
    let idx: usize = token
        .parse()
        .map_err(|_| malformed(line, format!("bad index `{token}`")))?;
    if idx >= n {
        return Err(FormatError::IndexOutOfRange {
            line,
            index: idx,
            n,
        });
    }
    Ok(idx)
}

pub fn parse_instance(text: &str) -> Result<QuboInstance> {
    let mut name = String::new();
    let mut metadata = Vec::new();
    let mut header: Option<(Convention, usize, usize)> = None;
    let mut q: Option<Array2<f64>> = None;
    let mut linear: Option<Array1<f64>> = None;
    let mut declared: HashMap<(usize, usize), f64> = HashMap::new();
    let mut entry_lines = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                let (k, v) = (k.trim(), v.trim());
                if k == "name" {
                    name = v.to_string();
                } else if !k.is_empty() {
                    metadata.push((k.to_string(), v.to_string()));
                }
            }
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let Some((convention, n, _)) = header else {
            let bad = |reason: &str| FormatError::MalformedHeader {
                line,
                reason: reason.into(),
            };
            if tokens.len() != 4 || tokens[0] != "qubo" {
                return Err(bad("expected `qubo <convention> <n> <nnz>`"));
            }
            let convention: Convention =
                tokens[1].parse().map_err(|_| bad("unknown convention"))?;
            let n: usize = tokens[2].parse().map_err(|_| bad("bad variable count"))?;
            let nnz: usize = tokens[3].parse().map_err(|_| bad("bad entry count"))?;
            if n == 0 {
                return Err(bad("variable count must be positive"));
            }
            header = Some((convention, n, nnz));
            q = Some(Array2::zeros((n, n)));
            continue;
        };
        let q = q.as_mut().expect("allocated with header");
        if tokens[0] == "linear" {
            if convention != Convention::ZeroOne {
                return Err(malformed(
                    line,
                    "linear terms require the zero_one convention",
                ));
            }
            if tokens.len() != 3 {
                return Err(malformed(line, "expected `linear i value`"));
            }
            let i = parse_index(tokens[1], line, n)?;
            let v = parse_value(tokens[2], line)?;
            linear.get_or_insert_with(|| Array1::zeros(n))[i] = v;
            continue;
        }
        if tokens.len() != 3 {
            return Err(malformed(line, "expected `i j value`"));
        }
        let a = parse_index(tokens[0], line, n)?;
        let b = parse_index(tokens[1], line, n)?;
        let v = parse_value(tokens[2], line)?;
        let (i, j) = if a <= b { (a, b) } else { (b, a) };
        if let Some(prev) = declared.insert((i, j), v) {
            if prev.to_bits() != v.to_bits() {
                return Err(FormatError::Asymmetric { line, i: a, j: b });
            }
        }
        q[[i, j]] = v;
        q[[j, i]] = v;
        entry_lines += 1;
    }

    let Some((convention, _, nnz)) = header else {
        return Err(FormatError::MalformedHeader {
            line: 0,
            reason: "missing header".into(),
        });
    };
    if entry_lines != nnz {
        return Err(FormatError::MalformedHeader {
            line: 0,
            reason: format!("header declares {nnz} entries, found {entry_lines}"),
        });
    }
    let mut inst = QuboInstance::new(q.expect("allocated with header"), convention, linear)
        .map_err(|e| malformed(0, e.to_string()))?
        .with_name(name);
    for (k, v) in metadata {
        inst = inst.with_metadata(k, v);
    }
    Ok(inst)
}

/// Reads a weighted edge list: a `n m` header followed by `m` lines
/// `i j [w]` with 1-based vertices (the Gset/rudy layout). Missing weights
/// default to 1. Lines starting with `#`, `%` or `c ` are ignored.
pub fn read_edge_list(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

pub fn parse_edge_list(text: &str) -> Result<WeightedGraph> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') || t.starts_with('%') || t.starts_with("c ") {
            continue;
        }
        let tokens: Vec<&str> = t.split_whitespace().collect();
        let Some((n, _)) = header else {
            let bad = || FormatError::MalformedHeader {
                line,
                reason: "expected `n m`".into(),
            };
            if tokens.len() != 2 {
                return Err(bad());
            }
            let n = tokens[0].parse().map_err(|_| bad())?;
            let m = tokens[1].parse().map_err(|_| bad())?;
            header = Some((n, m));
            continue;
        };
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(malformed(line, "expected `i j [w]`"));
        }
        let vertex = |tok: &str| -> Result<usize> {
            let v: usize = tok
                .parse()
                .map_err(|_| malformed(line, format!("bad vertex `{tok}`")))?;
            if v == 0 || v > n {
                return Err(FormatError::IndexOutOfRange { line, index: v, n });
            }
            Ok(v - 1)
        };
        let i = vertex(tokens[0])?;
        let j = vertex(tokens[1])?;
        let w = if tokens.len() == 3 {
            parse_value(tokens[2], line)?
        } else {
            1.0
        };
        edges.push((i, j, w));
    }
    let Some((n, m)) = header else {
        return Err(FormatError::MalformedHeader {
            line: 0,
            reason: "missing header".into(),
        });
    };
    if edges.len() != m {
        return Err(FormatError::MalformedHeader {
            line: 0,
            reason: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    WeightedGraph::new(n, edges).map_err(|e| malformed(0, e.to_string()))
}
