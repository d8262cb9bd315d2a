//! Uniform entry point over the solvers.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use qubo_dem::baselines::{
    burer2, gw_sdp_surrogate, simulated_annealing, simulated_bifurcation, tabu_search, SaParams,
    SbParams, TabuParams,
};
use qubo_dem::dem::{dem_rc, exact_dem, phi, DemRcParams, ExactDemParams};
use qubo_dem::rng::{self, tag};
use qubo_dem::rounding::gw_round;
use qubo_dem::{FactorMatrix, QuboInstance, SignVector};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    DemRc,
    DemExact,
    Sa,
    Tabu,
    Sb,
    Burer2,
    GwSdpSurrogate,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::DemRc,
        Method::DemExact,
        Method::Sa,
        Method::Tabu,
        Method::Sb,
        Method::Burer2,
        Method::GwSdpSurrogate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::DemRc => "dem-rc",
            Method::DemExact => "dem-exact",
            Method::Sa => "sa",
            Method::Tabu => "tabu",
            Method::Sb => "sb",
            Method::Burer2 => "burer2",
            Method::GwSdpSurrogate => "gw-sdp-surrogate",
        }
    }

    /// Methods that round a factor matrix, and so have an expected value and
    /// a per-trial distribution.
    pub fn is_factor_based(self) -> bool {
        matches!(
            self,
            Method::DemRc | Method::DemExact | Method::GwSdpSurrogate
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s.trim())
            .ok_or_else(|| {
                let known: Vec<&str> = Method::ALL.iter().map(|m| m.as_str()).collect();
                BenchError::Usage(format!(
                    "unknown method `{s}` (expected one of {})",
                    known.join(", ")
                ))
            })
    }
}

/// Shared knobs. Unset fields take per-method defaults; a knob a method has
/// no use for is ignored.
///
/// * `rank`: factor rank for dem-rc and dem-exact (10, capped at n) and
///   gw-sdp-surrogate (`ceil(sqrt(2n))`).
/// * `steps`: descent steps (dem-rc 500, dem-exact 200, gw-sdp-surrogate
///   1000), SA sweeps, tabu iterations or SB steps (1000 each).
/// * `rounds`: GW rounding trials (100) or burer2 restarts (10).
/// * `eta`: step size (dem-rc 0.05, dem-exact 0.5) or the SB time step.
/// * `eps`: dem-rc clipping margin or dem-exact stopping tolerance (1e-6).
/// * `backtrack`: step halving in dem-exact (off).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MethodParams {
    pub rank: Option<usize>,
    pub steps: Option<usize>,
    pub rounds: Option<usize>,
    pub eta: Option<f64>,
    pub eps: Option<f64>,
    pub backtrack: Option<bool>,
}

impl MethodParams {
    /// Fields of `self` where set, otherwise those of `base`.
    pub fn or(&self, base: &MethodParams) -> MethodParams {
        MethodParams {
            rank: self.rank.or(base.rank),
            steps: self.steps.or(base.steps),
            rounds: self.rounds.or(base.rounds),
            eta: self.eta.or(base.eta),
            eps: self.eps.or(base.eps),
            backtrack: self.backtrack.or(base.backtrack),
        }
    }

    /// Sets one knob from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let bad = || BenchError::Usage(format!("bad value `{value}` for `{key}`"));
        match key {
            "rank" => self.rank = Some(value.parse().map_err(|_| bad())?),
            "steps" => self.steps = Some(value.parse().map_err(|_| bad())?),
            "rounds" => self.rounds = Some(value.parse().map_err(|_| bad())?),
            "eta" => self.eta = Some(value.parse().map_err(|_| bad())?),
            "eps" => self.eps = Some(value.parse().map_err(|_| bad())?),
            "backtrack" => self.backtrack = Some(value.parse().map_err(|_| bad())?),
            _ => return Err(BenchError::Usage(format!("unknown parameter `{key}`"))),
        }
        Ok(())
    }
}

/// Everything a single run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub x: SignVector,
    pub value: f64,
    /// Expected GW value of the rounded factor.
    pub expected: Option<f64>,
    pub factor: Option<FactorMatrix>,
    /// Value of every rounding trial, for factor-based methods.
    pub trial_values: Option<Vec<f64>>,
    /// Seconds spent inside the solver call.
    pub wall_time: f64,
    /// Effective parameters, defaults resolved.
    pub params: BTreeMap<String, String>,
    pub trace: Trace,
}

/// `(iteration, value)` pairs; `value` is `Phi` for the descent methods and
/// the best value seen for the baselines.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub label: &'static str,
    pub points: Vec<(usize, f64)>,
}

impl Trace {
    fn from_values(label: &'static str, values: &[f64]) -> Self {
        Trace {
            label,
            points: values.iter().copied().enumerate().collect(),
        }
    }

    /// Plain text: a `# iteration <label>` header, then one line per point.
    pub fn to_text(&self) -> String {
        let mut out = format!("# iteration {}\n", self.label);
        for (i, v) in &self.points {
            out.push_str(&format!("{i} {v:.17e}\n"));
        }
        out
    }
}

fn positive(name: &str, v: usize) -> Result<usize> {
    if v == 0 {
        return Err(BenchError::Usage(format!("{name} must be at least 1")));
    }
    Ok(v)
}

fn check_rank(rank: usize, n: usize) -> Result<usize> {
    if rank == 0 || rank > n {
        return Err(BenchError::Usage(format!(
            "rank must lie in [1, {n}], got {rank}"
        )));
    }
    Ok(rank)
}

/// Runs `method` on a ±1 instance. Wall time covers the solver call only.
pub fn run(method: Method, inst: &QuboInstance, p: &MethodParams, seed: u64) -> Result<RunOutcome> {
    let n = inst.n();
    let mut params = BTreeMap::new();
    let mut echo = |k: &str, v: String| {
        params.insert(k.to_string(), v);
    };
    let out = match method {
        Method::DemRc => {
            let d = DemRcParams::default();
            let dp = DemRcParams {
                rank: check_rank(p.rank.unwrap_or(d.rank.min(n)), n)?,
                steps: p.steps.unwrap_or(d.steps),
                rounds: positive("rounds", p.rounds.unwrap_or(d.rounds))?,
                step_size: p.eta.unwrap_or(d.step_size),
                clip: p.eps.unwrap_or(d.clip),
                seed,
            };
            echo("rank", dp.rank.to_string());
            echo("steps", dp.steps.to_string());
            echo("rounds", dp.rounds.to_string());
            echo("eta", dp.step_size.to_string());
            echo("eps", dp.clip.to_string());
            let clock = Instant::now();
            let r = dem_rc(inst, &dp)?;
            let wall_time = clock.elapsed().as_secs_f64();
            let expected = phi(inst, &r.factor)?;
            let trace = Trace {
                label: "phi",
                points: r
                    .trace
                    .records()
                    .iter()
                    .map(|t| (t.iteration, t.phi))
                    .collect(),
            };
            RunOutcome {
                value: inst.evaluate(&r.rounding.best_x)?,
                x: r.rounding.best_x.clone(),
                expected: Some(expected),
                factor: Some(r.factor),
                trial_values: Some(r.rounding.trial_values),
                wall_time,
                params: BTreeMap::new(),
                trace,
            }
        }
        Method::DemExact => {
            let d = ExactDemParams::default();
            let rank = check_rank(p.rank.unwrap_or(DemRcParams::default().rank.min(n)), n)?;
            let rounds = positive("rounds", p.rounds.unwrap_or(DemRcParams::default().rounds))?;
            let ep = ExactDemParams {
                step_size: p.eta.unwrap_or(d.step_size),
                tol: p.eps.unwrap_or(d.tol),
                max_iter: p.steps.unwrap_or(d.max_iter),
                backtracking: p.backtrack.unwrap_or(d.backtracking),
                seed,
                ..d
            };
            echo("rank", rank.to_string());
            echo("steps", ep.max_iter.to_string());
            echo("rounds", rounds.to_string());
            echo("eta", ep.step_size.to_string());
            echo("eps", ep.tol.to_string());
            echo("backtrack", ep.backtracking.to_string());
            let clock = Instant::now();
            let f0 = FactorMatrix::random(n, rank, rng::derive_seed(seed, tag::INIT))?;
            let r = exact_dem(inst, f0, &ep)?;
            let rounding = gw_round(
                inst,
                &r.factor,
                rounds,
                rng::derive_seed(seed, tag::ROUNDING),
            )?;
            let wall_time = clock.elapsed().as_secs_f64();
            echo("stop", format!("{:?}", r.stop).to_lowercase());
            let expected = phi(inst, &r.factor)?;
            let trace = Trace {
                label: "phi",
                points: r
                    .trace
                    .records()
                    .iter()
                    .map(|t| (t.iteration, t.phi))
                    .collect(),
            };
            RunOutcome {
                value: inst.evaluate(&rounding.best_x)?,
                x: rounding.best_x.clone(),
                expected: Some(expected),
                factor: Some(r.factor),
                trial_values: Some(rounding.trial_values),
                wall_time,
                params: BTreeMap::new(),
                trace,
            }
        }
        Method::Sa => {
            let sp =
                SaParams::for_instance(inst, positive("steps", p.steps.unwrap_or(1000))?, seed);
            echo("steps", sp.sweeps.to_string());
            echo("t0", sp.t0.to_string());
            echo("alpha", sp.alpha.to_string());
            let clock = Instant::now();
            let (x, value, t) = simulated_annealing(inst, &sp)?;
            baseline(x, value, clock, Trace::from_values("best", &t.best_values))
        }
        Method::Tabu => {
            let tp = TabuParams::for_instance(inst, p.steps.unwrap_or(1000), seed);
            echo("steps", tp.iterations.to_string());
            echo("tenure", tp.tenure.to_string());
            let clock = Instant::now();
            let (x, value, t) = tabu_search(inst, &tp)?;
            baseline(x, value, clock, Trace::from_values("best", &t.best_values))
        }
        Method::Sb => {
            let sp = SbParams {
                steps: positive("steps", p.steps.unwrap_or(1000))?,
                dt: p.eta,
                seed,
                ..SbParams::default()
            };
            echo("steps", sp.steps.to_string());
            let clock = Instant::now();
            let (x, value, t) = simulated_bifurcation(inst, &sp)?;
            let out = baseline(x, value, clock, Trace::from_values("best", &t.best_values));
            echo("dt", t.dt.to_string());
            echo("gamma", t.gamma.to_string());
            out
        }
        Method::Burer2 => {
            let restarts = positive("rounds", p.rounds.unwrap_or(10))?;
            echo("rounds", restarts.to_string());
            let clock = Instant::now();
            let (x, value, t) = burer2(inst, restarts, seed)?;
            baseline(x, value, clock, Trace::from_values("best", &t.best_values))
        }
        Method::GwSdpSurrogate => {
            let rank = p.rank.map(|r| check_rank(r, n)).transpose()?;
            let steps = p.steps.unwrap_or(1000);
            let rounds = positive("rounds", p.rounds.unwrap_or(100))?;
            let clock = Instant::now();
            let (x, value, t) = gw_sdp_surrogate(inst, rank, steps, rounds, seed)?;
            let wall_time = clock.elapsed().as_secs_f64();
            echo("rank", t.rank.to_string());
            echo("steps", steps.to_string());
            echo("rounds", rounds.to_string());
            let expected = phi(inst, &t.factor)?;
            RunOutcome {
                x,
                value,
                expected: Some(expected),
                factor: Some(t.factor),
                trial_values: Some(t.rounding.trial_values),
                wall_time,
                params: BTreeMap::new(),
                trace: Trace::from_values("relaxation", &t.relaxation_values),
            }
        }
    };
    Ok(RunOutcome { params, ..out })
}

fn baseline(x: SignVector, value: f64, clock: Instant, trace: Trace) -> RunOutcome {
    RunOutcome {
        x,
        value,
        expected: None,
        factor: None,
        trial_values: None,
        wall_time: clock.elapsed().as_secs_f64(),
        params: BTreeMap::new(),
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
        assert_eq!("nope".parse::<Method>().unwrap_err().exit_code(), 2);
    }

    #[test]
    fn params_merge_and_parse() {
        let mut a = MethodParams::default();
        a.set("rank", "3").unwrap();
        a.set("backtrack", "true").unwrap();
        let base = MethodParams {
            rank: Some(7),
            steps: Some(9),
            ..MethodParams::default()
        };
        let m = a.or(&base);
        assert_eq!(
            (m.rank, m.steps, m.backtrack),
            (Some(3), Some(9), Some(true))
        );
        assert!(a.set("rank", "x").is_err());
        assert!(a.set("colour", "1").is_err());
    }
}
