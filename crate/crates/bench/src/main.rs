use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qubo_bench::distribution::distribution;
use qubo_bench::report::append_jsonl;
use qubo_bench::sweep::{rank_sweep, sweep_csv_string};
use qubo_bench::{
    run, run_bench, BenchConfig, BenchError, InstanceSource, Method, MethodParams, Result,
    SolverReport,
};
use qubo_dem::io::format_instance;

/// Benchmark harness for QUBO solvers built on expected GW rounding.
#[derive(Parser)]
#[command(name = "qubo-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file from a generator.
    Gen {
        /// random:N[:SEED], maxcut:PATH or subset-sum:W1,W2,...
        source: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one method on one instance and print a JSON report.
    Solve {
        /// Instance file or generator.
        instance: String,
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        params: ParamFlags,
        /// Append the report to this JSON-lines file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the convergence trace to this file.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run every (instance, method, seed) cell of a config file.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        params: ParamFlags,
        /// Output directory; overrides the config's `out`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Expected value and best rounding of the descent methods per rank.
    RankSweep {
        instance: String,
        /// Comma-separated ranks.
        #[arg(long, value_delimiter = ',', required = true)]
        rank: Vec<usize>,
        /// Comma-separated methods; dem-rc and dem-exact by default.
        #[arg(long, value_delimiter = ',')]
        method: Vec<String>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',', default_value = "0")]
        seed: Vec<u64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        rounds: Option<usize>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        /// CSV output; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-trial rounded values of a factor-based method.
    Distribution {
        instance: String,
        #[arg(long)]
        method: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        params: ParamFlags,
        /// Directory for trials.csv, histogram.csv and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Default)]
struct ParamFlags {
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    /// Step halving for dem-exact.
    #[arg(long)]
    backtrack: bool,
}

impl ParamFlags {
    fn to_params(&self) -> MethodParams {
        MethodParams {
            rank: self.rank,
            steps: self.steps,
            rounds: self.rounds,
            eta: self.eta,
            eps: self.eps,
            backtrack: self.backtrack.then_some(true),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qubo-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Gen { source, seed, out } => {
            let inst = source.parse::<InstanceSource>()?.load(seed)?;
            let text = format_instance(&inst);
            match out {
                Some(path) => std::fs::write(&path, text)
                    .map_err(|e| BenchError::Input(format!("{}: {e}", path.display())))?,
                None => print!("{text}"),
            }
        }
        Command::Solve {
            instance,
            method,
            seed,
            params,
            out,
            trace,
        } => {
            let method: Method = method.parse()?;
            let inst = instance
                .parse::<InstanceSource>()?
                .load_plus_minus_one(seed)?;
            let outcome = run(method, &inst, &params.to_params(), seed)?;
            let trace_ref = match trace {
                Some(path) => {
                    std::fs::write(&path, outcome.trace.to_text())?;
                    Some(path.display().to_string())
                }
                None => None,
            };
            let report = SolverReport::new(method, &inst, seed, &outcome, trace_ref);
            println!("{}", report.to_json()?);
            if let Some(path) = out {
                append_jsonl(&path, &[report])?;
            }
        }
        Command::Bench {
            config,
            params,
            out,
        } => {
            let mut cfg = BenchConfig::read(&config)?;
            cfg.override_params(&params.to_params());
            if let Some(out) = out {
                cfg.out = out;
            }
            let results = run_bench(&cfg)?;
            let failed = results.rows.iter().filter(|r| r.status != "ok").count();
            eprintln!(
                "{} rows written to {} ({failed} failed)",
                results.rows.len(),
                cfg.out.join("results.csv").display()
            );
        }
        Command::RankSweep {
            instance,
            rank,
            method,
            seed,
            steps,
            rounds,
            eta,
            eps,
            out,
        } => {
            let methods: Vec<Method> = if method.is_empty() {
                vec![Method::DemRc, Method::DemExact]
            } else {
                method.iter().map(|m| m.parse()).collect::<Result<_>>()?
            };
            let first_seed = seed.first().copied().unwrap_or(0);
            let inst = instance
                .parse::<InstanceSource>()?
                .load_plus_minus_one(first_seed)?;
            let params = MethodParams {
                steps,
                rounds,
                eta,
                eps,
                ..MethodParams::default()
            };
            let rows = rank_sweep(&inst, &methods, &rank, &seed, &params)?;
            let text = sweep_csv_string(&rows)?;
            match out {
                Some(path) => std::fs::write(&path, text)?,
                None => print!("{text}"),
            }
        }
        Command::Distribution {
            instance,
            method,
            trials,
            bins,
            seed,
            params,
            out,
        } => {
            let method: Method = method.parse()?;
            let inst = instance
                .parse::<InstanceSource>()?
                .load_plus_minus_one(seed)?;
            let d = distribution(&inst, method, &params.to_params(), seed, trials, bins)?;
            if let Some(dir) = out {
                d.write(&dir)?;
            }
            println!("{}", serde_json::to_string(&d.summary)?);
        }
    }
    Ok(())
}
