use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use qubo_dual::bench::{
    export_table, generate_instance, lambda_sweep, run_benchmark, BenchConfig, GeneratorConfig,
    Method, TableFormat,
};
use qubo_dual::dual::{
    hybrid_solve, incremental_solve, modified_newtonian_solve, newtonian_solve, subgradient_solve,
    DualTrace, SchedulerConfig,
};
use qubo_dual::io::{load_instance, save_instance};
use qubo_dual::model::{CbqpInstance, GqssInstance};
use qubo_dual::oracle::{ExactSolver, OracleKind, SaParams, SqaParams};
use qubo_dual::penalty::{matrix_bound, scalar_bound};
use qubo_dual::{Error, Result};

#[derive(Parser)]
#[command(
    name = "qubo-dual",
    version,
    about = "Lagrangian-dual solvers for binary quadratic programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleChoice {
    Exact,
    Sa,
    Sqa,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolveMethod {
    New,
    MNew,
    Incr,
    Hyb,
    Subgradient,
}

#[derive(Subcommand)]
enum Command {
    /// Generate seeded random stable set instances.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0.4)]
        density: f64,
    },
    /// Print the scalar and matrix penalty bounds of an instance.
    Bound {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Run one dual scheme on an instance.
    Solve {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_enum)]
        method: SolveMethod,
        #[arg(long, value_enum, default_value = "exact")]
        oracle: OracleChoice,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the iteration trace as JSON lines.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Count optimal reads over a grid of penalty coefficients.
    Sweep {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        #[arg(long, default_value_t = 1000)]
        reads: u64,
        #[arg(long, value_enum, default_value = "sa")]
        oracle: OracleChoice,
        #[arg(long)]
        config: Option<PathBuf>,
        /// CSV destination; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare methods over a directory of instances.
    Bench {
        #[arg(long)]
        instances: PathBuf,
        #[arg(long, default_value = "prop1,prop2,new,m-new,incr,hyb")]
        methods: String,
        #[arg(long, value_enum, default_value = "sa")]
        oracle: OracleChoice,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output table; the extension selects csv, json or md.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct Config {
    exact: ExactSolver,
    sa: SaParams,
    sqa: SqaParams,
    scheduler: Option<SchedulerConfig>,
    bench: BenchConfig,
}

fn load_config(path: Option<&Path>) -> Result<Config> {
    match path {
        Some(p) => Ok(serde_json::from_str(&fs::read_to_string(p)?)?),
        None => Ok(Config::default()),
    }
}

fn oracle(choice: OracleChoice, cfg: &Config, seed: Option<u64>) -> Result<OracleKind> {
    let kind = match choice {
        OracleChoice::Exact => OracleKind::Exact(cfg.exact.clone()),
        OracleChoice::Sa => {
            cfg.sa.validate()?;
            OracleKind::Sa(cfg.sa.clone())
        }
        OracleChoice::Sqa => {
            cfg.sqa.validate()?;
            OracleKind::Sqa(cfg.sqa.clone())
        }
    };
    Ok(match seed {
        Some(s) => kind.with_seed(s),
        None => kind,
    })
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn gen(n: usize, seed: u64, count: u64, out: &Path, density: f64) -> Result<()> {
    fs::create_dir_all(out)?;
    for s in seed..seed + count {
        let cfg = GeneratorConfig {
            a_density: density,
            ..GeneratorConfig::new(n, s)
        };
        let inst = generate_instance(&cfg)?;
        let path = out.join(format!("n{n}_s{s}.json"));
        save_instance(&path, &inst, Some(s))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn bound(path: &Path) -> Result<()> {
    let inst = load_instance(path)?;
    let b = scalar_bound(&inst);
    let m = matrix_bound(&inst);
    print_json(&json!({
        "n": inst.dim(),
        "lambda_tilde": b.lambda_tilde,
        "lambda_used": b.lambda_used(),
        "epsilon_policy": b.epsilon_policy,
        "per_vertex": b.per_vertex,
        "matrix_min": m.min_nonzero(),
        "matrix_max": m.max_entry(),
        "fixed": inst.fixed(),
    }))
}

fn run_method(
    method: SolveMethod,
    inst: &GqssInstance,
    oracle: &OracleKind,
    cfg: &Config,
) -> Result<DualTrace> {
    let default = match method {
        SolveMethod::Hyb => SchedulerConfig::hybrid(),
        _ => SchedulerConfig::default(),
    };
    let sched = cfg.scheduler.clone().unwrap_or(default);
    match method {
        SolveMethod::New => newtonian_solve(inst, oracle, &sched),
        SolveMethod::MNew => modified_newtonian_solve(inst, oracle, &sched),
        SolveMethod::Incr => incremental_solve(inst, oracle, &sched),
        SolveMethod::Hyb => hybrid_solve(inst, oracle, &sched),
        SolveMethod::Subgradient => {
            subgradient_solve(&CbqpInstance::from_gqss(inst), oracle, &sched)
        }
    }
}

fn solve(
    path: &Path,
    method: SolveMethod,
    choice: OracleChoice,
    config: Option<&Path>,
    trace_out: Option<&Path>,
    seed: Option<u64>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let inst = load_instance(path)?;
    let oracle = oracle(choice, &cfg, seed)?;
    let trace = run_method(method, &inst, &oracle, &cfg)?;
    if let Some(p) = trace_out {
        let mut w = BufWriter::new(fs::File::create(p)?);
        trace.write_jsonl(&mut w)?;
        w.flush()?;
    }
    print_json(&json!({
        "method": trace.method,
        "iterations": trace.records.len(),
        "terminated_by": trace.terminated_by,
        "total_reads": trace.total_reads,
        "lambda_final": trace.lambda_final(),
        "best": trace.best_feasible,
    }))
}

fn sweep(
    path: &Path,
    steps: usize,
    reads: u64,
    choice: OracleChoice,
    config: Option<&Path>,
    out: Option<&Path>,
    seed: Option<u64>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let inst = load_instance(path)?;
    let oracle = oracle(choice, &cfg, seed)?;
    let s = lambda_sweep(&inst, &oracle, steps, reads, cfg.exact.cap)?;
    let write = |w: &mut dyn Write| -> Result<()> {
        let mut csv = String::from("lambda,success_count,reads\n");
        for p in &s.points {
            csv.push_str(&format!("{},{},{}\n", p.lambda, p.success_count, p.reads));
        }
        w.write_all(csv.as_bytes())?;
        Ok(())
    };
    let meta = json!({
        "lambda_tilde": s.lambda_tilde,
        "optimum": s.optimum,
        "threshold": s.threshold(),
    });
    match out {
        Some(p) => {
            write(&mut fs::File::create(p)?)?;
            print_json(&meta)
        }
        None => {
            write(&mut io::stdout().lock())?;
            eprintln!("{meta}");
            Ok(())
        }
    }
}

fn bench(
    dir: &Path,
    methods: &str,
    choice: OracleChoice,
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
) -> Result<()> {
    let cfg = load_config(config)?;
    let methods = Method::parse_list(methods)?;
    let format =
        TableFormat::from_extension(out.extension().and_then(|e| e.to_str()).unwrap_or(""))?;
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
    paths.sort();
    if paths.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "no .json instances in {}",
            dir.display()
        )));
    }
    let instances = paths
        .iter()
        .map(|p| {
            let id = p
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            load_instance(p).map(|inst| (id, inst))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut bench_cfg = cfg.bench.clone();
    if let Some(s) = seed {
        bench_cfg.seed = s;
    }
    let oracle = oracle(choice, &cfg, None)?;
    let rows = run_benchmark(&instances, &methods, &oracle, &bench_cfg)?;
    fs::write(out, export_table(&rows, format)?)?;
    println!("{} rows written to {}", rows.len(), out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen {
            n,
            seed,
            count,
            out,
            density,
        } => gen(n, seed, count, &out, density),
        Command::Bound { instance } => bound(&instance),
        Command::Solve {
            instance,
            method,
            oracle,
            config,
            trace,
            seed,
        } => solve(
            &instance,
            method,
            oracle,
            config.as_deref(),
            trace.as_deref(),
            seed,
        ),
        Command::Sweep {
            instance,
            steps,
            reads,
            oracle,
            config,
            out,
            seed,
        } => sweep(
            &instance,
            steps,
            reads,
            oracle,
            config.as_deref(),
            out.as_deref(),
            seed,
        ),
        Command::Bench {
            instances,
            methods,
            oracle,
            config,
            out,
            seed,
        } => bench(&instances, &methods, oracle, config.as_deref(), &out, seed),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::CapExceeded { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}
