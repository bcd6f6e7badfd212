use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{exact_optimum, matches_optimum};
use crate::dual::{
    hybrid_solve, incremental_solve, modified_newtonian_solve, newtonian_solve, DualTrace,
    SchedulerConfig, Termination,
};
use crate::error::{Error, Result};
use crate::model::GqssInstance;
use crate::oracle::{best_feasible, derive_seed, Oracle, OracleKind, Sense, DEFAULT_EXACT_CAP};
use crate::penalty::{build_penalized, build_penalized_matrix, matrix_bound, scalar_bound};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "prop1")]
    Prop1,
    #[serde(rename = "prop2")]
    Prop2,
    #[serde(rename = "new")]
    Newtonian,
    #[serde(rename = "m-new")]
    ModifiedNewtonian,
    #[serde(rename = "incr")]
    Incremental,
    #[serde(rename = "hyb")]
    Hybrid,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Prop1,
        Method::Prop2,
        Method::Newtonian,
        Method::ModifiedNewtonian,
        Method::Incremental,
        Method::Hybrid,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Prop1 => "prop1",
            Method::Prop2 => "prop2",
            Method::Newtonian => "new",
            Method::ModifiedNewtonian => "m-new",
            Method::Incremental => "incr",
            Method::Hybrid => "hyb",
        }
    }

    pub fn is_iterative(self) -> bool {
        !matches!(self, Method::Prop1 | Method::Prop2)
    }

    fn index(self) -> u64 {
        Method::ALL.iter().position(|&m| m == self).unwrap() as u64
    }

    /// Parses a comma-separated list such as `prop1,hyb`.
    pub fn parse_list(s: &str) -> Result<Vec<Method>> {
        let methods = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if methods.is_empty() {
            return Err(Error::InvalidParameter("no methods given".into()));
        }
        Ok(methods)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// Per-method settings; the defaults are the published ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub seed: u64,
    /// Penalty-method reads when no iterative method runs on the instance.
    pub prop_reads: u64,
    pub exact_cap: usize,
    pub newtonian: SchedulerConfig,
    pub incremental: SchedulerConfig,
    pub hybrid: SchedulerConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            prop_reads: 1000,
            exact_cap: DEFAULT_EXACT_CAP,
            newtonian: SchedulerConfig::default(),
            incremental: SchedulerConfig::incremental(),
            hybrid: SchedulerConfig::hybrid(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    /// Last multiplier used (the largest entry of the penalty matrix for prop2).
    pub lambda_final: f64,
    /// Multiplier at which the best feasible solution was observed.
    pub lambda_at_best: Option<f64>,
    /// Smallest nonzero penalty-matrix entry (prop2 only).
    pub lambda_low: Option<f64>,
    /// Best feasible objective; `None` when nothing feasible was sampled.
    pub obj: Option<f64>,
    pub optimal: bool,
    pub cnt: u64,
    pub terminated_by: Option<Termination>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub instance_id: String,
    pub n: usize,
    pub opt: f64,
    pub methods: Vec<MethodOutcome>,
}

impl BenchmarkRow {
    pub fn outcome(&self, method: Method) -> Option<&MethodOutcome> {
        self.methods.iter().find(|m| m.method == method)
    }
}

fn iterative_outcome(method: Method, trace: &DualTrace, opt: f64) -> MethodOutcome {
    let obj = trace.best_value();
    MethodOutcome {
        method,
        lambda_final: trace.lambda_final().unwrap_or(0.0),
        lambda_at_best: trace.lambda_at_best(),
        lambda_low: None,
        obj,
        optimal: obj.is_some_and(|v| matches_optimum(v, opt)),
        cnt: trace.total_reads,
        terminated_by: Some(trace.terminated_by),
    }
}

fn run_iterative(
    method: Method,
    inst: &GqssInstance,
    oracle: &OracleKind,
    cfg: &BenchConfig,
    opt: f64,
) -> Result<(MethodOutcome, DualTrace)> {
    let trace = match method {
        Method::Newtonian => newtonian_solve(inst, oracle, &cfg.newtonian)?,
        Method::ModifiedNewtonian => modified_newtonian_solve(inst, oracle, &cfg.newtonian)?,
        Method::Incremental => incremental_solve(inst, oracle, &cfg.incremental)?,
        Method::Hybrid => hybrid_solve(inst, oracle, &cfg.hybrid)?,
        Method::Prop1 | Method::Prop2 => unreachable!("penalty methods are not iterative"),
    };
    Ok((iterative_outcome(method, &trace, opt), trace))
}

fn run_penalty(
    method: Method,
    inst: &GqssInstance,
    oracle: &OracleKind,
    reads: u64,
    opt: f64,
) -> Result<MethodOutcome> {
    let oracle = oracle.with_reads(reads);
    let (f, lambda_final, lambda_low) = match method {
        Method::Prop1 => {
            let lambda = scalar_bound(inst).lambda_used();
            (build_penalized(inst, lambda)?, lambda, None)
        }
        Method::Prop2 => {
            let m = matrix_bound(inst);
            (
                build_penalized_matrix(inst, &m)?,
                m.max_entry(),
                Some(m.min_nonzero().unwrap_or(0.0)),
            )
        }
        _ => unreachable!("iterative methods are not penalty methods"),
    };
    let r = oracle.solve(&f, Sense::Max, 0)?;
    let best = best_feasible(std::slice::from_ref(&r), inst)?;
    let obj = best.map(|(_, v)| v);
    Ok(MethodOutcome {
        method,
        lambda_final,
        lambda_at_best: obj.map(|_| lambda_final),
        lambda_low,
        obj,
        optimal: obj.is_some_and(|v| matches_optimum(v, opt)),
        cnt: r.reads,
        terminated_by: None,
    })
}

/// Runs every requested method on every instance. Each (instance, method)
/// pair gets its own oracle seed, so results do not depend on scheduling.
///
/// Penalty methods run after the iterative ones and receive one read more
/// than the largest iterative read count on the same instance.
pub fn run_benchmark(
    instances: &[(String, GqssInstance)],
    methods: &[Method],
    oracle: &OracleKind,
    cfg: &BenchConfig,
) -> Result<Vec<BenchmarkRow>> {
    run_benchmark_traced(instances, methods, oracle, cfg).map(|(rows, _)| rows)
}

/// Trace of one iterative run, tagged with its instance index.
pub type IterativeTrace = (usize, Method, DualTrace);

/// [`run_benchmark`] that also returns the trace of every iterative run,
/// tagged with the instance index, in (instance, method) order.
pub fn run_benchmark_traced(
    instances: &[(String, GqssInstance)],
    methods: &[Method],
    oracle: &OracleKind,
    cfg: &BenchConfig,
) -> Result<(Vec<BenchmarkRow>, Vec<IterativeTrace>)> {
    if methods.is_empty() {
        return Err(Error::InvalidParameter("no methods given".into()));
    }
    let opts: Vec<f64> = instances
        .par_iter()
        .map(|(_, inst)| exact_optimum(inst, cfg.exact_cap).map(|(_, v)| v))
        .collect::<Result<_>>()?;
    let seeded = |i: usize, m: Method| oracle.with_seed(derive_seed(cfg.seed, i as u64, m.index()));

    let iterative: Vec<(usize, Method)> = (0..instances.len())
        .flat_map(|i| {
            methods
                .iter()
                .filter(|m| m.is_iterative())
                .map(move |&m| (i, m))
        })
        .collect();
    let (iter_out, traces): (Vec<MethodOutcome>, Vec<DualTrace>) = iterative
        .par_iter()
        .map(|&(i, m)| run_iterative(m, &instances[i].1, &seeded(i, m), cfg, opts[i]))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();

    let penalty: Vec<(usize, Method)> = (0..instances.len())
        .flat_map(|i| {
            methods
                .iter()
                .filter(|m| !m.is_iterative())
                .map(move |&m| (i, m))
        })
        .collect();
    let max_cnt = |i: usize| {
        iterative
            .iter()
            .zip(&iter_out)
            .filter(|((j, _), _)| *j == i)
            .map(|(_, o)| o.cnt)
            .max()
    };
    let pen_out: Vec<MethodOutcome> = penalty
        .par_iter()
        .map(|&(i, m)| {
            let reads = max_cnt(i).map_or(cfg.prop_reads, |c| c + 1);
            run_penalty(m, &instances[i].1, &seeded(i, m), reads, opts[i])
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<BenchmarkRow> = instances
        .iter()
        .zip(&opts)
        .map(|((id, inst), &opt)| BenchmarkRow {
            instance_id: id.clone(),
            n: inst.dim(),
            opt,
            methods: Vec::new(),
        })
        .collect();
    let mut all: Vec<(usize, MethodOutcome)> = iterative
        .iter()
        .map(|&(i, _)| i)
        .zip(iter_out)
        .chain(penalty.iter().map(|&(i, _)| i).zip(pen_out))
        .collect();
    all.sort_by_key(|(i, o)| (*i, methods.iter().position(|&m| m == o.method)));
    for (i, o) in all {
        rows[i].methods.push(o);
    }
    let traces = iterative
        .into_iter()
        .zip(traces)
        .map(|((i, m), t)| (i, m, t))
        .collect();
    Ok((rows, traces))
}
