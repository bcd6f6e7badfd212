//! Scalar-multiplier schemes for the stable set dual
//! `min_{λ >= 0} max_x x^T W x - λ x^T A x`.
//!
//! Since `x^T A x >= 0`, the negative subgradient always points towards
//! larger `λ`, so every scheme only ever increases the multiplier. They
//! differ in how far each step goes:
//!
//! * Newtonian: jump to the root of the last iterate's cut, `W(x) / A(x)`.
//! * Modified Newtonian: root of that cut against the best feasible value.
//! * Incremental: fixed (or geometrically shrinking) steps, collecting a
//!   target number of feasible iterates.
//! * Hybrid: subgradient-proportional steps `α δ` until the first feasible
//!   iterate, then incremental.

use super::{
    BestFeasible, DualIterationRecord, DualTrace, MultiplierSnapshot, SchedulerConfig, Termination,
};
use crate::error::Result;
use crate::model::{eval_gqss, BitVector, GqssInstance};
use crate::oracle::{Oracle, Sense};
use crate::penalty::build_penalized;

/// Zeroes the set variable with the largest conflict contribution
/// `2 sum_j A_ij x_j` (smallest index on ties) until `x^T A x = 0`.
pub fn greedy_repair(x: &BitVector, inst: &GqssInstance) -> BitVector {
    let a = inst.a();
    let mut x = x.clone();
    loop {
        let mut pick: Option<(usize, f64)> = None;
        for i in x.ones() {
            let contribution: f64 = 2.0
                * x.ones()
                    .filter(|&j| j != i)
                    .map(|j| a.get(i, j))
                    .sum::<f64>();
            if contribution > 0.0 && pick.is_none_or(|(_, c)| contribution > c) {
                pick = Some((i, contribution));
            }
        }
        match pick {
            Some((i, _)) => x.set(i, false),
            None => return x,
        }
    }
}

/// Outcome of one relaxation solve, evaluated on the original problem.
struct Iterate {
    x: BitVector,
    w: f64,
    a: f64,
    feasible: bool,
    relaxation: f64,
}

/// Shared bookkeeping: oracle calls, records, best feasible point.
struct Run<'a> {
    inst: &'a GqssInstance,
    oracle: &'a dyn Oracle,
    method: &'static str,
    records: Vec<DualIterationRecord>,
    best: Option<BestFeasible>,
    total_reads: u64,
}

impl<'a> Run<'a> {
    fn new(inst: &'a GqssInstance, oracle: &'a dyn Oracle, method: &'static str) -> Self {
        Self {
            inst,
            oracle,
            method,
            records: Vec::new(),
            best: None,
            total_reads: 0,
        }
    }

    fn iterations(&self) -> usize {
        self.records.len()
    }

    fn offer(&mut self, x: &BitVector, value: f64, lambda: f64, k: usize) {
        let better = match &self.best {
            None => true,
            Some(b) => value > b.value,
        };
        if better {
            self.best = Some(BestFeasible {
                x: x.clone(),
                value,
                lambda: Some(lambda),
                k,
            });
        }
    }

    fn solve_at(&mut self, lambda: f64, step: f64) -> Result<Iterate> {
        let k = self.records.len();
        let f = build_penalized(self.inst, lambda)?;
        let r = self.oracle.solve(&f, Sense::Max, k as u64)?;
        self.total_reads += r.reads;
        for s in &r.samples {
            let x = self.inst.restore(&s.x);
            let e = eval_gqss(self.inst, &x)?;
            if e.feasible {
                self.offer(&x, e.objective_value, lambda, k);
            }
        }
        let x = self.inst.restore(r.best_x());
        let e = eval_gqss(self.inst, &x)?;
        self.records.push(DualIterationRecord {
            k,
            multipliers: MultiplierSnapshot::Scalar(lambda),
            x: x.clone(),
            relaxation_value: r.best_value(),
            primal_value: e.objective_value,
            violation: e.violation,
            feasible: e.feasible,
            reads_used: r.reads,
            step_size: step,
        });
        Ok(Iterate {
            x,
            w: e.objective_value,
            a: e.violation,
            feasible: e.feasible,
            relaxation: r.best_value(),
        })
    }

    fn finish(self, terminated_by: Termination) -> DualTrace {
        DualTrace {
            method: self.method.to_string(),
            records: self.records,
            best_feasible: self.best,
            terminated_by,
            total_reads: self.total_reads,
        }
    }
}

/// `λ^{k+1} = (W(x^k) - offset) / A(x^k)` from `λ^0 = 0` until an iterate is
/// feasible. A drop below the current multiplier (possible only with a
/// non-exact oracle) is clamped.
pub fn newtonian_solve(
    inst: &GqssInstance,
    oracle: &dyn Oracle,
    cfg: &SchedulerConfig,
) -> Result<DualTrace> {
    newton_like(inst, oracle, cfg, false)
}

/// Newtonian variant whose numerator subtracts the best feasible value seen
/// so far; every iterate is greedily repaired to feed that value.
pub fn modified_newtonian_solve(
    inst: &GqssInstance,
    oracle: &dyn Oracle,
    cfg: &SchedulerConfig,
) -> Result<DualTrace> {
    newton_like(inst, oracle, cfg, true)
}

fn newton_like(
    inst: &GqssInstance,
    oracle: &dyn Oracle,
    cfg: &SchedulerConfig,
    modified: bool,
) -> Result<DualTrace> {
    cfg.validate()?;
    let mut run = Run::new(inst, oracle, if modified { "m-new" } else { "new" });
    let mut lambda = 0.0;
    let mut it = run.solve_at(lambda, 0.0)?;
    loop {
        if modified {
            let repaired = greedy_repair(&it.x, inst);
            let value = inst.w().form(&repaired);
            run.offer(&repaired, value, lambda, run.iterations() - 1);
        }
        if it.feasible {
            return Ok(run.finish(Termination::ZeroSubgradient));
        }
        if run.iterations() >= cfg.max_iterations {
            return Ok(run.finish(Termination::MaxIterations));
        }
        let offset = if modified {
            run.best.as_ref().map_or(0.0, |b| b.value)
        } else {
            0.0
        };
        let proposed = (it.w - offset) / it.a;
        if proposed <= lambda && oracle.is_exact() {
            // The exact relaxation value can no longer exceed the best
            // feasible value: the dual optimum has been reached.
            if let Some(b) = &run.best {
                if it.relaxation <= b.value + 1e-9 * b.value.abs().max(1.0) {
                    return Ok(run.finish(Termination::DualityGapClosed));
                }
            }
        }
        let next = proposed.max(lambda);
        let step = next - lambda;
        lambda = next;
        it = run.solve_at(lambda, step)?;
    }
}

/// `λ^k = λ^{k-1} + s`, `s <- δ s`, counting feasible iterates until
/// `feas_cnt` have been seen. Starts from `cfg.lambda_start`.
pub fn incremental_solve(
    inst: &GqssInstance,
    oracle: &dyn Oracle,
    cfg: &SchedulerConfig,
) -> Result<DualTrace> {
    cfg.validate()?;
    let mut run = Run::new(inst, oracle, "incr");
    let term = incremental_phase(&mut run, cfg.lambda_start, cfg.s_lambda, cfg.delta, cfg, 0)?;
    Ok(run.finish(term))
}

fn incremental_phase(
    run: &mut Run<'_>,
    start: f64,
    step: f64,
    delta: f64,
    cfg: &SchedulerConfig,
    mut count: usize,
) -> Result<Termination> {
    let mut lambda = start;
    let mut step = step;
    loop {
        if count >= cfg.feas_cnt {
            return Ok(Termination::FeasibleCount);
        }
        if run.iterations() >= cfg.max_iterations {
            return Ok(Termination::MaxIterations);
        }
        lambda += step;
        let taken = step;
        step *= delta;
        if run.solve_at(lambda, taken)?.feasible {
            count += 1;
        }
    }
}

/// Steps `λ^{k+1} = λ^k + α δ^k` with `δ^k = x^T A x` and
/// `α = max(W(x^0) / A(x^0)^2, floor)` until the first feasible iterate, then
/// incremental steps of `s_lambda` (that first hit counts toward `feas_cnt`).
pub fn hybrid_solve(
    inst: &GqssInstance,
    oracle: &dyn Oracle,
    cfg: &SchedulerConfig,
) -> Result<DualTrace> {
    cfg.validate()?;
    let mut run = Run::new(inst, oracle, "hyb");
    let mut lambda = 0.0;
    let mut it = run.solve_at(lambda, 0.0)?;
    let alpha = if it.a > 0.0 {
        (it.w / (it.a * it.a)).max(cfg.alpha_tilde_floor)
    } else {
        cfg.alpha_tilde_floor
    };
    while !it.feasible {
        if run.iterations() >= cfg.max_iterations {
            return Ok(run.finish(Termination::MaxIterations));
        }
        let step = alpha * it.a;
        lambda += step;
        it = run.solve_at(lambda, step)?;
    }
    let term = incremental_phase(&mut run, lambda, cfg.s_lambda, 1.0, cfg, 1)?;
    Ok(run.finish(term))
}
