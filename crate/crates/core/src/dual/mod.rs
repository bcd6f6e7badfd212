//! Lagrangian dual machinery.
//!
//! The general path maximizes `f + λ^T g + μ^T h` with `μ <= 0` and runs a
//! projected subgradient method on the dual function `d(λ, μ)`. The stable
//! set schemes work with the non-negative scalar `λ` of
//! `min_{λ >= 0} max_x x^T W x - λ x^T A x`; the general path sees the same
//! problem as one inequality `x^T A x <= 0` with `μ = -λ`.

mod gqss;
mod subgradient;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BitVector, CbqpInstance, QuadraticFunction};

pub use gqss::{
    greedy_repair, hybrid_solve, incremental_solve, modified_newtonian_solve, newtonian_solve,
};
pub use subgradient::subgradient_solve;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Multipliers {
    /// One per equality constraint.
    pub lambda: Vec<f64>,
    /// One per inequality constraint; never positive.
    pub mu: Vec<f64>,
}

impl Multipliers {
    pub fn zeros(m: usize, p: usize) -> Self {
        Self {
            lambda: vec![0.0; m],
            mu: vec![0.0; p],
        }
    }

    pub fn new(lambda: Vec<f64>, mu: Vec<f64>) -> Result<Self> {
        if let Some(v) = mu.iter().find(|&&v| v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inequality multiplier {v} must be non-positive"
            )));
        }
        Ok(Self { lambda, mu })
    }
}

/// Multiplier state recorded with an iteration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MultiplierSnapshot {
    Scalar(f64),
    Vector(Multipliers),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualIterationRecord {
    pub k: usize,
    pub multipliers: MultiplierSnapshot,
    pub x: BitVector,
    /// Oracle estimate of `d` at these multipliers (exact with the exact oracle).
    pub relaxation_value: f64,
    pub primal_value: f64,
    /// `x^T A x` for stable set runs; constraint-violation norm otherwise.
    pub violation: f64,
    pub feasible: bool,
    pub reads_used: u64,
    /// Step that produced these multipliers (zero for the first record).
    pub step_size: f64,
}

impl DualIterationRecord {
    pub fn lambda(&self) -> Option<f64> {
        match self.multipliers {
            MultiplierSnapshot::Scalar(l) => Some(l),
            MultiplierSnapshot::Vector(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    ZeroSubgradient,
    FeasibleCount,
    MaxIterations,
    /// Exact relaxation value met the best feasible value without a
    /// feasible iterate (ties broken towards an infeasible optimizer).
    DualityGapClosed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestFeasible {
    pub x: BitVector,
    pub value: f64,
    /// Multiplier at which it was observed (stable set runs).
    pub lambda: Option<f64>,
    pub k: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualTrace {
    pub method: String,
    pub records: Vec<DualIterationRecord>,
    pub best_feasible: Option<BestFeasible>,
    pub terminated_by: Termination,
    pub total_reads: u64,
}

impl DualTrace {
    pub fn best_value(&self) -> Option<f64> {
        self.best_feasible.as_ref().map(|b| b.value)
    }

    /// Scalar multiplier of the last record.
    pub fn lambda_final(&self) -> Option<f64> {
        self.records.last().and_then(DualIterationRecord::lambda)
    }

    pub fn lambda_at_best(&self) -> Option<f64> {
        self.best_feasible.as_ref().and_then(|b| b.lambda)
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.records
            .iter()
            .filter_map(DualIterationRecord::lambda)
            .collect()
    }

    /// Scalar multiplier of the first feasible iterate.
    pub fn first_feasible_lambda(&self) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.feasible)
            .and_then(DualIterationRecord::lambda)
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, &TraceLine::Iteration(r.clone()))?;
            out.write_all(b"\n")?;
        }
        let footer = TraceFooter {
            method: self.method.clone(),
            best_feasible: self.best_feasible.clone(),
            terminated_by: self.terminated_by,
            total_reads: self.total_reads,
        };
        serde_json::to_writer(&mut out, &TraceLine::Footer(footer))?;
        out.write_all(b"\n")?;
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self> {
        let mut records = Vec::new();
        let mut footer = None;
        for line in input.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<TraceLine>(&line)? {
                TraceLine::Iteration(r) => records.push(r),
                TraceLine::Footer(f) => footer = Some(f),
            }
        }
        let f = footer.ok_or_else(|| Error::InvalidParameter("trace has no footer line".into()))?;
        Ok(Self {
            method: f.method,
            records,
            best_feasible: f.best_feasible,
            terminated_by: f.terminated_by,
            total_reads: f.total_reads,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFooter {
    pub method: String,
    pub best_feasible: Option<BestFeasible>,
    pub terminated_by: Termination,
    pub total_reads: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum TraceLine {
    Iteration(DualIterationRecord),
    Footer(TraceFooter),
}

/// Step-size and termination settings shared by all schemes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SchedulerConfig {
    /// Initial step of the general subgradient method (`s0 / sqrt(k + 1)`).
    pub s0: f64,
    /// Geometric decay of the incremental step; `1` keeps it fixed.
    pub delta: f64,
    pub s_lambda: f64,
    pub feas_cnt: usize,
    /// Lower bound on the hybrid step scale.
    pub alpha_tilde_floor: f64,
    pub max_iterations: usize,
    /// Starting multiplier of the incremental method.
    pub lambda_start: f64,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        Self {
            s0: 1.0,
            delta: 1.0,
            s_lambda: 1.0,
            feas_cnt: 5,
            alpha_tilde_floor: 0.05,
            max_iterations: 200,
            lambda_start: 0.0,
        }
    }
}

impl SchedulerConfig {
    /// Incremental defaults: start at 0, unit fixed steps, five feasible hits.
    pub fn incremental() -> Self {
        Self::default()
    }

    /// Hybrid defaults: half-unit increments after the first feasible hit.
    pub fn hybrid() -> Self {
        Self {
            s_lambda: 0.5,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.feas_cnt == 0 {
            return Err(Error::InvalidParameter(
                "feas_cnt must be at least 1".into(),
            ));
        }
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "step decay {} must lie in (0, 1]",
                self.delta
            )));
        }
        if self.s_lambda.is_nan() || self.s_lambda <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step s_lambda {} must be positive",
                self.s_lambda
            )));
        }
        if self.s0.is_nan() || self.s0 <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "step s0 {} must be positive",
                self.s0
            )));
        }
        Ok(())
    }
}

/// `f + sum λ_i g_i + sum μ_j h_j` as a single quadratic function.
pub fn lagrangian_relaxation(inst: &CbqpInstance, mult: &Multipliers) -> Result<QuadraticFunction> {
    if mult.lambda.len() != inst.equalities().len() {
        return Err(Error::DimensionMismatch {
            expected: inst.equalities().len(),
            found: mult.lambda.len(),
        });
    }
    if mult.mu.len() != inst.inequalities().len() {
        return Err(Error::DimensionMismatch {
            expected: inst.inequalities().len(),
            found: mult.mu.len(),
        });
    }
    if let Some(v) = mult.mu.iter().find(|&&v| v > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "inequality multiplier {v} must be non-positive"
        )));
    }
    let mut f = inst.objective().clone();
    for (g, &l) in inst.equalities().iter().zip(&mult.lambda) {
        f = f.add_scaled(g, l)?;
    }
    for (h, &m) in inst.inequalities().iter().zip(&mult.mu) {
        f = f.add_scaled(h, m)?;
    }
    Ok(f)
}

/// Entrywise `min(0, μ_j)`.
pub fn project_negative(mu: &[f64]) -> Vec<f64> {
    mu.iter().map(|&v| v.min(0.0)).collect()
}

/// True when the trace's best feasible value equals the exhaustive optimum.
pub fn strong_duality_check(trace: &DualTrace, exact_opt: f64) -> bool {
    trace
        .best_value()
        .is_some_and(|v| (v - exact_opt).abs() <= 1e-9 * exact_opt.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GqssInstance;
    use crate::penalty::build_penalized;

    #[test]
    fn project_negative_examples() {
        assert_eq!(project_negative(&[1.0, -2.0]), vec![0.0, -2.0]);
        assert_eq!(project_negative(&[-1.0, -0.5]), vec![-1.0, -0.5]);
        assert_eq!(project_negative(&[0.0, 0.0]), vec![0.0, 0.0]);
    }

    #[test]
    fn zero_multipliers_leave_objective() {
        let inst = CbqpInstance::from_gqss(&GqssInstance::tightness_example(2.0));
        let f = lagrangian_relaxation(&inst, &Multipliers::zeros(0, 1)).unwrap();
        assert_eq!(&f, inst.objective());
    }

    #[test]
    fn gqss_relaxation_matches_penalized_objective() {
        let g = GqssInstance::tightness_example(3.0);
        let inst = CbqpInstance::from_gqss(&g);
        let mult = Multipliers::new(vec![], vec![-2.5]).unwrap();
        assert_eq!(
            lagrangian_relaxation(&inst, &mult).unwrap(),
            build_penalized(&g, 2.5).unwrap()
        );
    }

    #[test]
    fn relaxation_rejects_bad_multipliers() {
        let inst = CbqpInstance::from_gqss(&GqssInstance::tightness_example(3.0));
        let bad = Multipliers {
            lambda: vec![],
            mu: vec![1.0],
        };
        assert!(lagrangian_relaxation(&inst, &bad).is_err());
        assert!(Multipliers::new(vec![], vec![0.5]).is_err());
        assert!(lagrangian_relaxation(&inst, &Multipliers::zeros(1, 1)).is_err());
    }

    #[test]
    fn scheduler_validation() {
        assert!(SchedulerConfig::default().validate().is_ok());
        for cfg in [
            SchedulerConfig {
                feas_cnt: 0,
                ..Default::default()
            },
            SchedulerConfig {
                delta: 0.0,
                ..Default::default()
            },
            SchedulerConfig {
                delta: 1.5,
                ..Default::default()
            },
            SchedulerConfig {
                s_lambda: 0.0,
                ..Default::default()
            },
        ] {
            assert!(cfg.validate().is_err());
        }
    }

    #[test]
    fn trace_jsonl_round_trip() {
        let trace = DualTrace {
            method: "new".into(),
            records: vec![DualIterationRecord {
                k: 0,
                multipliers: MultiplierSnapshot::Scalar(1.5),
                x: BitVector::from_u8(&[1, 0]).unwrap(),
                relaxation_value: 3.0,
                primal_value: 3.0,
                violation: 0.0,
                feasible: true,
                reads_used: 1,
                step_size: 0.0,
            }],
            best_feasible: Some(BestFeasible {
                x: BitVector::from_u8(&[1, 0]).unwrap(),
                value: 3.0,
                lambda: Some(1.5),
                k: 0,
            }),
            terminated_by: Termination::ZeroSubgradient,
            total_reads: 1,
        };
        let mut buf = Vec::new();
        trace.write_jsonl(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.lines().last().unwrap().contains("\"type\":\"footer\""));
        assert_eq!(DualTrace::read_jsonl(&buf[..]).unwrap(), trace);

        let vector = MultiplierSnapshot::Vector(Multipliers::zeros(1, 1));
        let s = serde_json::to_string(&vector).unwrap();
        assert_eq!(
            serde_json::from_str::<MultiplierSnapshot>(&s).unwrap(),
            vector
        );
    }
}
