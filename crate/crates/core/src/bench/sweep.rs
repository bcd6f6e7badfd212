use serde::{Deserialize, Serialize};

use super::{exact_optimum, matches_optimum};
use crate::error::{Error, Result};
use crate::model::{eval_gqss, GqssInstance};
use crate::oracle::{gray_blocks, ExactSolver, FormTracker, Oracle, OracleKind, Sense};
use crate::penalty::{build_penalized, scalar_bound};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub lambda: f64,
    pub success_count: u64,
    pub reads: u64,
}

impl SweepPoint {
    pub fn all_succeeded(&self) -> bool {
        self.success_count == self.reads
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    /// Scalar penalty bound; the grid ends exactly here.
    pub lambda_tilde: f64,
    pub optimum: f64,
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    /// Smallest grid multiplier from which every point succeeds on every
    /// read; `None` if the last point does not.
    pub fn threshold(&self) -> Option<f64> {
        let mut threshold = None;
        for p in self.points.iter().rev() {
            if !p.all_succeeded() {
                break;
            }
            threshold = Some(p.lambda);
        }
        threshold
    }
}

/// Samples `W - λA` on `steps` evenly spaced multipliers from 0 to the scalar
/// bound and counts reads that are feasible and optimal.
pub fn lambda_sweep(
    inst: &GqssInstance,
    oracle: &OracleKind,
    steps: usize,
    reads_per_step: u64,
    cap: usize,
) -> Result<Sweep> {
    if steps < 2 {
        return Err(Error::InvalidParameter(format!(
            "a sweep needs at least 2 steps, got {steps}"
        )));
    }
    let (_, optimum) = exact_optimum(inst, cap)?;
    let lambda_tilde = scalar_bound(inst).lambda_tilde;
    let oracle = oracle.with_reads(reads_per_step);
    let mut points = Vec::with_capacity(steps);
    for k in 0..steps {
        let lambda = if k + 1 == steps {
            lambda_tilde
        } else {
            lambda_tilde * k as f64 / (steps - 1) as f64
        };
        let r = oracle.solve(&build_penalized(inst, lambda)?, Sense::Max, k as u64)?;
        let mut success_count = 0;
        for s in &r.samples {
            let e = eval_gqss(inst, &inst.restore(&s.x))?;
            if e.feasible && matches_optimum(e.objective_value, optimum) {
                success_count += s.multiplicity;
            }
        }
        points.push(SweepPoint {
            lambda,
            success_count,
            reads: r.reads,
        });
    }
    Ok(Sweep {
        lambda_tilde,
        optimum,
        points,
    })
}

/// Exact penalty threshold `max(0, max_{x infeasible} (W(x) - opt) / A(x))`:
/// every maximizer of `W - λA` is feasible for larger `λ`, and none is
/// optimal-feasible for smaller `λ`.
pub fn sweep_threshold_exact(inst: &GqssInstance, cap: usize) -> Result<f64> {
    let n = inst.dim();
    ExactSolver::with_cap(cap).check_cap(n)?;
    let (_, opt) = exact_optimum(inst, cap)?;
    let (w, a) = (inst.w(), inst.a());
    let blocks = gray_blocks(
        n,
        |mask| (FormTracker::new(w, mask), FormTracker::new(a, mask), 0.0f64),
        |(tw, ta, worst), _, flipped| {
            if let Some((i, was_set)) = flipped {
                tw.flip(i, was_set);
                ta.flip(i, was_set);
            }
            let av = ta.value();
            if av > 1e-9 {
                *worst = worst.max((tw.value() - opt) / av);
            }
        },
    );
    Ok(blocks.into_iter().map(|(_, _, t)| t).fold(0.0, f64::max))
}
