use super::{
    lagrangian_relaxation, project_negative, BestFeasible, DualIterationRecord, DualTrace,
    MultiplierSnapshot, Multipliers, SchedulerConfig, Termination,
};
use crate::error::{Error, Result};
use crate::model::{CbqpInstance, FEASIBILITY_TOL};
use crate::oracle::{Oracle, Sense};

/// Projected subgradient descent on the dual of a constrained binary
/// quadratic program, with normalized steps `s0 / sqrt(k + 1)`.
///
/// Stops when the relaxation optimizer is feasible and complementary
/// (`μ_j h_j(x) = 0` for every inequality), or after `max_iterations`.
pub fn subgradient_solve(
    inst: &CbqpInstance,
    oracle: &dyn Oracle,
    cfg: &SchedulerConfig,
) -> Result<DualTrace> {
    cfg.validate()?;
    let m = inst.equalities().len();
    let p = inst.inequalities().len();
    if m + p == 0 {
        return Err(Error::InvalidParameter(
            "the instance has no constraints to dualize".into(),
        ));
    }
    let mut mult = Multipliers::zeros(m, p);
    let mut records = Vec::new();
    let mut best: Option<BestFeasible> = None;
    let mut total_reads = 0;
    let mut step = 0.0;
    for k in 0..cfg.max_iterations {
        let f = lagrangian_relaxation(inst, &mult)?;
        let r = oracle.solve(&f, Sense::Max, k as u64)?;
        total_reads += r.reads;
        for s in &r.samples {
            let e = inst.eval(&s.x)?;
            if e.feasible && best.as_ref().is_none_or(|b| e.objective_value > b.value) {
                best = Some(BestFeasible {
                    x: s.x.clone(),
                    value: e.objective_value,
                    lambda: None,
                    k,
                });
            }
        }
        let x = r.best_x().clone();
        let e = inst.eval(&x)?;
        let g: Vec<f64> = inst
            .equalities()
            .iter()
            .map(|g| g.eval(&x))
            .collect::<Result<_>>()?;
        let h: Vec<f64> = inst
            .inequalities()
            .iter()
            .map(|h| h.eval(&x))
            .collect::<Result<_>>()?;
        records.push(DualIterationRecord {
            k,
            multipliers: MultiplierSnapshot::Vector(mult.clone()),
            x,
            relaxation_value: r.best_value(),
            primal_value: e.objective_value,
            violation: e.violation,
            feasible: e.feasible,
            reads_used: r.reads,
            step_size: step,
        });
        let complementary = mult
            .mu
            .iter()
            .zip(&h)
            .all(|(&mu, &hj)| (mu * hj).abs() <= FEASIBILITY_TOL);
        if e.feasible && complementary {
            return Ok(DualTrace {
                method: "subgradient".into(),
                records,
                best_feasible: best,
                terminated_by: Termination::ZeroSubgradient,
                total_reads,
            });
        }
        let norm = g.iter().chain(&h).map(|v| v * v).sum::<f64>().sqrt();
        step = cfg.s0 / ((k + 1) as f64).sqrt();
        if norm > 0.0 {
            for (l, gi) in mult.lambda.iter_mut().zip(&g) {
                *l -= step * gi / norm;
            }
            let mu: Vec<f64> = mult
                .mu
                .iter()
                .zip(&h)
                .map(|(mu, hj)| mu - step * hj / norm)
                .collect();
            mult.mu = project_negative(&mu);
        }
    }
    Ok(DualTrace {
        method: "subgradient".into(),
        records,
        best_feasible: best,
        terminated_by: Termination::MaxIterations,
        total_reads,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GqssInstance, QuadraticFunction};
    use crate::oracle::{ExactSolver, OracleKind};
    use crate::penalty::build_penalized;

    fn exact() -> OracleKind {
        OracleKind::Exact(ExactSolver::default())
    }

    #[test]
    fn gqss_bridge_follows_scalar_recursion() {
        let inst = GqssInstance::tightness_example(3.0);
        let cbqp = CbqpInstance::from_gqss(&inst);
        let t = subgradient_solve(&cbqp, &exact(), &SchedulerConfig::default()).unwrap();
        assert_eq!(t.terminated_by, Termination::ZeroSubgradient);
        let mut lambda = 0.0;
        for (k, rec) in t.records.iter().enumerate() {
            let MultiplierSnapshot::Vector(m) = &rec.multipliers else {
                panic!("vector multipliers expected");
            };
            assert!((-m.mu[0] - lambda).abs() < 1e-12);
            let f = build_penalized(&inst, lambda).unwrap();
            let opt = exact().solve(&f, Sense::Max, 0).unwrap();
            assert!((opt.best_value() - rec.relaxation_value).abs() < 1e-9);
            if !rec.feasible {
                lambda += 1.0 / ((k + 1) as f64).sqrt();
            }
        }
        assert_eq!(t.best_value(), Some(6.0));
    }

    #[test]
    fn equality_constraint_is_enforced() {
        // max 2 x0 + x1 + x2 subject to x0 + x1 + x2 - 1 = 0.
        let f = QuadraticFunction::linear(&[2.0, 1.0, 1.0]);
        let mut g = QuadraticFunction::linear(&[1.0, 1.0, 1.0]);
        g = g
            .add_scaled(&QuadraticFunction::constant(3, 1.0), -1.0)
            .unwrap();
        let inst = CbqpInstance::new(f, vec![g], vec![]).unwrap();
        let t = subgradient_solve(&inst, &exact(), &SchedulerConfig::default()).unwrap();
        assert_eq!(t.best_value(), Some(2.0));
        let last = t.records.last().unwrap();
        assert!(last.feasible);
        let MultiplierSnapshot::Vector(m) = &last.multipliers else {
            panic!("vector multipliers expected");
        };
        assert!(m.lambda[0] < 0.0);
    }

    #[test]
    fn inequality_multipliers_stay_non_positive() {
        let inst = GqssInstance::tightness_example(5.0);
        let cbqp = CbqpInstance::from_gqss(&inst);
        let cfg = SchedulerConfig {
            s0: 0.3,
            max_iterations: 15,
            ..SchedulerConfig::default()
        };
        let t = subgradient_solve(&cbqp, &exact(), &cfg).unwrap();
        for r in &t.records {
            let MultiplierSnapshot::Vector(m) = &r.multipliers else {
                panic!("vector multipliers expected");
            };
            assert!(m.mu.iter().all(|&v| v <= 0.0));
        }
    }

    #[test]
    fn unconstrained_instance_is_rejected() {
        let inst = CbqpInstance::new(QuadraticFunction::zero(2), vec![], vec![]).unwrap();
        assert!(subgradient_solve(&inst, &exact(), &SchedulerConfig::default()).is_err());
    }
}
