//! Unconstrained QUBO oracles standing in for an annealing device.
//!
//! Every oracle takes a [`QuadraticFunction`] and an optimization [`Sense`]
//! and returns an [`OracleResult`]: a multiset of sampled bit vectors with
//! their exact function values. The `call` argument identifies the
//! invocation so stochastic oracles derive independent, reproducible streams
//! per call and per read.

mod exact;
mod sa;
mod sqa;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{eval_gqss, BitVector, GqssInstance, QuadraticFunction};

pub(crate) use exact::{gray_blocks, Best};
pub use exact::{solve_exact, ExactSolver, FormTracker, DEFAULT_EXACT_CAP};
pub use sa::{solve_sa, BetaSchedule, SaParams};
pub use sqa::{solve_sqa, transverse_coupling, SqaParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Max,
    Min,
}

impl Sense {
    /// True when `a` is strictly better than `b`.
    pub fn better(self, a: f64, b: f64) -> bool {
        match self {
            Sense::Max => a > b,
            Sense::Min => a < b,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: BitVector,
    pub value: f64,
    pub multiplicity: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub sense: Sense,
    pub samples: Vec<Sample>,
    pub best: (BitVector, f64),
    pub reads: u64,
}

impl OracleResult {
    /// Aggregates per-read outcomes into distinct samples, ordered by first
    /// occurrence. The best sample breaks value ties towards the
    /// lexicographically smallest vector.
    pub fn from_reads(sense: Sense, reads: Vec<(BitVector, f64)>) -> Self {
        assert!(
            !reads.is_empty(),
            "an oracle call produces at least one read"
        );
        let total = reads.len() as u64;
        let mut index: HashMap<BitVector, usize> = HashMap::new();
        let mut samples: Vec<Sample> = Vec::new();
        for (x, value) in reads {
            match index.get(&x) {
                Some(&k) => samples[k].multiplicity += 1,
                None => {
                    index.insert(x.clone(), samples.len());
                    samples.push(Sample {
                        x,
                        value,
                        multiplicity: 1,
                    });
                }
            }
        }
        let best = samples
            .iter()
            .fold(None::<&Sample>, |acc, s| match acc {
                Some(b) if sense.better(b.value, s.value) => Some(b),
                Some(b) if b.value == s.value && b.x <= s.x => Some(b),
                _ => Some(s),
            })
            .map(|s| (s.x.clone(), s.value))
            .expect("non-empty");
        Self {
            sense,
            samples,
            best,
            reads: total,
        }
    }

    pub fn best_x(&self) -> &BitVector {
        &self.best.0
    }

    pub fn best_value(&self) -> f64 {
        self.best.1
    }
}

/// Anything that optimizes a QUBO.
pub trait Oracle: Send + Sync {
    fn solve(&self, f: &QuadraticFunction, sense: Sense, call: u64) -> Result<OracleResult>;

    /// Short identifier for reports.
    fn name(&self) -> &'static str;

    /// Whether reported optima are certified global optima.
    fn is_exact(&self) -> bool {
        false
    }
}

/// The three built-in oracles behind one configurable value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OracleKind {
    Exact(ExactSolver),
    Sa(SaParams),
    Sqa(SqaParams),
}

impl OracleKind {
    /// Same oracle with a different per-call read count. The exact oracle
    /// always reports one read.
    pub fn with_reads(&self, reads: u64) -> Self {
        match self {
            OracleKind::Exact(e) => OracleKind::Exact(e.clone()),
            OracleKind::Sa(p) => OracleKind::Sa(SaParams { reads, ..p.clone() }),
            OracleKind::Sqa(p) => OracleKind::Sqa(SqaParams { reads, ..p.clone() }),
        }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        match self {
            OracleKind::Exact(e) => OracleKind::Exact(e.clone()),
            OracleKind::Sa(p) => OracleKind::Sa(SaParams { seed, ..p.clone() }),
            OracleKind::Sqa(p) => OracleKind::Sqa(SqaParams { seed, ..p.clone() }),
        }
    }

    pub fn reads(&self) -> u64 {
        match self {
            OracleKind::Exact(_) => 1,
            OracleKind::Sa(p) => p.reads,
            OracleKind::Sqa(p) => p.reads,
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            OracleKind::Exact(_) => 0,
            OracleKind::Sa(p) => p.seed,
            OracleKind::Sqa(p) => p.seed,
        }
    }
}

impl Oracle for OracleKind {
    fn is_exact(&self) -> bool {
        matches!(self, OracleKind::Exact(_))
    }

    fn solve(&self, f: &QuadraticFunction, sense: Sense, call: u64) -> Result<OracleResult> {
        match self {
            OracleKind::Exact(e) => e.solve(f, sense, call),
            OracleKind::Sa(p) => solve_sa(f, p, sense, call),
            OracleKind::Sqa(p) => solve_sqa(f, p, sense, call),
        }
    }

    fn name(&self) -> &'static str {
        match self {
            OracleKind::Exact(_) => "exact",
            OracleKind::Sa(_) => "sa",
            OracleKind::Sqa(_) => "sqa",
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent seed for `(seed, a, b)`.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    mix(mix(mix(seed) ^ a) ^ b.wrapping_mul(0x2545_f491_4f6c_dd1d))
}

/// Best feasible sample across the given oracle results. Pinned variables
/// are cleared before evaluation.
pub fn best_feasible(
    results: &[OracleResult],
    inst: &GqssInstance,
) -> Result<Option<(BitVector, f64)>> {
    let mut best: Option<(BitVector, f64)> = None;
    for r in results {
        for s in &r.samples {
            let x = inst.restore(&s.x);
            let e = eval_gqss(inst, &x)?;
            if !e.feasible {
                continue;
            }
            let better = match &best {
                None => true,
                Some((bx, bv)) => e.objective_value > *bv || (e.objective_value == *bv && x < *bx),
            };
            if better {
                best = Some((x, e.objective_value));
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Matrix;

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::from_u8(bits).unwrap()
    }

    #[test]
    fn from_reads_aggregates_and_picks_best() {
        let r = OracleResult::from_reads(
            Sense::Max,
            vec![
                (bv(&[1, 0]), 1.0),
                (bv(&[0, 1]), 2.0),
                (bv(&[1, 0]), 1.0),
                (bv(&[1, 1]), 2.0),
            ],
        );
        assert_eq!(r.reads, 4);
        assert_eq!(r.samples.len(), 3);
        assert_eq!(r.samples[0].multiplicity, 2);
        assert_eq!(r.best, (bv(&[0, 1]), 2.0));
        let total: u64 = r.samples.iter().map(|s| s.multiplicity).sum();
        assert_eq!(total, r.reads);

        let r = OracleResult::from_reads(Sense::Min, vec![(bv(&[1]), 3.0), (bv(&[0]), -1.0)]);
        assert_eq!(r.best.1, -1.0);
    }

    #[test]
    fn best_feasible_examples() {
        let inst = GqssInstance::tightness_example(3.0);
        let infeasible = OracleResult::from_reads(Sense::Max, vec![(bv(&[1, 1, 1, 1, 0]), 8.0)]);
        assert_eq!(
            best_feasible(std::slice::from_ref(&infeasible), &inst).unwrap(),
            None
        );

        let zero = OracleResult::from_reads(Sense::Max, vec![(BitVector::zeros(5), 0.0)]);
        assert_eq!(
            best_feasible(&[zero], &inst).unwrap(),
            Some((BitVector::zeros(5), 0.0))
        );

        let mixed = OracleResult::from_reads(
            Sense::Max,
            vec![
                (bv(&[1, 1, 1, 1, 0]), 8.0),
                (bv(&[1, 1, 0, 0, 0]), 6.0),
                (bv(&[0, 0, 0, 0, 1]), 0.0),
            ],
        );
        assert_eq!(
            best_feasible(&[infeasible, mixed], &inst).unwrap(),
            Some((bv(&[1, 1, 0, 0, 0]), 6.0))
        );
    }

    #[test]
    fn best_feasible_clears_pinned_variables() {
        let mut w = Matrix::zeros(2);
        w.set(0, 0, 1.0);
        let mut a = Matrix::zeros(2);
        a.set(1, 1, 1.0);
        let inst = GqssInstance::new(w, a).unwrap();
        let r = OracleResult::from_reads(Sense::Max, vec![(bv(&[1, 1]), 1.0)]);
        assert_eq!(
            best_feasible(&[r], &inst).unwrap(),
            Some((bv(&[1, 0]), 1.0))
        );
    }

    #[test]
    fn derived_seeds_differ() {
        let a = derive_seed(7, 0, 0);
        assert_ne!(a, derive_seed(7, 0, 1));
        assert_ne!(a, derive_seed(7, 1, 0));
        assert_ne!(a, derive_seed(8, 0, 0));
        assert_eq!(a, derive_seed(7, 0, 0));
    }
}
