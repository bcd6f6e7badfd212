//! Seeded instance generation, exhaustive reference optima, λ sweeps and
//! method comparison tables.

mod run;
mod sweep;
mod table;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BitVector, GqssInstance, Matrix};
use crate::oracle::{gray_blocks, Best, ExactSolver, FormTracker};
use crate::transform::preprocess_gqss;

pub use run::{
    run_benchmark, run_benchmark_traced, BenchConfig, BenchmarkRow, IterativeTrace, Method,
    MethodOutcome,
};
pub use sweep::{lambda_sweep, sweep_threshold_exact, Sweep, SweepPoint};
pub use table::{export_table, import_json, TableFormat};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GeneratorConfig {
    pub n: usize,
    pub w_low: i64,
    pub w_high: i64,
    pub a_density: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 12,
            w_low: -5,
            w_high: 5,
            a_density: 0.4,
            seed: 0,
        }
    }
}

impl GeneratorConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.w_low > self.w_high {
            return Err(Error::InvalidParameter(format!(
                "weight range [{}, {}] is empty",
                self.w_low, self.w_high
            )));
        }
        if !(self.a_density > 0.0 && self.a_density < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "conflict density {} must lie in (0, 1)",
                self.a_density
            )));
        }
        Ok(())
    }
}

/// Uniform integer weights on and above the diagonal and Bernoulli
/// conflicts above it, both mirrored, then cleaned so `W ∘ A = 0`.
pub fn generate_instance(cfg: &GeneratorConfig) -> Result<GqssInstance> {
    cfg.validate()?;
    let n = cfg.n;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            w.set_sym(i, j, rng.random_range(cfg.w_low..=cfg.w_high) as f64);
        }
    }
    let mut a = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(cfg.a_density) {
                a.set_sym(i, j, 1.0);
            }
        }
    }
    preprocess_gqss(&w, &[a])
}

/// Exhaustive `max x^T W x` subject to `x^T A x = 0`, lexicographically
/// smallest among optimal vectors. Pinned variables stay at zero.
pub fn exact_optimum(inst: &GqssInstance, cap: usize) -> Result<(BitVector, f64)> {
    let n = inst.dim();
    ExactSolver::with_cap(cap).check_cap(n)?;
    let fixed: u64 = inst.fixed().iter().map(|&i| 1u64 << i).sum();
    let gap = conflict_gap(inst.a());
    let (w, a) = (inst.w(), inst.a());
    let blocks = gray_blocks(
        n,
        |mask| {
            (
                FormTracker::new(w, mask),
                FormTracker::new(a, mask),
                Best::empty(),
            )
        },
        |(tw, ta, best), mask, flipped| {
            if let Some((i, was_set)) = flipped {
                tw.flip(i, was_set);
                ta.flip(i, was_set);
            }
            if mask & fixed == 0 && ta.value() <= gap {
                best.offer(tw.value(), mask);
            }
        },
    );
    let mut best = Best::empty();
    for (_, _, b) in blocks {
        if !b.is_empty() {
            best.offer(b.value, b.mask);
        }
    }
    // The zero vector is always feasible, so `best` is never empty.
    let x = BitVector::from_mask(best.mask, n);
    let value = w.form(&x);
    Ok((x, value))
}

/// Any violated assignment has `x^T A x >= 2 min_{A_ij > 0} A_ij`; half of
/// that separates feasible from infeasible values despite rounding drift.
fn conflict_gap(a: &Matrix) -> f64 {
    a.as_flat()
        .iter()
        .copied()
        .filter(|&v| v > 0.0)
        .reduce(f64::min)
        .unwrap_or(0.0)
}

/// Relative tolerance used when comparing objective values to an optimum.
pub(crate) fn matches_optimum(value: f64, opt: f64) -> bool {
    (value - opt).abs() <= 1e-9 * opt.abs().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eval_gqss;

    fn naive_optimum(inst: &GqssInstance) -> f64 {
        let n = inst.dim();
        let mut best = f64::NEG_INFINITY;
        for m in 0..1u64 << n {
            let x = BitVector::from_mask(m, n);
            let mut conflict = 0.0;
            let mut value = 0.0;
            for i in 0..n {
                for j in 0..n {
                    if x.get(i) && x.get(j) {
                        conflict += inst.a().get(i, j);
                        value += inst.w().get(i, j);
                    }
                }
            }
            if conflict == 0.0 && value > best {
                best = value;
            }
        }
        best
    }

    #[test]
    fn generation_is_deterministic_and_valid() {
        let cfg = GeneratorConfig::new(12, 42);
        let a = generate_instance(&cfg).unwrap();
        let b = generate_instance(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.a().is_symmetric());
        for i in 0..12 {
            assert_eq!(a.a().get(i, i), 0.0);
            for j in 0..12 {
                assert_eq!(a.w().get(i, j) * a.a().get(i, j), 0.0);
                assert!((-5.0..=5.0).contains(&a.w().get(i, j)));
            }
        }
        assert_ne!(a, generate_instance(&GeneratorConfig::new(12, 43)).unwrap());
    }

    #[test]
    fn generator_rejects_bad_configs() {
        let mut cfg = GeneratorConfig::new(5, 0);
        cfg.a_density = 1.0;
        assert!(generate_instance(&cfg).is_err());
        let cfg = GeneratorConfig {
            w_low: 3,
            w_high: 2,
            ..GeneratorConfig::new(5, 0)
        };
        assert!(generate_instance(&cfg).is_err());
    }

    #[test]
    fn exact_optimum_examples() {
        let (x, v) = exact_optimum(&GqssInstance::tightness_example(3.0), 28).unwrap();
        assert_eq!(v, 6.0);
        assert_eq!(x, BitVector::from_u8(&[0, 0, 1, 1, 0]).unwrap());

        let n = 6;
        let mut a = Matrix::zeros(n);
        for i in 0..n {
            for j in i + 1..n {
                a.set_sym(i, j, 1.0);
            }
        }
        let d = [-1.0, 3.0, 2.0, -4.0, 0.0, 1.0];
        let inst = GqssInstance::new(Matrix::diagonal(&d), a.clone()).unwrap();
        assert_eq!(exact_optimum(&inst, 28).unwrap().1, 3.0);
        let neg = GqssInstance::new(Matrix::diagonal(&[-1.0; 6]), a).unwrap();
        assert_eq!(exact_optimum(&neg, 28).unwrap().1, 0.0);

        let zero = GqssInstance::new(Matrix::zeros(4), Matrix::zeros(4)).unwrap();
        assert_eq!(
            exact_optimum(&zero, 28).unwrap(),
            (BitVector::zeros(4), 0.0)
        );
    }

    #[test]
    fn exact_optimum_matches_naive_enumeration() {
        for seed in 0..50 {
            let n = 4 + (seed as usize % 9);
            let inst = generate_instance(&GeneratorConfig::new(n, seed)).unwrap();
            let (x, v) = exact_optimum(&inst, 28).unwrap();
            assert_eq!(v, naive_optimum(&inst), "seed {seed}");
            assert!(eval_gqss(&inst, &x).unwrap().feasible);
        }
    }

    #[test]
    fn exact_optimum_parallel_path() {
        let inst = generate_instance(&GeneratorConfig::new(15, 5)).unwrap();
        assert_eq!(exact_optimum(&inst, 28).unwrap().1, naive_optimum(&inst));
    }

    #[test]
    fn exact_optimum_respects_cap() {
        let inst = generate_instance(&GeneratorConfig::new(10, 1)).unwrap();
        assert!(matches!(
            exact_optimum(&inst, 8),
            Err(Error::CapExceeded { n: 10, cap: 8 })
        ));
    }
}
