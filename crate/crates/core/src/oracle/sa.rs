//! Single-flip Metropolis simulated annealing with independent restarts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, OracleResult, Sense};
use crate::error::{Error, Result};
use crate::model::{BitVector, QuadraticFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BetaSchedule {
    Geometric,
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SaParams {
    pub reads: u64,
    pub sweeps_per_read: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub schedule: BetaSchedule,
    pub seed: u64,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            reads: 100,
            sweeps_per_read: 200,
            beta_initial: 0.1,
            beta_final: 10.0,
            schedule: BetaSchedule::Geometric,
            seed: 0,
        }
    }
}

impl SaParams {
    pub fn validate(&self) -> Result<()> {
        if self.reads == 0 {
            return Err(Error::InvalidParameter("SA needs at least one read".into()));
        }
        if !(self.beta_initial > 0.0 && self.beta_final >= self.beta_initial) {
            return Err(Error::InvalidParameter(format!(
                "SA inverse temperatures must satisfy 0 < {} <= {}",
                self.beta_initial, self.beta_final
            )));
        }
        Ok(())
    }

    /// Inverse temperature for sweep `k` of `sweeps_per_read`.
    pub fn beta_at(&self, k: usize) -> f64 {
        if self.sweeps_per_read <= 1 {
            return self.beta_final;
        }
        let t = k as f64 / (self.sweeps_per_read - 1) as f64;
        match self.schedule {
            BetaSchedule::Geometric => {
                self.beta_initial * (self.beta_final / self.beta_initial).powf(t)
            }
            BetaSchedule::Linear => self.beta_initial + (self.beta_final - self.beta_initial) * t,
        }
    }
}

/// Runs `p.reads` independent anneals on the energy `-f` (maximize) or `f`
/// (minimize); each read reports its final configuration.
pub fn solve_sa(
    f: &QuadraticFunction,
    p: &SaParams,
    sense: Sense,
    call: u64,
) -> Result<OracleResult> {
    p.validate()?;
    let n = f.dim();
    let energy = match sense {
        Sense::Max => f.negate(),
        Sense::Min => f.clone(),
    };
    let q = energy.matrix();
    let betas: Vec<f64> = (0..p.sweeps_per_read).map(|k| p.beta_at(k)).collect();

    let reads: Vec<(BitVector, f64)> = (0..p.reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(p.seed, call, read));
            let mut x: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
            // field[i] = sum_{j != i} Q_ij x_j
            let mut field: Vec<f64> = (0..n)
                .map(|i| {
                    (0..n)
                        .filter(|&j| j != i && x[j])
                        .map(|j| q.get(i, j))
                        .sum()
                })
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            for &beta in &betas {
                order.shuffle(&mut rng);
                for &i in &order {
                    let d = q.get(i, i) + 2.0 * field[i];
                    let delta = if x[i] { -d } else { d };
                    if delta <= 0.0 || rng.random::<f64>() < (-beta * delta).exp() {
                        let sign = if x[i] { -1.0 } else { 1.0 };
                        x[i] = !x[i];
                        let row = q.row(i);
                        for (j, fj) in field.iter_mut().enumerate() {
                            if j != i {
                                *fj += sign * row[j];
                            }
                        }
                    }
                }
            }
            let x = BitVector::from_bools(x);
            let value = f.eval(&x).expect("dimension fixed by construction");
            (x, value)
        })
        .collect();
    Ok(OracleResult::from_reads(sense, reads))
}
