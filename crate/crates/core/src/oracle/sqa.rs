//! Simulated quantum annealing by path-integral Monte Carlo.
//!
//! The problem is mapped to an Ising energy `E(s)` and replicated over `P`
//! Trotter slices with periodic boundary in imaginary time:
//!
//! ```text
//! H_eff = sum_p E(s_p) / P  -  J(Γ) * sum_{i,p} s_{i,p} s_{i,p+1}
//! J(Γ)  = -ln(tanh(β Γ / P)) / (2β)
//! ```
//!
//! Single-site Metropolis moves at inverse temperature `β` are applied over
//! a random permutation of all `n * P` sites per sweep while `Γ` decreases
//! linearly. A read returns the slice with the lowest problem energy.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seed, OracleResult, Sense};
use crate::error::{Error, Result};
use crate::model::{BitVector, Matrix, QuadraticFunction};
use crate::transform::qubo_to_ising;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SqaParams {
    pub beta: f64,
    pub trotter_slices: usize,
    pub gamma_initial: f64,
    pub gamma_final: f64,
    pub sweeps: usize,
    pub reads: u64,
    pub seed: u64,
}

impl Default for SqaParams {
    fn default() -> Self {
        Self {
            beta: 15.0,
            trotter_slices: 15,
            gamma_initial: 3.0,
            gamma_final: 0.1,
            sweeps: 100,
            reads: 100,
            seed: 0,
        }
    }
}

impl SqaParams {
    pub fn validate(&self) -> Result<()> {
        if self.beta.is_nan() || self.beta <= 0.0 {
            return Err(Error::InvalidParameter("SQA beta must be positive".into()));
        }
        if self.trotter_slices == 0 || self.reads == 0 {
            return Err(Error::InvalidParameter(
                "SQA needs at least one Trotter slice and one read".into(),
            ));
        }
        if !(self.gamma_final > 0.0 && self.gamma_initial >= self.gamma_final) {
            return Err(Error::InvalidParameter(format!(
                "transverse field must satisfy {} >= {} > 0",
                self.gamma_initial, self.gamma_final
            )));
        }
        Ok(())
    }

    /// Field strength during sweep `k`.
    pub fn gamma_at(&self, k: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.gamma_final;
        }
        let t = k as f64 / (self.sweeps - 1) as f64;
        self.gamma_initial + (self.gamma_final - self.gamma_initial) * t
    }
}

/// Inter-slice ferromagnetic coupling `-ln(tanh(β Γ / P)) / (2β)`.
pub fn transverse_coupling(beta: f64, gamma: f64, slices: usize) -> Result<f64> {
    let arg = beta * gamma / slices as f64;
    if arg.is_nan() || arg <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tanh argument {arg} must be positive (beta={beta}, gamma={gamma})"
        )));
    }
    Ok(-(arg.tanh()).ln() / (2.0 * beta))
}

/// Replicated spin state for one read. Slice energies exclude the offset.
struct Replicas<'a> {
    j: &'a Matrix,
    h: &'a [f64],
    n: usize,
    slices: usize,
    spins: Vec<i8>,
    /// local[p*n + i] = h_i + sum_j J_ij s_{j,p}
    local: Vec<f64>,
    energy: Vec<f64>,
}

impl<'a> Replicas<'a> {
    fn random(j: &'a Matrix, h: &'a [f64], slices: usize, rng: &mut ChaCha8Rng) -> Self {
        let n = h.len();
        let spins: Vec<i8> = (0..n * slices)
            .map(|_| if rng.random_bool(0.5) { 1 } else { -1 })
            .collect();
        let mut r = Self {
            j,
            h,
            n,
            slices,
            spins,
            local: vec![0.0; n * slices],
            energy: vec![0.0; slices],
        };
        for p in 0..slices {
            for i in 0..n {
                r.local[p * n + i] = r.fresh_local(p, i);
            }
            r.energy[p] = r.fresh_energy(p);
        }
        r
    }

    fn slice(&self, p: usize) -> &[i8] {
        &self.spins[p * self.n..(p + 1) * self.n]
    }

    fn fresh_local(&self, p: usize, i: usize) -> f64 {
        let s = self.slice(p);
        self.h[i]
            + (0..self.n)
                .filter(|&k| k != i)
                .map(|k| self.j.get(i, k) * f64::from(s[k]))
                .sum::<f64>()
    }

    fn fresh_energy(&self, p: usize) -> f64 {
        let s = self.slice(p);
        let mut e = 0.0;
        for (i, &spin) in s.iter().enumerate() {
            let si = f64::from(spin);
            e += self.h[i] * si;
            for (k, &other) in s.iter().enumerate().skip(i + 1) {
                e += self.j.get(i, k) * si * f64::from(other);
            }
        }
        e
    }

    /// Metropolis move on site `(p, i)`.
    fn try_flip(&mut self, p: usize, i: usize, beta: f64, j_perp: f64, rng: &mut ChaCha8Rng) {
        let n = self.n;
        let idx = p * n + i;
        let s = f64::from(self.spins[idx]);
        let de_problem = -2.0 * s * self.local[idx];
        let mut dh = de_problem / self.slices as f64;
        if self.slices > 1 {
            let up = (p + 1) % self.slices;
            let down = (p + self.slices - 1) % self.slices;
            let neighbours =
                f64::from(self.spins[up * n + i]) + f64::from(self.spins[down * n + i]);
            dh += 2.0 * j_perp * s * neighbours;
        }
        if dh <= 0.0 || rng.random::<f64>() < (-beta * dh).exp() {
            self.spins[idx] = -self.spins[idx];
            self.energy[p] += de_problem;
            let shift = -2.0 * s;
            let row = self.j.row(i);
            let local = &mut self.local[p * n..(p + 1) * n];
            for (k, (l, &r)) in local.iter_mut().zip(row).enumerate() {
                if k != i {
                    *l += r * shift;
                }
            }
        }
    }

    fn best_slice(&self) -> usize {
        (0..self.slices).fold(0, |b, p| {
            if self.energy[p] < self.energy[b] {
                p
            } else {
                b
            }
        })
    }
}

pub fn solve_sqa(
    f: &QuadraticFunction,
    p: &SqaParams,
    sense: Sense,
    call: u64,
) -> Result<OracleResult> {
    p.validate()?;
    let energy = match sense {
        Sense::Max => f.negate(),
        Sense::Min => f.clone(),
    };
    let ising = qubo_to_ising(&energy);
    let j = ising.coupling_matrix();
    let h = ising.fields().to_vec();
    let n = f.dim();
    let slices = p.trotter_slices;
    let schedule: Vec<(f64, f64)> = (0..p.sweeps)
        .map(|k| {
            let gamma = p.gamma_at(k);
            transverse_coupling(p.beta, gamma, slices).map(|jp| (gamma, jp))
        })
        .collect::<Result<_>>()?;

    let reads: Vec<(BitVector, f64)> = (0..p.reads)
        .into_par_iter()
        .map(|read| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(p.seed, call, read));
            let mut rep = Replicas::random(&j, &h, slices, &mut rng);
            let mut sites: Vec<usize> = (0..n * slices).collect();
            let mut step = 0u64;
            for &(_, j_perp) in &schedule {
                sites.shuffle(&mut rng);
                for &site in &sites {
                    let (slice, i) = (site / n, site % n);
                    rep.try_flip(slice, i, p.beta, j_perp, &mut rng);
                    step += 1;
                    if cfg!(debug_assertions) && step.is_multiple_of(100) {
                        let fresh = rep.fresh_energy(slice);
                        debug_assert!(
                            (fresh - rep.energy[slice]).abs() <= 1e-7 * fresh.abs().max(1.0),
                            "tracked slice energy drifted"
                        );
                    }
                }
            }
            let x = BitVector::from_spins(rep.slice(rep.best_slice()));
            let value = f.eval(&x).expect("dimension fixed by construction");
            (x, value)
        })
        .collect();
    Ok(OracleResult::from_reads(sense, reads))
}
