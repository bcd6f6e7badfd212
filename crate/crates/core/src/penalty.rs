//! Penalty coefficients that make the penalized QUBO equivalent to the
//! stable set problem.
//!
//! For vertex `i` with conflict neighbourhood `N(i) = {j != i : A_ij != 0}`
//! the scalar bound uses
//!
//! ```text
//! λ_i = (W+_ii / 2 + sum_{j ∉ N(i), j != i} W+_ij) / min_{j: A_ij != 0} A_ij
//! ```
//!
//! and any `λ > max_i λ_i` makes every maximizer of `x^T W x - λ x^T A x`
//! feasible: dropping one endpoint of a violated conflict loses at most
//! `2 λ_i min A` of objective but recovers at least `2 λ min A` of penalty.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GqssInstance, Matrix, QuadraticFunction};

/// Multiplicative margin applied to real-valued bounds.
pub const RELATIVE_MARGIN: f64 = 1e-6;
/// Additive margin applied to real-valued scalar bounds.
pub const ABSOLUTE_MARGIN: f64 = 1e-9;

/// How a strict `λ > bound` is realized.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonPolicy {
    /// `bound + 1`; sufficient and exact for integer data.
    IntegerPlusOne,
    /// `bound * (1 + 1e-6) + 1e-9`.
    Relative,
}

impl EpsilonPolicy {
    pub fn for_instance(inst: &GqssInstance) -> Self {
        if inst.is_integral() {
            EpsilonPolicy::IntegerPlusOne
        } else {
            EpsilonPolicy::Relative
        }
    }

    pub fn exceed(self, bound: f64) -> f64 {
        match self {
            EpsilonPolicy::IntegerPlusOne => bound + 1.0,
            EpsilonPolicy::Relative => bound * (1.0 + RELATIVE_MARGIN) + ABSOLUTE_MARGIN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PenaltyBound {
    pub lambda_tilde: f64,
    pub per_vertex: Vec<f64>,
    pub epsilon_policy: EpsilonPolicy,
}

impl PenaltyBound {
    /// Smallest coefficient the policy considers strictly above the bound.
    pub fn lambda_used(&self) -> f64 {
        self.epsilon_policy.exceed(self.lambda_tilde)
    }
}

/// Symmetric per-conflict penalties, zero off the support of `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct PenaltyMatrix {
    lambda: Matrix,
}

impl PenaltyMatrix {
    pub fn new(lambda: Matrix) -> Result<Self> {
        lambda.check_symmetric(0.0)?;
        lambda.check_non_negative()?;
        Ok(Self { lambda })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.lambda
    }

    pub fn max_entry(&self) -> f64 {
        self.lambda.max_entry().max(0.0)
    }

    /// Smallest nonzero entry, if any.
    pub fn min_nonzero(&self) -> Option<f64> {
        self.lambda
            .as_flat()
            .iter()
            .copied()
            .filter(|&v| v > 0.0)
            .reduce(f64::min)
    }
}

fn positive(v: f64) -> f64 {
    v.max(0.0)
}

/// Numerator `W+_ii / 2 + sum_{j ∉ N(i), j != i} W+_ij`, plus
/// `max_{j ∈ N(i)} W+_ij` when `with_overlap`.
fn vertex_numerator(w: &Matrix, a: &Matrix, i: usize, with_overlap: bool) -> f64 {
    let n = w.dim();
    let mut num = positive(w.get(i, i)) / 2.0;
    let mut overlap: f64 = 0.0;
    for j in (0..n).filter(|&j| j != i) {
        if a.get(i, j) == 0.0 {
            num += positive(w.get(i, j));
        } else {
            overlap = overlap.max(positive(w.get(i, j)));
        }
    }
    if with_overlap {
        num += overlap;
    }
    num
}

fn row_min_conflict(a: &Matrix, i: usize) -> Option<f64> {
    (0..a.dim())
        .filter(|&j| j != i)
        .map(|j| a.get(i, j))
        .filter(|&v| v != 0.0)
        .reduce(f64::min)
}

fn bound_from(w: &Matrix, a: &Matrix, with_overlap: bool, policy: EpsilonPolicy) -> PenaltyBound {
    let per_vertex: Vec<f64> = (0..w.dim())
        .map(|i| match row_min_conflict(a, i) {
            Some(m) => vertex_numerator(w, a, i, with_overlap) / m,
            None => 0.0,
        })
        .collect();
    let lambda_tilde = per_vertex.iter().copied().fold(0.0, f64::max);
    PenaltyBound {
        lambda_tilde,
        per_vertex,
        epsilon_policy: policy,
    }
}

/// Scalar bound for an instance satisfying all three assumptions. Isolated
/// vertices contribute zero.
pub fn scalar_bound(inst: &GqssInstance) -> PenaltyBound {
    bound_from(inst.w(), inst.a(), false, EpsilonPolicy::for_instance(inst))
}

/// Scalar bound without assuming `W ∘ A = 0`; each vertex additionally pays
/// for its largest positive weight towards a conflicting neighbour.
pub fn scalar_bound_general(w: &Matrix, a: &Matrix) -> Result<PenaltyBound> {
    if w.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            found: a.dim(),
        });
    }
    w.check_symmetric(0.0)?;
    a.check_symmetric(0.0)?;
    a.check_non_negative()?;
    let policy = if w.is_integral() && a.is_integral() {
        EpsilonPolicy::IntegerPlusOne
    } else {
        EpsilonPolicy::Relative
    };
    Ok(bound_from(w, a, true, policy))
}

/// Per-conflict penalties `Λ_ij = max(λ_i, λ_j) / A_ij * (1 + margin)` with
/// undivided vertex numerators `λ_i`.
pub fn matrix_bound(inst: &GqssInstance) -> PenaltyMatrix {
    matrix_bound_with_margin(inst, RELATIVE_MARGIN)
}

pub fn matrix_bound_with_margin(inst: &GqssInstance, margin: f64) -> PenaltyMatrix {
    let (w, a) = (inst.w(), inst.a());
    let n = inst.dim();
    let lambda_i: Vec<f64> = (0..n).map(|i| vertex_numerator(w, a, i, false)).collect();
    let mut lambda = Matrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let aij = a.get(i, j);
            if aij != 0.0 {
                lambda.set_sym(i, j, lambda_i[i].max(lambda_i[j]) / aij * (1.0 + margin));
            }
        }
    }
    PenaltyMatrix { lambda }
}

/// `x^T W x - λ x^T A x`.
pub fn build_penalized(inst: &GqssInstance, lambda: f64) -> Result<QuadraticFunction> {
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "penalty coefficient {lambda} must be non-negative"
        )));
    }
    QuadraticFunction::new(inst.w().add_scaled(inst.a(), -lambda)?, 0.0)
}

/// `x^T W x - x^T (Λ ∘ A) x`.
pub fn build_penalized_matrix(
    inst: &GqssInstance,
    lambda: &PenaltyMatrix,
) -> Result<QuadraticFunction> {
    let l = lambda.matrix();
    let a = inst.a();
    if l.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: l.dim(),
        });
    }
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            if l.get(i, j) != 0.0 && a.get(i, j) == 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "penalty entry at ({i}, {j}) lies outside the conflict support"
                )));
            }
        }
    }
    QuadraticFunction::new(inst.w().add_scaled(&l.hadamard(a)?, -1.0)?, 0.0)
}
