//! Core domain types: dense square matrices, bit vectors, quadratic and
//! polynomial functions on the Boolean cube, and the two constrained problem
//! classes (general CBQP and the generalized quadratic stable set problem).
//!
//! Quadratic forms follow the symmetric convention: `Q` is stored symmetric and
//! `x^T Q x` sums `Q[i][j] * x_i * x_j` over all ordered pairs, so an
//! off-diagonal weight `w` contributes `2w` once both endpoints are set.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Tolerance used for feasibility on non-integer data.
pub const FEASIBILITY_TOL: f64 = 1e-9;

/// Tolerance used when checking that loaded matrices are symmetric.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense square matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Builds a matrix from a row-major slice of length `n * n`.
    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::NotSquare {
                rows: n,
                len: data.len(),
            });
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::NotSquare {
                    rows: n,
                    len: n * row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { n, data })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    /// Sets both `(i, j)` and `(j, i)`.
    pub fn set_sym(&mut self, i: usize, j: usize, v: f64) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// First asymmetric pair beyond `tol`, if any.
    pub fn asymmetry(&self, tol: f64) -> Option<(usize, usize)> {
        for i in 0..self.n {
            for j in i + 1..self.n {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return Some((i, j));
                }
            }
        }
        None
    }

    pub fn is_symmetric(&self) -> bool {
        self.asymmetry(0.0).is_none()
    }

    pub fn check_symmetric(&self, tol: f64) -> Result<()> {
        match self.asymmetry(tol) {
            Some((i, j)) => Err(Error::Asymmetric {
                i,
                j,
                a: self.get(i, j),
                b: self.get(j, i),
            }),
            None => Ok(()),
        }
    }

    pub fn check_non_negative(&self) -> Result<()> {
        for i in 0..self.n {
            for j in 0..self.n {
                let v = self.get(i, j);
                if v < 0.0 {
                    return Err(Error::NegativeEntry { i, j, value: v });
                }
            }
        }
        Ok(())
    }

    fn check_dim(&self, other: &Matrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    /// `self + scale * other`.
    pub fn add_scaled(&self, other: &Matrix, scale: f64) -> Result<Matrix> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + scale * b))
    }

    pub fn hadamard(&self, other: &Matrix) -> Result<Matrix> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a * b))
    }

    pub fn scale(&self, s: f64) -> Matrix {
        self.map(|v| v * s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        Matrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn is_integral(&self) -> bool {
        self.data.iter().all(|v| v.fract() == 0.0)
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `x^T M x` over all ordered pairs.
    pub fn form(&self, x: &BitVector) -> f64 {
        let ones: Vec<usize> = x.ones().collect();
        let mut acc = 0.0;
        for &i in &ones {
            let row = self.row(i);
            for &j in &ones {
                acc += row[j];
            }
        }
        acc
    }
}

/// Element of the Boolean cube `{0,1}^n`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    bits: Vec<bool>,
}

impl BitVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            bits: vec![false; n],
        }
    }

    pub fn ones_vec(n: usize) -> Self {
        Self {
            bits: vec![true; n],
        }
    }

    pub fn from_bools(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    /// Accepts only 0/1 entries.
    pub fn from_u8(bits: &[u8]) -> Result<Self> {
        bits.iter()
            .map(|&b| match b {
                0 => Ok(false),
                1 => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "bit vector entry {other} is not 0 or 1"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Self::from_bools)
    }

    /// Low `n` bits of `mask`; bit `i` of the mask is entry `i`.
    pub fn from_mask(mask: u64, n: usize) -> Self {
        Self {
            bits: (0..n).map(|i| mask >> i & 1 == 1).collect(),
        }
    }

    /// Inverse of [`BitVector::from_mask`]; panics for `n > 64`.
    pub fn to_mask(&self) -> u64 {
        assert!(self.bits.len() <= 64, "bit vector too long for a u64 mask");
        self.bits
            .iter()
            .enumerate()
            .fold(0u64, |m, (i, &b)| if b { m | 1 << i } else { m })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, v: bool) {
        self.bits[i] = v;
    }

    pub fn flip(&mut self, i: usize) {
        self.bits[i] = !self.bits[i];
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.bits
    }

    pub fn to_u8(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| b as u8).collect()
    }

    /// Spin image `s = 2x - 1`.
    pub fn to_spins(&self) -> Vec<i8> {
        self.bits.iter().map(|&b| if b { 1 } else { -1 }).collect()
    }

    pub fn from_spins(spins: &[i8]) -> Self {
        Self {
            bits: spins.iter().map(|&s| s > 0).collect(),
        }
    }

    /// The first `n` entries.
    pub fn truncate(&self, n: usize) -> Self {
        Self {
            bits: self.bits[..n].to_vec(),
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, &b) in self.bits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", b as u8)?;
        }
        write!(f, ")")
    }
}

impl Serialize for BitVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_u8().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BitVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = Vec::<u8>::deserialize(deserializer)?;
        BitVector::from_u8(&raw).map_err(serde::de::Error::custom)
    }
}

/// `x -> x^T Q x + c` with `Q` symmetric; linear terms live on the diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticFunction {
    q: Matrix,
    c: f64,
}

impl QuadraticFunction {
    /// Requires an exactly symmetric matrix.
    pub fn new(q: Matrix, c: f64) -> Result<Self> {
        q.check_symmetric(0.0)?;
        Ok(Self { q, c })
    }

    /// Symmetrizes `q` first, so any square matrix is accepted.
    pub fn from_any(q: Matrix, c: f64) -> Self {
        Self {
            q: crate::transform::symmetrize(&q),
            c,
        }
    }

    pub fn zero(n: usize) -> Self {
        Self {
            q: Matrix::zeros(n),
            c: 0.0,
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self {
            q: Matrix::zeros(n),
            c,
        }
    }

    /// `sum_i coeffs[i] * x_i`.
    pub fn linear(coeffs: &[f64]) -> Self {
        Self {
            q: Matrix::diagonal(coeffs),
            c: 0.0,
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    #[inline]
    pub fn matrix(&self) -> &Matrix {
        &self.q
    }

    #[inline]
    pub fn constant_term(&self) -> f64 {
        self.c
    }

    pub fn eval(&self, x: &BitVector) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(self.q.form(x) + self.c)
    }

    /// `self + scale * other`, constants included.
    pub fn add_scaled(&self, other: &QuadraticFunction, scale: f64) -> Result<Self> {
        Ok(Self {
            q: self.q.add_scaled(&other.q, scale)?,
            c: self.c + scale * other.c,
        })
    }

    pub fn negate(&self) -> Self {
        Self {
            q: self.q.scale(-1.0),
            c: -self.c,
        }
    }

    pub fn is_integral(&self) -> bool {
        self.q.is_integral() && self.c.fract() == 0.0
    }
}

/// Free-function form of [`QuadraticFunction::eval`].
pub fn eval_quadratic(f: &QuadraticFunction, x: &BitVector) -> Result<f64> {
    f.eval(x)
}

/// Multilinear polynomial on `{0,1}^n`, keyed by sorted index sets.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct PolynomialFunction {
    n: usize,
    terms: BTreeMap<Vec<usize>, f64>,
}

impl PolynomialFunction {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Adds `coeff * prod_{i in vars} x_i`. Repeated indices collapse
    /// (`x_i^2 = x_i`) and coefficients of equal monomials are merged.
    pub fn add_term(&mut self, vars: &[usize], coeff: f64) -> Result<()> {
        let mut key: Vec<usize> = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(&bad) = key.iter().find(|&&i| i >= self.n) {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: bad + 1,
            });
        }
        let entry = self.terms.entry(key).or_insert(0.0);
        *entry += coeff;
        Ok(())
    }

    pub fn from_terms(n: usize, terms: &[(Vec<usize>, f64)]) -> Result<Self> {
        let mut p = Self::new(n);
        for (vars, coeff) in terms {
            p.add_term(vars, *coeff)?;
        }
        Ok(p)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[usize], f64)> {
        self.terms.iter().map(|(k, &v)| (k.as_slice(), v))
    }

    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .filter(|(_, &c)| c != 0.0)
            .map(|(k, _)| k.len())
            .max()
            .unwrap_or(0)
    }

    pub fn abs_coeff_sum(&self) -> f64 {
        self.terms.values().map(|c| c.abs()).sum()
    }

    pub fn eval(&self, x: &BitVector) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: x.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .filter(|(k, _)| k.iter().all(|&i| x.get(i)))
            .map(|(_, &c)| c)
            .sum())
    }
}

/// `max f(x)` s.t. `g_i(x) = 0`, `h_j(x) <= 0`, `x` binary.
#[derive(Clone, Debug, PartialEq)]
pub struct CbqpInstance {
    n: usize,
    objective: QuadraticFunction,
    equalities: Vec<QuadraticFunction>,
    inequalities: Vec<QuadraticFunction>,
}

impl CbqpInstance {
    pub fn new(
        objective: QuadraticFunction,
        equalities: Vec<QuadraticFunction>,
        inequalities: Vec<QuadraticFunction>,
    ) -> Result<Self> {
        let n = objective.dim();
        for f in equalities.iter().chain(&inequalities) {
            if f.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: f.dim(),
                });
            }
        }
        Ok(Self {
            n,
            objective,
            equalities,
            inequalities,
        })
    }

    /// The stable set problem as one inequality `x^T A x <= 0`.
    pub fn from_gqss(inst: &GqssInstance) -> Self {
        Self {
            n: inst.dim(),
            objective: QuadraticFunction {
                q: inst.w().clone(),
                c: 0.0,
            },
            equalities: Vec::new(),
            inequalities: vec![QuadraticFunction {
                q: inst.a().clone(),
                c: 0.0,
            }],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn objective(&self) -> &QuadraticFunction {
        &self.objective
    }

    pub fn equalities(&self) -> &[QuadraticFunction] {
        &self.equalities
    }

    pub fn inequalities(&self) -> &[QuadraticFunction] {
        &self.inequalities
    }

    pub fn is_integral(&self) -> bool {
        self.objective.is_integral()
            && self
                .equalities
                .iter()
                .chain(&self.inequalities)
                .all(QuadraticFunction::is_integral)
    }

    /// Objective, constraint values and feasibility at `x`. The violation is
    /// the Euclidean norm of `(g(x), max(h(x), 0))`.
    pub fn eval(&self, x: &BitVector) -> Result<EvalResult> {
        let objective_value = self.objective.eval(x)?;
        let mut sq = 0.0;
        for g in &self.equalities {
            let v = g.eval(x)?;
            sq += v * v;
        }
        for h in &self.inequalities {
            let v = h.eval(x)?.max(0.0);
            sq += v * v;
        }
        let violation = sq.sqrt();
        let feasible = if self.is_integral() {
            violation == 0.0
        } else {
            violation <= FEASIBILITY_TOL
        };
        Ok(EvalResult {
            objective_value,
            violation,
            feasible,
        })
    }
}

/// `max x^T W x` s.t. `x^T A x = 0` with `A >= 0`, `A`, `W` symmetric and
/// `W ∘ A = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct GqssInstance {
    w: Matrix,
    a: Matrix,
    fixed: Vec<usize>,
    integral: bool,
}

impl GqssInstance {
    /// Validates the three instance assumptions. A nonzero diagonal entry
    /// `A_ii` forces `x_i = 0`: the entry is cleared, row/column `i` of `W`
    /// is zeroed, and `i` is recorded in [`GqssInstance::fixed`].
    pub fn new(w: Matrix, a: Matrix) -> Result<Self> {
        let n = w.dim();
        if a.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.dim(),
            });
        }
        w.check_symmetric(0.0)?;
        a.check_symmetric(0.0)?;
        a.check_non_negative()?;
        let mut w = w;
        let mut a = a;
        let mut fixed = Vec::new();
        for i in 0..n {
            if a.get(i, i) != 0.0 {
                a.set(i, i, 0.0);
                fixed.push(i);
                for j in 0..n {
                    w.set_sym(i, j, 0.0);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if a.get(i, j) != 0.0 && w.get(i, j) != 0.0 {
                    return Err(Error::Assumption(format!(
                        "W and A overlap at ({i}, {j}); W∘A must vanish"
                    )));
                }
            }
        }
        let integral = w.is_integral() && a.is_integral();
        Ok(Self {
            w,
            a,
            fixed,
            integral,
        })
    }

    /// Five-vertex graph on which the scalar penalty bound is attained.
    /// Conflicts (0-based) 0-4, 1-4, 2-4, 3-4 and 1-2; weight `omega` on the
    /// non-conflicting pairs {0,1} and {2,3}.
    pub fn tightness_example(omega: f64) -> Self {
        let mut w = Matrix::zeros(5);
        w.set_sym(0, 1, omega);
        w.set_sym(2, 3, omega);
        let mut a = Matrix::zeros(5);
        for (i, j) in [(0, 4), (1, 4), (2, 4), (3, 4), (1, 2)] {
            a.set_sym(i, j, 1.0);
        }
        Self::new(w, a).expect("example graph satisfies the instance assumptions")
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.w.dim()
    }

    #[inline]
    pub fn w(&self) -> &Matrix {
        &self.w
    }

    #[inline]
    pub fn a(&self) -> &Matrix {
        &self.a
    }

    /// Variables pinned to zero by diagonal conflict entries.
    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    pub fn is_integral(&self) -> bool {
        self.integral
    }

    /// Conflict neighbourhood `{j != i : A_ij != 0}`.
    pub fn neighbours(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim()).filter(move |&j| j != i && self.a.get(i, j) != 0.0)
    }

    /// Clears pinned variables in a reported solution.
    pub fn restore(&self, x: &BitVector) -> BitVector {
        let mut out = x.clone();
        for &i in &self.fixed {
            out.set(i, false);
        }
        out
    }

    pub fn is_feasible_violation(&self, violation: f64) -> bool {
        if self.integral {
            violation == 0.0
        } else {
            violation <= FEASIBILITY_TOL
        }
    }

    pub fn objective(&self) -> QuadraticFunction {
        QuadraticFunction {
            q: self.w.clone(),
            c: 0.0,
        }
    }

    pub fn constraint(&self) -> QuadraticFunction {
        QuadraticFunction {
            q: self.a.clone(),
            c: 0.0,
        }
    }
}

/// Objective, violation and feasibility of one assignment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub objective_value: f64,
    pub violation: f64,
    pub feasible: bool,
}

pub fn eval_gqss(inst: &GqssInstance, x: &BitVector) -> Result<EvalResult> {
    if x.len() != inst.dim() {
        return Err(Error::DimensionMismatch {
            expected: inst.dim(),
            found: x.len(),
        });
    }
    let objective_value = inst.w.form(x);
    let violation = inst.a.form(x);
    Ok(EvalResult {
        objective_value,
        violation,
        feasible: inst.is_feasible_violation(violation),
    })
}

/// Entrywise sum of non-negative constraint matrices. Non-negativity makes
/// `x^T (sum A_i) x = 0` equivalent to every `x^T A_i x = 0`.
pub fn combine_constraints(mats: &[Matrix]) -> Result<Matrix> {
    let first = mats
        .first()
        .ok_or_else(|| Error::InvalidParameter("no constraint matrices given".into()))?;
    let mut acc = Matrix::zeros(first.dim());
    for m in mats {
        m.check_non_negative()?;
        acc = acc.add(m)?;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn remark_graph(omega: f64) -> GqssInstance {
        GqssInstance::tightness_example(omega)
    }

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::from_u8(bits).unwrap()
    }

    #[test]
    fn eval_quadratic_examples() {
        let f = QuadraticFunction::new(Matrix::identity(2), 0.0).unwrap();
        assert_eq!(eval_quadratic(&f, &bv(&[1, 1])).unwrap(), 2.0);

        let f = QuadraticFunction::constant(3, 7.0);
        for mask in 0..8 {
            assert_eq!(f.eval(&BitVector::from_mask(mask, 3)).unwrap(), 7.0);
        }

        let inst = remark_graph(3.0);
        assert_eq!(inst.objective().eval(&bv(&[1, 1, 1, 1, 0])).unwrap(), 12.0);
    }

    #[test]
    fn eval_rejects_dimension_mismatch() {
        let f = QuadraticFunction::zero(3);
        assert!(matches!(
            f.eval(&bv(&[1, 0])),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(eval_gqss(&remark_graph(1.0), &bv(&[1])).is_err());
    }

    #[test]
    fn eval_gqss_examples() {
        let inst = remark_graph(3.0);
        let r = eval_gqss(&inst, &BitVector::zeros(5)).unwrap();
        assert_eq!(
            (r.objective_value, r.violation, r.feasible),
            (0.0, 0.0, true)
        );

        let r = eval_gqss(&inst, &bv(&[1, 1, 1, 1, 0])).unwrap();
        assert_eq!(
            (r.objective_value, r.violation, r.feasible),
            (12.0, 2.0, false)
        );

        let r = eval_gqss(&inst, &bv(&[1, 1, 0, 0, 0])).unwrap();
        assert_eq!(
            (r.objective_value, r.violation, r.feasible),
            (6.0, 0.0, true)
        );
    }

    #[test]
    fn combine_constraints_examples() {
        let mut a = Matrix::zeros(3);
        a.set_sym(0, 1, 1.0);
        assert_eq!(combine_constraints(&[a.clone()]).unwrap(), a);

        let mut b = Matrix::zeros(3);
        b.set_sym(1, 2, 1.0);
        let ab = combine_constraints(&[a.clone(), b]).unwrap();
        assert_eq!(ab.get(0, 1), 1.0);
        assert_eq!(ab.get(1, 2), 1.0);
        assert_eq!(ab.get(0, 2), 0.0);

        let mut a1 = Matrix::zeros(2);
        a1.set_sym(0, 1, 1.0);
        let mut a2 = Matrix::zeros(2);
        a2.set_sym(0, 1, 2.0);
        let c = combine_constraints(&[a1.clone(), a2]).unwrap();
        assert_eq!(c.get(0, 1), 3.0);
        for mask in 0..4 {
            let x = BitVector::from_mask(mask, 2);
            assert_eq!(c.form(&x) == 0.0, a1.form(&x) == 0.0);
        }
    }

    #[test]
    fn combine_constraints_rejects_negative() {
        let mut a = Matrix::zeros(2);
        a.set_sym(0, 1, -1.0);
        assert!(matches!(
            combine_constraints(&[a]),
            Err(Error::NegativeEntry { .. })
        ));
    }

    #[test]
    fn gqss_constructor_enforces_assumptions() {
        let mut w = Matrix::zeros(2);
        w.set_sym(0, 1, 5.0);
        let mut a = Matrix::zeros(2);
        a.set_sym(0, 1, 1.0);
        assert!(matches!(
            GqssInstance::new(w.clone(), a.clone()),
            Err(Error::Assumption(_))
        ));

        let mut asym = Matrix::zeros(2);
        asym.set(0, 1, 1.0);
        assert!(matches!(
            GqssInstance::new(Matrix::zeros(2), asym),
            Err(Error::Asymmetric { .. })
        ));

        let mut neg = Matrix::zeros(2);
        neg.set_sym(0, 1, -1.0);
        assert!(GqssInstance::new(Matrix::zeros(2), neg).is_err());
    }

    #[test]
    fn diagonal_conflict_pins_variable() {
        let mut w = Matrix::zeros(3);
        w.set(1, 1, 4.0);
        w.set_sym(1, 2, 2.0);
        let mut a = Matrix::zeros(3);
        a.set(1, 1, 1.0);
        let inst = GqssInstance::new(w, a).unwrap();
        assert_eq!(inst.fixed(), &[1]);
        assert_eq!(inst.a().get(1, 1), 0.0);
        assert_eq!(inst.w().get(1, 1), 0.0);
        assert_eq!(inst.w().get(2, 1), 0.0);
        let x = inst.restore(&bv(&[1, 1, 1]));
        assert_eq!(x, bv(&[1, 0, 1]));
    }

    #[test]
    fn lexicographic_order_compares_first_index_first() {
        assert!(bv(&[0, 1, 1]) < bv(&[1, 0, 0]));
        assert!(bv(&[1, 1, 1, 1, 0]) < bv(&[1, 1, 1, 1, 1]));
    }

    #[test]
    fn polynomial_merges_and_collapses() {
        let mut p = PolynomialFunction::new(3);
        p.add_term(&[2, 0, 0], 1.5).unwrap();
        p.add_term(&[0, 2], 0.5).unwrap();
        assert_eq!(p.terms().count(), 1);
        assert_eq!(p.degree(), 2);
        assert_eq!(p.eval(&bv(&[1, 0, 1])).unwrap(), 2.0);
        assert!(p.add_term(&[3], 1.0).is_err());
    }

    #[test]
    fn cbqp_eval_reports_violation_norm() {
        let obj = QuadraticFunction::linear(&[1.0, 1.0]);
        // x0 + x1 - 1 = 0
        let mut g = QuadraticFunction::linear(&[1.0, 1.0]);
        g = g
            .add_scaled(&QuadraticFunction::constant(2, 1.0), -1.0)
            .unwrap();
        let inst = CbqpInstance::new(obj, vec![g], vec![]).unwrap();
        let r = inst.eval(&bv(&[1, 1])).unwrap();
        assert_eq!(r.violation, 1.0);
        assert!(!r.feasible);
        assert!(inst.eval(&bv(&[0, 1])).unwrap().feasible);
    }
}
