//! Canonicalization and model conversions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    combine_constraints, BitVector, GqssInstance, Matrix, PolynomialFunction, QuadraticFunction,
};

/// `(Q + Q^T) / 2`. The quadratic form is unchanged on every bit vector.
pub fn symmetrize(q: &Matrix) -> Matrix {
    let n = q.dim();
    let mut out = Matrix::zeros(n);
    for i in 0..n {
        out.set(i, i, q.get(i, i));
        for j in i + 1..n {
            out.set_sym(i, j, 0.5 * (q.get(i, j) + q.get(j, i)));
        }
    }
    out
}

/// `Q + diag(b)`, using `x_i^2 = x_i`.
pub fn absorb_linear(q: &Matrix, b: &[f64]) -> Result<Matrix> {
    if q.dim() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: q.dim(),
            found: b.len(),
        });
    }
    let mut out = q.clone();
    for (i, &bi) in b.iter().enumerate() {
        out.set(i, i, out.get(i, i) + bi);
    }
    Ok(out)
}

/// Combines the conflict matrices, zeroes `W` on their support and pins any
/// variable with a diagonal conflict entry.
pub fn preprocess_gqss(w: &Matrix, a_list: &[Matrix]) -> Result<GqssInstance> {
    let n = w.dim();
    let a = if a_list.is_empty() {
        Matrix::zeros(n)
    } else {
        combine_constraints(a_list)?
    };
    if a.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: a.dim(),
        });
    }
    let mut w = symmetrize(w);
    let a = symmetrize(&a);
    for i in 0..n {
        for j in 0..n {
            if i != j && a.get(i, j) != 0.0 {
                w.set(i, j, 0.0);
            }
        }
    }
    GqssInstance::new(w, a)
}

/// One auxiliary variable `z = x_i * x_j` introduced by [`reduce_degree`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxVariable {
    pub aux: usize,
    pub left: usize,
    pub right: usize,
}

/// Bookkeeping for a quadratization, enough to rebuild the reduced problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReductionCertificate {
    pub original_n: usize,
    pub reduced_n: usize,
    pub aux_map: Vec<AuxVariable>,
    pub penalty_weight: f64,
}

impl ReductionCertificate {
    /// Extends an assignment of the original variables with the products the
    /// auxiliaries stand for.
    pub fn lift(&self, x: &BitVector) -> Result<BitVector> {
        if x.len() != self.original_n {
            return Err(Error::DimensionMismatch {
                expected: self.original_n,
                found: x.len(),
            });
        }
        let mut bits = x.as_slice().to_vec();
        for aux in &self.aux_map {
            debug_assert_eq!(aux.aux, bits.len());
            bits.push(bits[aux.left] && bits[aux.right]);
        }
        Ok(BitVector::from_bools(bits))
    }
}

/// Value of the substitution gadget `2z(x + y) - 3z - xy`: zero when
/// `z = xy`, negative otherwise.
pub fn gadget(x: bool, y: bool, z: bool) -> i32 {
    let (x, y, z) = (x as i32, y as i32, z as i32);
    2 * z * (x + y) - 3 * z - x * y
}

/// Default gadget weight: one more than the absolute coefficient sum.
pub fn default_gadget_weight(p: &PolynomialFunction) -> f64 {
    1.0 + p.abs_coeff_sum()
}

/// Quadratizes a multilinear polynomial for maximization.
///
/// While some term has degree three or more, the most frequent index pair
/// among those terms (lexicographically smallest on ties) is replaced by a
/// fresh variable `z`, and `weight * (2z(x_i + x_j) - 3z - x_i x_j)` is added.
/// Each wrong auxiliary value costs at least `weight`, while the substituted
/// polynomial moves by at most its absolute coefficient sum, so any
/// `weight` above that sum keeps the maximizers of the original problem.
pub fn reduce_degree(
    p: &PolynomialFunction,
    weight: f64,
) -> Result<(QuadraticFunction, ReductionCertificate)> {
    let bound = p.abs_coeff_sum();
    if weight.is_nan() || weight <= bound {
        return Err(Error::InvalidParameter(format!(
            "gadget weight {weight} must exceed the coefficient sum {bound}"
        )));
    }
    let original_n = p.dim();
    let mut terms: BTreeMap<Vec<usize>, f64> = p
        .terms()
        .filter(|(_, c)| *c != 0.0)
        .map(|(k, c)| (k.to_vec(), c))
        .collect();
    let mut aux_map = Vec::new();
    let mut n = original_n;

    loop {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for key in terms.keys().filter(|k| k.len() >= 3) {
            for (a, &i) in key.iter().enumerate() {
                for &j in &key[a + 1..] {
                    *counts.entry((i, j)).or_insert(0) += 1;
                }
            }
        }
        // BTreeMap iterates in lexicographic order; keep the first maximum.
        let Some((&(i, j), _)) = counts.iter().fold(
            None,
            |best: Option<(&(usize, usize), &usize)>, cur| match best {
                Some(b) if *b.1 >= *cur.1 => Some(b),
                _ => Some(cur),
            },
        ) else {
            break;
        };
        let z = n;
        n += 1;
        aux_map.push(AuxVariable {
            aux: z,
            left: i,
            right: j,
        });
        let mut next = BTreeMap::new();
        for (key, coeff) in terms {
            let new_key = if key.len() >= 3 && key.contains(&i) && key.contains(&j) {
                let mut k: Vec<usize> = key.into_iter().filter(|&v| v != i && v != j).collect();
                k.push(z);
                k.sort_unstable();
                k
            } else {
                key
            };
            *next.entry(new_key).or_insert(0.0) += coeff;
        }
        terms = next;
    }

    let mut q = Matrix::zeros(n);
    let mut c = 0.0;
    for (key, coeff) in &terms {
        match key.as_slice() {
            [] => c += coeff,
            [i] => q.set(*i, *i, q.get(*i, *i) + coeff),
            [i, j] => {
                let half = 0.5 * coeff;
                q.set_sym(*i, *j, q.get(*i, *j) + half);
            }
            _ => unreachable!("terms of degree three or more were all rewritten"),
        }
    }
    for aux in &aux_map {
        let (x, y, z) = (aux.left, aux.right, aux.aux);
        // weight * (2zx + 2zy - 3z - xy); each ordered pair carries half.
        q.set_sym(z, x, q.get(z, x) + weight);
        q.set_sym(z, y, q.get(z, y) + weight);
        q.set(z, z, q.get(z, z) - 3.0 * weight);
        q.set_sym(x, y, q.get(x, y) - 0.5 * weight);
    }

    let cert = ReductionCertificate {
        original_n,
        reduced_n: n,
        aux_map,
        penalty_weight: weight,
    };
    Ok((QuadraticFunction::new(q, c)?, cert))
}

/// Spin model `E(s) = sum_{i<j} J_ij s_i s_j + sum_i h_i s_i + offset`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsingModel {
    couplings: BTreeMap<(usize, usize), f64>,
    h: Vec<f64>,
    offset: f64,
}

impl IsingModel {
    pub fn new(n: usize) -> Self {
        Self {
            couplings: BTreeMap::new(),
            h: vec![0.0; n],
            offset: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.h.len()
    }

    /// Adds to the coupling on the unordered pair `{i, j}`.
    pub fn add_coupling(&mut self, i: usize, j: usize, v: f64) -> Result<()> {
        let n = self.dim();
        if i == j {
            return Err(Error::InvalidParameter(format!(
                "self-coupling on spin {i}"
            )));
        }
        if i >= n || j >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: i.max(j) + 1,
            });
        }
        let key = (i.min(j), i.max(j));
        *self.couplings.entry(key).or_insert(0.0) += v;
        Ok(())
    }

    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn couplings(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.couplings.iter().map(|(&k, &v)| (k, v))
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    pub fn set_field(&mut self, i: usize, v: f64) {
        self.h[i] = v;
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn set_offset(&mut self, v: f64) {
        self.offset = v;
    }

    pub fn energy(&self, s: &[i8]) -> Result<f64> {
        if s.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: s.len(),
            });
        }
        let mut e = self.offset;
        for (&(i, j), &v) in &self.couplings {
            e += v * f64::from(s[i]) * f64::from(s[j]);
        }
        for (hi, &si) in self.h.iter().zip(s) {
            e += hi * f64::from(si);
        }
        Ok(e)
    }

    /// Dense symmetric coupling matrix (zero diagonal).
    pub fn coupling_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(self.dim());
        for (&(i, j), &v) in &self.couplings {
            m.set_sym(i, j, v);
        }
        m
    }
}

/// Substitutes `x = (s + 1) / 2`; values agree exactly, offset included.
pub fn qubo_to_ising(f: &QuadraticFunction) -> IsingModel {
    let n = f.dim();
    let q = f.matrix();
    let mut m = IsingModel::new(n);
    let mut offset = f.constant_term();
    for i in 0..n {
        let d = q.get(i, i);
        m.h[i] += 0.5 * d;
        offset += 0.5 * d;
        for j in i + 1..n {
            // Both ordered pairs: 2 Q_ij x_i x_j = Q_ij (s_i s_j + s_i + s_j + 1) / 2.
            let v = q.get(i, j);
            if v != 0.0 {
                m.couplings.insert((i, j), 0.5 * v);
                m.h[i] += 0.5 * v;
                m.h[j] += 0.5 * v;
                offset += 0.5 * v;
            }
        }
    }
    m.offset = offset;
    m
}

/// Substitutes `s = 2x - 1`.
pub fn ising_to_qubo(m: &IsingModel) -> QuadraticFunction {
    let n = m.dim();
    let mut q = Matrix::zeros(n);
    let mut c = m.offset;
    for (&(i, j), &v) in &m.couplings {
        q.set_sym(i, j, q.get(i, j) + 2.0 * v);
        q.set(i, i, q.get(i, i) - 2.0 * v);
        q.set(j, j, q.get(j, j) - 2.0 * v);
        c += v;
    }
    for (i, &hi) in m.h.iter().enumerate() {
        q.set(i, i, q.get(i, i) + 2.0 * hi);
        c -= hi;
    }
    QuadraticFunction::new(q, c).expect("constructed symmetric")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::eval_gqss;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> Matrix {
        let data = (0..n * n).map(|_| rng.random_range(-5.0..5.0)).collect();
        Matrix::from_flat(n, data).unwrap()
    }

    fn all_vectors(n: usize) -> impl Iterator<Item = BitVector> {
        (0..1u64 << n).map(move |m| BitVector::from_mask(m, n))
    }

    #[test]
    fn symmetrize_examples() {
        let q = Matrix::from_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let s = symmetrize(&q);
        assert_eq!(
            s,
            Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
        );
        assert_eq!(symmetrize(&s), s);

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let q = random_matrix(&mut rng, 4);
        let s = symmetrize(&q);
        assert!(s.is_symmetric());
        for x in all_vectors(4) {
            assert!((q.form(&x) - s.form(&x)).abs() < 1e-12);
        }
    }

    #[test]
    fn absorb_linear_examples() {
        let q = absorb_linear(&Matrix::zeros(3), &[1.0; 3]).unwrap();
        assert_eq!(q, Matrix::identity(3));
        for x in all_vectors(3) {
            assert_eq!(q.form(&x), x.count_ones() as f64);
        }
        let q0 = Matrix::identity(2);
        assert_eq!(absorb_linear(&q0, &[0.0, 0.0]).unwrap(), q0);
        assert!(absorb_linear(&q0, &[1.0]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let q = symmetrize(&random_matrix(&mut rng, 6));
        let b: Vec<f64> = (0..6).map(|_| rng.random_range(-3.0..3.0)).collect();
        let qb = absorb_linear(&q, &b).unwrap();
        for x in all_vectors(6) {
            let lin: f64 = x.ones().map(|i| b[i]).sum();
            assert!((qb.form(&x) - (q.form(&x) + lin)).abs() < 1e-12);
        }
    }

    #[test]
    fn preprocess_zeroes_conflicting_weights() {
        let mut w = Matrix::zeros(3);
        w.set_sym(0, 1, 5.0);
        w.set_sym(1, 2, 2.0);
        let mut a = Matrix::zeros(3);
        a.set_sym(0, 1, 1.0);
        let inst = preprocess_gqss(&w, &[a]).unwrap();
        assert_eq!(inst.w().get(0, 1), 0.0);
        assert_eq!(inst.w().get(1, 2), 2.0);

        let inst = preprocess_gqss(&w, &[Matrix::zeros(3)]).unwrap();
        assert_eq!(inst.w(), &w);

        let mut neg = Matrix::zeros(3);
        neg.set_sym(0, 2, -1.0);
        assert!(matches!(
            preprocess_gqss(&w, &[neg]),
            Err(Error::NegativeEntry { .. })
        ));
    }

    /// max x^T W x s.t. x^T A_k x = 0 for every k, by enumeration.
    fn brute_constrained(w: &Matrix, a_list: &[Matrix]) -> f64 {
        all_vectors(w.dim())
            .filter(|x| a_list.iter().all(|a| a.form(x) == 0.0))
            .map(|x| w.form(&x))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    #[test]
    fn preprocess_preserves_constrained_optimum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.random_range(3..=10);
            let mut w = Matrix::zeros(n);
            for i in 0..n {
                for j in i..n {
                    w.set_sym(i, j, rng.random_range(-5..=5) as f64);
                }
            }
            let a_list: Vec<Matrix> = (0..3)
                .map(|_| {
                    let mut a = Matrix::zeros(n);
                    for i in 0..n {
                        for j in i + 1..n {
                            if rng.random_bool(0.2) {
                                a.set_sym(i, j, rng.random_range(1..=3) as f64);
                            }
                        }
                    }
                    a
                })
                .collect();
            let inst = preprocess_gqss(&w, &a_list).unwrap();
            let after = all_vectors(n)
                .filter_map(|x| {
                    let r = eval_gqss(&inst, &x).unwrap();
                    r.feasible.then_some(r.objective_value)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(after, brute_constrained(&w, &a_list));
        }
    }

    #[test]
    fn gadget_table() {
        for mask in 0..8u32 {
            let (x, y, z) = (mask & 1 == 1, mask & 2 == 2, mask & 4 == 4);
            let g = gadget(x, y, z);
            if z == (x && y) {
                assert_eq!(g, 0);
            } else {
                assert!(g < 0);
            }
        }
    }

    #[test]
    fn cubic_monomial_reduces_to_one_aux() {
        let p = PolynomialFunction::from_terms(3, &[(vec![0, 1, 2], 1.0)]).unwrap();
        let (f, cert) = reduce_degree(&p, default_gadget_weight(&p)).unwrap();
        assert_eq!(cert.reduced_n, 4);
        assert_eq!(
            cert.aux_map,
            vec![AuxVariable {
                aux: 3,
                left: 0,
                right: 1
            }]
        );
        let best = all_vectors(4)
            .map(|x| (f.eval(&x).unwrap(), x))
            .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
            .unwrap();
        assert_eq!(best.0, 1.0);
        assert_eq!(best.1, BitVector::ones_vec(4));
    }

    #[test]
    fn quadratic_input_is_a_fixed_point() {
        let p =
            PolynomialFunction::from_terms(3, &[(vec![], 2.0), (vec![0], -1.0), (vec![1, 2], 3.0)])
                .unwrap();
        let (f, cert) = reduce_degree(&p, default_gadget_weight(&p)).unwrap();
        assert!(cert.aux_map.is_empty());
        assert_eq!(cert.reduced_n, 3);
        for x in all_vectors(3) {
            assert_eq!(f.eval(&x).unwrap(), p.eval(&x).unwrap());
        }
    }

    #[test]
    fn reduce_degree_rejects_small_weight() {
        let p = PolynomialFunction::from_terms(3, &[(vec![0, 1, 2], -2.0)]).unwrap();
        assert!(reduce_degree(&p, 2.0).is_err());
        assert!(reduce_degree(&p, 2.5).is_ok());
    }

    #[test]
    fn most_frequent_pair_is_rewritten_first() {
        // {1,2} occurs in both quartic-ish terms, {0,1} only once.
        let p = PolynomialFunction::from_terms(4, &[(vec![0, 1, 2], 1.0), (vec![1, 2, 3], 1.0)])
            .unwrap();
        let (_, cert) = reduce_degree(&p, 10.0).unwrap();
        assert_eq!(cert.aux_map.len(), 1);
        assert_eq!((cert.aux_map[0].left, cert.aux_map[0].right), (1, 2));
    }

    #[test]
    fn lift_satisfies_every_gadget() {
        let p =
            PolynomialFunction::from_terms(4, &[(vec![0, 1, 2, 3], 2.0), (vec![0, 2, 3], -1.0)])
                .unwrap();
        let (f, cert) = reduce_degree(&p, default_gadget_weight(&p)).unwrap();
        for x in all_vectors(4) {
            let lifted = cert.lift(&x).unwrap();
            assert_eq!(f.eval(&lifted).unwrap(), p.eval(&x).unwrap());
        }
    }

    #[test]
    fn ising_examples() {
        let mut q = Matrix::zeros(2);
        q.set_sym(0, 1, 0.5);
        let m = qubo_to_ising(&QuadraticFunction::new(q, 0.0).unwrap());
        assert_eq!(m.coupling(0, 1), 0.25);
        assert_eq!(m.fields(), &[0.25, 0.25]);
        assert_eq!(m.offset(), 0.25);

        let m = qubo_to_ising(&QuadraticFunction::constant(3, 4.0));
        assert_eq!(m.couplings().count(), 0);
        assert_eq!(m.fields(), &[0.0; 3]);
        assert_eq!(m.offset(), 4.0);

        assert_eq!(
            ising_to_qubo(&IsingModel::new(2)),
            QuadraticFunction::zero(2)
        );

        let mut m = IsingModel::new(2);
        m.add_coupling(0, 1, 1.0).unwrap();
        let f = ising_to_qubo(&m);
        assert_eq!(f.matrix().get(0, 1), 2.0);
        assert_eq!(f.matrix().get(1, 0), 2.0);
        assert_eq!(f.matrix().get(0, 0), -2.0);
        assert_eq!(f.matrix().get(1, 1), -2.0);
        assert_eq!(f.constant_term(), 1.0);
        assert!(m.add_coupling(1, 1, 1.0).is_err());
    }
}
