//! Exhaustive enumeration in Gray-code order.
//!
//! Consecutive Gray codes differ in one bit, so the form value is updated
//! in O(1) from per-variable fields and the fields in O(n) per flip. The
//! cube is split into blocks over the top bits and blocks are walked in
//! parallel, then merged in block order.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{OracleResult, Sense};
use crate::error::{Error, Result};
use crate::model::{BitVector, Matrix, QuadraticFunction};

pub const DEFAULT_EXACT_CAP: usize = 28;

/// Below this dimension a single block is used.
const PARALLEL_THRESHOLD: usize = 14;
const MAX_SPLIT_BITS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSolver {
    #[serde(default = "default_cap")]
    pub cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_EXACT_CAP
}

impl Default for ExactSolver {
    fn default() -> Self {
        Self {
            cap: DEFAULT_EXACT_CAP,
        }
    }
}

impl ExactSolver {
    pub fn with_cap(cap: usize) -> Self {
        Self { cap }
    }

    pub fn check_cap(&self, n: usize) -> Result<()> {
        if n > self.cap || n > 63 {
            return Err(Error::CapExceeded {
                n,
                cap: self.cap.min(63),
            });
        }
        Ok(())
    }

    pub fn solve(&self, f: &QuadraticFunction, sense: Sense, _call: u64) -> Result<OracleResult> {
        self.check_cap(f.dim())?;
        let q = match sense {
            Sense::Max => f.matrix().clone(),
            Sense::Min => f.matrix().scale(-1.0),
        };
        let mask = argmax_mask(&q, |_| true);
        let x = BitVector::from_mask(mask, f.dim());
        let value = f.eval(&x)?;
        Ok(OracleResult::from_reads(sense, vec![(x, value)]))
    }
}

/// Exact optimum with the default cap.
pub fn solve_exact(f: &QuadraticFunction, sense: Sense) -> Result<OracleResult> {
    ExactSolver::default().solve(f, sense, 0)
}

/// Incrementally maintained `x^T Q x` under single-bit flips.
pub struct FormTracker<'a> {
    q: &'a Matrix,
    field: Vec<f64>,
    value: f64,
}

impl<'a> FormTracker<'a> {
    /// Starts at the assignment given by `mask`.
    pub fn new(q: &'a Matrix, mask: u64) -> Self {
        let n = q.dim();
        let mut field = vec![0.0; n];
        for (i, fi) in field.iter_mut().enumerate() {
            *fi = (0..n)
                .filter(|&j| j != i && mask >> j & 1 == 1)
                .map(|j| q.get(i, j))
                .sum();
        }
        let value = (0..n)
            .filter(|&i| mask >> i & 1 == 1)
            .map(|i| q.get(i, i) + field[i])
            .sum();
        Self { q, field, value }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.value
    }

    /// Change in value if bit `i` (currently `set`) were flipped.
    #[inline]
    pub fn delta(&self, i: usize, set: bool) -> f64 {
        let d = self.q.get(i, i) + 2.0 * self.field[i];
        if set {
            -d
        } else {
            d
        }
    }

    /// Flips bit `i`, which is currently `set`.
    #[inline]
    pub fn flip(&mut self, i: usize, set: bool) {
        self.value += self.delta(i, set);
        let sign = if set { -1.0 } else { 1.0 };
        let row = self.q.row(i);
        for (j, fj) in self.field.iter_mut().enumerate() {
            if j != i {
                *fj += sign * row[j];
            }
        }
    }
}

/// True when `a` precedes `b` lexicographically (entry 0 compared first).
#[inline]
pub(crate) fn lex_less(a: u64, b: u64) -> bool {
    let d = a ^ b;
    d != 0 && a >> d.trailing_zeros() & 1 == 0
}

#[inline]
fn tie_tol(v: f64) -> f64 {
    1e-9 * v.abs().max(1.0)
}

/// Running best under "larger value, then lexicographically smaller".
#[derive(Clone, Copy)]
pub(crate) struct Best {
    pub value: f64,
    pub mask: u64,
}

impl Best {
    pub fn empty() -> Self {
        Self {
            value: f64::NEG_INFINITY,
            mask: u64::MAX,
        }
    }

    #[inline]
    pub fn offer(&mut self, value: f64, mask: u64) {
        let tol = tie_tol(self.value);
        if value > self.value + tol
            || ((value - self.value).abs() <= tol && lex_less(mask, self.mask))
        {
            *self = Self { value, mask };
        }
    }

    pub fn is_empty(&self) -> bool {
        self.value == f64::NEG_INFINITY
    }
}

/// Walks every assignment once; `visit` receives the current mask and the
/// index of the bit just flipped (`None` for a block's first assignment).
pub(crate) fn gray_blocks<T, F>(n: usize, init: impl Fn(u64) -> T + Sync, visit: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut T, u64, Option<(usize, bool)>) + Sync,
{
    let split = if n >= PARALLEL_THRESHOLD {
        MAX_SPLIT_BITS.min(n)
    } else {
        0
    };
    let low = n - split;
    (0..1u64 << split)
        .into_par_iter()
        .map(|block| {
            let mut mask = block << low;
            let mut state = init(mask);
            visit(&mut state, mask, None);
            for t in 1..1u64 << low {
                let i = t.trailing_zeros() as usize;
                let was_set = mask >> i & 1 == 1;
                mask ^= 1 << i;
                visit(&mut state, mask, Some((i, was_set)));
            }
            state
        })
        .collect()
}

/// Mask of the maximizer of `x^T Q x` over assignments accepted by `keep`,
/// lexicographically smallest among ties.
pub(crate) fn argmax_mask(q: &Matrix, keep: impl Fn(u64) -> bool + Sync) -> u64 {
    let n = q.dim();
    let blocks = gray_blocks(
        n,
        |mask| (FormTracker::new(q, mask), Best::empty(), 0u32),
        |(tracker, best, steps), mask, flipped| {
            if let Some((i, was_set)) = flipped {
                tracker.flip(i, was_set);
                *steps += 1;
                if cfg!(debug_assertions) && *steps % 1024 == 0 {
                    let fresh = q.form(&BitVector::from_mask(mask, n));
                    debug_assert!((fresh - tracker.value()).abs() <= 1e-6 * fresh.abs().max(1.0));
                }
            }
            if keep(mask) {
                best.offer(tracker.value(), mask);
            }
        },
    );
    let mut best = Best::empty();
    for (_, b, _) in blocks {
        if !b.is_empty() {
            best.offer(b.value, b.mask);
        }
    }
    best.mask
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::build_penalized;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn naive_best(f: &QuadraticFunction) -> (BitVector, f64) {
        let n = f.dim();
        let mut best: Option<(BitVector, f64)> = None;
        for m in 0..1u64 << n {
            let x = BitVector::from_mask(m, n);
            let v = f.eval(&x).unwrap();
            match &best {
                Some((bx, bv)) if *bv > v || (*bv == v && *bx <= x) => {}
                _ => best = Some((x, v)),
            }
        }
        best.unwrap()
    }

    fn random_integer_function(rng: &mut ChaCha8Rng, n: usize) -> QuadraticFunction {
        let mut q = Matrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                q.set_sym(i, j, rng.random_range(-5..=5) as f64);
            }
        }
        QuadraticFunction::new(q, rng.random_range(-3..=3) as f64).unwrap()
    }

    #[test]
    fn linear_sum_maximized_by_all_ones() {
        let f = QuadraticFunction::linear(&[1.0; 5]);
        let r = solve_exact(&f, Sense::Max).unwrap();
        assert_eq!(r.best, (BitVector::ones_vec(5), 5.0));
        assert_eq!(r.reads, 1);
    }

    #[test]
    fn product_table() {
        let mut q = Matrix::zeros(2);
        q.set_sym(0, 1, 0.5);
        let f = QuadraticFunction::new(q, 0.0).unwrap();
        for m in 0..4 {
            let x = BitVector::from_mask(m, 2);
            assert_eq!(f.eval(&x).unwrap(), (m == 3) as u8 as f64);
        }
        assert_eq!(solve_exact(&f, Sense::Max).unwrap().best.1, 1.0);
        // All four assignments tie at 0 for the minimum; all-zeros is first.
        assert_eq!(
            solve_exact(&f, Sense::Min).unwrap().best,
            (BitVector::zeros(2), 0.0)
        );
    }

    #[test]
    fn tightness_example_penalized_optimum() {
        let inst = crate::model::GqssInstance::tightness_example(3.0);
        let f = build_penalized(&inst, 2.0).unwrap();
        let r = solve_exact(&f, Sense::Max).unwrap();
        assert_eq!(r.best, (BitVector::from_u8(&[1, 1, 1, 1, 0]).unwrap(), 8.0));
    }

    #[test]
    fn agrees_with_naive_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let n = rng.random_range(1..=12);
            let f = random_integer_function(&mut rng, n);
            for sense in [Sense::Max, Sense::Min] {
                let r = solve_exact(&f, sense).unwrap();
                let expected = match sense {
                    Sense::Max => naive_best(&f),
                    Sense::Min => {
                        let (x, v) = naive_best(&f.negate());
                        (x, -v)
                    }
                };
                assert_eq!(r.best, expected);
            }
        }
    }

    #[test]
    fn parallel_blocks_agree_with_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..3 {
            let f = random_integer_function(&mut rng, 15);
            assert_eq!(solve_exact(&f, Sense::Max).unwrap().best, naive_best(&f));
        }
    }

    #[test]
    fn tracker_matches_fresh_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let n = 9;
        let f = random_integer_function(&mut rng, n);
        let q = f.matrix();
        let mut mask = rng.random_range(0..1u64 << n);
        let mut t = FormTracker::new(q, mask);
        for _ in 0..500 {
            let i = rng.random_range(0..n);
            t.flip(i, mask >> i & 1 == 1);
            mask ^= 1 << i;
            assert_eq!(t.value(), q.form(&BitVector::from_mask(mask, n)));
        }
    }

    #[test]
    fn cap_is_enforced() {
        let f = QuadraticFunction::zero(10);
        let err = ExactSolver::with_cap(8)
            .solve(&f, Sense::Max, 0)
            .unwrap_err();
        assert!(matches!(err, Error::CapExceeded { n: 10, cap: 8 }));
        assert!(err.to_string().contains('8'));
    }

    #[test]
    fn lex_order_on_masks() {
        assert!(lex_less(0b10, 0b01)); // (0,1) < (1,0)
        assert!(!lex_less(0b01, 0b10));
        assert!(!lex_less(5, 5));
    }
}
