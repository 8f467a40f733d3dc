//! Dense exact Gaussian elimination over the rationals.

use num_traits::{One, Zero};
use serde::Serialize;

use crate::rational::Rational;

/// Bookkeeping for rational blow-up.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SolveStats {
    /// Linear systems solved by elimination.
    pub systems: u64,
    /// Largest dimension among them.
    pub max_dimension: usize,
    /// Largest numerator bit length seen in any intermediate or result.
    pub max_numerator_bits: u64,
}

impl SolveStats {
    pub fn observe(&mut self, r: &Rational) {
        self.max_numerator_bits = self.max_numerator_bits.max(r.numer().bits());
    }

    pub fn merge(&mut self, other: &SolveStats) {
        self.systems += other.systems;
        self.max_dimension = self.max_dimension.max(other.max_dimension);
        self.max_numerator_bits = self.max_numerator_bits.max(other.max_numerator_bits);
    }
}

/// Solves `a x = b`. Returns `None` if `a` is singular.
///
/// `BigRational` keeps every entry in lowest terms, so fractions are reduced
/// after each pivot step.
pub fn solve(a: Vec<Vec<Rational>>, b: Vec<Rational>, stats: &mut SolveStats) -> Option<Vec<Rational>> {
    let cols = b.into_iter().map(|v| vec![v]).collect();
    let x = solve_multi(a, cols, stats)?;
    Some(x.into_iter().map(|mut row| row.pop().expect("one column")).collect())
}

/// Inverse of a square matrix, or `None` if it is singular.
pub fn invert(a: Vec<Vec<Rational>>, stats: &mut SolveStats) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    let id = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect();
    solve_multi(a, id, stats)
}

/// Solves `a X = b` for a matrix right-hand side with rows indexed like `a`.
pub fn solve_multi(
    mut a: Vec<Vec<Rational>>,
    mut b: Vec<Vec<Rational>>,
    stats: &mut SolveStats,
) -> Option<Vec<Vec<Rational>>> {
    let n = b.len();
    assert!(a.len() == n && a.iter().all(|row| row.len() == n), "system must be square");
    let m = b.first().map_or(0, Vec::len);
    stats.systems += 1;
    stats.max_dimension = stats.max_dimension.max(n);

    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = a[col][col].recip();
        if !inv.is_one() {
            for v in a[col][col..].iter_mut() {
                *v *= &inv;
            }
            for v in b[col].iter_mut() {
                *v *= &inv;
            }
        }
        let (a_up, a_low) = a.split_at_mut(col + 1);
        let (b_up, b_low) = b.split_at_mut(col + 1);
        let (prow, pb) = (&a_up[col], &b_up[col]);
        for (row, brow) in a_low.iter_mut().zip(b_low.iter_mut()) {
            let f = row[col].clone();
            if f.is_zero() {
                continue;
            }
            for k in col..n {
                if !prow[k].is_zero() {
                    row[k] -= &f * &prow[k];
                    stats.observe(&row[k]);
                }
            }
            for k in 0..m {
                if !pb[k].is_zero() {
                    brow[k] -= &f * &pb[k];
                    stats.observe(&brow[k]);
                }
            }
        }
    }
    for col in (0..n).rev() {
        let (b_up, b_low) = b.split_at_mut(col + 1);
        let target = &mut b_up[col];
        for (k, solved) in b_low.iter().enumerate() {
            let f = &a[col][col + 1 + k];
            if f.is_zero() {
                continue;
            }
            for j in 0..m {
                if !solved[j].is_zero() {
                    target[j] -= f * &solved[j];
                }
            }
        }
        for v in target.iter() {
            stats.observe(v);
        }
    }
    Some(b)
}

/// Solves `(I - z) x = r` where `z` is given as sparse rows `(column, value)`.
pub fn solve_fixpoint(
    z: &[Vec<(usize, Rational)>],
    r: Vec<Rational>,
    stats: &mut SolveStats,
) -> Option<Vec<Rational>> {
    let n = r.len();
    let mut a = vec![vec![Rational::zero(); n]; n];
    for (i, row) in z.iter().enumerate() {
        a[i][i] = Rational::one();
        for (j, v) in row {
            a[i][*j] -= v;
        }
    }
    solve(a, r, stats)
}
