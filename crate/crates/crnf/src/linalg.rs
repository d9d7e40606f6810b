//! Exact Gauss-Jordan elimination over rationals and Gaussian rationals.

use crate::series::coeff::{self, Rational, C};
use malachite_base::num::arithmetic::traits::Reciprocal;
use malachite_base::num::basic::traits::{One, Zero};

pub trait Field: Clone + PartialEq {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn inv(&self) -> Option<Self>;
}

impl Field for Rational {
    fn zero() -> Self {
        Rational::ZERO
    }
    fn one() -> Self {
        Rational::ONE
    }
    fn is_zero(&self) -> bool {
        *self == Rational::ZERO
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn inv(&self) -> Option<Self> {
        (!Field::is_zero(self)).then(|| self.reciprocal())
    }
}

impl Field for C {
    fn zero() -> Self {
        coeff::zero()
    }
    fn one() -> Self {
        coeff::one()
    }
    fn is_zero(&self) -> bool {
        coeff::is_zero(self)
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        coeff::mul(self, other)
    }
    fn inv(&self) -> Option<Self> {
        coeff::inv(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Solution<F> {
    Unique(Vec<F>),
    Underdetermined { rank: usize, unknowns: usize },
    Inconsistent,
}

/// Solves A x = b with A given row-wise (rows may outnumber columns).
pub fn solve<F: Field>(mut a: Vec<Vec<F>>, mut b: Vec<F>, ncols: usize) -> Solution<F> {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(p) = (row..nrows).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(row, p);
        b.swap(row, p);
        let inv = a[row][col].inv().expect("nonzero pivot");
        for k in col..ncols {
            a[row][k] = a[row][k].mul(&inv);
        }
        b[row] = b[row].mul(&inv);
        for r in 0..nrows {
            if r == row || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for k in col..ncols {
                if !a[row][k].is_zero() {
                    let t = factor.mul(&a[row][k]);
                    a[r][k] = a[r][k].sub(&t);
                }
            }
            let t = factor.mul(&b[row]);
            b[r] = b[r].sub(&t);
        }
        pivots.push(col);
        row += 1;
        if row == nrows {
            break;
        }
    }
    if (row..nrows).any(|r| !b[r].is_zero()) {
        return Solution::Inconsistent;
    }
    if pivots.len() < ncols {
        return Solution::Underdetermined {
            rank: pivots.len(),
            unknowns: ncols,
        };
    }
    let mut x = vec![F::zero(); ncols];
    for (r, &col) in pivots.iter().enumerate() {
        x[col] = b[r].clone();
    }
    Solution::Unique(x)
}

/// Inverse of a square matrix, or `None` when singular.
pub fn invert<F: Field>(m: &[Vec<F>]) -> Option<Vec<Vec<F>>> {
    let n = m.len();
    let mut cols: Vec<Vec<F>> = vec![Vec::with_capacity(n); n];
    for j in 0..n {
        let e: Vec<F> = (0..n).map(|i| if i == j { F::one() } else { F::zero() }).collect();
        match solve(m.to_vec(), e, n) {
            Solution::Unique(x) => cols[j] = x,
            _ => return None,
        }
    }
    Some((0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::from_signeds(p, d)
    }

    #[test]
    fn unique_solution() {
        let a = vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(3, 1)]];
        let b = vec![q(3, 1), q(5, 1)];
        assert_eq!(solve(a, b, 2), Solution::Unique(vec![q(4, 5), q(7, 5)]));
    }

    #[test]
    fn detects_rank_deficiency_and_inconsistency() {
        let a = vec![vec![q(1, 1), q(1, 1)], vec![q(2, 1), q(2, 1)]];
        assert!(matches!(
            solve(a.clone(), vec![q(1, 1), q(2, 1)], 2),
            Solution::Underdetermined { rank: 1, .. }
        ));
        assert_eq!(solve(a, vec![q(1, 1), q(3, 1)], 2), Solution::Inconsistent);
    }

    #[test]
    fn gaussian_inverse() {
        let m = vec![
            vec![coeff::complex_ratio((1, 1), (1, 1)), coeff::int(2)],
            vec![coeff::int(0), coeff::i_unit()],
        ];
        let inv = invert(&m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let mut s = coeff::zero();
                for k in 0..2 {
                    s += coeff::mul(&m[i][k], &inv[k][j]);
                }
                assert_eq!(s, if i == j { coeff::one() } else { coeff::zero() });
            }
        }
    }
}
